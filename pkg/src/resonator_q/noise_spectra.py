"""Thermal-noise displacement spectra: synthesis, peak fits, gas damping.

The displacement spectral density of a damped oscillator in contact with a
bath at temperature T is taken as

    S_x(Om) = 4 k_B T Gamma_m / m_eff / ((Om_m^2 - Om^2)^2 + Gamma_m^2 Om^2)

in m^2/Hz on an ordinary-frequency grid (single-sided, normalized so that
Int_0^inf S_x df = k_B T / (m_eff Om_m^2), the equipartition variance).
Synthetic traces carry per-bin gamma scatter emulating an averaged
periodogram (exponential for a single average).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar
from scipy.constants import k as k_B
from scipy.optimize import least_squares

from .core import TWO_PI
from .errors import (ConvergenceError, DataError, FitDegenerateError,
                     InsufficientSpanError)


class GridCoverageWarning(UserWarning):
    """The frequency grid does not bracket the requested peak."""


@dataclass(frozen=True)
class SpectrumTrace:
    frequencies: np.ndarray   # Hz, strictly increasing
    psd: np.ndarray           # m^2/Hz
    noise_floor: float = 0.0  # m^2/Hz

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        s = np.asarray(self.psd, dtype=float)
        if f.ndim != 1 or s.shape != f.shape:
            raise DataError("frequencies and psd must be 1-d arrays of equal length")
        if not np.all(np.diff(f) > 0):
            raise DataError("frequency grid must be strictly increasing")
        if np.any(s < 0):
            raise DataError("psd must be nonnegative")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "psd", s)


@dataclass(frozen=True)
class PeakFit:
    omega_m: float     # rad/s
    gamma_m: float     # rad/s
    amplitude: float   # numerator of the line shape, m^2/Hz * (rad/s)^4
    background: float  # m^2/Hz
    residual_norm: float

    @property
    def q(self) -> float:
        return self.omega_m / self.gamma_m

    @property
    def frequency_hz(self) -> float:
        return self.omega_m / TWO_PI


def thermal_peak_psd(omega, omega_m, gamma_m, m_eff, temperature):
    """Closed-form thermal line shape (no floor, no scatter)."""
    omega = np.asarray(omega, dtype=float)
    return (4.0 * k_B * temperature * gamma_m / m_eff
            / ((omega_m**2 - omega**2) ** 2 + gamma_m**2 * omega**2))


def synth_thermal_spectrum(omega_m, gamma_m, m_eff, temperature, frequencies,
                           noise_floor: float = 0.0, seed: int | None = None,
                           averages: int = 1, scatter: bool = True) -> SpectrumTrace:
    """Synthesize a thermal-peak trace on the given Hz grid.

    With scatter enabled, each bin is multiplied by an independent
    Gamma(averages)/averages variate (exponential for averages=1), the
    statistics of an averages-fold averaged periodogram.  Identical seeds
    give identical traces.
    """
    for name, val in (("omega_m", omega_m), ("gamma_m", gamma_m),
                      ("m_eff", m_eff), ("temperature", temperature)):
        if val <= 0:
            raise DataError(f"{name} must be positive")
    f = np.asarray(frequencies, dtype=float)
    if f[0] * TWO_PI > omega_m or f[-1] * TWO_PI < omega_m:
        warnings.warn("frequency grid does not cover the peak",
                      GridCoverageWarning, stacklevel=2)
    mean = thermal_peak_psd(TWO_PI * f, omega_m, gamma_m, m_eff, temperature) \
        + noise_floor
    if scatter:
        rng = np.random.default_rng(seed)
        mean = mean * rng.gamma(shape=averages, scale=1.0 / averages, size=f.shape)
    return SpectrumTrace(frequencies=f, psd=mean, noise_floor=noise_floor)


def fit_lorentzian(trace: SpectrumTrace, window=None) -> PeakFit:
    """Fit one thermal peak plus constant background inside a window.

    The model is S(f) = A / ((Om_m^2 - Om^2)^2 + Gamma^2 Om^2) + B with
    Om = 2 pi f.  Initial values come from the peak bin and its half-maximum
    width; returns the fit with Q = Om_m/Gamma.
    """
    f = trace.frequencies
    s = trace.psd
    if window is not None:
        lo, hi = window
        mask = (f >= lo) & (f <= hi)
        if np.count_nonzero(mask) < 8:
            raise DataError("fit window contains fewer than 8 samples")
        f, s = f[mask], s[mask]

    background0 = float(np.median(np.concatenate([s[: max(len(s) // 20, 2)],
                                                  s[-max(len(s) // 20, 2):]])))
    ipk = int(np.argmax(s))
    peak = s[ipk] - background0
    if peak <= 0 or s[ipk] < 3.0 * max(background0, np.finfo(float).tiny):
        raise DataError("no peak found above the background in the window")
    f0 = f[ipk]
    half = background0 + 0.5 * peak
    above = s >= half
    lo_idx = ipk
    while lo_idx > 0 and above[lo_idx - 1]:
        lo_idx -= 1
    hi_idx = ipk
    while hi_idx < len(s) - 1 and above[hi_idx + 1]:
        hi_idx += 1
    fwhm = max(f[hi_idx] - f[lo_idx], 2.0 * (f[1] - f[0]))
    om0 = TWO_PI * f0
    gamma0 = TWO_PI * fwhm
    amp0 = peak * gamma0**2 * om0**2

    om = TWO_PI * f
    s_scale = peak

    def residual(x):
        om_m, gamma, amp, bg = x * np.array([om0, gamma0, amp0, max(background0, s_scale * 1e-6)])
        model = amp / ((om_m**2 - om**2) ** 2 + gamma**2 * om**2) + bg
        return (model - s) / s_scale

    x0 = np.ones(4)
    if background0 <= 0:
        x0[3] = 0.0
    sol = least_squares(residual, x0, method="lm", xtol=1e-14, ftol=1e-14,
                        gtol=1e-14, max_nfev=10000)
    if not sol.success:
        raise ConvergenceError(f"peak fit did not converge: {sol.message}")
    om_m, gamma, amp, bg = sol.x * np.array(
        [om0, gamma0, amp0, max(background0, s_scale * 1e-6)])
    om_m, gamma = abs(om_m), abs(gamma)
    return PeakFit(omega_m=float(om_m), gamma_m=float(gamma),
                   amplitude=float(amp), background=float(bg),
                   residual_norm=float(np.sqrt(2.0 * sol.cost)))


def consistent_red_blue(q_red: float, q_blue: float, tolerance: float = 0.05) -> bool:
    """Check two detuning-side Q measurements agree within tolerance.

    Agreement indicates negligible radiation-pressure modification of the
    natural linewidth during the measurement.
    """
    if q_red <= 0 or q_blue <= 0:
        raise DataError("Q values must be positive")
    return abs(q_red - q_blue) / (0.5 * (q_red + q_blue)) <= tolerance


@dataclass(frozen=True)
class GasDampingFit:
    """Piecewise gas-damping model around a molecular/viscous crossover.

    Q^-1(p) = Q_int^-1 + c_mol * p          for p <= crossover
    Q^-1(p) = Q_int^-1 + c_vis * sqrt(p)    for p >  crossover

    Continuity at the crossover ties c_vis = c_mol * sqrt(crossover).
    """

    q_intrinsic: float
    c_molecular: float      # 1/(Q * mbar)
    c_viscous: float        # 1/(Q * sqrt(mbar))
    crossover_mbar: float
    gas_fraction_at_1mbar: float
    negligible_below_1mbar: bool
    residuals: np.ndarray

    def q_inverse(self, pressure_mbar) -> np.ndarray:
        p = np.asarray(pressure_mbar, dtype=float)
        gas = np.where(p <= self.crossover_mbar,
                       self.c_molecular * p,
                       self.c_viscous * np.sqrt(p))
        return 1.0 / self.q_intrinsic + gas


def fit_gas_damping(points, crossover_guess: float = 1.0) -> GasDampingFit:
    """Fit (pressure_mbar, Q) data with the continuous piecewise gas model."""
    pts = np.array([(float(p), float(q)) for p, q in points])
    if len(pts) < 4:
        raise InsufficientSpanError("gas fit needs at least 4 (p, Q) points")
    if np.any(pts[:, 0] <= 0) or np.any(pts[:, 1] <= 0):
        raise DataError("pressures and Qs must be positive")
    p = pts[:, 0]
    y = 1.0 / pts[:, 1]
    if np.max(p) / np.min(p) < 4.0:
        raise InsufficientSpanError("gas fit needs a pressure span >= factor 4")
    q_int0 = float(np.max(pts[:, 1]))
    c_mol0 = max((np.max(y) - np.min(y)) / np.max(p), 1e-12 / np.max(p))

    def residual(x):
        log_qi, log_cm, log_pc = x
        q_inv = 10.0**log_qi
        c_mol = 10.0**log_cm
        p_c = 10.0**log_pc
        gas = np.where(p <= p_c, c_mol * p, c_mol * np.sqrt(p_c) * np.sqrt(p))
        return (q_inv + gas - y) / y

    x0 = np.array([np.log10(1.0 / q_int0), np.log10(c_mol0),
                   np.log10(crossover_guess)])
    sol = least_squares(residual, x0, method="trf",
                        bounds=([-12, -16, np.log10(np.min(p)) - 3],
                                [0, 0, np.log10(np.max(p)) + 3]),
                        xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=5000)
    if not sol.success:
        raise ConvergenceError(f"gas-damping fit failed: {sol.message}")
    q_inv, c_mol, p_c = 10.0**sol.x
    gas_1mbar = c_mol * 1.0 if p_c >= 1.0 else c_mol * np.sqrt(p_c)
    return GasDampingFit(
        q_intrinsic=float(1.0 / q_inv),
        c_molecular=float(c_mol),
        c_viscous=float(c_mol * np.sqrt(p_c)),
        crossover_mbar=float(p_c),
        gas_fraction_at_1mbar=float(gas_1mbar / q_inv),
        negligible_below_1mbar=bool(gas_1mbar / q_inv < 0.01),
        residuals=sol.fun,
    )


def gas_term_exponent(points, q_intrinsic: float) -> float:
    """Log-log slope of the gas-limited Q versus pressure.

    Subtracts the intrinsic damping and regresses log10(Q_gas) on log10(p);
    the molecular regime gives -1, the viscous regime -1/2.
    """
    pts = np.array([(float(p), float(q)) for p, q in points])
    gas_inv = 1.0 / pts[:, 1] - 1.0 / q_intrinsic
    if np.any(gas_inv <= 0):
        raise DataError("some points show no gas damping above the intrinsic level")
    x = np.log10(pts[:, 0])
    if np.ptp(x) == 0:
        raise FitDegenerateError("pressure values are all identical")
    y = np.log10(1.0 / gas_inv)
    slope = np.polyfit(x, y, 1)[0]
    return float(slope)


def shot_noise_sensitivity(wavelength: float, finesse: float, power: float,
                           omega_m: float, kappa: float) -> float:
    """Shot-noise-limited displacement sensitivity in m/sqrt(Hz).

    sqrt(S_x) = lambda/(8 pi F) * sqrt(hbar * omega_opt / P)
                * sqrt(1 + 4 Om_m^2 / kappa^2)

    with omega_opt the optical angular frequency 2 pi c / lambda.
    """
    from scipy.constants import c as c_light
    for name, val in (("wavelength", wavelength), ("finesse", finesse),
                      ("power", power), ("omega_m", omega_m), ("kappa", kappa)):
        if val <= 0:
            raise DataError(f"{name} must be positive")
    omega_opt = TWO_PI * c_light / wavelength
    return (wavelength / (8.0 * np.pi * finesse)
            * np.sqrt(hbar * omega_opt / power)
            * np.sqrt(1.0 + 4.0 * omega_m**2 / kappa**2))


def read_spectrum_csv(path) -> SpectrumTrace:
    """Read a trace from a CSV with header f_hz,psd_m2_per_hz."""
    freqs, psd = [], []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"f_hz", "psd_m2_per_hz"}:
            raise DataError(f"expected CSV header f_hz,psd_m2_per_hz, got {reader.fieldnames}")
        for row in reader:
            try:
                freqs.append(float(row["f_hz"]))
                psd.append(float(row["psd_m2_per_hz"]))
            except ValueError as exc:
                raise DataError(f"bad spectrum row {row}: {exc}") from exc
    if not freqs:
        raise DataError(f"CSV {path} contains no data rows")
    return SpectrumTrace(frequencies=np.array(freqs), psd=np.array(psd))


def write_spectrum_csv(path, trace: SpectrumTrace) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["f_hz", "psd_m2_per_hz"])
        for f, s in zip(trace.frequencies, trace.psd):
            writer.writerow([repr(float(f)), repr(float(s))])
