"""Bundled synthetic dataset generators used by tests, demos and the CLI.

Every generator is deterministic for a fixed seed and mirrors a measurement
the package is meant to analyze: a dispersion series across an avoided
crossing, a temperature series of the damping, gas-damping pressure series
and a thermal-noise spectrum.
"""

from __future__ import annotations

import numpy as np

from .core import TWO_PI
from .coupled_modes import (BareModeTrend, CoupledModeModel,
                            synthesize_dispersion)
from .intrinsic_loss import MaterialTables, TlsParams, total_damping
from .noise_spectra import synth_thermal_spectrum


def canonical_crossing_model(g_hz: float = 14e6) -> CoupledModeModel:
    """Radial/flexural trends crossing near u = 0.52 with a strong coupling."""
    return CoupledModeModel(
        radial=BareModeTrend.from_hz(76e6, -18e6, 5200.0, 800.0),
        flexural=BareModeTrend.from_hz(90e6, -45e6, 110.0, 30.0),
        g=TWO_PI * g_hz,
    )


CROSSING_WINDOWS = ((0.0, 0.30), (0.72, 0.95))


def crossing_dataset(noise: float = 0.01, seed: int = 7, n_undercuts: int = 18):
    """Dispersion points on both branches of the canonical crossing model."""
    model = canonical_crossing_model()
    u = np.linspace(0.05, 0.90, n_undercuts)
    return model, synthesize_dispersion(model, u, noise=noise, seed=seed)


def temperature_dataset(noise: float = 0.03, seed: int = 11,
                        f_hz: float = 34e6, log10_tau0: float = -12.1,
                        c_tls: float = 1.8e-3, q_cl_inverse: float = 1.0 / 140_000,
                        t_range=(10.0, 300.0), n_points: int = 24):
    """(T, Q) series from the silica damping model plus a constant background."""
    tables = MaterialTables.fused_silica()
    tls = TlsParams.fused_silica(log10_tau0=log10_tau0, c_tls=c_tls)
    rng = np.random.default_rng(seed)
    omega = TWO_PI * f_hz
    temps = np.geomspace(t_range[0], t_range[1], n_points)
    data = []
    for t in temps:
        q = total_damping(t, omega, tls, tables, q_cl_inverse).q
        data.append((float(t), float(q * (1.0 + noise * rng.standard_normal()))))
    truth = {"log10_tau0": log10_tau0, "c_tls": c_tls,
             "q_cl_inverse": q_cl_inverse, "f_hz": f_hz}
    return truth, data


def gas_damping_dataset(q_intrinsic: float = 30_000.0,
                        c_molecular: float = 2.0e-6,
                        crossover_mbar: float = 10.0,
                        pressures=None, noise: float = 0.01, seed: int = 3):
    """(pressure, Q) series with molecular and viscous regimes."""
    if pressures is None:
        pressures = np.geomspace(0.05, 1000.0, 25)
    rng = np.random.default_rng(seed)
    c_vis = c_molecular * np.sqrt(crossover_mbar)
    data = []
    for p in pressures:
        gas = c_molecular * p if p <= crossover_mbar else c_vis * np.sqrt(p)
        q = 1.0 / (1.0 / q_intrinsic + gas)
        data.append((float(p), float(q * (1.0 + noise * rng.standard_normal()))))
    truth = {"q_intrinsic": q_intrinsic, "c_molecular": c_molecular,
             "crossover_mbar": crossover_mbar}
    return truth, data


def spectrum_dataset(f_m_hz: float = 24e6, q: float = 50_000.0,
                     m_eff: float = 1e-11, temperature: float = 300.0,
                     span_linewidths: float = 60.0, n_bins: int = 6000,
                     noise_floor: float = 1e-36, averages: int = 10,
                     seed: int = 5):
    """Scattered thermal-peak trace around one mechanical mode."""
    omega_m = TWO_PI * f_m_hz
    gamma_m = omega_m / q
    half_span = span_linewidths * gamma_m / TWO_PI / 2.0
    freqs = np.linspace(f_m_hz - half_span, f_m_hz + half_span, n_bins)
    trace = synth_thermal_spectrum(omega_m, gamma_m, m_eff, temperature, freqs,
                                   noise_floor=noise_floor, seed=seed,
                                   averages=averages)
    truth = {"f_m_hz": f_m_hz, "q": q, "m_eff": m_eff,
             "temperature": temperature}
    return truth, trace
