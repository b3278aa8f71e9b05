"""Clamping-loss quality parameter and its empirical calibration.

Modeling the clamp plane as a membrane radiating acoustic power
P = c*rho*Omega^2 * Int |dz|^2 dA into the substrate gives a predicted
clamping-limited quality factor

    D = ( c*rho/E_mech * Omega * Int_{A_p} |dz(r)|^2 dA )^(-1)

with E_mech the stored mechanical energy, c and rho the sound speed and
density of the radiating (silica) layer, and the integral taken over the
clamp plane.  Measured Qs follow Q ~ a*D in the clamping-dominated regime;
when other losses take over, Q^-1 = 1/(a*D) + 1/Q_sat.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DataError, FitDegenerateError, InsufficientSpanError


@dataclass(frozen=True)
class ModeSummary:
    """Minimal mode description for clamp-loss evaluation."""

    omega: float
    mechanical_energy: float
    clamp_overlap: float


@dataclass(frozen=True)
class ClampLossEstimate:
    """Predicted clamping-limited Q-scale for one mode.

    d_value is None (and unbounded is True) when the mode has exactly zero
    out-of-plane displacement on the clamp plane; no IEEE infinity is ever
    returned.
    """

    d_value: float | None
    radiated_power_at_unit_energy: float
    omega: float
    unbounded: bool = False

    def predicted_q(self, a: float) -> float | None:
        """Q predicted with an empirically calibrated slope a."""
        return None if self.unbounded else a * self.d_value


@dataclass(frozen=True)
class LinearCalibration:
    a: float
    residuals: np.ndarray
    stderr: float


@dataclass(frozen=True)
class SaturationFit:
    a: float
    q_sat: float | None
    q_sat_unbounded: bool
    residuals: np.ndarray


def compute_d(mode, material) -> ClampLossEstimate:
    """Evaluate the clamp-loss parameter D for a solved or measured mode.

    Args:
        mode: object with omega (rad/s), mechanical_energy (J) and
            clamp_overlap (m^4) attributes, e.g. a fem ModeSolution.
        material: the radiating layer; needs density and sound_speed.
    """
    if mode.mechanical_energy <= 0:
        raise DataError("mode mechanical energy must be positive")
    if mode.clamp_overlap < 0:
        raise DataError("clamp overlap cannot be negative")
    c = material.sound_speed
    rho = material.density
    power_per_joule = c * rho * mode.omega**2 * mode.clamp_overlap / mode.mechanical_energy
    if mode.clamp_overlap == 0.0:
        return ClampLossEstimate(None, 0.0, mode.omega, unbounded=True)
    d = mode.mechanical_energy / (c * rho * mode.omega * mode.clamp_overlap)
    return ClampLossEstimate(d, power_per_joule, mode.omega)


def calibrate_linear(pairs) -> LinearCalibration:
    """Zero-intercept least-squares slope a of measured Q versus D."""
    d = np.array([float(p[0]) for p in pairs])
    q = np.array([float(p[1]) for p in pairs])
    if len(d) < 2:
        raise DataError("need at least 2 (D, Q) pairs")
    if not np.all(np.isfinite(d)):
        raise DataError("all D values must be finite")
    spread = np.ptp(d)
    if spread <= 1e-9 * np.max(np.abs(d)):
        raise FitDegenerateError("all D values identical: slope is not testable")
    a = float(d @ q / (d @ d))
    residuals = q - a * d
    dof = max(len(d) - 1, 1)
    stderr = float(np.sqrt((residuals @ residuals) / dof / (d @ d)))
    return LinearCalibration(a=a, residuals=residuals, stderr=stderr)


def fit_saturation(points) -> SaturationFit:
    """Fit Q^-1 = 1/(a*D) + 1/Q_sat, linear in the damping domain.

    Requires >= 3 points spanning at least a factor 5 in D.  A fitted
    intercept <= 0 is reported as an unbounded Q_sat.
    """
    d = np.array([float(p[0]) for p in points])
    q = np.array([float(p[1]) for p in points])
    if len(d) < 3:
        raise DataError("need at least 3 (D, Q) points")
    if np.any(d <= 0) or np.any(q <= 0):
        raise DataError("D and Q must be positive")
    if np.max(d) / np.min(d) < 5.0:
        raise InsufficientSpanError("saturation fit needs a factor >= 5 span in D")

    x = 1.0 / d
    y = 1.0 / q
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    if slope <= 0:
        raise FitDegenerateError("fitted slope is nonpositive: data inconsistent "
                                 "with the saturation model")
    residuals = y - (slope * x + intercept)
    if intercept <= 0:
        return SaturationFit(a=1.0 / slope, q_sat=None, q_sat_unbounded=True,
                             residuals=residuals)
    return SaturationFit(a=1.0 / slope, q_sat=1.0 / intercept, q_sat_unbounded=False,
                         residuals=residuals)


def saturation_q(d_value: float, a: float, q_sat: float | None) -> float:
    """Model Q at a given D under the saturation model."""
    inv = 1.0 / (a * d_value)
    if q_sat is not None:
        inv += 1.0 / q_sat
    return 1.0 / inv


@dataclass(frozen=True)
class SweepPoint:
    """One undercut in a geometry sweep: all solved modes with their D."""

    undercut: float
    frequencies_hz: tuple
    d_values: tuple            # None entries flag unbounded D
    radial_fractions: tuple
    near_crossing: bool


def undercut_sweep(geometry, undercuts, refinement: int = 2, n_modes: int = 5,
                   materials: dict | None = None,
                   crossing_gap_rel: float = 0.08) -> list[SweepPoint]:
    """Chain the modal solver and compute_d over an undercut grid.

    Each sweep point is flagged near_crossing when any two adjacent mode
    frequencies approach within crossing_gap_rel of their mean, the regime
    where hybridization with low-Q flexural modes degrades the breathing
    mode.
    """
    from . import fem_axisym

    if materials is None:
        materials = fem_axisym.load_default_materials()
    radiator = materials["silica"]
    points = []
    for u in undercuts:
        _, modes = fem_axisym.modal_analysis(geometry.with_undercut(float(u)),
                                             refinement=refinement,
                                             n_modes=n_modes,
                                             materials=materials)
        freqs = np.array([m.frequency_hz for m in modes])
        gaps = np.abs(np.diff(freqs)) / (0.5 * (freqs[1:] + freqs[:-1]))
        estimates = [compute_d(m, radiator) for m in modes]
        points.append(SweepPoint(
            undercut=float(u),
            frequencies_hz=tuple(float(f) for f in freqs),
            d_values=tuple(e.d_value for e in estimates),
            radial_fractions=tuple(m.radial_fraction for m in modes),
            near_crossing=bool(np.any(gaps < crossing_gap_rel)),
        ))
    return points


def breathing_mode_track(points: list[SweepPoint]) -> list[tuple[float, float, float]]:
    """(u, f_hz, D) of the most radial mode at each sweep point."""
    track = []
    for p in points:
        i = int(np.argmax(p.radial_fractions))
        track.append((p.undercut, p.frequencies_hz[i], p.d_values[i]))
    return track


def read_dq_csv(path) -> list[tuple[float, float]]:
    """Read (D, Q) pairs from a CSV with header d,q."""
    pairs = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"d", "q"}:
            raise DataError(f"expected CSV header d,q got {reader.fieldnames}")
        for row in reader:
            try:
                pairs.append((float(row["d"]), float(row["q"])))
            except ValueError as exc:
                raise DataError(f"bad d,q row {row}: {exc}") from exc
    if not pairs:
        raise DataError(f"CSV {path} contains no data rows")
    return pairs
