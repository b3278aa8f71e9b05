"""Two coupled mechanical oscillators: hybridized branches and dispersion fits.

A radial and a flexural mode whose bare frequencies cross as a function of
the relative undercut u behave as two coupled damped oscillators.  With bare
angular frequencies Omega_r/f(u), damping rates Gamma_i = Omega_i/Q_i and a
coupling rate g, the complex eigenvalues of the pair are

    lambda_pm = (Omega_r + Omega_f)/2 + i (Gamma_r + Gamma_f)/4
                +/- sqrt( ((Omega_r - Omega_f)/2 + i (Gamma_r - Gamma_f)/4)^2
                          + g^4 / (4 Omega_r Omega_f) )

from which the observable branch frequencies Omega_pm = Re(lambda_pm) and
quality factors Q_pm = Re(lambda_pm) / (2 Im(lambda_pm)) follow.

The fitting entry point recovers the two linear bare-mode trends and g from
measured (u, frequency, Q) series exhibiting an avoided crossing.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .core import TWO_PI
from .errors import ConvergenceError, DataError, FitDegenerateError

_BRANCH_ALIASES = {
    "radial": "radial",
    "radial-like": "radial",
    "r": "radial",
    "flexural": "flexural",
    "flexural-like": "flexural",
    "f": "flexural",
}


@dataclass(frozen=True)
class BareModeTrend:
    """Linear-in-undercut trend of one bare mode.

    omega(u) = omega0 + omega1 * u   [rad/s]
    q(u)     = q0 + q1 * u           [dimensionless]
    """

    omega0: float
    omega1: float
    q0: float
    q1: float

    def __post_init__(self):
        if self.omega0 <= 0:
            raise DataError("bare angular frequency at u=0 must be positive")
        if self.q0 <= 0:
            raise DataError("bare Q at u=0 must be positive")

    def omega(self, u: float) -> float:
        return self.omega0 + self.omega1 * u

    def q(self, u: float) -> float:
        return self.q0 + self.q1 * u

    @classmethod
    def from_hz(cls, f0_hz, f1_hz, q0, q1) -> "BareModeTrend":
        return cls(TWO_PI * f0_hz, TWO_PI * f1_hz, q0, q1)


@dataclass(frozen=True)
class CoupledModeModel:
    """Bare radial and flexural trends plus a constant coupling rate g (rad/s)."""

    radial: BareModeTrend
    flexural: BareModeTrend
    g: float

    def __post_init__(self):
        if self.g < 0:
            raise DataError("coupling rate g must be nonnegative")

    def swapped(self) -> "CoupledModeModel":
        return replace(self, radial=self.flexural, flexural=self.radial)

    def to_dict(self) -> dict:
        def trend(t: BareModeTrend) -> dict:
            return {
                "f0_hz": t.omega0 / TWO_PI,
                "f1_hz": t.omega1 / TWO_PI,
                "q0": t.q0,
                "q1": t.q1,
            }

        return {
            "radial": trend(self.radial),
            "flexural": trend(self.flexural),
            "g_hz": self.g / TWO_PI,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CoupledModeModel":
        def trend(d: dict) -> BareModeTrend:
            return BareModeTrend.from_hz(d["f0_hz"], d["f1_hz"], d["q0"], d["q1"])

        return cls(trend(data["radial"]), trend(data["flexural"]), TWO_PI * data["g_hz"])


@dataclass(frozen=True)
class DispersionPoint:
    """One measured mode at one undercut.

    branch labels the physical mode pattern ("radial" or "flexural"); it is
    used only inside the asymptotic windows, where it is unambiguous.
    """

    u: float
    omega: float
    q: float
    branch: str

    def __post_init__(self):
        if not 0.0 <= self.u < 1.0:
            raise DataError(f"undercut u={self.u} outside [0, 1)")
        if self.omega <= 0 or self.q <= 0:
            raise DataError("measured frequency and Q must be positive")
        label = _BRANCH_ALIASES.get(self.branch.strip().lower())
        if label is None:
            raise DataError(f"unknown branch label {self.branch!r}")
        object.__setattr__(self, "branch", label)


@dataclass(frozen=True)
class CrossingFit:
    """Result of fit_avoided_crossing."""

    model: CoupledModeModel
    residual_norm: float
    per_point_residuals: np.ndarray
    assignments: tuple
    stage1_model: CoupledModeModel
    stage2_g: float
    polished: bool


def _bare_rates(model: CoupledModeModel, u: float):
    om_r = model.radial.omega(u)
    om_f = model.flexural.omega(u)
    q_r = model.radial.q(u)
    q_f = model.flexural.q(u)
    if om_r <= 0 or om_f <= 0:
        raise DataError(f"bare frequency nonpositive at u={u}")
    if q_r <= 0 or q_f <= 0:
        raise DataError(f"bare Q nonpositive at u={u}")
    return om_r, om_f, om_r / q_r, om_f / q_f


def coupled_eigenvalues(model: CoupledModeModel, u: float) -> tuple[complex, complex]:
    """Complex eigenvalues (lambda_plus, lambda_minus) of the coupled pair at u.

    lambda_plus is the root with the larger real part.
    """
    om_r, om_f, g_r, g_f = _bare_rates(model, u)
    mean = 0.5 * (om_r + om_f) + 0.25j * (g_r + g_f)
    split = np.sqrt(complex(0.5 * (om_r - om_f) + 0.25j * (g_r - g_f)) ** 2
                    + model.g**4 / (4.0 * om_r * om_f))
    lam_p, lam_m = mean + split, mean - split
    if (lam_p.real, lam_p.imag) < (lam_m.real, lam_m.imag):
        lam_p, lam_m = lam_m, lam_p
    return lam_p, lam_m


def coupled_branches(model: CoupledModeModel, u: float) -> tuple[float, float, float, float]:
    """(Omega_plus, Q_plus, Omega_minus, Q_minus) at undercut u."""
    lam_p, lam_m = coupled_eigenvalues(model, u)
    return (lam_p.real, lam_p.real / (2.0 * lam_p.imag),
            lam_m.real, lam_m.real / (2.0 * lam_m.imag))


def branch_curves(model: CoupledModeModel, u_grid) -> np.ndarray:
    """Dense branch curves; returns array of rows (u, om_p, q_p, om_m, q_m)."""
    rows = [(u, *coupled_branches(model, u)) for u in np.asarray(u_grid, dtype=float)]
    return np.array(rows)


def _point_residuals(model: CoupledModeModel, points) -> tuple[np.ndarray, tuple]:
    """Relative residuals with each point assigned to its nearest model branch."""
    res = np.empty(2 * len(points))
    assigned = []
    for i, p in enumerate(points):
        om_p, q_p, om_m, q_m = coupled_branches(model, p.u)
        r_plus = ((om_p - p.omega) / p.omega, (q_p - p.q) / p.q)
        r_minus = ((om_m - p.omega) / p.omega, (q_m - p.q) / p.q)
        if r_plus[0] ** 2 + r_plus[1] ** 2 <= r_minus[0] ** 2 + r_minus[1] ** 2:
            res[2 * i:2 * i + 2] = r_plus
            assigned.append("+")
        else:
            res[2 * i:2 * i + 2] = r_minus
            assigned.append("-")
    return res, tuple(assigned)


def _fit_linear_trend(points, windows, branch: str) -> BareModeTrend:
    sel = [p for p in points
           if p.branch == branch and any(lo <= p.u <= hi for lo, hi in windows)]
    u = np.array([p.u for p in sel])
    if len(sel) < 2 or np.ptp(u) == 0.0:
        raise FitDegenerateError(
            f"asymptotic windows leave the {branch} trend underdetermined "
            f"({len(sel)} usable points)")
    design = np.column_stack([np.ones_like(u), u])
    om0, om1 = np.linalg.lstsq(design, np.array([p.omega for p in sel]), rcond=None)[0]
    q0, q1 = np.linalg.lstsq(design, np.array([p.q for p in sel]), rcond=None)[0]
    return BareModeTrend(om0, om1, q0, q1)


def _minimize_g(points, bare: CoupledModeModel) -> float:
    """Scalar search for g: geometric bracket expansion, then golden section."""

    def cost(g: float) -> float:
        res, _ = _point_residuals(replace(bare, g=g), points)
        return float(res @ res)

    scale = float(np.median([p.omega for p in points]))
    gs = [0.0]
    fs = [cost(0.0)]
    g = 1e-3 * scale
    while g < 10.0 * scale:
        gs.append(g)
        fs.append(cost(g))
        if len(fs) >= 3 and fs[-1] > fs[-2] and fs[-2] < fs[-3]:
            break
        g *= 1.6
    else:
        if np.argmin(fs) == len(fs) - 1:
            raise ConvergenceError(
                "coupling-rate search found no interior minimum",
                diagnostics={"g_grid": gs, "cost": fs})
    best = int(np.argmin(fs))
    if best == 0:
        # residual increases monotonically from g=0: the uncoupled model wins
        lo, hi = 0.0, gs[1]
    else:
        lo, hi = gs[best - 1], gs[min(best + 1, len(gs) - 1)]

    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - (hi - lo) * invphi
    d = lo + (hi - lo) * invphi
    fc, fd = cost(c), cost(d)
    for _ in range(200):
        if hi - lo < 1e-12 * scale:
            break
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - (hi - lo) * invphi
            fc = cost(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + (hi - lo) * invphi
            fd = cost(d)
    return 0.5 * (lo + hi)


def fit_avoided_crossing(points, asymptotic_windows, polish: bool = True) -> CrossingFit:
    """Fit a CoupledModeModel to measured dispersion points.

    Stage 1 fits the linear bare trends on the labeled points inside the
    asymptotic windows; stage 2 freezes the trends and minimizes the summed
    squared relative residuals of both branch frequencies and Qs over the
    single parameter g.  An optional final polish refines all nine
    parameters jointly, removing the small bias the windows retain from the
    residual coupling (required for exact round trips on synthetic data).

    Args:
        points: iterable of DispersionPoint, >= 4 per branch.
        asymptotic_windows: iterable of (u_lo, u_hi) ranges away from the
            crossing, used for stage 1.
        polish: run the joint nine-parameter refinement (default True).
    """
    points = list(points)
    windows = [(float(lo), float(hi)) for lo, hi in asymptotic_windows]
    for branch in ("radial", "flexural"):
        if sum(p.branch == branch for p in points) < 4:
            raise FitDegenerateError(f"need at least 4 points on the {branch} branch")
    if not windows:
        raise FitDegenerateError("at least one asymptotic window is required")

    radial = _fit_linear_trend(points, windows, "radial")
    flexural = _fit_linear_trend(points, windows, "flexural")
    stage1 = CoupledModeModel(radial, flexural, 0.0)

    g2 = _minimize_g(points, stage1)
    model = replace(stage1, g=g2)

    polished = False
    if polish:
        x0 = np.array([radial.omega0, radial.omega1, radial.q0, radial.q1,
                       flexural.omega0, flexural.omega1, flexural.q0, flexural.q1, g2])
        scale = np.where(np.abs(x0) > 0, np.abs(x0), np.median(np.abs(x0)))

        def residual(x):
            p = x * scale
            m = CoupledModeModel(
                BareModeTrend(p[0], p[1], p[2], p[3]),
                BareModeTrend(p[4], p[5], p[6], p[7]),
                abs(p[8]))
            return _point_residuals(m, points)[0]

        sol = least_squares(residual, x0 / scale, method="lm",
                            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
        p = sol.x * scale
        model = CoupledModeModel(
            BareModeTrend(p[0], p[1], p[2], p[3]),
            BareModeTrend(p[4], p[5], p[6], p[7]),
            abs(p[8]))
        polished = True

    res, assigned = _point_residuals(model, points)
    return CrossingFit(
        model=model,
        residual_norm=float(np.sqrt(res @ res)),
        per_point_residuals=res,
        assignments=assigned,
        stage1_model=stage1,
        stage2_g=g2,
        polished=polished,
    )


def synthesize_dispersion(model: CoupledModeModel, u_values, noise: float = 0.0,
                          seed: int | None = None) -> list[DispersionPoint]:
    """Generate measured-style points on both branches of a model.

    Points are labeled by the nearest bare mode, the way mode patterns are
    identified experimentally.  noise is the relative (multiplicative,
    Gaussian) scatter applied to frequencies and Qs.
    """
    rng = np.random.default_rng(seed)
    points = []
    for u in np.asarray(u_values, dtype=float):
        om_r, om_f, _, _ = _bare_rates(model, u)
        om_p, q_p, om_m, q_m = coupled_branches(model, u)
        for om, q in ((om_p, q_p), (om_m, q_m)):
            label = "radial" if abs(om - om_r) <= abs(om - om_f) else "flexural"
            if noise:
                om = om * (1.0 + noise * rng.standard_normal())
                q = q * (1.0 + noise * rng.standard_normal())
            points.append(DispersionPoint(u=float(u), omega=om, q=q, branch=label))
    return points


def read_dispersion_csv(path) -> list[DispersionPoint]:
    """Read dispersion points from a CSV with header u,f_hz,q,branch."""
    points = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"u", "f_hz", "q", "branch"}
        if reader.fieldnames is None or set(reader.fieldnames) != expected:
            raise DataError(f"dispersion CSV must have header u,f_hz,q,branch, "
                            f"got {reader.fieldnames}")
        for row in reader:
            try:
                points.append(DispersionPoint(
                    u=float(row["u"]),
                    omega=TWO_PI * float(row["f_hz"]),
                    q=float(row["q"]),
                    branch=row["branch"]))
            except ValueError as exc:
                raise DataError(f"bad dispersion CSV row {row}: {exc}") from exc
    if not points:
        raise DataError(f"dispersion CSV {path} contains no data rows")
    return points


def write_dispersion_csv(path, points) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["u", "f_hz", "q", "branch"])
        for p in points:
            writer.writerow([repr(p.u), repr(p.omega / TWO_PI), repr(p.q), p.branch])


def write_model_json(path, model: CoupledModeModel) -> None:
    with open(path, "w") as fh:
        json.dump(model.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_model_json(path) -> CoupledModeModel:
    with open(path) as fh:
        return CoupledModeModel.from_dict(json.load(fh))
