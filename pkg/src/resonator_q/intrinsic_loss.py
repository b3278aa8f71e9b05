"""Intrinsic (material) dissipation of amorphous silica versus temperature.

Two mechanisms limit the Q of silica resonators once clamping losses are
suppressed:

* Relaxation of structural two-level systems (TLS), described by a broad
  distribution of double-well potentials.  With barrier scale V0, asymmetry
  scale Delta_c, attempt time tau0, exponent zeta and amplitude C (V, V0 and
  Delta_c in kelvin):

      Q_tls^-1 = C * Erf(sqrt(2) T / Delta_c) / T
                 * Int_0^inf (V/V0)^(-zeta) exp(-V^2/(2 V0^2))
                             * Om*tau0*e^(V/T) / (1 + Om^2 tau0^2 e^(2V/T)) dV

* Anharmonic (Akhiezer-type) interaction with the thermal phonon bath:

      Q_anh^-1 = gamma^2 * C_v(T) v(T) T / (2 rho v_D^3)
                 * Om tau_th(T) / (1 + Om^2 tau_th(T)^2)

  with v_D^3 a fixed fraction of v^3 and C_v, v, tau_th tabulated.

The total damping additionally carries a temperature-independent clamping
background: Q^-1(T) = Q_tls^-1 + Q_anh^-1 + Q_cl^-1, which is what the
temperature fit extracts from measured (T, Q) series.

The integrand's endpoint singularity V^(-zeta) is removed exactly by the
substitution w = (V/V0)^(1-zeta) before adaptive quadrature; the Debye
relaxation factor is evaluated as 0.5*sech(ln(Om tau0) + V/T) to stay finite
at any V/T.
"""

from __future__ import annotations

import csv
import importlib.resources
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from scipy.optimize import least_squares

from .core import LossBudget
from .errors import (ConvergenceError, DataError, InsufficientSpanError,
                     QuadratureError)

# mean values reported for bulk fused silica; frozen in temperature fits
SILICA_ZETA = 0.28
SILICA_V0_K = 667.0
SILICA_V0_OVER_DELTA_C = 7.7
SILICA_GRUENEISEN_SQ = 3.6
SILICA_DEBYE_RATIO = 0.322

# truncation of the barrier integral, in units of V0; the Gaussian factor is
# exp(-72) there, far below any requested tolerance
_V_CUTOFF_IN_V0 = 12.0


@dataclass(frozen=True)
class TlsParams:
    """Parameters of the TLS relaxation damping model.

    zeta: distribution exponent (dimensionless, 0 <= zeta < 1)
    v0: barrier scale V0 (K)
    v0_over_delta_c: V0 / Delta_c (dimensionless)
    log10_tau0: log10 of the relaxation attempt time (s)
    c_tls: dimensionless amplitude C
    """

    zeta: float
    v0: float
    v0_over_delta_c: float
    log10_tau0: float
    c_tls: float

    def __post_init__(self):
        if not 0.0 <= self.zeta < 1.0:
            raise DataError("zeta must lie in [0, 1)")
        if self.v0 <= 0 or self.v0_over_delta_c <= 0:
            raise DataError("V0 and V0/Delta_c must be positive")
        if self.c_tls <= 0:
            raise DataError("C must be positive")

    @property
    def delta_c(self) -> float:
        return self.v0 / self.v0_over_delta_c

    @property
    def tau0(self) -> float:
        return 10.0**self.log10_tau0

    @classmethod
    def fused_silica(cls, log10_tau0: float = -12.1,
                     c_tls: float = 1.8e-3) -> "TlsParams":
        """Bulk-silica distribution parameters with adjustable tau0 and C."""
        return cls(SILICA_ZETA, SILICA_V0_K, SILICA_V0_OVER_DELTA_C,
                   log10_tau0, c_tls)


class MaterialTables:
    """Tabulated C_v(T), v(T), tau_th(T) plus scalar material constants.

    Interpolation is PCHIP in log10(T)-log10(value) space, which preserves
    positivity and never overshoots the tabulated range.  Queries outside
    the tabulated temperature span raise DataError.
    """

    def __init__(self, t_k, cv, v_sound, tau_th, density: float,
                 grueneisen_sq: float = SILICA_GRUENEISEN_SQ,
                 debye_ratio: float = SILICA_DEBYE_RATIO):
        t_k = np.asarray(t_k, dtype=float)
        cv = np.asarray(cv, dtype=float)
        v_sound = np.asarray(v_sound, dtype=float)
        tau_th = np.asarray(tau_th, dtype=float)
        if not (np.all(np.diff(t_k) > 0) and np.all(t_k > 0)):
            raise DataError("table temperatures must be positive and increasing")
        for name, col in (("cv", cv), ("v", v_sound), ("tau_th", tau_th)):
            if not np.all(col > 0):
                raise DataError(f"table column {name} must be positive")
        if density <= 0:
            raise DataError("density must be positive")
        self.t_min = float(t_k[0])
        self.t_max = float(t_k[-1])
        self.density = float(density)
        self.grueneisen_sq = float(grueneisen_sq)
        self.debye_ratio = float(debye_ratio)
        logt = np.log10(t_k)
        self._cv = PchipInterpolator(logt, np.log10(cv))
        self._v = PchipInterpolator(logt, np.log10(v_sound))
        self._tau = PchipInterpolator(logt, np.log10(tau_th))

    def _check(self, t: float) -> float:
        if not self.t_min <= t <= self.t_max:
            raise DataError(f"T={t} K outside table coverage "
                            f"[{self.t_min}, {self.t_max}] K")
        return math.log10(t)

    def cv(self, t: float) -> float:
        return 10.0**float(self._cv(self._check(t)))

    def v_sound(self, t: float) -> float:
        return 10.0**float(self._v(self._check(t)))

    def tau_th(self, t: float) -> float:
        return 10.0**float(self._tau(self._check(t)))

    @classmethod
    def from_csv(cls, path, density: float = 2203.0, **kwargs) -> "MaterialTables":
        """Load a table CSV with header t_k,cv_j_per_k_m3,v_m_per_s,tau_th_s."""
        cols = {"t_k": [], "cv_j_per_k_m3": [], "v_m_per_s": [], "tau_th_s": []}
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(reader.fieldnames) != set(cols):
                raise DataError(f"expected header {sorted(cols)}, got {reader.fieldnames}")
            for row in reader:
                for key in cols:
                    cols[key].append(float(row[key]))
        if not cols["t_k"]:
            raise DataError(f"table CSV {path} contains no data rows")
        return cls(cols["t_k"], cols["cv_j_per_k_m3"], cols["v_m_per_s"],
                   cols["tau_th_s"], density=density, **kwargs)

    @classmethod
    def fused_silica(cls) -> "MaterialTables":
        """Shipped fused-silica table (see data/silica_intrinsic.csv).

        C_v and v follow standard vitreous-silica data; tau_th is the kinetic
        estimate 3*kappa/(C_v v_D^2) from tabulated thermal conductivity.
        Override with from_csv for measurement-grade work.
        """
        ref = importlib.resources.files("resonator_q.data") / "silica_intrinsic.csv"
        with importlib.resources.as_file(ref) as path:
            return cls.from_csv(path)


@dataclass(frozen=True)
class TemperatureFitResult:
    tls: TlsParams
    q_cl_inverse: float
    residuals: np.ndarray
    covariance: np.ndarray | None
    cost: float


def _debye_relaxation(log_x: float) -> float:
    """x/(1+x^2) for x = exp(log_x), overflow-safe (= 0.5*sech(log_x))."""
    a = abs(log_x)
    e = math.exp(-a)
    return e / (1.0 + e * e)


def q_tls_inverse(temperature: float, omega: float, params: TlsParams,
                  rel_tol: float = 1e-8,
                  v_cutoff_in_v0: float = _V_CUTOFF_IN_V0) -> float:
    """TLS relaxation damping Q_tls^-1 at temperature T (K) and omega (rad/s)."""
    if temperature <= 0:
        raise DataError("temperature must be positive")
    if omega <= 0:
        raise DataError("omega must be positive")
    v0 = params.v0
    zeta = params.zeta
    power = 1.0 / (1.0 - zeta)
    log_x0 = math.log(omega * params.tau0)

    def integrand(w):
        v = v0 * w**power
        return (v0 * power) * math.exp(-0.5 * (v / v0) ** 2) \
            * _debye_relaxation(log_x0 + v / temperature)

    w_max = v_cutoff_in_v0 ** (1.0 - zeta)
    value, abserr = quad(integrand, 0.0, w_max, epsabs=0.0, epsrel=rel_tol,
                         limit=200)
    if value > 0 and abserr / value > 10.0 * rel_tol:
        raise QuadratureError(
            f"TLS integral reached only {abserr / value:.2e} relative accuracy",
            achieved_tolerance=abserr / value)
    return params.c_tls * math.erf(math.sqrt(2.0) * temperature / params.delta_c) \
        / temperature * value


def q_anh_inverse(temperature: float, omega: float,
                  tables: MaterialTables) -> float:
    """Anharmonic (Akhiezer) damping Q_anh^-1 at T (K) and omega (rad/s)."""
    if omega <= 0:
        raise DataError("omega must be positive")
    cv = tables.cv(temperature)
    v = tables.v_sound(temperature)
    tau = tables.tau_th(temperature)
    vd3 = tables.debye_ratio * v**3
    x = omega * tau
    return tables.grueneisen_sq * cv * v * temperature / (2.0 * tables.density * vd3) \
        * x / (1.0 + x * x)


def total_damping(temperature: float, omega: float, tls: TlsParams,
                  tables: MaterialTables, q_cl_inverse: float = 0.0) -> LossBudget:
    """All damping contributions and their sum at one (T, omega) point."""
    if q_cl_inverse < 0:
        raise DataError("q_cl_inverse cannot be negative")
    return LossBudget(
        clamping=q_cl_inverse,
        tls=q_tls_inverse(temperature, omega, tls),
        anharmonic=q_anh_inverse(temperature, omega, tables),
    )


def fit_temperature(data, omega: float, tables: MaterialTables,
                    priors: TlsParams, q_cl_guess: float = 1e-5,
                    max_nfev: int = 400) -> TemperatureFitResult:
    """Fit measured (T, Q) data with TLS + anharmonic + constant background.

    zeta, V0 and V0/Delta_c stay frozen at the prior values; the free
    parameters are log10(tau0), C and the clamping background Q_cl^-1
    (bounded at zero).  Least squares runs on relative residuals in the
    damping (Q^-1) domain, with C carried as log10(C) to keep it positive.

    Args:
        data: iterable of (temperature_k, q) pairs; >= 6 points spanning
            >= 50 K.
        omega: mechanical angular frequency of the measured mode (rad/s).
        tables: material tables (no adjustable parameters).
        priors: initial TlsParams; also fixes the frozen distribution shape.
    """
    pts = np.array([(float(t), float(q)) for t, q in data])
    if len(pts) < 6:
        raise InsufficientSpanError("temperature fit needs at least 6 points")
    t_span = np.ptp(pts[:, 0])
    if t_span < 50.0:
        raise InsufficientSpanError(
            f"temperature span {t_span:.1f} K < 50 K required")
    if np.any(pts[:, 1] <= 0):
        raise DataError("measured Q values must be positive")
    t_data = pts[:, 0]
    y_data = 1.0 / pts[:, 1]

    def model_inv(params: TlsParams, q_cl_inv: float) -> np.ndarray:
        return np.array([
            q_tls_inverse(t, omega, params)
            + q_anh_inverse(t, omega, tables) + q_cl_inv
            for t in t_data])

    def residual(x):
        log_tau, log_c, q_cl = x
        params = replace(priors, log10_tau0=log_tau, c_tls=10.0**log_c)
        return (model_inv(params, q_cl) - y_data) / y_data

    x0 = np.array([priors.log10_tau0, math.log10(priors.c_tls), q_cl_guess])
    bounds = ([-16.0, -8.0, 0.0], [-8.0, 0.0, 1.0])
    sol = least_squares(residual, x0, bounds=bounds, method="trf",
                        x_scale=[1.0, 1.0, max(q_cl_guess, 1e-6)],
                        xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=max_nfev)
    if not sol.success:
        raise ConvergenceError(f"temperature fit failed: {sol.message}",
                               diagnostics={"x": sol.x.tolist(),
                                            "nfev": sol.nfev})
    log_tau, log_c, q_cl = sol.x
    fitted = replace(priors, log10_tau0=float(log_tau), c_tls=float(10.0**log_c))

    covariance = None
    jac = sol.jac
    jtj = jac.T @ jac
    if np.linalg.matrix_rank(jtj) == jtj.shape[0]:
        dof = max(len(t_data) - 3, 1)
        covariance = np.linalg.inv(jtj) * (2.0 * sol.cost / dof)
    return TemperatureFitResult(tls=fitted, q_cl_inverse=float(max(q_cl, 0.0)),
                                residuals=sol.fun, covariance=covariance,
                                cost=float(sol.cost))


def read_temperature_csv(path) -> list[tuple[float, float]]:
    """Read (T, Q) pairs from a CSV with header t_k,q."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or set(reader.fieldnames) != {"t_k", "q"}:
            raise DataError(f"expected CSV header t_k,q got {reader.fieldnames}")
        for row in reader:
            try:
                out.append((float(row["t_k"]), float(row["q"])))
            except ValueError as exc:
                raise DataError(f"bad t_k,q row {row}: {exc}") from exc
    if not out:
        raise DataError(f"CSV {path} contains no data rows")
    return out


def tls_params_from_dict(d: dict) -> TlsParams:
    return TlsParams(zeta=d["zeta"], v0=d["v0_k"],
                     v0_over_delta_c=d["v0_over_delta_c"],
                     log10_tau0=d["log10_tau0"], c_tls=d["c_tls"])


def tls_params_to_dict(p: TlsParams) -> dict:
    return {"zeta": p.zeta, "v0_k": p.v0, "v0_over_delta_c": p.v0_over_delta_c,
            "log10_tau0": p.log10_tau0, "c_tls": p.c_tls}
