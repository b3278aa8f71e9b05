"""Design budgets for quantum optomechanics experiments.

Stateless calculators: ring-cavity linewidth, the ratio of radiation-pressure
back-action to thermal displacement noise, the launched power at which that
ratio reaches unity, and the sideband-cooling phonon occupancy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c as c_light
from scipy.constants import hbar
from scipy.constants import k as k_B

from .core import TWO_PI
from .errors import DataError


@dataclass(frozen=True)
class OptomechanicalDesign:
    """Parameters of a cavity-optomechanics operating point.

    xi is the cavity-geometry factor: 1 for a linear cavity, pi for a ring.
    """

    xi: float
    wavelength: float         # m
    m_eff: float              # kg
    omega_m: float            # rad/s
    finesse: float
    cavity_radius: float      # m
    refractive_index: float
    bath_temperature: float   # K
    mechanical_q: float

    def __post_init__(self):
        for name in ("xi", "wavelength", "m_eff", "omega_m", "finesse",
                     "cavity_radius", "bath_temperature", "mechanical_q"):
            if getattr(self, name) <= 0:
                raise DataError(f"{name} must be positive")
        if self.refractive_index < 1.0:
            raise DataError("refractive_index must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "OptomechanicalDesign":
        return cls(xi=d["xi"], wavelength=d["wavelength_m"], m_eff=d["m_eff_kg"],
                   omega_m=TWO_PI * d["f_m_hz"], finesse=d["finesse"],
                   cavity_radius=d["cavity_radius_m"],
                   refractive_index=d["refractive_index"],
                   bath_temperature=d["bath_temperature_k"],
                   mechanical_q=d["mechanical_q"])

    def to_dict(self) -> dict:
        return {"xi": self.xi, "wavelength_m": self.wavelength,
                "m_eff_kg": self.m_eff, "f_m_hz": self.omega_m / TWO_PI,
                "finesse": self.finesse, "cavity_radius_m": self.cavity_radius,
                "refractive_index": self.refractive_index,
                "bath_temperature_k": self.bath_temperature,
                "mechanical_q": self.mechanical_q}


def cavity_linewidth(design: OptomechanicalDesign) -> float:
    """Ring-cavity linewidth kappa = c / (n R F) in rad/s."""
    return c_light / (design.refractive_index * design.cavity_radius * design.finesse)


def backaction_ratio(design: OptomechanicalDesign, power: float) -> float:
    """Back-action over thermal displacement noise at the mechanical frequency.

    S_ba/S_th[Om_m] = 4 xi^2 / (1 + 4 Om_m^2/kappa^2)
                      * hbar Q F^2 / (lambda (c/n) pi k_B T m Om_m) * P

    Linear in the launched power P.
    """
    if power < 0:
        raise DataError("power cannot be negative")
    kappa = cavity_linewidth(design)
    sideband = 1.0 + 4.0 * design.omega_m**2 / kappa**2
    return (4.0 * design.xi**2 / sideband
            * hbar * design.mechanical_q * design.finesse**2
            / (design.wavelength * (c_light / design.refractive_index) * np.pi
               * k_B * design.bath_temperature * design.m_eff * design.omega_m)
            * power)


def power_for_unity(design: OptomechanicalDesign) -> float:
    """Launched power (W) at which back-action equals thermal noise."""
    return 1.0 / backaction_ratio(design, 1.0)


def cooling_occupancy(temperature: float, mechanical_q: float,
                      gamma_c: float) -> float:
    """Sideband-cooling phonon occupancy n = (k_B T / Q) / (hbar Gamma_c).

    Valid in the resolved-sideband regime (mechanical frequency above the
    cavity linewidth); see resolved_sideband for the advisory check.
    """
    for name, val in (("temperature", temperature), ("mechanical_q", mechanical_q),
                      ("gamma_c", gamma_c)):
        if val <= 0:
            raise DataError(f"{name} must be positive")
    return (k_B * temperature / mechanical_q) / (hbar * gamma_c)


def resolved_sideband(design: OptomechanicalDesign) -> bool:
    """True when the design sits in the resolved-sideband regime Om_m > kappa."""
    return design.omega_m > cavity_linewidth(design)
