"""resonator_q: mechanical dissipation modeling for on-chip optomechanics.

Subpackages and modules:

* coupled_modes    avoided crossings of two coupled mechanical modes
* fem_axisym       axisymmetric finite-element modal analysis
* clamping_loss    clamp-plane radiation loss parameter D and calibrations
* intrinsic_loss   TLS and anharmonic damping of silica vs temperature
* noise_spectra    thermal-noise spectra, peak fits, gas damping
* quantum_budget   back-action, linewidth and cooling-occupancy calculators
* cli              the resonator-q command-line front end
"""

from . import (clamping_loss, coupled_modes, intrinsic_loss, noise_spectra,
               quantum_budget)
from .core import LossBudget, MechanicalMode
from .errors import (ConvergenceError, DataError, FitDegenerateError,
                     GeometryError, InsufficientSpanError, NumericalError,
                     QuadratureError, ResonatorQError)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "DataError", "FitDegenerateError", "GeometryError",
    "InsufficientSpanError", "LossBudget", "MechanicalMode", "NumericalError",
    "QuadratureError", "ResonatorQError", "clamping_loss", "coupled_modes",
    "intrinsic_loss", "noise_spectra", "quantum_budget",
]
