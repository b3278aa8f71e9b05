"""Shared domain types.

Angular-frequency convention: every stored frequency or rate in this package
is angular (rad/s).  File formats and reports use ordinary frequency (Hz);
the conversion by 2*pi happens only at those boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MechanicalMode:
    """A single measured or simulated mechanical mode.

    Attributes:
        omega: angular frequency (rad/s)
        gamma: energy damping rate (rad/s)
        shape: optional discretized displacement field, shape (n_nodes, 2)
    """

    omega: float
    gamma: float
    shape: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")

    @property
    def q(self) -> float:
        return self.omega / self.gamma

    @property
    def frequency_hz(self) -> float:
        return self.omega / TWO_PI

    @classmethod
    def from_q(cls, omega: float, q: float, shape=None) -> "MechanicalMode":
        return cls(omega=omega, gamma=omega / q, shape=shape)


@dataclass(frozen=True)
class LossBudget:
    """Per-mechanism damping contributions, each expressed as 1/Q."""

    clamping: float = 0.0
    tls: float = 0.0
    anharmonic: float = 0.0
    gas: float = 0.0

    @property
    def total(self) -> float:
        return self.clamping + self.tls + self.anharmonic + self.gas

    @property
    def q(self) -> float:
        total = self.total
        if total <= 0:
            raise ValueError("total damping is not positive")
        return 1.0 / total

    def as_dict(self) -> dict:
        return {
            "q_cl_inverse": self.clamping,
            "q_tls_inverse": self.tls,
            "q_anh_inverse": self.anharmonic,
            "q_gas_inverse": self.gas,
            "q_inverse_total": self.total,
        }
