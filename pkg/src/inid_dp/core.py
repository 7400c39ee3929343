"""Shared value types: privacy budgets, calibration modes and noise scales."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from inid_dp.exceptions import DomainError


class Mechanism(str, enum.Enum):
    GAUSSIAN = "gaussian"
    LAPLACE = "laplace"


class Mode(str, enum.Enum):
    IID = "iid"
    SPR = "spr"
    INID = "inid"


@dataclass(frozen=True)
class PrivacyBudget:
    """An ``(epsilon, delta)`` pair; ``delta == 0`` means pure DP."""

    epsilon: float
    delta: float = 0.0

    def __post_init__(self):
        eps = float(self.epsilon)
        delta = float(self.delta)
        if not (eps >= 0 and math.isfinite(eps)):
            raise DomainError(f"epsilon must be finite and >= 0, got {self.epsilon}")
        if not (0.0 <= delta <= 1.0):
            raise DomainError(f"delta must lie in [0, 1], got {self.delta}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "delta", delta)

    @property
    def is_pure(self) -> bool:
        return self.delta == 0.0


def gaussian_abs_moment(p: float) -> float:
    """``E|Z|^p`` for ``Z ~ N(0, 1)``."""
    return math.sqrt(2.0 ** p / math.pi) * math.gamma((p + 1.0) / 2.0)


def laplace_abs_moment(p: float) -> float:
    """``E|T|^p`` for ``T ~ Laplace(0, 1)``."""
    return math.gamma(p + 1.0)


def expected_lp_error(mechanism, scales, p: float) -> float:
    """Closed-form ``E ||T||_p^p`` for independent noise with the given scales."""
    mechanism = Mechanism(mechanism)
    s = np.asarray(scales, dtype=float)
    c = gaussian_abs_moment(p) if mechanism is Mechanism.GAUSSIAN else laplace_abs_moment(p)
    return float(c * np.sum(s ** p))


def check_error_order(p) -> float:
    p = float(p)
    if math.isinf(p) or math.isnan(p):
        raise DomainError("the error order p must be a finite real >= 1")
    if p < 1.0:
        raise DomainError(f"the error order p must be >= 1, got {p}")
    return p


@dataclass(frozen=True, eq=False)
class NoiseScales:
    """Per-coordinate noise scales and their expected ``l_p^p`` error.

    ``scales`` holds standard deviations for Gaussian noise and Laplace scale
    parameters for Laplace noise. ``theoretical_error`` is ``E ||T||_p^p`` for
    ``p = error_order_p`` (not its p-th root).
    """

    mechanism: Mechanism
    mode: Mode
    error_order_p: float
    scales: np.ndarray
    theoretical_error: float
    epsilon: float | None = None
    delta: float | None = None
    mu0: float | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        object.__setattr__(self, "mode", Mode(self.mode))
        s = np.array(self.scales, dtype=float).reshape(-1)
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise DomainError("noise scales must be finite and non-negative")
        s.setflags(write=False)
        object.__setattr__(self, "scales", s)

    @property
    def K(self) -> int:
        return int(self.scales.size)

    def expected_error(self, p: float) -> float:
        """``E ||T||_p^p`` of these scales for an arbitrary order ``p``."""
        return expected_lp_error(self.mechanism, self.scales, p)

    @property
    def mse(self) -> float:
        return self.expected_error(2.0)

    @property
    def variances(self) -> np.ndarray:
        if self.mechanism is Mechanism.GAUSSIAN:
            return self.scales ** 2
        return 2.0 * self.scales ** 2

    def scaled(self, factor: float) -> "NoiseScales":
        """Same mechanism with every scale multiplied by ``factor``."""
        s = self.scales * float(factor)
        return NoiseScales(self.mechanism, self.mode, self.error_order_p, s,
                           expected_lp_error(self.mechanism, s, self.error_order_p),
                           self.epsilon, self.delta, self.mu0, dict(self.extra))

    def to_dict(self) -> dict:
        out = {
            "mechanism": self.mechanism.value,
            "mode": self.mode.value,
            "p": self.error_order_p,
            "scales": self.scales.tolist(),
            "theoretical_error": self.theoretical_error,
        }
        if self.mu0 is not None:
            out["mu0"] = self.mu0
        return out


def to_db(x: float) -> float:
    return 10.0 * math.log10(x)
