"""Privacy-resource bookkeeping.

A calibrated mechanism can be read as a non-adaptive composition of scalar
mechanisms, one per coordinate. Coordinate ``i`` then consumes
``eta_i = lam_i^2 / (2 sigma_i^2)`` of the Gaussian resource ``eta = mu0^2 / 2``
(zCDP units, bookkeeping only) or ``eps_i = lam_i / beta_i`` of a pure-DP
budget. The optimal scales split these resources in proportion to ``lam_i``
and ``lam_i^(2/3)`` respectively; SPR splits them equally.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from inid_dp.exceptions import DomainError
from inid_dp.profile import SensitivityProfile, _as_profile


class ResourceKind(str, enum.Enum):
    ZCDP_ETA = "zcdp_eta"
    PURE_EPSILON = "pure_epsilon"


@dataclass(frozen=True, eq=False)
class ResourceSplit:
    kind: ResourceKind
    total: float
    shares: np.ndarray

    def scales_for(self, profile) -> np.ndarray:
        """Invert the shares into noise scales for ``profile``.

        ``sigma_i = lam_i / sqrt(2 eta_i)`` or ``beta_i = lam_i / eps_i``;
        coordinates without a share get zero noise.
        """
        lam = _as_profile(profile).lam
        out = np.zeros_like(lam)
        nz = self.shares > 0
        if self.kind is ResourceKind.ZCDP_ETA:
            out[nz] = lam[nz] / np.sqrt(2.0 * self.shares[nz])
        else:
            out[nz] = lam[nz] / self.shares[nz]
        return out


def split_resource(profile, total: float, kind="zcdp_eta") -> ResourceSplit:
    """Optimal per-coordinate split of a privacy resource.

    Raises:
      DomainError: if ``total <= 0``.
    """
    lam = _as_profile(profile).lam
    kind = ResourceKind(kind)
    total = float(total)
    if not (total > 0 and math.isfinite(total)):
        raise DomainError(f"total resource must be positive, got {total}")
    w = lam / lam.max()
    if kind is ResourceKind.PURE_EPSILON:
        w = w ** (2.0 / 3.0)
    return ResourceSplit(kind, total, total * w / w.sum())


def equal_split(profile, total: float, kind="zcdp_eta") -> ResourceSplit:
    """The SPR allocation: ``total / K`` to every coordinate."""
    lam = _as_profile(profile).lam
    return ResourceSplit(ResourceKind(kind), float(total),
                         np.full(lam.size, float(total) / lam.size))


def split_across_iterations(total: float, n_iterations: int) -> float:
    """Equal per-iteration share of a resource spent over ``n_iterations``."""
    if int(n_iterations) < 1:
        raise DomainError("need at least one iteration")
    return float(total) / int(n_iterations)


def realized_eta(profile, sigma) -> float:
    """``sum lam_i^2 / (2 sigma_i^2)`` over coordinates with ``lam_i > 0``."""
    lam = _as_profile(profile).lam
    sigma = np.asarray(sigma, dtype=float)
    nz = lam > 0
    return float(np.sum(lam[nz] ** 2 / (2.0 * sigma[nz] ** 2)))


@dataclass(frozen=True, eq=False)
class LayerClippingPlan:
    """Per-layer clipping budgets and the per-coordinate bounds they imply.

    Each coordinate of layer ``m`` is clipped to ``C_m / K_m^(1/p)`` so the
    layer's gradient has ``l_p`` norm at most ``C_m``.
    """

    layer_sizes: tuple
    layer_budgets: np.ndarray
    norm_order_p: float
    per_coordinate_lambda: tuple

    def flat_lambda(self) -> np.ndarray:
        return np.concatenate(self.per_coordinate_lambda)

    def profile(self) -> SensitivityProfile:
        return SensitivityProfile(self.flat_lambda())


def layer_plan(layer_sizes, layer_budgets, p: float = 2.0) -> LayerClippingPlan:
    sizes = tuple(int(k) for k in layer_sizes)
    budgets = np.asarray(layer_budgets, dtype=float)
    p = float(p)
    if not sizes or any(k < 1 for k in sizes):
        raise DomainError("need at least one layer, each of size >= 1")
    if budgets.shape != (len(sizes),) or np.any(budgets <= 0):
        raise DomainError("one positive clipping budget per layer is required")
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    lams = tuple(np.full(k, c / k ** (1.0 / p)) for k, c in zip(sizes, budgets))
    return LayerClippingPlan(sizes, budgets, p, lams)


def flat_per_layer_plan(layer_sizes, total_budget_C0: float, p: float = 2.0
                        ) -> LayerClippingPlan:
    """Equal budgets ``C_m = C0 / M^(1/p)`` whose ``l_p`` norm is ``C0``."""
    sizes = list(layer_sizes)
    M = len(sizes)
    if M < 1:
        raise DomainError("need at least one layer")
    c = float(total_budget_C0) / M ** (1.0 / float(p))
    return layer_plan(sizes, np.full(M, c), p)
