"""Laplace scale calibration for pure and approximate DP.

For independent Laplace noise the privacy loss is bounded by
``sum_i lam_i / beta_i``, so pure ``eps``-DP holds iff that sum is at most
``eps``. The optimal scales for the ``l_p^p`` error spend the budget with
``beta_i`` proportional to ``lam_i^(1/(p+1))``.
"""

from __future__ import annotations

import math

import numpy as np

from inid_dp.core import (Mechanism, Mode, NoiseScales, PrivacyBudget,
                          check_error_order, expected_lp_error)
from inid_dp.exceptions import DomainError
from inid_dp.profile import _as_profile


def laplace_scales(lam: np.ndarray, epsilon: float, mode: Mode, p: float
                   ) -> np.ndarray:
    lam = np.asarray(lam, dtype=float)
    mode = Mode(mode)
    K = lam.size
    if mode is Mode.IID:
        return np.full(K, lam.sum() / epsilon)
    if mode is Mode.SPR:
        return K * lam / epsilon
    m = lam.max()
    u = lam / m
    beta = u ** (1.0 / (p + 1.0)) * np.sum(u ** (p / (p + 1.0)))
    return m * beta / epsilon


def calibrate_laplace(profile, epsilon: float, mode="inid", p=2.0) -> NoiseScales:
    """Laplace scales for pure ``epsilon``-DP.

    Modes:
      ``iid``: ``beta_i = ||lam||_1 / eps``.
      ``spr``: ``beta_i = K lam_i / eps``.
      ``inid``: ``beta_i = lam_i^(1/(p+1)) sum_j lam_j^(p/(p+1)) / eps``,
      which at ``p = 2`` is ``lam_i^(1/3) ||lam^(2/3)||_1 / eps``.

    Raises:
      DomainError: if ``epsilon <= 0`` or ``p`` is invalid.
    """
    prof = _as_profile(profile)
    p = check_error_order(p)
    epsilon = float(epsilon)
    if not (epsilon > 0 and math.isfinite(epsilon)):
        raise DomainError(f"Laplace calibration needs epsilon > 0, got {epsilon}")
    mode = Mode(mode)
    beta = laplace_scales(prof.lam, epsilon, mode, p)
    return NoiseScales(Mechanism.LAPLACE, mode, p, beta,
                       expected_lp_error(Mechanism.LAPLACE, beta, p),
                       epsilon=epsilon, delta=0.0)


def effective_epsilon(budget: PrivacyBudget) -> float:
    """``eps - log(1 - delta)``, the pure-DP budget Laplace scales may spend."""
    if budget.delta >= 1.0:
        raise DomainError("delta = 1 leaves nothing to protect")
    return budget.epsilon - math.log1p(-budget.delta)


def calibrate_laplace_approx_dp(profile, budget: PrivacyBudget, p=2.0
                                ) -> NoiseScales:
    """Optimal Laplace scales for ``(eps, delta)``-DP via ``eps - log(1 - delta)``.

    At ``delta = 0`` this is exactly :func:`calibrate_laplace` in ``inid`` mode.

    Raises:
      DomainError: if ``delta == 1`` or the effective budget is zero.
    """
    eps_eff = effective_epsilon(budget)
    if not eps_eff > 0:
        raise DomainError("effective budget eps - log(1 - delta) must be > 0")
    out = calibrate_laplace(profile, eps_eff, Mode.INID, p)
    return NoiseScales(out.mechanism, out.mode, out.error_order_p, out.scales,
                       out.theoretical_error, epsilon=budget.epsilon,
                       delta=budget.delta, extra={"epsilon_effective": eps_eff})


def pure_dp_check(profile, scales) -> float:
    """Realised pure-DP budget ``sum_i lam_i / beta_i`` (terms with ``lam_i = 0``
    are dropped).

    Raises:
      DomainError: if a coordinate with ``lam_i > 0`` has ``beta_i = 0``, or
        the scales are not Laplace.
    """
    lam = _as_profile(profile).lam
    if isinstance(scales, NoiseScales):
        if scales.mechanism is not Mechanism.LAPLACE:
            raise DomainError("pure_dp_check needs Laplace scales")
        beta = scales.scales
    else:
        beta = np.asarray(scales, dtype=float)
    if beta.shape != lam.shape:
        raise DomainError(f"length mismatch: {beta.size} scales for {lam.size} coordinates")
    nz = lam > 0
    if np.any(beta[nz] == 0):
        raise DomainError("zero Laplace scale on a sensitive coordinate: "
                          "privacy loss is unbounded")
    return float(np.sum(lam[nz] / beta[nz]))


def mse_ratio_iid_over_inid(profile) -> float:
    """``K ||lam||_1^2 / ||lam^(2/3)||_1^3`` for the Laplace mechanism."""
    lam = _as_profile(profile).lam
    u = lam / lam.max()
    return float(lam.size * np.sum(u) ** 2 / np.sum(u ** (2.0 / 3.0)) ** 3)
