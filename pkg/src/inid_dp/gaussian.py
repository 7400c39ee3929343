"""Gaussian privacy profile, the ``mu0`` solver and scale calibration.

A Gaussian mechanism with per-coordinate standard deviations ``sigma`` acting
on a profile ``lam`` behaves, privacy-wise, like a scalar mechanism with
parameter ``mu = ||lam / sigma||_2``. Its exact ``(eps, delta)`` curve is

    phi_eps(mu) = Q(eps/mu - mu/2) - e^eps Q(eps/mu + mu/2),

increasing in ``mu``. ``mu0`` is the largest ``mu`` with ``phi_eps(mu) <= delta``
and it is the only place the budget enters; the profile only shapes how the
constraint ``sum lam_i^2 / sigma_i^2 = mu0^2`` is spent.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from inid_dp.core import (Mechanism, Mode, NoiseScales, PrivacyBudget,
                          check_error_order, expected_lp_error)
from inid_dp.exceptions import DomainError, UnsupportedMechanismError
from inid_dp.numerics import (BisectionConfig, bisect_monotone, gaussian_q,
                              gaussian_q_inv, scaled_tail_product)
from inid_dp.profile import SensitivityProfile, _as_profile

DELTA_MIN = 1e-300
DELTA_MAX = 1.0 - 1e-12


def privacy_profile(mu: float, budget: PrivacyBudget) -> float:
    """``phi_eps(mu)``; equals the smallest admissible delta at ``mu``.

    Raises:
      DomainError: if ``mu <= 0``.
    """
    mu = float(mu)
    if not mu > 0:
        raise DomainError(f"mu must be positive, got {mu}")
    eps = budget.epsilon
    a = eps / mu
    b = 0.5 * mu
    return gaussian_q(a - b) - scaled_tail_product(eps, a + b)


def _r_eps(eps: float, delta: float) -> float:
    # positive root of Q(eps/mu - mu/2) = delta
    q = gaussian_q_inv(delta)
    root = math.sqrt(q * q + 2.0 * eps)
    if q > 0:
        return 2.0 * eps / (root + q)
    return root - q


def _check_delta(budget: PrivacyBudget) -> None:
    if budget.delta == 0.0:
        raise UnsupportedMechanismError(
            "pure DP unsupported for Gaussian: delta must be > 0")
    if budget.delta >= DELTA_MAX:
        raise DomainError(
            f"delta={budget.delta} is degenerate: no noise is needed for delta near 1")
    if budget.delta <= DELTA_MIN:
        raise DomainError(f"delta={budget.delta} is below the supported range")


@dataclass(frozen=True)
class GaussianSolverResult:
    """Outcome of :func:`solve_mu0`.

    ``bracket_lo`` and ``bracket_hi`` are the initial analytic bounds on
    ``mu0`` (roots of the single-tail relaxations at ``delta`` and
    ``delta_prime``).
    """

    mu0: float
    bracket_lo: float
    bracket_hi: float
    delta_prime: float
    iterations: int
    epsilon: float
    delta: float
    tolerance: float

    @property
    def eta(self) -> float:
        """Resource ``mu0^2 / 2`` in zCDP units."""
        return 0.5 * self.mu0 ** 2


def solve_mu0(budget: PrivacyBudget, cfg: BisectionConfig | None = None
              ) -> GaussianSolverResult:
    """Largest ``mu`` with ``phi_eps(mu) <= delta``, by bracketed bisection.

    The bracket is ``[R(delta), R(delta')]`` where
    ``R(a) = sqrt(Qinv(a)^2 + 2 eps) - Qinv(a)`` and
    ``delta' = delta + e^eps Q(sqrt(2 eps))``. The returned ``mu0`` is the
    lower end of the final bracket, so ``phi_eps(mu0) <= delta`` always.
    Results are cached per ``(budget, cfg)``.

    Raises:
      UnsupportedMechanismError: for ``delta == 0``.
      DomainError: for ``delta`` too close to 0 or 1.
    """
    cfg = cfg or BisectionConfig()
    return _solve_mu0_cached(budget.epsilon, budget.delta, cfg.tolerance,
                             cfg.max_iterations)


@functools.lru_cache(maxsize=4096)
def _solve_mu0_cached(eps: float, delta: float, tol: float, max_it: int
                      ) -> GaussianSolverResult:
    budget = PrivacyBudget(eps, delta)
    _check_delta(budget)
    cfg = BisectionConfig(tol, max_it)

    def f(mu):
        if mu <= 0.0:
            return -delta
        return privacy_profile(mu, budget) - delta

    lo = _r_eps(eps, delta)
    delta_prime = delta + scaled_tail_product(eps, math.sqrt(2.0 * eps))
    if delta_prime < DELTA_MAX:
        hi = _r_eps(eps, delta_prime)
    else:
        hi = max(2.0 * lo, 1.0)
    # the analytic bounds are exact in real arithmetic; widen on rounding slop
    while f(lo) > 0.0:
        lo *= 0.5
    while f(hi) < 0.0:
        hi = 2.0 * hi + 1e-12
    if hi <= lo:
        hi = lo + cfg.tolerance
    mu0, it, _, _ = bisect_monotone(f, lo, hi, cfg, full_output=True)
    return GaussianSolverResult(mu0=mu0, bracket_lo=lo, bracket_hi=hi,
                                delta_prime=delta_prime, iterations=it,
                                epsilon=eps, delta=delta, tolerance=tol)


def gaussian_scales(lam: np.ndarray, mu0: float, mode: Mode, p: float
                    ) -> np.ndarray:
    """Standard deviations for profile ``lam`` given the budget constant ``mu0``."""
    lam = np.asarray(lam, dtype=float)
    mode = Mode(mode)
    K = lam.size
    m = lam.max()
    u = lam / m
    if mode is Mode.IID:
        return np.full(K, m * math.sqrt(np.sum(u * u)) / mu0)
    if mode is Mode.SPR:
        return math.sqrt(K) * lam / mu0
    # sigma_i^2 = lam_i^(4/(p+2)) * sum_j lam_j^(2p/(p+2)) / mu0^2
    var = u ** (4.0 / (p + 2.0)) * np.sum(u ** (2.0 * p / (p + 2.0)))
    return m * np.sqrt(var) / mu0


def calibrate_gaussian(profile, budget: PrivacyBudget, mode="inid", p=2.0,
                       cfg: BisectionConfig | None = None) -> NoiseScales:
    """Gaussian noise scales for ``(eps, delta)``-DP.

    Modes:
      ``iid``: ``sigma_i = ||lam||_2 / mu0`` everywhere.
      ``spr``: ``sigma_i = sqrt(K) lam_i / mu0`` (scale, perturb, rescale).
      ``inid``: the scales minimising ``E||T||_p^p`` subject to
      ``sum lam_i^2 / sigma_i^2 = mu0^2``; at ``p = 2`` this is
      ``sigma_i^2 = lam_i ||lam||_1 / mu0^2``.

    Zero-sensitivity coordinates get zero noise in ``spr`` and ``inid`` modes.

    Raises:
      UnsupportedMechanismError: for ``delta == 0``.
      DomainError: for invalid ``p`` or ``delta``.
    """
    prof = _as_profile(profile)
    p = check_error_order(p)
    mode = Mode(mode)
    res = solve_mu0(budget, cfg)
    sigma = gaussian_scales(prof.lam, res.mu0, mode, p)
    return NoiseScales(Mechanism.GAUSSIAN, mode, p, sigma,
                       expected_lp_error(Mechanism.GAUSSIAN, sigma, p),
                       epsilon=budget.epsilon, delta=budget.delta, mu0=res.mu0)


def realized_mu(profile, scales) -> float:
    """``||lam / sigma||_2`` with the ``0/0 = 0`` convention.

    Returns ``inf`` if some coordinate has positive sensitivity and zero noise.
    """
    lam = _as_profile(profile).lam
    s = np.asarray(scales.scales if isinstance(scales, NoiseScales) else scales,
                   dtype=float)
    nz = lam > 0
    if np.any(s[nz] == 0):
        return math.inf
    return float(math.sqrt(np.sum((lam[nz] / s[nz]) ** 2)))


def mse_ratio_iid_over_inid(profile) -> float:
    """``K ||lam||_2^2 / ||lam||_1^2``: the i.i.d.-to-optimal MSE ratio."""
    lam = _as_profile(profile).lam
    m = lam.max()
    u = lam / m
    return float(lam.size * np.sum(u * u) / np.sum(u) ** 2)
