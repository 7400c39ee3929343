"""Differentially private PCA by perturbing the second-moment matrix.

Each user contributes a unit-norm vector ``x``. The ``K = M(M+1)/2``
upper-triangular entries of ``sum_n x_n x_n^T`` form the query. Diagonal
entries get sensitivity ``a`` and off-diagonal ones ``a / sqrt(2)``, with ``a``
chosen so the profile has unit ``l2`` norm. Every entry of ``x x^T`` is clipped
to its sensitivity before summation, so the profile is exact under add/remove
of one user.

The data and the standard noise of trial ``t`` come from substream ``t`` of the
seed, independent of the mode. Runs that differ only in mode are therefore
paired draw by draw.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from inid_dp.core import Mechanism, Mode, PrivacyBudget
from inid_dp.exceptions import DomainError
from inid_dp.gaussian import gaussian_scales, solve_mu0
from inid_dp.laplace import laplace_scales
from inid_dp.mechanism import SeededRng
from inid_dp.profile import SensitivityProfile

log = logging.getLogger(__name__)

MAX_REDRAWS = 5


@dataclass(frozen=True)
class DpPcaConfig:
    """DP-PCA settings.

    ``noiseless=True`` is the non-private reference: no clipping and no noise,
    so the eigenvectors of ``X^T X`` are recovered exactly.
    """

    n_users: int = 100
    n_features_M: int = 10
    rank_r: int = 2
    budget: PrivacyBudget = PrivacyBudget(2.0, 1e-6)
    mechanism: Mechanism = Mechanism.GAUSSIAN
    mode: Mode = Mode.INID
    trials: int = 100
    noiseless: bool = False

    def __post_init__(self):
        if min(int(self.n_users), int(self.n_features_M), int(self.rank_r),
               int(self.trials)) < 1:
            raise DomainError("n_users, n_features_M, rank_r and trials must be >= 1")
        if self.rank_r > self.n_features_M:
            raise DomainError("rank_r must not exceed n_features_M")
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        object.__setattr__(self, "mode", Mode(self.mode))
        if self.mode is Mode.SPR:
            raise DomainError("DP-PCA compares iid and inid noise only")

    @property
    def K(self) -> int:
        return self.n_features_M * (self.n_features_M + 1) // 2


@dataclass
class DpPcaResult:
    mean_sre: float
    sre: np.ndarray
    scales: np.ndarray
    profile: SensitivityProfile
    extra: dict = field(default_factory=dict)

    @property
    def std_error(self) -> float:
        n = self.sre.size
        return float(self.sre.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan


def pca_profile(n_features: int) -> SensitivityProfile:
    """Upper-triangular profile, row-major: diagonal ``a``, off-diagonal ``a/sqrt 2``."""
    M = int(n_features)
    iu = np.triu_indices(M)
    lam = np.where(iu[0] == iu[1], 1.0, 1.0 / math.sqrt(2.0))
    return SensitivityProfile(lam / np.linalg.norm(lam))


def random_subspace_data(n_users: int, n_features: int, rank: int,
                         gen: np.random.Generator):
    """Unit-norm rows ``x_n = U a_n / ||U a_n||`` for a uniformly random ``U``.

    Returns:
      ``(X, U)`` with ``X`` of shape ``(n_users, n_features)`` and orthonormal
      ``U`` of shape ``(n_features, rank)``.
    """
    U, _ = np.linalg.qr(gen.standard_normal((n_features, rank)))
    X = gen.standard_normal((n_users, rank)) @ U.T
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return X, U


def clipped_second_moment(X: np.ndarray, profile: SensitivityProfile) -> np.ndarray:
    """Upper-triangular entries of ``sum_n clip(x_n x_n^T)``."""
    M = X.shape[1]
    iu = np.triu_indices(M)
    prods = X[:, iu[0]] * X[:, iu[1]]
    lam = profile.lam
    return np.clip(prods, -lam, lam).sum(axis=0)


def symmetrize(upper: np.ndarray, n_features: int) -> np.ndarray:
    """Symmetric matrix from its row-major upper triangle; exact transpose symmetry."""
    A = np.zeros((n_features, n_features))
    A[np.triu_indices(n_features)] = upper
    return np.triu(A) + np.triu(A, 1).T


def subspace_recovery_error(U_hat: np.ndarray, U: np.ndarray) -> float:
    """``||(I - U_hat U_hat^T) U||_F / ||U||_F``."""
    resid = U - U_hat @ (U_hat.T @ U)
    return float(np.linalg.norm(resid) / np.linalg.norm(U))


def pca_noise_scales(config: DpPcaConfig, profile: SensitivityProfile) -> np.ndarray:
    if config.noiseless:
        return np.zeros(profile.K)
    if config.mechanism is Mechanism.GAUSSIAN:
        mu0 = solve_mu0(config.budget).mu0
        return gaussian_scales(profile.lam, mu0, config.mode, 2.0)
    return laplace_scales(profile.lam, config.budget.epsilon, config.mode, 2.0)


def _standard_noise(gen, mechanism: Mechanism, k: int) -> np.ndarray:
    if mechanism is Mechanism.GAUSSIAN:
        return gen.standard_normal(k)
    return (gen.integers(0, 2, size=k) * 2 - 1) * gen.standard_exponential(k)


def _trial(config: DpPcaConfig, profile, scales, gen) -> float:
    M, r = config.n_features_M, config.rank_r
    X, U = random_subspace_data(config.n_users, M, r, gen)
    z = _standard_noise(gen, config.mechanism, profile.K)
    if config.noiseless:
        A = X.T @ X
    else:
        A = symmetrize(clipped_second_moment(X, profile) + scales * z, M)
    _, vecs = np.linalg.eigh(A)
    return subspace_recovery_error(vecs[:, -r:], U)


def dppca_run(config: DpPcaConfig, rng: SeededRng) -> DpPcaResult:
    """Mean subspace recovery error over ``config.trials`` independent trials.

    A trial whose eigendecomposition fails is logged and redrawn from a fresh
    substream.
    """
    profile = pca_profile(config.n_features_M)
    scales = pca_noise_scales(config, profile)
    sre = np.empty(config.trials)
    redraws = 0
    for t in range(config.trials):
        for attempt in range(MAX_REDRAWS + 1):
            try:
                sre[t] = _trial(config, profile, scales, rng.generator(t, attempt))
                break
            except np.linalg.LinAlgError as exc:
                log.warning("trial %d attempt %d discarded: %s", t, attempt, exc)
                redraws += 1
        else:
            raise np.linalg.LinAlgError(f"trial {t} failed {MAX_REDRAWS + 1} times")
    return DpPcaResult(float(sre.mean()), sre, scales, profile,
                       extra={"redraws": redraws})
