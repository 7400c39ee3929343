"""Noise sampling, empirical error estimates and Monte Carlo privacy audits.

Randomness comes from :class:`SeededRng`, a ``(seed, stream_id)`` pair mapped to
a counter-based Philox generator. Long simulations are cut into fixed-size
chunks and chunk ``c`` always draws from substream ``(stream_id, c)``, so a
result depends on the seed only and not on how chunks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from inid_dp import _kernels
from inid_dp.core import Mechanism, NoiseScales
from inid_dp.exceptions import AuditError, DomainError
from inid_dp.numerics import gaussian_q, scaled_tail_product
from inid_dp.profile import _as_profile

CHUNK = 1 << 16
AUDIT_SIGMAS = 4.0
# atoms of the Laplace loss sit exactly at +-eps; count them despite rounding
_ATOM_SLACK = 1e-12


@dataclass(frozen=True)
class SeededRng:
    """Reproducible random source identified by ``(seed, stream_id)``."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        if int(self.seed) < 0 or int(self.stream_id) < 0:
            raise DomainError("seed and stream_id must be non-negative")

    def generator(self, *subkeys: int) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed),
                                    spawn_key=(int(self.stream_id), *map(int, subkeys)))
        return np.random.Generator(np.random.Philox(ss))

    def substream(self, stream_id: int) -> "SeededRng":
        return SeededRng(self.seed, stream_id)


def _draw(gen: np.random.Generator, mechanism: Mechanism, scales: np.ndarray,
          n: int) -> np.ndarray:
    k = scales.size
    if mechanism is Mechanism.GAUSSIAN:
        z = gen.standard_normal((n, k))
    else:
        # inverse CDF: random sign times a standard exponential
        sign = gen.integers(0, 2, size=(n, k), dtype=np.int8) * 2 - 1
        z = sign * gen.standard_exponential((n, k))
    return z * scales


def sample_noise(scales: NoiseScales, rng: SeededRng, size: int | None = None
                 ) -> np.ndarray:
    """One noise vector (or ``size`` rows of them) for the given scales.

    Coordinates with zero scale are exactly zero.
    """
    gen = rng.generator()
    rows = 1 if size is None else int(size)
    t = _draw(gen, scales.mechanism, scales.scales, rows)
    return t[0] if size is None else t


def perturb(query_output, scales: NoiseScales, rng: SeededRng) -> np.ndarray:
    """``f(D) + t`` with ``t`` drawn by :func:`sample_noise`."""
    z = np.asarray(query_output, dtype=float)
    if z.shape != scales.scales.shape:
        raise DomainError(f"query has {z.size} coordinates, scales have {scales.K}")
    return z + sample_noise(scales, rng)


def _chunks(n: int, chunk: int):
    return [(c, min(chunk, n - c * chunk)) for c in range((n + chunk - 1) // chunk)]


def _map_chunks(fn, n: int, chunk: int, workers: int):
    jobs = _chunks(n, chunk)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(lambda job: fn(*job), jobs))
    return [fn(c, m) for c, m in jobs]


def _mean_and_se(sums, sqsums, n: int):
    # fsum over per-chunk partials keeps the reduction order-independent
    mean = math.fsum(sums) / n
    if n < 2:
        return mean, math.nan
    var = max(math.fsum(sqsums) / n - mean * mean, 0.0) * n / (n - 1)
    return mean, math.sqrt(var / n)


def empirical_lp_error(scales: NoiseScales, p: float, n: int, rng: SeededRng,
                       chunk: int = CHUNK, workers: int = 1):
    """Monte Carlo estimate of ``E ||T||_p^p``.

    Returns:
      ``(mean, std_error)`` over ``n`` draws.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    p = float(p)

    def run(c, m):
        t = _draw(rng.generator(c), scales.mechanism, scales.scales, m)
        v = np.sum(np.abs(t) ** p, axis=1)
        return float(v.sum()), float(np.dot(v, v))

    parts = _map_chunks(run, n, chunk, workers)
    return _mean_and_se([a for a, _ in parts], [b for _, b in parts], n)


def gaussian_privacy_loss_tail(scales: NoiseScales, profile, epsilon: float):
    """Exact privacy profile of Gaussian scales at the worst-case shift ``d = lam``.

    The loss ``zeta_d(T)`` is ``N(|m|^2/2, |m|^2)`` with ``m = d / sigma``, giving
    ``Q(eps/|m| - |m|/2) - e^eps Q(eps/|m| + |m|/2)``.

    Returns:
      ``(analytic, d)``.

    Raises:
      DomainError: for non-Gaussian scales.
    """
    if scales.mechanism is not Mechanism.GAUSSIAN:
        raise DomainError("gaussian_privacy_loss_tail needs Gaussian scales")
    lam = _as_profile(profile).lam
    d = lam.copy()
    return _gaussian_tail_at(scales.scales, d, float(epsilon)), d


def _gaussian_tail_at(sigma: np.ndarray, d: np.ndarray, eps: float) -> float:
    nz = d != 0
    if np.any(sigma[nz] == 0):
        return 1.0
    m = math.sqrt(float(np.sum((d[nz] / sigma[nz]) ** 2)))
    if m == 0.0:
        return 0.0
    return gaussian_q(eps / m - m / 2) - scaled_tail_product(eps, eps / m + m / 2)


@dataclass(frozen=True)
class AuditReport:
    """Monte Carlo estimate of ``P{zeta_d >= eps} - e^eps P{zeta_-d <= -eps}``."""

    epsilon: float
    delta_target: float
    empirical_profile: float
    std_error: float
    n_samples: int
    worst_case_d: np.ndarray
    loss_mean: float = math.nan
    loss_var: float = math.nan
    max_loss: float = math.nan
    analytic_profile: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def threshold(self) -> float:
        return self.delta_target + AUDIT_SIGMAS * self.std_error

    @property
    def passed(self) -> bool:
        return self.empirical_profile <= self.threshold

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict}: profile {self.empirical_profile:.3e} "
                f"+- {self.std_error:.1e} vs delta {self.delta_target:.3e} "
                f"(n={self.n_samples})")


def audit(scales: NoiseScales, profile, epsilon: float, n: int, rng: SeededRng,
          delta_target: float | None = None, d=None, chunk: int = CHUNK,
          workers: int = 1) -> AuditReport:
    """Sample the noise and estimate the privacy profile at shift ``d``.

    ``d`` defaults to the worst case ``lam``. The loss is evaluated in closed
    form: ``sum t_i d_i/sigma_i^2 + d_i^2/(2 sigma_i^2)`` for Gaussian noise and
    ``sum (|t_i + d_i| - |t_i|)/beta_i`` for Laplace noise; ``zeta_-d(t)`` uses
    the same draw. ``delta_target`` defaults to the delta stored on ``scales``.

    Raises:
      AuditError: if a sensitive coordinate has zero noise (unbounded loss).
      DomainError: if ``n < 10_000`` or ``d`` exceeds ``lam``.
    """
    lam = _as_profile(profile).lam
    n = int(n)
    if n < 10_000:
        raise DomainError("an audit needs at least 10_000 samples")
    eps = float(epsilon)
    d = lam.copy() if d is None else np.asarray(d, dtype=float)
    if d.shape != lam.shape or np.any(np.abs(d) > lam * (1 + 1e-12)):
        raise DomainError("shift d must satisfy |d_i| <= lam_i")
    s = scales.scales
    if np.any((s == 0) & (d != 0)):
        raise AuditError("zero noise scale on a coordinate with nonzero shift: "
                         "privacy loss is infinite")
    if delta_target is None:
        delta_target = scales.delta or 0.0
    gaussian = scales.mechanism is Mechanism.GAUSSIAN
    loss = _kernels.gaussian_loss if gaussian else _kernels.laplace_loss
    e_eps = math.exp(eps)
    slack = _ATOM_SLACK * max(1.0, eps)
    neg_d = np.ascontiguousarray(-d)
    d = np.ascontiguousarray(d)

    def run(c, m):
        t = _draw(rng.generator(c), scales.mechanism, s, m)
        z_pos = loss(t, d, s)
        z_neg = loss(t, neg_d, s)
        x = (z_pos >= eps - slack).astype(float) - e_eps * (z_neg <= -eps + slack)
        return (float(x.sum()), float(np.dot(x, x)), float(z_pos.sum()),
                float(np.dot(z_pos, z_pos)), float(z_pos.max()))

    parts = _map_chunks(run, n, chunk, workers)
    prof, se = _mean_and_se([q[0] for q in parts], [q[1] for q in parts], n)
    lmean, lse = _mean_and_se([q[2] for q in parts], [q[3] for q in parts], n)
    analytic = _gaussian_tail_at(s, d, eps) if gaussian else None
    return AuditReport(epsilon=eps, delta_target=float(delta_target),
                       empirical_profile=prof, std_error=se, n_samples=n,
                       worst_case_d=d, loss_mean=lmean,
                       loss_var=lse * lse * n, max_loss=max(q[4] for q in parts),
                       analytic_profile=analytic)
