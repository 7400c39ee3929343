"""Differentially private proximal coordinate descent (DP-CD).

Each pass visits every coordinate once. The ``i``-th update averages per-sample
gradients clipped to ``C_i``, takes a step ``tau_i = tau / M_i`` and adds noise
before the proximal map of the separable regulariser. Replacing one record
moves the clipped average by at most ``2 C_i / N``, so the update has
sensitivity ``lam_i = 2 tau_i C_i / N``. The privacy resource is split evenly
over the ``L`` passes and, within a pass, across coordinates according to the
chosen mode.
"""

from __future__ import annotations

import csv
import hashlib
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from inid_dp import _kernels
from inid_dp.core import Mechanism, Mode, PrivacyBudget
from inid_dp.exceptions import DomainError
from inid_dp.gaussian import gaussian_scales, solve_mu0
from inid_dp.laplace import laplace_scales
from inid_dp.mechanism import SeededRng

log = logging.getLogger(__name__)

_LOSSES = {"least_squares": _kernels.LEAST_SQUARES, "logistic": _kernels.LOGISTIC}
_REGS = {"l1": _kernels.REG_L1, "l2": _kernels.REG_L2}
SMOOTHNESS_FLOOR = 1e-6


@dataclass(frozen=True)
class Dataset:
    """Feature matrix ``X`` (N x K), labels ``y`` and optional feature bounds."""

    X: np.ndarray
    y: np.ndarray
    bounds: np.ndarray | None = None
    name: str = "dataset"

    def __post_init__(self):
        X = np.ascontiguousarray(self.X, dtype=float)
        y = np.ascontiguousarray(self.y, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DomainError("X must be a non-empty 2-D array")
        if y.size != X.shape[0]:
            raise DomainError("X and y disagree on the number of samples")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        if self.bounds is not None:
            b = np.asarray(self.bounds, dtype=float).reshape(-1)
            if b.size != X.shape[1] or np.any(b <= 0):
                raise DomainError("need one positive bound per feature")
            object.__setattr__(self, "bounds", b)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def fingerprint(self) -> str:
        h = hashlib.sha1()
        h.update(self.X.tobytes())
        h.update(self.y.tobytes())
        return h.hexdigest()


def make_synthetic(n_samples: int, n_features: int, rng: SeededRng,
                   task: str = "least_squares", scale_range=(0.05, 5.0),
                   sparsity: float = 0.5, noise: float = 0.1) -> Dataset:
    """Synthetic GLM data with column scales drawn log-uniformly.

    Column ``i`` is uniform on ``[-s_i, s_i]`` so ``s_i`` is an exact feature
    bound. A fraction ``sparsity`` of the true coefficients is zero. For
    ``logistic`` the labels are ``+-1`` drawn from the logistic model.
    """
    gen = rng.generator()
    lo, hi = (math.log(v) for v in scale_range)
    s = np.exp(gen.uniform(lo, hi, n_features))
    X = gen.uniform(-1.0, 1.0, (n_samples, n_features)) * s
    w = gen.standard_normal(n_features) / s
    w[gen.random(n_features) < sparsity] = 0.0
    z = X @ w
    if task == "least_squares":
        y = z + noise * gen.standard_normal(n_samples)
    elif task == "logistic":
        y = np.where(gen.random(n_samples) < 1.0 / (1.0 + np.exp(-z)), 1.0, -1.0)
    else:
        raise DomainError(f"unknown task {task!r}")
    return Dataset(X, y, bounds=s, name=f"synthetic_{task}")


def load_dataset_csv(path, bounds=None) -> Dataset:
    """CSV with a header row, numeric columns, label in the last column."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DomainError(f"{path}: need a header and at least one data row")
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    return Dataset(data[:, :-1], data[:, -1], bounds=bounds, name=path.stem)


@dataclass(frozen=True)
class SmoothnessEstimation:
    """Spend ``fraction * epsilon`` estimating the smoothness constants."""

    fraction: float
    bounds: np.ndarray | None = None


@dataclass(frozen=True)
class DpCdConfig:
    """DP-CD settings.

    ``budget=None`` runs the non-private algorithm (no clipping, no noise).
    ``smoothness`` may supply the constants ``M_i``; otherwise they are
    computed from the data, or estimated privately when ``estimation`` is set.
    """

    loss: str = "least_squares"
    regularizer: str = "l1"
    reg_strength: float = 0.01
    passes_L: int = 10
    step_scale_tau: float = 1.0
    clip_scale_C: float = 1.0
    budget: PrivacyBudget | None = None
    mode: Mode = Mode.INID
    mechanism: Mechanism = Mechanism.GAUSSIAN
    smoothness: np.ndarray | None = None
    estimation: SmoothnessEstimation | None = None

    def __post_init__(self):
        if self.loss not in _LOSSES:
            raise DomainError(f"unknown loss {self.loss!r}")
        if self.regularizer not in _REGS:
            raise DomainError(f"unknown regularizer {self.regularizer!r}")
        if int(self.passes_L) < 1:
            raise DomainError("passes_L must be >= 1")
        if not (self.step_scale_tau > 0 and self.clip_scale_C > 0):
            raise DomainError("tau and C must be positive")
        if self.reg_strength < 0:
            raise DomainError("reg_strength must be >= 0")
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "mechanism", Mechanism(self.mechanism))
        if self.estimation is not None:
            if self.budget is None:
                raise DomainError("private smoothness estimation needs a budget")
            if not 0.0 < self.estimation.fraction < 1.0:
                raise DomainError("eps' must satisfy 0 < eps' < eps")


def objective(theta, data: Dataset, loss: str, regularizer: str,
              reg_strength: float) -> float:
    z = data.X @ theta
    if loss == "least_squares":
        f = 0.5 * np.mean((z - data.y) ** 2)
    else:
        f = np.mean(np.logaddexp(0.0, -data.y * z))
    if regularizer == "l1":
        r = reg_strength * np.sum(np.abs(theta))
    else:
        r = 0.5 * reg_strength * np.sum(theta * theta)
    return float(f + r)


def smoothness_constants(X, loss: str) -> np.ndarray:
    """Coordinate-wise smoothness of the data-fit term."""
    m = np.mean(np.asarray(X) ** 2, axis=0)
    return 0.25 * m if loss == "logistic" else m


def estimate_smoothness_private(features, bounds_b, eps_prime: float,
                                rng: SeededRng) -> np.ndarray:
    """Private per-feature means of squared features.

    ``M_i = mean(clip(x_i^2, b_i^2)) + b_i^2 K / (N eps') * T_i`` with
    ``T_i ~ Laplace(0, 1)``; the budget ``eps'`` is split evenly over the ``K``
    features. ``eps' = inf`` returns the clipped means. Estimates are floored
    at ``1e-6`` times the largest one.
    """
    X = np.asarray(features, dtype=float)
    b = np.asarray(bounds_b, dtype=float).reshape(-1)
    N, K = X.shape
    if b.size != K or np.any(b <= 0):
        raise DomainError("need one positive bound per feature")
    if not eps_prime > 0:
        raise DomainError("eps' must be positive")
    est = np.mean(np.minimum(X * X, b * b), axis=0)
    if math.isfinite(eps_prime):
        gen = rng.generator()
        est = est + b * b * K / (N * eps_prime) * gen.laplace(0.0, 1.0, K)
    floor = SMOOTHNESS_FLOOR * max(float(est.max()), 0.0)
    if floor <= 0:
        floor = SMOOTHNESS_FLOOR * float(np.max(b * b))
    return np.maximum(est, floor)


_REFERENCE_CACHE: dict = {}


def reference_optimum(data: Dataset, loss: str, regularizer: str,
                      reg_strength: float, tol: float = 1e-10,
                      max_passes: int = 200_000):
    """Non-private optimum ``theta*`` by coordinate descent, cached per problem.

    Iterates until a full pass moves no coordinate by more than ``tol``
    (scaled by the step size, this is the prox-gradient residual).
    """
    key = (data.fingerprint(), loss, regularizer, float(reg_strength))
    hit = _REFERENCE_CACHE.get(key)
    if hit is not None:
        return hit.copy(), objective(hit, data, loss, regularizer, reg_strength)
    M = smoothness_constants(data.X, loss)
    steps = 1.0 / M
    K = data.n_features
    theta = np.zeros(K)
    margin = np.zeros(data.n_samples)
    clips = np.full(K, np.inf)
    noise = np.zeros(K)
    lcode, rcode = _LOSSES[loss], _REGS[regularizer]
    for _ in range(max_passes):
        prev = theta.copy()
        _kernels.cd_pass(data.X, data.y, theta, margin, steps, clips, noise,
                         lcode, rcode, float(reg_strength))
        if np.max(np.abs(theta - prev) * np.sqrt(M)) <= tol:
            break
    else:
        log.warning("reference optimiser hit max_passes=%d", max_passes)
    _REFERENCE_CACHE[key] = theta.copy()
    return theta, objective(theta, data, loss, regularizer, reg_strength)


@dataclass
class DpCdResult:
    relative_errors: np.ndarray
    theta: np.ndarray
    sensitivities: np.ndarray
    scales: np.ndarray
    smoothness: np.ndarray
    per_pass_resource: float
    optimum_value: float
    extra: dict = field(default_factory=dict)

    @property
    def final_relative_error(self) -> float:
        return float(self.relative_errors[-1])


def dpcd_setup(config: DpCdConfig, data: Dataset, rng: SeededRng):
    """Step sizes, clipping thresholds, sensitivities and noise scales."""
    K = data.n_features
    N = data.n_samples
    budget = config.budget
    eps_opt = budget.epsilon if budget is not None else math.inf
    if config.smoothness is not None:
        M = np.asarray(config.smoothness, dtype=float).reshape(-1)
        if M.size != K or np.any(M <= 0):
            raise DomainError("need one positive smoothness constant per feature")
    elif config.estimation is not None:
        bounds = config.estimation.bounds
        if bounds is None:
            bounds = data.bounds
        if bounds is None:
            raise DomainError("private smoothness estimation needs feature bounds")
        eps_prime = config.estimation.fraction * budget.epsilon
        eps_opt = budget.epsilon - eps_prime
        M = estimate_smoothness_private(data.X, bounds, eps_prime,
                                        rng.substream(rng.stream_id + 1_000_003))
        if config.loss == "logistic":
            M = 0.25 * M
    else:
        M = smoothness_constants(data.X, config.loss)
    steps = config.step_scale_tau / M
    if budget is None:
        clips = np.full(K, np.inf)
        lam = np.zeros(K)
        scales = np.zeros(K)
        resource = 0.0
    else:
        clips = config.clip_scale_C * np.sqrt(M / M.sum())
        lam = 2.0 * steps * clips / N
        L = int(config.passes_L)
        if config.mechanism is Mechanism.GAUSSIAN:
            mu0 = solve_mu0(PrivacyBudget(eps_opt, budget.delta)).mu0
            mu_pass = mu0 / math.sqrt(L)
            scales = gaussian_scales(lam, mu_pass, config.mode, 2.0)
            with np.errstate(over="ignore", invalid="ignore"):
                resource = float(np.sum(lam ** 2 / (2.0 * scales ** 2)))
        else:
            eps_pass = eps_opt / L
            scales = laplace_scales(lam, eps_pass, config.mode, 2.0)
            resource = float(np.sum(lam / scales))
    return M, steps, clips, lam, scales, resource


def dpcd_run(config: DpCdConfig, data: Dataset, rng: SeededRng,
             theta0=None) -> DpCdResult:
    """Run ``L`` passes of (private) proximal coordinate descent.

    Returns the relative error ``(J(theta_l) - J*) / J*`` after every pass,
    where ``J*`` comes from :func:`reference_optimum`.

    Raises:
      FloatingPointError: if the iterate becomes non-finite.
    """
    M, steps, clips, lam, scales, resource = dpcd_setup(config, data, rng)
    _, j_star = reference_optimum(data, config.loss, config.regularizer,
                                  config.reg_strength)
    K = data.n_features
    theta = np.zeros(K) if theta0 is None else np.array(theta0, dtype=float)
    margin = data.X @ theta
    gen = rng.generator()
    lcode, rcode = _LOSSES[config.loss], _REGS[config.regularizer]
    errs = np.empty(config.passes_L)
    for l in range(config.passes_L):
        if config.mechanism is Mechanism.GAUSSIAN:
            noise = gen.standard_normal(K) * scales
        else:
            noise = gen.laplace(0.0, 1.0, K) * scales
        _kernels.cd_pass(data.X, data.y, theta, margin, steps, clips, noise,
                         lcode, rcode, float(config.reg_strength))
        with np.errstate(over="ignore", invalid="ignore"):
            j = objective(theta, data, config.loss, config.regularizer,
                          config.reg_strength)
        if not (np.all(np.isfinite(theta)) and math.isfinite(j)):
            raise FloatingPointError(
                f"non-finite iterate or objective after pass {l + 1}: "
                f"steps={steps}, clips={clips}, scales={scales}")
        errs[l] = (j - j_star) / j_star
    return DpCdResult(errs, theta, lam, scales, M, resource, j_star)


def dpcd_grid_search(config: DpCdConfig, data: Dataset, seeds, taus, clips,
                     passes=None, stream_id: int = 0):
    """Best-of-grid hyperparameters by mean final relative error over seeds.

    Returns:
      ``(best_config, best_mean, table)`` where ``table`` lists
      ``(tau, C, L, mean_error)`` for every grid point.
    """
    passes = passes or [config.passes_L]
    table = []
    best = (math.inf, config)
    for L in passes:
        for tau in taus:
            for C in clips:
                cfg = replace(config, step_scale_tau=float(tau),
                              clip_scale_C=float(C), passes_L=int(L))
                errs = []
                for s in seeds:
                    try:
                        errs.append(dpcd_run(cfg, data, SeededRng(s, stream_id))
                                    .final_relative_error)
                    except FloatingPointError:
                        errs.append(math.inf)
                mean = float(np.mean(errs))
                table.append((float(tau), float(C), int(L), mean))
                if mean < best[0]:
                    best = (mean, cfg)
    return best[1], best[0], table


DEFAULT_TAUS = (0.1, 0.3, 1.0)
DEFAULT_CLIPS = (0.1, 0.3, 1.0, 3.0, 10.0)
DEFAULT_PASSES = (3, 10, 30)


def dpcd_compare(config: DpCdConfig, data: Dataset, modes, tune_seeds,
                 eval_seeds, taus=DEFAULT_TAUS, clips=DEFAULT_CLIPS,
                 passes=DEFAULT_PASSES, tune_stream: int = 0,
                 eval_stream: int = 7):
    """Tune each mode on its own grid, then evaluate all modes on shared seeds.

    Evaluation seed ``s`` drives the same standard-normal draws in every mode,
    so the final errors are paired across modes.

    Returns:
      ``{mode: (best_config, final_errors)}`` with one error per eval seed.
    """
    out = {}
    for mode in modes:
        cfg = replace(config, mode=Mode(mode))
        best, _, _ = dpcd_grid_search(cfg, data, list(tune_seeds), taus, clips,
                                      passes, stream_id=tune_stream)
        errs = np.array([dpcd_run(best, data, SeededRng(s, eval_stream))
                         .final_relative_error for s in eval_seeds])
        out[Mode(mode).value] = (best, errs)
    return out
