"""Hot loops with a numba path and a pure-numpy fallback.

Set ``INID_DP_DISABLE_NUMBA=1`` before import to force the numpy path (also
used automatically when numba is not installed). Both paths share signatures
and are tested against each other.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import expit

_DISABLE = os.environ.get("INID_DP_DISABLE_NUMBA", "").strip().lower() in {
    "1", "true", "yes", "on"}

try:
    if _DISABLE:
        raise ImportError("numba disabled by INID_DP_DISABLE_NUMBA")
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"

LEAST_SQUARES = 0
LOGISTIC = 1
REG_L1 = 0
REG_L2 = 1


# --------------------------------------------------------------------------
# numpy implementations (always available, used as reference in tests)
# --------------------------------------------------------------------------

def gaussian_loss_np(t, d, sigma):
    """Row-wise Gaussian privacy loss ``sum_i (t_i d_i + d_i^2/2) / sigma_i^2``."""
    w = np.zeros_like(sigma)
    nz = sigma > 0
    w[nz] = 1.0 / sigma[nz] ** 2
    return t @ (d * w) + 0.5 * np.sum(d * d * w)


def laplace_loss_np(t, d, beta):
    """Row-wise Laplace privacy loss ``sum_i (|t_i + d_i| - |t_i|) / beta_i``."""
    w = np.zeros_like(beta)
    nz = beta > 0
    w[nz] = 1.0 / beta[nz]
    return (np.abs(t + d) - np.abs(t)) @ w


def pairwise_abs_diff_np(x):
    """``sum_{i,j} |x_i - x_j|`` via sorted prefix sums."""
    xs = np.sort(x)
    k = xs.size
    idx = np.arange(k)
    return 2.0 * float(np.sum((2 * idx - k + 1) * xs))


def _soft(v, thr):
    if v > thr:
        return v - thr
    if v < -thr:
        return v + thr
    return 0.0


def _prox(v, step, reg, strength):
    if reg == REG_L1:
        return _soft(v, step * strength)
    return v / (1.0 + step * strength)


def cd_pass_np(X, y, theta, margin, steps, clips, noise, loss, reg, strength):
    """One proximal coordinate-descent pass, updating ``theta`` in place.

    ``margin`` caches ``X @ theta`` and is kept consistent. ``clips`` holds the
    per-sample gradient clipping thresholds (``inf`` disables clipping) and
    ``noise`` the pre-drawn perturbation for each coordinate update.
    """
    n = X.shape[0]
    for i in range(X.shape[1]):
        col = X[:, i]
        if loss == LEAST_SQUARES:
            g = (margin - y) * col
        else:
            g = -y * col * expit(-y * margin)
        c = clips[i]
        if np.isfinite(c):
            g = np.clip(g, -c, c)
        grad = g.sum() / n
        old = theta[i]
        new = _prox(old - steps[i] * grad + noise[i], steps[i], reg, strength)
        if new != old:
            margin += (new - old) * col
            theta[i] = new
    return theta


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if HAS_NUMBA:

    @njit(cache=True)
    def gaussian_loss_nb(t, d, sigma):
        n, k = t.shape
        out = np.empty(n)
        shift = 0.0
        a = np.zeros(k)
        for i in range(k):
            if sigma[i] > 0.0:
                w = 1.0 / (sigma[i] * sigma[i])
                a[i] = d[i] * w
                shift += 0.5 * d[i] * d[i] * w
        for r in range(n):
            s = 0.0
            for i in range(k):
                s += t[r, i] * a[i]
            out[r] = s + shift
        return out

    @njit(cache=True)
    def laplace_loss_nb(t, d, beta):
        n, k = t.shape
        out = np.empty(n)
        for r in range(n):
            s = 0.0
            for i in range(k):
                if beta[i] > 0.0:
                    s += (abs(t[r, i] + d[i]) - abs(t[r, i])) / beta[i]
            out[r] = s
        return out

    @njit(cache=True)
    def pairwise_abs_diff_nb(x):
        xs = np.sort(x)
        k = xs.size
        s = 0.0
        for i in range(k):
            s += (2 * i - k + 1) * xs[i]
        return 2.0 * s

    @njit(cache=True)
    def cd_pass_nb(X, y, theta, margin, steps, clips, noise, loss, reg,
                   strength):
        n, k = X.shape
        for i in range(k):
            c = clips[i]
            clip_on = math.isfinite(c)
            acc = 0.0
            for r in range(n):
                if loss == LEAST_SQUARES:
                    g = (margin[r] - y[r]) * X[r, i]
                else:
                    g = -y[r] * X[r, i] / (1.0 + math.exp(y[r] * margin[r]))
                if clip_on:
                    if g > c:
                        g = c
                    elif g < -c:
                        g = -c
                acc += g
            grad = acc / n
            old = theta[i]
            v = old - steps[i] * grad + noise[i]
            if reg == REG_L1:
                thr = steps[i] * strength
                if v > thr:
                    new = v - thr
                elif v < -thr:
                    new = v + thr
                else:
                    new = 0.0
            else:
                new = v / (1.0 + steps[i] * strength)
            if new != old:
                delta = new - old
                for r in range(n):
                    margin[r] += delta * X[r, i]
                theta[i] = new
        return theta

    # The numpy Gaussian loss is a BLAS matvec and the pairwise sum is
    # dominated by the sort; both beat their compiled loops (see benchmarks/).
    gaussian_loss = gaussian_loss_np
    laplace_loss = laplace_loss_nb
    pairwise_abs_diff = pairwise_abs_diff_np
    cd_pass = cd_pass_nb
else:
    gaussian_loss = gaussian_loss_np
    laplace_loss = laplace_loss_np
    pairwise_abs_diff = pairwise_abs_diff_np
    cd_pass = cd_pass_np
