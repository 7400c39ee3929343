import itertools
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from inid_dp import _kernels as k

needs_numba = pytest.mark.skipif(not k.HAS_NUMBA, reason="numba not installed")


def _loss_inputs(seed, n=200, K=5):
    g = np.random.default_rng(seed)
    t = g.standard_normal((n, K))
    d = g.uniform(-1, 1, K)
    s = g.uniform(0.2, 3, K)
    return t, d, s


def test_numpy_losses_match_direct_formulas():
    t, d, s = _loss_inputs(0)
    np.testing.assert_allclose(k.gaussian_loss_np(t, d, s),
                               np.sum((t * d + d * d / 2) / s ** 2, axis=1))
    np.testing.assert_allclose(k.laplace_loss_np(t, d, s),
                               np.sum((np.abs(t + d) - np.abs(t)) / s, axis=1))


@given(arrays(float, st.integers(1, 40), elements=st.floats(-1e3, 1e3)))
def test_pairwise_abs_diff_matches_double_sum(x):
    ref = sum(abs(a - b) for a, b in itertools.product(x, x))
    assert k.pairwise_abs_diff_np(x) == pytest.approx(ref, rel=1e-10, abs=1e-8)


@needs_numba
@pytest.mark.parametrize("seed", range(3))
def test_loss_backends_agree(seed):
    t, d, s = _loss_inputs(seed)
    np.testing.assert_allclose(k.gaussian_loss_nb(t, d, s), k.gaussian_loss_np(t, d, s),
                               rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(k.laplace_loss_nb(t, d, s), k.laplace_loss_np(t, d, s),
                               rtol=1e-12, atol=1e-12)


@needs_numba
@given(arrays(float, st.integers(1, 40), elements=st.floats(-1e3, 1e3)))
def test_pairwise_backends_agree(x):
    assert k.pairwise_abs_diff_nb(x) == pytest.approx(k.pairwise_abs_diff_np(x),
                                                      rel=1e-12, abs=1e-9)


@needs_numba
@pytest.mark.parametrize("loss", [k.LEAST_SQUARES, k.LOGISTIC])
@pytest.mark.parametrize("reg", [k.REG_L1, k.REG_L2])
@pytest.mark.parametrize("clip", [np.inf, 0.3])
def test_cd_pass_backends_agree(loss, reg, clip):
    g = np.random.default_rng(1)
    X = g.standard_normal((300, 6)) * g.uniform(0.1, 3, 6)
    y = np.sign(g.standard_normal(300)) if loss == k.LOGISTIC else g.standard_normal(300)
    steps = 1.0 / np.mean(X * X, axis=0)
    clips = np.full(6, clip)
    noise = 0.01 * g.standard_normal(6)
    out = []
    for fn in (k.cd_pass_np, k.cd_pass_nb):
        theta = np.zeros(6)
        margin = np.zeros(300)
        for _ in range(5):
            fn(X, y, theta, margin, steps, clips, noise, loss, reg, 0.05)
        np.testing.assert_allclose(margin, X @ theta, rtol=1e-10, atol=1e-10)
        out.append(theta)
    np.testing.assert_allclose(out[0], out[1], rtol=1e-9, atol=1e-12)


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, INID_DP_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c",
                          "from inid_dp import _kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
