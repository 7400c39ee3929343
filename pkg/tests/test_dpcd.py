import math
from dataclasses import replace

import numpy as np
import pytest

from inid_dp.applications.dpcd import (Dataset, DpCdConfig, SmoothnessEstimation,
                                       dpcd_compare, dpcd_run, dpcd_setup,
                                       estimate_smoothness_private, load_dataset_csv,
                                       make_synthetic, objective, reference_optimum,
                                       smoothness_constants)
from inid_dp.core import PrivacyBudget
from inid_dp.exceptions import DomainError
from inid_dp.gaussian import solve_mu0
from inid_dp.mechanism import SeededRng


@pytest.fixture(scope="module")
def lasso_data():
    return make_synthetic(1000, 8, SeededRng(3), "least_squares")


@pytest.fixture(scope="module")
def logistic_data():
    return make_synthetic(1000, 6, SeededRng(4), "logistic")


def test_synthetic_data_respects_bounds(lasso_data):
    assert np.all(np.abs(lasso_data.X) <= lasso_data.bounds)
    assert lasso_data.fingerprint() == make_synthetic(1000, 8, SeededRng(3)).fingerprint()


def test_nonprivate_convergence_is_monotone():
    g = np.random.default_rng(0)
    X = g.standard_normal((500, 5))
    data = Dataset(X, X @ g.standard_normal(5) + 0.1 * g.standard_normal(500))
    res = dpcd_run(DpCdConfig(passes_L=60, reg_strength=0.01), data, SeededRng(0))
    errs = res.relative_errors
    assert np.all(np.diff(errs) <= 1e-15)
    assert errs[-1] < 1e-6


@pytest.mark.parametrize("reg", ["l1", "l2"])
def test_reference_optimum_is_stationary(logistic_data, reg):
    theta, j = reference_optimum(logistic_data, "logistic", reg, 0.01)
    g = np.random.default_rng(1)
    for _ in range(20):
        assert objective(theta + 1e-4 * g.standard_normal(theta.size),
                         logistic_data, "logistic", reg, 0.01) >= j - 1e-12


def test_per_pass_accounting(lasso_data):
    b = PrivacyBudget(1.0, 1e-6)
    for mode in ("iid", "spr", "inid"):
        cfg = DpCdConfig(budget=b, mode=mode, passes_L=7)
        res = dpcd_run(cfg, lasso_data, SeededRng(1))
        target = solve_mu0(b).mu0 ** 2 / 2 / 7
        assert res.per_pass_resource == pytest.approx(target, rel=1e-9)


def test_laplace_accounting(lasso_data):
    cfg = DpCdConfig(budget=PrivacyBudget(2.0), mechanism="laplace", passes_L=4)
    res = dpcd_run(cfg, lasso_data, SeededRng(1))
    assert res.per_pass_resource == pytest.approx(0.5, rel=1e-12)


def test_step_and_clip_invariants(lasso_data):
    cfg = DpCdConfig(budget=PrivacyBudget(1.0, 1e-6), step_scale_tau=0.5, clip_scale_C=2.0)
    M, steps, clips, lam, _, _ = dpcd_setup(cfg, lasso_data, SeededRng(0))
    np.testing.assert_allclose(steps, 0.5 / M)
    assert np.sum(clips ** 2) == pytest.approx(4.0)
    np.testing.assert_allclose(lam, 2 * steps * clips / lasso_data.n_samples)


def test_tiny_clip_gives_pure_noise_updates(lasso_data):
    cfg = DpCdConfig(budget=PrivacyBudget(1.0, 1e-6), clip_scale_C=1e-12,
                     reg_strength=0.0, regularizer="l2", passes_L=5)
    res = dpcd_run(cfg, lasso_data, SeededRng(2))
    # gradient steps are ~1e-12, so theta is the sum of L noise draws
    envelope = 6 * res.scales * math.sqrt(5)
    assert np.all(np.abs(res.theta) <= envelope + 1e-9)
    g = SeededRng(2).generator()
    expected = sum(g.standard_normal(8) * res.scales for _ in range(5))
    np.testing.assert_allclose(res.theta, expected, rtol=1e-6, atol=1e-9)


def test_config_errors(lasso_data):
    with pytest.raises(DomainError):
        DpCdConfig(loss="hinge")
    with pytest.raises(DomainError):
        DpCdConfig(passes_L=0)
    with pytest.raises(DomainError):
        DpCdConfig(budget=PrivacyBudget(1, 1e-6), estimation=SmoothnessEstimation(1.0))
    with pytest.raises(DomainError):
        DpCdConfig(estimation=SmoothnessEstimation(0.1))
    with pytest.raises(DomainError):
        dpcd_run(DpCdConfig(smoothness=np.ones(3)), lasso_data, SeededRng(0))


def test_non_finite_iterate_aborts(lasso_data):
    cfg = DpCdConfig(smoothness=np.full(8, 1e-300), budget=PrivacyBudget(1, 1e-6))
    with pytest.raises(FloatingPointError, match="non-finite iterate or objective"):
        dpcd_run(cfg, lasso_data, SeededRng(0))


def test_smoothness_estimation_exact_limits():
    g = np.random.default_rng(0)
    X = g.uniform(-2, 2, (100, 3))
    b = np.array([1.0, 2.0, 3.0])
    est = estimate_smoothness_private(X, b, math.inf, SeededRng(0))
    np.testing.assert_allclose(est, np.mean(np.minimum(X * X, b * b), axis=0))
    est = estimate_smoothness_private(np.tile(b, (10, 1)), b, math.inf, SeededRng(0))
    np.testing.assert_array_equal(est, b * b)


def test_smoothness_estimation_noise_scale():
    X = np.full((50, 2), 0.5)
    b = np.array([1.0, 1.0])
    draws = np.array([estimate_smoothness_private(X, b, 0.5, SeededRng(s))
                      for s in range(4000)])
    scale = 1.0 * 2 / (50 * 0.5)
    np.testing.assert_allclose(draws.var(axis=0), 2 * scale ** 2, rtol=0.1)


def test_smoothness_floor():
    X = np.zeros((10, 2))
    est = estimate_smoothness_private(X, [1.0, 1.0], 1e-3, SeededRng(0))
    assert np.all(est > 0)
    assert est.min() >= 1e-6 * est.max()


def test_private_smoothness_run(lasso_data):
    cfg = DpCdConfig(budget=PrivacyBudget(1.0, 1e-6),
                     estimation=SmoothnessEstimation(0.1))
    res = dpcd_run(cfg, lasso_data, SeededRng(5))
    assert np.all(np.isfinite(res.relative_errors))
    assert not np.allclose(res.smoothness, smoothness_constants(lasso_data.X, "least_squares"))


def test_inid_beats_iid_on_disparate_columns(lasso_data):
    cfg = DpCdConfig(budget=PrivacyBudget(1.0, 1e-6))
    out = dpcd_compare(cfg, lasso_data, ["iid", "inid"], range(2), range(100, 107),
                       taus=(0.3, 1.0), clips=(0.3, 1.0, 3.0), passes=(10,))
    assert np.median(out["inid"][1]) < np.median(out["iid"][1])


def test_csv_loader(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("a,b,label\n1,2,0.5\n3,4,1.5\n")
    data = load_dataset_csv(path, bounds=[3, 4])
    np.testing.assert_array_equal(data.X, [[1, 2], [3, 4]])
    np.testing.assert_array_equal(data.y, [0.5, 1.5])
    (tmp_path / "e.csv").write_text("a,label\n")
    with pytest.raises(DomainError):
        load_dataset_csv(tmp_path / "e.csv")
