"""Sweep generators that emit :class:`ExperimentRecord` rows.

Closed-form sweeps need no randomness. ``dpcd`` and ``dppca`` and any sweep
that requests Monte Carlo error estimates take an explicit seed. Rows are
sorted before writing, so the same arguments always give byte-identical CSV.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from inid_dp.applications.dpcd import DpCdConfig, dpcd_compare, make_synthetic
from inid_dp.applications.dppca import DpPcaConfig, dppca_run
from inid_dp.core import Mechanism, Mode, PrivacyBudget, to_db
from inid_dp.exceptions import DomainError
from inid_dp.gaussian import calibrate_gaussian
from inid_dp.laplace import calibrate_laplace
from inid_dp.mechanism import SeededRng, empirical_lp_error
from inid_dp.profile import FamilyKind, family_profile, gini

SCHEMA_VERSION = 1
DB_DECIMALS = 4
DEFAULT_DELTA = 1e-6
DEFAULT_FAMILIES = ("uniform", "linear", "quadratic", "exponential", "one_hot")
DEFAULT_EPS_GRID = tuple(round(0.1 * i, 1) for i in range(1, 31))
DEFAULT_K_MAX = 50

# l1-errors of the two-dimensional staircase mechanism for lam = [0.85, 0.15]
STAIRCASE_EPS = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
STAIRCASE_L1_ERROR = (3.9962, 1.9862, 1.3050, 0.9546, 0.7366, 0.5856)
STAIRCASE_SOURCE = "embedded:published_table"
STAIRCASE_PROFILE = (0.85, 0.15)


@dataclass(frozen=True)
class ExperimentRecord:
    """One CSV row. Optional fields are written as empty cells."""

    experiment: str
    mechanism: str = ""
    mode: str = ""
    profile_family: str = ""
    K: int | None = None
    epsilon: float | None = None
    delta: float | None = None
    p: float | None = None
    theoretical_error: float | None = None
    theoretical_error_db: float | None = None
    empirical_error: float | None = None
    seed: int | None = None
    metric: str = ""
    value: float | None = None
    index: int | None = None
    source: str = "computed"
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        if self.theoretical_error is not None and self.theoretical_error_db is None:
            object.__setattr__(self, "theoretical_error_db",
                               to_db(self.theoretical_error))
        self.validate()

    def validate(self) -> None:
        """Check the dB field against the linear error.

        Raises:
          DomainError: if they disagree beyond the printed precision.
        """
        if self.theoretical_error is None:
            return
        db = to_db(self.theoretical_error)
        if abs(db - self.theoretical_error_db) > 0.5 * 10 ** -DB_DECIMALS + 1e-12:
            raise DomainError(f"inconsistent dB field {self.theoretical_error_db} "
                              f"for error {self.theoretical_error}")

    def sort_key(self):
        def n(v):
            return (v is None, -math.inf if v is None else v)
        return (self.experiment, self.metric, self.mechanism, self.mode,
                self.profile_family, n(self.K), n(self.epsilon), n(self.delta),
                n(self.p), n(self.seed), n(self.index))


FIELDNAMES = ["schema_version"] + [f.name for f in fields(ExperimentRecord)
                                   if f.name != "schema_version"]


def _fmt(name: str, v) -> str:
    if v is None:
        return ""
    if name == "theoretical_error_db":
        return f"{v:.{DB_DECIMALS}f}"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_records(records, fh) -> None:
    """Sorted CSV with a header row."""
    w = csv.DictWriter(fh, fieldnames=FIELDNAMES, lineterminator="\n")
    w.writeheader()
    for rec in sorted(records, key=ExperimentRecord.sort_key):
        d = asdict(rec)
        w.writerow({k: _fmt(k, d[k]) for k in FIELDNAMES})


def records_to_csv(records) -> str:
    buf = io.StringIO()
    write_records(records, buf)
    return buf.getvalue()


def read_records(fh) -> list[dict]:
    return list(csv.DictReader(fh))


def _normalization(mechanism: Mechanism) -> str:
    return "l2_unit" if mechanism is Mechanism.GAUSSIAN else "l1_unit"


def _calibrate(profile, mechanism: Mechanism, mode, epsilon, delta, p=2.0):
    if mechanism is Mechanism.GAUSSIAN:
        return calibrate_gaussian(profile, PrivacyBudget(epsilon, delta), mode, p)
    return calibrate_laplace(profile, epsilon, mode, p)


def _mse_rows(name, mechanism, families, Ks, eps_grid, delta, modes,
              normalization=None, mc_samples=0, seed=None):
    mechanism = Mechanism(mechanism)
    normalization = normalization or _normalization(mechanism)
    delta = delta if mechanism is Mechanism.GAUSSIAN else 0.0
    rows = []
    for fam in families:
        for K in Ks:
            prof = family_profile(fam, K, normalization)
            for eps in eps_grid:
                errs = {}
                for mode in modes:
                    sc = _calibrate(prof, mechanism, mode, eps, delta)
                    errs[mode] = sc.theoretical_error
                    emp = None
                    if mc_samples:
                        emp, _ = empirical_lp_error(
                            sc, 2.0, mc_samples,
                            SeededRng(seed, _stream(fam, K, eps, mode)))
                    rows.append(ExperimentRecord(
                        name, mechanism.value, Mode(mode).value, fam, K, eps,
                        delta, 2.0, sc.theoretical_error, empirical_error=emp,
                        seed=seed if mc_samples else None, metric="mse"))
                if "iid" in errs and "inid" in errs:
                    rows.append(ExperimentRecord(
                        name, mechanism.value, "inid", fam, K, eps, delta, 2.0,
                        metric="reduction_db_vs_iid",
                        value=round(to_db(errs["iid"]) - to_db(errs["inid"]),
                                    DB_DECIMALS)))
    return rows


def _stream(fam: str, K: int, eps: float, mode: str) -> int:
    # stable, order-free stream id per grid point
    fam_id = list(FamilyKind).index(FamilyKind(fam))
    mode_id = list(Mode).index(Mode(mode))
    return ((fam_id * 1000 + K) * 100_000 + int(round(eps * 1000))) * 4 + mode_id


def fig_eps_sweep(mechanism="gaussian", K=20, eps_grid=DEFAULT_EPS_GRID,
                  delta=DEFAULT_DELTA, families=DEFAULT_FAMILIES,
                  mc_samples=0, seed=None):
    """MSE of iid and inid noise against epsilon at fixed ``K``."""
    return _mse_rows("fig_eps_sweep", mechanism, families, [K], eps_grid, delta,
                     ("iid", "inid"), mc_samples=mc_samples, seed=seed)


def fig_k_sweep(mechanism="gaussian", K_max=DEFAULT_K_MAX, epsilon=0.5,
                delta=DEFAULT_DELTA, families=DEFAULT_FAMILIES,
                mc_samples=0, seed=None):
    """MSE of iid and inid noise against ``K = 2..K_max`` at fixed budget."""
    return _mse_rows("fig_k_sweep", mechanism, families, range(2, K_max + 1),
                     [epsilon], delta, ("iid", "inid"), mc_samples=mc_samples,
                     seed=seed)


def fig_gini(K_max=DEFAULT_K_MAX, families=DEFAULT_FAMILIES):
    """Gini coefficient of each family for ``K = 2..K_max``."""
    return [ExperimentRecord("fig_gini", profile_family=fam, K=K, metric="gini",
                             value=gini(family_profile(fam, K, "l2_unit")))
            for fam in families for K in range(2, K_max + 1)]


def fig_lap_vs_gau(K_max=DEFAULT_K_MAX, epsilon=0.5, delta=DEFAULT_DELTA,
                   families=("uniform", "exponential")):
    """Laplace (pure DP) against Gaussian MSE on profiles with unit l2 norm."""
    rows = []
    for mech in (Mechanism.GAUSSIAN, Mechanism.LAPLACE):
        rows += _mse_rows("fig_lap_vs_gau", mech, families, range(2, K_max + 1),
                          [epsilon], delta, ("iid", "inid"),
                          normalization="l2_unit")
    return rows


def table_staircase():
    """l1-errors of iid and inid Laplace next to the published staircase values."""
    rows = []
    for eps, stair in zip(STAIRCASE_EPS, STAIRCASE_L1_ERROR):
        for mode in ("iid", "inid"):
            sc = calibrate_laplace(list(STAIRCASE_PROFILE), eps, mode, p=1.0)
            rows.append(ExperimentRecord(
                "table_staircase", "laplace", mode, "custom", 2, eps, 0.0, 1.0,
                sc.theoretical_error, metric="l1_error"))
        rows.append(ExperimentRecord(
            "table_staircase", "staircase", "staircase", "custom", 2, eps, 0.0,
            1.0, stair, metric="l1_error", source=STAIRCASE_SOURCE))
    return rows


def dpcd_experiment(seed: int, task="least_squares", n_samples=2000,
                    n_features=10, epsilon=1.0, delta=None, eval_seeds=30,
                    tune_seeds=3, modes=("spr", "inid", "iid"),
                    scale_range=(0.05, 5.0)):
    """Tuned DP-CD on a synthetic task; one row per mode and evaluation seed."""
    data = make_synthetic(n_samples, n_features, SeededRng(seed, 0), task,
                          scale_range)
    regularizer = "l1" if task == "least_squares" else "l2"
    strength = 0.01 if task == "least_squares" else 0.001
    delta = 1.0 / n_samples ** 2 if delta is None else delta
    cfg = DpCdConfig(loss=task, regularizer=regularizer, reg_strength=strength,
                     budget=PrivacyBudget(epsilon, delta))
    seeds = [seed * 10_000 + i for i in range(eval_seeds)]
    res = dpcd_compare(cfg, data, modes, range(seed * 10_000 + eval_seeds,
                                                seed * 10_000 + eval_seeds + tune_seeds),
                       seeds)
    fam = f"synthetic_{task}"
    rows = []
    for mode, (best, errs) in res.items():
        for s, e in zip(seeds, errs):
            rows.append(ExperimentRecord("dpcd", "gaussian", mode, fam, n_features,
                                         epsilon, delta, 2.0, seed=s,
                                         metric="final_relative_error",
                                         value=float(e)))
        for metric, v in (("tuned_tau", best.step_scale_tau),
                          ("tuned_C", best.clip_scale_C),
                          ("tuned_passes", float(best.passes_L))):
            rows.append(ExperimentRecord("dpcd", "gaussian", mode, fam, n_features,
                                         epsilon, delta, 2.0, seed=seed,
                                         metric=metric, value=float(v)))
    return rows


def dppca_experiment(seed: int, mechanism="gaussian", n_users=100,
                     n_features=10, rank=2, epsilon=2.0, delta=DEFAULT_DELTA,
                     trials=500):
    """Mean SRE of iid and inid DP-PCA on paired trials."""
    mechanism = Mechanism(mechanism)
    budget = PrivacyBudget(epsilon, delta if mechanism is Mechanism.GAUSSIAN else 0.0)
    rows = []
    sre = {}
    K = n_features * (n_features + 1) // 2
    for mode in ("iid", "inid"):
        cfg = DpPcaConfig(n_users, n_features, rank, budget, mechanism, mode, trials)
        res = dppca_run(cfg, SeededRng(seed))
        sre[mode] = res.sre
        for metric, v in (("mean_sre", res.mean_sre), ("sre_std_error", res.std_error)):
            rows.append(ExperimentRecord("dppca", mechanism.value, mode, "pca_upper",
                                         K, epsilon, budget.delta, 2.0, seed=seed,
                                         metric=metric, value=v))
    rows.append(ExperimentRecord(
        "dppca", mechanism.value, "inid", "pca_upper", K, epsilon, budget.delta,
        2.0, seed=seed, metric="paired_win_fraction_vs_iid",
        value=float(np.mean(sre["inid"] < sre["iid"]))))
    return rows


EXPERIMENTS = {
    "fig_eps_sweep": fig_eps_sweep,
    "fig_k_sweep": fig_k_sweep,
    "fig_gini": fig_gini,
    "fig_lap_vs_gau": fig_lap_vs_gau,
    "table_staircase": table_staircase,
    "dpcd": dpcd_experiment,
    "dppca": dppca_experiment,
}
RANDOMIZED = frozenset({"dpcd", "dppca"})
