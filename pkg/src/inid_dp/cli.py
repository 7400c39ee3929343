"""``inid-dp`` command-line interface.

Subcommands:
  calibrate   print optimal or baseline noise scales as JSON
  audit       Monte Carlo privacy audit of calibrated scales
  experiment  write the CSV behind one of the named sweeps

Errors in flags or in the requested calibration exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from inid_dp.core import Mechanism, Mode, PrivacyBudget, to_db
from inid_dp.exceptions import AuditError, BracketError, ConvergenceError, DomainError
from inid_dp.experiments import (EXPERIMENTS, RANDOMIZED, SCHEMA_VERSION,
                                 write_records)
from inid_dp.gaussian import calibrate_gaussian
from inid_dp.laplace import calibrate_laplace, effective_epsilon, pure_dp_check
from inid_dp.mechanism import SeededRng, audit
from inid_dp.profile import FamilyKind, family_profile, load_profile

EXIT_USAGE = 2
_NORMALIZE = {"l1": "l1_unit", "l2": "l2_unit", "none": "none"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_profile_args(p):
    p.add_argument("--mechanism", required=True, choices=[m.value for m in Mechanism])
    p.add_argument("--mode", default="inid", choices=[m.value for m in Mode])
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, default=None,
                   help="default 0 for laplace; required > 0 for gaussian")
    p.add_argument("--p", type=float, default=2.0, help="error order (default 2)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--profile", help="JSON {'lambda': [...]} or one-column CSV")
    src.add_argument("--family", choices=[f.value for f in FamilyKind])
    p.add_argument("--K", type=int)
    p.add_argument("--normalize", choices=sorted(_NORMALIZE), default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="inid-dp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cal = sub.add_parser("calibrate", help="compute noise scales")
    _add_profile_args(cal)

    aud = sub.add_parser("audit", help="Monte Carlo privacy audit")
    _add_profile_args(aud)
    aud.add_argument("--n", type=int, default=1_000_000)
    aud.add_argument("--seed", type=int, required=True)

    exp = sub.add_parser("experiment", help="write a sweep as CSV")
    exp.add_argument("name", choices=sorted(EXPERIMENTS))
    exp.add_argument("--out", required=True, help="output CSV path ('-' for stdout)")
    exp.add_argument("--seed", type=int, default=None)
    exp.add_argument("--mechanism", choices=[m.value for m in Mechanism], default=None)
    exp.add_argument("--epsilon", type=float, default=None)
    exp.add_argument("--delta", type=float, default=None)
    exp.add_argument("--K", type=int, default=None, help="K (eps sweep) or K_max")
    exp.add_argument("--mc-samples", type=int, default=0,
                     help="Monte Carlo draws per grid point (needs --seed)")
    exp.add_argument("--task", choices=["least_squares", "logistic"], default=None)
    exp.add_argument("--trials", type=int, default=None)
    exp.add_argument("--n-samples", type=int, default=None)
    exp.add_argument("--n-features", type=int, default=None)
    exp.add_argument("--eval-seeds", type=int, default=None)
    return parser


def _profile_from_args(args):
    if args.profile is not None:
        if args.K is not None or args.normalize is not None:
            raise DomainError("--K/--normalize only apply with --family")
        return load_profile(args.profile)
    if args.K is None or args.normalize is None:
        raise DomainError("--family requires both --K and --normalize")
    return family_profile(args.family, args.K, _NORMALIZE[args.normalize])


def _calibrate_from_args(args):
    prof = _profile_from_args(args)
    mech = Mechanism(args.mechanism)
    if mech is Mechanism.GAUSSIAN:
        if args.delta is None:
            raise DomainError("gaussian calibration needs --delta > 0")
        budget = PrivacyBudget(args.epsilon, args.delta)
        return prof, budget, calibrate_gaussian(prof, budget, args.mode, args.p)
    budget = PrivacyBudget(args.epsilon, args.delta or 0.0)
    sc = calibrate_laplace(prof, effective_epsilon(budget), args.mode, args.p)
    return prof, budget, sc


def cmd_calibrate(args) -> dict:
    prof, budget, sc = _calibrate_from_args(args)
    out = {
        "schema_version": SCHEMA_VERSION,
        "mechanism": sc.mechanism.value,
        "mode": sc.mode.value,
        "p": sc.error_order_p,
        "epsilon": budget.epsilon,
        "delta": budget.delta,
        "K": prof.K,
        "scales": sc.scales.tolist(),
        "theoretical_error": sc.theoretical_error,
        "theoretical_error_db": round(to_db(sc.theoretical_error), 4),
    }
    if sc.mechanism is Mechanism.GAUSSIAN:
        out["mu0"] = sc.mu0
    else:
        out["realized_budget"] = pure_dp_check(prof, sc)
        if budget.delta > 0:
            out["epsilon_effective"] = effective_epsilon(budget)
    return out


def cmd_audit(args) -> dict:
    prof, budget, sc = _calibrate_from_args(args)
    rep = audit(sc, prof, budget.epsilon, args.n, SeededRng(args.seed),
                delta_target=budget.delta)
    return {
        "schema_version": SCHEMA_VERSION,
        "passed": rep.passed,
        "epsilon": rep.epsilon,
        "delta_target": rep.delta_target,
        "empirical_profile": rep.empirical_profile,
        "std_error": rep.std_error,
        "analytic_profile": rep.analytic_profile,
        "max_loss": rep.max_loss,
        "n_samples": rep.n_samples,
        "seed": args.seed,
    }


def _experiment_kwargs(args) -> dict:
    name = args.name
    kw = {}
    if name in RANDOMIZED or args.mc_samples:
        if args.seed is None:
            raise DomainError(f"experiment {name!r} is randomized: --seed is required")
        kw["seed"] = args.seed
    if args.mc_samples:
        if name not in ("fig_eps_sweep", "fig_k_sweep"):
            raise DomainError("--mc-samples applies to fig_eps_sweep and fig_k_sweep")
        kw["mc_samples"] = args.mc_samples
    opts = {
        "mechanism": ("fig_eps_sweep", "fig_k_sweep", "dppca"),
        "epsilon": ("fig_k_sweep", "fig_lap_vs_gau", "dpcd", "dppca"),
        "delta": ("fig_eps_sweep", "fig_k_sweep", "fig_lap_vs_gau", "dpcd", "dppca"),
        "task": ("dpcd",),
        "trials": ("dppca",),
        "n_samples": ("dpcd",),
        "n_features": ("dpcd", "dppca"),
        "eval_seeds": ("dpcd",),
    }
    for opt, allowed in opts.items():
        v = getattr(args, opt)
        if v is None:
            continue
        if name not in allowed:
            raise DomainError(f"--{opt.replace('_', '-')} does not apply to {name}")
        kw[opt] = v
    if args.K is not None:
        key = {"fig_eps_sweep": "K", "fig_k_sweep": "K_max", "fig_gini": "K_max",
               "fig_lap_vs_gau": "K_max"}.get(name)
        if key is None:
            raise DomainError(f"--K does not apply to {name}")
        kw[key] = args.K
    return kw


def cmd_experiment(args) -> int:
    records = EXPERIMENTS[args.name](**_experiment_kwargs(args))
    if args.out == "-":
        write_records(records, sys.stdout)
    else:
        with open(args.out, "w", newline="") as fh:
            write_records(records, fh)
    return len(records)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        if args.command == "calibrate":
            print(json.dumps(cmd_calibrate(args), indent=2))
        elif args.command == "audit":
            rep = cmd_audit(args)
            print(json.dumps(rep, indent=2))
            return 0 if rep["passed"] else 1
        else:
            n = cmd_experiment(args)
            if args.out != "-":
                print(f"wrote {n} records to {args.out}", file=sys.stderr)
    except (DomainError, BracketError, ConvergenceError, AuditError) as exc:
        print(f"inid-dp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"inid-dp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return 0


if __name__ == "__main__":
    sys.exit(main())
