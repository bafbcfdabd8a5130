"""Command-line harness: one subcommand per reproduced claim.

Exit codes: 0 success, 1 a numeric check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .aitkin import beta_binomial_predictive
from .asymptotics import consistency_experiment, embedded_posterior_lr_prob, lrt_pvalue, lrt_statistic
from .config import Config, ConfigError, shipped_config
from .joint import lindley_sweep
from .kernels import BACKEND
from .models import DataSet, PriorSpec, derive_seed, sample_posterior
from .report import RNG_NOTE, compare, emit, record_text, shared_histograms

DEFAULT_DRAWS = 100_000
MIN_FIG2_DRAWS = 1_000
Z99 = 2.3263478740408408  # one-sided 99% normal quantile
REFERENCE_PREDICTIVE = 0.447


class CheckFailed(Exception):
    pass


def _meta(args, subcommand, **extra):
    meta = {"subcommand": subcommand, "seed": args.seed, "rng": RNG_NOTE}
    meta.update(extra)
    return meta


def _load(args, default_name):
    path = args.config or shipped_config(default_name)
    try:
        return Config.load(path)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def run_fig2(args) -> dict:
    draws = args.draws or DEFAULT_DRAWS
    if draws < MIN_FIG2_DRAWS:
        raise ConfigError(f"--draws must be at least {MIN_FIG2_DRAWS}")
    cfg = _load(args, "fig2")
    pair, data = cfg.pair(), cfg.dataset()
    seed = derive_seed(args.seed, "fig2")
    report, product, joint = compare(pair, data, draws, seed, timed=args.timing)
    report.seed = args.seed
    out = Path(args.out)
    emit(report, out / "fig2_report", args.format)
    hists = shared_histograms({"product": product.log_ratios, "joint": joint.log_ratios})
    for h in hists:
        emit(h, out / f"fig2_hist_{h.label}", meta=_meta(args, "fig2", draws=draws, quantity="log LR"))

    p_prod, p_joint = product.prob_gt1(), joint.prob_gt1()
    se = math.sqrt(p_prod * (1 - p_prod) / draws + p_joint * (1 - p_joint) / draws)
    diff = p_joint - p_prod
    passed = diff - Z99 * se > 0
    direction = {
        "claim": f"Pr_joint(LR {pair.model1.label}/{pair.model2.label} > 1) exceeds the product-posterior value",
        "pr_product": p_prod,
        "pr_joint": p_joint,
        "difference": diff,
        "difference_se": se,
        "lower_99": diff - Z99 * se,
        "verdict": "PASS" if passed else "FAIL",
        "seed": args.seed,
        "draws": draws,
    }
    emit(direction, out / "fig2_direction", "json")
    if not passed:
        raise CheckFailed(
            f"joint construction does not exceed the product construction: "
            f"{p_joint:.6f} vs {p_prod:.6f} (difference {diff:+.6f}, se {se:.6f})"
        )
    return direction


def run_predcheck(args) -> dict:
    prior = PriorSpec.beta(args.prior_a, args.prior_b)
    value = beta_binomial_predictive(args.successes, args.trials, args.future, args.threshold, prior)
    record = {
        "successes": args.successes,
        "trials": args.trials,
        "future_trials": args.future,
        "threshold": args.threshold,
        "prior": prior.to_dict(),
        "probability": f"{value:.6f}",
    }
    reference_setting = (args.successes, args.trials, args.future, args.threshold, args.prior_a, args.prior_b) == (
        1, 10, 20, 2, 1.0, 1.0)
    if reference_setting:
        passed = abs(value - REFERENCE_PREDICTIVE) <= 0.001
        record.update({"reference": REFERENCE_PREDICTIVE, "tolerance": 0.001, "verdict": "PASS" if passed else "FAIL"})
    emit(record, Path(args.out) / "predcheck", "json")
    if reference_setting and not passed:
        raise CheckFailed(f"predictive probability {value:.6f} is not 0.447 +- 0.001")
    return record


def _parse_grid(text: str) -> list[float]:
    try:
        values = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"malformed tau grid {text!r}")
    if not values or any(not (v > 0 and math.isfinite(v)) for v in values):
        raise ConfigError("tau grid must be a comma-separated list of positive numbers")
    if len(set(values)) != len(values):
        raise ConfigError("tau grid has duplicate values")
    return sorted(values)


def run_lindley(args) -> dict:
    taus = _parse_grid(args.tau)
    if args.n < 1:
        raise ConfigError("--n must be >= 1")
    data = DataSet((args.xbar,) * args.n)
    rows = lindley_sweep(args.null, data, taus, variance=args.variance)
    bfs = [bf for _, bf in rows]
    if len(bfs) < 2:
        verdict = "n/a"
    else:
        verdict = "increasing" if all(b > a for a, b in zip(bfs, bfs[1:])) else "not increasing"
    meta = _meta(args, "lindley", xbar=args.xbar, n=args.n, variance=args.variance,
                 null_value=args.null, monotone=verdict)
    emit((["tau", "bf_null_vs_full"], rows), Path(args.out) / "lindley", args.table_format, meta)
    return {"rows": rows, "monotone": verdict}


def run_embedded(args) -> dict:
    cfg = _load(args, "embedded")
    draws = args.draws or DEFAULT_DRAWS
    seed = derive_seed(args.seed, "embedded")
    rows, failed = [], []
    for k, (pair, data, meta) in enumerate(cfg.embedded_cases()):
        post = sample_posterior(pair.full_model, data, draws, derive_seed(seed, k))
        prob = embedded_posterior_lr_prob(pair, data, post)
        se = math.sqrt(max(prob * (1 - prob), 1.0 / draws) / draws)
        pval = lrt_pvalue(pair, data)
        ok = abs(prob - pval) < 3 * se
        if not ok:
            failed.append(meta)
        rows.append((meta.get("n"), meta.get("xbar"), lrt_statistic(pair, data), prob, se, pval,
                     "PASS" if ok else "FAIL"))
    columns = ["n", "xbar", "lrt_statistic", "posterior_pr_lr_gt1", "mc_se", "lrt_pvalue", "verdict"]
    emit((columns, rows), Path(args.out) / "embedded", args.table_format,
         _meta(args, "embedded", draws=draws, tolerance="3 MC standard errors"))
    if failed:
        raise CheckFailed(f"posterior probability and p-value disagree for {failed}")
    return {"rows": rows}


def run_consistency(args) -> dict:
    cfg = _load(args, "consistency")
    scenario = cfg.scenario(seed=derive_seed(args.seed, "consistency"), draws=args.draws)
    rows = consistency_experiment(scenario, workers=args.workers)
    table = [(r.n, r.mean_prob_true, r.std_prob_true, r.mean_prob_model1) for r in rows]
    meta = _meta(args, "consistency", draws=scenario.draws, replications=scenario.replications,
                 true_model=scenario.true_model)
    threshold = cfg.raw.get("pass_threshold")
    passed = True
    if threshold is not None:
        passed = rows[-1].mean_prob_true > threshold
        meta.update({"pass_threshold": threshold, "verdict": "PASS" if passed else "FAIL"})
    emit((["n", "mean_prob_true", "std_prob_true", "mean_prob_model1"], table),
         Path(args.out) / "consistency", args.table_format, meta)
    if not passed:
        raise CheckFailed(f"final mean {rows[-1].mean_prob_true:.4f} does not exceed {threshold}")
    return {"rows": table}


def run_report(args) -> dict:
    """Run every claim into one directory and summarize the verdicts."""
    summary = {}
    steps = [("fig2", run_fig2), ("predcheck", run_predcheck), ("lindley", run_lindley),
             ("embedded", run_embedded), ("consistency", run_consistency)]
    for name, fn in steps:
        sub = argparse.Namespace(**vars(args))
        sub.config = None
        try:
            fn(sub)
            summary[name] = "PASS"
        except CheckFailed as exc:
            summary[name] = f"FAIL: {exc}"
    text = record_text({"seed": args.seed, "results": summary})
    (Path(args.out) / "summary.json").write_text(text)
    failed = [k for k, v in summary.items() if v != "PASS"]
    if failed:
        raise CheckFailed(f"failed checks: {', '.join(failed)}")
    return summary


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser, draws=True):
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    if draws:
        p.add_argument("--draws", type=int, default=None, help=f"Monte Carlo draws (default {DEFAULT_DRAWS})")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default=None,
                   help="structured-record (json) or comma-separated (csv) output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modelchoice", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fig2", help="joint vs product likelihood-ratio distributions")
    _common(p)
    p.add_argument("--config", default=None)
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-identity)")
    p.set_defaults(func=run_fig2, default_format="json")

    p = sub.add_parser("predcheck", help="beta-binomial predictive probability")
    _common(p, draws=False)
    p.add_argument("--successes", type=int, default=1)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--future", type=int, default=20)
    p.add_argument("--threshold", type=int, default=2)
    p.add_argument("--prior-a", type=float, default=1.0)
    p.add_argument("--prior-b", type=float, default=1.0)
    p.set_defaults(func=run_predcheck, default_format="json")

    p = sub.add_parser("lindley", help="Bayes factor against prior scale")
    _common(p, draws=False)
    p.add_argument("--tau", default="1,10,100,1000", help="comma-separated prior standard deviations")
    p.add_argument("--xbar", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--variance", type=float, default=1.0)
    p.add_argument("--null", type=float, default=0.0)
    p.set_defaults(func=run_lindley, default_format="csv")

    p = sub.add_parser("embedded", help="posterior Pr(LR > 1) against the LRT p-value")
    _common(p)
    p.add_argument("--config", default=None)
    p.set_defaults(func=run_embedded, default_format="csv")

    p = sub.add_parser("consistency", help="large-sample behaviour of the joint decision probability")
    _common(p)
    p.add_argument("--config", default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=run_consistency, default_format="csv")

    p = sub.add_parser("report", help="run every check and summarize")
    _common(p)
    p.add_argument("--timing", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=run_report, default_format="json", config=None, successes=1, trials=10, future=20,
                   threshold=2, prior_a=1.0, prior_b=1.0, tau="1,10,100,1000", xbar=1.0, n=1,
                   variance=1.0, null=0.0)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    draws = getattr(args, "draws", None)
    if draws is not None and draws < 1:
        parser.error("--draws must be positive")
    args.table_format = args.format or "csv"
    args.format = args.format or "json"
    try:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        args.func(args)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"modelchoice: error: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"modelchoice: check failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"modelchoice: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
