"""Command-line entry point: ``aonlab {sweep,divergence,detect,estimate,bounds}``.

Exit codes: 0 on success, 2 when inputs violate a precondition or a
budget, 1 on anything else.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
from pathlib import Path

from aonlab import combinatorics, detection, divergence, estimators
from aonlab.errors import PreconditionError
from aonlab.model import ModelParams, Seed
from aonlab.sweep import SweepConfig, Task, emit, load_config, run_sweep


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return value


def _common(parser: argparse.ArgumentParser, budget_help: str):
    parser.add_argument("--config", type=Path, help="INI file with [model], [sweep] and [run] sections")
    parser.add_argument("--seed", type=_u64, help="64-bit seed (default 0)")
    parser.add_argument("--threads", type=int, help="worker threads, 0 = one per CPU (default: $AONLAB_THREADS or 1)")
    parser.add_argument("--out", type=Path, help="output file (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--budget", type=lambda s: int(float(s)), help=budget_help)
    parser.add_argument("--p", type=int)
    parser.add_argument("--k", type=int)
    parser.add_argument("--sigma2", type=float)
    parser.add_argument("--lambda", dest="lam", type=float, help="null scale (default: lambda0)")
    parser.add_argument("--trials", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aonlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    enum_budget = "cap on the number of supports C(p,k) to enumerate"

    sweep = sub.add_parser("sweep", help="sample-size sweep across n/n*")
    _common(sweep, "cap on C(p,k) * trials * grid size")
    grid = sweep.add_mutually_exclusive_group()
    grid.add_argument("--ratios", type=float, nargs="+", help="grid as multiples of n* (rounded up)")
    grid.add_argument("--n-grid", type=int, nargs="+", help="grid as explicit sample counts")
    sweep.add_argument("--tasks", nargs="+", help=", ".join(t.name.lower() for t in Task))
    sweep.add_argument("--alpha", type=float)
    sweep.add_argument("--no-timing", action="store_true", help="leave wall_time_s empty for byte-identical output")

    div = sub.add_parser("divergence", help="exact and Monte Carlo chi2 / KL / TV at one n")
    _common(div, enum_budget)
    div.add_argument("--n", type=int, required=True)

    det = sub.add_parser("detect", help="Type-I + Type-II risk of a detection rule")
    _common(det, enum_budget)
    det.add_argument("--n", type=int, required=True)
    det.add_argument("--rule", choices=[r.value for r in detection.Rule], default="residual_ratio")
    det.add_argument("--alpha", type=float)

    est = sub.add_parser("estimate", help="MMSE and MLE failure rate at one n")
    _common(est, enum_budget)
    est.add_argument("--n", type=int, required=True)

    bounds = sub.add_parser("bounds", help="evaluate the bound checks and print a PASS/FAIL table")
    _common(bounds, enum_budget)
    return parser


def _config(args) -> SweepConfig:
    """Defaults, then the INI file, then command-line flags."""
    cfg = load_config(args.config) if args.config else SweepConfig()
    overrides = {}
    for name in ("p", "k", "sigma2", "lam", "trials", "seed", "threads", "budget"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "alpha", None) is not None:
        overrides["alpha"] = args.alpha
    if getattr(args, "ratios", None):
        overrides.update(ratios=tuple(args.ratios), n_grid=None)
    if getattr(args, "n_grid", None):
        overrides["n_grid"] = tuple(args.n_grid)
    if getattr(args, "tasks", None):
        overrides["tasks"] = frozenset(Task.parse(t) for t in args.tasks)
    if getattr(args, "no_timing", False):
        overrides["timing"] = False
    return dataclasses.replace(cfg, **overrides)


def _write_record(record: dict, args, out):
    if args.format == "json":
        out.write(json.dumps(record, indent=2) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(record)
    writer.writerow(["" if v is None else (format(v, ".10g") if isinstance(v, float) else v) for v in record.values()])


def _point(cfg: SweepConfig, n: int) -> ModelParams:
    return ModelParams(cfg.p, cfg.k, cfg.sigma2, n, cfg.lam)


def cmd_sweep(args, out) -> None:
    emit(run_sweep(_config(args)), args.format, out)


def cmd_divergence(args, out) -> None:
    cfg = _config(args)
    params = _point(cfg, args.n)
    trials = args.trials or 10_000
    report = divergence.mc_divergences(params, cfg.lam, trials, Seed(cfg.seed), cfg.threads, args.budget)
    record = dataclasses.asdict(report)
    record["n"] = params.n
    record["pinsker_ok"] = all(divergence.pinsker_chain(report))
    _write_record(record, args, out)


def cmd_detect(args, out) -> None:
    cfg = _config(args)
    params = _point(cfg, args.n)
    rule = detection.Rule(args.rule)
    trials = args.trials or 1000
    report = detection.detection_risk_mc(
        params, rule, cfg.alpha, trials, Seed(cfg.seed), cfg.lam, cfg.threads, args.budget
    )
    record = {"n": params.n, "rule": rule.value, **dataclasses.asdict(report)}
    if rule is detection.Rule.RESIDUAL_RATIO:
        record["threshold"] = detection.residual_threshold(params, cfg.alpha)
        record.update(detection.detection_sample_condition(params, cfg.alpha)._asdict())
    _write_record(record, args, out)


def cmd_estimate(args, out) -> None:
    cfg = _config(args)
    params = _point(cfg, args.n)
    trials = args.trials or 1000
    if trials < 2:
        raise PreconditionError("need at least 2 trials for a standard error")
    errs = estimators.recovery_errors_mc(params, trials, Seed(cfg.seed), cfg.threads, args.budget)
    tail = estimators.mle_tail_bound(params)
    mmse = float(errs[:, 0].mean())
    se = float(errs[:, 0].std(ddof=1) / math.sqrt(trials))
    record = {
        "n": params.n,
        "n_over_nstar": params.n / params.nstar,
        "mmse": mmse,
        "mmse_se": se,
        "mmse_ratio": mmse / params.mse0,
        "mle_fail_rate": float((errs[:, 1] >= tail.threshold).mean()),
        **{f"mle_tail_{k}": v for k, v in tail._asdict().items()},
    }
    _write_record(record, args, out)


def bound_checks(cfg: SweepConfig, budget: int | None = None) -> list[tuple[str, bool, str]]:
    """``(name, passed, detail)`` for each bound evaluated at the configured profile.

    Monte Carlo dominance checks allow four standard errors.
    """
    rows = []
    p, k, s2 = cfg.p, cfg.k, cfg.sigma2
    seed = Seed(cfg.seed)
    trials = cfg.trials

    worst = min(
        combinatorics.hyp_pmf_upper_bound(p, k, s) - math.exp(combinatorics.hyp_log_pmf(p, k, s))
        for s in range(1, k + 1)
    )
    rows.append(("overlap pmf upper bound", worst >= 0, f"min slack {worst:.3g}"))

    base = ModelParams(p, k, s2, 0, cfg.lam)
    nstar = base.nstar
    for n in range(0, math.ceil(nstar * 3) + 1):
        params = base.with_n(n)
        lb = divergence.chi2_blowup_lower_bound(params)
        ex = divergence.chi2_exact(params, params.lambda0)
        if not ex >= lb:
            rows.append(("chi2 blow-up lower bound", False, f"n={n}: exact {ex:.6g} < bound {lb:.6g}"))
            break
    else:
        rows.append(("chi2 blow-up lower bound", True, f"n = 0..{math.ceil(nstar * 3)}"))

    alpha, c = 0.5, 0.5
    if k <= c * p:
        n_max = math.floor(0.5 * (1 - alpha) * nstar)
        checks = [divergence.check_large_overlap_moment(base.with_n(n), alpha, c) for n in range(n_max + 1)]
        rows.append(
            ("large-overlap truncated moment", all(b.holds for b in checks), f"alpha={alpha}, c={c}, n=0..{n_max}")
        )

    n_mid = max(1, math.ceil(nstar))
    params = base.with_n(n_mid)
    cond = divergence.ConditioningParams(gamma=1.0, tau=float(k), k=k)
    bound = divergence.conditioning_prob_bound(params, cond)
    rate, se = divergence.conditioning_failure_mc(params, cond, trials, seed.derive(1), cfg.threads, budget)
    rows.append(
        ("conditioning event probability", rate <= bound + 4 * se, f"MC {rate:.4f} +- {se:.4f} vs bound {bound:.4f}")
    )

    if k < p:
        pw = estimators.pairwise_error_bound(1, s2, n_mid)
        rate, se = estimators.pairwise_error_mc(params, 1, max(trials, 1000), seed.derive(2), cfg.threads)
        rows.append(("pairwise error", rate <= pw + 4 * se, f"MC {rate:.4f} +- {se:.4f} vs bound {pw:.4f}"))

    if n_mid >= 2 and trials >= 100:
        rep = divergence.mc_divergences(params, None, trials, seed.derive(3), cfg.threads, budget)
        est = estimators.mmse_mc(params.with_n(n_mid - 1), trials, seed.derive(4), cfg.threads, budget)
        lb = estimators.mse_lower_bound(rep.kl_mc + 3 * rep.kl_se, n_mid, n_mid - 1, k, s2)
        rows.append(
            (
                "area-theorem MSE lower bound",
                est.mmse >= lb - 3 * est.se,
                f"MMSE {est.mmse:.4f} +- {est.se:.4f} vs bound {lb:.4f}",
            )
        )
        pc = divergence.pinsker_chain(rep)
        rows.append(("Pinsker chain", all(pc), f"tv={rep.tv_mc:.4f} kl={rep.kl_mc:.4f} chi2={rep.chi2_mc:.4g}"))
    return rows


def cmd_bounds(args, out) -> None:
    cfg = _config(args)
    if args.trials is None:
        cfg = dataclasses.replace(cfg, trials=2000)
    rows = bound_checks(cfg, args.budget)
    if args.format == "json":
        out.write(json.dumps([{"check": n, "pass": ok, "detail": d} for n, ok, d in rows], indent=2) + "\n")
        return
    width = max(len(n) for n, _, _ in rows)
    for name, ok, detail in rows:
        out.write(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}\n")


COMMANDS = {
    "sweep": cmd_sweep,
    "divergence": cmd_divergence,
    "detect": cmd_detect,
    "estimate": cmd_estimate,
    "bounds": cmd_bounds,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.out:
            buf = io.StringIO()
            COMMANDS[args.command](args, buf)
            args.out.write_text(buf.getvalue())
        else:
            COMMANDS[args.command](args, sys.stdout)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - the exit-code contract covers everything else
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
