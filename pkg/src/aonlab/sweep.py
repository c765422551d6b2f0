"""Sample-size sweeps across ``n / n*`` and their CSV / JSON / INI representations."""

from __future__ import annotations

import configparser
import csv
import enum
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from aonlab.combinatorics import DEFAULT_ENUMERATION_BUDGET
from aonlab.detection import Rule, detection_risk_mc
from aonlab.divergence import mc_divergences
from aonlab.errors import BudgetExceeded, PreconditionError
from aonlab.estimators import recovery_errors_mc
from aonlab.model import ModelParams, Seed

DEFAULT_RATIOS = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0)
DEFAULT_SWEEP_BUDGET = 10**10

CSV_COLUMNS = (
    "n",
    "n_over_nstar",
    "mmse_ratio",
    "mmse_se",
    "mle_fail_rate",
    "detect_risk_residual",
    "detect_risk_linear",
    "chi2_exact",
    "kl_mc",
    "tv_mc",
    "wall_time_s",
)


class Task(enum.Enum):
    # values double as seed-derivation tags, so never renumber them
    MMSE = 1
    MLE_RISK = 2
    DETECT_RESIDUAL = 3
    DETECT_LINEAR = 4
    DIVERGENCE = 5

    @classmethod
    def parse(cls, name: str) -> Task:
        try:
            return cls[name.strip().upper()]
        except KeyError:
            choices = ", ".join(t.name.lower() for t in cls)
            raise PreconditionError(f"unknown task {name!r}; choose from {choices}") from None


@dataclass(frozen=True)
class SweepConfig:
    """One reproducible sweep.

    Exactly one of ``n_grid`` (sample counts) and ``ratios`` (multiples of
    ``n*``, rounded up) is used; ``n_grid`` wins when both are set.
    ``lam = None`` selects the covariance-matched scale ``lambda0``.
    ``budget`` caps ``C(p,k) * trials * len(grid)``.
    """

    p: int = 24
    k: int = 3
    sigma2: float = 0.03
    n_grid: tuple[int, ...] | None = None
    ratios: tuple[float, ...] = DEFAULT_RATIOS
    trials: int = 200
    seed: int = 0
    tasks: frozenset[Task] = frozenset(Task)
    lam: float | None = None
    alpha: float = 0.1
    threads: int | None = 1
    budget: int = DEFAULT_SWEEP_BUDGET
    timing: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise PreconditionError(f"trials must be >= 1, got {self.trials}")
        grid = self.n_grid if self.n_grid is not None else self.ratios
        if len(grid) == 0:
            raise PreconditionError("the sample-size grid is empty")
        if any(v < 0 for v in grid):
            raise PreconditionError("grid entries must be >= 0")
        object.__setattr__(self, "tasks", frozenset(self.tasks))
        self.base  # validates p, k, sigma2, lam

    @property
    def base(self) -> ModelParams:
        return ModelParams(self.p, self.k, self.sigma2, 0, self.lam)

    def grid(self) -> list[int]:
        if self.n_grid is not None:
            return [int(n) for n in self.n_grid]
        nstar = self.base.nstar
        # the tiny offset stops r * n* landing a hair above an integer
        return [math.ceil(r * nstar - 1e-9) for r in self.ratios]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["tasks"] = sorted(t.name.lower() for t in self.tasks)
        out["n_grid"] = None if self.n_grid is None else list(self.n_grid)
        out["ratios"] = list(self.ratios)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> SweepConfig:
        d = dict(d)
        d["tasks"] = frozenset(Task.parse(t) for t in d.get("tasks", ()))
        if d.get("n_grid") is not None:
            d["n_grid"] = tuple(d["n_grid"])
        if "ratios" in d:
            d["ratios"] = tuple(d["ratios"])
        return cls(**d)


@dataclass(frozen=True)
class SweepRow:
    n: int
    n_over_nstar: float
    mmse_ratio: float | None = None
    mmse_se: float | None = None
    mle_fail_rate: float | None = None
    detect_risk_residual: float | None = None
    detect_risk_linear: float | None = None
    chi2_exact: float | None = None
    kl_mc: float | None = None
    tv_mc: float | None = None
    wall_time_s: float | None = None


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow] = field(default_factory=list)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def _check_sweep_budget(config: SweepConfig, grid: list[int]):
    supports = math.comb(config.p, config.k)
    if supports > DEFAULT_ENUMERATION_BUDGET:
        raise BudgetExceeded(
            f"C({config.p},{config.k}) = {supports} supports is beyond exhaustive enumeration; shrink p or k"
        )
    cost = supports * config.trials * len(grid)
    if cost > config.budget:
        raise BudgetExceeded(
            f"sweep cost C(p,k) * trials * grid = {supports} * {config.trials} * {len(grid)} = {cost} "
            f"exceeds the budget {config.budget}; shrink p or k (supports), trials, or the grid, "
            "or raise the budget"
        )


def _mle_failure_distance(p: int, k: int) -> float:
    if k == p:
        return math.inf
    return 2.0 * math.ceil(k / math.log(p / k))


def _row(config: SweepConfig, index: int, n: int) -> SweepRow:
    start = time.perf_counter()
    params = config.base.with_n(n)
    seed = Seed(config.seed)
    tasks = config.tasks
    values: dict = {"n": n, "n_over_nstar": n / params.nstar if params.k < params.p else math.inf}

    if tasks & {Task.MMSE, Task.MLE_RISK}:
        # both read the same planted draws, so either column is the same
        # whether or not the other task was requested
        errs = recovery_errors_mc(params, config.trials, seed.derive(Task.MMSE.value, index), config.threads)
        if Task.MMSE in tasks and params.mse0 > 0:
            bayes = errs[:, 0]
            se = bayes.std(ddof=1) / math.sqrt(len(bayes)) if len(bayes) > 1 else math.nan
            values["mmse_ratio"] = float(bayes.mean() / params.mse0)
            values["mmse_se"] = float(se / params.mse0)
        if Task.MLE_RISK in tasks:
            threshold = _mle_failure_distance(params.p, params.k)
            values["mle_fail_rate"] = float((errs[:, 1] >= threshold).mean())

    for task, rule, col in (
        (Task.DETECT_RESIDUAL, Rule.RESIDUAL_RATIO, "detect_risk_residual"),
        (Task.DETECT_LINEAR, Rule.LINEAR_CORR, "detect_risk_linear"),
    ):
        # the residual statistic is undefined without observations
        if task in tasks and not (rule is Rule.RESIDUAL_RATIO and n == 0):
            report = detection_risk_mc(
                params, rule, config.alpha, config.trials, seed.derive(task.value, index), config.lam, config.threads
            )
            values[col] = report.sum

    if Task.DIVERGENCE in tasks:
        report = mc_divergences(params, config.lam, config.trials, seed.derive(Task.DIVERGENCE.value, index), config.threads)
        values.update(chi2_exact=report.chi2_exact, kl_mc=report.kl_mc, tv_mc=report.tv_mc)

    if config.timing:
        values["wall_time_s"] = time.perf_counter() - start
    return SweepRow(**values)


def run_sweep(config: SweepConfig) -> SweepResult:
    """One row per grid point; every Monte Carlo stream is keyed by ``(seed, task, grid index)``."""
    grid = config.grid()
    _check_sweep_budget(config, grid)
    return SweepResult(config, [_row(config, i, n) for i, n in enumerate(grid)])


def _csv_field(v) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return format(v, ".10g")


def _write(result: SweepResult, fmt: str, fh) -> None:
    if fmt == "csv":
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in result.rows:
            writer.writerow([_csv_field(getattr(row, c)) for c in CSV_COLUMNS])
    else:
        doc = {"config": result.config.to_dict(), "rows": [asdict(r) for r in result.rows]}
        fh.write(json.dumps(doc, indent=2) + "\n")


def emit(result: SweepResult, fmt: str, path) -> None:
    """Write ``result`` as ``"csv"`` (fixed 11-column header) or ``"json"`` (config echo plus rows).

    ``path`` may also be an open text stream.
    """
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise PreconditionError(f"unknown format {fmt!r}; use csv or json")
    if hasattr(path, "write"):
        _write(result, fmt, path)
        return
    with Path(path).open("w", newline="") as fh:
        _write(result, fmt, fh)


def load_json(path) -> SweepResult:
    doc = json.loads(Path(path).read_text())
    config = SweepConfig.from_dict(doc["config"])
    return SweepResult(config, [SweepRow(**r) for r in doc["rows"]])


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def load_config(path) -> SweepConfig:
    """Read an INI file with ``[model]``, ``[sweep]`` and ``[run]`` sections; absent keys keep defaults."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    known = {"model", "sweep", "run"}
    extra = set(parser.sections()) - known
    if extra:
        raise PreconditionError(f"unknown config sections: {sorted(extra)}")
    kw: dict = {}
    model = parser["model"] if parser.has_section("model") else {}
    for key, conv in (("p", int), ("k", int), ("sigma2", float)):
        if key in model:
            kw[key] = conv(model[key])
    if "lambda" in model:
        value = model["lambda"].strip().lower()
        kw["lam"] = None if value in ("", "lambda0", "matched") else float(value)
    sweep = parser["sweep"] if parser.has_section("sweep") else {}
    if "n_grid" in sweep:
        kw["n_grid"] = tuple(int(v) for v in _floats(sweep["n_grid"]))
    if "ratios" in sweep:
        kw["ratios"] = _floats(sweep["ratios"])
    if "trials" in sweep:
        kw["trials"] = int(sweep["trials"])
    if "tasks" in sweep:
        kw["tasks"] = frozenset(Task.parse(t) for t in sweep["tasks"].replace(",", " ").split())
    if "alpha" in sweep:
        kw["alpha"] = float(sweep["alpha"])
    run = parser["run"] if parser.has_section("run") else {}
    if "seed" in run:
        kw["seed"] = int(run["seed"])
    if "threads" in run:
        kw["threads"] = int(run["threads"])
    if "budget" in run:
        kw["budget"] = int(float(run["budget"]))
    if "timing" in run:
        kw["timing"] = parser.getboolean("run", "timing")
    return SweepConfig(**kw)
