"""Planted-versus-null tests: minimum residual ratio and linear correlation."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from aonlab import _batch
from aonlab.combinatorics import log_binom, support_table
from aonlab.errors import PreconditionError, ZeroObservation
from aonlab.model import Instance, ModelParams, Seed, draw_null, draw_planted


class Rule(enum.Enum):
    RESIDUAL_RATIO = "residual_ratio"
    LINEAR_CORR = "linear_corr"


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False

    statistic: float
    threshold: float
    decide_planted: bool
    rule: Rule


@dataclass(frozen=True)
class RiskReport:
    type1: float
    type2: float
    sum: float
    se: float
    trials_per_model: int


class SampleConditions(NamedTuple):
    cond1: bool
    cond2: bool
    alpha_valid: bool


def _residual_ratio_batch(X, Y, supports):
    ysq = np.einsum("...n,...n->...", Y, Y)
    if np.any(ysq == 0):
        raise ZeroObservation("||Y|| = 0; the residual ratio needs n >= 1")
    return _batch.residuals(X, Y, supports).min(axis=-1) / ysq


def residual_ratio_stat(inst: Instance, params: ModelParams, budget: int | None = None) -> float:
    """``min over k-sparse beta' of ||Y - X beta'||^2 / ||Y||^2``."""
    if inst.p != params.p:
        raise PreconditionError("instance and params disagree on p")
    supports = support_table(params.p, params.k, budget)
    return float(_residual_ratio_batch(inst.X, inst.Y, supports))


def residual_threshold(params: ModelParams, alpha: float) -> float:
    """``1 / ((1 - alpha/2)(1 + k/sigma2))``; the statistic falls below it under the planted model."""
    if not 0 < alpha < 1:
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha}")
    return 1.0 / ((1 - alpha / 2) * (1 + params.snr))


def detection_sample_condition(params: ModelParams, alpha: float, slack: float = 1.0) -> SampleConditions:
    """Sample-size conditions behind the residual test.

    ``cond1``: ``log n - (2/n) log C(p,k) >= slack``.
    ``cond2``: ``n >= 2 log C(p,k) / (log(1 + k/sigma2) + log(1 - alpha))``,
    False with ``alpha_valid = False`` when that denominator is not positive.
    """
    if not 0 < alpha < 1:
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha}")
    n = params.n
    logm = float(log_binom(params.p, params.k))
    cond1 = n >= 1 and math.log(n) - 2.0 * logm / n >= slack
    denom = math.log1p(params.snr) + math.log1p(-alpha)
    if denom <= 0:
        return SampleConditions(cond1, False, False)
    return SampleConditions(cond1, n >= 2.0 * logm / denom, True)


def linear_stat(inst: Instance, params: ModelParams) -> float:
    """``<Y, X beta_bar>`` with ``beta_bar = (k/p) * ones``."""
    return float(params.k / params.p * inst.Y @ inst.X.sum(axis=1))


def decide(rule: Rule, statistic: float, threshold: float = 0.0) -> TestOutcome:
    """Residual rule says planted iff statistic < threshold; the linear rule iff statistic >= 0."""
    if rule is Rule.RESIDUAL_RATIO:
        return TestOutcome(statistic, threshold, statistic < threshold, rule)
    return TestOutcome(statistic, 0.0, statistic >= 0, rule)


def detection_risk_mc(
    params: ModelParams,
    rule: Rule,
    alpha: float,
    trials: int,
    seed: Seed,
    lam: float | None = None,
    threads: int | None = 1,
    budget: int | None = None,
) -> RiskReport:
    """Type-I (planted called null) plus Type-II (null called planted) error rates.

    The null scale defaults to ``params.null_scale``.
    """
    if trials < 100:
        raise PreconditionError(f"need at least 100 trials per model, got {trials}")
    lam = params.null_scale if lam is None else float(lam)
    if rule is Rule.RESIDUAL_RATIO:
        supports = support_table(params.p, params.k, budget)
        threshold = residual_threshold(params, alpha)
        if params.n == 0:
            raise ZeroObservation("the residual test is undefined at n = 0")

        def says_planted(X, Y):
            return _residual_ratio_batch(X, Y, supports) < threshold

    else:
        w = params.k / params.p

        def says_planted(X, Y):
            return w * np.einsum("tn,tn->t", Y, X.sum(axis=2)) >= 0

    def planted_work(rng, size):
        X, Y, _ = draw_planted(rng, params, size)
        return ~says_planted(X, Y)

    def null_work(rng, size):
        X, Y = draw_null(rng, params, size, lam)
        return says_planted(X, Y)

    type1 = float(_batch.run_blocks(planted_work, trials, seed.derive(0), threads).mean())
    type2 = float(_batch.run_blocks(null_work, trials, seed.derive(1), threads).mean())
    se = math.sqrt((type1 * (1 - type1) + type2 * (1 - type2)) / trials)
    return RiskReport(type1, type2, type1 + type2, se, trials)


def linear_null_below_zero_mc(
    params: ModelParams, trials: int, seed: Seed, lam: float | None = None, threads: int | None = 1
) -> tuple[float, float]:
    """Frequency of ``<Y, X beta_bar> <= 0`` under the null, with its standard error."""
    w = params.k / params.p

    def work(rng, size):
        X, Y = draw_null(rng, params, size, lam)
        return w * np.einsum("tn,tn->t", Y, X.sum(axis=2)) <= 0

    hits = _batch.run_blocks(work, trials, seed, threads)
    rate = float(hits.mean())
    return rate, math.sqrt(rate * (1 - rate) / trials)
