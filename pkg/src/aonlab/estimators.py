"""Exhaustive maximum likelihood, exact Bayes posterior and recovery bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from aonlab import _batch
from aonlab.combinatorics import support_incidence, support_table
from aonlab.errors import PreconditionError
from aonlab.model import Instance, ModelParams, Seed, SupportVector, draw_planted


@dataclass(frozen=True, eq=False)
class PosteriorTable:
    """Normalised log posterior weights, row ``r`` = support of colex rank ``r``."""

    log_weights: np.ndarray
    params: ModelParams

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)


@dataclass(frozen=True)
class RecoveryResult:
    mle_support: SupportVector
    bayes_mean: np.ndarray
    mle_sq_err: float
    bayes_sq_err: float


class MMSEEstimate(NamedTuple):
    mmse: float
    se: float
    ratio: float
    ratio_se: float


class MLETailBound(NamedTuple):
    threshold: float
    bound: float
    sample_condition: bool
    vacuous: bool


def _check_instance(inst: Instance, params: ModelParams):
    if inst.p != params.p:
        raise PreconditionError(f"instance has p={inst.p}, params say p={params.p}")


def mle(inst: Instance, params: ModelParams, budget: int | None = None) -> SupportVector:
    """Least-squares support; ties go to the smallest colex rank."""
    _check_instance(inst, params)
    supports = support_table(params.p, params.k, budget)
    r = _batch.residuals(inst.X, inst.Y, supports)
    return SupportVector(tuple(supports[int(np.argmin(r))]), params.p)


def posterior(inst: Instance, params: ModelParams, budget: int | None = None) -> PosteriorTable:
    """Exact posterior over supports under the uniform prior, at the true noise level."""
    _check_instance(inst, params)
    supports = support_table(params.p, params.k, budget)
    logw = -_batch.residuals(inst.X, inst.Y, supports) / (2.0 * params.sigma2)
    return PosteriorTable(logw - logsumexp(logw), params)


def bayes_mean(table: PosteriorTable) -> np.ndarray:
    """Posterior mean ``E[beta | X, Y]``."""
    return table.weights @ support_incidence(table.params.p, table.params.k)


def recover(inst: Instance, params: ModelParams, budget: int | None = None) -> RecoveryResult:
    """MLE and Bayes mean of one planted instance, with their squared errors."""
    if inst.truth is None:
        raise PreconditionError("recovery errors need a planted instance")
    beta_hat = mle(inst, params, budget)
    mean = bayes_mean(posterior(inst, params, budget))
    truth = inst.truth.dense()
    mle_err = len(set(beta_hat.indices) ^ set(inst.truth.indices))
    return RecoveryResult(beta_hat, mean, float(mle_err), float(np.sum((truth - mean) ** 2)))


def recovery_errors_mc(
    params: ModelParams,
    trials: int,
    seed: Seed,
    threads: int | None = 1,
    budget: int | None = None,
) -> np.ndarray:
    """Per-trial ``(bayes_sq_err, mle_sq_err)`` over planted draws, shape ``(trials, 2)``."""
    p, k, s2 = params.p, params.k, params.sigma2
    supports = support_table(p, k, budget)
    incidence = support_incidence(p, k)

    def work(rng, size):
        X, Y, truth = draw_planted(rng, params, size)
        r = _batch.residuals(X, Y, supports)
        logw = -r / (2.0 * s2)
        w = np.exp(logw - logsumexp(logw, axis=1, keepdims=True))
        mean = w @ incidence
        dense = np.zeros((size, p))
        np.put_along_axis(dense, truth, 1.0, axis=1)
        bayes = np.sum((dense - mean) ** 2, axis=1)
        hat = supports[np.argmin(r, axis=1)]
        shared = (hat[:, :, None] == truth[:, None, :]).sum(axis=(1, 2))
        return np.column_stack([bayes, 2.0 * (k - shared)])

    return _batch.run_blocks(work, trials, seed, threads)


def mmse_mc(
    params: ModelParams,
    trials: int,
    seed: Seed,
    threads: int | None = 1,
    budget: int | None = None,
) -> MMSEEstimate:
    """``E||beta - E[beta | X, Y]||^2`` over planted draws, absolute and relative to MSE0."""
    if trials < 30:
        raise PreconditionError(f"need at least 30 trials, got {trials}")
    err = recovery_errors_mc(params, trials, seed, threads, budget)[:, 0]
    mmse = float(err.mean())
    se = float(err.std(ddof=1) / math.sqrt(trials))
    mse0 = params.mse0
    if mse0 == 0:
        return MMSEEstimate(mmse, se, float("nan"), float("nan"))
    return MMSEEstimate(mmse, se, mmse / mse0, se / mse0)


def mse_lower_bound(kl: float, n: int, m: int, k: float, sigma2: float) -> float:
    """Area-theorem bound ``exp(-2 kl / (n - m)) (sigma2 + k) - sigma2``.

    Lower-bounds the MSE of any estimator that sees only the first ``m``
    of ``n`` observations, where ``kl`` is the divergence with all ``n``.
    """
    if not 1 <= m <= n - 1:
        raise PreconditionError(f"need 1 <= m <= n - 1, got m={m}, n={n}")
    if kl < 0:
        raise PreconditionError(f"kl must be >= 0, got {kl}")
    return math.exp(-2.0 * kl / (n - m)) * (sigma2 + k) - sigma2


def pairwise_error_bound(ell: int, sigma2: float, n: int) -> float:
    """``(1 + ell / (2 sigma2))**(-n/2)`` bounds ``P(||W + X(beta - beta')||^2 <= ||W||^2)``
    when ``||beta - beta'||^2 = 2 ell``."""
    if ell < 1:
        raise PreconditionError(f"ell must be >= 1, got {ell}")
    return (1.0 + ell / (2.0 * sigma2)) ** (-n / 2.0)


def pairwise_error_mc(
    params: ModelParams, ell: int, trials: int, seed: Seed, threads: int | None = 1
) -> tuple[float, float]:
    """Frequency with which a support at distance ``2 ell`` fits no worse than the truth."""
    p, k, n = params.p, params.k, params.n
    if not 1 <= ell <= min(k, p - k):
        raise PreconditionError(f"ell must lie in [1, min(k, p-k)], got {ell}")
    diff = np.zeros(p)
    diff[:ell] = 1.0
    diff[k : k + ell] = -1.0
    sd = math.sqrt(params.sigma2)

    def work(rng, size):
        X = rng.standard_normal((size, n, p))
        W = sd * rng.standard_normal((size, n))
        v = W + X @ diff
        return np.einsum("tn,tn->t", v, v) <= np.einsum("tn,tn->t", W, W)

    hits = _batch.run_blocks(work, trials, seed, threads)
    rate = float(hits.mean())
    return rate, math.sqrt(max(rate * (1 - rate), 0.0) / trials)


def mle_tail_bound(params: ModelParams) -> MLETailBound:
    """Failure threshold ``2d`` with ``d = ceil(k / log(p/k))`` and the bound
    ``e^2 / (log^2(p/k) (1 - 1/e))`` on ``P(||beta_hat - beta||^2 >= 2d)``.

    ``sample_condition`` reports whether ``n`` meets the sample size the
    bound requires; ``vacuous`` whether the bound is at least one.
    """
    p, k = params.p, params.k
    if not p > k:
        raise PreconditionError("need p/k > 1")
    lp = math.log(p / k)
    d = math.ceil(k / lp)
    bound = math.e**2 / (lp**2 * (1 - math.exp(-1)))
    inflation = (1 + math.log(2) / math.log1p(k / (2 * params.sigma2))) * (1 + 4 * math.log(lp) / lp)
    return MLETailBound(2.0 * d, bound, params.n >= inflation * params.nstar, bound >= 1)
