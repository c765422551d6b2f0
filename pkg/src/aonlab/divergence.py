"""Divergences between the planted model and the null model.

Exact chi-square via the hypergeometric overlap law, truncated
exponential moments of the overlap, Monte Carlo estimates of chi-square,
KL and total variation from exhaustive likelihood ratios, and the
conditioning event that removes the rare large-overlap configurations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import logsumexp

from aonlab import _batch
from aonlab.combinatorics import log_binom, overlap_law, support_table
from aonlab.errors import LambdaTooSmall, PreconditionError
from aonlab.model import Instance, ModelParams, Seed, SupportVector, draw_null, draw_planted

POLE_GUARD = 1e-9


@dataclass(frozen=True)
class ConditioningParams:
    """Parameters of the event bounding ``||X(beta + beta')||^2`` for high-overlap ``beta'``."""

    gamma: float
    tau: float
    k: int

    def __post_init__(self):
        if not self.gamma >= 0:
            raise PreconditionError(f"gamma must be >= 0, got {self.gamma}")
        if not 0 <= self.tau <= self.k:
            raise PreconditionError(f"tau must lie in [0, k={self.k}], got {self.tau}")

    @property
    def eta(self) -> float:
        return 1.0 - self.tau / self.k


@dataclass(frozen=True)
class DivergenceReport:
    chi2_exact: float | None
    chi2_mc: float
    kl_mc: float
    tv_mc: float
    chi2_se: float
    kl_se: float
    tv_se: float
    trials: int
    lam: float
    # False when exp(2 LLR) has infinite variance under the null, in which
    # case chi2_se understates the error of chi2_mc
    chi2_variance_finite: bool = True


@dataclass(frozen=True)
class BoundCheck:
    lhs: float
    rhs: float
    holds: bool


class TheoremSettings(NamedTuple):
    alpha: float
    cond: ConditioningParams
    in_regime: bool


def _validity_margin(params: ModelParams, lam: float) -> float:
    return lam - math.sqrt(params.snr + 0.5)


def chi2_exact(params: ModelParams, lam: float | None = None) -> float:
    """Exact ``chi^2(P || Q_lam)`` as an expectation over the overlap law.

    Valid for ``lam**2 > k/sigma2 + 1/2``; closer than ``POLE_GUARD`` to
    that boundary raises :class:`LambdaTooSmall`.
    """
    lam = params.null_scale if lam is None else float(lam)
    if _validity_margin(params, lam) <= POLE_GUARD:
        raise LambdaTooSmall(
            f"lam={lam} must exceed sqrt(k/sigma2 + 1/2) = {math.sqrt(params.snr + 0.5)}"
        )
    n, k, s2 = params.n, params.k, params.sigma2
    if n == 0:
        return 0.0
    law = overlap_law(params.p, k)
    s = law.support
    log_terms = (
        law.log_pmf
        + 2 * n * math.log(lam)
        - 0.5 * n * np.log(2 * lam**2 - 1 - (k + s) / s2)
        - 0.5 * n * np.log1p((k - s) / s2)
    )
    return float(np.expm1(logsumexp(log_terms)))


def chi2_blowup_lower_bound(params: ModelParams) -> float:
    """Contribution of full overlap alone: ``exp(n log(1 + k/sigma2) - log C(p,k)) - 1``."""
    if params.k >= params.p:
        raise PreconditionError("blow-up bound needs k < p")
    return float(np.expm1(params.n * math.log1p(params.snr) - log_binom(params.p, params.k)))


def truncated_moment(params: ModelParams, n_eff: float, s_lo: int, s_hi: int) -> float:
    """``E[(1 - S/(k + sigma2))**(-n_eff) ; s_lo <= S <= s_hi]`` for the overlap ``S``."""
    k = params.k
    if s_lo > s_hi:
        return 0.0
    if s_lo < 0 or s_hi > k:
        raise PreconditionError(f"range [{s_lo}, {s_hi}] outside [0, {k}]")
    law = overlap_law(params.p, k)
    s = np.arange(s_lo, s_hi + 1)
    log_terms = law.log_pmf[s_lo : s_hi + 1] - n_eff * np.log1p(-s / (k + params.sigma2))
    return float(np.exp(logsumexp(log_terms)))


def large_overlap_threshold(params: ModelParams) -> float:
    """``k (1 - 1/log^2(1 + k/sigma2))``: overlaps at or above this count as large."""
    return params.k * (1.0 - 1.0 / math.log1p(params.snr) ** 2)


def overlap_split_epsilon(p: int, k: int) -> float:
    """Fraction ``loglog(p/k) / (2 log(p/k))`` separating small from intermediate overlaps."""
    if p <= k:
        raise PreconditionError("need p > k")
    r = math.log(p / k)
    return math.log(r) / (2 * r)


def check_large_overlap_moment(params: ModelParams, alpha: float, c: float) -> BoundCheck:
    """Compare the large-overlap truncated moment with ``exp(-alpha k log(p/k) + log((2-c)/(1-c)))``.

    Preconditions: ``0 < c < 1``, ``k <= c p``, ``0 < alpha <= 1/2`` and
    ``n <= (1 - alpha) n* / 2``.
    """
    if not 0 < c < 1:
        raise PreconditionError(f"c must lie in (0, 1), got {c}")
    if params.k > c * params.p:
        raise PreconditionError(f"need k <= c p, got k={params.k}, c p={c * params.p}")
    if not 0 < alpha <= 0.5:
        raise PreconditionError(f"alpha must lie in (0, 1/2], got {alpha}")
    limit = 0.5 * (1 - alpha) * params.nstar
    if params.n > limit:
        raise PreconditionError(f"n={params.n} exceeds (1 - alpha) n*/2 = {limit:.6g}")
    tau = large_overlap_threshold(params)
    s_lo = min(max(math.ceil(tau - 1e-12), 0), params.k)
    lhs = truncated_moment(params, params.n, s_lo, params.k)
    rhs = math.exp(-alpha * params.k * math.log(params.p / params.k) + math.log((2 - c) / (1 - c)))
    return BoundCheck(lhs, rhs, lhs <= rhs)


def null_moment_finite(params: ModelParams, lam: float, order: int) -> bool:
    """Whether ``E_Q[(dP/dQ_lam)**order]`` is finite.

    Integrating the Gaussian ``Y`` out leaves ``exp(c ||X beta||^2)``
    with ``c = m(m-1) / (2 sigma2 (m lam^2 - m + 1))``, finite iff
    ``c k < 1/2``.  For ``order = 2`` this is the validity condition of
    :func:`chi2_exact`.
    """
    m = order
    return m * (m - 1) * params.snr < m * lam**2 - m + 1


def log_likelihood_ratio(
    inst: Instance, params: ModelParams, lam: float | None = None, budget: int | None = None
) -> float:
    """``log dP/dQ_lam (X, Y)`` by log-sum-exp over all supports."""
    lam = params.null_scale if lam is None else float(lam)
    supports = support_table(params.p, params.k, budget)
    return float(_batch.log_likelihood_ratios(inst.X, inst.Y, params.sigma2, lam, supports))


def mc_divergences(
    params: ModelParams,
    lam: float | None = None,
    trials: int = 10_000,
    seed: Seed = Seed(0),
    threads: int | None = 1,
    budget: int | None = None,
) -> DivergenceReport:
    """Monte Carlo chi-square, KL and TV between the planted model and ``Q_lam``.

    ``chi2 = E_Q[L^2] - 1`` and ``TV = E_Q[(1 - L)_+]`` use null draws,
    ``KL = E_P[log L]`` uses planted draws; errors are 50-batch means.
    """
    if trials < 100:
        raise PreconditionError(f"need at least 100 trials, got {trials}")
    lam = params.null_scale if lam is None else float(lam)
    supports = support_table(params.p, params.k, budget)
    s2 = params.sigma2

    def null_llr(rng, size):
        X, Y = draw_null(rng, params, size, lam)
        return _batch.log_likelihood_ratios(X, Y, s2, lam, supports)

    def planted_llr(rng, size):
        X, Y, _ = draw_planted(rng, params, size)
        return _batch.log_likelihood_ratios(X, Y, s2, lam, supports)

    llr_q = _batch.run_blocks(null_llr, trials, seed.derive(0), threads)
    llr_p = _batch.run_blocks(planted_llr, trials, seed.derive(1), threads)

    chi2, chi2_se = _batch.batch_mean_se(np.exp(2 * llr_q))
    # E_Q[(1 - L)_+] equals E_Q|L - 1| / 2 because E_Q[L] = 1, and being
    # bounded in [0, 1] it does not depend on catching the rare huge L
    tv, tv_se = _batch.batch_mean_se(-np.expm1(np.minimum(llr_q, 0.0)))
    kl, kl_se = _batch.batch_mean_se(llr_p)
    try:
        exact = chi2_exact(params, lam)
    except LambdaTooSmall:
        exact = None
    return DivergenceReport(
        chi2_exact=exact,
        chi2_mc=chi2 - 1.0,
        kl_mc=kl,
        tv_mc=tv,
        chi2_se=chi2_se,
        kl_se=kl_se,
        tv_se=tv_se,
        trials=trials,
        lam=lam,
        chi2_variance_finite=null_moment_finite(params, lam, 4),
    )


class PinskerCheck(NamedTuple):
    tv_le_sqrt2kl: bool
    kl_le_log_chi2: bool


def pinsker_chain(report: DivergenceReport, z: float = 3.0) -> PinskerCheck:
    """``TV <= sqrt(2 KL) <= sqrt(2 log(1 + chi2))`` on estimates, with ``z`` combined SEs of slack.

    Checked as ``TV^2/2 - KL`` and ``KL - log(1 + chi2)``, each against
    ``z`` times its delta-method standard error.
    """
    tv, kl, chi2 = report.tv_mc, report.kl_mc, report.chi2_mc
    gap1 = 0.5 * tv**2 - kl
    se1 = math.hypot(tv * report.tv_se, report.kl_se)
    gap2 = kl - math.log1p(max(chi2, -1 + 1e-300))
    se2 = math.hypot(report.kl_se, report.chi2_se / max(1.0 + chi2, 1e-300))
    return PinskerCheck(gap1 <= z * se1, gap2 <= z * se2)


def _high_overlap_candidates(beta: SupportVector, supports: np.ndarray, tau: float):
    dense = np.zeros(beta.p, dtype=np.intp)
    dense[list(beta.indices)] = 1
    s = dense[supports].sum(axis=1)
    keep = s >= tau - 1e-12
    return supports[keep], s[keep]


def event_holds(
    X: np.ndarray,
    beta: SupportVector,
    params: ModelParams,
    cond: ConditioningParams,
    budget: int | None = None,
) -> bool:
    """Whether ``||X(beta + beta')||^2 <= (2 + gamma) * 2n(k + s)`` for every ``beta'`` of overlap ``s >= tau``."""
    X = np.asarray(X, dtype=float)
    if X.shape[1] != params.p or beta.p != params.p:
        raise PreconditionError("X, beta and params disagree on p")
    n = X.shape[0]
    if n == 0:
        return True
    cands, s = _high_overlap_candidates(beta, support_table(params.p, params.k, budget), cond.tau)
    if cands.shape[0] == 0:
        return True
    v = _batch.fits(X, cands) + X[:, list(beta.indices)].sum(axis=1)[:, None]
    norms = np.einsum("nc,nc->c", v, v)
    return bool(np.all(norms <= (2.0 + cond.gamma) * 2.0 * n * (params.k + s)))


def conditioning_prob_bound(params: ModelParams, cond: ConditioningParams) -> float:
    """Upper bound ``exp(-n gamma/4 + eta k log(e^2 p / (eta^2 k)))`` on ``P((X, beta) not in E)``.

    At ``eta = 0`` only ``beta' = beta`` is checked and the combinatorial
    factor is one, giving ``exp(-n gamma / 4)``.
    """
    eta = cond.eta
    log_b = -params.n * cond.gamma / 4.0
    if eta > 0:
        log_b += eta * params.k * math.log(math.e**2 * params.p / (eta**2 * params.k))
    return math.exp(min(log_b, 700.0))


def conditioning_failure_mc(
    params: ModelParams,
    cond: ConditioningParams,
    trials: int,
    seed: Seed,
    threads: int | None = 1,
    budget: int | None = None,
) -> tuple[float, float]:
    """Monte Carlo ``P((X, beta) not in E)`` and its binomial standard error."""
    support_table(params.p, params.k, budget)

    def work(rng, size):
        X, _, sup = draw_planted(rng, params, size)
        return np.array(
            [not event_holds(X[i], SupportVector(tuple(sup[i]), params.p), params, cond, budget) for i in range(size)]
        )

    fails = _batch.run_blocks(work, trials, seed, threads)
    rate = float(fails.mean())
    return rate, math.sqrt(max(rate * (1 - rate), 0.0) / trials)


def kl_tail_bound(params: ModelParams, epsilon: float) -> float:
    """Bound on ``epsilon * D(P_{E^c} || Q_lambda0)``: ``(eps n / 2) log(1 + k/sigma2) + sqrt(eps) (2 + n)``."""
    if not 0 <= epsilon <= 1:
        raise PreconditionError(f"epsilon must lie in [0, 1], got {epsilon}")
    n = params.n
    return 0.5 * epsilon * n * math.log1p(params.snr) + math.sqrt(epsilon) * (2 + n)


def make_theorem_params(params: ModelParams, delta: float) -> TheoremSettings:
    """Slack ``alpha`` and the conditioning event used for the sharp detection lower bound.

    ``alpha = max(8 / log(1 + k/sigma2), 32 loglog(p/k) / log(p/k))``,
    ``gamma = alpha k log(p/k) / n``, ``tau = k (1 - 1/log^2(1 + k/sigma2))``.
    ``in_regime`` is False when ``alpha > 1/2``, ``k > p**(1/2 - delta)``,
    ``n > (1 - alpha) n*`` or ``tau`` had to be clipped at 0.
    """
    if not 0 < delta < 0.5:
        raise PreconditionError(f"delta must lie in (0, 1/2), got {delta}")
    if params.n < 1:
        raise PreconditionError("need n >= 1")
    if not params.p / params.k > math.e:
        raise PreconditionError("need p/k > e so that loglog(p/k) > 0")
    lp = math.log(params.p / params.k)
    alpha = max(8.0 / math.log1p(params.snr), 32.0 * math.log(lp) / lp)
    gamma = alpha * params.k * lp / params.n
    tau_raw = large_overlap_threshold(params)
    tau = min(max(tau_raw, 0.0), float(params.k))
    in_regime = (
        alpha <= 0.5
        and params.k <= params.p ** (0.5 - delta)
        and params.n <= (1 - alpha) * params.nstar
        and tau_raw >= 0
    )
    return TheoremSettings(alpha, ConditioningParams(gamma, tau, params.k), in_regime)
