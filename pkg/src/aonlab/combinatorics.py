"""Overlap law of two random supports and exhaustive k-subset enumeration.

Supports are enumerated in colexicographic order: ``A < B`` iff the
largest element of the symmetric difference lies in ``B``.  The rank of
a sorted subset ``a_0 < ... < a_{k-1}`` is ``sum_i C(a_i, i + 1)``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import gammaln

from aonlab.errors import BudgetExceeded, PreconditionError
from aonlab.model import SupportVector

DEFAULT_ENUMERATION_BUDGET = 10**7


def overlap(a: SupportVector, b: SupportVector) -> int:
    if a.p != b.p:
        raise PreconditionError(f"dimension mismatch: {a.p} vs {b.p}")
    return len(set(a.indices) & set(b.indices))


def log_binom(n, r):
    """``log C(n, r)`` via log-gamma; ``-inf`` outside ``0 <= r <= n``."""
    n = np.asarray(n, dtype=float)
    r = np.asarray(r, dtype=float)
    ok = (r >= 0) & (r <= n)
    with np.errstate(invalid="ignore"):
        out = gammaln(n + 1) - gammaln(r + 1) - gammaln(n - r + 1)
    out = np.where(ok, out, -np.inf)
    return out[()] if out.ndim == 0 else out


def _check_pk(p: int, k: int):
    if not 1 <= k <= p:
        raise PreconditionError(f"need 1 <= k <= p, got p={p}, k={k}")


def hyp_log_pmf(p: int, k: int, s: int) -> float:
    """``log P(S = s)`` for ``S ~ Hyp(p, k, k)``, the overlap of two uniform k-subsets."""
    _check_pk(p, k)
    if not 0 <= s <= k:
        raise PreconditionError(f"overlap s={s} outside [0, {k}]")
    return float(log_binom(k, s) + log_binom(p - k, k - s) - log_binom(p, k))


@dataclass(frozen=True, eq=False)
class OverlapLaw:
    p: int
    k: int
    log_pmf: np.ndarray

    @property
    def pmf(self) -> np.ndarray:
        return np.exp(self.log_pmf)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.k + 1)


@functools.lru_cache(maxsize=256)
def overlap_law(p: int, k: int) -> OverlapLaw:
    _check_pk(p, k)
    s = np.arange(k + 1)
    logp = log_binom(k, s) + log_binom(p - k, k - s) - log_binom(p, k)
    logp.flags.writeable = False
    return OverlapLaw(p, k, logp)


def log_hyp_pmf_upper_bound(p: int, k: int, s: int) -> float:
    """``log C(k, s) + s log(k / (p - k + 1))``."""
    _check_pk(p, k)
    if not 1 <= s <= k:
        raise PreconditionError(f"bound holds for s in [1, k], got s={s}")
    return float(log_binom(k, s)) + s * math.log(k / (p - k + 1))


def hyp_pmf_upper_bound(p: int, k: int, s: int) -> float:
    """``C(k, s) * (k / (p - k + 1))**s``, which dominates ``P(S = s)`` for ``s >= 1``.

    Returns ``inf`` when the (then vacuous) bound overflows a float.
    """
    log_b = log_hyp_pmf_upper_bound(p, k, s)
    return math.exp(log_b) if log_b < 709.0 else math.inf


def colex_rank(indices) -> int:
    return sum(math.comb(a, i + 1) for i, a in enumerate(indices))


def colex_unrank(rank: int, p: int, k: int) -> tuple[int, ...]:
    total = math.comb(p, k)
    if not 0 <= rank < total:
        raise PreconditionError(f"rank {rank} outside [0, {total})")
    out = []
    a = p - 1
    for i in range(k, 0, -1):
        while math.comb(a, i) > rank:
            a -= 1
        out.append(a)
        rank -= math.comb(a, i)
        a -= 1
    return tuple(reversed(out))


def _check_budget(p: int, k: int, budget: int | None):
    budget = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
    count = math.comb(p, k)
    if count > budget:
        raise BudgetExceeded(
            f"C({p},{k}) = {count} supports exceeds the enumeration budget {budget}; "
            "shrink p or k, or raise the budget"
        )
    return count


class SupportEnumerator:
    """Cursor over the k-subsets of ``range(p)`` in colex order.

    Each instance keeps its own cursor, so several may walk the same
    ``(p, k)`` independently.
    """

    def __init__(self, p: int, k: int, budget: int | None = None):
        _check_pk(p, k)
        self.p, self.k = p, k
        self.total = _check_budget(p, k, budget)
        self.cursor = 0
        self._current = list(range(k))

    def rank(self, support: SupportVector) -> int:
        if support.p != self.p or support.k != self.k:
            raise PreconditionError("support does not belong to this enumerator")
        return colex_rank(support.indices)

    def unrank(self, rank: int) -> SupportVector:
        return SupportVector(colex_unrank(rank, self.p, self.k), self.p)

    def __iter__(self) -> Iterator[SupportVector]:
        return self

    def __next__(self) -> SupportVector:
        if self.cursor >= self.total:
            raise StopIteration
        a = self._current
        out = SupportVector(tuple(a), self.p)
        self.cursor += 1
        if self.cursor < self.total:
            # smallest position that can move up without colliding
            i = 0
            while i < self.k - 1 and a[i] + 1 == a[i + 1]:
                i += 1
            a[i] += 1
            a[:i] = range(i)
        return out


def enumerate_supports(p: int, k: int, budget: int | None = None) -> Iterator[SupportVector]:
    return SupportEnumerator(p, k, budget)


@functools.lru_cache(maxsize=32)
def _support_table(p: int, k: int) -> np.ndarray:
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(p), k)),
        dtype=np.intp,
        count=math.comb(p, k) * k,
    )
    combos = flat.reshape(-1, k)
    # np.lexsort keys on the last column first, which is exactly colex order
    table = np.ascontiguousarray(combos[np.lexsort(combos.T)])
    table.flags.writeable = False
    return table


def support_table(p: int, k: int, budget: int | None = None) -> np.ndarray:
    """All k-subsets as a read-only ``(C(p,k), k)`` index array; row ``r`` has colex rank ``r``."""
    _check_pk(p, k)
    _check_budget(p, k, budget)
    return _support_table(p, k)


@functools.lru_cache(maxsize=32)
def _support_incidence(p: int, k: int) -> np.ndarray:
    table = _support_table(p, k)
    inc = np.zeros((table.shape[0], p))
    np.put_along_axis(inc, table, 1.0, axis=1)
    inc.flags.writeable = False
    return inc


def support_incidence(p: int, k: int, budget: int | None = None) -> np.ndarray:
    """Dense 0/1 matrix whose row ``r`` is the support of colex rank ``r``."""
    support_table(p, k, budget)
    return _support_incidence(p, k)
