import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from aonlab import (
    BudgetExceeded,
    PreconditionError,
    SupportEnumerator,
    SupportVector,
    colex_rank,
    colex_unrank,
    enumerate_supports,
    hyp_log_pmf,
    hyp_pmf_upper_bound,
    overlap,
    overlap_law,
)
from aonlab.combinatorics import log_binom, support_incidence, support_table
from aonlab.model import draw_supports
from oracles import hyp_pmf_exact


class TestOverlap:
    def test_values(self):
        a = SupportVector((0, 1), 6)
        assert overlap(a, a) == 2
        assert overlap(a, SupportVector((2, 3), 6)) == 0
        assert overlap(a, SupportVector((1, 3), 6)) == 1

    def test_dimension_mismatch(self):
        with pytest.raises(PreconditionError):
            overlap(SupportVector((0,), 3), SupportVector((0,), 4))


class TestHypergeometric:
    def test_small_table(self):
        np.testing.assert_allclose(
            [math.exp(hyp_log_pmf(6, 2, s)) for s in range(3)], [0.4, 8 / 15, 1 / 15], rtol=1e-13
        )
        assert math.exp(hyp_log_pmf(4, 1, 1)) == pytest.approx(0.25, rel=1e-13)

    def test_forced_overlap(self):
        assert hyp_log_pmf(5, 5, 5) == pytest.approx(0.0, abs=1e-13)
        assert all(hyp_log_pmf(5, 5, s) == -math.inf for s in range(5))

    def test_impossible_is_neg_inf(self):
        # k - s > p - k
        assert hyp_log_pmf(5, 4, 0) == -math.inf

    @pytest.mark.parametrize("s", [-1, 3])
    def test_out_of_range(self, s):
        with pytest.raises(PreconditionError):
            hyp_log_pmf(6, 2, s)

    def test_matches_exact_rationals(self):
        for p in range(1, 61, 3):
            for k in range(1, p + 1, max(1, p // 7)):
                exact = [float(hyp_pmf_exact(p, k, s)) for s in range(k + 1)]
                np.testing.assert_allclose(overlap_law(p, k).pmf, exact, rtol=1e-10, atol=1e-300)

    def test_matches_scipy(self):
        law = overlap_law(40, 7)
        np.testing.assert_allclose(law.pmf, stats.hypergeom(40, 7, 7).pmf(np.arange(8)), rtol=1e-10)

    def test_normalised(self):
        for p in range(1, 201, 7):
            for k in {1, min(2, p), p // 3 or 1, p // 2 or 1, p}:
                total = math.fsum(overlap_law(p, k).pmf)
                assert abs(total - 1) < 1e-12, (p, k)

    def test_log_binom_outside(self):
        assert log_binom(3, 5) == -math.inf
        assert log_binom(3, -1) == -math.inf


class TestPmfUpperBound:
    def test_examples(self):
        assert hyp_pmf_upper_bound(4, 1, 1) == pytest.approx(0.25)
        assert hyp_pmf_upper_bound(6, 2, 1) == pytest.approx(0.8)
        assert hyp_pmf_upper_bound(6, 2, 2) == pytest.approx(0.16)

    def test_rejects_zero(self):
        with pytest.raises(PreconditionError):
            hyp_pmf_upper_bound(6, 2, 0)

    def test_dominates_exact(self):
        for p in range(1, 80):
            for k in range(1, p + 1):
                for s in range(1, k + 1):
                    bound = math.comb(k, s) * (k / (p - k + 1)) ** s
                    assert hyp_pmf_upper_bound(p, k, s) == pytest.approx(bound)
                    assert hyp_pmf_upper_bound(p, k, s) >= float(hyp_pmf_exact(p, k, s)) * (1 - 1e-12)


class TestEnumeration:
    def test_small(self):
        assert [v.indices for v in enumerate_supports(3, 1)] == [(0,), (1,), (2,)]
        got = [v.indices for v in enumerate_supports(4, 2)]
        assert len(got) == len(set(got)) == 6

    def test_count(self):
        assert sum(1 for _ in enumerate_supports(24, 3)) == 2024

    def test_colex_order(self):
        got = [v.indices for v in enumerate_supports(7, 3)]
        assert got == sorted(itertools.combinations(range(7), 3), key=lambda c: c[::-1])

    def test_table_matches_enumerator(self):
        table = support_table(9, 4)
        np.testing.assert_array_equal(table, [v.indices for v in enumerate_supports(9, 4)])
        assert not table.flags.writeable

    def test_incidence(self):
        inc = support_incidence(6, 2)
        np.testing.assert_array_equal(inc.sum(axis=1), 2)
        np.testing.assert_array_equal(np.nonzero(inc[5])[0], support_table(6, 2)[5])

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            list(enumerate_supports(30, 5, budget=1000))
        with pytest.raises(BudgetExceeded):
            support_table(30, 5, budget=1000)

    def test_independent_cursors(self):
        a, b = SupportEnumerator(5, 2), SupportEnumerator(5, 2)
        next(a), next(a)
        assert next(b).indices == (0, 1)
        assert a.cursor == 2 and b.cursor == 1

    def test_bijection(self):
        for p in range(1, 15):
            for k in range(1, p + 1):
                total = math.comb(p, k)
                if total > 10**4:
                    continue
                en = SupportEnumerator(p, k)
                for r in range(total):
                    assert en.rank(en.unrank(r)) == r
                for r, v in enumerate(SupportEnumerator(p, k)):
                    assert colex_rank(v.indices) == r

    @given(st.integers(1, 40).flatmap(lambda p: st.tuples(st.just(p), st.integers(1, p))), st.data())
    def test_unrank_rank(self, pk, data):
        p, k = pk
        r = data.draw(st.integers(0, math.comb(p, k) - 1))
        assert colex_rank(colex_unrank(r, p, k)) == r

    def test_unrank_range(self):
        with pytest.raises(PreconditionError):
            colex_unrank(6, 4, 2)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_empirical_overlap_law(seed):
    # two independent uniform supports, chi-square goodness of fit
    p, k, draws = 12, 3, 100_000
    rng = np.random.default_rng(seed)
    a = draw_supports(rng, p, k, draws)
    b = draw_supports(rng, p, k, draws)
    s = (a[:, :, None] == b[:, None, :]).sum(axis=(1, 2))
    observed = np.bincount(s, minlength=k + 1)
    expected = overlap_law(p, k).pmf * draws
    assert stats.chisquare(observed, expected).pvalue > 1e-3


def test_upper_bound_overflow_is_inf():
    from aonlab.combinatorics import log_hyp_pmf_upper_bound

    assert hyp_pmf_upper_bound(2000, 1990, 1500) == math.inf
    assert math.isfinite(log_hyp_pmf_upper_bound(2000, 1990, 1500))
