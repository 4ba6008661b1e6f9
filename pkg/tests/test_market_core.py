"""
╔══════════════════════════════════════════════════════════════════════════════╗
║              MARKET CORE TESTS                                               ║
║                                                                              ║
║   Utility with maximum prices, the three feasibility clauses, stability,     ║
║   relaxed stability and utility dominance on the two reference markets.      ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

from fractions import Fraction

import pytest

from market_core import (
    DUMMY, INF, Dominance, MarketInstance, MarketUsageError, Outcome, check_feasible,
    check_relaxed_stable, check_stable, compare_profiles, dominates, relaxed_utility, to_rat,
    utility,
)


# ═══════════════════════════════════════════════════════════════════════════════
# INSTANCE CONSTRUCTION
# ═══════════════════════════════════════════════════════════════════════════════

class TestMarketInstance:

    def test_dummy_column_added(self, ex1):
        assert ex1.n == 3 and ex1.k == 2
        for i in range(ex1.n):
            assert ex1.v[i][DUMMY] == 0
            assert ex1.r[i][DUMMY] == 0
            assert ex1.m[i][DUMMY] == INF

    def test_sparse_matches_dense(self, ex1):
        sparse = MarketInstance.sparse(3, 2, v={(0, 1): 1, (1, 1): 4, (1, 2): 4, (2, 2): 1},
                                       r={(1, 1): 2, (1, 2): 2})
        assert sparse == ex1

    def test_negative_reserve_rejected(self):
        with pytest.raises(MarketUsageError):
            MarketInstance.from_real_items(v=[[1]], r=[[-1]])

    def test_shape_mismatch_rejected(self):
        with pytest.raises(MarketUsageError):
            MarketInstance.from_real_items(v=[[1, 2]], r=[[0]])

    def test_dummy_column_must_be_neutral(self):
        with pytest.raises(MarketUsageError):
            MarketInstance(v=((Fraction(1), Fraction(2)),), r=((0, 0),), m=((INF, INF),))

    def test_item_count_without_bidders(self):
        assert MarketInstance((), (), (), items=3).k == 3
        assert MarketInstance((), (), ()).k == 0

    def test_item_count_must_match_columns(self):
        v = ((Fraction(0), Fraction(1)),)
        assert MarketInstance(v, ((0, 0),), ((INF, INF),), items=1).k == 1
        with pytest.raises(MarketUsageError):
            MarketInstance(v, ((0, 0),), ((INF, INF),), items=2)

    def test_replace_entry_only_touches_one_cell(self, ex1):
        changed = ex1.replace_entry("v", 0, 1, 100)
        assert changed.v[0][1] == 100
        assert changed.v[1:] == ex1.v[1:]
        assert changed.r == ex1.r and changed.m == ex1.m

    def test_replace_entry_rejects_dummy(self, ex1):
        with pytest.raises(MarketUsageError):
            ex1.replace_entry("v", 0, DUMMY, 3)

    def test_rational_strings(self):
        assert to_rat("3/4") == Fraction(3, 4)
        inst = MarketInstance.from_real_items(v=[["1/2"]])
        assert inst.v[0][1] == Fraction(1, 2)
        assert not inst.is_integral()


# ═══════════════════════════════════════════════════════════════════════════════
# UTILITY
# ═══════════════════════════════════════════════════════════════════════════════

class TestUtility:

    def test_below_maximum(self, ex1):
        assert utility(ex1, 1, 1, Fraction(2)) == 2

    def test_at_maximum_is_minus_infinity(self, ex2):
        assert utility(ex2, 0, 1, Fraction(5)) == -INF

    def test_dummy_at_zero(self, ex2):
        assert utility(ex2, 1, DUMMY, Fraction(0)) == 0

    def test_out_of_range(self, ex1):
        with pytest.raises(MarketUsageError):
            utility(ex1, 3, 1, Fraction(0))
        with pytest.raises(MarketUsageError):
            utility(ex1, 0, 3, Fraction(0))

    def test_relaxed_utility_keeps_closed_cap(self, ex2):
        assert relaxed_utility(ex2, 0, 1, Fraction(5)) == 5
        assert relaxed_utility(ex2, 0, 1, Fraction(6)) == -INF


# ═══════════════════════════════════════════════════════════════════════════════
# OUTCOME
# ═══════════════════════════════════════════════════════════════════════════════

class TestOutcome:

    def test_utilities_derived(self, ex1):
        out = Outcome.from_matching(ex1, [(1, 1)], [2, 2])
        assert out.assignment == (0, 1, 0)
        assert out.utilities == (0, 2, 0)
        assert out.matching == [(1, 1)]

    def test_item_assigned_twice(self, ex1):
        with pytest.raises(MarketUsageError):
            Outcome(ex1, (1, 1, 0), (0, 0, 0))

    def test_dummy_price_must_be_zero(self, ex1):
        with pytest.raises(MarketUsageError):
            Outcome(ex1, (0, 0, 0), (1, 0, 0))


# ═══════════════════════════════════════════════════════════════════════════════
# FEASIBILITY / STABILITY
# ═══════════════════════════════════════════════════════════════════════════════

class TestFeasible:

    def test_bidder_optimal_outcome_feasible(self, ex1):
        out = Outcome.from_matching(ex1, [(1, 1)], [2, 2])
        assert check_feasible(ex1, out).ok

    def test_price_below_reserve(self, ex1):
        out = Outcome.from_matching(ex1, [(1, 1)], [1, 1])
        report = check_feasible(ex1, out)
        assert report.pairs("3") == [(1, 1)]

    def test_negative_price(self, ex1):
        out = Outcome.from_matching(ex1, [], [-1, 0])
        report = check_feasible(ex1, out)
        assert [v.item for v in report.violations if v.clause == "2"] == [1]

    def test_negative_utility(self, ex1):
        out = Outcome.from_matching(ex1, [(0, 1)], [3, 0])
        assert check_feasible(ex1, out).pairs("1") == [(0, 1)]

    def test_price_at_maximum(self, ex2):
        out = Outcome.from_matching(ex2, [(0, 1)], [5])
        report = check_feasible(ex2, out)
        assert (0, 1) in report.pairs("3")


class TestStable:

    def test_example_two_empty_matching_at_five(self, ex2):
        out = Outcome.from_matching(ex2, [], [5])
        assert check_stable(ex2, out).ok

    def test_example_two_blocking_below_five(self, ex2):
        out = Outcome.from_matching(ex2, [], [4])
        report = check_stable(ex2, out)
        assert sorted(report.pairs("blocking")) == [(0, 1), (1, 1)]

    def test_example_one_optimum(self, ex1):
        out = Outcome.from_matching(ex1, [(1, 1)], [2, 2])
        assert check_stable(ex1, out).ok

    def test_relaxed_outcome_is_not_stable(self, ex1):
        out = Outcome.from_matching(ex1, [(0, 1), (1, 2)], [0, 2])
        report = check_stable(ex1, out)
        assert (1, 1) in report.pairs("blocking")


class TestRelaxedStable:

    @pytest.mark.parametrize("pairs, prices", [
        ([(0, 1), (1, 2)], [0, 2]),
        ([(1, 1), (2, 2)], [2, 0]),
    ])
    def test_example_one_relaxed_outcomes(self, ex1, pairs, prices):
        out = Outcome.from_matching(ex1, pairs, prices)
        assert check_relaxed_stable(ex1, out).ok

    def test_example_two_winner_at_cap(self, ex2):
        out = Outcome.from_matching(ex2, [(0, 1)], [5])
        assert check_relaxed_stable(ex2, out).ok
        assert out.relaxed_utilities(ex2) == (5, 0)

    def test_example_two_below_cap_fails(self, ex2):
        out = Outcome.from_matching(ex2, [(0, 1)], [4])
        assert check_relaxed_stable(ex2, out).pairs("relaxed") == [(1, 1)]


# ═══════════════════════════════════════════════════════════════════════════════
# DOMINANCE
# ═══════════════════════════════════════════════════════════════════════════════

class TestDominance:

    def test_example_one_outcomes_incomparable(self, ex1):
        a = Outcome.from_matching(ex1, [(0, 1), (1, 2)], [0, 2])
        b = Outcome.from_matching(ex1, [(1, 1), (2, 2)], [2, 0])
        assert dominates(a, b) == Dominance.INCOMPARABLE

    def test_example_two_outcomes_incomparable(self, ex2):
        a = Outcome.from_matching(ex2, [(0, 1)], [4])
        b = Outcome.from_matching(ex2, [(1, 1)], [4])
        assert a.utilities == (6, 0) and b.utilities == (0, 6)
        assert dominates(a, b) == Dominance.INCOMPARABLE

    def test_identical_is_greater_or_equal(self, ex1):
        a = Outcome.from_matching(ex1, [(1, 1)], [2, 2])
        assert dominates(a, a) == Dominance.GREATER_OR_EQUAL

    def test_weakly_smaller(self):
        assert compare_profiles((0, 1), (1, 1)) == Dominance.LESS_OR_EQUAL

    def test_length_mismatch(self):
        with pytest.raises(MarketUsageError):
            compare_profiles((0,), (0, 1))
