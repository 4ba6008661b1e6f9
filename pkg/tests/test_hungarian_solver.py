"""
╔══════════════════════════════════════════════════════════════════════════════╗
║              HUNGARIAN SOLVER TESTS                                          ║
║                                                                              ║
║   Golden outcomes and event sequences on the two reference markets,          ║
║   the price increment and update steps, engine equivalence on seeded         ║
║   random markets, and the iteration counters.                                ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

from fractions import Fraction

import numpy as np
import pytest

from choice_graph import build_choice_graphs, is_strictly_overdemanded
from hungarian_solver import (
    Augmented, DeltaComputed, EdgeDropped, PricesRaised, SolverState, TreeBuilt,
    apply_price_update, compute_delta, describe_event, solve, solve_fast, solve_simple,
    solver_trace,
)
from market_core import DUMMY, INF, MarketInstance, MarketUsageError, check_stable, is_integral
from market_fuzzer import generate_instance


def random_markets(seed, count, max_bidders, max_items, max_value):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_bidders + 1))
        k = int(rng.integers(1, max_items + 1))
        yield generate_instance(rng, n, k, max_value)


# ═══════════════════════════════════════════════════════════════════════════════
# GOLDEN OUTCOMES
# ═══════════════════════════════════════════════════════════════════════════════

class TestGoldenOutcomes:

    @pytest.mark.parametrize("engine", ["simple", "fast"])
    def test_example_one(self, ex1, engine):
        out = solve(ex1, engine=engine).outcome
        assert out.prices == (0, 2, 2)
        assert out.assignment == (DUMMY, 1, DUMMY)
        assert out.utilities == (0, 2, 0)

    @pytest.mark.parametrize("engine", ["simple", "fast"])
    def test_example_two(self, ex2, engine):
        out = solve(ex2, engine=engine).outcome
        assert out.prices == (0, 5)
        assert out.matching == []
        assert out.utilities == (0, 0)

    def test_reserve_sets_price(self):
        inst = MarketInstance.from_real_items(v=[[7]], r=[[3]])
        out = solve_simple(inst)
        assert out.prices == (0, 3)
        assert out.assignment == (1,)
        assert out.utilities == (4,)

    def test_wrappers_agree(self, ex1):
        assert solve_simple(ex1) == solve_fast(ex1)

    def test_unknown_engine(self, ex1):
        with pytest.raises(MarketUsageError):
            solve(ex1, engine="turbo")


# ═══════════════════════════════════════════════════════════════════════════════
# PRICE INCREMENT / UPDATE
# ═══════════════════════════════════════════════════════════════════════════════

class TestComputeDelta:

    def test_example_two_maximum_price_binds(self, ex2):
        state = SolverState(ex2, [0, 0], [1, None], T=[1, 0], S=[1])
        d = compute_delta(state)
        assert d.delta_out == 10
        assert d.delta_res == INF
        assert d.delta_max == 5
        assert d.delta == 5
        assert d.kinds == ("max",)

    def test_example_one_reserve_binds(self, ex1):
        state = SolverState(ex1, [0, 0, 0], [1, None, None], T=[1], S=[])
        d = compute_delta(state)
        assert (d.delta_out, d.delta_res, d.delta_max) == (4, 2, INF)
        assert d.kinds == ("res",)
        assert sorted(d.argmin_pairs["res"]) == [(1, 1), (1, 2)]

    def test_empty_tree_rejected(self, ex1):
        state = SolverState(ex1, [0, 0, 0], [None, None, None])
        with pytest.raises(MarketUsageError):
            compute_delta(state)


class TestApplyPriceUpdate:

    def test_example_two_drops_edge_at_maximum(self, ex2):
        state = SolverState(ex2, [0, 0], [1, None], T=[1, 0], S=[1], trace=[])
        apply_price_update(state, compute_delta(state))
        assert state.prices == [0, 5]
        assert state.matching == [None, None]
        assert state.utilities == [0, 0]
        assert state.trace[-1] == EdgeDropped(0, 1, Fraction(5))

    def test_example_one_raises_both_items(self, ex1):
        state = SolverState(ex1, [0, 0, 0], [None, None, None], T=[1], S=[], trace=[])
        apply_price_update(state, compute_delta(state))
        assert state.prices == [0, 2, 2]
        assert state.trace == [PricesRaised((1, 2), Fraction(2), (0, 2, 2))]


# ═══════════════════════════════════════════════════════════════════════════════
# TRACES
# ═══════════════════════════════════════════════════════════════════════════════

class TestTrace:

    @pytest.mark.parametrize("engine", ["simple", "fast"])
    def test_example_two_golden_trace(self, ex2, engine):
        p0 = (0, 0)
        p5 = (0, 5)
        assert solver_trace(ex2, engine) == [
            Augmented(0, 1, ((0, 1),), p0),
            TreeBuilt(1, (1, 0), (1,), p0),
            DeltaComputed(Fraction(5), ("max",), Fraction(10), INF, Fraction(5)),
            PricesRaised((1,), Fraction(5), p5),
            EdgeDropped(0, 1, Fraction(5)),
            Augmented(1, DUMMY, ((1, DUMMY),), p5),
            Augmented(0, DUMMY, ((0, DUMMY),), p5),
        ]

    @pytest.mark.parametrize("engine", ["simple", "fast"])
    def test_example_one_golden_trace(self, ex1, engine):
        p0 = (0, 0, 0)
        p2 = (0, 2, 2)
        assert solver_trace(ex1, engine) == [
            Augmented(0, 1, ((0, 1),), p0),
            TreeBuilt(1, (1,), (), p0),
            DeltaComputed(Fraction(2), ("res",), Fraction(4), Fraction(2), INF),
            PricesRaised((1, 2), Fraction(2), p2),
            EdgeDropped(0, 1, Fraction(2)),
            Augmented(1, 1, ((1, 1),), p2),
            Augmented(0, DUMMY, ((0, DUMMY),), p2),
            Augmented(2, DUMMY, ((2, DUMMY),), p2),
        ]

    def test_empty_market(self):
        inst = MarketInstance((), (), ())
        assert solver_trace(inst) == []
        assert solve(inst).outcome.prices == (0,)

    def test_items_without_bidders(self):
        inst = MarketInstance((), (), (), items=2)
        for engine in ("simple", "fast"):
            out = solve(inst, engine=engine).outcome
            assert out.prices == (0, 0, 0)
            assert out.assignment == ()

    def test_dummy_only_market(self):
        inst = MarketInstance.from_real_items(v=[[]])
        assert inst.k == 0
        assert solver_trace(inst, "fast") == [Augmented(0, DUMMY, ((0, DUMMY),), (0,))]

    def test_describe_every_event(self, ex2):
        lines = [describe_event(ev) for ev in solver_trace(ex2)]
        assert len(lines) == 7
        assert all(isinstance(line, str) and line for line in lines)

    def test_tree_sets_are_strictly_overdemanded(self):
        for inst in random_markets(11, 40, 5, 3, 5):
            for ev in solver_trace(inst, "fast"):
                if isinstance(ev, TreeBuilt):
                    g = build_choice_graphs(inst, ev.prices)
                    assert is_strictly_overdemanded(g, ev.S, ev.T), (inst, ev)

    def test_integer_markets_keep_integer_prices(self):
        for inst in random_markets(5, 40, 5, 4, 8):
            for ev in solver_trace(inst):
                if isinstance(ev, (PricesRaised, Augmented, TreeBuilt)):
                    assert all(is_integral(p) for p in ev.prices)


# ═══════════════════════════════════════════════════════════════════════════════
# ENGINE EQUIVALENCE / COUNTERS
# ═══════════════════════════════════════════════════════════════════════════════

class TestEngines:

    def test_random_markets_agree(self):
        for inst in random_markets(2024, 150, 8, 5, 9):
            a = solve(inst, "simple", trace=True)
            b = solve(inst, "fast", trace=True)
            assert a.outcome == b.outcome
            assert a.trace == b.trace
            assert check_stable(inst, a.outcome).ok

    def test_counter_bounds(self):
        for inst in random_markets(7, 120, 8, 5, 9):
            n, k1 = inst.n, inst.k + 1
            for engine in ("simple", "fast"):
                c = solve(inst, engine).counters
                assert c.outer_iterations <= n * k1
                assert c.special_executions <= 3 * n * k1
            c = solve(inst, "fast").counters
            assert c.max_removals_between_specials <= 3 * k1 * k1

    def test_special_counts_match_across_engines(self):
        for inst in random_markets(99, 80, 6, 4, 6):
            a = solve(inst, "simple").counters
            b = solve(inst, "fast").counters
            assert a.outer_iterations == b.outer_iterations
            assert a.special_executions == b.special_executions
            assert a.inner_iterations == b.inner_iterations

    def test_example_two_counters(self, ex2):
        c = solve(ex2, "fast").counters
        assert c.outer_iterations == 3
        assert c.special_executions == 1
        assert c.inner_iterations == 1

    @pytest.mark.slow
    def test_large_random_markets_agree(self):
        for inst in random_markets(1, 500, 50, 10, 100):
            a = solve(inst, "simple").outcome
            b = solve(inst, "fast").outcome
            assert (a.prices, a.utilities) == (b.prices, b.utilities)

    @pytest.mark.slow
    def test_scaling_smoke(self):
        rng = np.random.default_rng(3)
        inst = generate_instance(rng, 200, 30, 100)
        result = solve(inst, "fast")
        assert check_stable(inst, result.outcome).ok
        assert result.counters.outer_iterations <= 200 * 31
