"""
╔══════════════════════════════════════════════════════════════════════════════╗
║              CHOICE GRAPH / ALTERNATING TREE TESTS                           ║
║                                                                              ║
║   • first choice sets with and without reserve feasibility                  ║
║   • breadth-first tree growth and the lowest-index terminal rule             ║
║   • augmenting along a path                                                  ║
║   • the brute-force overdemand certificate                                   ║
╚══════════════════════════════════════════════════════════════════════════════╝
"""

from fractions import Fraction

import pytest

from choice_graph import (
    augment, build_choice_graphs, is_strictly_overdemanded, maximal_alternating_tree,
)
from market_core import DUMMY, CapacityError, MarketInstance, MarketUsageError


def prices(*real):
    return (Fraction(0),) + tuple(Fraction(x) for x in real)


@pytest.fixture
def chain() -> MarketInstance:
    """bidder 0 is indifferent between both items, bidder 1 only wants item 1."""
    return MarketInstance.from_real_items(v=[[3, 3], [5, 0]])


# ═══════════════════════════════════════════════════════════════════════════════
# FIRST CHOICE GRAPHS
# ═══════════════════════════════════════════════════════════════════════════════

class TestChoiceGraphs:

    def test_example_one_at_zero(self, ex1):
        g = build_choice_graphs(ex1, prices(0, 0))
        assert g.fp == ((1,), (1, 2), (2,))
        assert g.fp_feasible == ((1,), (), (2,))
        assert g.best_utility == (1, 4, 1)

    def test_example_one_at_reserves(self, ex1):
        g = build_choice_graphs(ex1, prices(2, 2))
        assert g.fp == ((0,), (1, 2), (0,))
        assert g.fp_feasible == ((0,), (1, 2), (0,))

    def test_maximum_price_excludes_item(self, ex2):
        g = build_choice_graphs(ex2, prices(5))
        assert g.fp == ((0,), (0,))
        assert g.best_utility == (0, 0)

    def test_demanders(self, ex1):
        g = build_choice_graphs(ex1, prices(0, 0))
        assert g.demanders([1], [0, 1, 2]) == {0}
        assert g.demanders([1, 2], [1]) == set()

    @pytest.mark.parametrize("p", [
        (Fraction(0), Fraction(0)),
        (Fraction(1), Fraction(0), Fraction(0)),
        (Fraction(0), Fraction(-1), Fraction(0)),
    ])
    def test_bad_price_vectors(self, ex1, p):
        with pytest.raises(MarketUsageError):
            build_choice_graphs(ex1, p)


# ═══════════════════════════════════════════════════════════════════════════════
# ALTERNATING TREES
# ═══════════════════════════════════════════════════════════════════════════════

class TestAlternatingTree:

    def test_no_feasible_edge_gives_singleton_tree(self, ex1):
        g = build_choice_graphs(ex1, prices(0, 0))
        tree = maximal_alternating_tree(g, [1, None, None], 1)
        assert tree.augmenting_path is None
        assert tree.T == [1] and tree.S == []

    def test_example_two_overdemanded_item(self, ex2):
        g = build_choice_graphs(ex2, prices(0))
        tree = maximal_alternating_tree(g, [1, None], 1)
        assert tree.augmenting_path is None
        assert tree.T == [1, 0]
        assert tree.S == [1]

    def test_unmatched_item_is_terminal(self, ex2):
        g = build_choice_graphs(ex2, prices(0))
        tree = maximal_alternating_tree(g, [None, None], 0)
        assert tree.augmenting_path == [(0, 1)]

    def test_path_through_matched_bidder(self, chain):
        g = build_choice_graphs(chain, prices(0, 0))
        tree = maximal_alternating_tree(g, [1, None], 1)
        assert tree.augmenting_path == [(1, 1), (0, 2)]

    def test_lowest_item_wins_tie(self):
        inst = MarketInstance.from_real_items(v=[[0, 0]])
        g = build_choice_graphs(inst, prices(0, 0))
        tree = maximal_alternating_tree(g, [None], 0)
        assert tree.augmenting_path == [(0, DUMMY)]

    def test_matched_root_rejected(self, ex2):
        g = build_choice_graphs(ex2, prices(0))
        with pytest.raises(MarketUsageError):
            maximal_alternating_tree(g, [1, None], 0)

    def test_root_out_of_range(self, ex2):
        g = build_choice_graphs(ex2, prices(0))
        with pytest.raises(MarketUsageError):
            maximal_alternating_tree(g, [None, None], 2)


# ═══════════════════════════════════════════════════════════════════════════════
# AUGMENT
# ═══════════════════════════════════════════════════════════════════════════════

class TestAugment:

    def test_flip_along_path(self):
        assert augment([1, None], [(1, 1), (0, 2)]) == (2, 1)

    def test_single_edge_to_dummy(self):
        assert augment([None, 1], [(0, DUMMY)]) == (0, 1)

    def test_empty_path(self):
        with pytest.raises(MarketUsageError):
            augment([None], [])

    def test_root_already_matched(self):
        with pytest.raises(MarketUsageError):
            augment([1, None], [(0, 2)])

    def test_not_alternating(self):
        with pytest.raises(MarketUsageError):
            augment([1, None, None], [(1, 1), (2, 2)])

    def test_end_item_taken(self):
        with pytest.raises(MarketUsageError):
            augment([1, None], [(1, 1)])


# ═══════════════════════════════════════════════════════════════════════════════
# STRICT OVERDEMAND
# ═══════════════════════════════════════════════════════════════════════════════

class TestStrictlyOverdemanded:

    def test_two_demanders_one_item(self, ex2):
        g = build_choice_graphs(ex2, prices(0))
        assert is_strictly_overdemanded(g, [1], [0, 1])

    def test_one_demander_is_not_enough(self, ex2):
        g = build_choice_graphs(ex2, prices(0))
        assert not is_strictly_overdemanded(g, [1], [0])

    def test_demand_leaking_outside(self, chain):
        g = build_choice_graphs(chain, prices(0, 0))
        assert not is_strictly_overdemanded(g, [1], [0, 1])

    def test_dummy_not_allowed(self, ex2):
        g = build_choice_graphs(ex2, prices(0))
        with pytest.raises(MarketUsageError):
            is_strictly_overdemanded(g, [DUMMY], [0])

    def test_capacity(self, ex2):
        g = build_choice_graphs(ex2, prices(0))
        with pytest.raises(CapacityError):
            is_strictly_overdemanded(g, [1], [0], max_items=0)
