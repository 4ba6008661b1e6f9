#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
穷举 oracle: 小规模整数实例的基准答案

  enumerate_stable        整数价格网格 {0..bound}^k 上的全部稳定结果
  assert_bidder_optimal   检查给定结果是否稳定、价格逐点最小、效用逐人最大
  relaxed_pareto_frontier 松弛稳定结果中效用不被支配的那些
  vcg_utilities           无保留价 / 最高价时的 VCG 效用 (穷举最大权分配)

容量上限: n ≤ 5, k ≤ 3, 且数据全为整数 (最高价可为 inf)。
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from choice_graph import build_choice_graphs
from market_core import (
    DUMMY, INF, CapacityError, Dominance, MarketInstance, MarketUsageError, Outcome, Report,
    check_relaxed_stable, check_stable, compare_profiles,
)

logger = logging.getLogger("oracle")

MAX_BIDDERS = 5
MAX_ITEMS = 3


@dataclass
class StableSet:
    outcomes: List[Outcome]
    price_bound: int
    per_bidder_max_utility: Tuple[Fraction, ...]
    min_prices: Optional[Tuple[Fraction, ...]] = None
    price_vectors: List[Tuple[Fraction, ...]] = field(default_factory=list)


# ============================================================================
# 前置检查
# ============================================================================

def _check_capacity(inst: MarketInstance, max_bidders: int, max_items: int):
    if inst.n > max_bidders or inst.k > max_items:
        raise CapacityError(
            f"oracle 容量为 n ≤ {max_bidders}, k ≤ {max_items}; 实例为 {inst.n}×{inst.k}")
    if not inst.is_integral():
        raise MarketUsageError("oracle 只接受整数数据 (请先统一放大清除分母)")


def default_bound(inst: MarketInstance) -> int:
    """v、r、m 中最大的有限元素 (至少为 0)。"""
    return max(0, int(inst.max_finite_entry()))


def _resolve_bound(inst: MarketInstance, bound: Optional[int]) -> int:
    minimum = default_bound(inst)
    if bound is None:
        return minimum
    if bound < minimum:
        raise MarketUsageError(f"bound = {bound} 小于最大有限元素 {minimum}")
    return int(bound)


def price_grid(k: int, bound: int) -> Iterator[Tuple[Fraction, ...]]:
    """{0..bound}^k, 前置虚拟物品价格 0。"""
    for combo in itertools.product(range(bound + 1), repeat=k):
        yield (Fraction(0),) + tuple(Fraction(x) for x in combo)


def _assignments(options: Sequence[Sequence[int]]) -> Iterator[Tuple[int, ...]]:
    """每个 bidder 从 options[i] 中选一个物品, 真实物品互不重复 (回溯)。"""
    n = len(options)
    chosen = [DUMMY] * n
    used = set()

    def backtrack(i):
        if i == n:
            yield tuple(chosen)
            return
        for j in options[i]:
            if j != DUMMY and j in used:
                continue
            chosen[i] = j
            if j != DUMMY:
                used.add(j)
            yield from backtrack(i + 1)
            if j != DUMMY:
                used.discard(j)

    yield from backtrack(0)


# ============================================================================
# 稳定结果
# ============================================================================

def enumerate_stable(inst: MarketInstance, bound: Optional[int] = None,
                     max_bidders: int = MAX_BIDDERS, max_items: int = MAX_ITEMS) -> StableSet:
    """
    在整数价格网格上枚举全部稳定结果。

    每个价格向量下, 稳定结果恰为 F̃_p 内的分配; 逐个再用 check_stable 复核。

    Raises:
        CapacityError: 超出容量
        MarketUsageError: 非整数数据或 bound 过小
    """
    _check_capacity(inst, max_bidders, max_items)
    bound = _resolve_bound(inst, bound)
    outcomes: List[Outcome] = []
    vectors = []
    for p in price_grid(inst.k, bound):
        g = build_choice_graphs(inst, p)
        if any(not opts for opts in g.fp_feasible):
            continue
        found = False
        for assignment in _assignments(g.fp_feasible):
            out = Outcome(inst, assignment, p)
            if check_stable(inst, out).ok:
                outcomes.append(out)
                found = True
        if found:
            vectors.append(p)

    best = tuple(max((o.utilities[i] for o in outcomes), default=Fraction(0))
                 for i in range(inst.n))
    min_prices = None
    if vectors:
        pointwise = tuple(min(v[j] for v in vectors) for j in range(inst.k + 1))
        if pointwise in set(vectors):
            min_prices = pointwise
    logger.debug(f"oracle: bound={bound}, 稳定结果 {len(outcomes)} 个, 价格向量 {len(vectors)} 个")
    return StableSet(outcomes, bound, best, min_prices, vectors)


def assert_bidder_optimal(inst: MarketInstance, out: Outcome, s: StableSet) -> Report:
    """
    零违反当且仅当: out 稳定; out.prices 逐点不高于每个枚举到的稳定价格向量;
    out.utilities 等于 per_bidder_max_utility。
    """
    report = check_stable(inst, out)
    report.kind = "bidder_optimal"
    for q in s.price_vectors:
        for j in range(1, inst.k + 1):
            if out.prices[j] > q[j]:
                report.add("minimal_prices", None, j,
                           f"价格 {out.prices[j]} 高于稳定价格向量 {[str(x) for x in q[1:]]}")
                break
    for i, (u, best) in enumerate(zip(out.utilities, s.per_bidder_max_utility)):
        if u != best:
            report.add("optimal_utility", i, out.assignment[i], f"效用 {u} ≠ 最优 {best}")
    return report


# ============================================================================
# 松弛稳定性
# ============================================================================

def _relaxed_options(inst: MarketInstance, p: Sequence) -> List[List[int]]:
    """松弛可行的选项: 虚拟物品, 以及满足 r ≤ p ≤ m 且 v − p ≥ 0 的物品。"""
    options = []
    for i in range(inst.n):
        row = [DUMMY]
        for j in range(1, inst.k + 1):
            if inst.r[i][j] <= p[j] <= inst.m[i][j] and inst.v[i][j] - p[j] >= 0:
                row.append(j)
        options.append(row)
    return options


def relaxed_pareto_frontier(inst: MarketInstance, bound: Optional[int] = None,
                            max_bidders: int = MAX_BIDDERS,
                            max_items: int = MAX_ITEMS) -> List[Outcome]:
    """
    枚举松弛稳定结果, 返回效用向量不被支配者 (每个效用向量保留首个结果)。

    效用按闭区间最高价计算, 见 Outcome.relaxed_utilities。
    """
    _check_capacity(inst, max_bidders, max_items)
    bound = _resolve_bound(inst, bound)
    by_profile: Dict[Tuple, Outcome] = {}
    for p in price_grid(inst.k, bound):
        for assignment in _assignments(_relaxed_options(inst, p)):
            out = Outcome(inst, assignment, p)
            if not check_relaxed_stable(inst, out).ok:
                continue
            by_profile.setdefault(out.relaxed_utilities(inst), out)

    profiles = list(by_profile)
    frontier = []
    for prof in profiles:
        dominated = any(other != prof and compare_profiles(other, prof) == Dominance.GREATER_OR_EQUAL
                        for other in profiles)
        if not dominated:
            frontier.append(by_profile[prof])
    logger.debug(f"松弛前沿: {len(frontier)} 个 (共 {len(profiles)} 个效用向量)")
    return frontier


# ============================================================================
# VCG
# ============================================================================

def max_weight(inst: MarketInstance, bidders: Sequence[int]) -> Fraction:
    """给定 bidder 子集的最大总估值 (每个 bidder 至多一件真实物品, 可不分配)。"""
    options = [[DUMMY] + [j for j in range(1, inst.k + 1) if inst.v[i][j] > 0] for i in bidders]
    best = Fraction(0)
    for assignment in _assignments(options):
        total = sum((inst.v[i][j] for i, j in zip(bidders, assignment)), Fraction(0))
        best = max(best, total)
    return best


def vcg_utilities(inst: MarketInstance, max_bidders: int = MAX_BIDDERS,
                  max_items: int = MAX_ITEMS) -> Tuple[Fraction, ...]:
    """
    无保留价、无最高价时每个 bidder 的 VCG 效用 W(N) − W(N \\ {i})。

    Raises:
        MarketUsageError: 存在正保留价或有限最高价
    """
    if inst.n > max_bidders or inst.k > max_items:
        raise CapacityError(f"VCG 穷举容量为 n ≤ {max_bidders}, k ≤ {max_items}")
    for i in range(inst.n):
        for j in range(1, inst.k + 1):
            if inst.r[i][j] != 0 or inst.m[i][j] != INF:
                raise MarketUsageError("VCG 对照只适用于 r = 0 且 m = inf 的实例")
    everyone = list(range(inst.n))
    total = max_weight(inst, everyone)
    return tuple(total - max_weight(inst, [b for b in everyone if b != i]) for i in everyone)
