#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
谎报实验室: 在受限实例族上搜索有利可图的单点谎报

受限条件:
  (i)   所有保留价为 0
  (ii)  每个 bidder 的最高价对全部真实物品相同: m_{i,j} = m_i
  (iii) 不同 bidder 的最高价两两不同

搜索方式:
  按 (n, k, 最高价组合, 估值) 由小到大枚举实例, 对每个实例尝试
  "某 bidder 把某一物品的估值改报为网格中的另一个值", 以真实估值计算谎报后的效用。
  实例按序号分发到进程池, imap 保序, 取第一个命中 → 结果与并行度无关。

用法:
  from strategy_lab import restricted_family, find_profitable_misreport
  family = restricted_family(3, 3, 3, maxima=(1, 2, 3), min_bidders=3, min_items=3)
  hit = find_profitable_misreport(family, grid=range(3), workers=4)

已知最小的反例需要 3 个物品: 2 件物品时 n ≤ 3 的小整数实例未发现获利谎报。
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing import Pool
from typing import Iterable, Iterator, Optional, Sequence, Tuple

from tqdm import tqdm

from hungarian_solver import solve
from market_core import DUMMY, INF, MarketInstance, MarketUsageError, Number, to_ceiling, to_rat, utility

logger = logging.getLogger("strategy_lab")


# ============================================================================
# 结果类型
# ============================================================================

@dataclass(frozen=True)
class MisreportResult:
    """coordinate = (bidder, item); 只记录严格获利的谎报。instance 为真实市场。"""
    bidder: int
    coordinate: Tuple[int, int]
    reported_value: Fraction
    true_utility_honest: Fraction
    true_utility_lying: Fraction
    instance: Optional[MarketInstance] = field(default=None, compare=False)
    index: Optional[int] = field(default=None, compare=False)

    def __post_init__(self):
        if not self.true_utility_lying > self.true_utility_honest:
            raise MarketUsageError("谎报结果必须严格获利")

    @property
    def gap(self) -> Fraction:
        return self.true_utility_lying - self.true_utility_honest

    def describe(self) -> str:
        i, j = self.coordinate
        return (f"bidder {i} 把 v[{i}][{j}] 从 {self.instance.v[i][j] if self.instance else '?'} "
                f"谎报为 {self.reported_value}: 真实效用 {self.true_utility_honest} → "
                f"{self.true_utility_lying} (+{self.gap})")


# ============================================================================
# 谎报下的效用
# ============================================================================

def _check_same_except(inst: MarketInstance, i: int, reported: MarketInstance):
    if (reported.n, reported.k) != (inst.n, inst.k):
        raise MarketUsageError("谎报实例形状与真实实例不符")
    for b in range(inst.n):
        if b == i:
            continue
        if (inst.v[b], inst.r[b], inst.m[b]) != (reported.v[b], reported.r[b], reported.m[b]):
            raise MarketUsageError(f"谎报实例只能修改 bidder {i} 的行, bidder {b} 的行不同")


def utility_under_report(inst: MarketInstance, i: int, reported: MarketInstance):
    """求解谎报后的市场, 再用真实估值评估 bidder i 在所得物品与价格下的效用。"""
    inst._check_pair(i, DUMMY)
    _check_same_except(inst, i, reported)
    out = solve(reported, engine="simple").outcome
    j = out.assignment[i]
    return utility(inst, i, j, out.prices[j])


def honest_utilities(inst: MarketInstance) -> Tuple[Fraction, ...]:
    return solve(inst, engine="simple").outcome.utilities


# ============================================================================
# 受限实例族
# ============================================================================

def check_restricted(inst: MarketInstance) -> None:
    """
    检查 (i) 保留价全 0, (ii) 每个 bidder 最高价恒定, (iii) 最高价两两不同。

    Raises:
        MarketUsageError: 任一条件不满足
    """
    maxima = []
    for i in range(inst.n):
        if any(x != 0 for x in inst.r[i]):
            raise MarketUsageError(f"bidder {i} 存在非零保留价")
        real = set(inst.m[i][1:])
        if len(real) > 1:
            raise MarketUsageError(f"bidder {i} 的最高价随物品变化: {sorted(map(str, real))}")
        if real:
            maxima.append(real.pop())
    if len(set(maxima)) != len(maxima):
        raise MarketUsageError(f"最高价存在重复: {[str(x) for x in maxima]}")


def _maxima_candidates(max_value: int) -> Tuple:
    return tuple(Fraction(x) for x in range(1, max_value + 1)) + (INF,)


def _family_candidates(max_value: int, maxima: Optional[Sequence[Number]]) -> Tuple:
    if maxima is None:
        return _maxima_candidates(max_value)
    candidates = tuple(to_ceiling(x) for x in maxima)
    if len(set(candidates)) != len(candidates):
        raise MarketUsageError(f"最高价候选存在重复: {[str(x) for x in candidates]}")
    return candidates


def restricted_family(bidders: int, items: int, max_value: int,
                      maxima: Optional[Sequence[Number]] = None,
                      min_bidders: int = 2, min_items: int = 1) -> Iterator[MarketInstance]:
    """
    小者优先枚举受限实例: n = min_bidders..bidders, k = min_items..items。

    最高价按升序分配给 bidder (交换 bidder 只会置换结果), 估值取 {0..max_value}。
    maxima 给出最高价候选集, 缺省为 {1..max_value, inf}。
    """
    candidates = _family_candidates(max_value, maxima)
    for n in range(min_bidders, bidders + 1):
        for k in range(min_items, items + 1):
            for combo in itertools.combinations(sorted(candidates), n):
                m = [[cap] * k for cap in combo]
                for flat in itertools.product(range(max_value + 1), repeat=n * k):
                    v = [flat[i * k:(i + 1) * k] for i in range(n)]
                    yield MarketInstance.from_real_items(v, m=m)


def restricted_family_size(bidders: int, items: int, max_value: int,
                           maxima: Optional[Sequence[Number]] = None,
                           min_bidders: int = 2, min_items: int = 1) -> int:
    """restricted_family 的成员数, 供进度条使用。"""
    c = len(_family_candidates(max_value, maxima))
    return sum(math.comb(c, n) * (max_value + 1) ** (n * k)
               for n in range(min_bidders, bidders + 1)
               for k in range(min_items, items + 1))


def position_auction(values: Sequence[Number], click_rates: Sequence[Number],
                     caps: Sequence[Number]) -> MarketInstance:
    """
    v_{i,j} = values_i · click_rates_j, r = 0, m_{i,j} = caps_i。

    Raises:
        MarketUsageError: click_rates 不是非增, 或 caps 有重复 / 长度不符
    """
    rates = [to_rat(a) for a in click_rates]
    if any(a < b for a, b in zip(rates, rates[1:])):
        raise MarketUsageError("click_rates 必须非增")
    if len(caps) != len(values):
        raise MarketUsageError("caps 与 values 长度不符")
    v = [[to_rat(x) * a for a in rates] for x in values]
    m = [[cap] * len(rates) for cap in caps]
    inst = MarketInstance.from_real_items(v, m=m)
    check_restricted(inst)
    return inst


def multiplicative_family(bidders: int, items: int, max_value: int,
                          max_rate: int = 3) -> Iterator[MarketInstance]:
    """v_{i,j} = v_i · α_j 的受限子族 (α 非增, 取 1..max_rate)。"""
    for n in range(2, bidders + 1):
        for k in range(1, items + 1):
            for combo in itertools.combinations(_maxima_candidates(max_value), n):
                for rates in itertools.combinations_with_replacement(range(max_rate, 0, -1), k):
                    for values in itertools.product(range(max_value + 1), repeat=n):
                        yield position_auction(values, rates, combo)


# ============================================================================
# 搜索
# ============================================================================

def misreports_of(inst: MarketInstance, grid: Sequence[int],
                 bidders: Optional[Sequence[int]] = None) -> Iterator[Tuple[int, int, Fraction]]:
    """按 (bidder, 物品, 报告值) 字典序列出单点谎报; bidders 缺省为全部。"""
    for i in (sorted(bidders) if bidders is not None else range(inst.n)):
        for j in range(1, inst.k + 1):
            for x in grid:
                x = Fraction(x)
                if x != inst.v[i][j]:
                    yield i, j, x


def search_instance(inst: MarketInstance, grid: Sequence[int], index: Optional[int] = None,
                    bidders: Optional[Sequence[int]] = None) -> Optional[MisreportResult]:
    """单个实例上的第一个获利谎报。"""
    honest = honest_utilities(inst)
    for i, j, x in misreports_of(inst, grid, bidders):
        lying = utility_under_report(inst, i, inst.replace_entry("v", i, j, x))
        if lying > honest[i]:
            return MisreportResult(i, (i, j), x, honest[i], lying, instance=inst, index=index)
    return None


def _search_task(task):
    index, inst, grid = task
    return search_instance(inst, grid, index)


def find_profitable_misreport(family: Iterable[MarketInstance], grid: Iterable[int],
                              workers: int = 0, total: Optional[int] = None,
                              progress: bool = False) -> Optional[MisreportResult]:
    """
    在实例族上搜索, 返回族序中第一个实例的第一个获利谎报; 无则 None。

    每个实例先经 check_restricted 校验。workers > 0 时使用进程池, imap 保序。

    Raises:
        MarketUsageError: 族中实例违反受限条件
    """
    grid = tuple(int(x) for x in grid)

    def tasks():
        for index, inst in enumerate(family):
            check_restricted(inst)
            yield index, inst, grid

    bar_opts = dict(total=total, desc="谎报搜索", unit="inst", disable=not progress)
    if workers <= 0:
        for task in tqdm(tasks(), **bar_opts):
            hit = _search_task(task)
            if hit is not None:
                logger.info(f"✅ 第 {hit.index} 个实例命中: {hit.describe()}")
                return hit
        logger.info("📊 搜索完毕, 未发现获利谎报")
        return None

    with Pool(processes=workers) as pool:
        for hit in tqdm(pool.imap(_search_task, tasks(), chunksize=64), **bar_opts):
            if hit is not None:
                pool.terminate()
                logger.info(f"✅ 第 {hit.index} 个实例命中: {hit.describe()}")
                return hit
    logger.info("📊 搜索完毕, 未发现获利谎报")
    return None


def replay(result: MisreportResult) -> Tuple[Fraction, Fraction]:
    """独立重算 (诚实效用, 谎报效用), 用于回归 fixture。"""
    inst = result.instance
    i, j = result.coordinate
    honest = honest_utilities(inst)[i]
    lying = utility_under_report(inst, i, inst.replace_entry("v", i, j, result.reported_value))
    return honest, lying
