#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
随机市场批量校验

生成器 (可复现, 每个实例独立种子 [seed, index]):
  v ~ {0..max_value} 均匀
  r 以概率 reserve_probability 取 {0..max_value}, 否则 0
  m 以权重 inf_weight 取 inf, 否则取 {1..max_value}
取值范围小, 重复值很常见, 用来覆盖非一般位置的市场。

每个实例检查:
  - 两个引擎的价格 / 匹配 / 效用 / 事件序列完全一致
  - 结果稳定
  - trace 中价格逐点不减、虚拟物品价格恒为 0、整数输入价格恒为整数
  - 每条 EdgeDropped 都对应价格到达最高价或边离开 F̃_p, 同一 (i, j) 至多移除一次
  - 计数器满足外循环 ≤ n(k+1)、特殊执行 ≤ 3n(k+1)、相邻特殊执行间堆删除 ≤ 3(k+1)²
  - (可选) oracle 确认 bidder-optimal, 且稳定价格向量存在逐点最小者
"""

import logging
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from choice_graph import bidder_choices
from hungarian_solver import (
    Augmented, EdgeDropped, PricesRaised, SolveResult, TreeBuilt, describe_event, solve,
)
from market_core import DUMMY, INF, MarketInstance, check_stable, is_integral
from oracle import MAX_BIDDERS, MAX_ITEMS, assert_bidder_optimal, enumerate_stable

logger = logging.getLogger("market_fuzzer")


@dataclass
class FuzzParams:
    seed: int = 1
    count: int = 100
    bidders: int = 4
    items: int = 3
    max_value: int = 6
    reserve_probability: float = 0.5
    inf_weight: float = 0.5
    with_oracle: bool = False
    oracle_bidders: int = MAX_BIDDERS
    oracle_items: int = MAX_ITEMS


@dataclass
class FuzzCase:
    index: int
    instance: MarketInstance
    failures: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass
class FuzzSummary:
    params: FuzzParams
    checked: int = 0
    failed: List[FuzzCase] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failed


# ============================================================================
# 生成器
# ============================================================================

def generate_instance(rng: np.random.Generator, bidders: int, items: int, max_value: int,
                      reserve_probability: float = 0.5, inf_weight: float = 0.5) -> MarketInstance:
    shape = (bidders, items)
    v = rng.integers(0, max_value + 1, size=shape)
    r = np.where(rng.random(shape) < reserve_probability,
                 rng.integers(0, max_value + 1, size=shape), 0)
    caps = rng.integers(1, max(max_value, 1) + 1, size=shape)
    use_inf = rng.random(shape) < inf_weight
    m = [[INF if use_inf[i, j] else int(caps[i, j]) for j in range(items)] for i in range(bidders)]
    if bidders == 0:
        return MarketInstance((), (), (), items=items)
    return MarketInstance.from_real_items(v.tolist(), r.tolist(), m)


def instance_at(params: FuzzParams, index: int) -> MarketInstance:
    """第 index 个实例, 与并行度无关。"""
    rng = np.random.default_rng([params.seed, index])
    return generate_instance(rng, params.bidders, params.items, params.max_value,
                             params.reserve_probability, params.inf_weight)


# ============================================================================
# 单实例检查
# ============================================================================

def _check_trace(inst: MarketInstance, result: SolveResult) -> List[str]:
    failures = []
    integral = inst.is_integral()
    current = tuple([0] * (inst.k + 1))
    dropped = set()
    for ev in result.trace or []:
        if isinstance(ev, EdgeDropped):
            i, j = ev.bidder, ev.item
            if (i, j) in dropped:
                failures.append(f"{result.engine}: 边 ({i}, {j}) 被重复移除")
            dropped.add((i, j))
            feasible = bidder_choices(inst, i, current)[1]
            if not (ev.price >= inst.m[i][j] or j not in feasible):
                failures.append(f"{result.engine}: {describe_event(ev)} 既未到达最高价也未离开 F̃_p")
            continue
        if not isinstance(ev, (TreeBuilt, PricesRaised, Augmented)):
            continue
        prices = ev.prices
        if prices[DUMMY] != 0:
            failures.append(f"{result.engine}: 虚拟物品价格非零 {prices[DUMMY]}")
        if any(a < b for a, b in zip(prices, current)):
            failures.append(f"{result.engine}: 价格下降 {list(map(str, current))} → {list(map(str, prices))}")
        if integral and not all(is_integral(p) for p in prices):
            failures.append(f"{result.engine}: 整数实例出现非整数价格 {list(map(str, prices))}")
        current = prices
    return failures


def _check_counters(inst: MarketInstance, result: SolveResult) -> List[str]:
    c = result.counters
    n, k1 = inst.n, inst.k + 1
    failures = []
    if c.outer_iterations > n * k1:
        failures.append(f"{result.engine}: 外循环 {c.outer_iterations} > n(k+1) = {n * k1}")
    if c.special_executions > 3 * n * k1:
        failures.append(f"{result.engine}: 特殊执行 {c.special_executions} > 3n(k+1) = {3 * n * k1}")
    if c.max_removals_between_specials > 3 * k1 * k1:
        failures.append(f"{result.engine}: 相邻特殊执行间堆删除 "
                        f"{c.max_removals_between_specials} > 3(k+1)² = {3 * k1 * k1}")
    return failures


def check_instance(inst: MarketInstance, with_oracle: bool = False,
                   max_bidders: int = MAX_BIDDERS, max_items: int = MAX_ITEMS) -> List[str]:
    """返回失败描述列表; 空列表表示全部通过。max_bidders / max_items 为 oracle 容量。"""
    simple = solve(inst, engine="simple", trace=True)
    fast = solve(inst, engine="fast", trace=True)
    failures = []
    a, b = simple.outcome, fast.outcome
    if (a.assignment, a.prices, a.utilities) != (b.assignment, b.prices, b.utilities):
        failures.append(f"引擎结果不一致: simple {a.assignment}/{list(map(str, a.prices))} "
                        f"vs fast {b.assignment}/{list(map(str, b.prices))}")
    if simple.trace != fast.trace:
        failures.append("引擎事件序列不一致")
    failures.extend(check_stable(inst, a).lines())
    for result in (simple, fast):
        failures.extend(_check_trace(inst, result))
    failures.extend(_check_counters(inst, fast))
    if with_oracle:
        s = enumerate_stable(inst, max_bidders=max_bidders, max_items=max_items)
        if s.min_prices is None:
            failures.append("oracle: 稳定价格向量中不存在逐点最小者")
        failures.extend(assert_bidder_optimal(inst, a, s).lines())
    return failures


def _check_task(task) -> FuzzCase:
    params, index = task
    inst = instance_at(params, index)
    return FuzzCase(index, inst, check_instance(inst, params.with_oracle,
                                               params.oracle_bidders, params.oracle_items))


# ============================================================================
# 批量
# ============================================================================

def run_fuzz(params: FuzzParams, workers: int = 0, progress: bool = False) -> FuzzSummary:
    """
    校验 params.count 个随机实例; 结果按序号排列, 与完成顺序无关。

    Args:
        workers: 进程数, 0 为串行
    """
    summary = FuzzSummary(params)
    tasks = [(params, index) for index in range(params.count)]
    bar_opts = dict(total=params.count, desc="fuzz", unit="inst", disable=not progress)
    if workers > 0 and params.count > 0:
        with Pool(processes=workers) as pool:
            cases = list(tqdm(pool.imap(_check_task, tasks, chunksize=16), **bar_opts))
    else:
        cases = [_check_task(t) for t in tqdm(tasks, **bar_opts)]
    for case in cases:
        summary.checked += 1
        if not case.ok:
            summary.failed.append(case)
            logger.debug(f"❌ 实例 #{case.index}: {case.failures[0]}")
    logger.debug(f"📊 fuzz 完成: {summary.checked} 个, 失败 {len(summary.failed)} 个")
    return summary


def first_failure(summary: FuzzSummary) -> Optional[FuzzCase]:
    return summary.failed[0] if summary.failed else None
