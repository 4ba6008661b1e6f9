#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
广义线性效用的约简

效用 û_{i,j}(p̂_j) = v̂_{i,j} − c_i·c_j·p̂_j (p̂_j < m̂_{i,j}) 约简为标准市场:
  v = v̂ / c_i,  r = c_j · r̂,  m = c_j · m̂
求解后提升回原市场:
  p̂_j = p_j / c_j,  û_i = c_i · u_i,  匹配不变

另含:
  - 外部选项 o_i: 虚拟物品给 bidder i 带来 o_i, 等价于真实物品估值整体减去 o_i
  - scale_to_integers: 统一放大清除分母, 使 oracle 可用于约简后的实例
"""

import logging
import math
from dataclasses import dataclass, field, InitVar
from fractions import Fraction
from typing import Optional, Sequence, Tuple

from market_core import (
    DUMMY, INF, MarketInstance, MarketUsageError, Number, Outcome, Report, to_rat,
)

logger = logging.getLogger("reduction")


# ============================================================================
# 广义实例
# ============================================================================

@dataclass(frozen=True)
class GeneralizedInstance:
    """base 为 (v̂, r̂, m̂); item_scale 长度 k+1, 虚拟物品缩放固定为 1。"""
    base: MarketInstance
    bidder_scale: Tuple[Fraction, ...]
    item_scale: Tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "bidder_scale", tuple(to_rat(c) for c in self.bidder_scale))
        object.__setattr__(self, "item_scale", tuple(to_rat(c) for c in self.item_scale))
        if len(self.bidder_scale) != self.base.n:
            raise MarketUsageError(f"bidder_scale 长度应为 {self.base.n}")
        if len(self.item_scale) != self.base.k + 1:
            raise MarketUsageError(f"item_scale 长度应为 {self.base.k + 1} (含虚拟物品)")
        if self.item_scale[DUMMY] != 1:
            raise MarketUsageError("虚拟物品的缩放因子必须为 1")
        for name, scales in (("bidder_scale", self.bidder_scale), ("item_scale", self.item_scale)):
            for idx, c in enumerate(scales):
                if c <= 0:
                    raise MarketUsageError(f"{name}[{idx}] = {c} 必须为正")

    @classmethod
    def create(cls, base: MarketInstance,
               bidder_scale: Optional[Sequence[Number]] = None,
               item_scale: Optional[Sequence[Number]] = None) -> "GeneralizedInstance":
        """item_scale 只给真实物品 (长度 k); 缺省的缩放全为 1。"""
        bidder_scale = bidder_scale if bidder_scale is not None else [1] * base.n
        item_scale = item_scale if item_scale is not None else [1] * base.k
        if len(item_scale) != base.k:
            raise MarketUsageError(f"item_scale 长度应为 {base.k}")
        return cls(base, tuple(bidder_scale), (Fraction(1),) + tuple(to_rat(c) for c in item_scale))


def generalized_utility(g: GeneralizedInstance, i: int, j: int, pj) -> object:
    """v̂_{i,j} − c_i·c_j·p̂_j 若 p̂_j < m̂_{i,j}, 否则 −inf。"""
    base = g.base
    base._check_pair(i, j)
    if pj < base.m[i][j]:
        return base.v[i][j] - g.bidder_scale[i] * g.item_scale[j] * pj
    return -INF


@dataclass(frozen=True)
class GeneralizedOutcome:
    """广义市场中的结果; utilities 由广义效用函数派生。"""
    g: InitVar[GeneralizedInstance]
    assignment: Tuple[int, ...]
    prices: Tuple[Fraction, ...]
    utilities: Tuple = field(init=False)

    def __post_init__(self, g: GeneralizedInstance):
        object.__setattr__(self, "prices", tuple(to_rat(p) for p in self.prices))
        if len(self.assignment) != g.base.n or len(self.prices) != g.base.k + 1:
            raise MarketUsageError("结果与广义实例形状不符")
        object.__setattr__(self, "utilities", tuple(
            Fraction(0) if j == DUMMY else generalized_utility(g, i, j, self.prices[j])
            for i, j in enumerate(self.assignment)))

    @property
    def matching(self):
        return [(i, j) for i, j in enumerate(self.assignment) if j != DUMMY]


# ============================================================================
# 约简 / 提升
# ============================================================================

def reduce(g: GeneralizedInstance) -> MarketInstance:
    """v = v̂/c_i, r = c_j·r̂, m = c_j·m̂ (inf 保持 inf)。"""
    base = g.base
    v = tuple(tuple(x / g.bidder_scale[i] for x in row) for i, row in enumerate(base.v))
    r = tuple(tuple(x * g.item_scale[j] for j, x in enumerate(row)) for row in base.r)
    m = tuple(tuple(INF if x == INF else x * g.item_scale[j] for j, x in enumerate(row))
              for row in base.m)
    return MarketInstance(v, r, m, items=base.k)


def lift_outcome(g: GeneralizedInstance, out: Outcome) -> GeneralizedOutcome:
    """p̂_j = p_j / c_j; 匹配不变; û_i = c_i·u_i 由广义效用直接算出。"""
    prices = tuple(p / c for p, c in zip(out.prices, g.item_scale))
    return GeneralizedOutcome(g, out.assignment, prices)


def check_generalized_stable(g: GeneralizedInstance, out: GeneralizedOutcome) -> Report:
    """在广义效用下直接检查可行性与稳定性 (条款编号同 check_feasible / check_stable)。"""
    base = g.base
    if len(out.assignment) != base.n or len(out.prices) != base.k + 1:
        raise MarketUsageError("结果与广义实例形状不符")
    report = Report("generalized_stable")
    for i, u in enumerate(out.utilities):
        if u < 0:
            report.add("1", i, out.assignment[i], f"效用为负: {u}")
    if out.prices[DUMMY] != 0:
        report.add("2", None, DUMMY, "虚拟物品价格非零")
    for j in range(1, base.k + 1):
        if out.prices[j] < 0:
            report.add("2", None, j, f"价格为负: {out.prices[j]}")
    for i, j in out.matching:
        p = out.prices[j]
        if not (base.r[i][j] <= p < base.m[i][j]):
            report.add("3", i, j, f"价格 {p} 不在 [{base.r[i][j]}, {base.m[i][j]}) 内")
    for i in range(base.n):
        for j in range(base.k + 1):
            alt = generalized_utility(g, i, j, out.prices[j])
            if out.utilities[i] < alt:
                report.add("blocking", i, j, f"u_i = {out.utilities[i]} < {alt}")
    return report


# ============================================================================
# 外部选项
# ============================================================================

def with_outside_options(inst: MarketInstance, options: Sequence[Number]) -> MarketInstance:
    """真实物品估值 v_{i,j} −= o_i; 要求 o_i ≥ 0。"""
    options = [to_rat(o) for o in options]
    if len(options) != inst.n:
        raise MarketUsageError(f"outside_options 长度应为 {inst.n}")
    if any(o < 0 for o in options):
        raise MarketUsageError("外部选项不能为负")
    v = tuple(tuple(x if j == DUMMY else x - options[i] for j, x in enumerate(row))
              for i, row in enumerate(inst.v))
    return MarketInstance(v, inst.r, inst.m, items=inst.k)


def lift_outside_options(options: Sequence[Number], out: Outcome) -> Tuple:
    """原市场中的效用 u_i + o_i。"""
    return tuple(u + to_rat(o) for u, o in zip(out.utilities, options))


# ============================================================================
# 清除分母
# ============================================================================

def scale_to_integers(inst: MarketInstance) -> Tuple[MarketInstance, int]:
    """v、r、m 统一乘以全部分母的最小公倍数; 返回 (整数实例, 倍数)。"""
    factor = 1
    for mat in (inst.v, inst.r, inst.m):
        for row in mat:
            for x in row:
                if x != INF:
                    factor = factor * x.denominator // math.gcd(factor, x.denominator)
    if factor == 1:
        return inst, 1
    scaled = [tuple(tuple(x if x == INF else x * factor for x in row) for row in mat)
              for mat in (inst.v, inst.r, inst.m)]
    logger.debug(f"公分母 {factor}: 实例整体放大为整数")
    return MarketInstance(*scaled, items=inst.k), factor
