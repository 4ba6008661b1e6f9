#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
市场核心: 精确有理数的双边匹配市场模型

包含:
  - MarketInstance: 估值 v、保留价 r、最高价 m 三个矩阵 (列 0 为虚拟物品 j0)
  - Outcome: 匹配 + 价格 + 派生效用
  - utility / check_feasible / check_stable / check_relaxed_stable / dominates

用法:
  from market_core import MarketInstance, Outcome, check_stable
  inst = MarketInstance.from_real_items(v=[[10], [10]], m=[[5], [5]])
  out = Outcome.from_matching(inst, [], [5])
  report = check_stable(inst, out)
  print(report.ok)

约定:
  bidder 下标从 0 开始; 物品 0 为虚拟物品, 真实物品为 1..k。
  所有金额均为 fractions.Fraction; +∞ / −∞ 用 math.inf 表示。
"""

import math
from dataclasses import dataclass, field, InitVar
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

INF = math.inf
DUMMY = 0

Number = Union[int, Fraction, str]
Ceiling = Union[Fraction, float]           # Fraction 或 +inf
ExtendedUtility = Union[Fraction, float]   # Fraction 或 -inf


# ============================================================================
# 异常
# ============================================================================

class MarketUsageError(ValueError):
    """调用方违反前置条件 (下标越界、形状不符、非法参数)。"""


class CapacityError(MarketUsageError):
    """穷举类操作超出容量上限。"""


class SolverInvariantError(RuntimeError):
    """求解器内部不变式失败, 说明实现存在缺陷。"""


# ============================================================================
# 数值转换
# ============================================================================

def to_rat(x: Number) -> Fraction:
    """把 int / Fraction / "a/b" 字符串转为 Fraction; 拒绝浮点与无穷。"""
    if isinstance(x, bool):
        raise MarketUsageError(f"不是有理数: {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise MarketUsageError(f"无法解析有理数 {x!r}: {e}") from e
    raise MarketUsageError(f"不是有理数: {x!r}")


def to_ceiling(x: Union[Number, float]) -> Ceiling:
    """最高价: 有理数或 +inf ("inf" 字符串亦可)。"""
    if isinstance(x, float) and x == INF:
        return INF
    if isinstance(x, str) and x.strip().lower() in ("inf", "+inf"):
        return INF
    return to_rat(x)


def is_integral(x) -> bool:
    return x == INF or x == -INF or (isinstance(x, Fraction) and x.denominator == 1)


# ============================================================================
# 市场实例
# ============================================================================

Matrix = Tuple[Tuple, ...]


@dataclass(frozen=True)
class MarketInstance:
    """
    n 个 bidder × (k+1) 个物品的市场。

    v, r, m 均为 n×(k+1) 矩阵, 第 0 列为虚拟物品 (v=0, r=0, m=inf)。
    items 为真实物品数 k; 有 bidder 时可省略 (由列数推出), n = 0 时靠它保留 k。
    构造后不可变, 可在线程 / 进程间共享。
    """
    v: Matrix
    r: Matrix
    m: Matrix
    items: Optional[int] = None

    def __post_init__(self):
        rows = (len(self.v), len(self.r), len(self.m))
        if len(set(rows)) != 1:
            raise MarketUsageError(f"矩阵行数不一致: {rows}")
        widths = {len(row) for mat in (self.v, self.r, self.m) for row in mat}
        if len(widths) > 1:
            raise MarketUsageError(f"矩阵列数不一致: {sorted(widths)}")
        if 0 in widths:
            raise MarketUsageError("缺少虚拟物品列")
        k = widths.pop() - 1 if widths else (self.items or 0)
        if self.items is not None and self.items != k:
            raise MarketUsageError(f"items = {self.items} 与矩阵列数推出的 k = {k} 不符")
        if k < 0:
            raise MarketUsageError(f"物品数为负: {k}")
        object.__setattr__(self, "items", k)
        for i in range(len(self.v)):
            if self.v[i][DUMMY] != 0 or self.r[i][DUMMY] != 0 or self.m[i][DUMMY] != INF:
                raise MarketUsageError(f"bidder {i} 的虚拟物品列必须为 (0, 0, inf)")
            for j, rij in enumerate(self.r[i]):
                if rij < 0:
                    raise MarketUsageError(f"保留价为负: r[{i}][{j}] = {rij}")

    # ── 构造 ──────────────────────────────────────────────────

    @classmethod
    def from_real_items(cls, v: Sequence[Sequence[Number]],
                        r: Optional[Sequence[Sequence[Number]]] = None,
                        m: Optional[Sequence[Sequence[Union[Number, float]]]] = None,
                        ) -> "MarketInstance":
        """
        由不含虚拟列的 n×k 矩阵构造, 自动补上虚拟列。

        Args:
            v: 估值矩阵
            r: 保留价矩阵, 缺省全 0
            m: 最高价矩阵, 缺省全 inf
        """
        n = len(v)
        k = len(v[0]) if n else 0
        if r is None:
            r = [[0] * k for _ in range(n)]
        if m is None:
            m = [[INF] * k for _ in range(n)]
        for name, mat in (("v", v), ("r", r), ("m", m)):
            if len(mat) != n or any(len(row) != k for row in mat):
                raise MarketUsageError(f"矩阵 {name} 形状应为 {n}×{k}")
        return cls(
            v=tuple((Fraction(0),) + tuple(to_rat(x) for x in row) for row in v),
            r=tuple((Fraction(0),) + tuple(to_rat(x) for x in row) for row in r),
            m=tuple((INF,) + tuple(to_ceiling(x) for x in row) for row in m),
        )

    @classmethod
    def sparse(cls, n: int, k: int,
               v: Optional[Dict[Tuple[int, int], Number]] = None,
               r: Optional[Dict[Tuple[int, int], Number]] = None,
               m: Optional[Dict[Tuple[int, int], Union[Number, float]]] = None,
               ) -> "MarketInstance":
        """按 {(i, j): 值} 给出非缺省项; 未列出的对取 v=0, r=0, m=inf。j 从 1 起。"""
        dense_v = [[0] * k for _ in range(n)]
        dense_r = [[0] * k for _ in range(n)]
        dense_m = [[INF] * k for _ in range(n)]
        for target, entries in ((dense_v, v), (dense_r, r), (dense_m, m)):
            for (i, j), x in (entries or {}).items():
                if not (0 <= i < n and 1 <= j <= k):
                    raise MarketUsageError(f"下标越界: ({i}, {j})")
                target[i][j - 1] = x
        return cls.from_real_items(dense_v, dense_r, dense_m)

    def replace_entry(self, field_name: str, i: int, j: int, value) -> "MarketInstance":
        """返回只修改一个元素的新实例 (field_name ∈ v/r/m)。"""
        self._check_pair(i, j)
        if j == DUMMY:
            raise MarketUsageError("虚拟物品列不可修改")
        value = to_ceiling(value) if field_name == "m" else to_rat(value)
        mats = {"v": self.v, "r": self.r, "m": self.m}
        if field_name not in mats:
            raise MarketUsageError(f"未知字段: {field_name}")
        rows = [list(row) for row in mats[field_name]]
        rows[i][j] = value
        mats[field_name] = tuple(tuple(row) for row in rows)
        return MarketInstance(**mats, items=self.k)

    # ── 查询 ──────────────────────────────────────────────────

    @property
    def n(self) -> int:
        return len(self.v)

    @property
    def k(self) -> int:
        return self.items

    def is_integral(self) -> bool:
        return all(is_integral(x) for mat in (self.v, self.r, self.m)
                   for row in mat for x in row)

    def max_finite_entry(self) -> Fraction:
        """v, r, m 中最大的有限元素 (无元素时为 0)。"""
        values = [x for mat in (self.v, self.r, self.m) for row in mat
                  for x in row if x != INF]
        return max(values, default=Fraction(0))

    def _check_pair(self, i: int, j: int):
        if not (0 <= i < self.n):
            raise MarketUsageError(f"bidder 下标越界: {i} (n={self.n})")
        if not (0 <= j <= self.k):
            raise MarketUsageError(f"物品下标越界: {j} (k={self.k})")


# ============================================================================
# 效用
# ============================================================================

def utility(inst: MarketInstance, i: int, j: int, pj) -> ExtendedUtility:
    """u_{i,j}(p_j) = v_{i,j} − p_j  若 p_j < m_{i,j}, 否则 −inf。"""
    inst._check_pair(i, j)
    if pj < inst.m[i][j]:
        return inst.v[i][j] - pj
    return -INF


def relaxed_utility(inst: MarketInstance, i: int, j: int, pj) -> ExtendedUtility:
    """松弛稳定性所用的效用: 最高价为闭区间 (p_j ≤ m_{i,j} 时仍可购买)。"""
    inst._check_pair(i, j)
    if pj <= inst.m[i][j]:
        return inst.v[i][j] - pj
    return -INF


# ============================================================================
# 结果
# ============================================================================

@dataclass(frozen=True)
class Outcome:
    """
    匹配 + 价格。utilities 由 assignment 和 prices 派生, 不可单独设置。

    Args:
        inst: 用于计算效用的实例 (不保存)
        assignment: 长度 n, bidder → 物品下标 (0 = 虚拟物品)
        prices: 长度 k+1, prices[0] 必须为 0
    """
    inst: InitVar[MarketInstance]
    assignment: Tuple[int, ...]
    prices: Tuple[Fraction, ...]
    utilities: Tuple[ExtendedUtility, ...] = field(init=False)

    def __post_init__(self, inst: MarketInstance):
        object.__setattr__(self, "assignment", tuple(int(j) for j in self.assignment))
        object.__setattr__(self, "prices", tuple(to_rat(p) for p in self.prices))
        if len(self.assignment) != inst.n or len(self.prices) != inst.k + 1:
            raise MarketUsageError(
                f"结果形状不符: assignment={len(self.assignment)}, "
                f"prices={len(self.prices)}, 实例为 {inst.n}×{inst.k}")
        if self.prices[DUMMY] != 0:
            raise MarketUsageError("虚拟物品价格必须为 0")
        seen = set()
        for i, j in enumerate(self.assignment):
            if not (0 <= j <= inst.k):
                raise MarketUsageError(f"bidder {i} 分配到不存在的物品 {j}")
            if j != DUMMY:
                if j in seen:
                    raise MarketUsageError(f"物品 {j} 被分配给多个 bidder")
                seen.add(j)
        object.__setattr__(self, "utilities", tuple(
            Fraction(0) if j == DUMMY else utility(inst, i, j, self.prices[j])
            for i, j in enumerate(self.assignment)))

    @classmethod
    def from_matching(cls, inst: MarketInstance, pairs: Iterable[Tuple[int, int]],
                      real_prices: Sequence[Number]) -> "Outcome":
        """由匹配对 [(i, j)] 与真实物品价格 (长度 k) 构造; 未出现的 bidder 分到虚拟物品。"""
        assignment = [DUMMY] * inst.n
        for i, j in pairs:
            inst._check_pair(i, j)
            assignment[i] = j
        return cls(inst, tuple(assignment), (Fraction(0),) + tuple(to_rat(p) for p in real_prices))

    @property
    def matching(self) -> List[Tuple[int, int]]:
        """非虚拟的匹配对, 按 bidder 排序。"""
        return [(i, j) for i, j in enumerate(self.assignment) if j != DUMMY]

    def relaxed_utilities(self, inst: MarketInstance) -> Tuple[ExtendedUtility, ...]:
        return tuple(
            Fraction(0) if j == DUMMY else relaxed_utility(inst, i, j, self.prices[j])
            for i, j in enumerate(self.assignment))


# ============================================================================
# 判定报告
# ============================================================================

@dataclass(frozen=True)
class Violation:
    clause: str
    bidder: Optional[int]
    item: Optional[int]
    detail: str

    def __str__(self):
        where = f"({self.bidder}, {self.item})" if self.bidder is not None else f"item {self.item}"
        return f"[{self.clause}] {where}: {self.detail}"


@dataclass
class Report:
    kind: str
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, clause: str, bidder: Optional[int], item: Optional[int], detail: str):
        self.violations.append(Violation(clause, bidder, item, detail))

    def pairs(self, clause: Optional[str] = None) -> List[Tuple[int, int]]:
        """违反项中的 (bidder, item) 对, 可按条款过滤。"""
        return [(v.bidder, v.item) for v in self.violations
                if (clause is None or v.clause == clause) and v.bidder is not None]

    def lines(self) -> List[str]:
        return [str(v) for v in self.violations]


def _check_shapes(inst: MarketInstance, out: Outcome):
    if len(out.assignment) != inst.n or len(out.prices) != inst.k + 1:
        raise MarketUsageError("结果与实例形状不符")


def check_feasible(inst: MarketInstance, out: Outcome) -> Report:
    """
    可行性: (1) u_i ≥ 0; (2) p_{j0} = 0 且 p_j ≥ 0; (3) 匹配对满足 r ≤ p < m。
    """
    _check_shapes(inst, out)
    report = Report("feasible")
    for i, u in enumerate(out.utilities):
        if u < 0:
            report.add("1", i, out.assignment[i], f"效用为负: {u}")
    if out.prices[DUMMY] != 0:
        report.add("2", None, DUMMY, f"虚拟物品价格非零: {out.prices[DUMMY]}")
    for j in range(1, inst.k + 1):
        if out.prices[j] < 0:
            report.add("2", None, j, f"价格为负: {out.prices[j]}")
    for i, j in out.matching:
        p = out.prices[j]
        if not (inst.r[i][j] <= p < inst.m[i][j]):
            report.add("3", i, j, f"价格 {p} 不在 [{inst.r[i][j]}, {inst.m[i][j]}) 内")
    return report


def check_stable(inst: MarketInstance, out: Outcome) -> Report:
    """稳定性: 可行, 且对所有 (i, j) 有 u_i ≥ u_{i,j}(p_j)。违反项列出阻塞对。"""
    report = check_feasible(inst, out)
    report.kind = "stable"
    for i in range(inst.n):
        for j in range(inst.k + 1):
            alt = utility(inst, i, j, out.prices[j])
            if out.utilities[i] < alt:
                report.add("blocking", i, j, f"u_i = {out.utilities[i]} < {alt}")
    return report


def check_relaxed_stable(inst: MarketInstance, out: Outcome) -> Report:
    """
    松弛稳定性: 对所有 (i, j), (a) u_i ≥ v_{i,j} − max(p_j, r_{i,j}) 或 (b) p_j ≥ m_{i,j}。

    u_i 按闭区间最高价计算 (见 relaxed_utility), 与该定义的出处一致。
    """
    _check_shapes(inst, out)
    report = Report("relaxed")
    us = out.relaxed_utilities(inst)
    for i in range(inst.n):
        for j in range(inst.k + 1):
            pj = out.prices[j]
            if pj >= inst.m[i][j]:
                continue
            bound = inst.v[i][j] - max(pj, inst.r[i][j])
            if us[i] < bound:
                report.add("relaxed", i, j, f"u_i = {us[i]} < {bound}")
    return report


# ============================================================================
# 效用比较
# ============================================================================

class Dominance(Enum):
    GREATER_OR_EQUAL = "greater_or_equal"
    LESS_OR_EQUAL = "less_or_equal"
    INCOMPARABLE = "incomparable"


def dominates(a: Outcome, b: Outcome) -> Dominance:
    """逐 bidder 比较效用。a 与 b 相同时返回 GREATER_OR_EQUAL。"""
    return compare_profiles(a.utilities, b.utilities)


def compare_profiles(ua: Sequence, ub: Sequence) -> Dominance:
    if len(ua) != len(ub):
        raise MarketUsageError("效用向量长度不同")
    if all(x >= y for x, y in zip(ua, ub)):
        return Dominance.GREATER_OR_EQUAL
    if all(x <= y for x, y in zip(ua, ub)):
        return Dominance.LESS_OR_EQUAL
    return Dominance.INCOMPARABLE
