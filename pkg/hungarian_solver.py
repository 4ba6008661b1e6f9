#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
改进的匈牙利方法: 带保留价与最高价的 bidder-optimal 稳定匹配

两个引擎:
  solve_simple  逐行照搬伪代码: 每次内循环都重建首选图与交错树
  solve_fast    三个偏移堆 (H_out / H_res / H_max) + 位向量维护 T、S、F_p(T);
                仅在 "特殊执行" (增广之后、到达保留价或最高价) 时整体重建,
                其余步骤按广度优先增量扩展交错树

两个引擎给出完全相同的价格、效用、匹配与事件序列。

用法:
  from hungarian_solver import solve
  result = solve(inst, engine="fast", trace=True)
  result.outcome.prices, result.counters, result.trace
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from choice_graph import (
    AlternatingTree, augment, bidder_choices, build_choice_graphs, grow_alternating_tree,
    maximal_alternating_tree, owners_of,
)
from market_core import (
    DUMMY, INF, MarketInstance, MarketUsageError, Outcome, SolverInvariantError,
)
from offset_heap import OffsetHeap

logger = logging.getLogger("hungarian_solver")

ENGINES = ("simple", "fast")

KIND_OUT = "out"
KIND_RES = "res"
KIND_MAX = "max"


# ============================================================================
# 事件
# ============================================================================

@dataclass(frozen=True)
class TreeBuilt:
    """第 3 行的交错树没有增广路, 价格上升开始。"""
    root: int
    T: Tuple[int, ...]
    S: Tuple[int, ...]
    prices: Tuple[Fraction, ...]


@dataclass(frozen=True)
class DeltaComputed:
    delta: Fraction
    kinds: Tuple[str, ...]
    delta_out: Union[Fraction, float]
    delta_res: Union[Fraction, float]
    delta_max: Union[Fraction, float]


@dataclass(frozen=True)
class PricesRaised:
    items: Tuple[int, ...]
    delta: Fraction
    prices: Tuple[Fraction, ...]


@dataclass(frozen=True)
class EdgeDropped:
    bidder: int
    item: int
    price: Fraction


@dataclass(frozen=True)
class Augmented:
    """root 沿 path 增广后得到物品 item。"""
    bidder: int
    item: int
    path: Tuple[Tuple[int, int], ...]
    prices: Tuple[Fraction, ...]


TraceEvent = Union[TreeBuilt, DeltaComputed, PricesRaised, EdgeDropped, Augmented]


def describe_event(ev: TraceEvent) -> str:
    """单行文本, 供 CLI --trace 使用。"""
    if isinstance(ev, TreeBuilt):
        return f"TreeBuilt root={ev.root} T={list(ev.T)} S={list(ev.S)}"
    if isinstance(ev, DeltaComputed):
        return (f"DeltaComputed delta={ev.delta} kinds={','.join(ev.kinds)} "
                f"(out={ev.delta_out}, res={ev.delta_res}, max={ev.delta_max})")
    if isinstance(ev, PricesRaised):
        return f"PricesRaised items={list(ev.items)} delta={ev.delta}"
    if isinstance(ev, EdgeDropped):
        return f"EdgeDropped ({ev.bidder}, {ev.item}) at price {ev.price}"
    if isinstance(ev, Augmented):
        return f"Augmented bidder={ev.bidder} item={ev.item} path={list(ev.path)}"
    return repr(ev)


# ============================================================================
# 计数器 / 状态
# ============================================================================

@dataclass
class SolverCounters:
    outer_iterations: int = 0
    inner_iterations: int = 0
    special_executions: int = 0
    heap_removals: int = 0
    max_removals_between_specials: int = 0

    def as_dict(self) -> Dict[str, int]:
        return {
            "outer_iterations": self.outer_iterations,
            "inner_iterations": self.inner_iterations,
            "special_executions": self.special_executions,
            "heap_removals": self.heap_removals,
            "max_removals_between_specials": self.max_removals_between_specials,
        }


@dataclass
class DeltaBreakdown:
    delta_out: Union[Fraction, float] = INF
    delta_res: Union[Fraction, float] = INF
    delta_max: Union[Fraction, float] = INF
    argmin_pairs: Dict[str, List[Tuple[int, int]]] = field(default_factory=dict)

    @property
    def delta(self):
        return min(self.delta_out, self.delta_res, self.delta_max)

    @property
    def kinds(self) -> Tuple[str, ...]:
        d = self.delta
        if d == INF:
            return ()
        return tuple(kind for kind, value in ((KIND_OUT, self.delta_out),
                                              (KIND_RES, self.delta_res),
                                              (KIND_MAX, self.delta_max)) if value == d)

    def to_event(self) -> DeltaComputed:
        return DeltaComputed(self.delta, self.kinds, self.delta_out, self.delta_res, self.delta_max)


@dataclass
class SolverState:
    """
    求解过程中的可变状态。

    matching[i] 为 None 表示 bidder i 尚未分配 (区别于分配到虚拟物品 0)。
    utilities 缺省时按当前价格计算。
    """
    inst: MarketInstance
    prices: List[Fraction]
    matching: List[Optional[int]]
    T: List[int] = field(default_factory=list)
    S: List[int] = field(default_factory=list)
    utilities: Optional[List] = None
    counters: SolverCounters = field(default_factory=SolverCounters)
    trace: Optional[List[TraceEvent]] = None

    def __post_init__(self):
        self.prices = [Fraction(p) for p in self.prices]
        if self.utilities is None:
            self.refresh_utilities()

    @classmethod
    def initial(cls, inst: MarketInstance, trace: bool = False) -> "SolverState":
        return cls(inst, [Fraction(0)] * (inst.k + 1), [None] * inst.n,
                   trace=[] if trace else None)

    def refresh_utilities(self):
        self.utilities = [bidder_choices(self.inst, i, self.prices)[2] for i in range(self.inst.n)]

    def next_unassigned(self) -> Optional[int]:
        return next((i for i, j in enumerate(self.matching) if j is None), None)

    def emit(self, event: TraceEvent):
        if self.trace is not None:
            self.trace.append(event)

    def to_outcome(self) -> Outcome:
        if any(j is None for j in self.matching):
            raise SolverInvariantError("结束时仍有未分配的 bidder")
        return Outcome(self.inst, tuple(self.matching), tuple(self.prices))


@dataclass
class SolveResult:
    outcome: Outcome
    counters: SolverCounters
    engine: str
    trace: Optional[List[TraceEvent]] = None


def _outer_guard(inst: MarketInstance) -> int:
    return inst.n * (inst.k + 1) + 1


def _special_guard(inst: MarketInstance) -> int:
    return 3 * inst.n * (inst.k + 1) + 1


def _bump_outer(counters: SolverCounters, inst: MarketInstance):
    counters.outer_iterations += 1
    if counters.outer_iterations > _outer_guard(inst):
        raise SolverInvariantError(
            f"外循环次数超过上限 {_outer_guard(inst)}: 实现存在缺陷")


def _bump_special(counters: SolverCounters, inst: MarketInstance):
    counters.special_executions += 1
    if counters.special_executions > _special_guard(inst):
        raise SolverInvariantError(
            f"特殊执行次数超过上限 {_special_guard(inst)}: 实现存在缺陷")


# ============================================================================
# 参考引擎
# ============================================================================

def compute_delta(state: SolverState) -> DeltaBreakdown:
    """
    δ_out = min_{i∈T, j∉F_p(i)} (u_i + p_j − v_{i,j})
    δ_res = min_{i∈T, j∈F_p(i)\\F̃_p(i)} (r_{i,j} − p_j)
    δ_max = min_{i∈T, j∈F_p(i)} (m_{i,j} − p_j)

    效用为 −inf 的对 (p_j ≥ m_{i,j}) 不参与 δ_out: 价格只升不降, 它们不会再成为首选。

    Raises:
        SolverInvariantError: δ = +inf
    """
    if not state.T:
        raise MarketUsageError("T 为空, 无法计算 δ")
    inst, p = state.inst, state.prices
    d = DeltaBreakdown(argmin_pairs={KIND_OUT: [], KIND_RES: [], KIND_MAX: []})
    candidates = []
    for i in sorted(state.T):
        fp, feasible, best = bidder_choices(inst, i, p)
        fp_set = set(fp)
        for j in range(inst.k + 1):
            if j in fp_set:
                if j not in feasible:
                    candidates.append((KIND_RES, inst.r[i][j] - p[j], (i, j)))
                if inst.m[i][j] != INF:
                    candidates.append((KIND_MAX, inst.m[i][j] - p[j], (i, j)))
            elif p[j] < inst.m[i][j]:
                candidates.append((KIND_OUT, best + p[j] - inst.v[i][j], (i, j)))
    for kind, value, _ in candidates:
        attr = f"delta_{kind}"
        setattr(d, attr, min(getattr(d, attr), value))
    for kind, value, pair in candidates:
        if value == getattr(d, f"delta_{kind}"):
            d.argmin_pairs[kind].append(pair)
    if d.delta == INF:
        raise SolverInvariantError(f"δ = +inf (T={sorted(state.T)}): 虚拟物品应保证 δ 有限")
    if d.delta <= 0:
        raise SolverInvariantError(f"δ = {d.delta} 非正 (T={sorted(state.T)})")
    return d


def apply_price_update(state: SolverState, d: DeltaBreakdown) -> SolverState:
    """
    F_p(T) 上的价格加 δ; 重算全部效用; μ := μ ∩ F̃_p。

    就地修改并返回 state; 被移除的边记为 EdgeDropped (按 bidder 升序)。
    """
    delta = d.delta
    if not (0 < delta < INF):
        raise SolverInvariantError(f"非法的 δ: {delta}")
    inst = state.inst
    raised = sorted({j for i in state.T for j in bidder_choices(inst, i, state.prices)[0]})
    if DUMMY in raised:
        raise SolverInvariantError("虚拟物品不应出现在 F_p(T) 中")
    for j in raised:
        state.prices[j] += delta
    state.emit(PricesRaised(tuple(raised), delta, tuple(state.prices)))
    logger.debug(f"价格上升 δ={delta} 物品={raised}")

    state.refresh_utilities()
    for i, j in enumerate(state.matching):
        if j is None:
            continue
        if j not in bidder_choices(inst, i, state.prices)[1]:
            state.matching[i] = None
            state.emit(EdgeDropped(i, j, state.prices[j]))
            logger.debug(f"移除边 ({i}, {j}), 价格 {state.prices[j]}")
    return state


def _run_simple(inst: MarketInstance, trace: bool) -> SolveResult:
    state = SolverState.initial(inst, trace)
    counters = state.counters
    while True:
        root = state.next_unassigned()
        if root is None:
            break
        _bump_outer(counters, inst)
        tree = _simple_tree(state, root)
        if tree.augmenting_path is None:
            state.emit(TreeBuilt(root, tuple(tree.T), tuple(tree.S), tuple(state.prices)))
            _bump_special(counters, inst)
        while tree.augmenting_path is None:
            state.T, state.S = list(tree.T), list(tree.S)
            d = compute_delta(state)
            counters.inner_iterations += 1
            state.emit(d.to_event())
            apply_price_update(state, d)
            tree = _simple_tree(state, root)
            if tree.augmenting_path is None and set(d.kinds) & {KIND_RES, KIND_MAX}:
                _bump_special(counters, inst)
        _finish_augment(state, root, tree.augmenting_path)
    state.refresh_utilities()
    return SolveResult(state.to_outcome(), counters, "simple", state.trace)


def _simple_tree(state: SolverState, root: int) -> AlternatingTree:
    g = build_choice_graphs(state.inst, state.prices)
    return maximal_alternating_tree(g, state.matching, root)


def _finish_augment(state: SolverState, root: int, path):
    state.matching = list(augment(state.matching, path))
    state.emit(Augmented(root, path[0][1], tuple(path), tuple(state.prices)))
    logger.debug(f"增广: bidder {root} → 物品 {path[0][1]} (路径长度 {len(path)})")


def solve_simple(inst: MarketInstance) -> Outcome:
    """参考引擎, 返回 bidder-optimal 的稳定结果 (价格为最小稳定价格)。"""
    return _run_simple(inst, trace=False).outcome


# ============================================================================
# 快速引擎
# ============================================================================

class FastEngine:
    """
    偏移堆实现。

    堆中条目 (i, j), i ∈ T:
      H_out: j ∉ F_p(i) 且 p_j < m_{i,j}, 有效值 u_i + p_j − v_{i,j}
      H_res: j ∈ F_p(i) \\ F̃_p(i), 有效值 r_{i,j} − p_j
      H_max: j ∈ F_p(i) 且 m_{i,j} 有限, 有效值 m_{i,j} − p_j
    每次价格上升对三个堆统一 shift(δ)。
    H_out 中 j ∈ F_p(T) 的条目真实值不变, 存储值因此可能偏小; 取最小值前逐个校正。
    """

    def __init__(self, inst: MarketInstance, trace: bool = False):
        self.inst = inst
        self.state = SolverState.initial(inst, trace)
        self.counters = self.state.counters
        self.owners: Dict[int, int] = {}
        self._since_special = 0
        self._reset_phase()

    # ── 阶段数据 ───────────────────────────────────────────────

    def _reset_phase(self):
        self.tree: Optional[AlternatingTree] = None
        self.in_T = [False] * self.inst.n
        self.in_S = [False] * (self.inst.k + 1)
        self.in_FpT = [False] * (self.inst.k + 1)
        self.FpT: List[int] = []
        self.fp: Dict[int, set] = {}
        self.u: Dict[int, Fraction] = {}
        self.h_out = OffsetHeap(KIND_OUT)
        self.h_res = OffsetHeap(KIND_RES)
        self.h_max = OffsetHeap(KIND_MAX)

    def _count_removal(self, count: int = 1):
        self.counters.heap_removals += count
        self._since_special += count

    def _special(self, tree: AlternatingTree):
        """整体重建 T、S、F_p(T) 与三个堆。"""
        _bump_special(self.counters, self.inst)
        self.counters.max_removals_between_specials = max(
            self.counters.max_removals_between_specials, self._since_special)
        self._since_special = 0
        self._reset_phase()
        self.tree = tree
        for j in tree.S:
            self.in_S[j] = True
        for i in tree.T:
            self._enter_T(i)

    def _enter_T(self, i: int):
        inst, p = self.inst, self.state.prices
        fp, _, best = bidder_choices(inst, i, p)
        self.in_T[i] = True
        self.fp[i] = set(fp)
        self.u[i] = best
        for j in range(inst.k + 1):
            if j in self.fp[i]:
                self._add_first_choice(i, j)
            elif p[j] < inst.m[i][j]:
                self.h_out.push(best + p[j] - inst.v[i][j], (i, j))

    def _add_first_choice(self, i: int, j: int) -> bool:
        """登记 j ∈ F_p(i); 返回该边是否可行 (p_j ≥ r_{i,j})。"""
        inst, p = self.inst, self.state.prices
        self.fp[i].add(j)
        if not self.in_FpT[j]:
            self.in_FpT[j] = True
            self.FpT.append(j)
        if inst.m[i][j] != INF:
            self.h_max.push(inst.m[i][j] - p[j], (i, j))
        if p[j] < inst.r[i][j]:
            self.h_res.push(inst.r[i][j] - p[j], (i, j))
            return False
        return True

    def _out_gap(self, i: int, j: int):
        """H_out 条目的真实值; 条目已失效时返回 None。"""
        inst, p = self.inst, self.state.prices
        if j in self.fp[i] or p[j] >= inst.m[i][j]:
            return None
        return self.u[i] + p[j] - inst.v[i][j]

    def _out_min(self):
        while self.h_out:
            stored, (i, j) = self.h_out.peek()
            true = self._out_gap(i, j)
            if true is None:
                self.h_out.pop()
                self._count_removal()
            elif true != stored:
                self.h_out.pop()
                self.h_out.push(true, (i, j))
            else:
                return stored
        return INF

    # ── 主循环 ─────────────────────────────────────────────────

    def run(self) -> SolveResult:
        state, inst = self.state, self.inst
        while True:
            root = state.next_unassigned()
            if root is None:
                break
            _bump_outer(self.counters, inst)
            tree = self._fresh_tree(root)
            if tree.augmenting_path is None:
                state.emit(TreeBuilt(root, tuple(tree.T), tuple(tree.S), tuple(state.prices)))
                self._special(tree)
                tree = self._inner_loop(root)
            _finish_augment(state, root, tree.augmenting_path)
            self._sync_owners()
        self.counters.max_removals_between_specials = max(
            self.counters.max_removals_between_specials, self._since_special)
        state.refresh_utilities()
        return SolveResult(state.to_outcome(), self.counters, "fast", state.trace)

    def _inner_loop(self, root: int) -> AlternatingTree:
        state = self.state
        while True:
            d = DeltaBreakdown(self._out_min(), self.h_res.min_value(), self.h_max.min_value())
            if d.delta == INF:
                raise SolverInvariantError(f"δ = +inf (root={root}): 虚拟物品应保证 δ 有限")
            self.counters.inner_iterations += 1
            state.emit(d.to_event())
            self._raise(d.delta)
            if set(d.kinds) & {KIND_RES, KIND_MAX}:
                for heap in (self.h_out, self.h_res, self.h_max):
                    self._count_removal(len(heap.pop_at_most(0)))
                tree = self._fresh_tree(root)
                if tree.augmenting_path is not None:
                    return tree
                self._special(tree)
            elif self._absorb_new_first_choices():
                tree = self._fresh_tree(root)
                if tree.augmenting_path is None:
                    raise SolverInvariantError("增量扩展发现增广路, 但重建的交错树没有")
                return tree

    def _raise(self, delta):
        state, inst = self.state, self.inst
        if self.in_FpT[DUMMY]:
            raise SolverInvariantError("虚拟物品不应出现在 F_p(T) 中")
        items = sorted(self.FpT)
        for j in items:
            state.prices[j] += delta
        for i in self.u:
            self.u[i] -= delta
        for heap in (self.h_out, self.h_res, self.h_max):
            heap.shift(delta)
        state.emit(PricesRaised(tuple(items), delta, tuple(state.prices)))

        dropped = []
        for j in items:
            o = self.owners.get(j)
            if o is not None and j not in bidder_choices(inst, o, state.prices)[1]:
                dropped.append((o, j))
        for o, j in sorted(dropped):
            state.matching[o] = None
            del self.owners[j]
            state.emit(EdgeDropped(o, j, state.prices[j]))

    def _absorb_new_first_choices(self) -> bool:
        """
        处理 H_out 中降为 0 的条目: 这些物品成为新的首选。
        可行的新边从所在 bidder 出发广度优先扩展交错树; 遇到终点返回 True。
        """
        joined = []
        while self.h_out and self.h_out.min_value() <= 0:
            _, (i, j) = self.h_out.pop()
            true = self._out_gap(i, j)
            if true is None:
                self._count_removal()
            elif true > 0:
                self.h_out.push(true, (i, j))
            else:
                self._count_removal()
                joined.append((i, j))
        pending = [(i, j) for i, j in sorted(joined) if self._add_first_choice(i, j)]

        tree = self.tree
        for i, j in pending:
            if self.in_S[j]:
                continue
            owner = None if j == DUMMY else self.owners.get(j)
            if owner is None:
                return True
            self.in_S[j] = True
            tree.S.append(j)
            tree.item_parent[j] = i
            if self.in_T[owner]:
                continue
            tree.T.append(owner)
            tree.bidder_parent[owner] = j
            self._enter_T(owner)
            grow_alternating_tree(tree.root, self._feasible_of, self.owners.get,
                                  tree=tree, frontier=[owner])
            for j2 in tree.S:
                self.in_S[j2] = True
            for b in tree.T:
                if not self.in_T[b]:
                    self._enter_T(b)
            if tree.augmenting_path is not None:
                return True
        return False

    def _feasible_of(self, b: int):
        return bidder_choices(self.inst, b, self.state.prices)[1]

    def _fresh_tree(self, root: int) -> AlternatingTree:
        return grow_alternating_tree(root, self._feasible_of, self.owners.get)

    def _sync_owners(self):
        self.owners = owners_of(self.state.matching)


def solve_fast(inst: MarketInstance) -> Outcome:
    """快速引擎; 结果与 solve_simple 完全一致。"""
    return FastEngine(inst).run().outcome


# ============================================================================
# 统一入口
# ============================================================================

def solve(inst: MarketInstance, engine: str = "simple", trace: bool = False) -> SolveResult:
    """
    Args:
        engine: "simple" 或 "fast"
        trace: 是否记录事件序列
    """
    if engine == "simple":
        result = _run_simple(inst, trace)
    elif engine == "fast":
        result = FastEngine(inst, trace).run()
    else:
        raise MarketUsageError(f"未知引擎: {engine} (可选 {', '.join(ENGINES)})")
    logger.debug(f"{engine} 引擎完成: {result.counters.as_dict()}")
    return result


def solver_trace(inst: MarketInstance, engine: str = "simple") -> List[TraceEvent]:
    """求解并返回事件序列。"""
    return solve(inst, engine=engine, trace=True).trace
