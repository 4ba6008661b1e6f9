#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
首选图与交错树

  - build_choice_graphs: 给定价格, 计算每个 bidder 的首选物品集合 F_p
    以及其中满足保留价的可行首选集合 F̃_p
  - maximal_alternating_tree: 在 F̃_p 上从未匹配 bidder 出发做广度优先生长
  - augment: 沿增广路翻转匹配
  - is_strictly_overdemanded: 穷举子集检验严格过需求 (测试辅助)

增广路的表示:
  [(b0, j1), (b1, j2), ..., (bt, j_end)]
  只列出 "将被加入匹配" 的边; b_s 是 j_s 的当前持有者, 中间的匹配边 (b_s, j_s) 隐含。
  b0 为未匹配的根, j_end 为虚拟物品或未匹配物品。
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from market_core import (
    DUMMY, CapacityError, ExtendedUtility, MarketInstance, MarketUsageError, utility,
)

MAX_SUBSET_ITEMS = 20

Assignment = Tuple[int, ...]
PathEdges = List[Tuple[int, int]]


# ============================================================================
# 首选图
# ============================================================================

@dataclass(frozen=True)
class ChoiceGraphs:
    """fp[i] / fp_feasible[i] 为升序物品元组; best_utility[i] 为 i 能达到的最大效用。"""
    fp: Tuple[Tuple[int, ...], ...]
    fp_feasible: Tuple[Tuple[int, ...], ...]
    best_utility: Tuple[ExtendedUtility, ...]

    def demanders(self, items: Iterable[int], bidders: Iterable[int]) -> Set[int]:
        """F̃_p(R) ∩ T: bidders 中至少有一条可行首选边落在 items 上的那些。"""
        items = set(items)
        return {i for i in bidders if items.intersection(self.fp_feasible[i])}


def check_prices(inst: MarketInstance, p: Sequence) -> None:
    if len(p) != inst.k + 1:
        raise MarketUsageError(f"价格向量长度应为 {inst.k + 1}, 实际 {len(p)}")
    if p[DUMMY] != 0:
        raise MarketUsageError("虚拟物品价格必须为 0")
    if any(pj < 0 for pj in p):
        raise MarketUsageError("价格不能为负")


def bidder_choices(inst: MarketInstance, i: int, p: Sequence
                   ) -> Tuple[Tuple[int, ...], Tuple[int, ...], ExtendedUtility]:
    """单个 bidder 的 (F_p(i), F̃_p(i), 最大效用)。"""
    utils = [utility(inst, i, j, p[j]) for j in range(inst.k + 1)]
    best = max(utils)
    fp = tuple(j for j, u in enumerate(utils) if u == best)
    feasible = tuple(j for j in fp if p[j] >= inst.r[i][j])
    return fp, feasible, best


def build_choice_graphs(inst: MarketInstance, p: Sequence) -> ChoiceGraphs:
    """
    在价格 p 下构建 F_p 与 F̃_p。

    虚拟物品在 p_{j0}=0 时效用为 0, 因此 best_utility 恒 ≥ 0 且 fp[i] 非空。
    """
    check_prices(inst, p)
    rows = [bidder_choices(inst, i, p) for i in range(inst.n)]
    return ChoiceGraphs(
        fp=tuple(r[0] for r in rows),
        fp_feasible=tuple(r[1] for r in rows),
        best_utility=tuple(r[2] for r in rows),
    )


# ============================================================================
# 交错树
# ============================================================================

@dataclass
class AlternatingTree:
    """
    以 root 为根的交错树。

    T / S 按发现顺序排列; bidder_parent[b] 为 b 入树所经的 (匹配) 物品,
    item_parent[j] 为把 j 加入树的 bidder。
    augmenting_path 为空时 (T, S) 即极大树。
    """
    root: int
    T: List[int] = field(default_factory=list)
    S: List[int] = field(default_factory=list)
    bidder_parent: Dict[int, Optional[int]] = field(default_factory=dict)
    item_parent: Dict[int, int] = field(default_factory=dict)
    augmenting_path: Optional[PathEdges] = None

    def path_to(self, bidder: int, item: int) -> PathEdges:
        """从根到 bidder 的树路径, 再接上边 (bidder, item)。"""
        path = [(bidder, item)]
        b = bidder
        while b != self.root:
            j = self.bidder_parent[b]
            b = self.item_parent[j]
            path.append((b, j))
        path.reverse()
        return path


def grow_alternating_tree(root: int,
                          feasible_of: Callable[[int], Sequence[int]],
                          owner_of: Callable[[int], Optional[int]],
                          tree: Optional[AlternatingTree] = None,
                          frontier: Optional[List[int]] = None) -> AlternatingTree:
    """
    分层广度优先生长交错树。

    同一层中若出现多个终点 (虚拟物品或未匹配物品), 取 (物品下标, bidder 下标) 最小者。
    传入 tree 与 frontier 时从已有树继续生长 (快速引擎的增量扩展)。

    Args:
        root: 未匹配的根 bidder
        feasible_of: bidder → 升序可行首选物品
        owner_of: 物品 → 当前持有者 (未匹配返回 None)
    """
    if tree is None:
        tree = AlternatingTree(root=root, T=[root], bidder_parent={root: None})
        frontier = [root]
    in_s = set(tree.S)
    in_t = set(tree.T)
    while frontier:
        terminals = []
        next_layer = []
        for b in sorted(frontier):
            for j in feasible_of(b):
                if j in in_s:
                    continue
                owner = None if j == DUMMY else owner_of(j)
                if owner is None:
                    terminals.append((j, b))
                    continue
                in_s.add(j)
                tree.S.append(j)
                tree.item_parent[j] = b
                if owner not in in_t:
                    in_t.add(owner)
                    tree.T.append(owner)
                    tree.bidder_parent[owner] = j
                    next_layer.append(owner)
        if terminals:
            j, b = min(terminals)
            tree.augmenting_path = tree.path_to(b, j)
            return tree
        frontier = next_layer
    return tree


def owners_of(matching: Sequence[int]) -> Dict[int, int]:
    return {j: i for i, j in enumerate(matching) if j is not None and j != DUMMY}


def maximal_alternating_tree(g: ChoiceGraphs, matching: Sequence[int], root: int) -> AlternatingTree:
    """在 F̃_p 上以未匹配 bidder root 为根求极大交错树 (或最短增广路)。"""
    if not (0 <= root < len(matching)):
        raise MarketUsageError(f"根下标越界: {root}")
    if matching[root] not in (None, DUMMY):
        raise MarketUsageError(f"根 bidder {root} 已匹配到物品 {matching[root]}")
    owners = owners_of(matching)
    return grow_alternating_tree(root, lambda b: g.fp_feasible[b], owners.get)


def augment(matching: Sequence[int], path: PathEdges) -> Assignment:
    """
    沿增广路翻转匹配: 路径上的每个 bidder 改持下一条边的物品。

    Raises:
        MarketUsageError: 路径不是从未匹配 bidder 出发的合法交错路
    """
    if not path:
        raise MarketUsageError("增广路为空")
    result = list(matching)
    owners = owners_of(matching)
    root, _ = path[0]
    if not (0 <= root < len(result)) or result[root] not in (None, DUMMY):
        raise MarketUsageError(f"增广路起点 {root} 不是未匹配 bidder")
    for (_, j), (nb, _) in zip(path, path[1:]):
        if j == DUMMY or owners.get(j) != nb:
            raise MarketUsageError(f"物品 {j} 不属于 bidder {nb}, 路径不交错")
    last = path[-1][1]
    if last != DUMMY and last in owners:
        raise MarketUsageError(f"增广路终点物品 {last} 已被匹配")
    bidders = [b for b, _ in path]
    if len(set(bidders)) != len(bidders):
        raise MarketUsageError("增广路重复经过同一 bidder")
    for b, j in path:
        result[b] = j
    return tuple(result)


# ============================================================================
# 严格过需求
# ============================================================================

def is_strictly_overdemanded(g: ChoiceGraphs, S: Iterable[int], T: Iterable[int],
                             max_items: int = MAX_SUBSET_ITEMS) -> bool:
    """
    (i) F̃_p(T) ⊆ S, 且 (ii) 对 S 的每个非空子集 R 有 |F̃_p(R) ∩ T| > |R|。

    穷举全部子集, 仅供测试与 oracle 使用。

    Raises:
        MarketUsageError: S 含虚拟物品
        CapacityError: |S| 超过 max_items
    """
    S = sorted(set(S))
    T = sorted(set(T))
    if DUMMY in S:
        raise MarketUsageError("S 不能包含虚拟物品")
    if len(S) > max_items:
        raise CapacityError(f"|S| = {len(S)} 超过穷举上限 {max_items}")
    s_set = set(S)
    if any(not s_set.issuperset(g.fp_feasible[i]) for i in T):
        return False
    index = {j: t for t, j in enumerate(S)}
    masks = []
    for i in T:
        mask = 0
        for j in g.fp_feasible[i]:
            mask |= 1 << index[j]
        masks.append(mask)
    for subset in range(1, 1 << len(S)):
        demand = sum(1 for mask in masks if mask & subset)
        if demand <= bin(subset).count("1"):
            return False
    return True
