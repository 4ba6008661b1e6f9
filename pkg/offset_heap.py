#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
带全局偏移的最小堆

所有条目的有效值 = 存储键 − offset。
shift(δ) 只修改 offset, 使全部有效值同时减少 δ, 无需逐条更新。
"""

import heapq
import itertools
import math
from fractions import Fraction
from typing import Any, List, Optional, Tuple


class OffsetHeap:
    """
    最小堆, 有效值相对于单一全局偏移解释。

    用法:
        h = OffsetHeap("out")
        h.push(Fraction(4), (1, 0))
        h.shift(Fraction(1))
        h.peek()   # (Fraction(3), (1, 0))
    """

    def __init__(self, name: str = ""):
        self.name = name
        self.offset = Fraction(0)
        self._heap: List[list] = []
        self._seq = itertools.count()

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def push(self, value, payload: Any) -> None:
        """插入有效值为 value 的条目。"""
        heapq.heappush(self._heap, [value + self.offset, next(self._seq), payload])

    def shift(self, delta) -> None:
        """全部有效值减少 delta。"""
        self.offset += delta

    def peek(self) -> Optional[Tuple[Any, Any]]:
        if not self._heap:
            return None
        key, _, payload = self._heap[0]
        return key - self.offset, payload

    def pop(self) -> Tuple[Any, Any]:
        key, _, payload = heapq.heappop(self._heap)
        return key - self.offset, payload

    def min_value(self):
        """最小有效值; 空堆返回 +inf。"""
        top = self.peek()
        return math.inf if top is None else top[0]

    def pop_at_most(self, value) -> List[Tuple[Any, Any]]:
        """弹出所有有效值 ≤ value 的条目。"""
        popped = []
        while self._heap and self._heap[0][0] - self.offset <= value:
            popped.append(self.pop())
        return popped
