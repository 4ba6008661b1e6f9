#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
实例 / 结果文档的 JSON 编解码

InstanceFile:
  {"bidders": n, "items": k,
   "valuations": n×k, "reserves": n×k, "maxima": n×k,
   "bidder_scale": [...], "item_scale": [...],     # 可选, 出现即为广义实例
   "outside_options": [...]}                        # 可选
OutcomeFile:
  {"matching": [[bidder, item], ...], "prices": k, "utilities": n,
   "engine": "...", "counters": {...}}

数值: 整数, 或 "a/b" 字符串; "inf" 是唯一的无穷字面量。
路径 "-" 表示 stdin / stdout。
"""

import json
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from market_core import DUMMY, INF, MarketInstance, MarketUsageError, Outcome
from reduction import GeneralizedInstance, GeneralizedOutcome
from strategy_lab import MisreportResult

logger = logging.getLogger("instance_io")

REQUIRED_FIELDS = ("bidders", "items", "valuations", "reserves", "maxima")


class InstanceParseError(MarketUsageError):
    """文档无法解析; field 为出错字段路径 (如 reserves[1][0])。"""

    def __init__(self, message: str, field: str = "", line: Optional[int] = None):
        self.field = field
        self.line = line
        where = []
        if field:
            where.append(f"字段 {field}")
        if line is not None:
            where.append(f"第 {line} 行")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


# ============================================================================
# 数值
# ============================================================================

def format_number(x) -> Any:
    """Fraction → int 或 "a/b"; ±inf → "inf" / "-inf"。"""
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_number(value, field: str, allow_inf: bool = False):
    if isinstance(value, bool) or isinstance(value, float):
        raise InstanceParseError(f"数值必须为整数或 \"a/b\" 字符串, 得到 {value!r}", field)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if text == "inf":
            if allow_inf:
                return INF
            raise InstanceParseError("此处不允许 inf", field)
        try:
            if "." in text or "e" in text.lower():
                raise ValueError(text)
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise InstanceParseError(f"无法解析的数值 {value!r}", field)
    raise InstanceParseError(f"数值类型错误: {type(value).__name__}", field)


def _parse_vector(doc: Dict, name: str, length: int, allow_inf: bool = False) -> List:
    values = doc.get(name)
    if not isinstance(values, list) or len(values) != length:
        raise InstanceParseError(f"应为长度 {length} 的数组", name)
    return [parse_number(x, f"{name}[{a}]", allow_inf) for a, x in enumerate(values)]


def _parse_matrix(doc: Dict, name: str, n: int, k: int, allow_inf: bool = False) -> List[List]:
    rows = doc.get(name)
    if not isinstance(rows, list) or len(rows) != n:
        raise InstanceParseError(f"应为 {n} 行的数组", name)
    result = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != k:
            raise InstanceParseError(f"应为长度 {k} 的数组", f"{name}[{i}]")
        result.append([parse_number(x, f"{name}[{i}][{j}]", allow_inf) for j, x in enumerate(row)])
    return result


# ============================================================================
# 文档读写
# ============================================================================

def read_document(path: str) -> Dict:
    """读取 JSON 文档; "-" 读 stdin。"""
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            text = Path(path).read_text(encoding="utf-8-sig")
    except OSError as e:
        raise InstanceParseError(f"无法读取 {path}: {e}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"JSON 语法错误: {e.msg}", line=e.lineno)
    if not isinstance(doc, dict):
        raise InstanceParseError("顶层必须是 JSON 对象")
    return doc


def dumps(doc: Dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def write_document(doc: Dict, path: str = "-") -> None:
    """写出 JSON 文档; "-" 写 stdout。"""
    text = dumps(doc)
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
        logger.debug(f"已写入 {path}")


# ============================================================================
# InstanceFile
# ============================================================================

@dataclass
class InstanceDocument:
    """解析结果; generalized 非空时 instance 为其 base (v̂, r̂, m̂)。"""
    instance: MarketInstance
    generalized: Optional[GeneralizedInstance] = None
    outside_options: Optional[Tuple[Fraction, ...]] = None


def instance_from_dict(doc: Dict) -> InstanceDocument:
    for name in REQUIRED_FIELDS:
        if name not in doc:
            raise InstanceParseError("缺少必需字段", name)
    n, k = doc["bidders"], doc["items"]
    for name, x in (("bidders", n), ("items", k)):
        if isinstance(x, bool) or not isinstance(x, int) or x < 0:
            raise InstanceParseError("应为非负整数", name)
    v = _parse_matrix(doc, "valuations", n, k)
    r = _parse_matrix(doc, "reserves", n, k)
    m = _parse_matrix(doc, "maxima", n, k, allow_inf=True)
    try:
        inst = MarketInstance.from_real_items(v, r, m) if n else MarketInstance((), (), (), items=k)
    except MarketUsageError as e:
        raise InstanceParseError(str(e))

    generalized = None
    if "bidder_scale" in doc or "item_scale" in doc:
        bidder_scale = _parse_vector(doc, "bidder_scale", n) if "bidder_scale" in doc else None
        item_scale = _parse_vector(doc, "item_scale", k) if "item_scale" in doc else None
        try:
            generalized = GeneralizedInstance.create(inst, bidder_scale, item_scale)
        except MarketUsageError as e:
            raise InstanceParseError(str(e), "bidder_scale" if "bidder_scale" in str(e) else "item_scale")

    options = None
    if "outside_options" in doc:
        options = tuple(_parse_vector(doc, "outside_options", n))
        if any(o < 0 for o in options):
            raise InstanceParseError("外部选项不能为负", "outside_options")
    return InstanceDocument(inst, generalized, options)


def load_instance(path: str) -> InstanceDocument:
    return instance_from_dict(read_document(path))


def instance_to_dict(inst: MarketInstance,
                     bidder_scale: Optional[Sequence] = None,
                     item_scale: Optional[Sequence] = None,
                     outside_options: Optional[Sequence] = None) -> Dict:
    """item_scale 只含真实物品 (长度 k)。"""
    def real(mat):
        return [[format_number(x) for x in row[1:]] for row in mat]

    doc = {
        "bidders": inst.n,
        "items": inst.k,
        "valuations": real(inst.v),
        "reserves": real(inst.r),
        "maxima": real(inst.m),
    }
    if bidder_scale is not None:
        doc["bidder_scale"] = [format_number(c) for c in bidder_scale]
    if item_scale is not None:
        doc["item_scale"] = [format_number(c) for c in item_scale]
    if outside_options is not None:
        doc["outside_options"] = [format_number(o) for o in outside_options]
    return doc


def generalized_to_dict(g: GeneralizedInstance) -> Dict:
    return instance_to_dict(g.base, g.bidder_scale, g.item_scale[1:])


# ============================================================================
# OutcomeFile
# ============================================================================

def outcome_to_dict(out, engine: Optional[str] = None,
                    counters: Optional[Dict[str, int]] = None) -> Dict:
    """Outcome 或 GeneralizedOutcome → OutcomeFile (匹配中省略虚拟物品)。"""
    doc = {
        "matching": [[i, j] for i, j in out.matching],
        "prices": [format_number(p) for p in out.prices[1:]],
        "utilities": [format_number(u) for u in out.utilities],
    }
    if engine is not None:
        doc["engine"] = engine
    if counters is not None:
        doc["counters"] = dict(counters)
    return doc


def _assignment_from_doc(doc: Dict, n: int, k: int) -> Tuple[int, ...]:
    if "matching" not in doc:
        raise InstanceParseError("缺少必需字段", "matching")
    pairs = doc["matching"]
    if not isinstance(pairs, list):
        raise InstanceParseError("应为 [bidder, item] 数组", "matching")
    assignment = [DUMMY] * n
    for a, pair in enumerate(pairs):
        where = f"matching[{a}]"
        if (not isinstance(pair, list) or len(pair) != 2
                or any(isinstance(x, bool) or not isinstance(x, int) for x in pair)):
            raise InstanceParseError("应为 [bidder, item] 整数对", where)
        i, j = pair
        if not (0 <= i < n and 1 <= j <= k):
            raise InstanceParseError(f"下标越界: [{i}, {j}]", where)
        if assignment[i] != DUMMY:
            raise InstanceParseError(f"bidder {i} 出现多次", where)
        assignment[i] = j
    return tuple(assignment)


def outcome_from_dict(inst: MarketInstance, doc: Dict) -> Outcome:
    """OutcomeFile → Outcome; 效用由实例重新派生, 文档中的 utilities 仅作显示。"""
    assignment = _assignment_from_doc(doc, inst.n, inst.k)
    prices = [Fraction(0)] + _parse_vector(doc, "prices", inst.k)
    try:
        return Outcome(inst, assignment, tuple(prices))
    except MarketUsageError as e:
        raise InstanceParseError(str(e), "matching")


def generalized_outcome_from_dict(g: GeneralizedInstance, doc: Dict) -> GeneralizedOutcome:
    assignment = _assignment_from_doc(doc, g.base.n, g.base.k)
    prices = [Fraction(0)] + _parse_vector(doc, "prices", g.base.k)
    return GeneralizedOutcome(g, assignment, tuple(prices))


def load_outcome(inst: MarketInstance, path: str) -> Outcome:
    return outcome_from_dict(inst, read_document(path))


# ============================================================================
# 谎报 fixture
# ============================================================================

def misreport_to_dict(result, provenance: Optional[Dict] = None) -> Dict:
    """MisreportResult → fixture 文档 (含真实实例与来源信息)。"""
    i, j = result.coordinate
    return {
        "instance": instance_to_dict(result.instance),
        "misreport": {
            "bidder": result.bidder,
            "item": j,
            "reported_value": format_number(result.reported_value),
            "true_utility_honest": format_number(result.true_utility_honest),
            "true_utility_lying": format_number(result.true_utility_lying),
        },
        "provenance": dict(provenance or {}),
    }


def misreport_from_dict(doc: Dict):
    """fixture 文档 → MisreportResult。"""
    if "instance" not in doc or "misreport" not in doc:
        raise InstanceParseError("fixture 需要 instance 与 misreport 字段")
    inst = instance_from_dict(doc["instance"]).instance
    entry = doc["misreport"]
    for name in ("bidder", "item"):
        if isinstance(entry.get(name), bool) or not isinstance(entry.get(name), int):
            raise InstanceParseError("应为整数", f"misreport.{name}")
    i, j = entry["bidder"], entry["item"]
    try:
        return MisreportResult(
            bidder=i,
            coordinate=(i, j),
            reported_value=parse_number(entry.get("reported_value"), "misreport.reported_value"),
            true_utility_honest=parse_number(entry.get("true_utility_honest"),
                                             "misreport.true_utility_honest"),
            true_utility_lying=parse_number(entry.get("true_utility_lying"),
                                            "misreport.true_utility_lying"),
            instance=inst,
        )
    except MarketUsageError as e:
        if isinstance(e, InstanceParseError):
            raise
        raise InstanceParseError(str(e), "misreport")
