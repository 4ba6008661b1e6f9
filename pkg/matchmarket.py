#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
MatchMarket: 带保留价与最高价的 bidder-optimal 稳定匹配 CLI

用法:
  python matchmarket.py solve fixtures/ex1.json                 # 求解, 结果写 stdout
  python matchmarket.py solve fixtures/ex2.json --engine fast --trace
  python matchmarket.py check fixtures/ex1.json out.json --mode stable
  python matchmarket.py fuzz --seed 1 --count 200 --with-oracle # 随机批量校验
  python matchmarket.py generate --seed 7 -o inst.json          # 生成随机实例
  python matchmarket.py reduce general.json                     # 广义实例 → 标准实例
  python matchmarket.py lift general.json out.json              # 结果提升回广义市场
  python matchmarket.py misreport fixtures/ex1.json --bidder 0  # 单实例谎报搜索
  python matchmarket.py misreport --search --freeze fixtures/misreport.json

退出码: 0 成功 / 1 校验失败 / 2 输入错误 / 3 内部错误
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

# Windows 终端 UTF-8 编码 (emoji 支持)
if sys.platform == "win32":
    os.environ.setdefault("PYTHONIOENCODING", "utf-8")
    try:
        sys.stdout.reconfigure(encoding="utf-8", errors="replace")
        sys.stderr.reconfigure(encoding="utf-8", errors="replace")
    except Exception:
        pass

from hungarian_solver import ENGINES, describe_event, solve
from instance_io import (
    InstanceDocument, generalized_outcome_from_dict, instance_from_dict,
    instance_to_dict, format_number, load_instance, misreport_to_dict, outcome_from_dict,
    outcome_to_dict, read_document, write_document,
)
from market_core import (
    MarketUsageError, check_feasible, check_relaxed_stable, check_stable, to_ceiling,
)
from market_fuzzer import FuzzParams, instance_at, run_fuzz
from reduction import (
    check_generalized_stable, lift_outcome, lift_outside_options, reduce, with_outside_options,
)
from strategy_lab import (
    check_restricted, find_profitable_misreport, restricted_family, restricted_family_size,
    search_instance,
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_INTERNAL_ERROR = 3

# ============================================================================
# 路径约定: 全部相对于项目根目录
# ============================================================================

PROJECT_ROOT = Path(__file__).resolve().parent

USER_CONFIG_FILE = PROJECT_ROOT / "matchmarket_config.json"
TEMPLATE_CONFIG = PROJECT_ROOT / "integrated_config.json"

DEFAULT_CONFIG = {
    "solver": {"engine": "fast", "trace": False},
    "oracle": {"max_bidders": 5, "max_items": 3},
    "fuzz": {
        "seed": 1, "count": 100, "bidders": 4, "items": 3, "max_value": 6,
        "reserve_probability": 0.5, "inf_weight": 0.5, "workers": 0,
    },
    "misreport": {
        "grid_max": 3, "bidders": 3, "items": 3, "max_value": 3,
        "min_bidders": 3, "min_items": 3, "maxima": None, "workers": 0,
    },
    "paths": {"log_file": "matchmarket.log"},
}


# ============================================================================
# 配置管理
# ============================================================================

def load_config(config_path: Optional[Path] = None) -> Dict:
    """
    加载配置。合并链:
    内置默认 → integrated_config.json → matchmarket_config.json (或 -c 指定) → CLI 参数
    """
    config = json.loads(json.dumps(DEFAULT_CONFIG))

    if TEMPLATE_CONFIG.exists():
        with open(TEMPLATE_CONFIG, "r", encoding="utf-8-sig") as f:
            _deep_merge(config, json.load(f))

    user_cfg_path = config_path or USER_CONFIG_FILE
    if user_cfg_path.exists():
        with open(user_cfg_path, "r", encoding="utf-8-sig") as f:
            _deep_merge(config, json.load(f))
    elif config_path is not None:
        raise MarketUsageError(f"配置文件不存在: {config_path}")

    return config


def _deep_merge(base: dict, override: dict):
    for k, v in override.items():
        if k in base and isinstance(base[k], dict) and isinstance(v, dict):
            _deep_merge(base[k], v)
        else:
            base[k] = v


# ============================================================================
# 日志
# ============================================================================

def setup_logging(debug: bool = False, log_file: Optional[str] = None) -> logging.Logger:
    """控制台输出到 stderr (stdout 留给 JSON 文档); 文件记录 DEBUG。"""
    level = logging.DEBUG if debug else logging.INFO
    root = logging.getLogger()
    for h in root.handlers[:]:
        root.removeHandler(h)

    console = logging.StreamHandler(sys.stderr)
    console.setLevel(level)
    console.setFormatter(logging.Formatter(
        "%(asctime)s │ %(message)s", datefmt="%H:%M:%S"
    ))
    root.addHandler(console)

    path = Path(log_file or "matchmarket.log")
    if not path.is_absolute():
        path = PROJECT_ROOT / path
    try:
        fh = logging.FileHandler(str(path), encoding="utf-8")
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(logging.Formatter(
            "%(asctime)s [%(levelname)s] %(name)s - %(message)s"
        ))
        root.addHandler(fh)
    except OSError:
        pass

    root.setLevel(logging.DEBUG)
    return logging.getLogger("matchmarket")


# ============================================================================
# 命令: solve
# ============================================================================

def cmd_solve(path: str, engine: str, trace: bool, output: str, logger: logging.Logger) -> int:
    """求解实例文件; 广义实例先约简再提升, 外部选项先平移再还原。"""
    doc = load_instance(path)
    if doc.generalized is not None and doc.outside_options is not None:
        raise MarketUsageError("暂不支持同时给出缩放因子与外部选项")

    inst = doc.instance
    if doc.generalized is not None:
        inst = reduce(doc.generalized)
        logger.debug("实例含缩放因子, 按约简实例求解")
    elif doc.outside_options is not None:
        inst = with_outside_options(inst, doc.outside_options)

    result = solve(inst, engine=engine, trace=trace)
    if trace:
        for ev in result.trace:
            print(describe_event(ev), file=sys.stderr)

    if doc.generalized is not None:
        out_doc = outcome_to_dict(lift_outcome(doc.generalized, result.outcome),
                                  engine, result.counters.as_dict())
    else:
        out_doc = outcome_to_dict(result.outcome, engine, result.counters.as_dict())
        if doc.outside_options is not None:
            lifted = lift_outside_options(doc.outside_options, result.outcome)
            out_doc["outside_utilities"] = [format_number(u) for u in lifted]

    write_document(out_doc, output)
    logger.debug(f"📊 {engine}: 价格 {out_doc['prices']}, 效用 {out_doc['utilities']}")
    return EXIT_OK


# ============================================================================
# 命令: check
# ============================================================================

def cmd_check(instance_path: str, outcome_path: str, mode: str, logger: logging.Logger) -> int:
    doc = load_instance(instance_path)
    out_doc = read_document(outcome_path)
    if doc.generalized is not None:
        if mode != "stable":
            raise MarketUsageError("广义实例只支持 --mode stable")
        out = generalized_outcome_from_dict(doc.generalized, out_doc)
        report = check_generalized_stable(doc.generalized, out)
    else:
        out = outcome_from_dict(doc.instance, out_doc)
        checker = {"feasible": check_feasible, "stable": check_stable,
                   "relaxed": check_relaxed_stable}[mode]
        report = checker(doc.instance, out)

    if report.ok:
        print(f"✅ {report.kind}: 无违反")
        return EXIT_OK
    for line in report.lines():
        print(line)
    logger.info(f"❌ {report.kind}: {len(report.violations)} 处违反")
    return EXIT_CHECK_FAILED


# ============================================================================
# 命令: fuzz / generate
# ============================================================================

def cmd_fuzz(params: FuzzParams, workers: int, logger: logging.Logger) -> int:
    summary = run_fuzz(params, workers=workers, progress=params.count >= 50)
    logger.info(f"📊 fuzz: 检查 {summary.checked} 个实例, 失败 {len(summary.failed)} 个")
    if summary.ok:
        return EXIT_OK
    case = summary.failed[0]
    logger.info(f"❌ 第一个失败实例 #{case.index} (seed={params.seed}):")
    for line in case.failures:
        logger.info(f"   {line}")
    write_document(instance_to_dict(case.instance))
    return EXIT_CHECK_FAILED


def cmd_generate(params: FuzzParams, index: int, output: str, logger: logging.Logger) -> int:
    inst = instance_at(params, index)
    write_document(instance_to_dict(inst), output)
    logger.debug(f"已生成实例 seed={params.seed} index={index}: {inst.n}×{inst.k}")
    return EXIT_OK


# ============================================================================
# 命令: reduce / lift
# ============================================================================

def _require_generalized(doc: InstanceDocument, path: str):
    if doc.generalized is None:
        raise MarketUsageError(f"{path} 不含 bidder_scale / item_scale")
    return doc.generalized


def cmd_reduce(path: str, output: str, logger: logging.Logger) -> int:
    g = _require_generalized(load_instance(path), path)
    write_document(instance_to_dict(reduce(g)), output)
    return EXIT_OK


def cmd_lift(instance_path: str, outcome_path: str, output: str, logger: logging.Logger) -> int:
    """OutcomeFile 须来自约简后的实例。"""
    g = _require_generalized(load_instance(instance_path), instance_path)
    out = outcome_from_dict(reduce(g), read_document(outcome_path))
    write_document(outcome_to_dict(lift_outcome(g, out)), output)
    return EXIT_OK


# ============================================================================
# 命令: misreport
# ============================================================================

def _load_misreport_target(path: str):
    """实例文件或 fixture 文档 (含 instance 字段)。"""
    raw = read_document(path)
    if "instance" in raw and "misreport" in raw:
        return instance_from_dict(raw["instance"]).instance
    return instance_from_dict(raw).instance


def cmd_misreport(path: Optional[str], bidder: Optional[int], grid_max: int, restricted: bool,
                  logger: logging.Logger) -> int:
    inst = _load_misreport_target(path)
    if restricted:
        check_restricted(inst)
    if bidder is not None:
        inst._check_pair(bidder, 0)
    hit = search_instance(inst, range(grid_max + 1),
                          bidders=None if bidder is None else [bidder])
    print(hit.describe() if hit is not None else "none")
    return EXIT_OK


def cmd_misreport_search(settings: Dict, freeze: Optional[str], workers: int,
                         logger: logging.Logger) -> int:
    family_args = dict(
        bidders=settings["bidders"], items=settings["items"], max_value=settings["max_value"],
        maxima=settings.get("maxima"), min_bidders=settings.get("min_bidders", 2),
        min_items=settings.get("min_items", 1),
    )
    grid_max = settings["grid_max"]
    total = restricted_family_size(**family_args)
    logger.info(f"🔍 受限族搜索: n = {family_args['min_bidders']}..{family_args['bidders']}, "
                f"k = {family_args['min_items']}..{family_args['items']}, "
                f"估值 ≤ {family_args['max_value']}, 网格 0..{grid_max}, 共 {total} 个实例")
    hit = find_profitable_misreport(restricted_family(**family_args), range(grid_max + 1),
                                    workers=workers, total=total, progress=True)
    if hit is None:
        print("none")
        return EXIT_OK
    print(hit.describe())
    if freeze:
        provenance = {
            "source": "find_profitable_misreport over restricted_family",
            **family_args, "grid_max": grid_max, "family_index": hit.index,
        }
        if provenance["maxima"] is not None:
            provenance["maxima"] = [format_number(to_ceiling(x)) for x in provenance["maxima"]]
        write_document(misreport_to_dict(hit, provenance), freeze)
        logger.info(f"✅ fixture 已写入 {freeze}")
    return EXIT_OK


# ============================================================================
# CLI 入口
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="MatchMarket: 带保留价与最高价的 bidder-optimal 稳定匹配",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  python matchmarket.py solve fixtures/ex1.json                     # 默认引擎求解
  python matchmarket.py solve fixtures/ex2.json --engine simple --trace
  python matchmarket.py solve - < inst.json -o out.json             # stdin 读入
  python matchmarket.py check fixtures/ex1.json out.json --mode relaxed
  python matchmarket.py fuzz --seed 1 --count 200 --bidders 4 --items 3 --with-oracle
  python matchmarket.py generate --seed 3 --bidders 5 --items 2
  python matchmarket.py reduce general.json > reduced.json
  python matchmarket.py lift general.json reduced_out.json
  python matchmarket.py misreport fixtures/ex1.json --bidder 0 --grid-max 6
  python matchmarket.py misreport --search --freeze fixtures/misreport.json
        """,
    )

    sub = parser.add_subparsers(dest="command", help="子命令")

    sp = sub.add_parser("solve", help="求解实例, OutcomeFile 写到 stdout")
    sp.add_argument("path", help="InstanceFile 路径, - 表示 stdin")
    sp.add_argument("--engine", choices=ENGINES, default=None)
    sp.add_argument("--trace", action="store_true", help="事件序列写到 stderr")
    sp.add_argument("-o", "--output", default="-")

    sp = sub.add_parser("check", help="检查结果的可行 / 稳定 / 松弛稳定性")
    sp.add_argument("instance")
    sp.add_argument("outcome")
    sp.add_argument("--mode", choices=("feasible", "stable", "relaxed"), default="stable")

    for name, help_text in (("fuzz", "随机实例批量校验"), ("generate", "生成一个随机实例")):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--bidders", type=int, default=None)
        sp.add_argument("--items", type=int, default=None)
        sp.add_argument("--max-value", type=int, default=None)
        if name == "fuzz":
            sp.add_argument("--count", type=int, default=None)
            sp.add_argument("--with-oracle", action="store_true")
            sp.add_argument("--workers", type=int, default=None, help="进程数, 0 为串行")
        else:
            sp.add_argument("--index", type=int, default=0)
            sp.add_argument("-o", "--output", default="-")

    sp = sub.add_parser("reduce", help="广义实例 → 标准实例")
    sp.add_argument("path")
    sp.add_argument("-o", "--output", default="-")

    sp = sub.add_parser("lift", help="约简实例上的结果 → 广义结果")
    sp.add_argument("instance")
    sp.add_argument("outcome")
    sp.add_argument("-o", "--output", default="-")

    sp = sub.add_parser("misreport", help="单点谎报搜索")
    sp.add_argument("path", nargs="?", default=None, help="实例文件或谎报 fixture")
    sp.add_argument("--bidder", type=int, default=None)
    sp.add_argument("--grid-max", type=int, default=None)
    sp.add_argument("--restricted", action="store_true", help="先检查受限条件")
    sp.add_argument("--search", action="store_true", help="在受限实例族上穷举搜索")
    sp.add_argument("--freeze", default=None, help="把找到的反例写成 fixture")
    sp.add_argument("--workers", type=int, default=None)

    parser.add_argument("-c", "--config", type=Path, default=None)
    parser.add_argument("--debug", action="store_true")
    return parser


def _pick(value, default):
    return default if value is None else value


def _fuzz_params(args, cfg: Dict, oracle_cfg: Dict) -> FuzzParams:
    return FuzzParams(
        seed=_pick(args.seed, cfg["seed"]),
        count=_pick(getattr(args, "count", None), cfg["count"]),
        bidders=_pick(args.bidders, cfg["bidders"]),
        items=_pick(args.items, cfg["items"]),
        max_value=_pick(args.max_value, cfg["max_value"]),
        reserve_probability=cfg["reserve_probability"],
        inf_weight=cfg["inf_weight"],
        with_oracle=getattr(args, "with_oracle", False),
        oracle_bidders=oracle_cfg["max_bidders"],
        oracle_items=oracle_cfg["max_items"],
    )


def dispatch(args, config: Dict, logger: logging.Logger) -> int:
    if args.command == "solve":
        engine = _pick(args.engine, config["solver"]["engine"])
        trace = args.trace or bool(config["solver"]["trace"])
        return cmd_solve(args.path, engine, trace, args.output, logger)
    if args.command == "check":
        return cmd_check(args.instance, args.outcome, args.mode, logger)
    if args.command == "fuzz":
        params = _fuzz_params(args, config["fuzz"], config["oracle"])
        if params.count < 0:
            raise MarketUsageError("--count 不能为负")
        return cmd_fuzz(params, _pick(args.workers, config["fuzz"]["workers"]), logger)
    if args.command == "generate":
        params = _fuzz_params(args, config["fuzz"], config["oracle"])
        return cmd_generate(params, args.index, args.output, logger)
    if args.command == "reduce":
        return cmd_reduce(args.path, args.output, logger)
    if args.command == "lift":
        return cmd_lift(args.instance, args.outcome, args.output, logger)
    if args.command == "misreport":
        settings = dict(config["misreport"])
        settings["grid_max"] = _pick(args.grid_max, settings["grid_max"])
        if args.search:
            workers = _pick(args.workers, settings.get("workers", 0))
            return cmd_misreport_search(settings, args.freeze, workers, logger)
        if args.path is None:
            raise MarketUsageError("misreport 需要实例路径, 或使用 --search")
        return cmd_misreport(args.path, args.bidder, settings["grid_max"], args.restricted, logger)
    raise MarketUsageError("缺少子命令 (见 --help)")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except (MarketUsageError, json.JSONDecodeError) as e:
        logger = setup_logging(args.debug)
        logger.error(f"❌ 配置错误: {e}")
        return EXIT_INPUT_ERROR
    logger = setup_logging(args.debug, config["paths"].get("log_file"))

    try:
        return dispatch(args, config, logger)
    except MarketUsageError as e:
        logger.error(f"❌ 输入错误: {e}")
        return EXIT_INPUT_ERROR
    except Exception as e:
        logger.exception(f"❌ 内部错误: {e}")
        return EXIT_INTERNAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
