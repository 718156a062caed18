#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
main.py - 肿瘤索模拟器命令行入口

子命令:
    constants   导出常数与结构假设
    stationary  一维定常不动点
    width       稳态索宽与摄动重构
    evolve      二维演化 (--dry-run 只校验配置并给出 dt)
    sweep       参数网格上的批量索宽 (--jobs 并行)

退出码: 0 成功, 2 配置错误, 3 求解/可容许性错误, 4 I/O 错误

示例:
    python main.py width --config config/run_config.example.yaml --out runs/width
"""

import argparse
import logging
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from config.run_config import load_run_config
from config.system_config import SystemConfig
from cord_runner import COMMANDS, CordRunner
from models.errors import ConfigError, CordModelError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="肿瘤索模拟与稳态宽度分析")
    parser.add_argument("command", choices=COMMANDS, help="子命令")
    parser.add_argument("--config", required=True, help="YAML 运行配置")
    parser.add_argument("--out", default=None, help="输出目录 (覆盖 output.dir)")
    parser.add_argument("--jobs", type=int, default=None, help="sweep 并行进程数 (覆盖 output.jobs)")
    parser.add_argument("--dry-run", action="store_true", help="evolve: 只校验配置并打印 dt")
    return parser


def setup_logging(out_dir: Path, command: str, system: SystemConfig) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    log_path = out_dir / f'cord_{command}_{datetime.now().strftime("%Y%m%d_%H%M%S")}.log'
    logging.basicConfig(
        level=logging.INFO,
        format=system.LOG_FORMAT,
        handlers=[
            logging.FileHandler(log_path, encoding="utf-8"),
            logging.StreamHandler(),
        ],
        force=True,
    )
    return log_path


def close_file_handlers() -> None:
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    system = SystemConfig()

    if args.jobs is not None and args.jobs < 1:
        print(f"✗ 配置错误: --jobs 必须 >= 1, 当前 {args.jobs}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        run_cfg = load_run_config(args.config)
    except ConfigError as e:
        print(f"✗ 配置错误: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"✗ 无法读取配置文件: {e}", file=sys.stderr)
        return EXIT_IO

    out_dir = Path(args.out or run_cfg.output.dir)
    try:
        log_path = setup_logging(out_dir, args.command, system)
    except OSError as e:
        print(f"✗ 无法创建输出目录 {out_dir}: {e}", file=sys.stderr)
        return EXIT_IO
    logger.info(f"命令 {args.command}, 配置 {args.config}, 输出 {out_dir}, 日志 {log_path}")

    runner = CordRunner(run_cfg, out_dir=out_dir, jobs=args.jobs, system=system)
    try:
        runner.execute(args.command, dry_run=args.dry_run)
    except ConfigError as e:
        print(f"\n✗ 配置错误: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except CordModelError as e:
        print(f"\n✗ 求解失败 ({type(e).__name__}): {e}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as e:
        print(f"\n✗ I/O 错误: {e}", file=sys.stderr)
        return EXIT_IO
    finally:
        close_file_handlers()

    print(f"\n✓ {args.command} 完成, 输出目录: {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
