# -*- coding: utf-8 -*-
"""
cord_runner.py - 运行编排

五个子命令共用一个 CordRunner:
1. constants  - 导出常数 ε*, β₁, β₂, β, Γ_M, L_{f,ε}, C_P 与结构假设检查
2. stationary - 一维定常不动点 + 理论性质检查
3. width      - 稳态索宽 w₀ + 一阶摄动重构误差
4. evolve     - 二维演化, 快照, 尾宽测量与理论对照
5. sweep      - 参数笛卡尔网格上的批量索宽求解 (可多进程)

每个命令写出自己的 CSV 和 manifest.json; 失败时保留已写出的文件,
manifest 标记 FAILED 并记录异常类型与消息, 然后把异常交给入口层。
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from config.run_config import (
    RunConfig, parse_run_config, to_evolution_config, to_model_params,
    to_stationary_config, to_width_config,
)
from config.system_config import SystemConfig
from engine.diagnostics import compare_to_theory, measure
from engine.evolution2d import CordEvolution
from models.enums import RunStatus
from models.errors import ConfigError, CordModelError
from models.params import ModelParams
from models.solutions import Grid1D
from output.base import ArtifactWriter
from output.csv_writer import (
    CsvArtifactWriter, build_manifest, constants_row, width_row, write_constants_csv,
    write_reconstruction_csv, write_snapshot, write_stationary_csv, write_width_summary,
)
from solver.base import WidthSolver
from solver.constitutive import ConstitutiveSet
from solver.freeboundary import (
    GeneralWidthSolver, LinearWidthSolver, get_width_solver, reconstruct_and_errors,
)
from solver.stationary1d import fixed_point, free_boundary_residual, verify_stationary

logger = logging.getLogger(__name__)

COMMANDS = ("constants", "stationary", "width", "evolve", "sweep")


def select_width_solver(run_cfg: RunConfig, p: ModelParams) -> WidthSolver:
    wcfg = to_width_config(run_cfg)
    method = run_cfg.width.method
    if method == "linear":
        return LinearWidthSolver(wcfg)
    if method == "general":
        return GeneralWidthSolver(wcfg)
    return get_width_solver(p, wcfg)


def _sweep_entry(config_data: Dict[str, Any], overrides: Dict[str, float], out_dir: str) -> Dict[str, Any]:
    """单个扫描项 (在子进程中执行, 只交换普通字典)"""
    run_cfg = parse_run_config(config_data)
    writer = CsvArtifactWriter(Path(out_dir))
    row: Dict[str, Any] = dict(overrides)
    try:
        p = to_model_params(run_cfg, **overrides)
        width = select_width_solver(run_cfg, p).solve(p)
        write_width_summary(width, writer)
        writer.write_manifest(build_manifest(
            "sweep-entry", config_data, outputs=writer.written, extra={"overrides": overrides},
        ))
        row.update(width_row(width))
        row.update({"status": RunStatus.OK.name, "error": ""})
    except CordModelError as e:
        logger.error(f"扫描项 {overrides} 失败: {type(e).__name__}: {e}")
        writer.write_manifest(build_manifest(
            "sweep-entry", config_data, RunStatus.FAILED, e, writer.written, {"overrides": overrides},
        ))
        row.update({k: math.nan for k in ("w0", "bracket_lo", "bracket_hi", "beta_w0")})
        row.update({"admissible": False, "nu": math.nan, "xbar": math.nan, "epsilon": math.nan, "method": ""})
        row.update({"status": RunStatus.FAILED.name, "error": type(e).__name__})
    return row


class CordRunner:
    """子命令编排器: 一个运行配置 + 一个输出目录"""

    def __init__(
        self,
        run_cfg: RunConfig,
        out_dir: Optional[Path] = None,
        jobs: Optional[int] = None,
        system: Optional[SystemConfig] = None,
    ):
        self.run_cfg = run_cfg
        self.system = system or SystemConfig()
        self.out_dir = Path(out_dir or run_cfg.output.dir)
        self.jobs = jobs or run_cfg.output.jobs
        self.params = to_model_params(run_cfg)
        self._constitutive: Optional[ConstitutiveSet] = None

    @property
    def constitutive(self) -> ConstitutiveSet:
        """首次使用时确定 ε, 之后各命令共享"""
        if self._constitutive is None:
            self._constitutive = ConstitutiveSet.from_params(self.params)
        return self._constitutive

    # ------------------------------------------------------------------
    # 统一执行入口
    # ------------------------------------------------------------------
    def execute(self, command: str, dry_run: bool = False) -> Dict[str, Any]:
        """
        运行一个子命令并写出 manifest

        Returns:
            manifest 字典

        Raises:
            CordModelError / OSError: 原样抛出, 失败 manifest 已写出
        """
        if command not in COMMANDS:
            raise ConfigError(f"未知命令 {command!r}, 可选: {', '.join(COMMANDS)}")
        handler: Callable[..., Dict[str, Any]] = getattr(self, f"cmd_{command}")
        writer = CsvArtifactWriter(self.out_dir, self.system)
        config_data = self.run_cfg.model_dump()
        start = time.perf_counter()

        try:
            extra = handler(writer, dry_run=dry_run) if command == "evolve" else handler(writer)
        except (CordModelError, OSError) as e:
            logger.error(f"{command} 失败: {type(e).__name__}: {e}")
            try:
                writer.write_manifest(build_manifest(
                    command, config_data, RunStatus.FAILED, e, writer.written, system=self.system,
                ))
            except OSError as io_err:
                logger.error(f"无法写出失败 manifest: {io_err}")
            raise

        manifest = build_manifest(command, config_data, RunStatus.OK, None, writer.written, extra, self.system)
        writer.write_manifest(manifest)
        logger.info(f"{command} 完成, 耗时 {time.perf_counter() - start:.2f}s, 输出目录 {self.out_dir}")
        return manifest

    # ------------------------------------------------------------------
    # constants
    # ------------------------------------------------------------------
    def cmd_constants(self, writer: ArtifactWriter) -> Dict[str, Any]:
        consts = self.constitutive.constants
        checks = self.constitutive.assumptions()
        write_constants_csv(consts, writer)
        writer.write_rows("assumptions.csv", [{"check": k, "passed": v} for k, v in checks.items()])

        row = constants_row(consts)
        fmt = self.system.table_fmt
        print("\n" + "=" * 60)
        print("导出常数")
        print("=" * 60)
        width = max(len(k) for k in row)
        for key, value in row.items():
            print(f"  {key.ljust(width)}  {fmt.format(value)}")
        print("\n结构假设:")
        for name, passed in checks.items():
            print(f"  {'✓' if passed else '✗'} {name}")
        print("=" * 60)

        if not all(checks.values()):
            logger.warning(f"结构假设不满足: {[k for k, v in checks.items() if not v]}")
        return {"constants": row, "assumptions": checks}

    # ------------------------------------------------------------------
    # stationary
    # ------------------------------------------------------------------
    def _target_width(self) -> float:
        if self.run_cfg.stationary.w is not None:
            return self.run_cfg.stationary.w
        width = select_width_solver(self.run_cfg, self.params).solve(self.params)
        logger.info(f"stationary.w 未指定, 取稳态宽度 w₀={width.w0:.6f}")
        return width.w0

    def cmd_stationary(self, writer: ArtifactWriter) -> Dict[str, Any]:
        scfg = to_stationary_config(self.run_cfg)
        w = self._target_width()
        resolved = self.constitutive.params
        sol = fixed_point(w, resolved, Grid1D(scfg.n), scfg)
        write_stationary_csv(sol, writer)

        report = verify_stationary(sol, resolved)
        writer.write_rows("stationary_checks.csv", [
            {"check": chk.name, "passed": chk.passed, "observed": chk.observed,
             "bound": chk.bound, "margin": chk.margin}
            for chk in report.checks
        ])
        summary = {
            "w": sol.w,
            "epsilon": sol.epsilon,
            "iterations": sol.iterations,
            "residual_phi": sol.residual_phi,
            "residual_c": sol.residual_c,
            "beta_w": sol.beta_w,
            "admissible": sol.admissible,
            "free_boundary_residual": free_boundary_residual(sol),
            "checks_passed": report.passed,
        }
        writer.write_rows("stationary_summary.csv", [summary])

        print(f"\n定常解 w={w:.6g}: 迭代 {sol.iterations} 次, βw={sol.beta_w:.4f}")
        for chk in report.checks:
            print(f"  {'✓' if chk.passed else '✗'} {chk.name}: {chk.observed:.6g} (界 {chk.bound:.6g})")
        if not report.passed:
            logger.warning("定常解未通过全部理论检查")
        return {"summary": summary}

    # ------------------------------------------------------------------
    # width
    # ------------------------------------------------------------------
    def cmd_width(self, writer: ArtifactWriter) -> Dict[str, Any]:
        width = select_width_solver(self.run_cfg, self.params).solve(self.params)
        write_width_summary(width, writer)
        if width.scanned:
            writer.write_rows("width_scan.csv", [{"w": w, "C": c} for w, c in width.scanned])

        print(f"\n稳态索宽 ({width.method}): w₀={width.w0:.10f}, βw₀={width.beta_w0:.4f}, ν={width.nu:.4f}")
        extra: Dict[str, Any] = {"width": width_row(width)}
        if not width.admissible:
            print("✗ βw₀ >= 1, 理论宽度应被拒绝, 跳过摄动重构")
            return extra

        scfg = to_stationary_config(self.run_cfg)
        recon = reconstruct_and_errors(width.w0, self.params, Grid1D(self.run_cfg.width.n), scfg)
        write_reconstruction_csv(recon, writer)
        extra.update({"max_E_phi": recon.max_E_phi, "max_E_c": recon.max_E_c})
        print(f"✓ 摄动重构: max|E[φ]|={recon.max_E_phi:.3e}, max|E[c]|={recon.max_E_c:.3e}")
        return extra

    # ------------------------------------------------------------------
    # evolve
    # ------------------------------------------------------------------
    def cmd_evolve(self, writer: ArtifactWriter, dry_run: bool = False) -> Dict[str, Any]:
        ecfg = to_evolution_config(self.run_cfg)
        evolution = CordEvolution(ecfg)

        if dry_run:
            state = evolution.init_state()
            dt = evolution.stable_dt(state)
            print(f"\n✓ 配置有效 (dry-run): 网格 {ecfg.grid.nx}x{ecfg.grid.nz}, "
                  f"格式 {ecfg.phi_scheme.name.lower()}, 初始 dt={dt:.6g}, t_end={ecfg.t_end:g}")
            return {"dry_run": True, "dt": dt}

        result = evolution.run(on_snapshot=lambda snap: write_snapshot(snap, ecfg.grid, writer))
        stats = {k: v for k, v in result.manifest.items() if k not in ("version", "command", "status", "config")}
        print(f"\n✓ 演化完成: t={result.final_state.t:g}, 步数 {result.final_state.step_index}, "
              f"拒绝 {evolution.rejected_steps}")
        if not self.run_cfg.evolve.measure:
            return {"evolution": stats}

        metrics = measure(
            result.final_state, ecfg.grid, ecfg.params,
            window=self.run_cfg.evolve.window, heaviside_width=ecfg.heaviside_width,
        )
        report = compare_to_theory(metrics, ecfg.params, cfg=to_width_config(self.run_cfg))
        writer.write_rows("comparison.csv", [report.to_row()])
        print("\n尾宽与理论对照:")
        print(report.to_table(self.system))
        return {"evolution": stats, "comparison": report.to_row()}

    # ------------------------------------------------------------------
    # sweep
    # ------------------------------------------------------------------
    def sweep_entries(self) -> List[Dict[str, float]]:
        """笛卡尔积, 顺序按配置中键的顺序 (最后一个键变化最快)"""
        grid = self.run_cfg.sweep.params
        if not grid:
            raise ConfigError("sweep.params 为空, 没有可扫描的参数")
        keys = list(grid)
        entries = [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]
        for overrides in entries:
            # 所有组合在计算前校验
            to_model_params(self.run_cfg, **overrides)
        return entries

    def cmd_sweep(self, writer: ArtifactWriter) -> Dict[str, Any]:
        entries = self.sweep_entries()
        config_data = self.run_cfg.model_dump()
        dirs = [str(writer.out_dir / f"entry_{i:03d}") for i in range(len(entries))]
        logger.info(f"扫描 {len(entries)} 个组合, 并行度 {self.jobs}")

        if self.jobs <= 1:
            rows = [_sweep_entry(config_data, o, d) for o, d in zip(entries, dirs)]
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                # map 按提交顺序返回, 与完成顺序无关
                rows = list(pool.map(_sweep_entry, [config_data] * len(entries), entries, dirs))

        writer.write_rows("sweep.csv", rows)
        failed = [r for r in rows if r["status"] != RunStatus.OK.name]
        print(f"\n扫描完成: {len(rows) - len(failed)}/{len(rows)} 成功")
        for row in rows:
            keys = ", ".join(f"{k}={row[k]:g}" for k in entries[0])
            mark = "✓" if row["status"] == RunStatus.OK.name else "✗"
            print(f"  {mark} {keys}: w₀={row['w0']:.6g}")
        if failed:
            raise CordModelError(f"扫描中 {len(failed)} 个组合失败, 详见 sweep.csv")
        return {"entries": len(rows)}
