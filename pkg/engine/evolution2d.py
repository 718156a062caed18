# -*- coding: utf-8 -*-
"""
engine/evolution2d.py

二维肿瘤索演化 - 单域格式 + 水平集界面

每一步:
1. 营养: 向后Euler求解 ∂c/∂t - Δc = -αφcχ_Ω, x=0 处 c=1, 其余边无通量
2. 细胞: 守恒形式 ∂φ/∂t = ∇·(F'(φ)∇φ) + g(φ)Γ(c)χ_Ω
   x=0, z=0 无通量, 远端 x=Lx, z=Lz 处 φ=φ₀
3. 水平集: 以细胞速度 v = -∇(φΣ(φ)) 迎风推进, 每N步重新初始化
4. 范围检查: 越界则拒绝该步并减半 dt (不做截断)
"""

from __future__ import annotations

import logging
import time
from typing import Callable, List, Optional, Tuple

import numpy as np

from config.solver_config import EvolutionConfig, config_to_dict
from config.system_config import SystemConfig
from engine.level_set import advect_level_set, extract_interface, heaviside, reinitialize
from models.enums import EdgeKind, InitialShape, PhiScheme, RunStatus
from models.errors import StabilityError
from models.field_state import EvolutionResult, EvolutionState, Grid2D, Snapshot
from models.params import ModelParams
from solver.constitutive import F_prime, Gamma, g, phi_sigma
from utils.fd_operators import (
    BoundarySpec, EdgeCondition, ReusedFactorization, apply_operator, assemble_diffusion,
    backward_euler_solve, centered_gradient,
)

logger = logging.getLogger(__name__)

_T_EPS = 1e-9


def cell_velocity(state: EvolutionState, p: ModelParams, grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
    """细胞速度 v = -∇(φΣ(φ)), 对称轴上法向分量为0"""
    return _velocity(state.phi, p, grid)


def _velocity(phi: np.ndarray, p: ModelParams, grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
    gx, gz = centered_gradient(phi_sigma(phi, p), grid)
    vx, vz = -gx, -gz
    vx[:, 0] = 0.0
    vz[0, :] = 0.0
    return vx, vz


class CordEvolution:
    """二维演化器: 缓存边界条件与营养方程的 Laplace 算子"""

    def __init__(self, cfg: EvolutionConfig):
        self.cfg = cfg
        self.grid = cfg.grid
        self.params = cfg.params

        self.delta = cfg.heaviside_width * min(self.grid.hx, self.grid.hz)
        self.weights = self.grid.weights()

        self.c_bc = BoundarySpec(x_lo=EdgeCondition(EdgeKind.DIRICHLET, 1.0))
        far = EdgeCondition(EdgeKind.DIRICHLET, self.params.phi0)
        self.phi_bc = BoundarySpec(x_hi=far, z_hi=far)
        self._phi_free = ~self.phi_bc.dirichlet_mask(self.grid)

        self._laplacian, self._laplacian_b = assemble_diffusion(
            np.ones(self.grid.shape), self.grid, self.c_bc
        )
        self._c_solver = ReusedFactorization("c")
        self._phi_solver = ReusedFactorization("φ")
        self._dt_hint = cfg.dt_start

        self.rejected_steps = 0
        self.phi_range = [np.inf, -np.inf]
        self.c_range = [np.inf, -np.inf]
        self.wall_warning = False
        self._watch_x = True
        self._watch_z = True

    # ------------------------------------------------------------------
    # 初始条件
    # ------------------------------------------------------------------
    def init_state(self) -> EvolutionState:
        X, Z = self.grid.mesh()
        shape = self.cfg.initial_shape
        if shape == InitialShape.QUARTER_DISK:
            psi = np.hypot(X, Z) - self.cfg.r0
        elif shape == InitialShape.STRIPE:
            psi = X - self.cfg.r0
        else:
            # 到区域外一条直线的距离, 整个 Q 都在内部
            psi = X - (self.grid.Lx + self.grid.Lz)

        state = EvolutionState(
            t=0.0,
            phi=np.full(self.grid.shape, self.params.phi0),
            c=np.ones(self.grid.shape),
            psi=psi,
        )

        self.arm_wall_watch(psi)
        self._track_ranges(state)
        self._check_walls(psi)
        logger.info(
            f"初始化 {shape.name.lower()}: 网格 {self.grid.nx}x{self.grid.nz}, r0={self.cfg.r0}"
        )
        return state

    # ------------------------------------------------------------------
    # 源项与守恒量
    # ------------------------------------------------------------------
    def indicator(self, psi: np.ndarray) -> np.ndarray:
        return heaviside(-psi, self.delta)

    def growth_source(self, phi: np.ndarray, c: np.ndarray, psi: np.ndarray) -> np.ndarray:
        if not self.cfg.enable_growth:
            return np.zeros(self.grid.shape)
        return g(phi) * Gamma(c, self.params) * self.indicator(psi)

    def total_mass(self, phi: np.ndarray) -> float:
        return float(np.sum(self.weights * phi))

    def tumor_area(self, psi: np.ndarray) -> float:
        return float(np.sum(self.weights * self.indicator(psi)))

    def mass_ledger(self, old: EvolutionState, new: EvolutionState) -> Tuple[float, float]:
        """
        细胞总量收支

        Returns:
            (observed, predicted): 实际的 ∫φ 变化与 dt·∫g(φ)Γ(c)χ_Ω (只计自由节点)
        """
        observed = self.total_mass(new.phi) - self.total_mass(old.phi)
        source = self.growth_source(old.phi, new.c, old.psi)
        predicted = new.dt_last * float(np.sum(self.weights * np.where(self._phi_free, source, 0.0)))
        return observed, predicted

    # ------------------------------------------------------------------
    # 时间步
    # ------------------------------------------------------------------
    def stable_dt(self, state: EvolutionState) -> float:
        if self.cfg.dt is not None:
            return self.cfg.dt
        vx, vz = _velocity(state.phi, self.params, self.grid)
        speed = max(np.max(np.abs(vx)), np.max(np.abs(vz)))
        dt = min(self.cfg.dt_max, self._dt_hint)
        if speed > 0.0:
            dt = min(dt, self.cfg.cfl * min(self.grid.hx, self.grid.hz) / speed)
        if self.cfg.phi_scheme == PhiScheme.EXPLICIT:
            dt = min(dt, self.cfg.explicit_dt_bound(float(np.max(F_prime(state.phi, self.params)))))
        return dt

    def _in_range(self, phi: np.ndarray, c: np.ndarray) -> bool:
        tol = self.cfg.range_tol
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(c))):
            return False
        return (
            np.min(phi) > 0.0 and np.max(phi) <= 1.0 + tol
            and np.min(c) >= -tol and np.max(c) <= 1.0 + tol
        )

    def _advance(self, state: EvolutionState, dt: float) -> Optional[EvolutionState]:
        p = self.params
        chi = self.indicator(state.psi)

        c_new = backward_euler_solve(
            state.c, dt, self._laplacian, self._laplacian_b, self.grid, self.c_bc,
            reaction=p.alpha * state.phi * chi, solver=self._c_solver,
        )

        source = self.growth_source(state.phi, c_new, state.psi)
        L, b = assemble_diffusion(F_prime(state.phi, p), self.grid, self.phi_bc)
        if self.cfg.phi_scheme == PhiScheme.IMPLICIT:
            phi_new = backward_euler_solve(
                state.phi, dt, L, b, self.grid, self.phi_bc, source=source, solver=self._phi_solver
            )
        else:
            phi_new = state.phi + dt * (apply_operator(L, b, state.phi) + np.where(self._phi_free, source, 0.0))
            phi_new[~self._phi_free] = p.phi0

        if not self._in_range(phi_new, c_new):
            return None

        vx, vz = _velocity(phi_new, p, self.grid)
        psi_new = advect_level_set(state.psi, vx, vz, dt, self.grid, self.cfg.cfl)
        step_index = state.step_index + 1
        if step_index % self.cfg.reinit_every == 0:
            psi_new = reinitialize(psi_new, self.grid)

        return EvolutionState(
            t=state.t + dt,
            phi=phi_new,
            c=c_new,
            psi=psi_new,
            step_index=step_index,
            dt_last=dt,
        )

    def step(self, state: EvolutionState, dt: Optional[float] = None) -> EvolutionState:
        """推进一步; 越界时拒绝并减半 dt, 低于 dt_min 抛出 StabilityError"""
        dt = self.stable_dt(state) if dt is None else dt
        requested = dt
        while True:
            candidate = self._advance(state, dt)
            if candidate is not None:
                break
            self.rejected_steps += 1
            logger.warning(f"第 {state.step_index + 1} 步超出 [0,1] 范围, dt={dt:.3e} 减半重试")
            dt *= 0.5
            if dt < self.cfg.dt_min:
                raise StabilityError(
                    f"t={state.t:.6g} 处时间步降至 {dt:.3e} < dt_min={self.cfg.dt_min:.3e}, 仍无法保持范围"
                )

        self._update_dt_hint(state, candidate, dt, rejected=dt < requested)
        self._track_ranges(candidate)
        self._check_walls(candidate.psi)
        logger.debug(
            f"步 {candidate.step_index}: t={candidate.t:.6g}, dt={dt:.3e}, "
            f"φ∈[{np.min(candidate.phi):.6f}, {np.max(candidate.phi):.6f}]"
        )
        return candidate

    def _update_dt_hint(self, old: EvolutionState, new: EvolutionState, dt: float, rejected: bool) -> None:
        """
        自动步长: 按单步变化量调整下一步上限

        c ≡ 1 的初值远离准稳态, 起步用 dt_start, 之后每步至多放大 dt_growth 倍,
        同时使 ‖Δc‖∞ <= dc_max, ‖Δφ‖∞ <= dphi_max
        """
        if self.cfg.dt is not None:
            return
        dc = float(np.max(np.abs(new.c - old.c)))
        dphi = float(np.max(np.abs(new.phi - old.phi)))
        ratio = min(
            self.cfg.dc_max / dc if dc > 0.0 else np.inf,
            self.cfg.dphi_max / dphi if dphi > 0.0 else np.inf,
        )
        # 快照截断的短步不拉低上限, 被拒绝过的步以实际 dt 为基准
        base = dt if rejected else self._dt_hint
        hint = base * self.cfg.dt_growth
        if np.isfinite(ratio):
            hint = min(hint, max(0.9 * ratio * dt, 0.5 * base))
        self._dt_hint = min(max(hint, self.cfg.dt_min), self.cfg.dt_max)

    def _track_ranges(self, state: EvolutionState) -> None:
        self.phi_range = [min(self.phi_range[0], float(np.min(state.phi))),
                          max(self.phi_range[1], float(np.max(state.phi)))]
        self.c_range = [min(self.c_range[0], float(np.min(state.c))),
                        max(self.c_range[1], float(np.max(state.c)))]

    def arm_wall_watch(self, psi: np.ndarray) -> None:
        # 已贴住的远端边不再监视 (条带, 全域)
        inside = psi < 0.0
        self._watch_x = not inside[:, -1].any()
        self._watch_z = not inside[-1, :].any()

    def _check_walls(self, psi: np.ndarray) -> None:
        if self.wall_warning:
            return
        m = self.cfg.wall_margin_cells
        inside = psi < 0.0
        if (self._watch_x and inside[:, -m:].any()) or (self._watch_z and inside[-m:, :].any()):
            self.wall_warning = True
            logger.warning(f"肿瘤距远端边界不足 {m} 个网格, 计算区域可能过小")

    # ------------------------------------------------------------------
    # 完整运行
    # ------------------------------------------------------------------
    def snapshot(self, state: EvolutionState) -> Snapshot:
        return Snapshot.capture(state, extract_interface(state.psi, self.grid))

    def run(self, on_snapshot: Optional[Callable[[Snapshot], None]] = None) -> EvolutionResult:
        """积分到 t_end; on_snapshot 在每个快照生成后立即调用 (用于边算边写)"""
        start = time.perf_counter()
        state = self.init_state()
        targets: List[float] = list(self.cfg.snapshot_times)
        snapshots: List[Snapshot] = []

        def keep(snap: Snapshot) -> None:
            snapshots.append(snap)
            if on_snapshot is not None:
                on_snapshot(snap)

        while targets and targets[0] <= _T_EPS:
            keep(self.snapshot(state))
            targets.pop(0)

        t_end = self.cfg.t_end
        while state.t < t_end - _T_EPS:
            target = targets[0] if targets else t_end
            dt = min(self.stable_dt(state), target - state.t)
            state = self.step(state, dt)
            if abs(state.t - target) <= _T_EPS:
                state.t = target
            if targets and state.t >= targets[0] - _T_EPS:
                keep(self.snapshot(state))
                targets.pop(0)
                logger.info(
                    f"快照 t={state.t:g}: 步数={state.step_index}, "
                    f"φ∈[{np.min(state.phi):.6f}, {np.max(state.phi):.6f}], "
                    f"c∈[{np.min(state.c):.6f}, {np.max(state.c):.6f}], "
                    f"肿瘤面积={self.tumor_area(state.psi):.4f}"
                )

        logger.info(
            f"演化完成: t={state.t:g}, 步数={state.step_index}, "
            f"拒绝={self.rejected_steps}, 耗时 {time.perf_counter() - start:.1f}s"
        )
        return EvolutionResult(snapshots=snapshots, manifest=self.manifest(state), final_state=state)

    def manifest(self, state: EvolutionState, status: RunStatus = RunStatus.OK) -> dict:
        return {
            "version": SystemConfig().VERSION,
            "command": "evolve",
            "status": status.name,
            "config": config_to_dict(self.cfg),
            "t_final": state.t,
            "steps": state.step_index,
            "rejected_steps": self.rejected_steps,
            "factorizations": {"c": self._c_solver.factorizations, "phi": self._phi_solver.factorizations},
            "phi_range": self.phi_range,
            "c_range": self.c_range,
            "wall_warning": self.wall_warning,
            "heaviside_delta": self.delta,
        }


def init_state(cfg: EvolutionConfig) -> EvolutionState:
    return CordEvolution(cfg).init_state()


def step(state: EvolutionState, cfg: EvolutionConfig, dt: Optional[float] = None) -> EvolutionState:
    evolution = CordEvolution(cfg)
    evolution.arm_wall_watch(state.psi)
    return evolution.step(state, dt)


def run(cfg: EvolutionConfig) -> EvolutionResult:
    return CordEvolution(cfg).run()


def transverse_profile(
    state: EvolutionState, grid: Grid2D, z: float
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """取最接近 z 的一行, 返回 (x, φ, c)"""
    j = int(np.argmin(np.abs(grid.z - z)))
    return grid.x.copy(), state.phi[j].copy(), state.c[j].copy()
