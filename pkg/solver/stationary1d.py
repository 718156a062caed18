# -*- coding: utf-8 -*-
"""
solver/stationary1d.py

一维定常边值问题 (重标度区间 [0,1], 固定宽度 w)

    -c'' + αw²φc = 0,          c(0)=1,  c'(1)=0      (算子 A₁: φ -> c)
    -(F(φ))'' = w²g(φ)Γ(c),   φ'(0)=0, φ(1)=φ₀      (算子 A₂: c -> φ)

不动点迭代 φ <- A₂(A₁(φ)), 起点 φ ≡ φ₀
离散: 均匀网格二阶中心差分, Neumann 端用镜像虚节点, 三对角直接求解
"""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from config.solver_config import StationaryConfig
from models.enums import BoundaryKind
from models.errors import AdmissibilityError, ConvergenceError, DomainError
from models.params import DerivedConstants, ModelParams
from models.solutions import CheckResult, DiagnosticsRecord, Grid1D, StationarySolution
from solver.constitutive import F, Gamma, derived_constants, g
from utils.math_utils import l2_norm, solve_tridiagonal, sup_norm

logger = logging.getLogger(__name__)

_RANGE_TOL = 1e-12
_MONOTONE_TOL = 1e-14
_STALL_LIMIT = 5
_STALL_ACCEPT_FACTOR = 1e2


def solve_linear_bvp(
    reaction: np.ndarray,
    source: np.ndarray,
    grid: Grid1D,
    kind: BoundaryKind,
    boundary_value: float = 0.0,
) -> np.ndarray:
    """
    求解 -u'' + r(x)u = k(x)

    DIRICHLET_NEUMANN: u(0)=boundary_value, u'(1)=0
    NEUMANN_DIRICHLET: u'(0)=0, u(1)=boundary_value
    """
    n = grid.n
    inv_h2 = 1.0 / grid.h ** 2
    r = np.broadcast_to(np.asarray(reaction, dtype=float), (n,))
    rhs = np.array(np.broadcast_to(np.asarray(source, dtype=float), (n,)))

    lower = np.full(n, -inv_h2)
    upper = np.full(n, -inv_h2)
    diag = 2.0 * inv_h2 + r

    if kind == BoundaryKind.DIRICHLET_NEUMANN:
        diag[0], upper[0], rhs[0] = 1.0, 0.0, boundary_value
        lower[-1] = -2.0 * inv_h2
    else:
        upper[0] = -2.0 * inv_h2
        diag[-1], lower[-1], rhs[-1] = 1.0, 0.0, boundary_value

    sol = solve_tridiagonal(lower, diag, upper, rhs)
    sol[0 if kind == BoundaryKind.DIRICHLET_NEUMANN else -1] = boundary_value
    return sol


def _check_range(values: np.ndarray, lo: float, hi: float, name: str) -> None:
    if np.min(values) < lo - _RANGE_TOL or np.max(values) > hi + _RANGE_TOL:
        raise DomainError(
            f"{name} 超出 [{lo:.6g},{hi:.6g}]: min={np.min(values):.6g}, max={np.max(values):.6g}"
        )


def solve_nutrient(phi: np.ndarray, w: float, p: ModelParams, grid: Grid1D) -> np.ndarray:
    """算子 A₁: 给定 φ 求营养浓度 c"""
    if w < 0.0:
        raise DomainError(f"w 必须 >= 0, 当前 w={w}")
    _check_range(phi, 0.0, 1.0, "φ")
    if w == 0.0:
        return np.ones(grid.n)
    return solve_linear_bvp(
        p.alpha * w * w * phi, 0.0, grid, BoundaryKind.DIRICHLET_NEUMANN, boundary_value=1.0
    )


def _admissibility_gate(w: float, consts: DerivedConstants) -> float:
    beta_w = consts.beta * w
    if beta_w >= 1.0:
        raise AdmissibilityError(
            f"βw={beta_w:.6f} >= 1 (β={consts.beta:.6f}, w={w}), 解的存在性无保证",
            beta_w=beta_w,
        )
    return beta_w


def _picard_cell(
    gamma_sigma: np.ndarray,
    w: float,
    p: ModelParams,
    grid: Grid1D,
    cfg: StationaryConfig,
    u_init: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, int]:
    """
    u = F(φ) - F(φ₀) 上的阻尼 Picard 迭代: -u'' = w²g̃(u)Γ(σ), u'(0)=0, u(1)=0

    g̃ 在 u+u₀ 越出 [0,1] 时按截断取值
    """
    scale = w * w * gamma_sigma

    def sweep(u: np.ndarray) -> np.ndarray:
        phi = _invert(u, p)
        return solve_linear_bvp(0.0, scale * g(phi), grid, BoundaryKind.NEUMANN_DIRICHLET)

    u = np.zeros(grid.n) if u_init is None else u_init.copy()
    theta = cfg.damping
    prev_res = np.inf
    best_res = np.inf
    stalls = 0

    for it in range(1, cfg.picard_max_iters + 1):
        target = sweep(u)
        res = sup_norm(target - u)
        if res < cfg.picard_tol:
            return target, it

        if res > prev_res and theta > cfg.min_damping:
            theta = max(0.5 * theta, cfg.min_damping)
            logger.debug(f"Picard 残差上升 ({prev_res:.3e} -> {res:.3e}), 阻尼减半为 {theta:.4g}")

        if res < best_res * 0.999:
            best_res, stalls = res, 0
        else:
            stalls += 1
            if stalls >= _STALL_LIMIT and best_res < _STALL_ACCEPT_FACTOR * cfg.picard_tol:
                logger.debug(f"Picard 停滞于舍入水平 (残差 {res:.3e}), 接受当前迭代")
                return target, it

        u = (1.0 - theta) * u + theta * target
        prev_res = res

    raise ConvergenceError(
        f"Picard 迭代 {cfg.picard_max_iters} 次未收敛, 残差 {prev_res:.3e}",
        last_iterate=_invert(u, p),
        iterations=cfg.picard_max_iters,
        residual=prev_res,
    )


def _invert(u: np.ndarray, p: ModelParams) -> np.ndarray:
    """φ = f(u + u₀) 写成 φ₀(1 + u/u₀)^(1/μ), u=0 处精确得到 φ₀"""
    u0 = F(p.phi0, p)
    ratio = np.clip(1.0 + u / u0, 0.0, 1.0 / u0)
    return p.phi0 * ratio ** (1.0 / p.mu)


def _phi_from_u(u: np.ndarray, p: ModelParams, epsilon: float) -> np.ndarray:
    total = u + F(p.phi0, p)
    if np.min(total) < F(epsilon, p) - _RANGE_TOL or np.max(total) > 1.0 + _RANGE_TOL:
        raise ConvergenceError(
            f"A₂ 的解离开 [ε,1]: F(φ) 范围 [{np.min(total):.6g}, {np.max(total):.6g}], ε={epsilon:.6g}",
            last_iterate=_invert(u, p),
        )
    return _invert(u, p)


def solve_cell(
    sigma_field: np.ndarray,
    w: float,
    p: ModelParams,
    grid: Grid1D,
    cfg: Optional[StationaryConfig] = None,
    constants: Optional[DerivedConstants] = None,
) -> np.ndarray:
    """算子 A₂: 给定营养场 σ 求细胞体积比 φ ∈ V_ε"""
    cfg = cfg or StationaryConfig(n=grid.n)
    consts = constants or derived_constants(p)
    _admissibility_gate(w, consts)
    _check_range(sigma_field, 0.0, 1.0, "σ")

    u, _ = _picard_cell(Gamma(sigma_field, p), w, p, grid, cfg)
    return _phi_from_u(u, p, consts.epsilon)


def cell_operator(
    phi: np.ndarray,
    w: float,
    p: ModelParams,
    grid: Grid1D,
    cfg: Optional[StationaryConfig] = None,
    constants: Optional[DerivedConstants] = None,
) -> np.ndarray:
    """复合算子 A = A₂∘A₁"""
    consts = constants or derived_constants(p)
    return solve_cell(solve_nutrient(phi, w, p, grid), w, p, grid, cfg, consts)


def _relative_residual(res: np.ndarray, op_norm: float, u: np.ndarray, rhs: np.ndarray) -> float:
    """‖Au-b‖∞ / (‖A‖∞‖u‖∞ + ‖b‖∞), 与网格步长无关"""
    scale = op_norm * sup_norm(u) + sup_norm(rhs)
    return sup_norm(res) / scale if scale > 0.0 else sup_norm(res)


def nutrient_residual(phi: np.ndarray, c: np.ndarray, w: float, p: ModelParams, grid: Grid1D) -> float:
    """A₁ 离散方程的相对残差"""
    inv_h2 = 1.0 / grid.h ** 2
    r = p.alpha * w * w * phi
    res = np.empty(grid.n)
    res[0] = c[0] - 1.0
    res[1:-1] = (-c[:-2] + 2.0 * c[1:-1] - c[2:]) * inv_h2 + r[1:-1] * c[1:-1]
    res[-1] = 2.0 * (c[-1] - c[-2]) * inv_h2 + r[-1] * c[-1]
    return _relative_residual(res, 4.0 * inv_h2 + sup_norm(r), c, np.ones(1))


def cell_residual(phi: np.ndarray, c: np.ndarray, w: float, p: ModelParams, grid: Grid1D) -> float:
    inv_h2 = 1.0 / grid.h ** 2
    u = F(phi, p)
    src = w * w * g(phi) * Gamma(c, p)
    res = np.empty(grid.n)
    res[0] = 2.0 * (u[0] - u[1]) * inv_h2 - src[0]
    res[1:-1] = (-u[:-2] + 2.0 * u[1:-1] - u[2:]) * inv_h2 - src[1:-1]
    res[-1] = phi[-1] - p.phi0
    return _relative_residual(res, 4.0 * inv_h2, u, src)


def fixed_point(
    w: float,
    p: ModelParams,
    grid: Optional[Grid1D] = None,
    cfg: Optional[StationaryConfig] = None,
) -> StationarySolution:
    """
    不动点迭代求解定常问题

    Args:
        w: 宽度参数
        p: 模型参数 (epsilon 为 None 时取 min-max 最优值)
        grid: 网格, 默认取 cfg.n 个节点
        cfg: 求解配置

    Returns:
        StationarySolution

    Raises:
        AdmissibilityError: βw >= 1
        ConvergenceError: 外层或内层迭代未收敛, 或离散残差超过上界
    """
    cfg = cfg or StationaryConfig()
    grid = grid or Grid1D(cfg.n)
    consts = derived_constants(p)
    beta_w = _admissibility_gate(w, consts)

    phi = np.full(grid.n, p.phi0)
    u = None
    diff = np.inf
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iters + 1):
        c = solve_nutrient(phi, w, p, grid)
        u, inner = _picard_cell(Gamma(c, p), w, p, grid, cfg, u_init=u)
        phi_new = _phi_from_u(u, p, consts.epsilon)
        diff = sup_norm(phi_new - phi)
        phi = phi_new
        logger.debug(f"不动点第 {iterations} 次: ‖Δφ‖∞={diff:.3e}, Picard {inner} 次")
        if diff < cfg.tol:
            converged = True
            break

    if not converged:
        raise ConvergenceError(
            f"不动点迭代 {cfg.max_iters} 次未收敛 (w={w}), ‖Δφ‖∞={diff:.3e}",
            last_iterate=phi,
            iterations=cfg.max_iters,
            residual=diff,
        )

    c = solve_nutrient(phi, w, p, grid)
    res_phi = cell_residual(phi, c, w, p, grid)
    res_c = nutrient_residual(phi, c, w, p, grid)
    if max(res_phi, res_c) > cfg.residual_bound:
        raise ConvergenceError(
            f"离散残差过大: res_φ={res_phi:.3e}, res_c={res_c:.3e} > {cfg.residual_bound:.1e}",
            last_iterate=phi,
            iterations=iterations,
            residual=max(res_phi, res_c),
        )

    apriori = p.alpha * w * w * l2_norm(phi, grid.h)
    if sup_norm(1.0 - c) > apriori + _RANGE_TOL:
        logger.warning(f"先验估计 ‖1-c‖∞ <= αw²‖φ‖ 不成立: {sup_norm(1.0 - c):.6g} > {apriori:.6g}")

    logger.info(
        f"定常解收敛: w={w:.6g}, 迭代 {iterations} 次, βw={beta_w:.4f}, "
        f"res_φ={res_phi:.2e}, res_c={res_c:.2e}"
    )
    return StationarySolution(
        w=w,
        x=grid.x,
        phi=phi,
        c=c,
        epsilon=consts.epsilon,
        iterations=iterations,
        residual_phi=res_phi,
        residual_c=res_c,
        beta_w=beta_w,
        admissible=beta_w < 1.0,
    )


def free_boundary_residual(sol: StationarySolution) -> float:
    """自由边界条件 φ'(1)=0 的离散残差 (二阶单侧差分)"""
    h = sol.x[1] - sol.x[0]
    return float((3.0 * sol.phi[-1] - 4.0 * sol.phi[-2] + sol.phi[-3]) / (2.0 * h))


def verify_stationary(
    sol: StationarySolution, p: ModelParams, free_boundary_tol: float = 1e-6
) -> DiagnosticsRecord:
    """
    检查定常解的理论性质

    - distance_bound:  ‖φ-φ₀‖∞ <= (g_M/(L_g·C_P))(β₂w)²
    - apriori_c:       ‖1-c‖∞ <= αw²‖φ‖_L²
    - c_monotone:      c 单调不增 (违反节点数)
    - range:           ε <= φ <= 1, 0 <= c <= 1 (最大越界量)
    - phi_above_phi0:  仅当 |φ'(1)| <= free_boundary_tol 时检查 φ >= φ₀
    """
    consts = derived_constants(p, sol.epsilon)
    h = sol.x[1] - sol.x[0]
    w = sol.w

    distance = sup_norm(sol.phi - p.phi0)
    distance_bound = consts.gM / (consts.Lg * consts.CP) * (consts.beta2 * w) ** 2

    depletion = sup_norm(1.0 - sol.c)
    apriori = p.alpha * w * w * l2_norm(sol.phi, h)

    violations = int(np.count_nonzero(np.diff(sol.c) > _MONOTONE_TOL))

    overshoot = max(
        sol.epsilon - np.min(sol.phi),
        np.max(sol.phi) - 1.0,
        -np.min(sol.c),
        np.max(sol.c) - 1.0,
        0.0,
    )
    overshoot = float(overshoot) if overshoot > _RANGE_TOL else 0.0

    checks = [
        CheckResult("distance_bound", distance <= distance_bound + _RANGE_TOL, distance, distance_bound),
        CheckResult("apriori_c", depletion <= apriori + _RANGE_TOL, depletion, apriori),
        CheckResult("c_monotone", violations == 0, float(violations), 0.0),
        CheckResult("range", overshoot == 0.0, overshoot, 0.0),
    ]

    fb = abs(free_boundary_residual(sol))
    if fb <= free_boundary_tol:
        deficit = max(float(p.phi0 - np.min(sol.phi)), 0.0)
        checks.append(CheckResult("phi_above_phi0", deficit <= _RANGE_TOL, deficit, 0.0))

    record = DiagnosticsRecord(tuple(checks))
    for chk in record.checks:
        if not chk.passed:
            logger.warning(f"检查未通过: {chk.name} 观测值 {chk.observed:.6g}, 上界 {chk.bound:.6g}")
    return record
