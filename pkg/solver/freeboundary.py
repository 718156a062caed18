# -*- coding: utf-8 -*-
"""
solver/freeboundary.py

近似自由边界问题

    c⁰_w(x) = cosh(s(1-x))/cosh(s),  s = w√(αφ₀)      零阶营养剖面
    C(w)    = ∫₀¹ Γ(c⁰_w(x)) dx                        宽度条件 C(w₀)=0
    -(φ⁽¹⁾)'' = Γ_M⁻¹ g(φ₀) Γ(c⁰_w),  φ⁽¹⁾'(0)=0, φ⁽¹⁾(1)=0

一阶近似 φ ≈ φ₀ + νφ⁽¹⁾, ν=(β₂w)², 与不动点精确解比较得到相对误差 E[φ], E[c]
"""

from __future__ import annotations

import logging
import math
import warnings
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import bisect

from config.solver_config import StationaryConfig, WidthConfig
from models.enums import BoundaryKind, GammaVariant
from models.errors import DomainError, NoRootError, QuadratureError
from models.params import ModelParams
from models.solutions import Grid1D, PerturbativeReconstruction, StationarySolution, WidthSolution
from solver.base import WidthSolver
from solver.constitutive import Gamma, Gamma_max, derived_constants, g
from solver.stationary1d import fixed_point, solve_linear_bvp
from utils.math_utils import cosh_ratio

logger = logging.getLogger(__name__)

_LARGE_S = 350.0


def _decay_rate(w: float, p: ModelParams) -> float:
    return w * math.sqrt(p.alpha * p.phi0)


def c0_closed_form(x: Union[float, np.ndarray], w: float, p: ModelParams) -> Union[float, np.ndarray]:
    """零阶营养剖面 c⁰_w(x), 取值于 (0,1], c⁰_w(0)=1"""
    if w < 0.0:
        raise DomainError(f"w 必须 >= 0, 当前 w={w}")
    values = cosh_ratio(_decay_rate(w, p), x)
    return float(values) if np.ndim(x) == 0 else values


def _level_crossing(w: float, level: float, p: ModelParams) -> Optional[float]:
    """c⁰_w(x) = level 的唯一解; c⁰_w(1) > level 时不存在"""
    s = _decay_rate(w, p)
    if s == 0.0 or not 0.0 < level < 1.0:
        return None
    # c⁰_w(1) = 1/cosh(s)
    if s < _LARGE_S and 1.0 / math.cosh(s) > level:
        return None
    if s < _LARGE_S:
        acosh = math.acosh(level * math.cosh(s))
    else:
        log_y = math.log(level) + s + math.log1p(math.exp(-2.0 * s)) - math.log(2.0)
        acosh = log_y + math.log1p(math.sqrt(-math.expm1(-2.0 * log_y)))
    return 1.0 - acosh / s


def xbar_of_w(w: float, p: ModelParams) -> Optional[float]:
    """存活/坏死分界 x̄_w: c⁰_w(x̄)=c₀; w < w_* 时返回 None"""
    if w < 0.0:
        raise DomainError(f"w 必须 >= 0, 当前 w={w}")
    return _level_crossing(w, p.c0, p)


def critical_width(p: ModelParams) -> float:
    """w_* = arccosh(1/c₀)/√(αφ₀), 坏死区出现的最小宽度"""
    return math.acosh(1.0 / p.c0) / math.sqrt(p.alpha * p.phi0)


def capital_C(w: float, p: ModelParams, quad_tol: float = 1e-12) -> float:
    """
    C(w) = ∫₀¹ Γ(c⁰_w(x)) dx, 自适应积分

    双阈值 Γ 在 c⁰_w = c₀ 与 c⁰_w = c₁ 处有折点, 积分时在这些点处分段
    """
    if w < 0.0:
        raise DomainError(f"w 必须 >= 0, 当前 w={w}")
    if w == 0.0:
        return float(Gamma(1.0, p))

    points: List[float] = []
    if p.gamma_variant == GammaVariant.TWO_THRESHOLD:
        for level in (p.c0, p.c1):
            xk = _level_crossing(w, level, p)
            if xk is not None and 0.0 < xk < 1.0:
                points.append(xk)

    def integrand(x: float) -> float:
        return Gamma(c0_closed_form(x, w, p), p)

    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, abserr = quad(
                integrand, 0.0, 1.0,
                epsabs=quad_tol, epsrel=0.0, limit=200,
                points=sorted(points) or None,
            )
        except IntegrationWarning as e:
            raise QuadratureError(f"C(w) 积分未达到容差 (w={w}): {e}") from e
    return float(value)


def linear_width_bracket(p: ModelParams) -> Tuple[float, float]:
    """线性Γ下 w₀ 的解析区间 [√(3(1-c₀)/(αφ₀)), 1/(c₀√(αφ₀))]"""
    k = math.sqrt(p.alpha * p.phi0)
    return math.sqrt(3.0 * (1.0 - p.c0)) / k, 1.0 / (p.c0 * k)


def width_equation_residual(w: float, p: ModelParams) -> float:
    """tanh(s) - c₀ s, s = w√(αφ₀)"""
    s = _decay_rate(w, p)
    return math.tanh(s) - p.c0 * s


def _width_solution(
    w0: float,
    bracket: Tuple[float, float],
    p: ModelParams,
    method: str,
    scanned: List[Tuple[float, float]],
) -> WidthSolution:
    consts = derived_constants(p)
    beta_w0 = consts.beta * w0
    sol = WidthSolution(
        w0=w0,
        bracket=bracket,
        beta_w0=beta_w0,
        admissible=beta_w0 < 1.0,
        nu=(consts.beta2 * w0) ** 2,
        xbar=xbar_of_w(w0, p),
        epsilon=consts.epsilon,
        method=method,
        scanned=scanned,
    )
    if not sol.admissible:
        logger.warning(f"βw₀={beta_w0:.4f} >= 1, w₀={w0:.6f} 应予拒绝")
    logger.info(f"稳态索宽 ({method}): w₀={w0:.10f}, βw₀={beta_w0:.4f}, ν={sol.nu:.4f}")
    return sol


def solve_width_general(p: ModelParams, cfg: Optional[WidthConfig] = None) -> WidthSolution:
    """
    几何扫描 w = w_seed·2^k 找到 C(w) 的第一次变号, 再二分到 |Δw| < xtol

    Raises:
        NoRootError: w_max 以内未出现变号
    """
    cfg = cfg or WidthConfig()
    scanned: List[Tuple[float, float]] = [(0.0, capital_C(0.0, p, cfg.quad_tol))]
    w_prev, w = 0.0, cfg.w_seed
    c_w = scanned[0][1]

    while w <= cfg.w_max:
        c_w = capital_C(w, p, cfg.quad_tol)
        scanned.append((w, c_w))
        if c_w <= 0.0:
            break
        w_prev, w = w, 2.0 * w
    else:
        raise NoRootError(
            f"w <= {cfg.w_max} 内 C(w) 未变号, 扫描值: "
            + ", ".join(f"C({wk:g})={ck:.3g}" for wk, ck in scanned),
            scanned=scanned,
        )

    if c_w == 0.0:
        w0 = w
    else:
        w0 = bisect(lambda v: capital_C(v, p, cfg.quad_tol), w_prev, w, xtol=cfg.xtol, maxiter=500)
    return _width_solution(float(w0), (w_prev, w), p, "general", scanned)


def solve_width_linear(p: ModelParams, cfg: Optional[WidthConfig] = None) -> WidthSolution:
    """线性Γ: 在解析区间内二分求解 tanh(w√(αφ₀)) = c₀·w√(αφ₀)"""
    if p.gamma_variant != GammaVariant.LINEAR:
        raise DomainError("solve_width_linear 仅适用于线性Γ")
    if not 0.0 < p.c0 < 1.0:
        raise DomainError(f"c0 必须在 (0,1) 内, 当前 c0={p.c0}")
    cfg = cfg or WidthConfig()
    lo, hi = linear_width_bracket(p)
    w0 = bisect(width_equation_residual, lo, hi, args=(p,), xtol=cfg.linear_xtol, maxiter=500)
    return _width_solution(float(w0), (lo, hi), p, "linear", [])


class GeneralWidthSolver(WidthSolver):
    method = "general"

    def solve(self, p: ModelParams) -> WidthSolution:
        return solve_width_general(p, self.cfg)

    def describe(self) -> Dict[str, float]:
        return {"w_seed": self.cfg.w_seed, "w_max": self.cfg.w_max,
                "xtol": self.cfg.xtol, "quad_tol": self.cfg.quad_tol}


class LinearWidthSolver(WidthSolver):
    method = "linear"

    def solve(self, p: ModelParams) -> WidthSolution:
        return solve_width_linear(p, self.cfg)

    def supports(self, p: ModelParams) -> bool:
        return p.gamma_variant == GammaVariant.LINEAR

    def describe(self) -> Dict[str, float]:
        return {"xtol": self.cfg.linear_xtol}


def get_width_solver(p: ModelParams, cfg: Optional[WidthConfig] = None) -> WidthSolver:
    """线性Γ用解析区间二分, 其余用积分+扫描"""
    linear = LinearWidthSolver(cfg)
    return linear if linear.supports(p) else GeneralWidthSolver(cfg)


def perturbation_phi1(w: float, p: ModelParams, grid: Grid1D) -> np.ndarray:
    """一阶扰动场 φ⁽¹⁾, 常数取 Γ_M⁻¹"""
    if w < 0.0:
        raise DomainError(f"w 必须 >= 0, 当前 w={w}")
    source = g(p.phi0) * Gamma(c0_closed_form(grid.x, w, p), p) / Gamma_max(p)
    return solve_linear_bvp(0.0, source, grid, BoundaryKind.NEUMANN_DIRICHLET)


def reconstruct_and_errors(
    w: float,
    p: ModelParams,
    grid: Optional[Grid1D] = None,
    cfg: Optional[StationaryConfig] = None,
    exact: Optional[StationarySolution] = None,
) -> PerturbativeReconstruction:
    """
    构造 φ_approx = φ₀ + νφ⁽¹⁾, c_approx = c⁰_w, 并与不动点精确解比较

    E[φ] = 1 - φ_approx/φ_exact,  E[c] = 1 - c_approx/c_exact
    """
    cfg = cfg or StationaryConfig()
    grid = grid or Grid1D(cfg.n)
    if exact is None:
        exact = fixed_point(w, p, grid, cfg)
    elif exact.x.size != grid.n or exact.w != w:
        raise DomainError("给定的精确解与网格或宽度不一致")

    consts = derived_constants(p, exact.epsilon)
    nu = (consts.beta2 * w) ** 2
    c0 = c0_closed_form(grid.x, w, p)
    phi1 = perturbation_phi1(w, p, grid)
    phi_approx = p.phi0 + nu * phi1

    recon = PerturbativeReconstruction(
        w=w,
        nu=nu,
        x=grid.x,
        c0=c0,
        phi1=phi1,
        phi_approx=phi_approx,
        c_approx=c0,
        E_phi=1.0 - phi_approx / exact.phi,
        E_c=1.0 - c0 / exact.c,
        exact=exact,
    )
    logger.info(f"摄动重构 w={w:.6g}: max|E[φ]|={recon.max_E_phi:.3e}, max|E[c]|={recon.max_E_c:.3e}")
    return recon
