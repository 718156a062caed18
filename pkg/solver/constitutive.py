# -*- coding: utf-8 -*-
"""
solver/constitutive.py

本构函数与分析常数

包含:
1. 细胞间应力 Σ(φ) (多孔介质族, μ>=1) 及广义应力 F(φ)=φ^μ, 反函数 f
2. Logistic 增殖函数 g(φ)=φ(1-φ)
3. 营养调控函数 Γ(c): 线性 / 双阈值
4. 导出常数 β₁, β₂, β 以及 ε 的 min-max 最优选择
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np
from scipy.optimize import bisect

from models.enums import GammaVariant
from models.errors import DomainError
from models.params import DerivedConstants, ModelParams

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

CP = 2.0 / math.pi          # (0,1) 上混合边界 Poincaré 常数
G_MAX = 0.25                # logistic g 的最大值
G_LIPSCHITZ = 1.0           # logistic g 在 [0,1] 上的Lipschitz常数

_RANGE_TOL = 1e-12
_EPS_GRID_POINTS = 10_000
_EPS_BISECT_RESIDUAL = 1e-8


def _pack(values: np.ndarray, scalar: bool) -> ArrayLike:
    return float(values) if scalar else values


def _check_unit_interval(values: np.ndarray, name: str) -> np.ndarray:
    if values.size and (np.min(values) < -_RANGE_TOL or np.max(values) > 1.0 + _RANGE_TOL):
        raise DomainError(
            f"{name} 超出 [0,1]: min={np.min(values):.6g}, max={np.max(values):.6g}"
        )
    return np.clip(values, 0.0, 1.0)


def sigma(phi: ArrayLike, p: ModelParams) -> ArrayLike:
    """细胞间应力 Σ(φ); μ=1 为对数分支"""
    scalar = np.ndim(phi) == 0
    x = np.asarray(phi, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError(f"Σ(φ) 要求 φ>0, 当前 min φ={np.min(x):.6g}")
    if p.mu == 1.0:
        out = np.log(x / p.phi0) / x
    else:
        out = (p.mu / (p.mu - 1.0)) * (x ** (p.mu - 1.0) - p.phi0 ** (p.mu - 1.0)) / x
    return _pack(out, scalar)


def phi_sigma(phi: ArrayLike, p: ModelParams) -> ArrayLike:
    """φΣ(φ), 其负梯度即细胞速度"""
    scalar = np.ndim(phi) == 0
    x = np.asarray(phi, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError(f"φΣ(φ) 要求 φ>0, 当前 min φ={np.min(x):.6g}")
    if p.mu == 1.0:
        out = np.log(x / p.phi0)
    else:
        out = (p.mu / (p.mu - 1.0)) * (x ** (p.mu - 1.0) - p.phi0 ** (p.mu - 1.0))
    return _pack(out, scalar)


def F(phi: ArrayLike, p: ModelParams) -> ArrayLike:
    """广义应力函数 F(φ)=φ^μ, 满足 F(0)=0, F(1)=1"""
    scalar = np.ndim(phi) == 0
    x = _check_unit_interval(np.asarray(phi, dtype=float), "F 的自变量 φ")
    return _pack(x ** p.mu, scalar)


def F_prime(phi: ArrayLike, p: ModelParams) -> ArrayLike:
    """F'(φ)=φ(φΣ(φ))'=μφ^(μ-1), 也是 φ 方程的等效扩散系数"""
    scalar = np.ndim(phi) == 0
    x = np.asarray(phi, dtype=float)
    if p.mu == 1.0:
        out = np.ones_like(x)
    else:
        out = p.mu * np.maximum(x, 0.0) ** (p.mu - 1.0)
    return _pack(out, scalar)


def f(u: ArrayLike, p: ModelParams) -> ArrayLike:
    """F 的反函数 f(u)=u^(1/μ)"""
    scalar = np.ndim(u) == 0
    x = _check_unit_interval(np.asarray(u, dtype=float), "f 的自变量 u")
    return _pack(x ** (1.0 / p.mu), scalar)


def g(phi: ArrayLike) -> ArrayLike:
    """logistic 增殖函数"""
    scalar = np.ndim(phi) == 0
    x = np.asarray(phi, dtype=float)
    return _pack(x * (1.0 - x), scalar)


def Gamma(c: ArrayLike, p: ModelParams) -> ArrayLike:
    """营养调控函数 Γ(c), 单调不减, Γ(c₀)=0"""
    scalar = np.ndim(c) == 0
    x = np.asarray(c, dtype=float)
    if p.gamma_variant == GammaVariant.LINEAR:
        out = p.gamma * (x - p.c0)
    else:
        out = np.where(
            x >= p.c0,
            p.gamma0 * (x - p.c0),
            np.where(x > p.c1, 0.0, p.gamma1 * (x - p.c1)),
        )
    return _pack(out, scalar)


def Gamma_max(p: ModelParams) -> float:
    """Γ_M = max(|Γ(0)|, Γ(1)); 线性Γ时即 γ·max(c₀, 1-c₀)"""
    return float(max(abs(Gamma(0.0, p)), Gamma(1.0, p)))


def Gamma_lipschitz(p: ModelParams) -> float:
    if p.gamma_variant == GammaVariant.LINEAR:
        return p.gamma
    return max(p.gamma0, p.gamma1)


def Lf_eps(eps: float, p: ModelParams) -> float:
    """f 在 [F(ε),1] 上的Lipschitz常数 1/min F' = 1/(μ ε^(μ-1))"""
    return 1.0 / (p.mu * eps ** (p.mu - 1.0))


def beta1(eps: ArrayLike, p: ModelParams) -> ArrayLike:
    e = np.asarray(eps, dtype=float)
    denom = p.phi0 ** p.mu - e ** p.mu
    if np.any(denom <= 0.0):
        raise DomainError(f"β₁ 要求 ε<φ₀={p.phi0}")
    out = np.sqrt(CP * G_MAX * Gamma_max(p) / denom)
    return _pack(out, np.ndim(eps) == 0)


def beta2(eps: ArrayLike, p: ModelParams) -> ArrayLike:
    e = np.asarray(eps, dtype=float)
    if np.any(e <= 0.0):
        raise DomainError("β₂ 要求 ε>0")
    out = CP * np.sqrt(G_LIPSCHITZ * Gamma_max(p) / (p.mu * e ** (p.mu - 1.0)))
    return _pack(out, np.ndim(eps) == 0)


def _grid_minimizer(p: ModelParams, n_points: int = _EPS_GRID_POINTS) -> Tuple[float, float]:
    eps = p.phi0 * np.arange(1, n_points + 1) / (n_points + 1)
    values = np.maximum(beta1(eps, p), beta2(eps, p))
    idx = int(np.argmin(values))
    return float(eps[idx]), float(values[idx])


def optimize_epsilon(p: ModelParams) -> Tuple[float, float]:
    """
    求解 min_{ε∈(0,φ₀)} max(β₁(ε), β₂(ε))

    μ>1 时 β₁ 递增, β₂ 递减, 最优点满足 β₁=β₂, 用二分法求解;
    μ=1 或二分无法夹逼时退回网格扫描

    Returns:
        (eps_star, beta_star)
    """
    if p.mu > 1.0:
        lo = p.phi0 * 1e-6
        hi = p.phi0 * (1.0 - 1e-9)

        def diff(e: float) -> float:
            return beta1(e, p) - beta2(e, p)

        d_lo, d_hi = diff(lo), diff(hi)
        if d_lo < 0.0 < d_hi:
            eps_star = bisect(diff, lo, hi, xtol=1e-14, maxiter=500)
            residual = abs(diff(eps_star))
            if residual < _EPS_BISECT_RESIDUAL:
                beta_star = max(beta1(eps_star, p), beta2(eps_star, p))
                logger.debug(f"ε 二分完成: ε*={eps_star:.10f}, β*={beta_star:.10f}, 残差={residual:.2e}")
                return float(eps_star), float(beta_star)
            logger.warning(f"ε 二分残差过大 ({residual:.2e}), 改用网格扫描")
        else:
            logger.info(f"β₁-β₂ 在 (0,φ₀) 端点未变号 ({d_lo:.3g}, {d_hi:.3g}), 改用网格扫描")

    return _grid_minimizer(p)


def resolve_epsilon(p: ModelParams) -> float:
    return p.epsilon if p.epsilon is not None else optimize_epsilon(p)[0]


def derived_constants(p: ModelParams, epsilon: float = None) -> DerivedConstants:
    eps = resolve_epsilon(p) if epsilon is None else epsilon
    if not 0.0 < eps < p.phi0:
        raise DomainError(f"epsilon 必须在 (0, phi0={p.phi0}) 内, 当前 epsilon={eps}")
    b1 = beta1(eps, p)
    b2 = beta2(eps, p)
    return DerivedConstants(
        epsilon=float(eps),
        gM=G_MAX,
        Lg=G_LIPSCHITZ,
        GammaM=Gamma_max(p),
        LGamma=Gamma_lipschitz(p),
        Lf_eps=Lf_eps(eps, p),
        CP=CP,
        beta1=b1,
        beta2=b2,
        beta=max(b1, b2),
    )


def check_assumptions(p: ModelParams, n_samples: int = 1001) -> Dict[str, bool]:
    """在 [0,1] 采样上数值检验 F, g, Γ 的结构假设"""
    xi = np.linspace(0.0, 1.0, n_samples)
    gam = Gamma(xi, p)
    slopes = np.abs(np.diff(gam)) / np.diff(xi)
    return {
        "F(0)=0": F(0.0, p) == 0.0,
        "F(1)=1": F(1.0, p) == 1.0,
        "F'>0 on (0,1]": bool(np.all(F_prime(xi[1:], p) > 0.0)),
        "g>=0 on [0,1]": bool(np.all(g(xi) >= 0.0)),
        "Gamma Lipschitz": bool(np.max(slopes) <= Gamma_lipschitz(p) * (1.0 + 1e-9)),
        "Gamma nondecreasing": bool(np.all(np.diff(gam) >= 0.0)),
        "Gamma(0)<0<Gamma(1)": bool(Gamma(0.0, p) < 0.0 < Gamma(1.0, p)),
    }



@dataclass(slots=True, frozen=True)
class ConstitutiveSet:
    """参数 + 已确定的 ε + 导出常数, 供各子命令共享"""
    params: ModelParams
    constants: DerivedConstants

    @classmethod
    def from_params(cls, p: ModelParams) -> "ConstitutiveSet":
        consts = derived_constants(p)
        return cls(params=p.with_epsilon(consts.epsilon), constants=consts)

    @property
    def epsilon(self) -> float:
        return self.constants.epsilon

    @property
    def beta(self) -> float:
        return self.constants.beta

    def assumptions(self) -> Dict[str, bool]:
        return check_assumptions(self.params)

    def sigma(self, phi: ArrayLike) -> ArrayLike:
        return sigma(phi, self.params)

    def F(self, phi: ArrayLike) -> ArrayLike:
        return F(phi, self.params)

    def f(self, u: ArrayLike) -> ArrayLike:
        return f(u, self.params)

    def g(self, phi: ArrayLike) -> ArrayLike:
        return g(phi)

    def Gamma(self, c: ArrayLike) -> ArrayLike:
        return Gamma(c, self.params)
