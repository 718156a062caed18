# -*- coding: utf-8 -*-
"""
models/params.py

无量纲参数记录与导出常数
"""

from __future__ import annotations
from dataclasses import dataclass, replace
from typing import Optional

from models.enums import GammaVariant
from models.errors import DomainError


@dataclass(slots=True, frozen=True)
class ModelParams:
    """无量纲模型参数 (默认值即参考算例)"""
    mu: float = 3.0                  # 应力函数指数 μ >= 1
    phi0: float = 0.75               # 无应力体积比 φ₀ ∈ (0,1)
    gamma: float = 0.7               # 增殖系数 γ (线性Γ)
    c0: float = 0.8                  # 增殖阈值 c₀ ∈ (0,1)
    alpha: float = 0.5               # 营养消耗系数 α
    gamma_variant: GammaVariant = GammaVariant.LINEAR

    # 双阈值Γ: c>=c0 增殖, c1<c<c0 静止, c<=c1 坏死
    gamma0: Optional[float] = None
    gamma1: Optional[float] = None
    c1: Optional[float] = None

    # 下界 ε ∈ (0, φ₀); None 表示由 optimize_epsilon 决定
    epsilon: Optional[float] = None

    def __post_init__(self):
        if not self.mu >= 1.0:
            raise DomainError(f"mu 必须 >= 1, 当前 mu={self.mu}")
        if not 0.0 < self.phi0 < 1.0:
            raise DomainError(f"phi0 必须在 (0,1) 内, 当前 phi0={self.phi0}")
        if not 0.0 < self.c0 < 1.0:
            raise DomainError(f"c0 必须在 (0,1) 内, 当前 c0={self.c0}")
        if not self.gamma > 0.0:
            raise DomainError(f"gamma 必须 > 0, 当前 gamma={self.gamma}")
        if not self.alpha > 0.0:
            raise DomainError(f"alpha 必须 > 0, 当前 alpha={self.alpha}")
        if self.epsilon is not None and not 0.0 < self.epsilon < self.phi0:
            raise DomainError(
                f"epsilon 必须在 (0, phi0={self.phi0}) 内, 当前 epsilon={self.epsilon}"
            )

        if self.gamma_variant == GammaVariant.TWO_THRESHOLD:
            for name in ("gamma0", "gamma1", "c1"):
                if getattr(self, name) is None:
                    raise DomainError(f"双阈值Γ需要参数 {name}")
            if not (self.gamma0 > 0.0 and self.gamma1 > 0.0):
                raise DomainError(
                    f"gamma0, gamma1 必须 > 0, 当前 gamma0={self.gamma0}, gamma1={self.gamma1}"
                )
            if not 0.0 < self.c1 < self.c0:
                raise DomainError(f"c1 必须满足 0 < c1 < c0={self.c0}, 当前 c1={self.c1}")

    def with_epsilon(self, epsilon: float) -> "ModelParams":
        return replace(self, epsilon=epsilon)

    def with_updates(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(slots=True, frozen=True)
class DerivedConstants:
    """分析常数, 均在给定 ε 下计算"""
    epsilon: float
    gM: float        # sup|g| on [0,1]
    Lg: float        # g 的Lipschitz常数
    GammaM: float    # sup|Γ| on [0,1]
    LGamma: float    # Γ 的Lipschitz常数
    Lf_eps: float    # f=F⁻¹ 在 [F(ε),1] 上的Lipschitz常数
    CP: float        # Poincaré 常数 2/π
    beta1: float
    beta2: float
    beta: float

    @property
    def max_admissible_width(self) -> float:
        """βw<1 对应的宽度上界"""
        return 1.0 / self.beta
