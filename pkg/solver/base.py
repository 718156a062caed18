# -*- coding: utf-8 -*-
"""
solver/base.py

稳态索宽求解器基类定义
"""

from abc import ABC, abstractmethod
from typing import Dict, Optional

from config.solver_config import WidthConfig
from models.params import ModelParams
from models.solutions import WidthSolution


class WidthSolver(ABC):
    """稳态索宽求解器基类"""

    method: str = "base"

    def __init__(self, cfg: Optional[WidthConfig] = None):
        self.cfg = cfg or WidthConfig()

    @abstractmethod
    def solve(self, p: ModelParams) -> WidthSolution:
        """
        求 ∫₀¹ Γ(c⁰_w) dx = 0 的正根 w₀

        Args:
            p: 模型参数

        Returns:
            WidthSolution
        """
        pass

    def supports(self, p: ModelParams) -> bool:
        """该求解器是否适用于给定的 Γ 形式（可选实现）"""
        return True

    def describe(self) -> Dict[str, float]:
        """
        求解器配置摘要（写入manifest）

        Returns:
            配置字典
        """
        return {}
