# -*- coding: utf-8 -*-
"""
models/errors.py

模型与求解器异常定义
"""

from __future__ import annotations
from typing import List, Optional, Tuple

import numpy as np


class CordModelError(Exception):
    """所有肿瘤索模型错误的基类"""


class ConfigError(CordModelError, ValueError):
    """配置文件校验失败"""


class DomainError(CordModelError, ValueError):
    """参数或自变量超出定义域"""


class AdmissibilityError(CordModelError):
    """βw >= 1, 存在性/唯一性不再有保证"""

    def __init__(self, message: str, beta_w: float):
        super().__init__(message)
        self.beta_w = beta_w


class ConvergenceError(CordModelError):
    """迭代未收敛, 附带最后一次迭代结果便于诊断"""

    def __init__(
        self,
        message: str,
        last_iterate: Optional[np.ndarray] = None,
        iterations: int = 0,
        residual: float = float("nan"),
    ):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations
        self.residual = residual


class LinearSolveError(CordModelError):
    """线性方程组求解失败 (离散矩阵奇异)"""


class QuadratureError(CordModelError):
    """自适应积分未达到容差"""


class NoRootError(CordModelError):
    """宽度扫描区间内未找到变号"""

    def __init__(self, message: str, scanned: List[Tuple[float, float]]):
        super().__init__(message)
        self.scanned = scanned


class StabilityError(CordModelError):
    """时间步长减半到 dt_min 以下仍被拒绝"""


class MeasurementError(CordModelError):
    """诊断测量窗口无效或肿瘤区域为空"""
