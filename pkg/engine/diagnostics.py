# -*- coding: utf-8 -*-
"""
engine/diagnostics.py

测量层: 把二维场转换为可与理论对比的观测量

- 尾部宽度 (后部 z 窗口内界面 x 坐标的平均)
- 头部位置 (界面最大 z)
- 存活/坏死分界深度 (每行 c 穿过 c₀ 的位置)
- 存活区面积占比
- 与稳态宽度理论的对照表
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from config.solver_config import WidthConfig
from config.system_config import SystemConfig
from engine.level_set import head_position, heaviside, interface_x_by_row
from models.errors import MeasurementError
from models.field_state import CordMetrics, EvolutionState, Grid2D
from models.params import ModelParams
from models.solutions import WidthSolution
from solver.freeboundary import get_width_solver, xbar_of_w

logger = logging.getLogger(__name__)

DEFAULT_WINDOW = (0.1, 0.4)     # 相对头部位置的后部窗口


def default_window(head: float) -> Tuple[float, float]:
    return DEFAULT_WINDOW[0] * head, DEFAULT_WINDOW[1] * head


def _threshold_depth(c_row: np.ndarray, x: np.ndarray, level: float) -> float:
    """c 沿 x 首次降到 level 以下的位置 (线性插值), 无穿越返回 NaN"""
    below = np.nonzero(c_row < level)[0]
    if below.size == 0 or below[0] == 0:
        return np.nan
    k = below[0]
    ca, cb = c_row[k - 1], c_row[k]
    return float(x[k - 1] + (x[k] - x[k - 1]) * (ca - level) / (ca - cb))


def measure(
    state: EvolutionState,
    grid: Grid2D,
    params: ModelParams,
    window: Optional[Tuple[float, float]] = None,
    heaviside_width: float = 1.5,
) -> CordMetrics:
    """
    测量肿瘤索的几何与营养观测量

    Args:
        state: 演化状态
        grid: 网格
        params: 模型参数 (取 c₀)
        window: 后部 z 窗口, None 时取 [0.1, 0.4]×头部位置
        heaviside_width: 存活占比积分使用的光滑宽度 (网格单元数)

    Raises:
        MeasurementError: 无肿瘤, 或窗口越过头部/区域
    """
    head = head_position(state.psi, grid)
    if head is None:
        raise MeasurementError("ψ 处处为正, 没有肿瘤区域可测量")

    z_lo, z_hi = default_window(head) if window is None else window
    if not 0.0 <= z_lo < z_hi <= grid.Lz:
        raise MeasurementError(f"z 窗口 [{z_lo}, {z_hi}] 不在区域 [0, {grid.Lz}] 内")
    if z_hi > head:
        raise MeasurementError(f"z 窗口上端 {z_hi:.4g} 超过头部位置 {head:.4g}")

    rows = np.nonzero((grid.z >= z_lo) & (grid.z <= z_hi))[0]
    if rows.size == 0:
        raise MeasurementError(f"z 窗口 [{z_lo}, {z_hi}] 内没有网格行")

    xs = interface_x_by_row(state.psi, grid)[rows]
    if np.all(np.isnan(xs)):
        raise MeasurementError("窗口内没有界面")
    tail_width = float(np.nanmean(xs))

    depths = np.array([_threshold_depth(state.c[j], grid.x, params.c0) for j in rows])
    if np.all(np.isnan(depths)):
        logger.warning(f"窗口 [{z_lo:.3g}, {z_hi:.3g}] 内 c 未穿过 c₀={params.c0}, 无坏死区")
        xbar = float("nan")
    else:
        xbar = float(np.nanmean(depths))

    w = grid.weights()
    chi = heaviside(-state.psi, heaviside_width * min(grid.hx, grid.hz))
    area = float(np.sum(w * chi))
    viable = float(np.sum(w * chi * (state.c >= params.c0))) / area if area > 0.0 else 0.0

    metrics = CordMetrics(
        tail_width=tail_width,
        head_position=float(head),
        xbar_measured=xbar,
        viable_fraction=min(max(viable, 0.0), 1.0),
        window=(float(z_lo), float(z_hi)),
    )
    logger.info(
        f"测量: 尾宽={metrics.tail_width:.4f}, 头部 z={metrics.head_position:.4f}, "
        f"x̄={metrics.xbar_measured:.4f}, 存活占比={metrics.viable_fraction:.3f}"
    )
    return metrics


@dataclass(slots=True, frozen=True)
class TheoryComparison:
    """测得尾宽与稳态宽度理论的对照"""
    tail_width: float
    w0: float
    relative_deviation: float
    beta_w0: float
    admissible: bool
    method: str
    xbar_measured_rescaled: float    # x̄_measured / tail_width
    xbar_theory: Optional[float]     # x̄_w 在测得宽度处
    head_position: float
    viable_fraction: float

    @property
    def rejected(self) -> bool:
        """βw₀ >= 1 时理论宽度应被拒绝"""
        return not self.admissible

    def to_row(self) -> Dict[str, object]:
        return {
            "tail_width": self.tail_width,
            "w0": self.w0,
            "relative_deviation": self.relative_deviation,
            "beta_w0": self.beta_w0,
            "admissible": int(self.admissible),
            "rejected": int(self.rejected),
            "method": self.method,
            "xbar_measured_rescaled": self.xbar_measured_rescaled,
            "xbar_theory": np.nan if self.xbar_theory is None else self.xbar_theory,
            "head_position": self.head_position,
            "viable_fraction": self.viable_fraction,
        }

    def to_table(self, system: Optional[SystemConfig] = None) -> str:
        fmt = (system or SystemConfig()).table_fmt
        lines: List[Tuple[str, str]] = []
        for key, value in self.to_row().items():
            if isinstance(value, float):
                text = fmt.format(value)
            else:
                text = str(value)
            lines.append((key, text))
        width = max(len(k) for k, _ in lines)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in lines)


def compare_to_theory(
    metrics: CordMetrics,
    p: ModelParams,
    width: Optional[WidthSolution] = None,
    cfg: Optional[WidthConfig] = None,
) -> TheoryComparison:
    """测得尾宽 vs 稳态宽度 w₀; 未给出 width 时按 Γ 类型自动求解"""
    if width is None:
        width = get_width_solver(p, cfg).solve(p)

    deviation = abs(metrics.tail_width - width.w0) / width.w0
    xbar_theory = xbar_of_w(metrics.tail_width, p) if metrics.tail_width > 0.0 else None
    rescaled = metrics.xbar_measured / metrics.tail_width if metrics.tail_width > 0.0 else float("nan")

    report = TheoryComparison(
        tail_width=metrics.tail_width,
        w0=width.w0,
        relative_deviation=deviation,
        beta_w0=width.beta_w0,
        admissible=width.admissible,
        method=width.method,
        xbar_measured_rescaled=rescaled,
        xbar_theory=xbar_theory,
        head_position=metrics.head_position,
        viable_fraction=metrics.viable_fraction,
    )
    if report.rejected:
        logger.warning(f"βw₀={width.beta_w0:.4f} >= 1, 理论宽度 w₀={width.w0:.4f} 应被拒绝")
    logger.info(f"尾宽 {metrics.tail_width:.4f} vs w₀ {width.w0:.4f}: 相对偏差 {deviation:.2%}")
    return report
