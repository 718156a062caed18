# -*- coding: utf-8 -*-
from dataclasses import dataclass, field, fields, is_dataclass
from enum import Enum
from typing import Any, Optional, Tuple

from models.enums import InitialShape, PhiScheme
from models.errors import ConfigError
from models.field_state import Grid2D
from models.params import ModelParams


@dataclass
class StationaryConfig:
    """一维定常问题不动点求解配置"""
    n: int = 2001                        # 网格节点数
    tol: float = 1e-10                   # 外层不动点 ‖Δφ‖∞ 容差
    max_iters: int = 500                 # 外层最大迭代次数

    # 内层 Picard 迭代 (A₂)
    picard_tol: float = 1e-12
    picard_max_iters: int = 500
    damping: float = 1.0                 # 初始阻尼因子, 残差上升时减半
    min_damping: float = 1.0 / 64.0      # 阻尼下限

    residual_bound: float = 1e-6         # 收敛解的离散相对残差上界 ‖Au-b‖∞/(‖A‖∞‖u‖∞+‖b‖∞)

    def __post_init__(self):
        if self.n < 3:
            raise ConfigError(f"stationary.n 至少为3, 当前 n={self.n}")
        if not (self.tol > 0.0 and self.picard_tol > 0.0 and self.residual_bound > 0.0):
            raise ConfigError("stationary 容差必须 > 0")
        if self.max_iters < 1 or self.picard_max_iters < 1:
            raise ConfigError("stationary 迭代次数必须 >= 1")
        if not 0.0 < self.min_damping <= self.damping <= 1.0:
            raise ConfigError(
                f"需要 0 < min_damping <= damping <= 1, 当前 damping={self.damping}, "
                f"min_damping={self.min_damping}"
            )


@dataclass
class WidthConfig:
    """稳态索宽求根配置"""
    w_seed: float = 0.25                 # 几何扫描起点 w = w_seed·2^k
    w_max: float = 64.0                  # 扫描上限
    xtol: float = 1e-10                  # 一般Γ二分容差
    quad_tol: float = 1e-12              # 自适应积分绝对容差
    linear_xtol: float = 1e-13           # 线性Γ超越方程二分容差

    def __post_init__(self):
        if not 0.0 < self.w_seed < self.w_max:
            raise ConfigError(f"需要 0 < w_seed < w_max, 当前 w_seed={self.w_seed}, w_max={self.w_max}")
        if not (self.xtol > 0.0 and self.quad_tol > 0.0 and self.linear_xtol > 0.0):
            raise ConfigError("width 容差必须 > 0")


@dataclass
class EvolutionConfig:
    """二维演化配置 - 默认值对应参考算例"""
    grid: Grid2D = field(default_factory=Grid2D)
    params: ModelParams = field(default_factory=ModelParams)

    # 时间步
    dt: Optional[float] = None           # None = 自动 (CFL 与稳定性上界)
    dt_max: float = 1.0
    dt_min: float = 1e-6
    cfl: float = 0.5
    dt_start: float = 1e-2               # 自动步长的起步值, 解析初始瞬态
    dt_growth: float = 1.25              # 自动步长每步最大放大倍数
    dc_max: float = 0.02                 # 单步 ‖Δc‖∞ 目标上限
    dphi_max: float = 1e-3               # 单步 ‖Δφ‖∞ 目标上限
    t_end: float = 900.0
    snapshot_times: Tuple[float, ...] = (100.0, 325.0, 650.0, 900.0)

    # 初始肿瘤区域
    initial_shape: InitialShape = InitialShape.QUARTER_DISK
    r0: float = 0.5

    # 水平集
    reinit_every: int = 20               # 每N步重新初始化为符号距离
    heaviside_width: float = 1.5         # 光滑Heaviside半宽 (网格单元数)

    # 格式
    phi_scheme: PhiScheme = PhiScheme.IMPLICIT
    enable_growth: bool = True           # 关闭则 Γ 项置零
    range_tol: float = 1e-10             # 范围检查容许的舍入误差
    wall_margin_cells: int = 10          # 距远端边界不足N格时警告

    def __post_init__(self):
        if self.dt is not None and not self.dt > 0.0:
            raise ConfigError(f"evolve.dt 必须 > 0, 当前 dt={self.dt}")
        if not 0.0 < self.dt_min <= self.dt_max:
            raise ConfigError(f"需要 0 < dt_min <= dt_max, 当前 dt_min={self.dt_min}, dt_max={self.dt_max}")
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError(f"evolve.cfl 必须在 (0,1] 内, 当前 cfl={self.cfl}")
        if not (self.dt_start > 0.0 and self.dt_growth >= 1.0):
            raise ConfigError(
                f"需要 dt_start > 0 且 dt_growth >= 1, 当前 dt_start={self.dt_start}, dt_growth={self.dt_growth}"
            )
        if not (self.dc_max > 0.0 and self.dphi_max > 0.0):
            raise ConfigError("evolve.dc_max 与 evolve.dphi_max 必须 > 0")
        if not self.t_end > 0.0:
            raise ConfigError(f"evolve.t_end 必须 > 0, 当前 t_end={self.t_end}")
        if not 0.0 < self.r0 < min(self.grid.Lx, self.grid.Lz):
            raise ConfigError(
                f"evolve.r0 必须在 (0, min(Lx,Lz)) 内, 当前 r0={self.r0}"
            )
        if self.phi_scheme == PhiScheme.EXPLICIT and self.dt is not None:
            bound = self.explicit_dt_bound()
            if self.dt > bound:
                raise ConfigError(
                    f"显式格式 evolve.dt={self.dt} 超过稳定性上界 {bound:.3e}"
                )
        if self.reinit_every < 1:
            raise ConfigError(f"evolve.reinit_every 必须 >= 1, 当前 {self.reinit_every}")
        if not self.heaviside_width > 0.0:
            raise ConfigError(f"evolve.heaviside_width 必须 > 0, 当前 {self.heaviside_width}")
        times = tuple(float(t) for t in self.snapshot_times)
        if any(t < 0.0 or t > self.t_end for t in times) or list(times) != sorted(times):
            raise ConfigError(f"evolve.snapshot_times 必须升序且位于 [0, t_end] 内, 当前 {times}")
        self.snapshot_times = times

    def explicit_dt_bound(self, max_diffusion: Optional[float] = None) -> float:
        """显式 φ 格式的时间步上界 0.4·h²/max F'(φ); 缺省按 F'(1)=μ 估计"""
        d = self.params.mu if max_diffusion is None else max_diffusion
        h = min(self.grid.hx, self.grid.hz)
        return 0.4 * h * h / max(d, 1e-300)


def config_to_dict(obj: Any) -> Any:
    """递归转换为可写入 manifest 的普通字典, 枚举取名称"""
    if is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: config_to_dict(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, Enum):
        return obj.name.lower()
    if isinstance(obj, (list, tuple)):
        return [config_to_dict(v) for v in obj]
    return obj
