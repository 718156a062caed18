# -*- coding: utf-8 -*-
"""
config/run_config.py

运行配置文件 (YAML) 的结构定义与加载

每个模块一个段落: params / stationary / width / evolve / sweep / output。
未知键一律拒绝, 校验失败统一转为 ConfigError, 消息中带字段路径 (如 params.phi0)。
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.solver_config import EvolutionConfig, StationaryConfig, WidthConfig
from models.enums import GammaVariant, InitialShape, PhiScheme
from models.errors import ConfigError, DomainError
from models.field_state import Grid2D
from models.params import ModelParams

logger = logging.getLogger(__name__)

# 扫描允许变化的参数 (均为 params 段中的实数字段)
SWEEPABLE = ("mu", "phi0", "gamma", "c0", "alpha", "gamma0", "gamma1", "c1", "epsilon")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsSection(_Section):
    mu: float = Field(3.0, ge=1.0)
    phi0: float = Field(0.75, gt=0.0, lt=1.0)
    gamma: float = Field(0.7, gt=0.0)
    c0: float = Field(0.8, gt=0.0, lt=1.0)
    alpha: float = Field(0.5, gt=0.0)
    gamma_variant: Literal["linear", "two_threshold"] = "linear"
    gamma0: Optional[float] = Field(None, gt=0.0)
    gamma1: Optional[float] = Field(None, gt=0.0)
    c1: Optional[float] = Field(None, gt=0.0, lt=1.0)
    epsilon: Optional[float] = Field(None, gt=0.0, lt=1.0)


class StationarySection(_Section):
    w: Optional[float] = Field(None, gt=0.0)     # None = 取稳态宽度 w₀
    n: int = Field(2001, ge=3)
    tol: float = Field(1e-10, gt=0.0)
    max_iters: int = Field(500, ge=1)
    picard_tol: float = Field(1e-12, gt=0.0)
    picard_max_iters: int = Field(500, ge=1)
    damping: float = Field(1.0, gt=0.0, le=1.0)
    min_damping: float = Field(1.0 / 64.0, gt=0.0, le=1.0)
    residual_bound: float = Field(1e-6, gt=0.0)


class WidthSection(_Section):
    method: Literal["auto", "linear", "general"] = "auto"
    n: int = Field(2001, ge=3)                   # 摄动重构网格
    w_seed: float = Field(0.25, gt=0.0)
    w_max: float = Field(64.0, gt=0.0)
    xtol: float = Field(1e-10, gt=0.0)
    quad_tol: float = Field(1e-12, gt=0.0)
    linear_xtol: float = Field(1e-13, gt=0.0)


class GridSection(_Section):
    nx: int = Field(128, ge=16)
    nz: int = Field(512, ge=16)
    Lx: float = Field(2.5, gt=0.0)
    Lz: float = Field(10.0, gt=0.0)


class EvolveSection(_Section):
    grid: GridSection = Field(default_factory=GridSection)
    dt: Optional[float] = Field(None, gt=0.0)
    dt_max: float = Field(1.0, gt=0.0)
    dt_min: float = Field(1e-6, gt=0.0)
    cfl: float = Field(0.5, gt=0.0, le=1.0)
    dt_start: float = Field(1e-2, gt=0.0)
    dt_growth: float = Field(1.25, ge=1.0)
    dc_max: float = Field(0.02, gt=0.0)
    dphi_max: float = Field(1e-3, gt=0.0)
    t_end: float = Field(900.0, gt=0.0)
    snapshot_times: List[float] = Field(default_factory=lambda: [100.0, 325.0, 650.0, 900.0])
    initial_shape: Literal["quarter_disk", "stripe", "full"] = "quarter_disk"
    r0: float = Field(0.5, gt=0.0)
    reinit_every: int = Field(20, ge=1)
    heaviside_width: float = Field(1.5, gt=0.0)
    phi_scheme: Literal["implicit", "explicit"] = "implicit"
    enable_growth: bool = True
    range_tol: float = Field(1e-10, ge=0.0)
    wall_margin_cells: int = Field(10, ge=0)
    window: Optional[Tuple[float, float]] = None  # 尾宽测量窗口, None = [0.1, 0.4]×头部
    measure: bool = True                           # 结束后测量并与理论对照


class SweepSection(_Section):
    params: Dict[str, List[float]] = Field(default_factory=dict)

    @field_validator("params")
    @classmethod
    def _check_keys(cls, value: Dict[str, List[float]]) -> Dict[str, List[float]]:
        for key, values in value.items():
            if key not in SWEEPABLE:
                raise ValueError(f"不可扫描的参数 {key!r}, 可选: {', '.join(SWEEPABLE)}")
            if not values:
                raise ValueError(f"参数 {key!r} 的取值列表为空")
        return value


class OutputSection(_Section):
    dir: str = "runs"
    jobs: int = Field(1, ge=1)


class RunConfig(_Section):
    params: ParamsSection = Field(default_factory=ParamsSection)
    stationary: StationarySection = Field(default_factory=StationarySection)
    width: WidthSection = Field(default_factory=WidthSection)
    evolve: EvolveSection = Field(default_factory=EvolveSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _check_domain(self) -> "RunConfig":
        # 跨字段约束在计算开始前全部检查
        to_model_params(self)
        to_stationary_config(self)
        to_width_config(self)
        to_evolution_config(self)
        return self


def _format_validation_error(err: ValidationError) -> str:
    lines = []
    for item in err.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{path}: {item['msg']}")
    return "配置校验失败: " + "; ".join(lines)


def to_model_params(cfg: RunConfig, **overrides: float) -> ModelParams:
    """params 段 (可叠加扫描覆盖值) -> ModelParams"""
    data = cfg.params.model_dump()
    data.update(overrides)
    variant = GammaVariant[data.pop("gamma_variant").upper()]
    try:
        return ModelParams(gamma_variant=variant, **data)
    except DomainError as e:
        raise ConfigError(f"params: {e}") from e


def to_stationary_config(cfg: RunConfig) -> StationaryConfig:
    data = cfg.stationary.model_dump(exclude={"w"})
    return StationaryConfig(**data)


def to_width_config(cfg: RunConfig) -> WidthConfig:
    data = cfg.width.model_dump(exclude={"method", "n"})
    try:
        return WidthConfig(**data)
    except ConfigError as e:
        raise ConfigError(f"width: {e}") from e


def to_evolution_config(cfg: RunConfig) -> EvolutionConfig:
    ev = cfg.evolve
    try:
        grid = Grid2D(**ev.grid.model_dump())
    except DomainError as e:
        raise ConfigError(f"evolve.grid: {e}") from e
    data = ev.model_dump(exclude={"grid", "window", "measure", "initial_shape", "phi_scheme", "snapshot_times"})
    return EvolutionConfig(
        grid=grid,
        params=to_model_params(cfg),
        initial_shape=InitialShape[ev.initial_shape.upper()],
        phi_scheme=PhiScheme[ev.phi_scheme.upper()],
        snapshot_times=tuple(ev.snapshot_times),
        **data,
    )


def parse_run_config(data: Optional[dict]) -> RunConfig:
    """已解析的字典 -> RunConfig; 空文档取全部默认值"""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"配置文件顶层必须是映射, 实际为 {type(data).__name__}")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(_format_validation_error(e)) from e


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """
    读取并校验 YAML 运行配置

    Raises:
        ConfigError: YAML 语法错误, 未知键, 字段越界
        OSError: 文件无法读取
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML 解析失败 ({path}): {e}") from e
    cfg = parse_run_config(data)
    logger.info(f"已加载运行配置: {path}")
    return cfg


def dump_reference_config(path: Optional[Union[str, Path]] = None) -> str:
    """生成列出全部默认值的参考配置; 给定 path 时同时写入文件"""
    text = yaml.safe_dump(RunConfig().model_dump(), sort_keys=False, allow_unicode=True)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
