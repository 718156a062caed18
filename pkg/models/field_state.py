from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import numpy as np

from models.errors import DomainError
from utils.math_utils import trapezoid_weights


@dataclass(slots=True, frozen=True)
class Grid2D:
    """矩形域 Q=[0,Lx]×[0,Lz] 上的节点网格, 数组形状为 (nz, nx)"""
    nx: int = 128
    nz: int = 512
    Lx: float = 2.5
    Lz: float = 10.0

    def __post_init__(self):
        if self.nx < 16 or self.nz < 16:
            raise DomainError(f"Grid2D 每个方向至少16个节点, 当前 nx={self.nx}, nz={self.nz}")
        if not (self.Lx > 0.0 and self.Lz > 0.0):
            raise DomainError(f"区域尺寸必须为正, 当前 Lx={self.Lx}, Lz={self.Lz}")

    @property
    def hx(self) -> float:
        return self.Lx / (self.nx - 1)

    @property
    def hz(self) -> float:
        return self.Lz / (self.nz - 1)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nz, self.nx)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.Lx, self.nx)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(0.0, self.Lz, self.nz)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """返回 (X, Z), 形状均为 (nz, nx)"""
        return np.meshgrid(self.x, self.z)

    def weights(self) -> np.ndarray:
        """梯形求积权重"""
        return np.outer(trapezoid_weights(self.nz, self.hz), trapezoid_weights(self.nx, self.hx))


@dataclass(slots=True)
class EvolutionState:
    t: float
    phi: np.ndarray
    c: np.ndarray
    psi: np.ndarray          # ψ<0 肿瘤内部, ψ>0 宿主组织
    step_index: int = 0
    dt_last: float = 0.0

    def copy(self) -> "EvolutionState":
        return EvolutionState(
            t=self.t,
            phi=self.phi.copy(),
            c=self.c.copy(),
            psi=self.psi.copy(),
            step_index=self.step_index,
            dt_last=self.dt_last,
        )


@dataclass(slots=True, frozen=True)
class Snapshot:
    """只读快照, 可安全交给写出任务"""
    t: float
    step_index: int
    phi: np.ndarray
    c: np.ndarray
    psi: np.ndarray
    interface: Tuple[np.ndarray, ...] = field(default_factory=tuple)

    @classmethod
    def capture(cls, state: EvolutionState, interface: List[np.ndarray]) -> "Snapshot":
        arrays = []
        for arr in (state.phi, state.c, state.psi):
            frozen = arr.copy()
            frozen.setflags(write=False)
            arrays.append(frozen)
        return cls(
            t=state.t,
            step_index=state.step_index,
            phi=arrays[0],
            c=arrays[1],
            psi=arrays[2],
            interface=tuple(interface),
        )


@dataclass(slots=True, frozen=True)
class CordMetrics:
    tail_width: float
    head_position: float
    xbar_measured: float
    viable_fraction: float
    window: Tuple[float, float]


@dataclass(slots=True)
class EvolutionResult:
    snapshots: List[Snapshot]
    manifest: Dict[str, Any]
    final_state: EvolutionState
