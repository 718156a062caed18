from __future__ import annotations
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from models.errors import DomainError


@dataclass(slots=True, frozen=True)
class Grid1D:
    """[0,1] 上的均匀节点网格"""
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise DomainError(f"Grid1D 至少需要3个节点, 当前 n={self.n}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def refined(self) -> "Grid1D":
        """n -> 2n-1, 保留全部旧节点"""
        return Grid1D(2 * self.n - 1)


@dataclass(slots=True, frozen=True)
class StationarySolution:
    w: float
    x: np.ndarray
    phi: np.ndarray
    c: np.ndarray
    epsilon: float
    iterations: int
    residual_phi: float
    residual_c: float
    beta_w: float
    admissible: bool


@dataclass(slots=True, frozen=True)
class CheckResult:
    name: str
    passed: bool
    observed: float
    bound: float

    @property
    def margin(self) -> float:
        return self.bound - self.observed


@dataclass(slots=True, frozen=True)
class DiagnosticsRecord:
    checks: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(chk.passed for chk in self.checks)

    def get(self, name: str) -> CheckResult:
        for chk in self.checks:
            if chk.name == name:
                return chk
        raise KeyError(name)


@dataclass(slots=True, frozen=True)
class WidthSolution:
    w0: float
    bracket: Tuple[float, float]
    beta_w0: float
    admissible: bool
    nu: float
    xbar: Optional[float]
    epsilon: float
    method: str = "general"
    scanned: List[Tuple[float, float]] = field(default_factory=list)


@dataclass(slots=True, frozen=True)
class PerturbativeReconstruction:
    """一阶摄动近似与精确定常解的对比"""
    w: float
    nu: float
    x: np.ndarray
    c0: np.ndarray
    phi1: np.ndarray
    phi_approx: np.ndarray
    c_approx: np.ndarray
    E_phi: np.ndarray
    E_c: np.ndarray
    exact: StationarySolution

    @property
    def max_E_phi(self) -> float:
        return float(np.max(np.abs(self.E_phi)))

    @property
    def max_E_c(self) -> float:
        return float(np.max(np.abs(self.E_c)))
