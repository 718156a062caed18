# -*- coding: utf-8 -*-
"""
utils/fd_operators.py

二维节点网格上的守恒型差分算子装配

数组按 (nz, nx) 存放, 展平为行主序 k = j*nx + i
Neumann 边采用镜像虚节点, Dirichlet 节点从未知量中消去 (行列清零, 贡献移入右端)
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, MatrixRankWarning, bicgstab, splu, spsolve

from models.enums import EdgeKind
from models.errors import LinearSolveError
from models.field_state import Grid2D

logger = logging.getLogger(__name__)


@dataclass(slots=True, frozen=True)
class EdgeCondition:
    kind: EdgeKind = EdgeKind.NEUMANN
    value: float = 0.0


@dataclass(slots=True, frozen=True)
class BoundarySpec:
    """四条边的边界条件; 角点上 Dirichlet 优先"""
    x_lo: EdgeCondition = EdgeCondition()
    x_hi: EdgeCondition = EdgeCondition()
    z_lo: EdgeCondition = EdgeCondition()
    z_hi: EdgeCondition = EdgeCondition()

    def dirichlet_mask(self, grid: Grid2D) -> np.ndarray:
        mask = np.zeros(grid.shape, dtype=bool)
        if self.x_lo.kind == EdgeKind.DIRICHLET:
            mask[:, 0] = True
        if self.x_hi.kind == EdgeKind.DIRICHLET:
            mask[:, -1] = True
        if self.z_lo.kind == EdgeKind.DIRICHLET:
            mask[0, :] = True
        if self.z_hi.kind == EdgeKind.DIRICHLET:
            mask[-1, :] = True
        return mask

    def dirichlet_values(self, grid: Grid2D) -> np.ndarray:
        values = np.zeros(grid.shape)
        # 先写 z 边再写 x 边, 角点取 x 边的值
        for edge, index in ((self.z_lo, (0, slice(None))), (self.z_hi, (-1, slice(None))),
                            (self.x_lo, (slice(None), 0)), (self.x_hi, (slice(None), -1))):
            if edge.kind == EdgeKind.DIRICHLET:
                values[index] = edge.value
        return values


def assemble_diffusion(
    coef: np.ndarray, grid: Grid2D, spec: BoundarySpec
) -> Tuple[sparse.csr_matrix, np.ndarray]:
    """
    装配 ∇·(D∇u) 的五点守恒离散

    Args:
        coef: 节点上的扩散系数 D, 界面系数取相邻节点平均
        grid: 网格
        spec: 边界条件

    Returns:
        (L, b): 对自由节点 (Lu)+b 即离散算子; Dirichlet 行列已清零, b 在其上为0
    """
    nz, nx = grid.shape
    inv_hx2 = 1.0 / grid.hx ** 2
    inv_hz2 = 1.0 / grid.hz ** 2

    dx_face = 0.5 * (coef[:, 1:] + coef[:, :-1])
    dz_face = 0.5 * (coef[1:, :] + coef[:-1, :])

    east = np.zeros(grid.shape)
    west = np.zeros(grid.shape)
    north = np.zeros(grid.shape)
    south = np.zeros(grid.shape)

    east[:, :-1] = dx_face * inv_hx2
    west[:, 1:] = dx_face * inv_hx2
    north[:-1, :] = dz_face * inv_hz2
    south[1:, :] = dz_face * inv_hz2
    # 镜像虚节点: 边界节点向内的系数加倍
    east[:, 0] *= 2.0
    west[:, -1] *= 2.0
    north[0, :] *= 2.0
    south[-1, :] *= 2.0
    diag = -(east + west + north + south)

    size = nx * nz
    e, w, n, s = east.ravel(), west.ravel(), north.ravel(), south.ravel()
    full = sparse.diags(
        [diag.ravel(), e[:-1], w[1:], n[:-nx], s[nx:]],
        [0, 1, -1, nx, -nx],
        shape=(size, size),
        format="csr",
    )

    mask = spec.dirichlet_mask(grid).ravel()
    free = sparse.diags((~mask).astype(float), format="csr")
    b = free @ (full @ np.where(mask, spec.dirichlet_values(grid).ravel(), 0.0))
    L = (free @ full @ free).tocsr()
    return L, b.reshape(grid.shape)


class ReusedFactorization:
    """
    系数矩阵逐步缓慢变化时复用 LU 分解

    以最近一次分解的矩阵作预条件做 BiCGSTAB; 迭代失败或超过 max_iter 时
    对当前矩阵重新分解并直接求解
    """

    def __init__(self, name: str, rtol: float = 1e-12, max_iter: int = 40):
        self.name = name
        self.rtol = rtol
        self.max_iter = max_iter
        self._lu = None
        self.factorizations = 0
        self.iterative_solves = 0

    def _factor(self, A: sparse.csc_matrix) -> None:
        try:
            self._lu = splu(A)
        except RuntimeError as e:
            raise LinearSolveError(f"{self.name}: LU 分解失败: {e}") from e
        self.factorizations += 1

    def solve(self, A: sparse.csc_matrix, rhs: np.ndarray) -> np.ndarray:
        if self._lu is not None:
            M = LinearOperator(A.shape, matvec=self._lu.solve)
            sol, info = bicgstab(A, rhs, rtol=self.rtol, atol=0.0, maxiter=self.max_iter, M=M)
            if info == 0 and np.all(np.isfinite(sol)):
                self.iterative_solves += 1
                return sol
            logger.debug(f"{self.name}: 预条件迭代未收敛 (info={info}), 重新分解")
        self._factor(A)
        return self._lu.solve(rhs)


def backward_euler_solve(
    u_old: np.ndarray,
    dt: float,
    L: sparse.csr_matrix,
    b: np.ndarray,
    grid: Grid2D,
    spec: BoundarySpec,
    reaction: Optional[np.ndarray] = None,
    source: Optional[np.ndarray] = None,
    solver: Optional[ReusedFactorization] = None,
) -> np.ndarray:
    """
    求解 (I/dt - L + diag(r)) u = u_old/dt + b + s, Dirichlet 节点直接取边界值

    给定 solver 时复用其缓存的 LU 分解作预条件, 否则每次直接分解
    """
    mask = spec.dirichlet_mask(grid).ravel()
    size = mask.size
    r = np.zeros(size) if reaction is None else np.where(mask, 0.0, reaction.ravel())
    rhs = u_old.ravel() / dt + b.ravel()
    if source is not None:
        rhs = rhs + np.where(mask, 0.0, source.ravel())
    rhs = np.where(mask, spec.dirichlet_values(grid).ravel() / dt, rhs)

    A = (sparse.identity(size, format="csr") / dt - L + sparse.diags(r, format="csr")).tocsc()
    if solver is not None:
        sol = solver.solve(A, rhs)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("error", MatrixRankWarning)
            try:
                sol = spsolve(A, rhs)
            except (MatrixRankWarning, RuntimeError) as e:
                raise LinearSolveError(f"稀疏隐式求解失败: {e}") from e
    if not np.all(np.isfinite(sol)):
        raise LinearSolveError("稀疏隐式求解结果包含非有限值")
    sol = sol.reshape(grid.shape)
    sol[spec.dirichlet_mask(grid)] = spec.dirichlet_values(grid)[spec.dirichlet_mask(grid)]
    return sol


def apply_operator(L: sparse.csr_matrix, b: np.ndarray, u: np.ndarray) -> np.ndarray:
    """显式格式用: 返回自由节点上的 (Lu)+b, Dirichlet 节点为0"""
    return (L @ u.ravel()).reshape(u.shape) + b


def centered_gradient(u: np.ndarray, grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
    """中心差分梯度 (∂x u, ∂z u), 边界处为二阶单侧差分"""
    gz, gx = np.gradient(u, grid.hz, grid.hx, edge_order=2)
    return gx, gz
