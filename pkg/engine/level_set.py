# -*- coding: utf-8 -*-
"""
engine/level_set.py

水平集工具

包含:
1. 光滑 Heaviside 与肿瘤指示函数 χ_Ω = H(-ψ)
2. 一阶迎风水平集推进
3. 快速扫描法重新初始化为符号距离 (numba 内核)
4. Marching squares 提取零等值线, 按边编号拼接为有序折线
5. 逐行界面位置 (尾部宽度测量用)
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np
from numba import njit

from models.field_state import Grid2D

logger = logging.getLogger(__name__)

_SWEEP_ROUNDS = 2


def heaviside(s: np.ndarray, delta: float) -> np.ndarray:
    """光滑 Heaviside, 过渡带宽 [-δ, δ]"""
    s = np.asarray(s, dtype=float)
    inner = 0.5 * (1.0 + s / delta + np.sin(np.pi * s / delta) / np.pi)
    return np.where(s <= -delta, 0.0, np.where(s >= delta, 1.0, inner))


@njit(cache=True)
def _godunov_update(a: float, b: float, hx: float, hz: float) -> float:
    u = min(a + hx, b + hz)
    if u <= max(a, b):
        return u
    ihx2 = 1.0 / (hx * hx)
    ihz2 = 1.0 / (hz * hz)
    qa = ihx2 + ihz2
    qb = a * ihx2 + b * ihz2
    qc = a * a * ihx2 + b * b * ihz2 - 1.0
    disc = qb * qb - qa * qc
    if disc < 0.0:
        return u
    return (qb + np.sqrt(disc)) / qa


@njit(cache=True)
def _fast_sweep(dist: np.ndarray, fixed: np.ndarray, hx: float, hz: float, rounds: int) -> None:
    nz, nx = dist.shape
    for _ in range(rounds):
        for order in range(4):
            for jj in range(nz):
                j = jj if order < 2 else nz - 1 - jj
                for ii in range(nx):
                    i = ii if order % 2 == 0 else nx - 1 - ii
                    if fixed[j, i]:
                        continue
                    a = np.inf
                    if i > 0:
                        a = dist[j, i - 1]
                    if i < nx - 1 and dist[j, i + 1] < a:
                        a = dist[j, i + 1]
                    b = np.inf
                    if j > 0:
                        b = dist[j - 1, i]
                    if j < nz - 1 and dist[j + 1, i] < b:
                        b = dist[j + 1, i]
                    if a == np.inf and b == np.inf:
                        continue
                    u = _godunov_update(a, b, hx, hz)
                    if u < dist[j, i]:
                        dist[j, i] = u


def reinitialize(psi: np.ndarray, grid: Grid2D) -> np.ndarray:
    """
    重新初始化为符号距离函数, 零等值线位置保持不变

    界面相邻节点的距离由 |ψ|/|∇ψ| 给出并固定, 其余节点用快速扫描求解 |∇d|=1
    """
    inside = psi < 0.0
    if inside.all() or not inside.any():
        logger.debug("重新初始化: 无界面, 保持原场")
        return psi.copy()

    near = np.zeros_like(inside)
    near[:, :-1] |= inside[:, :-1] != inside[:, 1:]
    near[:, 1:] |= inside[:, :-1] != inside[:, 1:]
    near[:-1, :] |= inside[:-1, :] != inside[1:, :]
    near[1:, :] |= inside[:-1, :] != inside[1:, :]

    gz, gx = np.gradient(psi, grid.hz, grid.hx)
    grad = np.sqrt(gx * gx + gz * gz)
    floor = 1e-12
    dist = np.full(psi.shape, np.inf)
    dist[near] = np.abs(psi[near]) / np.maximum(grad[near], floor)

    _fast_sweep(dist, near, grid.hx, grid.hz, _SWEEP_ROUNDS)
    return np.where(inside, -dist, dist)


def _pad(psi: np.ndarray) -> np.ndarray:
    # x=0 与 z=0 为对称轴取镜像, 远端取常数外推
    low = np.pad(psi, ((1, 0), (1, 0)), mode="reflect")
    return np.pad(low, ((0, 1), (0, 1)), mode="edge")


def advect_level_set(
    psi: np.ndarray,
    vx: np.ndarray,
    vz: np.ndarray,
    dt: float,
    grid: Grid2D,
    cfl: float = 0.5,
) -> np.ndarray:
    """一阶迎风推进 ψ_t + v·∇ψ = 0, 按 CFL 自动分子步"""
    rate = np.max(np.abs(vx)) / grid.hx + np.max(np.abs(vz)) / grid.hz
    if rate == 0.0:
        return psi.copy()
    n_sub = max(1, int(np.ceil(dt * rate / cfl)))
    tau = dt / n_sub

    vx_pos, vx_neg = np.maximum(vx, 0.0), np.minimum(vx, 0.0)
    vz_pos, vz_neg = np.maximum(vz, 0.0), np.minimum(vz, 0.0)
    out = psi.copy()
    for _ in range(n_sub):
        P = _pad(out)
        centre = P[1:-1, 1:-1]
        dxm = (centre - P[1:-1, :-2]) / grid.hx
        dxp = (P[1:-1, 2:] - centre) / grid.hx
        dzm = (centre - P[:-2, 1:-1]) / grid.hz
        dzp = (P[2:, 1:-1] - centre) / grid.hz
        out = out - tau * (vx_pos * dxm + vx_neg * dxp + vz_pos * dzm + vz_neg * dzp)
    if n_sub > 1:
        logger.debug(f"水平集推进使用 {n_sub} 个子步")
    return out


# 角点顺序: 0=(j,i) 1=(j,i+1) 2=(j+1,i+1) 3=(j+1,i); 边: 0=底 1=右 2=顶 3=左
# 索引位: 角点0为最高位, ψ>0 记为1; 鞍点情形按单元中心值选择
_CASES: Dict[int, Tuple[Tuple[int, int], ...]] = {
    0b0001: ((3, 2),), 0b0010: ((1, 2),), 0b0011: ((3, 1),), 0b0100: ((0, 1),),
    0b0110: ((0, 2),), 0b0111: ((0, 3),), 0b1000: ((0, 3),), 0b1001: ((0, 2),),
    0b1011: ((0, 1),), 0b1100: ((3, 1),), 0b1101: ((1, 2),), 0b1110: ((3, 2),),
}
_SADDLES: Dict[int, Tuple[Tuple[Tuple[int, int], ...], Tuple[Tuple[int, int], ...]]] = {
    0b0101: (((0, 1), (3, 2)), ((0, 3), (1, 2))),
    0b1010: (((0, 3), (1, 2)), ((0, 1), (3, 2))),
}
_EDGE_CORNERS = ((0, 1), (1, 2), (3, 2), (0, 3))


def _edge_key(j: int, i: int, edge: int) -> Tuple[str, int, int]:
    if edge == 0:
        return ("h", j, i)
    if edge == 1:
        return ("v", j, i + 1)
    if edge == 2:
        return ("h", j + 1, i)
    return ("v", j, i)


def extract_interface(psi: np.ndarray, grid: Grid2D) -> List[np.ndarray]:
    """
    Marching squares 提取 ψ=0, 返回有序折线列表, 每条形状 (k, 2), 列为 (x, z)
    """
    x, z = grid.x, grid.z
    pos = psi > 0.0
    mixed = (
        (pos[:-1, :-1] != pos[:-1, 1:]) | (pos[:-1, :-1] != pos[1:, :-1]) | (pos[:-1, :-1] != pos[1:, 1:])
    )

    points: Dict[Tuple[str, int, int], np.ndarray] = {}
    links: Dict[Tuple[str, int, int], List[Tuple[str, int, int]]] = defaultdict(list)

    for j, i in zip(*np.nonzero(mixed)):
        corners = ((j, i), (j, i + 1), (j + 1, i + 1), (j + 1, i))
        values = [psi[c] for c in corners]
        index = 0
        for v in values:
            index = (index << 1) | int(v > 0.0)

        if index in _SADDLES:
            segments = _SADDLES[index][int(np.mean(values) > 0.0)]
        else:
            segments = _CASES.get(index, ())

        for seg in segments:
            keys = []
            for edge in seg:
                key = _edge_key(j, i, edge)
                if key not in points:
                    c0, c1 = _EDGE_CORNERS[edge]
                    (ja, ia), (jb, ib) = corners[c0], corners[c1]
                    va, vb = values[c0], values[c1]
                    t = min(max(va / (va - vb), 0.0), 1.0)
                    points[key] = np.array([
                        x[ia] + t * (x[ib] - x[ia]),
                        z[ja] + t * (z[jb] - z[ja]),
                    ])
                keys.append(key)
            links[keys[0]].append(keys[1])
            links[keys[1]].append(keys[0])

    return _chain(points, links)


def _chain(points, links) -> List[np.ndarray]:
    visited = set()
    polylines: List[np.ndarray] = []
    # 先从端点 (度为1) 出发得到开放折线, 剩余的为闭合环
    starts = [k for k, nbrs in links.items() if len(nbrs) == 1] + list(links.keys())
    for start in starts:
        if start in visited:
            continue
        path = [start]
        visited.add(start)
        current = start
        while True:
            nxt = next((k for k in links[current] if k not in visited), None)
            if nxt is None:
                break
            path.append(nxt)
            visited.add(nxt)
            current = nxt
        if len(links[start]) == 2 and start in links[current] and len(path) > 2:
            path.append(start)
        polylines.append(np.array([points[k] for k in path]))
    return polylines


def _last_crossing(values: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """沿最后一个轴找最后一次由内 (ψ<0) 到外的穿越, 线性插值; 全内取末端, 全外为 NaN"""
    inside = values < 0.0
    crossing = inside[:, :-1] & ~inside[:, 1:]
    out = np.full(values.shape[0], np.nan)

    has = crossing.any(axis=1)
    last = crossing.shape[1] - 1 - np.argmax(crossing[:, ::-1], axis=1)
    rows = np.nonzero(has)[0]
    k = last[rows]
    va = values[rows, k]
    vb = values[rows, k + 1]
    out[rows] = coords[k] + (coords[k + 1] - coords[k]) * va / (va - vb)

    full = inside.all(axis=1)
    out[full] = coords[-1]
    return out


def interface_x_by_row(psi: np.ndarray, grid: Grid2D) -> np.ndarray:
    """每个 z 行上界面的 x 坐标 (长度 nz), 无肿瘤的行为 NaN"""
    return _last_crossing(psi, grid.x)


def interface_z_by_column(psi: np.ndarray, grid: Grid2D) -> np.ndarray:
    """每个 x 列上界面的 z 坐标 (长度 nx)"""
    return _last_crossing(psi.T, grid.z)


def head_position(psi: np.ndarray, grid: Grid2D) -> Optional[float]:
    """界面的最大 z 坐标; 无肿瘤时为 None"""
    zs = interface_z_by_column(psi, grid)
    if np.all(np.isnan(zs)):
        return None
    return float(np.nanmax(zs))
