#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试水平集工具: Heaviside, 迎风推进, 快速扫描重新初始化, marching squares
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import numpy as np

from engine.level_set import (
    advect_level_set, extract_interface, head_position, heaviside,
    interface_x_by_row, reinitialize,
)
from models.field_state import Grid2D

GRID = Grid2D(nx=81, nz=81, Lx=2.0, Lz=2.0)


def test_heaviside_profile():
    delta = 0.1
    s = np.array([-1.0, -0.1, 0.0, 0.1, 1.0])
    assert np.allclose(heaviside(s, delta), [0.0, 0.0, 0.5, 1.0, 1.0], atol=1e-15)
    dense = heaviside(np.linspace(-0.2, 0.2, 401), delta)
    assert np.all(np.diff(dense) >= 0.0), "Heaviside 应单调"
    print("✓ 光滑 Heaviside")


def test_reinitialize_scaled_distance():
    """ψ=3(r-R) 重新初始化后接近符号距离, 零等值线不动"""
    X, Z = GRID.mesh()
    exact = np.hypot(X, Z) - 0.8
    psi = reinitialize(3.0 * exact, GRID)

    band = np.abs(exact) < 0.5
    err = np.max(np.abs(psi[band] - exact[band]))
    assert err < 2.0 * GRID.hx, f"带内距离误差过大: {err}"
    assert np.all((psi < 0.0) == (exact < 0.0)), "符号必须保持"

    before = interface_x_by_row(3.0 * exact, GRID)
    after = interface_x_by_row(psi, GRID)
    valid = ~np.isnan(before)
    assert np.max(np.abs(before[valid] - after[valid])) < 0.1 * GRID.hx, "零等值线位置不应移动"
    print(f"✓ 快速扫描重新初始化 (带内误差 {err:.2e})")


def test_reinitialize_without_interface():
    psi = np.full(GRID.shape, 0.3)
    out = reinitialize(psi, GRID)
    assert np.array_equal(out, psi) and out is not psi
    print("✓ 无界面时保持原场")


def test_extract_quarter_circle():
    X, Z = GRID.mesh()
    R = 0.8
    polylines = extract_interface(np.hypot(X, Z) - R, GRID)
    assert len(polylines) == 1, f"四分之一圆应为一条折线, 实际 {len(polylines)}"
    line = polylines[0]
    r = np.hypot(line[:, 0], line[:, 1])
    assert np.max(np.abs(r - R)) < 2e-3, "折线点应在圆上"
    steps = np.hypot(*np.diff(line, axis=0).T)
    assert np.max(steps) < np.sqrt(2.0) * GRID.hx + 1e-12, "折线点应按顺序相邻"
    ends = sorted([tuple(line[0]), tuple(line[-1])])
    assert min(ends[0][0], ends[0][1]) < 1e-12 and min(ends[1][0], ends[1][1]) < 1e-12, "端点应在对称轴上"
    print("✓ 四分之一圆界面")


def test_extract_closed_loop():
    X, Z = GRID.mesh()
    polylines = extract_interface(np.hypot(X - 1.0, Z - 1.0) - 0.5, GRID)
    assert len(polylines) == 1
    loop = polylines[0]
    assert np.allclose(loop[0], loop[-1]), "闭合曲线首尾相同"
    assert len(loop) > 20
    print("✓ 闭合环")


def test_extract_saddle_resolution():
    """两条直线交于单元中心: 鞍点按中心值拆成两条互不相交的折线"""
    X, Z = GRID.mesh()
    xc = GRID.x[40] + 0.5 * GRID.hx
    zc = GRID.z[40] + 0.5 * GRID.hz
    polylines = extract_interface((X - xc) * (Z - zc), GRID)
    assert len(polylines) == 2, f"应得到两条折线, 实际 {len(polylines)}"
    for line in polylines:
        dist = np.minimum(np.abs(line[:, 0] - xc), np.abs(line[:, 1] - zc))
        assert np.max(dist) < 1e-12, "折线点应位于两条零线上"
    print("✓ 鞍点处理")


def test_interface_x_by_row():
    X, _ = GRID.mesh()
    xs = interface_x_by_row(X - 0.73, GRID)
    assert np.max(np.abs(xs - 0.73)) < 1e-12, "线性 ψ 的界面位置应精确"

    psi = X - 0.73
    psi[:5] = 1.0
    psi[-3:] = -1.0
    xs = interface_x_by_row(psi, GRID)
    assert np.all(np.isnan(xs[:5])), "无肿瘤的行为 NaN"
    assert np.all(xs[-3:] == GRID.Lx), "整行在内部时取 Lx"
    print("✓ 逐行界面位置")


def test_head_position():
    X, Z = GRID.mesh()
    assert abs(head_position(np.hypot(X, Z) - 0.8, GRID) - 0.8) < 1e-3
    assert head_position(np.ones(GRID.shape), GRID) is None
    print("✓ 头部位置")


def test_advect_uniform_velocity():
    """常速度下线性 ψ 的迎风推进是精确的"""
    X, _ = GRID.mesh()
    vx = np.full(GRID.shape, 0.2)
    vz = np.zeros(GRID.shape)
    psi = advect_level_set(X - 0.5, vx, vz, 1.0, GRID, cfl=0.5)
    xs = interface_x_by_row(psi, GRID)
    assert np.max(np.abs(xs - 0.7)) < 1e-10, f"界面应移动到 0.7, 实际 {xs[:3]}"
    print("✓ 常速度推进")


def test_advect_zero_velocity():
    X, Z = GRID.mesh()
    psi = np.hypot(X, Z) - 0.5
    zero = np.zeros(GRID.shape)
    out = advect_level_set(psi, zero, zero, 10.0, GRID)
    assert np.array_equal(out, psi)
    print("✓ 零速度不变")


def run_all_tests():
    """运行所有测试"""
    print("=" * 60)
    print("运行水平集测试")
    print("=" * 60)

    try:
        test_heaviside_profile()
        test_reinitialize_scaled_distance()
        test_reinitialize_without_interface()
        test_extract_quarter_circle()
        test_extract_closed_loop()
        test_extract_saddle_resolution()
        test_interface_x_by_row()
        test_head_position()
        test_advect_uniform_velocity()
        test_advect_zero_velocity()

        print("\n" + "=" * 60)
        print("✅ 所有测试通过!")
        print("=" * 60)
        return True

    except AssertionError as e:
        print("\n" + "=" * 60)
        print(f"❌ 测试失败: {e}")
        print("=" * 60)
        return False


if __name__ == "__main__":
    success = run_all_tests()
    sys.exit(0 if success else 1)
