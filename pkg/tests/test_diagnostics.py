#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试测量层: 尾宽, 存活/坏死深度, 存活占比, 理论对照表
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import math

import numpy as np
import pytest

from engine.diagnostics import TheoryComparison, compare_to_theory, default_window, measure
from models.errors import MeasurementError
from models.field_state import CordMetrics, EvolutionState, Grid2D
from models.params import ModelParams
from models.solutions import WidthSolution
from solver.freeboundary import solve_width_linear, xbar_of_w

REFERENCE = ModelParams()
GRID = Grid2D(nx=101, nz=201, Lx=2.5, Lz=10.0)


def synthetic_cord(width: float, head: float, p: ModelParams = REFERENCE) -> EvolutionState:
    """宽度 width 的直尾 + 圆头, c 取零阶 cosh 剖面"""
    X, Z = GRID.mesh()
    tail = X - width
    cap = np.hypot(X, Z - (head - width)) - width
    psi = np.where(Z <= head - width, tail, cap)

    k = math.sqrt(p.alpha * p.phi0)
    xc = np.minimum(X, width)
    c = np.cosh(k * (width - xc)) / np.cosh(k * width)
    return EvolutionState(t=0.0, phi=np.full(GRID.shape, p.phi0), c=c, psi=psi)


def test_measure_tail_and_head():
    state = synthetic_cord(1.45, 8.0)
    metrics = measure(state, GRID, REFERENCE)
    assert abs(metrics.tail_width - 1.45) < GRID.hx, f"尾宽 {metrics.tail_width}"
    assert abs(metrics.head_position - 8.0) < GRID.hz, f"头部 {metrics.head_position}"
    assert metrics.window == default_window(metrics.head_position)
    assert 0.0 <= metrics.viable_fraction <= 1.0
    print(f"✓ 尾宽 {metrics.tail_width:.4f}, 头部 {metrics.head_position:.4f}")


def test_xbar_measured_matches_theory():
    state = synthetic_cord(1.45, 8.0)
    metrics = measure(state, GRID, REFERENCE)
    rescaled = metrics.xbar_measured / 1.45
    assert abs(rescaled - xbar_of_w(1.45, REFERENCE)) < 0.01, f"x̄/w={rescaled}"
    print(f"✓ x̄ 测量 {rescaled:.4f}")


def test_tail_width_window_invariance():
    state = synthetic_cord(1.45, 8.0)
    widths = [measure(state, GRID, REFERENCE, window=w).tail_width for w in ((1.0, 4.0), (0.5, 2.0), (2.0, 5.0))]
    assert max(widths) - min(widths) <= GRID.hx, f"不同窗口尾宽不一致: {widths}"
    print("✓ 尾宽与窗口无关")


def test_viable_fraction_decreases_with_alpha():
    fractions = []
    for alpha in (0.3, 0.5, 0.8):
        p = REFERENCE.with_updates(alpha=alpha)
        fractions.append(measure(synthetic_cord(1.45, 8.0, p), GRID, p).viable_fraction)
    assert fractions[0] >= fractions[1] >= fractions[2], f"存活占比应随 α 不增: {fractions}"
    print(f"✓ 存活占比 {fractions}")


def test_measure_errors():
    empty = EvolutionState(t=0.0, phi=np.full(GRID.shape, 0.75), c=np.ones(GRID.shape), psi=np.ones(GRID.shape))
    with pytest.raises(MeasurementError):
        measure(empty, GRID, REFERENCE)
    state = synthetic_cord(1.45, 4.0)
    with pytest.raises(MeasurementError):
        measure(state, GRID, REFERENCE, window=(1.0, 6.0))
    with pytest.raises(MeasurementError):
        measure(state, GRID, REFERENCE, window=(2.0, 1.0))
    print("✓ 测量错误")


def test_missing_necrotic_zone_gives_nan():
    state = synthetic_cord(0.3, 8.0)
    metrics = measure(state, GRID, REFERENCE)
    assert math.isnan(metrics.xbar_measured), "窄索没有坏死区"
    assert metrics.viable_fraction == 1.0
    print("✓ 无坏死区")


def test_compare_to_theory_zero_deviation():
    width = solve_width_linear(REFERENCE)
    metrics = CordMetrics(
        tail_width=width.w0, head_position=8.0, xbar_measured=0.418 * width.w0,
        viable_fraction=0.5, window=(0.8, 3.2),
    )
    report = compare_to_theory(metrics, REFERENCE, width)
    assert report.relative_deviation == 0.0
    assert report.admissible and not report.rejected
    assert abs(report.xbar_theory - report.xbar_measured_rescaled) < 2e-3
    print("✓ 零偏差")


def test_compare_to_theory_solves_width():
    metrics = CordMetrics(tail_width=1.44, head_position=8.0, xbar_measured=0.6, viable_fraction=0.5, window=(0.8, 3.2))
    report = compare_to_theory(metrics, REFERENCE)
    assert report.method == "linear"
    assert report.relative_deviation <= 0.05, "参考值 1.44 与 w₀ 相差应小于5%"
    print(f"✓ 相对偏差 {report.relative_deviation:.4f}")


def test_rejected_flag_propagates():
    width = WidthSolution(
        w0=2.0, bracket=(1.0, 3.0), beta_w0=1.1, admissible=False, nu=0.5, xbar=0.3, epsilon=0.5,
    )
    metrics = CordMetrics(tail_width=2.0, head_position=8.0, xbar_measured=0.6, viable_fraction=0.4, window=(0.8, 3.2))
    report = compare_to_theory(metrics, REFERENCE, width)
    assert report.rejected and report.to_row()["rejected"] == 1
    print("✓ 不可容许标记")


def test_report_rendering():
    width = solve_width_linear(REFERENCE)
    metrics = CordMetrics(tail_width=1.44, head_position=8.0, xbar_measured=0.6, viable_fraction=0.5, window=(0.8, 3.2))
    report = compare_to_theory(metrics, REFERENCE, width)
    assert isinstance(report, TheoryComparison)
    table = report.to_table()
    lines = table.splitlines()
    assert len(lines) == len(report.to_row())
    width = max(len(k) for k in report.to_row())
    assert all(line[width:width + 2] == "  " for line in lines), "值列应对齐"
    assert "1.44" in table and "w0" in table
    print("✓ 表格输出")


def run_all_tests():
    """运行所有测试"""
    print("=" * 60)
    print("运行测量层测试")
    print("=" * 60)

    try:
        test_measure_tail_and_head()
        test_xbar_measured_matches_theory()
        test_tail_width_window_invariance()
        test_viable_fraction_decreases_with_alpha()
        test_measure_errors()
        test_missing_necrotic_zone_gives_nan()
        test_compare_to_theory_zero_deviation()
        test_compare_to_theory_solves_width()
        test_rejected_flag_propagates()
        test_report_rendering()

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
