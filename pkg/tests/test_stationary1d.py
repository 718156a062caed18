#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试一维定常问题求解器 (A₁, A₂, 不动点)
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dataclasses import replace

import numpy as np
import pytest

from config.solver_config import StationaryConfig
from models.enums import BoundaryKind
from models.errors import AdmissibilityError, ConvergenceError
from models.params import ModelParams
from models.solutions import Grid1D
from solver.constitutive import derived_constants
from solver.freeboundary import c0_closed_form
from solver.stationary1d import (
    cell_operator, cell_residual, fixed_point, free_boundary_residual, nutrient_residual, solve_cell,
    solve_linear_bvp, solve_nutrient, verify_stationary,
)
from utils.math_utils import l2_norm, sup_norm

REFERENCE = ModelParams()
FAST = StationaryConfig(n=401)


def test_nutrient_constant_phi_matches_cosh():
    """φ ≡ φ₀ 时离散解与 cosh 闭式解误差为 O(h²)"""
    errors = []
    for n in (101, 201, 401):
        grid = Grid1D(n)
        c = solve_nutrient(np.full(n, REFERENCE.phi0), 1.45, REFERENCE, grid)
        errors.append(sup_norm(c - c0_closed_form(grid.x, 1.45, REFERENCE)))
    assert errors[-1] < 1e-5, f"误差过大: {errors}"
    assert errors[0] / errors[1] > 3.5 and errors[1] / errors[2] > 3.5, f"应为二阶收敛: {errors}"
    print("✓ A₁ 与 cosh 闭式解")


def test_nutrient_zero_width_and_unit_phi():
    grid = Grid1D(201)
    c = solve_nutrient(np.full(grid.n, 0.75), 0.0, REFERENCE, grid)
    assert sup_norm(c - 1.0) < 1e-14, "w=0 时 c ≡ 1"

    # αw² = 1
    c = solve_nutrient(np.ones(grid.n), np.sqrt(2.0), REFERENCE, grid)
    assert abs(c[-1] - 1.0 / np.cosh(1.0)) < 1e-5, f"c(1) 应约为 0.6481, 实际 {c[-1]}"
    print("✓ A₁ 退化情形")


def test_nutrient_monotone_in_w():
    grid = Grid1D(201)
    phi = np.full(grid.n, REFERENCE.phi0)
    prev = solve_nutrient(phi, 0.5, REFERENCE, grid)
    for w in (1.0, 1.5, 2.0):
        c = solve_nutrient(phi, w, REFERENCE, grid)
        assert np.all(c <= prev + 1e-15), f"w 增大时 c 应逐点不增 (w={w})"
        assert np.all(np.diff(c) <= 1e-15), "c 应单调不增"
        prev = c
    print("✓ A₁ 对 w 单调")


def test_maximum_principle_random():
    """-u''+hu=k 在混合边界下满足 ‖u‖∞ <= ‖k‖∞ + 10h²"""
    rng = np.random.default_rng(2024)
    failures = 0
    for trial in range(50):
        n = int(rng.integers(51, 801))
        grid = Grid1D(n)
        x = grid.x
        a, b, ph = rng.random(3) * np.array([5.0, 4.0, 2 * np.pi])
        h = a * (1.0 + np.sin(b * x + ph))
        k = rng.normal() * np.cos(rng.random() * 6.0 * x + ph) + rng.normal() * x
        kind = BoundaryKind.DIRICHLET_NEUMANN if trial % 2 == 0 else BoundaryKind.NEUMANN_DIRICHLET
        u = solve_linear_bvp(h, k, grid, kind)
        if sup_norm(u) > sup_norm(k) + 10.0 * grid.h ** 2:
            failures += 1
    assert failures == 0, f"{failures} 个实例违反最大值原理"
    print("✓ 最大值原理 (50 个随机实例)")


def test_cell_zero_source_gives_phi0():
    grid = Grid1D(201)
    phi = solve_cell(np.full(grid.n, REFERENCE.c0), 1.0, REFERENCE, grid)
    assert sup_norm(phi - REFERENCE.phi0) < 1e-14, "Γ(σ) ≡ 0 时 φ ≡ φ₀"
    phi = solve_cell(np.linspace(1.0, 0.5, grid.n), 0.0, REFERENCE, grid)
    assert sup_norm(phi - REFERENCE.phi0) < 1e-14, "w=0 时 φ ≡ φ₀"
    print("✓ A₂ 零源项")


def test_cell_distance_bound():
    grid = Grid1D(401)
    consts = derived_constants(REFERENCE)
    sigma_field = solve_nutrient(np.full(grid.n, REFERENCE.phi0), 1.0, REFERENCE, grid)
    phi = solve_cell(sigma_field, 1.0, REFERENCE, grid)
    bound = consts.gM / (consts.Lg * consts.CP) * (consts.beta2 * 1.0) ** 2
    assert sup_norm(phi - REFERENCE.phi0) <= bound, "距离界被违反"
    assert abs(phi[-1] - REFERENCE.phi0) < 1e-15, "φ(1)=φ₀"
    print("✓ A₂ 距离界")


def test_cell_rejects_inadmissible_width():
    consts = derived_constants(REFERENCE)
    grid = Grid1D(101)
    with pytest.raises(AdmissibilityError) as info:
        solve_cell(np.ones(grid.n), 1.01 / consts.beta, REFERENCE, grid)
    assert info.value.beta_w >= 1.0
    print("✓ A₂ 可容许性门限")


def test_fixed_point_reference_width():
    sol = fixed_point(1.44, REFERENCE, Grid1D(2001))
    assert sol.c[0] == 1.0, "c(0)=1"
    assert abs(sol.phi[-1] - REFERENCE.phi0) < 1e-15, "φ(1)=φ₀"
    assert np.all(np.diff(sol.c) <= 1e-14), "c 单调不增"
    assert sol.admissible and sol.beta_w < 1.0
    assert max(sol.residual_phi, sol.residual_c) < 1e-6
    print(f"✓ w=1.44 不动点 ({sol.iterations} 次迭代)")


def test_fixed_point_default_grid_residuals():
    """默认网格 n=2001 与 n=8001 下相对残差都在上界内"""
    sol = fixed_point(1.44, REFERENCE)
    assert sol.x.size == StationaryConfig().n == 2001
    assert max(sol.residual_phi, sol.residual_c) <= StationaryConfig().residual_bound

    fine = fixed_point(1.44, REFERENCE, Grid1D(8001))
    assert max(fine.residual_phi, fine.residual_c) <= StationaryConfig().residual_bound, "加密网格不应触发残差门限"

    grid = Grid1D(2001)
    bumped = sol.c.copy()
    bumped[1000] *= 1.0 + 1e-3
    assert nutrient_residual(sol.phi, bumped, 1.44, REFERENCE, grid) > 1e-6, "篡改 c 后残差应超限"
    bumped_phi = sol.phi.copy()
    bumped_phi[1000] *= 1.0 + 1e-3
    assert cell_residual(bumped_phi, sol.c, 1.44, REFERENCE, grid) > 1e-6, "篡改 φ 后残差应超限"
    print("✓ 默认网格残差门限")


def test_fixed_point_admissibility_gate():
    consts = derived_constants(REFERENCE)
    sol = fixed_point(0.99 / consts.beta, REFERENCE, Grid1D(201))
    assert sol.beta_w < 1.0 and sol.admissible
    with pytest.raises(AdmissibilityError):
        fixed_point(1.01 / consts.beta, REFERENCE, Grid1D(201))
    print("✓ βw=0.99 收敛, βw=1.01 拒绝")


def test_fixed_point_convergence_error_carries_iterate():
    cfg = StationaryConfig(n=201, tol=1e-30, max_iters=2)
    with pytest.raises(ConvergenceError) as info:
        fixed_point(1.2, REFERENCE, Grid1D(201), cfg)
    assert info.value.last_iterate is not None and info.value.last_iterate.size == 201
    assert info.value.iterations == 2
    print("✓ 未收敛时附带最后迭代")


def test_verify_stationary_reference_width():
    sol = fixed_point(1.45, REFERENCE, Grid1D(2001))
    record = verify_stationary(sol, REFERENCE)
    assert record.passed, f"检查应全部通过: {record.checks}"
    distance = record.get("distance_bound")
    assert abs(distance.bound - 0.250) < 0.01, f"距离界应约为 0.25, 实际 {distance.bound}"
    assert 0.003 < distance.observed < 0.01, f"‖φ-φ₀‖∞ 应约为 0.006, 实际 {distance.observed}"
    assert np.max(sol.phi) <= 0.756 + 2e-3
    print(f"✓ w=1.45 验证通过, ‖φ-φ₀‖∞={distance.observed:.5f}")


def test_verify_stationary_trivial_and_corrupted():
    sol = fixed_point(0.0, REFERENCE, Grid1D(101))
    assert np.all(sol.phi == REFERENCE.phi0) and sup_norm(sol.c - 1.0) < 1e-14
    record = verify_stationary(sol, REFERENCE)
    assert record.passed, "w=0 时所有检查应通过"
    assert record.get("distance_bound").observed == 0.0

    sol = fixed_point(1.2, REFERENCE, Grid1D(201))
    bumped = sol.c.copy()
    bumped[50] = 1.0 + 1e-3
    record = verify_stationary(replace(sol, c=bumped), REFERENCE)
    assert not record.get("range").passed, "c>1 时范围检查应失败"
    assert not record.passed
    print("✓ 平凡解与篡改解")


def test_property_suite_random_admissible():
    """20 组随机参数 (βw <= 0.9) 的性质检查"""
    rng = np.random.default_rng(99)
    for _ in range(20):
        p = ModelParams(
            mu=1.0 + 3.0 * rng.random(),
            phi0=0.4 + 0.5 * rng.random(),
            gamma=0.2 + 1.5 * rng.random(),
            c0=0.2 + 0.7 * rng.random(),
            alpha=0.1 + 1.9 * rng.random(),
        )
        consts = derived_constants(p)
        w = 0.9 * rng.random() / consts.beta
        sol = fixed_point(w, p, Grid1D(401), FAST)
        assert np.all(sol.phi >= consts.epsilon - 1e-12) and np.all(sol.phi <= 1.0 + 1e-12), "ε <= φ <= 1"
        assert np.all(sol.c >= -1e-12) and np.all(sol.c <= 1.0 + 1e-12), "0 <= c <= 1"
        assert np.all(np.diff(sol.c) <= 1e-14), "c 单调不增"
        distance_bound = consts.gM / (consts.Lg * consts.CP) * (consts.beta2 * w) ** 2
        assert sup_norm(sol.phi - p.phi0) <= distance_bound + 1e-12, "距离界被违反"
        assert sup_norm(1.0 - sol.c) <= p.alpha * w * w * l2_norm(sol.phi, 1.0 / 400) + 1e-12, "先验估计被违反"
    print("✓ 20 组随机参数性质")


def test_contraction_estimate():
    """βw <= 0.8 时 A=A₂∘A₁ 为压缩"""
    grid = Grid1D(201)
    consts = derived_constants(REFERENCE)
    w = 0.8 / consts.beta
    rng = np.random.default_rng(5)
    lo = consts.epsilon
    ratios = []
    for _ in range(10):
        phi_a = lo + (1.0 - lo) * rng.random(grid.n)
        phi_b = lo + (1.0 - lo) * rng.random(grid.n)
        num = sup_norm(cell_operator(phi_a, w, REFERENCE, grid) - cell_operator(phi_b, w, REFERENCE, grid))
        ratios.append(num / sup_norm(phi_a - phi_b))
    assert max(ratios) < 1.0, f"测得 Lipschitz 常数 {max(ratios):.3f} >= 1"
    print(f"✓ 压缩常数 K≈{max(ratios):.3f}")


def test_mesh_convergence_order():
    """相对 4001 节点参考解的误差阶 >= 1.8"""
    cfg = StationaryConfig(tol=1e-12)
    ref = fixed_point(1.45, REFERENCE, Grid1D(4001), cfg)
    errors = []
    for n in (251, 501, 1001):
        sol = fixed_point(1.45, REFERENCE, Grid1D(n), cfg)
        stride = 4000 // (n - 1)
        errors.append(sup_norm(sol.c - ref.c[::stride]) + sup_norm(sol.phi - ref.phi[::stride]))
    orders = [np.log2(errors[i] / errors[i + 1]) for i in range(2)]
    assert min(orders) >= 1.8, f"收敛阶不足: {orders}"
    print(f"✓ 网格收敛阶 {orders}")


def test_free_boundary_residual_small_near_w0():
    sol = fixed_point(1.44, REFERENCE, Grid1D(1001))
    far = fixed_point(1.0, REFERENCE, Grid1D(1001))
    assert abs(free_boundary_residual(sol)) < abs(free_boundary_residual(far)), "w₀ 附近 φ'(1) 应更小"
    print("✓ 自由边界残差")


def run_all_tests():
    """运行所有测试"""
    print("=" * 60)
    print("运行一维定常求解器测试")
    print("=" * 60)

    try:
        test_nutrient_constant_phi_matches_cosh()
        test_nutrient_zero_width_and_unit_phi()
        test_nutrient_monotone_in_w()
        test_maximum_principle_random()
        test_cell_zero_source_gives_phi0()
        test_cell_distance_bound()
        test_cell_rejects_inadmissible_width()
        test_fixed_point_reference_width()
        test_fixed_point_default_grid_residuals()
        test_fixed_point_admissibility_gate()
        test_fixed_point_convergence_error_carries_iterate()
        test_verify_stationary_reference_width()
        test_verify_stationary_trivial_and_corrupted()
        test_property_suite_random_admissible()
        test_contraction_estimate()
        test_mesh_convergence_order()
        test_free_boundary_residual_small_near_w0()

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
