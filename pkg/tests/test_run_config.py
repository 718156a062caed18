#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试 YAML 运行配置: 默认值, 未知键, 字段路径错误信息, 转换为求解配置
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import tempfile
from pathlib import Path

import pytest
import yaml

from config.run_config import (
    RunConfig, dump_reference_config, load_run_config, parse_run_config,
    to_evolution_config, to_model_params, to_stationary_config,
)
from models.enums import GammaVariant, InitialShape, PhiScheme
from models.errors import ConfigError

EXAMPLE = Path(__file__).resolve().parent.parent / "config" / "run_config.example.yaml"


def _error_text(data) -> str:
    with pytest.raises(ConfigError) as info:
        parse_run_config(data)
    return str(info.value)


def test_reference_config_matches_defaults():
    assert parse_run_config(yaml.safe_load(dump_reference_config())) == RunConfig()
    assert load_run_config(EXAMPLE) == RunConfig(), "随附的参考配置应与默认值一致"
    print("✓ 参考配置")


def test_dump_reference_config_writes_file():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "ref.yaml"
        text = dump_reference_config(path)
        assert path.read_text(encoding="utf-8") == text
        assert "phi0: 0.75" in text and "snapshot_times" in text
    print("✓ 写出参考配置")


def test_empty_document_gives_defaults():
    assert parse_run_config(None) == RunConfig()
    assert parse_run_config({}) == RunConfig()
    with pytest.raises(ConfigError):
        parse_run_config([1, 2, 3])
    print("✓ 空文档")


def test_field_path_in_messages():
    assert "params.phi0" in _error_text({"params": {"phi0": 1.5}})
    assert "evolve.grid.nx" in _error_text({"evolve": {"grid": {"nx": 4}}})
    assert "stationary.n" in _error_text({"stationary": {"n": 1}})
    print("✓ 错误信息带字段路径")


def test_unknown_keys_rejected():
    assert "params.phi_0" in _error_text({"params": {"phi_0": 0.7}})
    assert "extras" in _error_text({"extras": {}})
    print("✓ 拒绝未知键")


def test_cross_field_checks():
    assert "gamma0" in _error_text({"params": {"gamma_variant": "two_threshold"}})
    assert "epsilon" in _error_text({"params": {"phi0": 0.4, "epsilon": 0.5}})
    assert "evolve.dt" in _error_text({"evolve": {"phi_scheme": "explicit", "dt": 1.0}})
    assert "evolve.r0" in _error_text({"evolve": {"r0": 3.0}})
    assert "sweep.params" in _error_text({"sweep": {"params": {"tau": [1.0]}}})
    assert "sweep.params" in _error_text({"sweep": {"params": {"c0": []}}})
    print("✓ 跨字段约束")


def test_yaml_syntax_error():
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "bad.yaml"
        path.write_text("params: [unclosed\n", encoding="utf-8")
        with pytest.raises(ConfigError):
            load_run_config(path)
        with pytest.raises(OSError):
            load_run_config(Path(tmp) / "missing.yaml")
    print("✓ YAML 语法错误")


def test_conversions():
    cfg = parse_run_config({
        "params": {"gamma_variant": "two_threshold", "gamma0": 0.7, "gamma1": 0.3, "c1": 0.4},
        "stationary": {"n": 401, "tol": 1e-9},
        "evolve": {
            "grid": {"nx": 33, "nz": 65, "Lx": 2.0, "Lz": 4.0},
            "initial_shape": "stripe", "phi_scheme": "explicit", "dt": 1e-4,
            "snapshot_times": [0.0, 0.5], "t_end": 0.5,
        },
    })
    p = to_model_params(cfg)
    assert p.gamma_variant == GammaVariant.TWO_THRESHOLD and p.c1 == 0.4

    assert to_model_params(cfg, c0=0.9).c0 == 0.9, "扫描覆盖值"
    with pytest.raises(ConfigError):
        to_model_params(cfg, c1=0.95)

    scfg = to_stationary_config(cfg)
    assert scfg.n == 401 and scfg.tol == 1e-9

    ecfg = to_evolution_config(cfg)
    assert ecfg.initial_shape == InitialShape.STRIPE
    assert ecfg.phi_scheme == PhiScheme.EXPLICIT
    assert ecfg.grid.nz == 65 and ecfg.snapshot_times == (0.0, 0.5)
    assert ecfg.params == p
    print("✓ 转换为求解配置")


def run_all_tests():
    """运行所有测试"""
    print("=" * 60)
    print("运行配置测试")
    print("=" * 60)

    try:
        test_reference_config_matches_defaults()
        test_dump_reference_config_writes_file()
        test_empty_document_gives_defaults()
        test_field_path_in_messages()
        test_unknown_keys_rejected()
        test_cross_field_checks()
        test_yaml_syntax_error()
        test_conversions()

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
