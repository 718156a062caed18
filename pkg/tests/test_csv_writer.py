#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试 CSV / manifest 写出
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import csv
import tempfile
from pathlib import Path

import numpy as np

from models.enums import RunStatus
from models.errors import AdmissibilityError
from models.params import ModelParams
from output.csv_writer import CsvArtifactWriter, build_manifest, read_manifest
from solver.constitutive import check_assumptions


def _read(path: Path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_rows_with_commas_are_quoted():
    with tempfile.TemporaryDirectory() as tmp:
        writer = CsvArtifactWriter(Path(tmp))
        rows = [{"name": name, "passed": ok} for name, ok in check_assumptions(ModelParams()).items()]
        path = writer.write_rows("assumptions.csv", rows)

        back = _read(path)
        assert [r["name"] for r in back] == [r["name"] for r in rows], "含逗号的名称应原样读回"
        assert "F'>0 on (0,1]" in [r["name"] for r in back]
        assert all(r["passed"] in ("0", "1") for r in back), f"passed 列错位: {back}"
    print("✓ 含逗号的单元格加引号")


def test_cell_formatting():
    with tempfile.TemporaryDirectory() as tmp:
        writer = CsvArtifactWriter(Path(tmp))
        path = writer.write_rows("t.csv", [{"a": 0.1, "b": True, "c": np.int64(3), "d": None}])
        assert path.read_text(encoding="utf-8") == "a,b,c,d\n0.10000000000000001,1,3,nan\n"

        path = writer.write_rows("empty.csv", [], columns=["polyline", "x", "z"])
        assert path.read_text(encoding="utf-8") == "polyline,x,z\n", "空表只写表头"
        assert [p.name for p in writer.written] == ["t.csv", "empty.csv"]
    print("✓ 单元格格式")


def test_failed_manifest_round_trip():
    with tempfile.TemporaryDirectory() as tmp:
        writer = CsvArtifactWriter(Path(tmp))
        err = AdmissibilityError("βw=1.1 >= 1", beta_w=1.1)
        manifest = build_manifest("stationary", {"params": {"phi0": 0.75}}, RunStatus.FAILED, err,
                                  outputs=[Path(tmp) / "b.csv", Path(tmp) / "a.csv"])
        back = read_manifest(writer.write_manifest(manifest))
        assert back["status"] == "FAILED"
        assert back["error"] == {"type": "AdmissibilityError", "message": "βw=1.1 >= 1"}
        assert back["outputs"] == ["a.csv", "b.csv"]
    print("✓ FAILED manifest")


def run_all_tests():
    """运行所有测试"""
    print("=" * 60)
    print("产物写出测试")
    print("=" * 60)

    try:
        test_rows_with_commas_are_quoted()
        test_cell_formatting()
        test_failed_manifest_round_trip()

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
