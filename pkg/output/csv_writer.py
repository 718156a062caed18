# -*- coding: utf-8 -*-
"""
output/csv_writer.py

CSV 与 manifest 写出

- 数值统一按 SystemConfig.CSV_DIGITS 位有效数字 (默认 %.17g), 相同输入逐字节一致
- 二维场写成 nz 行 × nx 列矩阵, 首行注释记录网格与时间
- manifest 为 JSON, 记录版本, 命令, 完整配置, 状态 (OK/FAILED) 与错误信息
"""

import csv
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from config.system_config import SystemConfig
from models.enums import RunStatus
from models.field_state import Grid2D, Snapshot
from models.params import DerivedConstants
from models.solutions import PerturbativeReconstruction, StationarySolution, WidthSolution
from output.base import ArtifactWriter

try:
    import orjson as json
    JSON_DUMPS = lambda x: json.dumps(x, option=json.OPT_INDENT_2 | json.OPT_SERIALIZE_NUMPY)
    JSON_LOADS = json.loads
except ImportError:
    import json
    JSON_DUMPS = lambda x: json.dumps(x, indent=2, default=_to_builtin).encode()
    JSON_LOADS = json.loads

logger = logging.getLogger(__name__)


def _to_builtin(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"无法序列化 {type(obj).__name__}")


class CsvArtifactWriter(ArtifactWriter):
    """逗号分隔, 首行表头"""

    def _cell(self, value: Any) -> str:
        if isinstance(value, (bool, np.bool_)):
            return str(int(value))
        if isinstance(value, (int, np.integer)):
            return str(int(value))
        if isinstance(value, (float, np.floating)):
            return self.system.csv_fmt % float(value)
        if value is None:
            return "nan"
        return str(value)

    def write_columns(self, name: str, columns: Mapping[str, np.ndarray]) -> Path:
        path = self.path(name)
        data = np.column_stack([np.asarray(v, dtype=float) for v in columns.values()])
        np.savetxt(path, data, fmt=self.system.csv_fmt, delimiter=",",
                   header=",".join(columns.keys()), comments="")
        self.written.append(path)
        logger.info(f"已写出 {path}")
        return path

    def write_rows(
        self, name: str, rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None
    ) -> Path:
        path = self.path(name)
        keys = list(columns) if columns is not None else list(rows[0].keys()) if rows else []
        with open(path, "w", newline="", encoding="utf-8") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(keys)
            out.writerows([self._cell(row.get(k)) for k in keys] for row in rows)
        self.written.append(path)
        logger.info(f"已写出 {path} ({len(rows)} 行)")
        return path

    def write_matrix(self, name: str, values: np.ndarray, header: str) -> Path:
        path = self.path(name)
        np.savetxt(path, np.asarray(values, dtype=float), fmt=self.system.csv_fmt,
                   delimiter=",", header=header, comments="# ")
        self.written.append(path)
        return path

    def write_manifest(self, manifest: Dict[str, Any]) -> Path:
        path = self.path(self.system.MANIFEST_NAME)
        path.write_bytes(JSON_DUMPS(manifest))
        logger.info(f"已写出 {path} (status={manifest.get('status')})")
        return path


def read_manifest(path: Path) -> Dict[str, Any]:
    return JSON_LOADS(Path(path).read_bytes())


def build_manifest(
    command: str,
    run_config: Dict[str, Any],
    status: RunStatus = RunStatus.OK,
    error: Optional[BaseException] = None,
    outputs: Optional[List[Path]] = None,
    extra: Optional[Dict[str, Any]] = None,
    system: Optional[SystemConfig] = None,
) -> Dict[str, Any]:
    """manifest 包含重现运行所需的全部配置"""
    manifest: Dict[str, Any] = {
        "version": (system or SystemConfig()).VERSION,
        "command": command,
        "status": status.name,
        "config": run_config,
        "outputs": sorted(p.name for p in outputs or []),
    }
    if error is not None:
        manifest["error"] = {"type": type(error).__name__, "message": str(error)}
    if extra:
        manifest.update(extra)
    return manifest


# ----------------------------------------------------------------------
# 各模块的 CSV 布局
# ----------------------------------------------------------------------
def write_stationary_csv(sol: StationarySolution, writer: ArtifactWriter, name: str = "stationary.csv") -> Path:
    return writer.write_columns(name, {"x": sol.x, "phi": sol.phi, "c": sol.c})


def write_reconstruction_csv(
    recon: PerturbativeReconstruction, writer: ArtifactWriter, name: str = "reconstruction.csv"
) -> Path:
    return writer.write_columns(name, {
        "x": recon.x,
        "c0": recon.c0,
        "phi1": recon.phi1,
        "phi_approx": recon.phi_approx,
        "phi_exact": recon.exact.phi,
        "c_exact": recon.exact.c,
        "E_phi": recon.E_phi,
        "E_c": recon.E_c,
    })


def width_row(width: WidthSolution) -> Dict[str, Any]:
    return {
        "w0": width.w0,
        "bracket_lo": width.bracket[0],
        "bracket_hi": width.bracket[1],
        "beta_w0": width.beta_w0,
        "admissible": width.admissible,
        "nu": width.nu,
        "xbar": width.xbar,
        "epsilon": width.epsilon,
        "method": width.method,
    }


def write_width_summary(width: WidthSolution, writer: ArtifactWriter, name: str = "width_summary.csv") -> Path:
    return writer.write_rows(name, [width_row(width)])


def constants_row(consts: DerivedConstants) -> Dict[str, Any]:
    return {
        "epsilon": consts.epsilon,
        "beta1": consts.beta1,
        "beta2": consts.beta2,
        "beta": consts.beta,
        "GammaM": consts.GammaM,
        "LGamma": consts.LGamma,
        "gM": consts.gM,
        "Lg": consts.Lg,
        "Lf_eps": consts.Lf_eps,
        "CP": consts.CP,
        "max_admissible_width": consts.max_admissible_width,
    }


def write_constants_csv(consts: DerivedConstants, writer: ArtifactWriter, name: str = "constants.csv") -> Path:
    return writer.write_rows(name, [constants_row(consts)])


def field_header(grid: Grid2D, t: float, system: Optional[SystemConfig] = None) -> str:
    fmt = (system or SystemConfig()).csv_fmt
    return f"nx={grid.nx} nz={grid.nz} hx={fmt % grid.hx} hz={fmt % grid.hz} t={fmt % t}"


def write_snapshot(snap: Snapshot, grid: Grid2D, writer: ArtifactWriter) -> List[Path]:
    """φ, c, ψ 三个矩阵加界面折线, 文件名带时间"""
    tag = f"t{snap.t:g}"
    header = field_header(grid, snap.t, writer.system)
    paths = [
        writer.write_matrix(f"phi_{tag}.csv", snap.phi, header),
        writer.write_matrix(f"c_{tag}.csv", snap.c, header),
        writer.write_matrix(f"psi_{tag}.csv", snap.psi, header),
    ]
    rows: List[Dict[str, Any]] = []
    for k, line in enumerate(snap.interface):
        rows.extend({"polyline": k, "x": float(px), "z": float(pz)} for px, pz in line)
    paths.append(writer.write_rows(f"interface_{tag}.csv", rows, columns=("polyline", "x", "z")))
    logger.info(f"快照 t={snap.t:g} 已写出 ({len(snap.interface)} 条界面折线)")
    return paths
