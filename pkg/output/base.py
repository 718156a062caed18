# -*- coding: utf-8 -*-
"""
output/base.py

运行产物写出接口
"""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from config.system_config import SystemConfig


class ArtifactWriter(ABC):
    """一个运行目录的产物写出器, 记录已写出的文件"""

    def __init__(self, out_dir: Path, system: Optional[SystemConfig] = None):
        self.out_dir = Path(out_dir)
        self.system = system or SystemConfig()
        self.written: List[Path] = []
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    @abstractmethod
    def write_columns(self, name: str, columns: Mapping[str, np.ndarray]) -> Path:
        """等长列 -> 带表头的表格"""

    @abstractmethod
    def write_rows(
        self, name: str, rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None
    ) -> Path:
        """字典行 -> 表格, 未给出 columns 时列顺序取第一行"""

    @abstractmethod
    def write_matrix(self, name: str, values: np.ndarray, header: str) -> Path:
        pass

    @abstractmethod
    def write_manifest(self, manifest: Dict[str, Any]) -> Path:
        pass
