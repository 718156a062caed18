from dataclasses import dataclass
import os


@dataclass
class SystemConfig:
    """进程级常量 (版本号写入每个 manifest)"""

    VERSION: str = "1.0.0"

    # 输出
    OUTPUT_DIR: str = "runs"
    CSV_DIGITS: int = 17                 # CSV 有效数字
    TABLE_DIGITS: int = 6                # 人读表格有效数字
    MANIFEST_NAME: str = "manifest.json"

    # 并行
    DEFAULT_JOBS: int = 1

    LOG_FORMAT: str = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'

    def __post_init__(self):
        if self.DEFAULT_JOBS < 1:
            self.DEFAULT_JOBS = max(1, os.cpu_count() or 1)

    @property
    def csv_fmt(self) -> str:
        return f"%.{self.CSV_DIGITS}g"

    @property
    def table_fmt(self) -> str:
        return f"{{:.{self.TABLE_DIGITS}g}}"
