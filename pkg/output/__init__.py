from output.base import ArtifactWriter
from output.csv_writer import CsvArtifactWriter, build_manifest, write_stationary_csv

__all__ = ["ArtifactWriter", "CsvArtifactWriter", "build_manifest", "write_stationary_csv"]
