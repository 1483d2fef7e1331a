"""Benchmark harness: configuration, grid runs, diagnostics and result files."""

from .config import BenchConfig, load_config, shipped_config
from .io import emit_csv, emit_markdown_table, markdown_table, read_csv, read_trajectory, write_trajectory
from .records import RunRecord
from .runner import Diagnostics, diagnostics_report, run_grid, run_trajectory

__all__ = [
    "BenchConfig",
    "load_config",
    "shipped_config",
    "RunRecord",
    "run_grid",
    "run_trajectory",
    "Diagnostics",
    "diagnostics_report",
    "emit_csv",
    "read_csv",
    "emit_markdown_table",
    "markdown_table",
    "write_trajectory",
    "read_trajectory",
]
