"""Benchmark orchestration: configuration, cell execution, report emission."""

from .config import ExperimentConfig, derive_seed, load_config_file
from .runner import BenchRunner
from .report import BenchmarkReport, write_report

__all__ = [
    "ExperimentConfig",
    "derive_seed",
    "load_config_file",
    "BenchRunner",
    "BenchmarkReport",
    "write_report",
]
