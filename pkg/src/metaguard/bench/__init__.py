"""Benchmark corpus and measurement harness."""
from .cases import FEATURES, SUITES, BenchCase, CaseError, load_case, load_suite, marked_lines
from .score import COLUMNS, TIMEOUT_CELL, RunMetrics, score
from .suite import MATRIX, TIMEOUT, run_case, run_suite, write_metrics

__all__ = [
    "BenchCase", "COLUMNS", "CaseError", "FEATURES", "MATRIX", "RunMetrics", "SUITES", "TIMEOUT",
    "TIMEOUT_CELL", "load_case", "load_suite", "marked_lines", "run_case", "run_suite", "score",
    "write_metrics",
]
