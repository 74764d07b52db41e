"""Benchmark harness exports"""

from .fit import FitResult, fit_linear, fit_points, fit_scaling
from .harness import run_plan, run_point, sample_data
from .plan import CSV_COLUMNS, BenchRow, ExecutionModel, ExperimentPlan
from .report import emit_plots, job_row, read_csv, rows_frame, write_csv

__all__ = [
    "FitResult",
    "fit_linear",
    "fit_points",
    "fit_scaling",
    "run_plan",
    "run_point",
    "sample_data",
    "CSV_COLUMNS",
    "BenchRow",
    "ExecutionModel",
    "ExperimentPlan",
    "emit_plots",
    "job_row",
    "read_csv",
    "rows_frame",
    "write_csv",
]
