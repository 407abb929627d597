"""Read-rate driven intermittent execution simulator."""

from ._core import (
    BenchmarkResult,
    CalibrationResult,
    CellSummary,
    Config,
    CorrelationResult,
    LinearFit,
    TimingRecord,
    TrialResult,
    active_time,
    benchmark,
    benchmark_csv,
    calibrate,
    charge_time,
    compute_sleep_time,
    correlate,
    correlate_csv,
    estimate_charge_time,
    fit_tc_vs_d_squared,
    pearson,
    read_rate,
    run_trial,
    sweep,
    sweep_csv,
)

__all__ = [
    "BenchmarkResult",
    "CalibrationResult",
    "CellSummary",
    "Config",
    "CorrelationResult",
    "LinearFit",
    "TimingRecord",
    "TrialResult",
    "active_time",
    "benchmark",
    "benchmark_csv",
    "calibrate",
    "charge_time",
    "compute_sleep_time",
    "correlate",
    "correlate_csv",
    "estimate_charge_time",
    "fit_tc_vs_d_squared",
    "pearson",
    "read_rate",
    "run_trial",
    "sweep",
    "sweep_csv",
]
