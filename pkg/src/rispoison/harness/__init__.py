"""Experiment orchestration: config parsing, seeded runs, aggregation, sweeps."""

from .aggregate import AggregateCurve, aggregate, final_mean_rate, moving_average
from .config import ConfigError, RunConfig, parse_config
from .experiments import CompareReport, SweepRow, compare_attacks, run_sweep
from .runner import RunLog, run_many, run_training

__all__ = [
    "AggregateCurve", "aggregate", "final_mean_rate", "moving_average",
    "ConfigError", "RunConfig", "parse_config",
    "CompareReport", "SweepRow", "compare_attacks", "run_sweep",
    "RunLog", "run_many", "run_training",
]
