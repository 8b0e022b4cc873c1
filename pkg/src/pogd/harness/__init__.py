from .config import (
    DatasetConfig,
    ExperimentConfig,
    OptimizerConfig,
    TestfnConfig,
    build_hyper,
    parse_config,
    serialize_config,
)
from .metrics import CSV_HEADER, MetricsRecord, read_metrics, write_metrics
from .report import Report, compare_report, write_long_csv
from .run import OptimizerDriver, run_experiment, run_testfn
from .schedule import Constant, InverseDecay, LrSchedule, StepDecay

__all__ = [
    "CSV_HEADER",
    "Constant",
    "DatasetConfig",
    "ExperimentConfig",
    "InverseDecay",
    "LrSchedule",
    "MetricsRecord",
    "OptimizerConfig",
    "OptimizerDriver",
    "Report",
    "StepDecay",
    "TestfnConfig",
    "build_hyper",
    "compare_report",
    "parse_config",
    "read_metrics",
    "run_experiment",
    "run_testfn",
    "serialize_config",
    "write_long_csv",
    "write_metrics",
]
