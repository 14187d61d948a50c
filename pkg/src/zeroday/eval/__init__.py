from .compare import compare
from .emit import ReportFormat, emit_report, load_report, rate_table, write_plot_data
from .protocol import evaluate_autoencoder, evaluate_ocsvm
from .report import (
    BenignRows,
    ComparedClass,
    ComparisonReport,
    Detector,
    EvalReport,
    ReportMetadata,
    ThresholdSweep,
    Winner,
)

__all__ = [
    "BenignRows",
    "ComparedClass",
    "ComparisonReport",
    "Detector",
    "EvalReport",
    "ReportFormat",
    "ReportMetadata",
    "ThresholdSweep",
    "Winner",
    "compare",
    "emit_report",
    "evaluate_autoencoder",
    "evaluate_ocsvm",
    "load_report",
    "rate_table",
    "write_plot_data",
]
