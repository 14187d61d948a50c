from .correlation import (
    CorrelationMatrix,
    DropReport,
    DroppedColumn,
    correlation_matrix,
    drop_correlated_features,
)
from .pipeline import PreprocessPipeline, apply_pipeline, fit_pipeline
from .scaler import StandardScaler, fit_scaler

__all__ = [
    "CorrelationMatrix",
    "DropReport",
    "DroppedColumn",
    "PreprocessPipeline",
    "StandardScaler",
    "apply_pipeline",
    "correlation_matrix",
    "drop_correlated_features",
    "fit_pipeline",
    "fit_scaler",
]
