from .labeled import LabeledDataset, SplitSpec, split_benign, split_benign_indices
from .synthetic import SyntheticSpec, generate_synthetic
from .table import (
    ColumnKind,
    FeatureTable,
    encode_categoricals,
    learn_vocabulary,
    load_feature_csv,
    write_feature_csv,
)

__all__ = [
    "ColumnKind",
    "FeatureTable",
    "LabeledDataset",
    "SplitSpec",
    "SyntheticSpec",
    "encode_categoricals",
    "generate_synthetic",
    "learn_vocabulary",
    "load_feature_csv",
    "split_benign",
    "split_benign_indices",
    "write_feature_csv",
]
