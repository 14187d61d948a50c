from __future__ import annotations

import functools
import hashlib
import logging
import math
import typing

import numpy as np
import pandas as pd
from attrs import define, field

from zeroday.dataset.table import ColumnKind, FeatureTable
from zeroday.errors import DataError

logger = logging.getLogger(__name__)

DEFAULT_BENIGN_LABEL = "benign"


def array_fingerprint(X: np.ndarray) -> str:
    X = np.ascontiguousarray(X, dtype=np.float64)
    digest = hashlib.sha256(X.tobytes())
    digest.update(str(X.shape).encode())
    return f"{digest.hexdigest()}:{X.shape[0]}"


@define(frozen=True)
class LabeledDataset:
    """A fully numeric feature matrix with one class label per row.

    The benign class is distinguished: it is the only class any statistic or model
    is ever fitted on.
    """

    features: np.ndarray = field(eq=False, converter=lambda a: np.asarray(a, float))
    labels: tuple[str, ...] = field(converter=tuple)
    feature_names: tuple[str, ...] = field(default=(), converter=tuple)
    benign_label: str = field(default=DEFAULT_BENIGN_LABEL)

    @features.validator  # type: ignore
    def check_features(self, _, features: np.ndarray):
        if features.ndim != 2:
            raise ValueError("Features must be a 2D matrix")

    @labels.validator  # type: ignore
    def check_labels(self, _, labels: tuple[str, ...]):
        if len(labels) != self.features.shape[0]:
            raise ValueError(
                f"{len(labels)} labels for {self.features.shape[0]} feature rows"
            )

    @feature_names.validator  # type: ignore
    def check_names(self, _, names: tuple[str, ...]):
        if names and len(names) != self.features.shape[1]:
            raise ValueError("Feature names must match the feature column count")

    @classmethod
    def from_table(
        cls, table: FeatureTable, benign_label: str = DEFAULT_BENIGN_LABEL
    ) -> LabeledDataset:
        if table.labels is None:
            raise DataError("Table was loaded without a label column")
        return cls(table.matrix(), table.labels, table.column_names, benign_label)

    @functools.cached_property
    def class_index(self) -> dict[str, np.ndarray]:
        """Row indices per class; together they partition the row range."""
        groups = pd.Series(self.labels, dtype=object).groupby(
            list(self.labels), sort=True
        )
        return {k: np.asarray(v, dtype=np.int64) for k, v in groups.indices.items()}

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def classes(self) -> list[str]:
        return sorted(self.class_index.keys())

    @property
    def attack_classes(self) -> list[str]:
        return [c for c in self.classes if c != self.benign_label]

    @property
    def has_benign(self) -> bool:
        return self.benign_label in self.class_index

    def rows_of(self, label: str) -> np.ndarray:
        if label not in self.class_index:
            raise KeyError(f"No class {label!r} in dataset")
        return self.features[self.class_index[label]]

    def benign_rows(self) -> np.ndarray:
        if not self.has_benign:
            raise DataError(f"Dataset has no {self.benign_label!r} rows")
        return self.rows_of(self.benign_label)

    def relabel(self, mapping: typing.Mapping[str, str]) -> LabeledDataset:
        """Map raw labels onto evaluation classes; unmapped labels are kept."""
        return LabeledDataset(
            self.features,
            [mapping.get(label, label) for label in self.labels],
            self.feature_names,
            mapping.get(self.benign_label, self.benign_label),
        )

    def with_features(self, features: np.ndarray, names=()) -> LabeledDataset:
        return LabeledDataset(features, self.labels, names, self.benign_label)

    def fingerprint(self) -> str:
        return array_fingerprint(self.features)

    def to_table(self, label_name: str = "label") -> FeatureTable:
        names = self.feature_names or tuple(f"x{i}" for i in range(self.features.shape[1]))
        frame = pd.DataFrame(self.features, columns=list(names))
        return FeatureTable(
            frame,
            {name: ColumnKind.NUMERIC for name in names},
            labels=self.labels,
            label_name=label_name,
        )


def _check_fraction(_, attribute, value: float):
    if not 0 < value < 1:
        raise ValueError(f"{attribute.name} must lie in (0, 1), got {value}")


@define(frozen=True)
class SplitSpec:
    train_fraction: float = field(default=0.75, validator=_check_fraction)
    seed: int = field(default=0)
    shuffle: bool = field(default=True)

    @seed.validator  # type: ignore
    def check_seed(self, _, seed: int):
        if seed < 0:
            raise ValueError("Seed must be an unsigned integer")


def split_benign_indices(
    dataset: LabeledDataset, spec: SplitSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Row indices (into the dataset) of the benign training and validation parts.

    The training part has floor(train_fraction * n) rows, raised to 1 when that
    floor is 0, so a tiny fraction still trains on one row. With train_fraction
    below 1 the floor never exceeds n - 1, so validation always keeps a row.
    """
    benign = dataset.class_index.get(dataset.benign_label)
    if benign is None or len(benign) < 2:
        raise DataError(
            f"Need at least 2 {dataset.benign_label!r} rows to split, "
            f"found {0 if benign is None else len(benign)}"
        )

    order = benign
    if spec.shuffle:
        order = benign[np.random.default_rng(spec.seed).permutation(len(benign))]

    n_train = max(math.floor(spec.train_fraction * len(benign)), 1)
    n_train = min(n_train, len(benign) - 1)
    return order[:n_train], order[n_train:]


def split_benign(
    dataset: LabeledDataset, spec: SplitSpec
) -> tuple[np.ndarray, np.ndarray]:
    train_idx, val_idx = split_benign_indices(dataset, spec)
    logger.debug(
        "Split %d benign rows into %d train / %d validation",
        len(train_idx) + len(val_idx),
        len(train_idx),
        len(val_idx),
    )
    return dataset.features[train_idx], dataset.features[val_idx]
