from __future__ import annotations

import numpy as np
from attrs import define, field

from zeroday.preprocess.correlation import constant_columns


@define(frozen=True)
class StandardScaler:
    """Per-column mean and population standard deviation (0 replaced by 1)."""

    means: np.ndarray = field(eq=False)
    stds: np.ndarray = field(eq=False)

    @stds.validator  # type: ignore
    def check_stds(self, _, stds: np.ndarray):
        if stds.shape != self.means.shape:
            raise ValueError("Means and stds must have the same length")
        if not (stds > 0).all():
            raise ValueError("Scaler stds must be strictly positive")

    @property
    def width(self) -> int:
        return self.means.shape[0]

    def transform(self, X: np.ndarray) -> np.ndarray:
        if X.shape[1] != self.width:
            raise ValueError(f"Scaler expects {self.width} columns, got {X.shape[1]}")
        return (X - self.means) / self.stds

    @classmethod
    def identity(cls, width: int) -> StandardScaler:
        return cls(np.zeros(width), np.ones(width))


def fit_scaler(X_benign: np.ndarray) -> StandardScaler:
    X_benign = np.asarray(X_benign, dtype=np.float64)
    if X_benign.ndim != 2 or X_benign.shape[0] < 1:
        raise ValueError("Scaler needs at least one row")
    stds = X_benign.std(axis=0)
    stds[constant_columns(X_benign) | (stds == 0)] = 1.0
    return StandardScaler(X_benign.mean(axis=0), stds)
