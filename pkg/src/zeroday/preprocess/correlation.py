from __future__ import annotations

import logging

import numpy as np
from attrs import define, field

logger = logging.getLogger(__name__)


def constant_columns(X: np.ndarray) -> np.ndarray:
    """Boolean mask of columns whose values are all identical."""
    return np.ptp(X, axis=0) == 0


@define(frozen=True)
class CorrelationMatrix:
    """Absolute Pearson correlations; pairs involving a constant column are 0."""

    names: tuple[str, ...] = field(converter=tuple)
    values: np.ndarray = field(eq=False)

    @values.validator  # type: ignore
    def check_values(self, _, values: np.ndarray):
        if values.shape != (len(self.names), len(self.names)):
            raise ValueError("Correlation matrix shape must match the names")
        if not np.array_equal(values, values.T):
            raise ValueError("Correlation matrix must be symmetric")
        if values.size and (values.min() < 0 or values.max() > 1):
            raise ValueError("Absolute correlations must lie in [0, 1]")

    def __getitem__(self, pair: tuple[str, str]) -> float:
        i, j = (self.names.index(n) for n in pair)
        return float(self.values[i, j])


def correlation_matrix(X: np.ndarray, names=None) -> CorrelationMatrix:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("Correlation needs a matrix with at least 2 rows")
    if names is None:
        names = [str(i) for i in range(X.shape[1])]

    centred = X - X.mean(axis=0)
    stds = np.sqrt((centred**2).mean(axis=0))
    varying = ~constant_columns(X)

    values = np.zeros((X.shape[1], X.shape[1]))
    if varying.any():
        sub = centred[:, varying] / stds[varying]
        corr = np.abs(sub.T @ sub) / X.shape[0]
        corr = np.clip((corr + corr.T) / 2, 0.0, 1.0)
        np.fill_diagonal(corr, 1.0)
        values[np.ix_(varying, varying)] = corr
    return CorrelationMatrix(names, values)


@define(frozen=True)
class DroppedColumn:
    name: str
    witness: str
    correlation: float


@define(frozen=True)
class DropReport:
    """Outcome of correlation pruning.

    `threshold` is None when pruning was disabled. Constant columns are removed
    before pruning and listed separately, since they have no witness.
    """

    threshold: float | None = field()
    kept: tuple[str, ...] = field(converter=tuple)
    dropped: tuple[DroppedColumn, ...] = field(default=(), converter=tuple)
    constant: tuple[str, ...] = field(default=(), converter=tuple)

    @threshold.validator  # type: ignore
    def check_threshold(self, _, threshold: float | None):
        if threshold is not None and not 0 < threshold <= 1:
            raise ValueError(f"Correlation threshold must lie in (0, 1], got {threshold}")

    @dropped.validator  # type: ignore
    def check_dropped(self, _, dropped: tuple[DroppedColumn, ...]):
        for d in dropped:
            if self.threshold is None or not d.correlation > self.threshold:
                raise ValueError(f"Column {d.name} dropped without exceeding threshold")

    @property
    def dropped_names(self) -> list[str]:
        return [d.name for d in self.dropped]

    def summary(self) -> str:
        lines = [
            f"kept {len(self.kept)} columns, dropped {len(self.dropped)} correlated "
            f"and {len(self.constant)} constant (threshold {self.threshold})"
        ]
        lines += [f"  {d.name} ~ {d.witness} ({d.correlation:.4f})" for d in self.dropped]
        lines += [f"  {name} (constant)" for name in self.constant]
        return "\n".join(lines)


def drop_correlated_features(
    X: np.ndarray, names, threshold: float
) -> tuple[np.ndarray, DropReport]:
    """Drop columns strongly correlated with an earlier column that was kept.

    Columns are visited in order; column j goes iff |r| with some lower-indexed kept
    column is strictly above the threshold. Column 0 is therefore always kept.
    """
    names = list(names)
    if not 0 < threshold <= 1:
        raise ValueError(f"Correlation threshold must lie in (0, 1], got {threshold}")

    corr = correlation_matrix(X, names).values
    kept: list[int] = []
    dropped: list[DroppedColumn] = []
    for j in range(len(names)):
        witness = next((i for i in kept if corr[i, j] > threshold), None)
        if witness is None:
            kept.append(j)
        else:
            dropped.append(DroppedColumn(names[j], names[witness], float(corr[witness, j])))

    logger.info(
        "Correlation pruning at %s kept %d of %d columns", threshold, len(kept), len(names)
    )
    report = DropReport(threshold, [names[i] for i in kept], dropped)
    return np.asarray(X)[:, kept], report
