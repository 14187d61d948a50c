from __future__ import annotations

import functools
import logging
from pathlib import Path

import numpy as np
from attrs import define, field

from zeroday.dataset.labeled import array_fingerprint
from zeroday.errors import DataError
from zeroday.parallel import map_row_blocks
from zeroday.preprocess.correlation import (
    DropReport,
    constant_columns,
    drop_correlated_features,
)
from zeroday.preprocess.scaler import StandardScaler, fit_scaler
from zeroday.store import fingerprint, load_document, save_document, store_converter

logger = logging.getLogger(__name__)

PIPELINE_FORMAT = "zeroday.pipeline"


@define(frozen=True)
class PreprocessPipeline:
    """A benign-only transform: drop recorded columns, then standard-scale.

    Learned once from benign rows and replayed unchanged on every other matrix.
    """

    input_names: tuple[str, ...] = field(converter=tuple)
    drop: DropReport = field()
    scaler: StandardScaler = field()
    fitted_on: str = field()
    std_kind: str = field(default="population")
    pruning: str = field(default="kept-witness")

    @scaler.validator  # type: ignore
    def check_scaler(self, _, scaler: StandardScaler):
        if scaler.width != len(self.drop.kept):
            raise ValueError(
                f"Scaler has {scaler.width} columns but {len(self.drop.kept)} are kept"
            )
        unknown = set(self.drop.kept) - set(self.input_names)
        if unknown:
            raise ValueError(f"Kept columns not in the input: {sorted(unknown)}")

    @functools.cached_property
    def kept_indices(self) -> np.ndarray:
        position = {name: i for i, name in enumerate(self.input_names)}
        return np.asarray([position[name] for name in self.drop.kept], dtype=np.int64)

    @property
    def output_names(self) -> tuple[str, ...]:
        return self.drop.kept

    def fingerprint(self) -> str:
        return fingerprint(store_converter.unstructure(self))

    def to_document(self) -> dict:
        return {"pipeline": store_converter.unstructure(self), "fingerprint": self.fingerprint()}

    @classmethod
    def from_document(cls, document: dict) -> PreprocessPipeline:
        pipeline = store_converter.structure(document["pipeline"], cls)
        if document.get("fingerprint", pipeline.fingerprint()) != pipeline.fingerprint():
            raise DataError("Pipeline document does not match its recorded fingerprint")
        return pipeline

    def save(self, path: Path | str) -> Path:
        return save_document(path, PIPELINE_FORMAT, self.to_document())

    @classmethod
    def load(cls, path: Path | str) -> PreprocessPipeline:
        return cls.from_document(load_document(path, PIPELINE_FORMAT, producer="preprocess"))


def fit_pipeline(
    X_benign: np.ndarray, names, threshold: float | None = 0.9
) -> PreprocessPipeline:
    """Learn the transform from benign rows only.

    With a threshold, constant columns are removed and the rest pruned by
    correlation; with `None` every column is kept and only scaling is learned.
    """
    X_benign = np.asarray(X_benign, dtype=np.float64)
    names = list(names)
    if X_benign.shape[1] != len(names):
        raise ValueError(f"{len(names)} names for {X_benign.shape[1]} columns")

    if threshold is None:
        drop = DropReport(None, names)
        kept = X_benign
    else:
        constant = constant_columns(X_benign)
        if constant.all():
            constant[0] = False
        varying_names = [n for n, c in zip(names, constant) if not c]
        kept, report = drop_correlated_features(
            X_benign[:, ~constant], varying_names, threshold
        )
        drop = DropReport(
            threshold,
            report.kept,
            report.dropped,
            [n for n, c in zip(names, constant) if c],
        )

    pipeline = PreprocessPipeline(
        names, drop, fit_scaler(kept), array_fingerprint(X_benign)
    )
    logger.info(
        "Fitted pipeline on %d benign rows: %d -> %d columns",
        X_benign.shape[0],
        len(names),
        len(drop.kept),
    )
    return pipeline


def apply_pipeline(
    p: PreprocessPipeline, X: np.ndarray, threads: int = 1
) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(p.input_names):
        raise ValueError(
            f"Pipeline expects {len(p.input_names)} columns, got "
            f"{X.shape[1] if X.ndim == 2 else X.shape}"
        )
    kept = p.kept_indices
    return map_row_blocks(lambda block: p.scaler.transform(block[:, kept]), X, threads)
