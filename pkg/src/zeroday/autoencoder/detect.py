from __future__ import annotations

import math

import numpy as np

from zeroday.autoencoder.model import (
    AutoencoderModel,
    LossKind,
    forward_batch,
    reconstruction_errors,
)
from zeroday.parallel import map_row_blocks


def score(
    model: AutoencoderModel,
    X: np.ndarray,
    loss_kind: LossKind | None = None,
    threads: int = 1,
) -> np.ndarray:
    """Reconstruction error of every row, in row order.

    Scored with the model's training loss unless `loss_kind` overrides it.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_width:
        raise ValueError(
            f"Model expects rows of width {model.input_width}, got shape {X.shape}"
        )
    kind = LossKind(loss_kind) if loss_kind is not None else model.loss_kind
    return map_row_blocks(
        lambda block: reconstruction_errors(block, forward_batch(model, block), kind),
        X,
        threads,
    )


def detect(scores: np.ndarray, threshold: float) -> float:
    """Fraction of scores strictly above the threshold (flagged as zero-day)."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.size == 0:
        raise ValueError("Cannot compute a detection rate over no scores")
    return float(np.count_nonzero(scores > threshold)) / scores.size


def threshold_for_specificity(benign_scores: np.ndarray, target: float) -> float:
    """Smallest score-valued threshold leaving at least `target` of benign unflagged."""
    if not 0 < target <= 1:
        raise ValueError(f"Target specificity must lie in (0, 1], got {target}")
    ordered = np.sort(np.asarray(benign_scores, dtype=np.float64))
    if ordered.size == 0:
        raise ValueError("Cannot pick a threshold from no scores")
    return float(ordered[math.ceil(target * ordered.size) - 1])
