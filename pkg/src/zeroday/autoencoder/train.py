from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from attrs import define, field

from zeroday.autoencoder.model import AutoencoderModel, LossKind, backprop, objective
from zeroday.errors import DataError, NumericError

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8


def _positive(_, attribute, value):
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value}")


def _non_negative(_, attribute, value):
    if value < 0:
        raise ValueError(f"{attribute.name} must be non-negative, got {value}")


@define(frozen=True)
class TrainConfig:
    epochs: int = field(default=50, validator=_non_negative)
    batch_size: int = field(default=1024, validator=_positive)
    learning_rate: float = field(default=1e-3, validator=_positive)
    l2_lambda: float = field(default=1e-4, validator=_non_negative)
    loss_kind: LossKind = field(default=LossKind.MSE, converter=LossKind)
    seed: int = field(default=0, validator=_non_negative)


@define(frozen=True)
class TrainHistory:
    """Per-epoch reconstruction loss (without the L2 term) on both benign parts."""

    train_loss: tuple[float, ...] = field(default=(), converter=tuple)
    validation_loss: tuple[float, ...] = field(default=(), converter=tuple)

    @validation_loss.validator  # type: ignore
    def check_lengths(self, _, validation_loss: tuple[float, ...]):
        if len(validation_loss) != len(self.train_loss):
            raise ValueError("Train and validation curves must have the same length")

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "epoch": np.arange(1, self.epochs + 1),
                "train_loss": self.train_loss,
                "validation_loss": self.validation_loss,
            }
        )

    def to_csv(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = self.to_frame()
        for column in ("train_loss", "validation_loss"):
            frame[column] = frame[column].map(float.__repr__)
        frame.to_csv(path, index=False, lineterminator="\n")
        return path


class AdamState:
    """Adaptive moment estimates for a list of parameter arrays."""

    def __init__(self, params: list[np.ndarray], learning_rate: float):
        self.learning_rate = learning_rate
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]):
        self.t += 1
        correction1 = 1.0 - ADAM_BETA1**self.t
        correction2 = 1.0 - ADAM_BETA2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= ADAM_BETA1
            m += (1.0 - ADAM_BETA1) * g
            v *= ADAM_BETA2
            v += (1.0 - ADAM_BETA2) * g**2
            p -= self.learning_rate * (m / correction1) / (
                np.sqrt(v / correction2) + ADAM_EPSILON
            )


def train(
    model: AutoencoderModel,
    cfg: TrainConfig,
    train: np.ndarray,
    validation: np.ndarray,
) -> tuple[AutoencoderModel, TrainHistory]:
    """Mini-batch Adam on benign rows; batches reshuffled every epoch from cfg.seed.

    The final short batch of an epoch is kept. Returns a new model; the input model
    is left untouched.
    """
    train = np.asarray(train, dtype=np.float64)
    validation = np.asarray(validation, dtype=np.float64)
    if train.ndim != 2 or train.shape[0] == 0:
        raise DataError("Training set is empty")
    for name, X in (("training", train), ("validation", validation)):
        if X.ndim != 2 or X.shape[1] != model.input_width:
            raise ValueError(
                f"{name} rows must have width {model.input_width}, got {X.shape}"
            )
    if validation.shape[0] == 0:
        raise DataError("Validation set is empty")

    if cfg.epochs == 0:
        return model, TrainHistory()

    arch = model.architecture
    weights = [w.copy() for w in model.weights]
    biases = [b.copy() for b in model.biases]
    optimiser = AdamState([*weights, *biases], cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    batch_size = min(cfg.batch_size, train.shape[0])

    def data_loss(X: np.ndarray) -> float:
        return objective(arch, weights, biases, cfg.loss_kind, 0.0, X)

    train_curve: list[float] = []
    validation_curve: list[float] = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(train.shape[0])
        for start in range(0, train.shape[0], batch_size):
            batch = train[order[start : start + batch_size]]
            grad_w, grad_b, _ = backprop(
                arch, weights, biases, cfg.loss_kind, cfg.l2_lambda, batch
            )
            optimiser.step([*weights, *biases], [*grad_w, *grad_b])

        train_curve.append(data_loss(train))
        validation_curve.append(data_loss(validation))
        if not np.isfinite(train_curve[-1]) or not np.isfinite(validation_curve[-1]):
            raise NumericError(
                f"Training diverged at epoch {epoch} (loss {train_curve[-1]}); "
                "try a lower learning rate"
            )
        logger.debug(
            "epoch %d/%d: train %.6f, validation %.6f",
            epoch,
            cfg.epochs,
            train_curve[-1],
            validation_curve[-1],
        )

    logger.info(
        "Trained %s for %d epochs: validation %s %.6f",
        arch,
        cfg.epochs,
        cfg.loss_kind,
        validation_curve[-1],
    )
    trained = model.with_parameters(
        weights, biases, loss_kind=cfg.loss_kind, l2_lambda=cfg.l2_lambda
    )
    return trained, TrainHistory(train_curve, validation_curve)
