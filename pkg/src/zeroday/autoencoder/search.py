from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd
from attrs import define, field

from zeroday.autoencoder.model import (
    Architecture,
    AutoencoderModel,
    LossKind,
    build_autoencoder,
)
from zeroday.autoencoder.train import TrainConfig, TrainHistory, train

logger = logging.getLogger(__name__)

TRIAL_EPOCH_CAP = 10


def _non_empty(_, attribute, value):
    if len(value) == 0:
        raise ValueError(f"{attribute.name} must not be empty")


@define(frozen=True)
class SearchSpace:
    """Candidate hyperparameters; each trial draws one of each uniformly."""

    architectures: tuple[Architecture, ...] = field(converter=tuple, validator=_non_empty)
    learning_rates: tuple[float, ...] = field(converter=tuple, validator=_non_empty)
    epoch_counts: tuple[int, ...] = field(converter=tuple, validator=_non_empty)
    l2_lambdas: tuple[float, ...] = field(converter=tuple, validator=_non_empty)
    budget: int = field(default=10)
    seed: int = field(default=0)
    batch_size: int = field(default=1024)
    loss_kind: LossKind = field(default=LossKind.MSE, converter=LossKind)

    @budget.validator  # type: ignore
    def check_budget(self, _, budget: int):
        if budget < 1:
            raise ValueError("Search budget must be at least 1")

    @property
    def size(self) -> int:
        return (
            len(self.architectures)
            * len(self.learning_rates)
            * len(self.epoch_counts)
            * len(self.l2_lambdas)
        )


@define(frozen=True)
class Trial:
    index: int
    architecture: Architecture
    config: TrainConfig
    validation_loss: float


@define(frozen=True)
class SearchResult:
    architecture: Architecture
    config: TrainConfig
    trials: tuple[Trial, ...] = field(converter=tuple)
    model: AutoencoderModel | None = field(default=None)
    history: TrainHistory | None = field(default=None)

    def trials_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "trial": t.index,
                    "architecture": "-".join(map(str, t.architecture.layer_widths)),
                    "activation": str(t.architecture.hidden_activation),
                    "learning_rate": t.config.learning_rate,
                    "epochs": t.config.epochs,
                    "l2_lambda": t.config.l2_lambda,
                    "validation_loss": float.__repr__(t.validation_loss),
                }
                for t in self.trials
            ]
        )

    def trials_to_csv(self, path: Path | str) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.trials_frame().to_csv(path, index=False, lineterminator="\n")
        return path


def random_search(
    space: SearchSpace,
    benign_train: np.ndarray,
    benign_val: np.ndarray,
    retrain: bool = False,
) -> SearchResult:
    """Sample `budget` configurations with replacement and keep the lowest loss.

    Trials train for at most TRIAL_EPOCH_CAP epochs; initialisation and batch order
    depend only on the search seed, so a configuration drawn twice scores the same.
    Ties go to the earlier trial. With `retrain`, the winner is trained again at its
    full epoch count.
    """
    rng = np.random.default_rng(space.seed)
    width = benign_train.shape[1]
    for arch in space.architectures:
        if arch.input_width != width:
            raise ValueError(f"Architecture {arch} does not fit {width} input features")

    seen: dict[tuple, float] = {}
    trials: list[Trial] = []
    best: Trial | None = None
    for index in range(space.budget):
        arch = space.architectures[rng.integers(len(space.architectures))]
        config = TrainConfig(
            epochs=space.epoch_counts[rng.integers(len(space.epoch_counts))],
            batch_size=space.batch_size,
            learning_rate=space.learning_rates[rng.integers(len(space.learning_rates))],
            l2_lambda=space.l2_lambdas[rng.integers(len(space.l2_lambdas))],
            loss_kind=space.loss_kind,
            seed=space.seed,
        )

        key = (arch, config)
        if key not in seen:
            short = TrainConfig(
                min(TRIAL_EPOCH_CAP, config.epochs),
                config.batch_size,
                config.learning_rate,
                config.l2_lambda,
                config.loss_kind,
                config.seed,
            )
            model = build_autoencoder(arch, config.l2_lambda, space.seed, config.loss_kind)
            _, history = train(model, short, benign_train, benign_val)
            seen[key] = history.validation_loss[-1] if history.epochs else float("inf")

        trial = Trial(index, arch, config, seen[key])
        trials.append(trial)
        logger.info(
            "trial %d: %s lr=%g epochs=%d l2=%g -> %.6f",
            index,
            arch,
            config.learning_rate,
            config.epochs,
            config.l2_lambda,
            trial.validation_loss,
        )
        if best is None or trial.validation_loss < best.validation_loss:
            best = trial

    assert best is not None
    result = SearchResult(best.architecture, best.config, trials)
    if retrain:
        model = build_autoencoder(
            best.architecture, best.config.l2_lambda, space.seed, best.config.loss_kind
        )
        model, history = train(model, best.config, benign_train, benign_val)
        result = SearchResult(best.architecture, best.config, trials, model, history)
    return result
