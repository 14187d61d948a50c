from .detect import detect, score, threshold_for_specificity
from .model import (
    Activation,
    Architecture,
    AutoencoderModel,
    Gradients,
    LossKind,
    build_autoencoder,
    forward,
    forward_batch,
    gradients,
    reconstruction_error,
)
from .search import SearchResult, SearchSpace, Trial, random_search
from .train import TrainConfig, TrainHistory, train

__all__ = [
    "Activation",
    "Architecture",
    "AutoencoderModel",
    "Gradients",
    "LossKind",
    "SearchResult",
    "SearchSpace",
    "TrainConfig",
    "TrainHistory",
    "Trial",
    "build_autoencoder",
    "detect",
    "forward",
    "forward_batch",
    "gradients",
    "random_search",
    "reconstruction_error",
    "score",
    "threshold_for_specificity",
]
