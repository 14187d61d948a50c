from __future__ import annotations

import enum
import logging
from pathlib import Path

import attrs
import numpy as np
from attrs import define, field

from zeroday.store import fingerprint, load_document, save_document, store_converter

logger = logging.getLogger(__name__)

MODEL_FORMAT = "zeroday.autoencoder"


class Activation(enum.StrEnum):
    TANH = "tanh"
    RELU = "relu"
    LINEAR = "linear"


class LossKind(enum.StrEnum):
    MSE = "mse"
    MAE = "mae"


def _to_widths(widths) -> tuple[int, ...]:
    return tuple(int(w) for w in widths)


@define(frozen=True)
class Architecture:
    """Layer widths from input to output, e.g. (18, 15, 9, 15, 18)."""

    layer_widths: tuple[int, ...] = field(converter=_to_widths)
    hidden_activation: Activation = field(default=Activation.TANH, converter=Activation)
    output_activation: Activation = field(default=Activation.LINEAR, converter=Activation)

    @layer_widths.validator  # type: ignore
    def check_widths(self, _, widths: tuple[int, ...]):
        if len(widths) < 3:
            raise ValueError("An autoencoder needs at least one hidden layer")
        if min(widths) < 1:
            raise ValueError("Layer widths must be positive")
        if widths[0] != widths[-1]:
            raise ValueError(
                f"Input width {widths[0]} and output width {widths[-1]} must match"
            )
        if self.bottleneck >= widths[0]:
            raise ValueError(
                f"Bottleneck width {self.bottleneck} must be below the input width "
                f"{widths[0]}"
            )

    @output_activation.validator  # type: ignore
    def check_output(self, _, activation: Activation):
        if activation is not Activation.LINEAR:
            raise ValueError("Only a linear output layer is supported")

    @property
    def input_width(self) -> int:
        return self.layer_widths[0]

    @property
    def bottleneck(self) -> int:
        return min(self.layer_widths[1:-1])

    @property
    def n_layers(self) -> int:
        return len(self.layer_widths) - 1

    @property
    def shapes(self) -> list[tuple[int, int]]:
        return list(zip(self.layer_widths[:-1], self.layer_widths[1:]))

    def activation(self, layer: int) -> Activation:
        return self.output_activation if layer == self.n_layers - 1 else self.hidden_activation

    def __str__(self):
        return "-".join(str(w) for w in self.layer_widths) + f" ({self.hidden_activation})"


def _to_arrays(arrays) -> tuple[np.ndarray, ...]:
    return tuple(np.asarray(a, dtype=np.float64) for a in arrays)


@define(frozen=True)
class AutoencoderModel:
    """Encoder/decoder weights: layer l maps a (n, in) batch to act(a @ W[l] + b[l]).

    The encoder is every layer up to the bottleneck, the decoder the rest.
    """

    architecture: Architecture = field()
    weights: tuple[np.ndarray, ...] = field(converter=_to_arrays, eq=False)
    biases: tuple[np.ndarray, ...] = field(converter=_to_arrays, eq=False)
    loss_kind: LossKind = field(default=LossKind.MSE, converter=LossKind)
    l2_lambda: float = field(default=0.0)

    @biases.validator  # type: ignore
    def check_parameters(self, _, biases: tuple[np.ndarray, ...]):
        shapes = self.architecture.shapes
        if len(self.weights) != len(shapes) or len(biases) != len(shapes):
            raise ValueError(f"Expected {len(shapes)} weight matrices and bias vectors")
        for l, (fan_in, fan_out) in enumerate(shapes):
            if self.weights[l].shape != (fan_in, fan_out):
                raise ValueError(
                    f"Layer {l} weights are {self.weights[l].shape}, "
                    f"expected {(fan_in, fan_out)}"
                )
            if biases[l].shape != (fan_out,):
                raise ValueError(f"Layer {l} biases must have length {fan_out}")
        if not all(np.isfinite(p).all() for p in (*self.weights, *biases)):
            raise ValueError("Model parameters must all be finite")

    @l2_lambda.validator  # type: ignore
    def check_l2(self, _, l2: float):
        if l2 < 0:
            raise ValueError("L2 lambda must be non-negative")

    @property
    def input_width(self) -> int:
        return self.architecture.input_width

    def with_parameters(self, weights, biases, **changes) -> AutoencoderModel:
        return attrs.evolve(self, weights=weights, biases=biases, **changes)

    def parameters_equal(self, other: AutoencoderModel) -> bool:
        return all(
            np.array_equal(a, b)
            for a, b in zip((*self.weights, *self.biases), (*other.weights, *other.biases))
        )

    def fingerprint(self) -> str:
        return fingerprint(store_converter.unstructure(self))

    def save(self, path: Path | str, **provenance) -> Path:
        payload = {
            "model": store_converter.unstructure(self),
            "fingerprint": self.fingerprint(),
            "provenance": provenance,
        }
        return save_document(path, MODEL_FORMAT, payload)

    @classmethod
    def load_with_provenance(cls, path: Path | str) -> tuple[AutoencoderModel, dict]:
        document = load_document(path, MODEL_FORMAT, producer="train-ae")
        return store_converter.structure(document["model"], cls), document["provenance"]

    @classmethod
    def load(cls, path: Path | str) -> AutoencoderModel:
        return cls.load_with_provenance(path)[0]


def build_autoencoder(
    arch: Architecture,
    l2: float = 0.0,
    seed: int = 0,
    loss_kind: LossKind = LossKind.MSE,
) -> AutoencoderModel:
    """Fresh model: uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases."""
    if arch.bottleneck >= arch.input_width:
        raise ValueError("Bottleneck must be narrower than the input")
    rng = np.random.default_rng(seed)
    weights = []
    for fan_in, fan_out in arch.shapes:
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
    biases = [np.zeros(fan_out) for _, fan_out in arch.shapes]
    return AutoencoderModel(arch, weights, biases, loss_kind, l2)


def _activate(kind: Activation, z: np.ndarray) -> np.ndarray:
    match kind:
        case Activation.TANH:
            return np.tanh(z)
        case Activation.RELU:
            return np.maximum(z, 0.0)
        case Activation.LINEAR:
            return z


def _activate_grad(kind: Activation, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    match kind:
        case Activation.TANH:
            return 1.0 - a**2
        case Activation.RELU:
            return (z > 0).astype(np.float64)
        case Activation.LINEAR:
            return np.ones_like(z)


def _check_batch(model: AutoencoderModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.input_width:
        raise ValueError(
            f"Model expects rows of width {model.input_width}, got shape {X.shape}"
        )
    return X


def _trace(
    arch: Architecture, weights, biases, X: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Pre-activations and activations of every layer; activations[0] is X."""
    pre, post = [], [X]
    for l in range(arch.n_layers):
        z = post[-1] @ weights[l] + biases[l]
        pre.append(z)
        post.append(_activate(arch.activation(l), z))
    return pre, post


def forward_batch(model: AutoencoderModel, X: np.ndarray) -> np.ndarray:
    X = _check_batch(model, X)
    return _trace(model.architecture, model.weights, model.biases, X)[1][-1]


def forward(model: AutoencoderModel, x: np.ndarray) -> np.ndarray:
    """Reconstruction x' = g(f(x)) of one instance."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("forward takes a single instance; use forward_batch for rows")
    return forward_batch(model, x[np.newaxis, :])[0]


def reconstruction_errors(
    X: np.ndarray, X_prime: np.ndarray, loss_kind: LossKind
) -> np.ndarray:
    """Per-row error, averaged over features."""
    if X.shape != X_prime.shape:
        raise ValueError(f"Shape mismatch: {X.shape} vs {X_prime.shape}")
    residual = X_prime - X
    if loss_kind is LossKind.MSE:
        return (residual**2).mean(axis=-1)
    return np.abs(residual).mean(axis=-1)


def reconstruction_error(x: np.ndarray, x_prime: np.ndarray, loss_kind: LossKind) -> float:
    x, x_prime = np.asarray(x, dtype=np.float64), np.asarray(x_prime, dtype=np.float64)
    if x.ndim != 1 or x.shape != x_prime.shape:
        raise ValueError(f"Length mismatch: {x.shape} vs {x_prime.shape}")
    return float(reconstruction_errors(x, x_prime, LossKind(loss_kind)))


@define(frozen=True)
class Gradients:
    weights: tuple[np.ndarray, ...] = field(eq=False)
    biases: tuple[np.ndarray, ...] = field(eq=False)

    def max_abs(self) -> float:
        return max(float(np.abs(g).max()) for g in (*self.weights, *self.biases))


def objective(
    arch: Architecture, weights, biases, loss_kind: LossKind, l2: float, batch: np.ndarray
) -> float:
    """Batch-mean reconstruction loss plus l2 * sum of squared weights."""
    recon = _trace(arch, weights, biases, batch)[1][-1]
    data = reconstruction_errors(batch, recon, loss_kind).mean()
    return float(data + l2 * sum((w**2).sum() for w in weights))


def backprop(
    arch: Architecture, weights, biases, loss_kind: LossKind, l2: float, batch: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], float]:
    """Analytic gradients of `objective`, plus the batch data loss."""
    pre, post = _trace(arch, weights, biases, batch)
    n, d = batch.shape
    residual = post[-1] - batch
    if loss_kind is LossKind.MSE:
        data_loss = float((residual**2).mean())
        delta = 2.0 * residual / (n * d)
    else:
        data_loss = float(np.abs(residual).mean())
        delta = np.sign(residual) / (n * d)

    grad_w: list[np.ndarray] = [np.empty(0)] * arch.n_layers
    grad_b: list[np.ndarray] = [np.empty(0)] * arch.n_layers
    for l in reversed(range(arch.n_layers)):
        delta = delta * _activate_grad(arch.activation(l), pre[l], post[l + 1])
        grad_w[l] = post[l].T @ delta + 2.0 * l2 * weights[l]
        grad_b[l] = delta.sum(axis=0)
        if l:
            delta = delta @ weights[l].T
    return grad_w, grad_b, data_loss


def gradients(model: AutoencoderModel, batch: np.ndarray) -> Gradients:
    batch = _check_batch(model, batch)
    if batch.shape[0] == 0:
        raise ValueError("Gradient batch must not be empty")
    grad_w, grad_b, _ = backprop(
        model.architecture,
        model.weights,
        model.biases,
        model.loss_kind,
        model.l2_lambda,
        batch,
    )
    return Gradients(tuple(grad_w), tuple(grad_b))
