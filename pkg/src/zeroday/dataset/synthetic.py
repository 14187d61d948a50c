from __future__ import annotations

import numpy as np
from attrs import define, field

from zeroday.dataset.labeled import DEFAULT_BENIGN_LABEL, LabeledDataset


def _at_least_one(_, attribute, value: int):
    if value < 1:
        raise ValueError(f"{attribute.name} must be at least 1, got {value}")


def _to_offsets(offsets) -> tuple[float | tuple[float, ...], ...]:
    return tuple(o if np.isscalar(o) else tuple(float(x) for x in o) for o in offsets)


@define(frozen=True)
class SyntheticSpec:
    """Parameters of the desk-scale stand-in for a flow-feature dataset.

    Benign rows lie near a `benign_covariance_rank`-dimensional linear manifold.
    Each attack offset is either a full mean-shift vector or a scalar, which shifts
    every feature by that amount.
    """

    n_benign: int = field(validator=_at_least_one)
    n_attack_classes: int = field(validator=_at_least_one)
    n_features: int = field(validator=_at_least_one)
    benign_covariance_rank: int = field(validator=_at_least_one)
    attack_offsets: tuple = field(converter=_to_offsets)
    noise_sigma: float = field()
    seed: int = field(default=0)
    n_attack: int = field(default=1000, validator=_at_least_one)
    class_names: tuple[str, ...] | None = field(default=None)

    @benign_covariance_rank.validator  # type: ignore
    def check_rank(self, _, rank: int):
        if rank > self.n_features:
            raise ValueError("Benign covariance rank cannot exceed the feature count")

    @attack_offsets.validator  # type: ignore
    def check_offsets(self, _, offsets: tuple):
        if len(offsets) != self.n_attack_classes:
            raise ValueError(
                f"{len(offsets)} attack offsets for {self.n_attack_classes} classes"
            )
        for o in offsets:
            if not np.isscalar(o) and len(o) != self.n_features:
                raise ValueError("Offset vectors need one entry per feature")

    @noise_sigma.validator  # type: ignore
    def check_sigma(self, _, sigma: float):
        if not sigma > 0:
            raise ValueError("Noise sigma must be positive")

    @class_names.validator  # type: ignore
    def check_names(self, _, names: tuple[str, ...] | None):
        if names is not None and len(names) != self.n_attack_classes:
            raise ValueError("One class name is needed per attack class")

    @property
    def attack_labels(self) -> tuple[str, ...]:
        if self.class_names is not None:
            return tuple(self.class_names)
        return tuple(f"attack-{k + 1}" for k in range(self.n_attack_classes))

    def offset_vector(self, k: int) -> np.ndarray:
        offset = self.attack_offsets[k]
        if np.isscalar(offset):
            return np.full(self.n_features, float(offset))
        return np.asarray(offset, dtype=np.float64)


def _loadings(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    # scaled so that each feature has roughly unit variance before noise
    rank = spec.benign_covariance_rank
    return rng.normal(0.0, 1.0 / np.sqrt(rank), size=(rank, spec.n_features))


def benign_covariance(spec: SyntheticSpec) -> np.ndarray:
    """The exact covariance of the benign generator, for oracle checks."""
    loadings = _loadings(spec, np.random.default_rng(spec.seed))
    return loadings.T @ loadings + spec.noise_sigma**2 * np.eye(spec.n_features)


def generate_synthetic(spec: SyntheticSpec) -> LabeledDataset:
    rng = np.random.default_rng(spec.seed)
    loadings = _loadings(spec, rng)

    def draw(n: int) -> np.ndarray:
        latent = rng.normal(size=(n, spec.benign_covariance_rank))
        noise = rng.normal(0.0, spec.noise_sigma, size=(n, spec.n_features))
        return latent @ loadings + noise

    blocks = [draw(spec.n_benign)]
    labels = [DEFAULT_BENIGN_LABEL] * spec.n_benign
    for k, label in enumerate(spec.attack_labels):
        blocks.append(draw(spec.n_attack) + spec.offset_vector(k))
        labels.extend([label] * spec.n_attack)

    names = [f"f{i:02d}" for i in range(spec.n_features)]
    return LabeledDataset(np.vstack(blocks), labels, names, DEFAULT_BENIGN_LABEL)
