from __future__ import annotations

import enum
import functools

import numpy as np
from attrs import define, field
from scipy.spatial.distance import cdist

GAMMA_SCALE = "scale"


class KernelKind(enum.StrEnum):
    RBF = "rbf"


def _to_gamma(value: float | str) -> float | str:
    if value == GAMMA_SCALE:
        return GAMMA_SCALE
    return float(value)


@define(frozen=True)
class KernelSpec:
    """RBF kernel; gamma is a positive number or "scale", 1 / (d * Var(X))."""

    kind: KernelKind = field(default=KernelKind.RBF, converter=KernelKind)
    gamma: float | str = field(default=GAMMA_SCALE, converter=_to_gamma)

    @gamma.validator  # type: ignore
    def check_gamma(self, _, gamma: float | str):
        if gamma != GAMMA_SCALE and not gamma > 0:
            raise ValueError(f"Kernel gamma must be positive, got {gamma}")

    @property
    def is_resolved(self) -> bool:
        return self.gamma != GAMMA_SCALE

    def resolve(self, X: np.ndarray) -> KernelSpec:
        if self.is_resolved:
            return self
        variance = float(np.asarray(X, dtype=np.float64).var())
        gamma = 1.0 / (X.shape[1] * variance) if variance > 0 else 1.0
        return KernelSpec(self.kind, gamma)


def rbf_kernel(x: np.ndarray, y: np.ndarray, gamma: float) -> float:
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"Length mismatch: {x.shape} vs {y.shape}")
    if not gamma > 0:
        raise ValueError("Kernel gamma must be positive")
    return float(np.exp(-gamma * np.sum((x - y) ** 2)))


def rbf_matrix(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * cdist(A, B, "sqeuclidean"))


class KernelRows:
    """Rows of the training kernel matrix.

    Small problems get the whole matrix up front; larger ones compute rows on
    demand and keep the most recently used `cache_rows` of them.
    """

    def __init__(self, X: np.ndarray, gamma: float, dense_limit: int, cache_rows: int):
        self.X = X
        self.gamma = gamma
        self.n = X.shape[0]
        self.dense = self.n <= dense_limit
        if self.dense:
            self._matrix = rbf_matrix(X, X, gamma)
            self.row = self._dense_row
        else:
            self.row = functools.lru_cache(maxsize=cache_rows)(self._compute_row)

    def _dense_row(self, i: int) -> np.ndarray:
        return self._matrix[i]

    def _compute_row(self, i: int) -> np.ndarray:
        return rbf_matrix(self.X[i : i + 1], self.X, self.gamma)[0]

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if self.dense:
            return self._matrix @ v
        out = np.zeros(self.n)
        for i in np.flatnonzero(v):
            out += v[i] * self._compute_row(int(i))
        return out
