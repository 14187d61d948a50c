from __future__ import annotations

import enum
from pathlib import Path

import numpy as np
from attrs import define, field

from zeroday.ocsvm.kernel import KernelSpec, rbf_matrix
from zeroday.parallel import map_row_blocks
from zeroday.store import fingerprint, load_document, save_document, store_converter

MODEL_FORMAT = "zeroday.ocsvm"
SUM_TOLERANCE = 1e-8
BOUND_TOLERANCE = 1e-10


class Membership(enum.IntEnum):
    """SVM output: 1 inside the learned benign region, 0 outside."""

    OUTLIER = 0
    INLIER = 1


@define(frozen=True)
class OneClassSvmModel:
    """Support vectors and dual coefficients of the hyperplane separating benign
    data from the origin in feature space.

    decision(x) = sum_i alpha_i k(sv_i, x) - rho; positive is the benign side.
    """

    support_vectors: np.ndarray = field(eq=False)
    alphas: np.ndarray = field(eq=False)
    rho: float = field()
    nu: float = field()
    kernel: KernelSpec = field()
    n_train: int = field()
    tolerance: float = field(default=1e-4)
    fitted_on: str = field(default="")

    @nu.validator  # type: ignore
    def check_nu(self, _, nu: float):
        if not 0 < nu <= 1:
            raise ValueError(f"nu must lie in (0, 1], got {nu}")

    @kernel.validator  # type: ignore
    def check_kernel(self, _, kernel: KernelSpec):
        if not kernel.is_resolved:
            raise ValueError("A fitted model needs a numeric gamma")

    @n_train.validator  # type: ignore
    def check_duals(self, _, n_train: int):
        if self.support_vectors.ndim != 2 or len(self.support_vectors) < 1:
            raise ValueError("A fitted model needs at least one support vector")
        if self.alphas.shape != (len(self.support_vectors),):
            raise ValueError("One dual coefficient is needed per support vector")
        if abs(self.alphas.sum() - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"Dual coefficients sum to {self.alphas.sum()}, not 1")
        if (self.alphas <= 0).any() or (self.alphas > self.upper_bound + BOUND_TOLERANCE).any():
            raise ValueError("Dual coefficients must lie in (0, 1/(nu n)]")

    @property
    def upper_bound(self) -> float:
        return 1.0 / (self.nu * self.n_train)

    @property
    def width(self) -> int:
        return self.support_vectors.shape[1]

    @property
    def margin_mask(self) -> np.ndarray:
        """Support vectors strictly inside the box, which lie on the hyperplane."""
        return self.alphas < self.upper_bound

    def dual_objective(self) -> float:
        K = rbf_matrix(self.support_vectors, self.support_vectors, self.kernel.gamma)
        return float(0.5 * self.alphas @ K @ self.alphas)

    def decision_values(self, X: np.ndarray, threads: int = 1) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.width:
            raise ValueError(
                f"Model expects rows of width {self.width}, got shape {X.shape}"
            )
        gamma = self.kernel.gamma
        return map_row_blocks(
            lambda block: rbf_matrix(block, self.support_vectors, gamma) @ self.alphas
            - self.rho,
            X,
            threads,
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
    def load_with_provenance(cls, path: Path | str) -> tuple[OneClassSvmModel, dict]:
        document = load_document(path, MODEL_FORMAT, producer="train-svm")
        return store_converter.structure(document["model"], cls), document["provenance"]

    @classmethod
    def load(cls, path: Path | str) -> OneClassSvmModel:
        return cls.load_with_provenance(path)[0]


def decision_function(model: OneClassSvmModel, x: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("decision_function takes a single instance")
    return float(model.decision_values(x[np.newaxis, :])[0])


def predict(model: OneClassSvmModel, x: np.ndarray) -> Membership:
    # a point exactly on the hyperplane is not a member
    return Membership.INLIER if decision_function(model, x) > 0 else Membership.OUTLIER


def predict_batch(model: OneClassSvmModel, X: np.ndarray, threads: int = 1) -> np.ndarray:
    return (model.decision_values(X, threads) > 0).astype(np.int64)


def detect_rate(model: OneClassSvmModel, X_attack: np.ndarray, threads: int = 1) -> float:
    """Fraction of rows predicted outside the benign region (SVM output 0)."""
    X_attack = np.asarray(X_attack, dtype=np.float64)
    if X_attack.ndim != 2 or X_attack.shape[0] == 0:
        raise ValueError("Cannot compute a detection rate over no rows")
    return float(np.count_nonzero(predict_batch(model, X_attack, threads) == 0)) / len(
        X_attack
    )
