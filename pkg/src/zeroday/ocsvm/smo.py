from __future__ import annotations

import logging
import math

import numpy as np
from attrs import define, field

from zeroday.dataset.labeled import array_fingerprint
from zeroday.errors import ConvergenceError
from zeroday.ocsvm.kernel import KernelRows, KernelSpec
from zeroday.ocsvm.model import OneClassSvmModel

logger = logging.getLogger(__name__)


def _positive(_, attribute, value):
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value}")


@define(frozen=True)
class SmoConfig:
    """Stopping rule and kernel storage for the pairwise dual solver.

    The solver stops once no pair violates the KKT conditions by more than
    `tolerance`, or after `max_passes * n` pair updates.
    """

    tolerance: float = field(default=1e-4, validator=_positive)
    max_passes: int = field(default=100, validator=_positive)
    seed: int = field(default=0)
    dense_limit: int = field(default=20_000, validator=_positive)
    cache_rows: int = field(default=4096, validator=_positive)


def _initial_alphas(n: int, upper: float, order: np.ndarray) -> np.ndarray:
    # fill the first floor(1 / upper) points (in scan order) to the bound
    alphas = np.zeros(n)
    full = min(math.floor(1.0 / upper), n)
    alphas[order[:full]] = upper
    remainder = 1.0 - full * upper
    if remainder > 1e-12 and full < n:
        alphas[order[full]] = remainder
    return alphas


def _rho(gradient: np.ndarray, alphas: np.ndarray, upper: float) -> float:
    free = (alphas > 0) & (alphas < upper)
    if free.any():
        return float(gradient[free].mean())
    at_bound = gradient[alphas >= upper]
    at_zero = gradient[alphas <= 0]
    if at_bound.size and at_zero.size:
        return float((at_bound.max() + at_zero.min()) / 2)
    return float(at_bound.max() if at_bound.size else at_zero.min())


def fit(
    X_benign: np.ndarray,
    nu: float,
    kernel: KernelSpec | None = None,
    cfg: SmoConfig | None = None,
) -> OneClassSvmModel:
    """Solve the one-class dual by maximal-violating-pair updates.

    minimise 1/2 a'Ka  subject to  0 <= a_i <= 1/(nu n),  sum(a) = 1

    Ties between equally violating points are broken by a seeded scan order.
    """
    kernel = kernel or KernelSpec()
    cfg = cfg or SmoConfig()
    X = np.asarray(X_benign, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("One-Class SVM needs at least 2 training rows")
    if not 0 < nu <= 1:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")

    n = X.shape[0]
    kernel = kernel.resolve(X)
    upper = 1.0 / (nu * n)
    rows = KernelRows(X, kernel.gamma, cfg.dense_limit, cfg.cache_rows)
    order = np.random.default_rng(cfg.seed).permutation(n)

    alphas = _initial_alphas(n, upper, order)
    gradient = rows.matvec(alphas)

    max_updates = cfg.max_passes * n
    violation = math.inf
    updates = 0
    while updates < max_updates:
        scanned = gradient[order]
        can_rise = alphas[order] < upper
        can_fall = alphas[order] > 0
        i = order[np.argmin(np.where(can_rise, scanned, np.inf))]
        j = order[np.argmax(np.where(can_fall, scanned, -np.inf))]
        violation = gradient[j] - gradient[i]
        if violation < cfg.tolerance:
            break

        k_i, k_j = rows.row(int(i)), rows.row(int(j))
        curvature = max(k_i[i] + k_j[j] - 2.0 * k_i[j], 1e-12)
        step = min(violation / curvature, upper - alphas[i], alphas[j])
        alphas[i] = upper if step == upper - alphas[i] else alphas[i] + step
        alphas[j] = 0.0 if step == alphas[j] else alphas[j] - step
        gradient += step * (k_i - k_j)
        updates += 1
    else:
        logger.warning(
            "SMO stopped after %d updates with KKT violation %.3g", updates, violation
        )
        raise ConvergenceError(float(violation), updates, nu)

    # drop accumulated drift before placing the hyperplane
    gradient = rows.matvec(alphas)
    rho = _rho(gradient, alphas, upper)
    support = np.flatnonzero(alphas > 0)
    logger.info(
        "One-Class SVM nu=%g: %d of %d support vectors after %d updates (gamma %.4g)",
        nu,
        support.size,
        n,
        updates,
        kernel.gamma,
    )
    return OneClassSvmModel(
        X[support].copy(),
        alphas[support].copy(),
        rho,
        nu,
        kernel,
        n,
        cfg.tolerance,
        array_fingerprint(X),
    )
