"""Dense projected-gradient solver for small one-class duals; used to check fit()."""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from zeroday.ocsvm.kernel import rbf_matrix

REFERENCE_LIMIT = 200


def project_capped_simplex(v: np.ndarray, upper: float) -> np.ndarray:
    """Euclidean projection onto {0 <= a_i <= upper, sum(a) = 1}."""

    def excess(tau: float) -> float:
        return float(np.clip(v - tau, 0.0, upper).sum() - 1.0)

    lo, hi = float(v.min()) - 1.0, float(v.max())
    if excess(lo) <= 0:
        return np.clip(v - lo, 0.0, upper)
    tau = brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    return np.clip(v - tau, 0.0, upper)


def solve_dual_reference(
    X: np.ndarray, nu: float, gamma: float, tolerance: float = 1e-8, max_iter: int = 50_000
) -> tuple[np.ndarray, float]:
    """Accelerated projected gradient on the one-class dual; returns (alphas, objective)."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if n > REFERENCE_LIMIT:
        raise ValueError(f"Reference solver is limited to {REFERENCE_LIMIT} rows")
    if not 0 < nu <= 1:
        raise ValueError(f"nu must lie in (0, 1], got {nu}")

    K = rbf_matrix(X, X, gamma)
    upper = 1.0 / (nu * n)
    step = 1.0 / max(float(np.linalg.eigvalsh(K).max()), 1e-12)

    alphas = np.full(n, 1.0 / n)
    momentum, t = alphas.copy(), 1.0
    for _ in range(max_iter):
        updated = project_capped_simplex(momentum - step * (K @ momentum), upper)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t**2)) / 2.0
        momentum = updated + ((t - 1.0) / t_next) * (updated - alphas)
        change = float(np.abs(updated - alphas).max())
        alphas, t = updated, t_next
        if change < tolerance:
            break
    return alphas, float(0.5 * alphas @ K @ alphas)
