"""Deterministic linear SVM solver shared by the concept and ranking models.

Minimizes the L1-hinge primal

    J(w) = 1/2 ||w||^2 + C * sum_i max(0, 1 - y_i * w.x_i)

via dual coordinate descent (one dual variable per sample, closed-form
single-variable updates, cyclic order). The dual is a box-constrained QP
whose optimum is the primal optimum, so for the small dense problems handled
here the solver converges to machine precision; no randomness is involved,
making retraining bit-reproducible. A bias term, when needed, is the
caller's business: append a constant-1 feature, which regularizes the bias
along with the weights.
"""

from __future__ import annotations

import numpy as np


def hinge_objective(w: np.ndarray, X: np.ndarray, y: np.ndarray, C: float) -> float:
    """Primal objective 1/2 ||w||^2 + C sum max(0, 1 - y w.x)."""
    w = np.asarray(w, dtype=np.float64)
    margins = 1.0 - np.asarray(y, dtype=np.float64) * (np.asarray(X, dtype=np.float64) @ w)
    return 0.5 * float(w @ w) + C * float(np.clip(margins, 0.0, None).sum())


def train_linear_svm(
    X: np.ndarray,
    y: np.ndarray,
    C: float,
    *,
    tol: float = 1e-12,
    max_sweeps: int = 20000,
) -> np.ndarray:
    """Fit w for the hinge primal above. Deterministic; no intercept.

    ``X`` is (n, d), ``y`` in {-1, +1}. Stops when the largest projected
    dual gradient over a sweep drops below ``tol``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, _ = X.shape
    if n == 0:
        raise ValueError("empty training set")
    if not np.all(np.abs(y) == 1.0):
        raise ValueError("labels must be -1 or +1")

    alpha = np.zeros(n)
    w = np.zeros(X.shape[1])
    q = np.einsum("ij,ij->i", X, X)  # diagonal of the Gram matrix
    for _ in range(max_sweeps):
        worst = 0.0
        for i in range(n):
            g = y[i] * float(X[i] @ w) - 1.0
            a = alpha[i]
            if a <= 0.0:
                pg = min(g, 0.0)
            elif a >= C:
                pg = max(g, 0.0)
            else:
                pg = g
            if pg != 0.0:
                worst = max(worst, abs(pg))
                if q[i] > 0.0:
                    a_new = min(max(a - g / q[i], 0.0), C)
                else:
                    # Zero sample never produces a margin; its dual variable
                    # saturates and contributes nothing to w.
                    a_new = C if g < 0.0 else 0.0
                if a_new != a:
                    w += (a_new - a) * y[i] * X[i]
                    alpha[i] = a_new
        if worst < tol:
            break
    # Rebuild w from the duals in one pass to shed accumulated update error.
    return X.T @ (alpha * y)
