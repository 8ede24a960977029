"""One-vs-rest L2-regularized logistic regression.

Deliberately self-contained: full-batch gradient descent with Armijo
backtracking line search, so fits are deterministic functions of the data.
Each binary problem minimizes

    mean_i log(1 + exp(-t_i * (w.x_i + b))) + lam/2 * ||w||^2

with the bias unregularized.  Binary problems (K = 2) fit a single
separator; multi-class predictions take the argmax over per-class scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError


@dataclass
class LabeledDataset:
    features: np.ndarray  # (m, d)
    labels: np.ndarray  # (m,) ints in 0..K-1

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.shape[0]:
            raise DataError("features and labels disagree on the number of rows")

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)


@dataclass
class LogRegModel:
    weights: np.ndarray  # (K, d) per-class weight vectors
    bias: np.ndarray  # (K,)
    classes: np.ndarray  # class ids, row i of weights scores classes[i]
    lam: float
    grad_norms: np.ndarray = field(default=None)  # final gradient norm per fitted problem

    def decision_scores(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return X @ self.weights.T + self.bias

    def predict(self, X) -> np.ndarray:
        scores = self.decision_scores(X)
        return self.classes[np.argmax(scores, axis=1)]

    def predict_proba_binary(self, X) -> np.ndarray:
        """P(label == classes[1]) for binary models."""
        s = self.decision_scores(X)[:, 1]
        return 1.0 / (1.0 + np.exp(-s))


def _binary_objective(X, t, wb, lam):
    # wb = [bias, w...]; t in {-1, +1}
    s = t * (X @ wb[1:] + wb[0])
    loss = float(np.mean(np.logaddexp(0.0, -s)))
    return loss + 0.5 * lam * float(wb[1:] @ wb[1:])


def _binary_gradient(X, t, wb, lam):
    s = t * (X @ wb[1:] + wb[0])
    # d/ds mean log(1+exp(-s)) = -sigmoid(-s)/m per sample, chain through t
    coef = -t / (1.0 + np.exp(s)) / X.shape[0]
    grad = np.empty_like(wb)
    grad[0] = float(coef.sum())
    grad[1:] = X.T @ coef + lam * wb[1:]
    return grad


def _fit_binary(X, y01, lam, iters, tol):
    """Gradient descent with backtracking; returns (bias, w, final grad norm)."""
    wb = np.zeros(X.shape[1] + 1, dtype=np.float64)
    t = np.where(y01 > 0, 1.0, -1.0)
    obj = _binary_objective(X, t, wb, lam)
    step = 1.0
    for _ in range(iters):
        grad = _binary_gradient(X, t, wb, lam)
        gnorm = float(np.linalg.norm(grad))
        if gnorm < tol:
            break
        step = min(step * 2.0, 1e4)  # warm-started, then backtracked
        gsq = gnorm * gnorm
        while True:
            candidate = wb - step * grad
            cand_obj = _binary_objective(X, t, candidate, lam)
            if cand_obj <= obj - 1e-4 * step * gsq:
                break
            step *= 0.5
            if step < 1e-18:
                candidate = wb
                cand_obj = obj
                break
        if candidate is wb:
            break  # no descent step found; numerically converged
        wb = candidate
        obj = cand_obj
    final_norm = float(np.linalg.norm(_binary_gradient(X, t, wb, lam)))
    return wb[0], wb[1:], final_norm


def logreg_fit(data: LabeledDataset, lam: float = 1.0, iters: int = 500, tol: float = 1e-6) -> LogRegModel:
    """Fit one-vs-rest logistic regression; deterministic given the data."""
    classes = data.classes
    if classes.size < 2:
        raise DataError("need at least two classes to fit a classifier")
    X = data.features
    d = X.shape[1]

    if classes.size == 2:
        bias, w, gnorm = _fit_binary(X, (data.labels == classes[1]).astype(np.float64), lam, iters, tol)
        weights = np.vstack([-w, w])
        biases = np.array([-bias, bias])
        norms = np.array([gnorm])
    else:
        weights = np.empty((classes.size, d), dtype=np.float64)
        biases = np.empty(classes.size, dtype=np.float64)
        norms = np.empty(classes.size, dtype=np.float64)
        for i, c in enumerate(classes):
            biases[i], weights[i], norms[i] = _fit_binary(
                X, (data.labels == c).astype(np.float64), lam, iters, tol
            )
    return LogRegModel(weights=weights, bias=biases, classes=classes, lam=lam, grad_norms=norms)
