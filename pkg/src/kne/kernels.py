"""Similarity kernels on embedding vectors and their analytic gradients.

Two families are supported, both functions of the squared distance
r = ||x - y||^2 and both valued in (0, 1]:

* gauss:      k(x, y) = exp(-r / sigma^2)
* schoenberg: k(x, y) = (1 + r)^(-alpha)

The gradient with respect to x factors as c(r) * (x - y); the scalar
coefficient is what the training loop consumes, so evaluation and gradient
share a single squared-distance computation.  Both kernels are smooth at
x = y (gradient exactly zero), so no distance floor is needed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FAMILIES = ("gauss", "sch")

# Integer tags used by the compiled training loop.
KERNEL_IDS = {"gauss": 0, "sch": 1}


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its scalar parameter (sigma^2 or alpha)."""

    family: str
    param: float

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if not (self.param > 0) or not np.isfinite(self.param):
            raise ValueError(f"kernel parameter must be a positive finite real, got {self.param}")

    @classmethod
    def gauss(cls, sigma2: float) -> "KernelSpec":
        return cls("gauss", float(sigma2))

    @classmethod
    def gauss_from_sigma(cls, sigma: float) -> "KernelSpec":
        """Convenience for configurations quoted as sigma rather than sigma^2."""
        return cls("gauss", float(sigma) * float(sigma))

    @classmethod
    def schoenberg(cls, alpha: float) -> "KernelSpec":
        return cls("sch", float(alpha))

    @property
    def kernel_id(self) -> int:
        return KERNEL_IDS[self.family]

    def describe(self) -> str:
        name = "sigma2" if self.family == "gauss" else "alpha"
        return f"{self.family}({name}={self.param:g})"


def _check_dims(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")


def squared_distance(x, y) -> np.ndarray | float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_dims(x, y)
    d = x - y
    return np.sum(d * d, axis=-1)


def kernel_from_sqdist(spec: KernelSpec, r) -> np.ndarray | float:
    r = np.asarray(r, dtype=np.float64)
    if spec.family == "gauss":
        out = np.exp(-r / spec.param)
    else:
        out = (1.0 + r) ** (-spec.param)
    return out if out.ndim else float(out)


def grad_coefficient(spec: KernelSpec, r, k) -> np.ndarray | float:
    """Scalar c(r) with d/dx k(x, y) = c * (x - y)."""
    if spec.family == "gauss":
        return (-2.0 / spec.param) * k
    return (-2.0 * spec.param) * k / (1.0 + np.asarray(r, dtype=np.float64))


def kernel_eval(spec: KernelSpec, x, y) -> np.ndarray | float:
    """Kernel value(s); inputs broadcast over leading axes."""
    return kernel_from_sqdist(spec, squared_distance(x, y))


def kernel_grad_x(spec: KernelSpec, x, y) -> np.ndarray:
    """Gradient of the kernel with respect to its first argument."""
    _, grad = kernel_eval_and_grad(spec, x, y)
    return grad


def kernel_eval_and_grad(spec: KernelSpec, x, y):
    """Fused value + gradient sharing one squared-distance pass."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _check_dims(x, y)
    diff = x - y
    r = np.sum(diff * diff, axis=-1)
    k = kernel_from_sqdist(spec, r)
    coef = grad_coefficient(spec, r, k)
    grad = np.expand_dims(np.asarray(coef), -1) * diff if diff.ndim > 1 else coef * diff
    return k, grad


def kernel_matrix(spec: KernelSpec, X, Y=None) -> np.ndarray:
    """Pairwise kernel values between the rows of X and Y (default Y=X)."""
    X = np.asarray(X, dtype=np.float64)
    Y = X if Y is None else np.asarray(Y, dtype=np.float64)
    _check_dims(X, Y)
    sq = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(Y * Y, axis=1)[None, :]
        - 2.0 * (X @ Y.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return kernel_from_sqdist(spec, sq)
