"""Bounded positive semi-definite kernels, Gram matrices and Gram centering.

Every shipped kernel family is bounded by 1, so ``sup|K| <= 1`` holds by
construction. Points are dense real vectors; a 1-D input of length ``n`` is
read as ``n`` scalar points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ._errors import InputError

FAMILIES = ("gaussian-rbf", "laplacian", "rational-quadratic")
_ALIASES = {"gaussian": "gaussian-rbf", "rbf": "gaussian-rbf", "rq": "rational-quadratic"}


@dataclass(frozen=True)
class KernelSpec:
    """A bounded kernel on real vectors.

    Attributes:
        family: One of ``gaussian-rbf`` (``exp(-gamma*|x-y|^2)``),
            ``laplacian`` (``exp(-gamma*|x-y|)``) or ``rational-quadratic``
            (``(1 + gamma*|x-y|^2/alpha)^(-alpha)``).
        gamma: Positive bandwidth parameter.
        alpha: Shape parameter, only used by the rational-quadratic family.
    """

    family: str = "gaussian-rbf"
    gamma: float = 2.0
    alpha: float = 1.0

    def __post_init__(self):
        family = _ALIASES.get(self.family, self.family)
        if family not in FAMILIES:
            raise InputError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", family)
        if not (np.isfinite(self.gamma) and self.gamma > 0):
            raise InputError(f"kernel bandwidth must be positive, got {self.gamma}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise InputError(f"rational-quadratic alpha must be positive, got {self.alpha}")

    @property
    def sup_bound(self) -> float:
        return 1.0

    def from_sqdist(self, d2: np.ndarray) -> np.ndarray:
        """Apply the kernel profile to squared Euclidean distances."""
        if self.family == "gaussian-rbf":
            return np.exp(-self.gamma * d2)
        if self.family == "laplacian":
            return np.exp(-self.gamma * np.sqrt(d2))
        return (1.0 + self.gamma * d2 / self.alpha) ** (-self.alpha)

    def __call__(self, x, y) -> float:
        return eval_kernel(self, x, y)


def as_points(xs, name: str = "points") -> np.ndarray:
    """Coerce ``xs`` to a finite ``(n, d)`` float array."""
    arr = np.asarray(xs, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr[:, None]
    elif arr.ndim != 2:
        raise InputError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise InputError(f"{name} is empty")
    if arr.shape[1] == 0:
        raise InputError(f"{name} has zero-dimensional points")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains NaN or infinite coordinates")
    return arr


def _as_point(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim > 1:
        raise InputError(f"{name} must be a scalar or a 1-D vector, got shape {arr.shape}")
    return as_points(arr.reshape(1, -1), name)


def eval_kernel(kernel: KernelSpec, x, y) -> float:
    """Evaluate ``K(x, y)`` for two single points."""
    xp = _as_point(x, "x")
    yp = _as_point(y, "y")
    if xp.shape[1] != yp.shape[1]:
        raise InputError(f"dimension mismatch: {xp.shape[1]} vs {yp.shape[1]}")
    d2 = float(np.sum((xp[0] - yp[0]) ** 2))
    return float(kernel.from_sqdist(np.asarray(d2)))


def gram(kernel: KernelSpec, xs, ys=None) -> np.ndarray:
    """Kernel matrix with entry ``(i, r) = K(xs[i], ys[r])``.

    When ``ys`` is omitted the symmetric Gram matrix of ``xs`` is returned,
    with an exactly symmetric result.
    """
    x = as_points(xs, "xs")
    if ys is None:
        d2 = cdist(x, x, "sqeuclidean")
        d2 = 0.5 * (d2 + d2.T)
        np.fill_diagonal(d2, 0.0)
        return kernel.from_sqdist(d2)
    y = as_points(ys, "ys")
    if x.shape[1] != y.shape[1]:
        raise InputError(f"dimension mismatch: {x.shape[1]} vs {y.shape[1]}")
    return kernel.from_sqdist(cdist(x, y, "sqeuclidean"))


def center_gram(g) -> np.ndarray:
    """Double-center a square matrix, ``H G H`` with ``H = I - 11'/n``.

    This is the empirical counterpart of the centered kernel
    ``K(x,y) - E K(X,x) - E K(X,y) + E K(X,X')``.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise InputError(f"center_gram needs a square matrix, got shape {g.shape}")
    row = g.mean(axis=1, keepdims=True)
    col = g.mean(axis=0, keepdims=True)
    out = g - row - col + g.mean()
    if np.array_equal(g, g.T):
        out = 0.5 * (out + out.T)
    return out


def psd_tolerance(n: int) -> float:
    """Allowed negative eigenvalue of an ``n x n`` Gram matrix."""
    return 1e-8 * n


def center_tolerance(g: np.ndarray) -> float:
    """Allowed residual row sum after centering ``g``."""
    g = np.asarray(g)
    return 1e-10 * g.shape[0] * max(float(np.max(np.abs(g))), 1.0)


def median_heuristic(pooled) -> float:
    """Gaussian bandwidth ``1 / (2 * median^2)`` of pooled pairwise distances.

    Falls back to 1.0 when fewer than two distinct points are available.
    """
    x = as_points(pooled, "pooled")
    if x.shape[0] < 2:
        return 1.0
    med = float(np.median(pdist(x)))
    if med <= 0.0:
        return 1.0
    return 1.0 / (2.0 * med * med)


def mean_embedding(kernel: KernelSpec, sample) -> Callable[[object], np.ndarray]:
    """Empirical mean element ``t -> (1/n) sum_i K(X_i, t)`` of ``sample``."""
    x = as_points(sample, "sample")

    def m_hat(t) -> np.ndarray:
        return gram(kernel, x, t).mean(axis=0)

    return m_hat


def embedding_inner(kernel: KernelSpec, xs, ys) -> float:
    """RKHS inner product of the empirical mean elements of ``xs`` and ``ys``."""
    return float(gram(kernel, xs, ys).mean())
