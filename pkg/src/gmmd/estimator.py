"""Unbiased pairwise MMD^2 estimates and the k-sample GMMD statistic.

For groups ``j`` and ``l`` the unbiased estimate is

    Gamma_jl = mean_{i != r} K(X_i^j, X_r^j) + mean_{i != r} K(X_i^l, X_r^l)
               - 2 mean_{i, r} K(X_i^j, X_r^l)

and the test statistic is ``T_n = sum_j sum_{l != j} P_l Gamma_jl`` with
``P_l = n_l / n``. Every routine here reduces to sums over Gram blocks, so
the statistic for many relabelings of one pooled sample can be evaluated
from a single pooled Gram matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from ._errors import InputError
from .kernel import KernelSpec, as_points, gram


@dataclass(frozen=True, eq=False)
class GroupedSamples:
    """``k >= 2`` samples of points sharing one dimension, each of size >= 2."""

    groups: tuple[np.ndarray, ...]

    def __init__(self, groups: Sequence, min_size: int = 2):
        arrays = tuple(as_points(g, f"group {j}") for j, g in enumerate(groups))
        if len(arrays) < 2:
            raise InputError(f"need at least 2 groups, got {len(arrays)}")
        dims = {a.shape[1] for a in arrays}
        if len(dims) != 1:
            raise InputError(f"groups have mixed point dimensions {sorted(dims)}")
        for j, a in enumerate(arrays):
            if a.shape[0] < min_size:
                raise InputError(f"group {j} has {a.shape[0]} points; at least {min_size} required")
        object.__setattr__(self, "groups", arrays)

    @classmethod
    def from_labels(cls, values, labels) -> "GroupedSamples":
        """Split pooled ``values`` by ``labels`` (groups in first-appearance order)."""
        x = as_points(values, "values")
        labels = list(labels)
        if len(labels) != x.shape[0]:
            raise InputError(f"{x.shape[0]} values but {len(labels)} labels")
        order = list(dict.fromkeys(labels))
        lab = np.array([order.index(v) for v in labels])
        return cls([x[lab == j] for j in range(len(order))])

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def dim(self) -> int:
        return self.groups[0].shape[1]

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.array([g.shape[0] for g in self.groups], dtype=np.int64)

    @property
    def n(self) -> int:
        return int(self.sizes.sum())

    @property
    def weights(self) -> np.ndarray:
        return self.sizes / self.n

    @cached_property
    def pooled(self) -> np.ndarray:
        return np.vstack(self.groups)

    @cached_property
    def labels(self) -> np.ndarray:
        return np.repeat(np.arange(self.k), self.sizes)

    @cached_property
    def canonical_pooled(self) -> np.ndarray:
        """Pooled points with each group sorted lexicographically.

        Statistics computed from this ordering do not depend on the order of
        points inside a group, down to the last bit.
        """
        return np.vstack([g[np.lexsort(g.T[::-1])] for g in self.groups])


@dataclass(frozen=True)
class PairwiseMMDMatrix:
    """Symmetric ``k x k`` matrix of Gamma_jl; the diagonal is undefined and stored as 0."""

    entries: np.ndarray
    kernel: KernelSpec

    def __getitem__(self, idx):
        return self.entries[idx]


@dataclass(frozen=True)
class TestStatistic:
    t_hat: float
    scaled: float
    n: int
    k: int

    __test__ = False


def block_sums(g: np.ndarray, labels: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Gram block sums for a batch of labelings.

    Args:
        g: Pooled ``(n, n)`` Gram matrix.
        labels: ``(B, n)`` integer group labels; ``-1`` excludes a point.
        k: Number of groups.

    Returns:
        ``(B, k, k)`` block sums and ``(B, k)`` per-group sums of the Gram
        diagonal.
    """
    labels = np.atleast_2d(labels)
    onehot = (labels[:, :, None] == np.arange(k)).astype(float)  # (B, n, k)
    b, n, _ = onehot.shape
    ga = (g @ onehot.transpose(1, 0, 2).reshape(n, b * k)).reshape(n, b, k)
    sums = np.einsum("bnj,nbl->bjl", onehot, ga)
    diag = np.einsum("n,bnj->bj", np.diag(g), onehot)
    return sums, diag


def gamma_from_blocks(sums: np.ndarray, diag: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """Pairwise unbiased MMD^2 from block sums; ``(B, k, k)``, zero diagonal."""
    sizes = np.asarray(sizes, dtype=float)
    k = sizes.shape[0]
    within = (np.diagonal(sums, axis1=1, axis2=2) - diag) / (sizes * (sizes - 1.0))
    out = np.zeros_like(sums)
    for j in range(k):
        for l in range(j + 1, k):
            v = within[:, j] + within[:, l] - 2.0 * sums[:, j, l] / (sizes[j] * sizes[l])
            out[:, j, l] = v
            out[:, l, j] = v
    return out


def statistic_from_gamma(gamma: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """``T_n`` for each matrix in a ``(B, k, k)`` batch.

    The ordered double sum is folded over unordered pairs,
    ``sum_{j<l} (n_j + n_l)/n * Gamma_jl``, so that the two-group case
    returns ``Gamma_12`` exactly.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    n = int(sizes.sum())
    k = sizes.shape[0]
    t = np.zeros(gamma.shape[0])
    for j in range(k):
        for l in range(j + 1, k):
            t = t + (int(sizes[j] + sizes[l]) / n) * gamma[:, j, l]
    return t


def _pooled_gamma(kernel: KernelSpec, data: GroupedSamples) -> np.ndarray:
    g = gram(kernel, data.canonical_pooled)
    sums, diag = block_sums(g, data.labels, data.k)
    return gamma_from_blocks(sums, diag, data.sizes)[0]


def mmd2_unbiased(kernel: KernelSpec, sample_j, sample_l) -> float:
    """Unbiased estimate of MMD^2 between two samples; may be negative."""
    data = GroupedSamples([sample_j, sample_l])
    return float(_pooled_gamma(kernel, data)[0, 1])


def pairwise_mmd(kernel: KernelSpec, data: GroupedSamples) -> PairwiseMMDMatrix:
    return PairwiseMMDMatrix(_pooled_gamma(kernel, data), kernel)


def gmmd_statistic(kernel: KernelSpec, data: GroupedSamples) -> TestStatistic:
    """GMMD statistic ``T_n`` and its scaled form ``n * T_n``."""
    gamma = _pooled_gamma(kernel, data)
    t_hat = float(statistic_from_gamma(gamma[None], data.sizes)[0])
    return TestStatistic(t_hat=t_hat, scaled=data.n * t_hat, n=data.n, k=data.k)


def gmmd_population(gamma: np.ndarray, weights) -> float:
    """Weighted GMMD^2 for a matrix of (population) squared MMDs and arbitrary weights.

    ``weights`` must lie in (0, 1) and sum to one. This is a calculator for
    the population quantity; the test path always uses ``P_l = n_l / n``.
    """
    gamma = np.asarray(gamma, dtype=float)
    w = np.asarray(weights, dtype=float)
    k = w.shape[0]
    if gamma.shape != (k, k):
        raise InputError(f"gamma must be {k}x{k}, got {gamma.shape}")
    if np.any(w <= 0) or np.any(w >= 1) or abs(w.sum() - 1.0) > 1e-12:
        raise InputError("weights must lie in (0, 1) and sum to 1")
    off = ~np.eye(k, dtype=bool)
    return float(np.sum((gamma * w[None, :])[off]))
