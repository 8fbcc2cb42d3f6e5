"""Gaussian kernel evaluation, Gram matrices, and candidate width grids.

The kernel is fixed to k(x, y) = exp(-||x - y||^2 / (2 s^2)), so the width s
stays in the same units as Euclidean distance in the (standardized) input
space. All downstream width selection treats s as a geometric scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# A kernel width is a plain positive float; helpers below validate it.
KernelWidth = float

# Rows used for the median-distance estimate are capped to keep the
# candidate-grid computation O(500^2) regardless of dataset size.
_MEDIAN_SUBSAMPLE = 500

# Geometric grid spans [lo * D_med, hi * D_med].
_GRID_LO = 0.05
_GRID_HI = 20.0


def check_width(s: float) -> float:
    """Validate a kernel width and return it as a float."""
    s = float(s)
    if not np.isfinite(s) or s <= 0.0:
        raise ValueError(f"kernel width must be a positive finite real, got {s}")
    return s


@dataclass(frozen=True)
class GramMatrix:
    """Dense kernel matrix over one set of rows, tagged with its width."""

    values: np.ndarray
    width: KernelWidth

    @property
    def n(self) -> int:
        return self.values.shape[0]


def squared_distances(X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
    """Pairwise squared Euclidean distances between rows of X and Y (or X)."""
    X = np.asarray(X, dtype=float)
    Y = X if Y is None else np.asarray(Y, dtype=float)
    xx = np.sum(X * X, axis=1)[:, None]
    yy = np.sum(Y * Y, axis=1)[None, :]
    d2 = xx + yy - 2.0 * (X @ Y.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def gaussian(x: np.ndarray, y: np.ndarray, s: KernelWidth) -> float:
    """Gaussian kernel between two vectors: exp(-||x-y||^2 / (2 s^2))."""
    s = check_width(s)
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    d2 = float(np.sum((x - y) ** 2))
    return float(np.exp(-d2 / (2.0 * s * s)))


def kernel_matrix(X: np.ndarray, Y: np.ndarray, s: KernelWidth) -> np.ndarray:
    """Rectangular kernel matrix k(X_i, Y_j); used for decision functions."""
    s = check_width(s)
    return np.exp(squared_distances(X, Y) / (-2.0 * s * s))


def gram_from_sqdist(d2: np.ndarray, s: KernelWidth) -> GramMatrix:
    """Build a GramMatrix from precomputed squared distances.

    Width-selection sweeps call this once per candidate so the O(n^2 d)
    distance work is shared across the grid.
    """
    s = check_width(s)
    values = np.exp(d2 / (-2.0 * s * s))
    return GramMatrix(values=values, width=s)


def gram(X: np.ndarray, s: KernelWidth) -> GramMatrix:
    """Gram matrix of one sample set; symmetric with unit diagonal."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty n x d matrix")
    d2 = squared_distances(X)
    np.fill_diagonal(d2, 0.0)
    return gram_from_sqdist(d2, s)


def median_pairwise_distance(X: np.ndarray) -> float:
    """Median Euclidean distance over row pairs, subsampled for large n."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least 2 rows to compute pairwise distances")
    if n > _MEDIAN_SUBSAMPLE:
        idx = np.linspace(0, n - 1, _MEDIAN_SUBSAMPLE).astype(int)
        X = X[idx]
        n = X.shape[0]
    d2 = squared_distances(X)
    iu = np.triu_indices(n, k=1)
    return float(np.median(np.sqrt(d2[iu])))


def candidate_widths(X: np.ndarray, count: int = 30) -> list[KernelWidth]:
    """Geometric grid of candidate widths around the median pairwise distance.

    Spans [0.05 * D_med, 20 * D_med] with `count` strictly increasing points,
    wide enough to cover both boundary-hugging and over-smoothed regimes.
    A single-point grid degenerates to the geometric midpoint, D_med itself.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    d_med = median_pairwise_distance(X)
    if d_med <= 0.0:
        raise ValueError("all rows identical: median pairwise distance is zero")
    lo, hi = _GRID_LO * d_med, _GRID_HI * d_med
    if count == 1:
        return [float(np.sqrt(lo * hi))]
    return [float(s) for s in np.geomspace(lo, hi, count)]
