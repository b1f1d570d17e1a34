"""Semblance kernel: per-feature empirical similarity and Gram assembly.

For one feature with observed values ``N_1..N_n`` the similarity of two
values ``x`` and ``y`` is the fraction of observations falling strictly
outside ``[min(x, y), max(x, y)]``::

    k(x, y) = (#{i : N_i < min(x, y)} + #{i : N_i > max(x, y)}) / n

The Gram entry is the (optionally weighted) mean of ``k`` over features.

Everything is computed from integer counts. Because the strictly-below count
is nondecreasing in the value and the strictly-above count nonincreasing, the
count for a pair of objects ``i, j`` is simply::

    min(below[i], below[j]) + min(above[i], above[j])

which turns each feature into two ``np.minimum.outer`` calls. Division by
``n`` and by the weight total happens once per entry, so the fast path and
the brute-force oracle agree bit for bit.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import as_data_matrix, check_finite
from .errors import DataError

KERNEL_IDS = (
    "semblance",
    "pearson",
    "spearman",
    "gaussian",
    "laplacian",
    "linear",
    "polynomial",
    "euclidean_distance",
)


@dataclass(frozen=True)
class GramMatrix:
    """Symmetric n x n proximity matrix with provenance.

    ``kernel_id`` is ``euclidean_distance`` for the one comparator that is a
    distance rather than a similarity; see :attr:`is_distance`.
    """

    entries: np.ndarray
    kernel_id: str
    params: dict = field(default_factory=dict)
    weights: Optional[np.ndarray] = None
    labels: Optional[tuple] = None

    def __post_init__(self):
        if self.kernel_id not in KERNEL_IDS:
            raise ValueError(f"unknown kernel id {self.kernel_id!r}")
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DataError(f"Gram matrix must be square, got shape {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def is_distance(self) -> bool:
        return self.kernel_id == "euclidean_distance"

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)


class FeatureIndex:
    """Sorted copy of one feature column answering strict tail counts.

    Immutable after construction, so one index can be shared by any number
    of worker threads.
    """

    __slots__ = ("sorted_values", "row_below", "row_above")

    def __init__(self, column):
        column = np.asarray(column, dtype=np.float64)
        if column.ndim != 1 or column.size < 1:
            raise DataError("feature column must be a non-empty 1-D array")
        check_finite(column, "feature column")
        sorted_values = np.sort(column, kind="stable")
        sorted_values.setflags(write=False)
        self.sorted_values = sorted_values
        # counts for the column's own rows, in row order
        below, above = self.counts(column)
        below.setflags(write=False)
        above.setflags(write=False)
        self.row_below = below
        self.row_above = above

    @property
    def n(self) -> int:
        return self.sorted_values.size

    def below_count(self, value) -> np.ndarray | int:
        """Number of indexed values strictly less than ``value``."""
        out = np.searchsorted(self.sorted_values, value, side="left")
        return int(out) if np.ndim(out) == 0 else out

    def above_count(self, value) -> np.ndarray | int:
        """Number of indexed values strictly greater than ``value``."""
        out = self.n - np.searchsorted(self.sorted_values, value, side="right")
        return int(out) if np.ndim(out) == 0 else out

    def counts(self, values) -> tuple[np.ndarray, np.ndarray]:
        values = np.asarray(values, dtype=np.float64)
        below = np.searchsorted(self.sorted_values, values, side="left")
        above = self.n - np.searchsorted(self.sorted_values, values, side="right")
        return below.astype(np.int64), above.astype(np.int64)

    def multiplicity(self, value) -> int:
        return self.n - self.below_count(value) - self.above_count(value)


def build_feature_index(column) -> FeatureIndex:
    return FeatureIndex(column)


def semblance_feature_similarity(index: FeatureIndex, x: float, y: float) -> float:
    """Fraction of the indexed values strictly outside ``[min(x,y), max(x,y)]``."""
    lo, hi = (x, y) if x <= y else (y, x)
    return (index.below_count(lo) + index.above_count(hi)) / index.n


def _normalize_weights(weights, G: int) -> Optional[np.ndarray]:
    if weights is None:
        return None
    w = np.asarray(weights, dtype=np.float64).ravel()
    if w.size != G:
        raise DataError(f"weight vector has length {w.size}, expected {G}")
    if not np.all(np.isfinite(w)) or np.any(w < 0):
        raise DataError("weights must be finite and nonnegative")
    if not np.any(w > 0):
        raise DataError("weights are all zero")
    return w


def _finish(numer: np.ndarray, n: int, G: int, w: Optional[np.ndarray]) -> np.ndarray:
    total = float(G) if w is None else float(w.sum())
    return numer / (n * total)


def _accumulate_rows(rows: slice, idx_below, idx_above, col_below, col_above, w):
    """Numerator of the Gram for a tile of rows against all columns.

    ``idx_*`` are (G, m) counts for the tile's objects, ``col_*`` (G, n) for
    the column objects. Features are accumulated in index order.
    """
    G = col_below.shape[0]
    m = rows.stop - rows.start
    n = col_below.shape[1]
    tmp = np.empty((m, n), dtype=np.int64)
    cnt = np.empty((m, n), dtype=np.int64)
    if w is None:
        acc = np.zeros((m, n), dtype=np.int64)
    else:
        acc = np.zeros((m, n), dtype=np.float64)
    for g in range(G):
        b = idx_below[g, rows]
        a = idx_above[g, rows]
        np.minimum(b[:, None], col_below[g][None, :], out=cnt)
        np.minimum(a[:, None], col_above[g][None, :], out=tmp)
        cnt += tmp
        if w is None:
            acc += cnt
        else:
            acc += w[g] * cnt
    return acc


def _tiles(m: int, threads: int) -> list[slice]:
    threads = max(1, min(threads, m))
    edges = np.linspace(0, m, threads + 1).round().astype(int)
    return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _assemble(q_below, q_above, t_below, t_above, w, threads: int) -> np.ndarray:
    m = q_below.shape[1]
    n = t_below.shape[1]
    dtype = np.int64 if w is None else np.float64
    out = np.empty((m, n), dtype=dtype)
    tiles = _tiles(m, threads)
    if len(tiles) <= 1:
        if m:
            out[:] = _accumulate_rows(slice(0, m), q_below, q_above, t_below, t_above, w)
        return out
    with ThreadPoolExecutor(max_workers=len(tiles)) as pool:
        futures = {
            pool.submit(_accumulate_rows, t, q_below, q_above, t_below, t_above, w): t
            for t in tiles
        }
        for fut, t in futures.items():
            out[t] = fut.result()
    return out


class SemblanceKernel:
    """Feature indexes for a training matrix, plus Gram and cross-Gram.

    Out-of-sample evaluation counts against the training values only.
    """

    kernel_id = "semblance"

    def __init__(self, data, weights=None, threads: int = 1):
        data = as_data_matrix(data)
        self.data = data
        self.weights = _normalize_weights(weights, data.G)
        self.threads = threads
        self.indexes = [FeatureIndex(data.values[:, g]) for g in range(data.G)]
        self._below = np.stack([ix.row_below for ix in self.indexes])
        self._above = np.stack([ix.row_above for ix in self.indexes])

    @property
    def params(self) -> dict:
        return {}

    def gram(self) -> GramMatrix:
        n, G = self.data.n, self.data.G
        numer = _assemble(self._below, self._above, self._below, self._above,
                          self.weights, self.threads)
        entries = _finish(numer, n, G, self.weights)
        return GramMatrix(entries, "semblance", {}, self.weights, self.data.object_names)

    def cross(self, queries) -> np.ndarray:
        """m x n matrix of query-vs-training similarities."""
        q = np.asarray(queries, dtype=np.float64)
        G = self.data.G
        if q.ndim == 1 and q.size == 0:
            q = q.reshape(0, G)
        if q.ndim == 1:
            q = q[None, :]
        if q.ndim != 2 or q.shape[1] != G:
            raise DataError(f"queries have {q.shape[-1]} columns, training data has {G}")
        check_finite(q, "queries")
        m = q.shape[0]
        q_below = np.empty((G, m), dtype=np.int64)
        q_above = np.empty((G, m), dtype=np.int64)
        for g, ix in enumerate(self.indexes):
            q_below[g], q_above[g] = ix.counts(q[:, g])
        numer = _assemble(q_below, q_above, self._below, self._above,
                          self.weights, self.threads)
        return _finish(numer, self.data.n, G, self.weights)


def semblance_gram(data, weights=None, threads: int = 1) -> GramMatrix:
    """Semblance Gram matrix via per-feature tail counts.

    Cost is O(G n log n) for the indexes plus O(G n^2) for assembly. Row
    tiles are distributed over ``threads`` workers; every tile sums features
    in the same order, so the result does not depend on the thread count.
    """
    return SemblanceKernel(data, weights, threads).gram()


def semblance_cross_gram(train, queries, weights=None, threads: int = 1) -> np.ndarray:
    return SemblanceKernel(train, weights, threads).cross(queries)


def semblance_gram_naive(data, weights=None) -> GramMatrix:
    """Reference implementation that counts the indicator sum for every pair.

    O(G n^3); intended for small inputs in tests.
    """
    data = as_data_matrix(data)
    X = data.values
    n, G = X.shape
    w = _normalize_weights(weights, G)
    acc = np.zeros((n, n), dtype=np.int64 if w is None else np.float64)
    for g in range(G):
        col = X[:, g]
        lo = np.minimum(col[:, None], col[None, :])
        hi = np.maximum(col[:, None], col[None, :])
        inside = (lo[:, :, None] <= col[None, None, :]) & (col[None, None, :] <= hi[:, :, None])
        cnt = n - inside.sum(axis=2, dtype=np.int64)
        if w is None:
            acc += cnt
        else:
            acc += w[g] * cnt
    return GramMatrix(_finish(acc, n, G, w), "semblance", {}, w, data.object_names)
