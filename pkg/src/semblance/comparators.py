"""Baseline proximity measures: Euclidean distance, row correlations, and
standard kernels.

Pearson and Spearman are computed between object rows (across features),
which is the comparison the two-group simulations need. Spearman ranks
values within each row; Semblance ranks within each feature column.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import rankdata

from .data import as_data_matrix, check_finite
from .errors import ConfigError, DataError
from .kernel import GramMatrix, SemblanceKernel

METRICS = (
    "euclidean_distance",
    "pearson",
    "spearman",
    "gaussian",
    "laplacian",
    "linear",
    "polynomial",
)


@dataclass(frozen=True)
class MetricId:
    """A comparator and its parameters.

    ``sigma=None`` selects the median pairwise distance of the data the
    metric is fitted on.
    """

    tag: str
    sigma: Optional[float] = None
    degree: int = 2
    scale: float = 1.0
    offset: float = 1.0

    def __post_init__(self):
        if self.tag not in METRICS:
            raise ConfigError(f"unknown metric {self.tag!r}; choose from {', '.join(METRICS)}")
        if self.sigma is not None and not self.sigma > 0:
            raise ConfigError(f"sigma must be > 0, got {self.sigma}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ConfigError(f"polynomial degree must be an integer >= 1, got {self.degree}")

    @property
    def is_distance(self) -> bool:
        return self.tag == "euclidean_distance"


def squared_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped at zero."""
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(sq, 0.0, out=sq)
    return sq


def median_heuristic(X: np.ndarray) -> float:
    """Median pairwise Euclidean distance over distinct object pairs.

    Falls back to 1.0 when that median is zero (for example duplicated rows).
    """
    n = X.shape[0]
    if n < 2:
        return 1.0
    iu = np.triu_indices(n, 1)
    d = np.sqrt(squared_distances(X, X)[iu])
    med = float(np.median(d))
    return med if med > 0 else 1.0


def _standardize_rows(X: np.ndarray, what: str) -> np.ndarray:
    Z = X - X.mean(axis=1, keepdims=True)
    norms = np.sqrt((Z * Z).sum(axis=1))
    flat = np.flatnonzero(norms <= 1e-300)
    if flat.size:
        raise DataError(f"{what}: row {flat[0]} has zero variance across features")
    return Z / norms[:, None]


def _rank_rows(X: np.ndarray) -> np.ndarray:
    return rankdata(X, axis=1)


class ComparatorKernel:
    """A comparator fitted on training rows, mirroring :class:`SemblanceKernel`."""

    def __init__(self, data, metric: MetricId):
        data = as_data_matrix(data)
        self.data = data
        self.metric = metric
        X = data.values
        self.sigma = None
        if metric.tag in ("gaussian", "laplacian"):
            self.sigma = metric.sigma if metric.sigma is not None else median_heuristic(X)

    @property
    def kernel_id(self) -> str:
        return self.metric.tag

    @property
    def params(self) -> dict:
        m = self.metric
        if m.tag in ("gaussian", "laplacian"):
            return {"sigma": self.sigma}
        if m.tag == "polynomial":
            return {"degree": m.degree, "scale": m.scale, "offset": m.offset}
        return {}

    def _evaluate(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        tag = self.metric.tag
        if tag == "euclidean_distance":
            return np.sqrt(squared_distances(A, B))
        if tag == "gaussian":
            return np.exp(-squared_distances(A, B) / (2.0 * self.sigma**2))
        if tag == "laplacian":
            return np.exp(-np.sqrt(squared_distances(A, B)) / self.sigma)
        if tag == "linear":
            return A @ B.T
        if tag == "polynomial":
            m = self.metric
            return (m.scale * (A @ B.T) + m.offset) ** int(m.degree)
        if tag == "pearson":
            out = _standardize_rows(A, "pearson") @ _standardize_rows(B, "pearson").T
            return np.clip(out, -1.0, 1.0)
        if tag == "spearman":
            RA = _standardize_rows(_rank_rows(A), "spearman")
            RB = _standardize_rows(_rank_rows(B), "spearman")
            return np.clip(RA @ RB.T, -1.0, 1.0)
        raise AssertionError(tag)

    def gram(self) -> GramMatrix:
        X = self.data.values
        K = self._evaluate(X, X)
        K = 0.5 * (K + K.T)
        tag = self.metric.tag
        if tag == "euclidean_distance":
            np.fill_diagonal(K, 0.0)
        elif tag in ("gaussian", "laplacian"):
            np.fill_diagonal(K, 1.0)
        return GramMatrix(K, tag, self.params, None, self.data.object_names)

    def cross(self, queries) -> np.ndarray:
        q = np.asarray(queries, dtype=np.float64)
        G = self.data.G
        if q.ndim == 1 and q.size == 0:
            q = q.reshape(0, G)
        if q.ndim == 1:
            q = q[None, :]
        if q.ndim != 2 or q.shape[1] != G:
            raise DataError(f"queries have {q.shape[-1]} columns, training data has {G}")
        check_finite(q, "queries")
        if q.shape[0] == 0:
            return np.zeros((0, self.data.n))
        return self._evaluate(q, self.data.values)


def pairwise_matrix(data, metric: MetricId | str) -> GramMatrix:
    """Similarity (or, for ``euclidean_distance``, distance) matrix between rows."""
    if isinstance(metric, str):
        metric = MetricId(metric)
    return ComparatorKernel(data, metric).gram()


@dataclass(frozen=True)
class KernelSpec:
    """Named kernel choice that can be fitted on any training matrix.

    Used wherever a kernel must be refitted per data split (kPCA, SVM
    cross-validation).
    """

    name: str
    params: dict = field(default_factory=dict)

    def fit(self, data, threads: int = 1):
        if self.name == "semblance":
            return SemblanceKernel(data, self.params.get("weights"), threads)
        return ComparatorKernel(data, MetricId(self.name, **self.params))


def parse_kernel(name: str, sigma=None, degree=2, scale=1.0, offset=1.0) -> KernelSpec:
    """Build a :class:`KernelSpec` from CLI-style arguments."""
    if name == "semblance":
        return KernelSpec("semblance")
    if name == "euclidean":
        name = "euclidean_distance"
    metric = MetricId(name, sigma, degree, scale, offset)  # validates
    params = {}
    if metric.tag in ("gaussian", "laplacian") and sigma is not None:
        params["sigma"] = sigma
    if metric.tag == "polynomial":
        params.update(degree=degree, scale=scale, offset=offset)
    return KernelSpec(metric.tag, params)
