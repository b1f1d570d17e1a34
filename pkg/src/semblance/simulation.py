"""Two-group simulations and separation statistics.

Objects come from a small group 1 (the first ``n1`` rows) or a large group 2.
A fraction of the features is informative:

* normal model: non-informative N(0, 1); informative N(mu * sigma2, sigma1)
  in group 1 and N(0, sigma2) in group 2 (sigma are standard deviations).
* bernoulli model: non-informative and group-2 informative Bernoulli(r0);
  group-1 informative Bernoulli(r1).

``T1`` and ``T2`` are standardized differences between the mean
within-group entry and the mean cross-group entry of a proximity matrix.
For similarities large positive values mean good separation; for distances
the sign flips (see :func:`oriented`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .comparators import MetricId, pairwise_matrix
from .data import DataMatrix
from .errors import ConfigError, DataError
from .kernel import semblance_gram

SIM_METRICS = ("semblance", "euclidean_distance", "pearson", "spearman")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class TwoGroupConfig:
    n: int = 100
    m: int = 100
    q: float = 0.1
    p: float = 0.1
    model: str = "normal"
    mu: float = 2.0
    sigma1: float = 0.1
    sigma2: float = 0.1
    r0: float = 0.5
    r1: float = 0.05
    seed: int = 0

    @property
    def n1(self) -> int:
        """Group-1 size, ``round(q * n)`` rounding halves up."""
        return _round_half_up(self.q * self.n)

    @property
    def n_informative(self) -> int:
        """``ceil(p * m)``, guarded against float noise such as 0.7 * 100."""
        return int(math.ceil(round(self.p * self.m, 9)))

    def validate(self) -> None:
        if self.model not in ("normal", "bernoulli"):
            raise ConfigError(f"model must be 'normal' or 'bernoulli', got {self.model!r}")
        if not 0 < self.q <= 0.5:
            raise ConfigError(f"q must lie in (0, 0.5], got {self.q}")
        if not 0 < self.p < 1:
            raise ConfigError(f"p must lie in (0, 1), got {self.p}")
        if self.n1 < 2 or self.n - self.n1 < 2:
            raise ConfigError(f"both groups need >= 2 objects (n1={self.n1}, n={self.n})")
        if self.m < 1 or self.n_informative < 1:
            raise ConfigError("need at least one informative feature")
        if self.model == "normal" and not (self.sigma1 > 0 and self.sigma2 > 0):
            raise ConfigError("sigma1 and sigma2 must be > 0")
        if self.model == "bernoulli" and not (0 < self.r0 < 1 and 0 < self.r1 < 1):
            raise ConfigError("r0 and r1 must lie strictly between 0 and 1")


def generate_two_group(config: TwoGroupConfig) -> tuple[DataMatrix, np.ndarray]:
    """Simulate one run; returns the data and labels in {1, 2}."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    n, m, n1, k = config.n, config.m, config.n1, config.n_informative
    n2 = n - n1
    X = np.empty((n, m))
    if config.model == "normal":
        X[:n1, :k] = rng.normal(config.mu * config.sigma2, config.sigma1, size=(n1, k))
        X[n1:, :k] = rng.normal(0.0, config.sigma2, size=(n2, k))
        X[:, k:] = rng.normal(0.0, 1.0, size=(n, m - k))
    else:
        X[:n1, :k] = rng.random((n1, k)) < config.r1
        X[n1:, :k] = rng.random((n2, k)) < config.r0
        X[:, k:] = rng.random((n, m - k)) < config.r0
    labels = np.repeat([1, 2], [n1, n2])
    return DataMatrix(X), labels


@dataclass(frozen=True)
class SeparationStats:
    s11: float
    s22: float
    s12: float
    se1: float
    se2: float
    t1: float
    t2: float


def _standardized(diff: float, se: float) -> float:
    if se > 0:
        return diff / se
    if diff == 0:
        return 0.0
    return math.copysign(math.inf, diff)


def separation_stats(matrix, labels) -> SeparationStats:
    """Within- vs cross-group means of a proximity matrix.

    Means run over unordered within-group pairs and all cross pairs. The
    standard error of each difference treats the entries as independent,
    which ignores that pairs share objects.
    """
    S = np.asarray(matrix, dtype=np.float64)
    labels = np.asarray(labels)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] != labels.size:
        raise DataError("matrix must be square with one label per object")
    g1 = np.flatnonzero(labels == 1)
    g2 = np.flatnonzero(labels == 2)
    if g1.size < 2 or g2.size < 2:
        raise DataError(f"each group needs >= 2 members (got {g1.size} and {g2.size})")
    if g1.size + g2.size != labels.size:
        raise DataError("labels must be 1 or 2")

    def within(idx):
        sub = S[np.ix_(idx, idx)]
        return sub[np.triu_indices(idx.size, 1)]

    e11, e22 = within(g1), within(g2)
    e12 = S[np.ix_(g1, g2)].ravel()
    v11, v22, v12 = (e.var(ddof=1) if e.size > 1 else 0.0 for e in (e11, e22, e12))
    s11, s22, s12 = e11.mean(), e22.mean(), e12.mean()
    se1 = math.sqrt(v11 / e11.size + v12 / e12.size)
    se2 = math.sqrt(v22 / e22.size + v12 / e12.size)
    return SeparationStats(float(s11), float(s22), float(s12), se1, se2,
                           _standardized(s11 - s12, se1), _standardized(s22 - s12, se2))


def oriented(value: float, metric: str) -> float:
    """Flip the sign for distances so that larger always means better separated."""
    return -value if metric == "euclidean_distance" else value


def proximity(data: DataMatrix, metric: str) -> np.ndarray:
    if metric == "semblance":
        return semblance_gram(data).entries
    return pairwise_matrix(data, MetricId(metric)).entries


def replicate_stats(config: TwoGroupConfig, metrics: Sequence[str] = SIM_METRICS
                    ) -> dict[str, SeparationStats]:
    data, labels = generate_two_group(config)
    return {metric: separation_stats(proximity(data, metric), labels) for metric in metrics}


def _finite_median(values: Sequence[float]) -> float:
    vals = [v for v in values if math.isfinite(v)]
    return float(np.median(vals)) if vals else math.nan


@dataclass
class SweepResult:
    """Median T1/T2 per grid cell and metric.

    ``cells[(i, j)][metric]`` is ``(T1, T2)`` for ``axes[0]`` value ``i`` and
    ``axes[1]`` value ``j``; ``raw`` keeps the per-replicate statistics.
    """

    axes: tuple[tuple[str, tuple], tuple[str, tuple]]
    metrics: tuple[str, ...]
    replicates: int
    seeds: list[int]
    cells: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def rows(self):
        """Long-format records ``(axis1, axis2, metric, statistic, value, replicates)``."""
        (_, v1), (_, v2) = self.axes
        for i, a in enumerate(v1):
            for j, b in enumerate(v2):
                for metric in self.metrics:
                    t1, t2 = self.cells[(i, j)][metric]
                    yield a, b, metric, "T1", t1, self.replicates
                    yield a, b, metric, "T2", t2, self.replicates


def run_sweep(grid: Mapping[str, Sequence[float]], base: TwoGroupConfig,
              metrics: Sequence[str] = SIM_METRICS, replicates: int = 1,
              seed: int | None = None) -> SweepResult:
    """Evaluate every metric on a two-axis parameter grid.

    Replicate ``r`` uses seed ``seed + r`` (``seed`` defaults to
    ``base.seed``) at every grid point.
    """
    if len(grid) != 2:
        raise ConfigError(f"grid needs exactly two axes, got {len(grid)}")
    if replicates < 1:
        raise ConfigError("replicates must be >= 1")
    axes = tuple((name, tuple(values)) for name, values in grid.items())
    for name, values in axes:
        if not values:
            raise ConfigError(f"grid axis {name!r} is empty")
        if name not in TwoGroupConfig.__dataclass_fields__ or name in ("model", "seed"):
            raise ConfigError(f"cannot sweep over {name!r}")
    for metric in metrics:
        if metric not in SIM_METRICS:
            raise ConfigError(f"unknown simulation metric {metric!r}")
    base_seed = base.seed if seed is None else seed
    seeds = [base_seed + r for r in range(replicates)]
    result = SweepResult(axes, tuple(metrics), replicates, seeds)
    (name1, values1), (name2, values2) = axes
    int_fields = ("n", "m")
    for i, a in enumerate(values1):
        for j, b in enumerate(values2):
            point = {name1: int(a) if name1 in int_fields else a,
                     name2: int(b) if name2 in int_fields else b}
            reps = [replicate_stats(replace(base, seed=s, **point), metrics) for s in seeds]
            result.raw[(i, j)] = reps
            result.cells[(i, j)] = {
                metric: (_finite_median([r[metric].t1 for r in reps]),
                         _finite_median([r[metric].t2 for r in reps]))
                for metric in metrics
            }
    return result
