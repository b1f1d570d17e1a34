"""Data container for n objects x G features."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataError


def check_finite(values: np.ndarray, what: str = "data") -> None:
    """Raise :class:`DataError` naming the first non-finite cell."""
    bad = ~np.isfinite(values)
    if bad.any():
        idx = np.argwhere(bad)[0]
        if values.ndim == 1:
            raise DataError(f"non-finite value in {what} at row {idx[0]}")
        row, col = idx
        raise DataError(
            f"non-finite value in {what} at row {row}, feature {col}: {values[row, col]!r}"
        )


@dataclass(frozen=True)
class DataMatrix:
    """Real-valued measurements, rows are objects and columns are features.

    Discrete data is represented as reals with ties. Values are copied into a
    read-only float64 array on construction.
    """

    values: np.ndarray
    feature_names: Optional[Sequence[str]] = None
    object_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2:
            raise DataError(f"expected a 2-D matrix, got shape {values.shape}")
        n, G = values.shape
        if n < 1 or G < 1:
            raise DataError(f"data matrix must have n >= 1 and G >= 1, got {n}x{G}")
        check_finite(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != G:
                raise DataError(f"{len(names)} feature names for {G} features")
            object.__setattr__(self, "feature_names", names)
        if self.object_names is not None:
            names = tuple(str(s) for s in self.object_names)
            if len(names) != n:
                raise DataError(f"{len(names)} object names for {n} objects")
            object.__setattr__(self, "object_names", names)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def G(self) -> int:
        return self.values.shape[1]

    def take(self, rows) -> "DataMatrix":
        """Subset of objects, keeping labels aligned."""
        rows = np.asarray(rows, dtype=np.intp)
        names = None
        if self.object_names is not None:
            names = [self.object_names[i] for i in rows]
        return DataMatrix(self.values[rows], self.feature_names, names)


def as_data_matrix(data) -> DataMatrix:
    if isinstance(data, DataMatrix):
        return data
    return DataMatrix(np.asarray(data, dtype=np.float64))
