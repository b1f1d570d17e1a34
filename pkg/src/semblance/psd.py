"""Nonnegative-definiteness checks for Gram matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import check_finite
from .errors import DataError

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    tolerance: float
    is_psd: bool
    n: int

    def line(self) -> str:
        verdict = "PSD" if self.is_psd else "NOT_PSD"
        return (f"min_eigenvalue={self.min_eigenvalue!r} tolerance={self.tolerance!r} "
                f"n={self.n} verdict={verdict}")


def _as_symmetric(matrix) -> np.ndarray:
    A = np.asarray(matrix, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DataError(f"expected a square matrix, got shape {A.shape}")
    check_finite(A, "matrix")
    scale = np.abs(A).max() if A.size else 0.0
    if A.size and np.abs(A - A.T).max() > SYMMETRY_RTOL * max(scale, 1e-300):
        raise DataError("matrix is not symmetric")
    return A


def symmetric_eigen(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues in descending order and matching orthonormal eigenvectors (columns)."""
    A = _as_symmetric(matrix)
    vals, vecs = np.linalg.eigh(0.5 * (A + A.T))
    return vals[::-1].copy(), vecs[:, ::-1].copy()


def default_tolerance(matrix) -> float:
    A = np.asarray(matrix, dtype=np.float64)
    if A.size == 0:
        return 0.0
    return 1e-8 * A.shape[0] * float(np.abs(A).max())


def check_psd(matrix, tolerance: Optional[float] = None) -> PsdReport:
    """Certify ``matrix`` as PSD when its smallest eigenvalue is >= -tolerance.

    The default tolerance is ``1e-8 * n * max|entry|``.
    """
    A = _as_symmetric(matrix)
    n = A.shape[0]
    if tolerance is None:
        tolerance = default_tolerance(A)
    if n == 0:
        return PsdReport(0.0, float(tolerance), True, 0)
    lam_min = float(np.linalg.eigvalsh(0.5 * (A + A.T))[0])
    return PsdReport(lam_min, float(tolerance), lam_min >= -tolerance, n)


def center_kernel(gram) -> np.ndarray:
    """Double-centre a kernel matrix: ``K - JK - KJ + JKJ`` with ``J = 11^T/n``."""
    K = _as_symmetric(gram)
    col_means = K.mean(axis=0)
    row_means = K.mean(axis=1)
    Kc = K - row_means[:, None] - col_means[None, :] + K.mean()
    return 0.5 * (Kc + Kc.T)
