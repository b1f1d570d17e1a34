"""Binary soft-margin SVM on a precomputed Gram matrix.

The dual ``max e'a - a'Qa/2`` with ``Q = yy' * K``, ``0 <= a <= C`` and
``y'a = 0`` is solved by two-coordinate (SMO) steps on the maximal violating
pair. The solver only ever sees the matrix, never raw features.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .comparators import KernelSpec
from .data import as_data_matrix
from .errors import ConfigError, DataError
from .psd import check_psd

TAU = 1e-12


@dataclass
class SvmModel:
    alpha: np.ndarray
    bias: float
    labels: np.ndarray
    C: float
    gram: np.ndarray
    iterations: int = 0
    kkt_violation: float = 0.0
    truncated: bool = False
    objective_trace: list = field(default_factory=list)
    kernel_id: str = "precomputed"
    kernel_params: dict = field(default_factory=dict)
    diagonal_shift: float = 0.0

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alpha > 0)

    @property
    def coef(self) -> np.ndarray:
        """``alpha * y``, the weights on kernel columns in the decision function."""
        return self.alpha * self.labels

    def decision_function(self, cross_gram_rows) -> np.ndarray:
        Kx = np.asarray(cross_gram_rows, dtype=np.float64)
        if Kx.ndim == 1:
            Kx = Kx[None, :]
        if Kx.shape[1] != self.alpha.size:
            raise DataError(f"kernel rows have {Kx.shape[1]} columns, model was trained on {self.alpha.size}")
        return Kx @ self.coef + self.bias

    def dual_objective(self) -> float:
        return _objective(self.alpha, self.labels, self.gram)

    def kkt_residual(self) -> float:
        Q = self.labels[:, None] * self.labels[None, :] * self.gram
        grad = Q @ self.alpha - 1.0
        return _max_violation(self.alpha, self.labels, grad, self.C)[2]


def _objective(alpha, y, K) -> float:
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ K @ v)


def _max_violation(alpha, y, grad, C):
    """Maximal violating pair ``(i, j, m - M)``; the gap is <= 0 at optimality."""
    minus_yg = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
    if not up.any() or not low.any():
        return -1, -1, 0.0
    i = int(np.flatnonzero(up)[np.argmax(minus_yg[up])])
    j = int(np.flatnonzero(low)[np.argmin(minus_yg[low])])
    return i, j, float(minus_yg[i] - minus_yg[j])


def _check_labels(labels, n: int) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64).ravel()
    if y.size != n:
        raise DataError(f"{y.size} labels for a {n}x{n} Gram matrix")
    if not np.all((y == 1) | (y == -1)):
        raise DataError("labels must be +1 or -1")
    if np.all(y == y[0]):
        raise DataError("labels contain a single class")
    return y


def svm_train(gram, labels, C: float = 1.0, tol: float = 1e-3, *,
              max_passes: int = 10_000, psd_shift: bool = False,
              record_trace: bool = False) -> SvmModel:
    """Train on an n x n Gram matrix.

    Stops when the maximal KKT violation is <= ``tol`` or after
    ``max_passes * n`` pair updates (then ``truncated`` is set). A Gram that
    fails the PSD check raises unless ``psd_shift`` is given, in which case
    the diagonal is shifted by ``|lambda_min| + 1e-10`` with a warning.
    """
    kernel_id = getattr(gram, "kernel_id", "precomputed")
    kernel_params = dict(getattr(gram, "params", {}) or {})
    K = np.array(gram, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise DataError(f"Gram matrix must be square, got shape {K.shape}")
    n = K.shape[0]
    y = _check_labels(labels, n)
    if not C > 0:
        raise ConfigError(f"C must be > 0, got {C}")
    shift = 0.0
    report = check_psd(K)
    if not report.is_psd:
        if not psd_shift:
            raise DataError(f"Gram matrix is not PSD ({report.line()}); pass psd_shift to correct it")
        shift = abs(report.min_eigenvalue) + 1e-10
        warnings.warn(f"shifting Gram diagonal by {shift:.3g} to restore PSD", RuntimeWarning,
                      stacklevel=2)
        K = K + shift * np.eye(n)

    Q = y[:, None] * y[None, :] * K
    diag = np.diag(K).copy()
    alpha = np.zeros(n)
    grad = -np.ones(n)
    trace = [0.0] if record_trace else []
    max_iter = max_passes * n
    it = 0
    gap = math.inf
    while True:
        i, j, gap = _max_violation(alpha, y, grad, C)
        if gap <= tol or it >= max_iter:
            break
        eta = diag[i] + diag[j] - 2.0 * K[i, j]
        if eta <= 0:
            eta = TAU
        t = gap / eta
        t = min(t, C - alpha[i] if y[i] > 0 else alpha[i])
        t = min(t, alpha[j] if y[j] > 0 else C - alpha[j])
        if t <= 0:
            break
        di, dj = y[i] * t, -y[j] * t
        new_i, new_j = alpha[i] + di, alpha[j] + dj
        # snap to the box so support sets are exact
        alpha[i] = 0.0 if new_i <= 0 else (C if new_i >= C else new_i)
        alpha[j] = 0.0 if new_j <= 0 else (C if new_j >= C else new_j)
        grad += Q[:, i] * di + Q[:, j] * dj
        it += 1
        if record_trace:
            trace.append(float(-0.5 * alpha @ (grad - 1.0)))

    bias = -_rho(alpha, y, grad, C)
    model = SvmModel(alpha, bias, y, float(C), K, it, max(gap, 0.0), gap > tol, trace,
                     kernel_id, kernel_params, shift)
    return model


def _rho(alpha, y, grad, C) -> float:
    """Offset from free support vectors, else the midpoint of the feasible interval."""
    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yg[free].mean())
    at_upper = alpha >= C
    ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
    lb_mask = (at_upper & (y > 0)) | (~at_upper & (y < 0))
    ub = yg[ub_mask].min() if ub_mask.any() else math.inf
    lb = yg[lb_mask].max() if lb_mask.any() else -math.inf
    if math.isinf(ub):
        return float(lb)
    if math.isinf(lb):
        return float(ub)
    return float(0.5 * (ub + lb))


def svm_predict(model: SvmModel, cross_gram_rows) -> tuple[np.ndarray, np.ndarray]:
    """Decision values and classes; a score of exactly zero maps to +1."""
    scores = model.decision_function(cross_gram_rows)
    classes = np.where(scores >= 0, 1, -1)
    return scores, classes


def accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    return float(np.mean(pred == truth)) if truth.size else math.nan


# --- evaluation protocols ---------------------------------------------------

def stratified_folds(labels, k: int, seed: int) -> np.ndarray:
    """Fold id per object; each class is shuffled then dealt round-robin."""
    y = np.asarray(labels)
    if k < 2:
        raise ConfigError(f"need at least 2 folds, got {k}")
    rng = np.random.default_rng(seed)
    folds = np.empty(y.size, dtype=np.intp)
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        if idx.size < k:
            raise DataError(f"class {cls:g} has {idx.size} members, fewer than {k} folds; reduce k")
        idx = rng.permutation(idx)
        folds[idx] = (np.arange(idx.size) + offset) % k
        offset += idx.size
    return folds


@dataclass(frozen=True)
class CvReport:
    kernel: str
    folds: int
    accuracies: tuple
    train_accuracies: tuple
    seed: int

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))


def fit_and_score(kernel: KernelSpec, X: np.ndarray, y: np.ndarray, train, test,
                  C: float, tol: float = 1e-3, psd_shift: bool = False):
    """Train on ``train`` rows and return ``(model, train_acc, test_acc)``.

    The kernel (including Semblance's empirical distributions) is fitted on
    the training rows only.
    """
    fitted = kernel.fit(X[train])
    gram = fitted.gram()
    model = svm_train(gram, y[train], C, tol, psd_shift=psd_shift)
    _, train_pred = svm_predict(model, gram.entries + model.diagonal_shift * np.eye(len(train)))
    _, test_pred = svm_predict(model, fitted.cross(X[test]))
    return model, accuracy(train_pred, y[train]), accuracy(test_pred, y[test])


def cross_validate(data, labels, kernels: Sequence[KernelSpec | str], k: int = 10,
                   seed: int = 0, C: float = 1.0, tol: float = 1e-3,
                   psd_shift: bool = False) -> dict[str, CvReport]:
    """Stratified k-fold accuracy for each kernel, sharing one fold assignment."""
    X = as_data_matrix(data).values
    y = _check_labels(labels, X.shape[0])
    folds = stratified_folds(y, k, seed)
    reports = {}
    for spec in kernels:
        if isinstance(spec, str):
            spec = KernelSpec(spec)
        test_acc, train_acc = [], []
        for fold in range(k):
            test = np.flatnonzero(folds == fold)
            train = np.flatnonzero(folds != fold)
            _, tr, te = fit_and_score(spec, X, y, train, test, C, tol, psd_shift)
            train_acc.append(tr)
            test_acc.append(te)
        reports[spec.name] = CvReport(spec.name, k, tuple(test_acc), tuple(train_acc), seed)
    return reports


def holdout_split(labels, test_fraction: float = 0.25, seed: int = 0):
    """Stratified random split, 3:1 train:test by default."""
    y = np.asarray(labels)
    if not 0 < test_fraction < 1:
        raise ConfigError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(y):
        idx = rng.permutation(np.flatnonzero(y == cls))
        n_test = int(round(test_fraction * idx.size))
        if n_test < 1 or n_test >= idx.size:
            raise DataError(f"class {cls:g} is too small to split")
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return np.sort(np.array(train)), np.sort(np.array(test))


# --- plain-text model record ------------------------------------------------

MODEL_HEADER = "# semblance svm model v1"


def save_model(model: SvmModel, path) -> None:
    """Write ``key value...`` lines; floats use shortest round-trip repr."""
    fl = lambda xs: " ".join(repr(float(x)) for x in xs)
    lines = [
        MODEL_HEADER,
        f"kernel {model.kernel_id}",
        f"params {json.dumps(model.kernel_params, sort_keys=True)}",
        f"C {model.C!r}",
        f"bias {model.bias!r}",
        f"diagonal_shift {model.diagonal_shift!r}",
        f"n {model.alpha.size}",
        f"labels {' '.join(str(int(v)) for v in model.labels)}",
        f"alpha {fl(model.alpha)}",
        f"support {' '.join(str(i) for i in model.support_indices)}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> SvmModel:
    fields = {}
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != MODEL_HEADER:
            raise DataError(f"{path}: not an SVM model file")
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            key, _, rest = line.partition(" ")
            fields[key] = rest
    try:
        n = int(fields["n"])
        labels = np.array([float(v) for v in fields["labels"].split()])
        alpha = np.array([float(v) for v in fields["alpha"].split()])
        if labels.size != n or alpha.size != n:
            raise DataError(f"{path}: vector lengths do not match n={n}")
        return SvmModel(alpha, float(fields["bias"]), labels, float(fields["C"]),
                        np.empty((0, 0)), kernel_id=fields["kernel"],
                        kernel_params=json.loads(fields["params"]),
                        diagonal_shift=float(fields.get("diagonal_shift", 0.0)))
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: malformed model record ({exc})") from exc
