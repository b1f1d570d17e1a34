"""Kernel PCA with neighbour-average pre-images, and row-wise image denoising."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .comparators import KernelSpec
from .data import as_data_matrix, check_finite
from .errors import ConfigError, DataError
from .psd import center_kernel, check_psd, symmetric_eigen

logger = logging.getLogger(__name__)

EIGEN_FLOOR = 1e-10


@dataclass
class KpcaModel:
    """Fitted kernel PCA.

    ``alphas[:, k]`` is the k-th eigenvector of the centred Gram divided by
    ``sqrt(eigenvalues[k])``, so ``eigenvalues[k] * |alphas[:, k]|^2 == 1``.
    """

    kernel: object
    gram: np.ndarray
    centered: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    alphas: np.ndarray
    scores: np.ndarray
    all_eigenvalues: np.ndarray

    @property
    def f(self) -> int:
        return self.alphas.shape[1]

    @property
    def training_data(self):
        return self.kernel.data

    def energy(self, f: int | None = None) -> float:
        """Fraction of centred-kernel variance carried by the first ``f`` components."""
        lam = np.clip(self.all_eigenvalues, 0.0, None)
        total = lam.sum()
        if total <= 0:
            return 0.0
        f = self.f if f is None else f
        return float(lam[:f].sum() / total)


def kpca_fit(data, kernel: KernelSpec | str = "semblance", f: int = 2, *,
             strict: bool = False, threads: int = 1) -> KpcaModel:
    """Fit kernel PCA and keep the leading ``f`` components.

    Components whose eigenvalue is at or below ``1e-10 * lambda_max`` are
    dropped with a warning. With ``strict=True`` that raises instead.
    """
    data = as_data_matrix(data)
    if isinstance(kernel, str):
        kernel = KernelSpec(kernel)
    n = data.n
    if not 1 <= f <= max(n - 1, 1):
        raise ConfigError(f"f must lie in [1, n-1] = [1, {n - 1}], got {f}")
    fitted = kernel.fit(data, threads=threads)
    K = np.asarray(fitted.gram().entries)
    report = check_psd(K)
    if not report.is_psd:
        raise DataError(f"kernel Gram is not PSD: {report.line()}")
    Kc = center_kernel(K)
    lam, V = symmetric_eigen(Kc)
    floor = EIGEN_FLOOR * max(lam[0], 0.0)
    admissible = int(np.sum(lam[:f] > floor)) if lam[0] > 0 else 0
    if admissible < f:
        msg = f"only {admissible} of {f} requested components exceed the eigenvalue floor"
        if strict:
            raise ConfigError(msg)
        warnings.warn(msg + f"; using f={admissible}", RuntimeWarning, stacklevel=2)
    keep_lam = lam[:admissible]
    keep_V = V[:, :admissible]
    alphas = keep_V / np.sqrt(keep_lam)
    scores = keep_V * np.sqrt(keep_lam)
    return KpcaModel(fitted, K, Kc, keep_lam, keep_V, alphas, scores, lam)


def kpca_project(model: KpcaModel, points) -> np.ndarray:
    """Scores of new points, centring their kernel rows against the training Gram."""
    G = model.training_data.G
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return np.zeros((0, model.f))
    if pts.ndim == 1:
        pts = pts[None, :]
    if pts.shape[1] != G:
        raise DataError(f"points have {pts.shape[1]} columns, model expects {G}")
    Kx = np.asarray(model.kernel.cross(pts))
    Kxc = Kx - Kx.mean(axis=1, keepdims=True) - model.gram.mean(axis=0)[None, :] + model.gram.mean()
    return Kxc @ model.alphas


def feature_space_distances(model: KpcaModel, scores) -> np.ndarray:
    """Squared distances between the projection of a point and each centred training image.

    ``|P phi|^2 - 2 <P phi, phi_i> + |phi_i|^2`` where the cross term only
    sees the retained components.
    """
    s = np.asarray(scores, dtype=np.float64).ravel()
    if s.size != model.f:
        raise DataError(f"score vector has {s.size} entries, model has {model.f} components")
    d2 = s @ s - 2.0 * model.scores @ s + np.diag(model.centered)
    return np.maximum(d2, 0.0)


def preimage_reconstruct(model: KpcaModel, scores, k: int = 10, *,
                         uniform: bool = False) -> np.ndarray:
    """Approximate input-space pre-image as a weighted mean of the k nearest training rows.

    Weights are ``exp(-d^2 / mean(d^2))`` over the k neighbours. Neighbours at
    (numerically) zero distance take all the weight; equal distances give
    uniform weights.
    """
    X = model.training_data.values
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ConfigError(f"k must lie in [1, n] = [1, {n}], got {k}")
    d2 = feature_space_distances(model, scores)
    order = np.argsort(d2, kind="stable")[:k]
    dk = d2[order]
    if uniform:
        w = np.ones(k)
    else:
        scale = float(np.abs(np.diag(model.centered)).max())
        exact = dk <= 1e-10 * max(scale, 1e-300)
        if exact.any():
            w = exact.astype(np.float64)
        else:
            mean = dk.mean()
            w = np.exp(-dk / mean) if mean > 0 else np.ones(k)
    w = w / w.sum()
    return w @ X[order]


# --- images -----------------------------------------------------------------

@dataclass(frozen=True)
class ImageGrid:
    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise DataError(f"image must be a non-empty 2-D array, got shape {px.shape}")
        check_finite(px, "image")
        object.__setattr__(self, "pixels", np.clip(px, 0.0, 1.0))

    @property
    def H(self) -> int:
        return self.pixels.shape[0]

    @property
    def W(self) -> int:
        return self.pixels.shape[1]


@dataclass(frozen=True)
class DenoiseResult:
    noisy: ImageGrid
    reconstructed: ImageGrid
    mse_noisy: float
    mse_recon: float
    f: int


def synthetic_image(size: int = 64) -> ImageGrid:
    """Horizontal gradient with three flat rectangles, a fixed test pattern."""
    H = W = size
    x = np.arange(W) / max(W - 1, 1)
    px = np.tile(0.2 + 0.5 * x, (H, 1))
    s = size / 64.0
    r = lambda a: int(round(a * s))
    px[r(10):r(30), r(15):r(40)] = 0.9
    px[r(40):r(55), r(5):r(25)] = 0.1
    px[r(35):r(60), r(40):r(58)] = 0.7
    return ImageGrid(px)


def _mse(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.mean((a - b) ** 2))


def denoise_image(image, kernel: KernelSpec | str = "semblance", f: int = 8,
                  amplitude: float = 0.3, seed: int = 0, k: int = 10,
                  threads: int = 1) -> DenoiseResult:
    """Corrupt with Uniform(-a, a) noise, then rebuild every row through kPCA.

    Image rows are the observations. The returned MSEs are against the clean
    input.
    """
    if not isinstance(image, ImageGrid):
        image = ImageGrid(image)
    if amplitude < 0 or not math.isfinite(amplitude):
        raise ConfigError(f"noise amplitude must be >= 0, got {amplitude}")
    if image.H < f + 1:
        raise ConfigError(f"image has {image.H} rows; need at least f+1 = {f + 1}")
    rng = np.random.default_rng(seed)
    noise = rng.uniform(-amplitude, amplitude, size=image.pixels.shape)
    noisy = ImageGrid(image.pixels + noise)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        model = kpca_fit(noisy.pixels, kernel, f, threads=threads)
    if model.f < f:
        logger.warning("kPCA kept %d of %d components", model.f, f)
    k = min(k, image.H)
    recon = np.vstack([preimage_reconstruct(model, s, k) for s in model.scores])
    recon_img = ImageGrid(recon)
    return DenoiseResult(noisy, recon_img, _mse(noisy.pixels, image.pixels),
                         _mse(recon_img.pixels, image.pixels), model.f)
