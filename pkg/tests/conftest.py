import numpy as np
import pytest


def random_dataset(rng, n, G, kind):
    """Continuous, discrete (heavy ties) or mixed columns."""
    if kind == "continuous":
        return rng.normal(size=(n, G))
    if kind == "discrete":
        return rng.integers(0, rng.integers(1, 4, endpoint=True), size=(n, G)).astype(float)
    X = rng.normal(size=(n, G))
    tied = rng.random(G) < 0.5
    X[:, tied] = rng.integers(0, 3, size=(n, int(tied.sum())))
    # force a few repeated continuous values as well
    if n > 2:
        X[1, :] = X[0, :]
    return X


def count_outside(column, x, y):
    """Plain-Python count of values strictly outside [min(x,y), max(x,y)]."""
    lo, hi = min(x, y), max(x, y)
    return sum(1 for v in column if v < lo or v > hi)


def brute_force_gram(X, weights=None):
    """Definition-level Gram written with Python loops and Fractions-free integer counts."""
    n, G = X.shape
    w = np.ones(G) if weights is None else np.asarray(weights, float)
    K = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            K[i, j] = sum(w[g] * count_outside(X[:, g], X[i, g], X[j, g]) for g in range(G)) / (n * w.sum())
    return K


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
