"""Acceptance checks: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -v``; the lines are printed even when
output capture is on.
"""

import time

import numpy as np
import pytest

from conftest import random_dataset
from semblance import (KernelSpec, check_psd, cross_validate, kpca_fit, semblance_gram,
                       semblance_gram_naive, svm_predict, svm_train)
from semblance.io import read_pgm, write_pgm
from semblance.kpca import denoise_image, synthetic_image
from semblance.simulation import (SIM_METRICS, TwoGroupConfig, generate_two_group, oriented,
                                  replicate_stats)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


def _median_t(config_kwargs, seeds, metrics):
    t1 = {m: [] for m in metrics}
    t2 = {m: [] for m in metrics}
    for s in seeds:
        stats = replicate_stats(TwoGroupConfig(seed=s, **config_kwargs), metrics)
        for m in metrics:
            t1[m].append(oriented(stats[m].t1, m))
            t2[m].append(oriented(stats[m].t2, m))
    med = lambda v: float(np.median([x for x in v if np.isfinite(x)]))
    return {m: med(t1[m]) for m in metrics}, {m: med(t2[m]) for m in metrics}


def test_criterion_1_oracle_equivalence(report):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    mismatches = 0
    trials = 210
    for t in range(trials):
        n = int(rng.integers(2, 31))
        G = int(rng.integers(1, 11))
        X = random_dataset(rng, n, G, ("continuous", "discrete", "mixed")[t % 3])
        if not np.array_equal(semblance_gram(X).entries, semblance_gram_naive(X).entries):
            mismatches += 1
    elapsed = time.perf_counter() - start
    report(1, mismatches == 0 and elapsed < 10,
           f"{trials} datasets, {mismatches} mismatches, {elapsed:.2f}s (< 10s)")


def test_criterion_2_psd(report):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    failures = []
    worst = np.inf
    for t in range(100):
        n = int(rng.integers(2, 101))
        G = int(rng.integers(1, 21))
        X = random_dataset(rng, n, G, ("continuous", "discrete", "mixed")[t % 3])
        K = semblance_gram(X).entries
        rep = check_psd(K)
        worst = min(worst, rep.min_eigenvalue / max(rep.tolerance, 1e-300))
        if not rep.is_psd:
            failures.append(f"gram {t}")
        g = int(rng.integers(G))
        if not check_psd(semblance_gram(X[:, [g]]).entries).is_psd:
            failures.append(f"feature {t}")
        Y = random_dataset(rng, n, 3, "mixed")
        if not check_psd(K + semblance_gram(Y).entries).is_psd:
            failures.append(f"sum {t}")
        perm = rng.permutation(n)
        if not check_psd(K[np.ix_(perm, perm)]).is_psd:
            failures.append(f"perm {t}")
    negative = check_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    elapsed = time.perf_counter() - start
    ok = not failures and not negative.is_psd and elapsed < 30
    report(2, ok, f"100 datasets x (gram, per-feature, sum, permutation), failures={failures[:5]}, "
                  f"negative control {'rejected' if not negative.is_psd else 'ACCEPTED'}, "
                  f"min lambda/tol={worst:.3g}, {elapsed:.2f}s (< 30s)")


def test_criterion_3_structural_identities(report):
    rng = np.random.default_rng(3)
    n = 40
    col = np.sort(rng.normal(size=n))
    K = semblance_gram(col[:, None]).entries
    i = np.arange(1, n + 1)
    M = (i - 1)[np.minimum.outer(i, i) - 1]
    N = (n - i)[np.maximum.outer(i, i) - 1]
    hook = np.array_equal(K, (M + N) / n)

    X = rng.normal(size=(n, 6))
    ranks = np.argsort(np.argsort(X, axis=0), axis=0) + 1
    rank_ok = all(
        np.array_equal(semblance_gram(X[:, [g]]).entries,
                       (n - np.abs(ranks[:, g][:, None] - ranks[:, g][None, :]) - 1) / n)
        for g in range(6))

    Xm = random_dataset(rng, 25, 5, "mixed")
    base = semblance_gram(Xm).entries
    monotone = all(np.array_equal(semblance_gram(f(Xm)).entries, base)
                   for f in (np.exp, np.arctan, lambda x: x**3 + 2 * x, lambda x: 4 * x - 7))
    perm = rng.permutation(25)
    permuted = np.array_equal(semblance_gram(Xm[perm]).entries, base[np.ix_(perm, perm)])
    report(3, hook and rank_ok and monotone and permuted,
           f"hook={hook} rank_identity={rank_ok} monotone={monotone} permutation={permuted}")


def test_criterion_4_discrete_regime(report):
    start = time.perf_counter()
    kw = dict(n=100, m=100, p=0.1, q=0.1, model="bernoulli", r0=0.5, r1=0.05)
    _, t2 = _median_t(kw, range(25), ("semblance", "pearson", "spearman"))
    elapsed = time.perf_counter() - start
    ok = (t2["semblance"] > t2["pearson"] and t2["semblance"] > t2["spearman"]
          and abs(t2["pearson"]) <= 3 and abs(t2["spearman"]) <= 3 and elapsed < 120)
    report(4, ok, "median T2 semblance={semblance:.3f} pearson={pearson:.3f} "
                  "spearman={spearman:.3f}".format(**t2) + f", {elapsed:.1f}s (< 120s)")


def test_criterion_5_normal_regime(report):
    start = time.perf_counter()
    kw = dict(n=100, m=100, p=0.1, q=0.1, model="normal", mu=2.0, sigma1=0.1, sigma2=0.1)
    t1, t2 = _median_t(kw, range(25), ("semblance", "euclidean_distance"))
    elapsed = time.perf_counter() - start
    e = "euclidean_distance"
    ok = (t1["semblance"] > abs(t1[e]) and t2["semblance"] > abs(t2[e]) and elapsed < 120)
    report(5, ok, f"median T1 semblance={t1['semblance']:.3f} |euclid|={abs(t1[e]):.3f}; "
                  f"median T2 semblance={t2['semblance']:.3f} |euclid|={abs(t2[e]):.3f}, "
                  f"{elapsed:.1f}s (< 120s)")


def test_criterion_6_null_calibration(report):
    nulls = {
        "bernoulli r1=r0=0.5": dict(model="bernoulli", r0=0.5, r1=0.5),
        "normal mu=0 sigma1=sigma2=0.1": dict(model="normal", mu=0.0, sigma1=0.1, sigma2=0.1),
    }
    bad, worst = [], 0.0
    for label, kw in nulls.items():
        t1 = {m: [] for m in SIM_METRICS}
        t2 = {m: [] for m in SIM_METRICS}
        for s in range(100):
            stats = replicate_stats(TwoGroupConfig(n=100, m=100, p=0.1, q=0.1, seed=s, **kw))
            for m in SIM_METRICS:
                t1[m].append(oriented(stats[m].t1, m))
                t2[m].append(oriented(stats[m].t2, m))
        for m in SIM_METRICS:
            for name, vals in (("T1", t1[m]), ("T2", t2[m])):
                mean = float(np.mean(vals))
                worst = max(worst, abs(mean))
                if not -0.5 <= mean <= 0.5:
                    bad.append(f"{label} {m} mean {name}={mean:+.4f}")
    report(6, not bad, f"100 seeds per null, max |mean T|={worst:.3f} (bound 0.5); "
                       f"outside bound: {bad if bad else 'none'}")


def test_criterion_7_kpca_oracle(report):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        n, G = int(rng.integers(10, 40)), int(rng.integers(3, 8))
        X = rng.normal(size=(n, G)) * rng.uniform(0.5, 4, size=G)
        f = min(3, G)
        model = kpca_fit(X, "linear", f)
        U, S, _ = np.linalg.svd(X - X.mean(axis=0), full_matrices=False)
        ref = U[:, :f] * S[:f]
        signs = np.sign(np.sum(model.scores * ref, axis=0))
        worst = max(worst, float(np.abs(model.scores * signs - ref).max()))
    report(7, worst <= 1e-8, f"20 datasets, max |kPCA - PCA| = {worst:.2e} (<= 1e-8)")


def test_criterion_8_denoising(report, tmp_path):
    start = time.perf_counter()
    result = denoise_image(synthetic_image(64), "semblance", f=8, amplitude=0.3, seed=0)
    paths = {"noisy": tmp_path / "noisy.pgm", "recon": tmp_path / "recon.pgm"}
    write_pgm(result.noisy.pixels, paths["noisy"])
    write_pgm(result.reconstructed.pixels, paths["recon"])
    round_trip = True
    for p in paths.values():
        px = read_pgm(p)
        write_pgm(px, tmp_path / "again.pgm")
        round_trip &= px.shape == (64, 64) and np.array_equal(read_pgm(tmp_path / "again.pgm"), px)
    elapsed = time.perf_counter() - start
    ok = result.mse_recon < result.mse_noisy and round_trip and elapsed < 60
    report(8, ok, f"mse_noisy={result.mse_noisy:.5f} mse_recon={result.mse_recon:.5f} "
                  f"pgm_round_trip={round_trip}, {elapsed:.1f}s (< 60s)")


def _blobs(seed, n=100):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([rng.normal([-3, 0], 0.5, size=(half, 2)), rng.normal([3, 0], 0.5, size=(half, 2))])
    return X, np.repeat([-1.0, 1.0], half)


def test_criterion_9_ksvm(report):
    X, y = _blobs(0)
    Xt, yt = _blobs(1)
    parts, ok = [], True
    for name in ("linear", "semblance"):
        fitted = KernelSpec(name).fit(X)
        model = svm_train(fitted.gram(), y, C=1.0, tol=1e-3)
        acc = float(np.mean(svm_predict(model, fitted.cross(Xt))[1] == yt))
        feas = abs(float(model.alpha @ y))
        kkt = model.kkt_residual()
        ok &= acc >= 0.95 and feas <= 1e-8 and kkt <= 1e-3
        parts.append(f"{name}: held-out={acc:.3f} |sum a y|={feas:.1e} kkt={kkt:.1e}")

    data_cfg = TwoGroupConfig(n=200, m=100, p=0.1, q=0.3, model="bernoulli", r0=0.5, r1=0.05, seed=0)
    D, groups = generate_two_group(data_cfg)
    yb = np.where(groups == 1, 1.0, -1.0)
    first = cross_validate(D, yb, ["semblance", "pearson"], k=10, seed=0, C=100.0)
    second = cross_validate(D, yb, ["semblance", "pearson"], k=10, seed=0, C=100.0)
    deterministic = first == second
    sem, pea = first["semblance"].mean_accuracy, first["pearson"].mean_accuracy
    ordering = sem >= pea - 1e-12
    ok &= deterministic and ordering
    parts.append(f"10-fold CV deterministic={deterministic}; bernoulli CV (C=100) "
                 f"semblance={sem:.3f} >= pearson={pea:.3f}")
    report(9, ok, "; ".join(parts))


def test_criterion_10_performance(report):
    rng = np.random.default_rng(0)
    X = rng.normal(size=(500, 2000))
    start = time.perf_counter()
    single = semblance_gram(X, threads=1).entries
    elapsed = time.perf_counter() - start
    parallel = semblance_gram(X, threads=4).entries
    identical = np.array_equal(single, parallel)
    report(10, elapsed < 10 and identical,
           f"n=500 G=2000 in {elapsed:.2f}s single-threaded (< 10s); threads=4 bit-identical={identical}")
