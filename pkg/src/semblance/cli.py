"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 numeric failure (for example a failed PSD check).
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .comparators import KernelSpec, parse_kernel
from .errors import ConfigError, DataError, NumericError, SemblanceError
from .kpca import denoise_image, synthetic_image
from .psd import check_psd
from .simulation import SIM_METRICS, TwoGroupConfig, run_sweep
from .svm import (cross_validate, fit_and_score, holdout_split, load_model, save_model,
                  svm_predict, svm_train)

logger = logging.getLogger("semblance")

DEFAULT_SEED = 0
KERNEL_CHOICES = ("semblance", "euclidean", "pearson", "spearman", "gaussian",
                  "laplacian", "linear", "polynomial")


@dataclass
class RunConfig:
    subcommand: str
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    kernel: Optional[str] = None
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None
    threads: int = 1

    def validate(self) -> None:
        for p in self.inputs:
            if not Path(p).is_file():
                raise ConfigError(f"input file not found: {p}")
        for p in self.outputs:
            parent = Path(p).resolve().parent
            if not parent.is_dir():
                raise ConfigError(f"output directory does not exist: {parent}")
        if self.threads < 1:
            raise ConfigError("--threads must be >= 1")

    def header(self) -> str:
        parts = [f"command={self.subcommand}"]
        if self.kernel:
            parts.append(f"kernel={self.kernel}")
        parts += [f"{k}={v}" for k, v in self.params.items()]
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        parts.append(f"threads={self.threads}")
        return "# " + " ".join(parts)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _kernel_args(p, default="semblance", multiple=False):
    if multiple:
        p.add_argument("--kernel", action="append", choices=KERNEL_CHOICES, dest="kernels",
                       help="kernel to evaluate; repeatable (default: semblance)")
    else:
        p.add_argument("--kernel", choices=KERNEL_CHOICES, default=default)
    p.add_argument("--sigma", type=float, default=None,
                   help="gaussian/laplacian bandwidth (default: median pairwise distance)")
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--offset", type=float, default=1.0)


def _table_args(p):
    p.add_argument("--header", dest="header", action="store_true", default=None)
    p.add_argument("--no-header", dest="header", action="store_false")
    p.add_argument("--row-names", dest="row_names", action="store_true", default=None)
    p.add_argument("--no-row-names", dest="row_names", action="store_false")


def _spec(args, name=None):
    return parse_kernel(name or args.kernel, args.sigma, args.degree, args.scale, args.offset)


def _kernel_params(args, name) -> dict:
    if name in ("gaussian", "laplacian"):
        return {"sigma": args.sigma if args.sigma is not None else "median"}
    if name == "polynomial":
        return {"degree": args.degree, "scale": args.scale, "offset": args.offset}
    return {}


def _parse_grid(items) -> dict:
    """``name=v1,v2,...`` or ``name=start:stop:count`` (inclusive linspace)."""
    grid = {}
    for item in items or []:
        name, sep, spec = item.partition("=")
        if not sep or not spec:
            raise ConfigError(f"bad --grid {item!r}; expected name=values")
        try:
            if ":" in spec:
                start, stop, num = spec.split(":")
                values = np.linspace(float(start), float(stop), int(num)).round(12).tolist()
            else:
                values = [float(v) for v in spec.split(",")]
        except ValueError:
            raise ConfigError(f"bad --grid values {spec!r}") from None
        grid[name.strip()] = values
    return grid


def _read_labels(path) -> np.ndarray:
    """One label per line; two distinct values, mapped smaller -> -1, larger -> +1."""
    vals = io.ingest_table(path, header=None, row_names=False).values
    if vals.shape[1] != 1:
        raise DataError(f"{path}: expected a single label column")
    vals = vals[:, 0]
    classes = np.unique(vals)
    if classes.size != 2:
        raise DataError(f"{path}: expected exactly two classes, found {classes.size}")
    if not set(classes.tolist()) <= {-1.0, 1.0}:
        logger.info("mapping labels %g -> -1, %g -> +1", classes[0], classes[1])
    return np.where(vals == classes[1], 1.0, -1.0)


# --- subcommands ------------------------------------------------------------

def cmd_gram(args) -> int:
    cfg = RunConfig("gram", [args.input], [args.output], args.kernel,
                    _kernel_params(args, args.kernel), None, args.threads)
    if args.weights:
        cfg.inputs.append(args.weights)
    cfg.validate()
    print(cfg.header(), file=sys.stderr)
    data = io.ingest_table(args.input, args.header, args.row_names)
    spec = _spec(args)
    if args.weights and spec.name == "semblance":
        w = io.ingest_table(args.weights, header=None, row_names=False).values.ravel()
        spec = type(spec)("semblance", {"weights": w})
    gram = spec.fit(data, threads=args.threads).gram()
    io.write_matrix(gram.entries, args.output, args.format, labels=data.object_names)
    return 0


def cmd_check_psd(args) -> int:
    RunConfig("check-psd", [args.matrix]).validate()
    A = io.read_matrix(args.matrix)
    report = check_psd(A, args.tolerance)
    print(report.line())
    return 0 if report.is_psd else NumericError.exit_code


def cmd_simulate(args) -> int:
    outputs = [args.output] if args.output else []
    cfg = RunConfig("simulate", [], outputs, None,
                    {"model": args.model, "replicates": args.replicates}, args.seed)
    cfg.validate()
    grid = _parse_grid(args.grid)
    if len(grid) != 2:
        raise ConfigError("simulate needs exactly two --grid axes")
    base = TwoGroupConfig(n=args.n, m=args.m, q=args.q, p=args.p, model=args.model,
                          mu=args.mu, sigma1=args.sigma1, sigma2=args.sigma2,
                          r0=args.r0, r1=args.r1, seed=args.seed)
    metrics = tuple(args.metrics.split(",")) if args.metrics else SIM_METRICS
    result = run_sweep(grid, base, metrics, args.replicates, args.seed)
    (a1, _), (a2, _) = result.axes
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        fh.write(cfg.header() + f" base={base}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([a1, a2, "metric", "statistic", "value", "replicates"])
        for v1, v2, metric, stat, value, reps in result.rows():
            w.writerow([repr(v1), repr(v2), metric, stat, repr(value), reps])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_kpca_denoise(args) -> int:
    inputs = [] if args.input is None else [args.input]
    cfg = RunConfig("kpca denoise", inputs, [args.noisy_out, args.recon_out], args.kernel,
                    {"components": args.components, "noise": args.noise, "neighbors": args.neighbors},
                    args.seed, args.threads)
    cfg.validate()
    print(cfg.header(), file=sys.stderr)
    image = synthetic_image(args.size).pixels if args.input is None else io.read_pgm(args.input)
    result = denoise_image(image, _spec(args), args.components, args.noise, args.seed,
                           args.neighbors, args.threads)
    io.write_pgm(result.noisy.pixels, args.noisy_out)
    io.write_pgm(result.reconstructed.pixels, args.recon_out)
    print(f"{result.mse_noisy!r},{result.mse_recon!r}")
    return 0


def cmd_kpca_image(args) -> int:
    RunConfig("kpca make-image", [], [args.output]).validate()
    io.write_pgm(synthetic_image(args.size).pixels, args.output)
    return 0


def cmd_svm_train(args) -> int:
    cfg = RunConfig("svm train", [args.data, args.labels], [args.output], args.kernel,
                    {"C": args.C, "tol": args.tol, **_kernel_params(args, args.kernel)})
    cfg.validate()
    print(cfg.header(), file=sys.stderr)
    data = io.ingest_table(args.data, args.header, args.row_names)
    y = _read_labels(args.labels)
    fitted = _spec(args).fit(data)
    model = svm_train(fitted.gram(), y, args.C, args.tol, psd_shift=args.psd_shift)
    model.kernel_params = dict(fitted.params)
    save_model(model, args.output)
    print(f"iterations={model.iterations} kkt_violation={model.kkt_violation!r} "
          f"support={model.support_indices.size} truncated={model.truncated}", file=sys.stderr)
    return 0


def cmd_svm_predict(args) -> int:
    outputs = [args.output] if args.output else []
    RunConfig("svm predict", [args.model, args.train, args.data], outputs).validate()
    model = load_model(args.model)
    train = io.ingest_table(args.train, args.header, args.row_names)
    test = io.ingest_table(args.data, args.header, args.row_names)
    if train.n != model.alpha.size:
        raise DataError(f"model was trained on {model.alpha.size} objects, {args.train} has {train.n}")
    name = model.kernel_id
    if name == "euclidean_distance":
        raise ConfigError("euclidean distance is not a kernel")
    fitted = KernelSpec(name, model.kernel_params).fit(train)
    scores, classes = svm_predict(model, fitted.cross(test.values))
    fh = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["score", "class"])
        for s, c in zip(scores, classes):
            w.writerow([repr(float(s)), int(c)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_svm_cv(args) -> int:
    kernels = args.kernels or ["semblance"]
    cfg = RunConfig("svm cv", [args.data, args.labels], [], ",".join(kernels),
                    {"C": args.C, "folds": args.folds, "tol": args.tol}, args.seed)
    cfg.validate()
    data = io.ingest_table(args.data, args.header, args.row_names)
    y = _read_labels(args.labels)
    specs = [_spec(args, k) for k in kernels]
    reports = cross_validate(data, y, specs, args.folds, args.seed, args.C, args.tol, args.psd_shift)
    print(cfg.header())
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["kernel", "fold", "train_accuracy", "test_accuracy"])
    for name, rep in reports.items():
        for i, (tr, te) in enumerate(zip(rep.train_accuracies, rep.accuracies)):
            w.writerow([name, i, repr(tr), repr(te)])
        w.writerow([name, "mean", repr(float(np.mean(rep.train_accuracies))), repr(rep.mean_accuracy)])
    return 0


def cmd_svm_holdout(args) -> int:
    kernels = args.kernels or ["semblance"]
    cfg = RunConfig("svm holdout", [args.data, args.labels], [], ",".join(kernels),
                    {"C": args.C, "test_fraction": args.test_fraction}, args.seed)
    cfg.validate()
    data = io.ingest_table(args.data, args.header, args.row_names)
    y = _read_labels(args.labels)
    train, test = holdout_split(y, args.test_fraction, args.seed)
    print(cfg.header())
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["kernel", "train_accuracy", "test_accuracy"])
    for k in kernels:
        _, tr, te = fit_and_score(_spec(args, k), data.values, y, train, test, args.C,
                                  args.tol, args.psd_shift)
        w.writerow([k, repr(tr), repr(te)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="semblance", description="Semblance kernel toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gram", help="compute a kernel or distance matrix")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--format", choices=("csv", "binary"), default="csv")
    p.add_argument("--weights", help="file with one nonnegative weight per feature (semblance)")
    p.add_argument("--threads", type=int, default=1)
    _kernel_args(p)
    _table_args(p)
    p.set_defaults(func=cmd_gram)

    p = sub.add_parser("check-psd", help="certify a matrix as positive semidefinite")
    p.add_argument("matrix")
    p.add_argument("--tolerance", type=float, default=None,
                   help="default: 1e-8 * n * max|entry|")
    p.set_defaults(func=cmd_check_psd)

    p = sub.add_parser("simulate", help="two-group T1/T2 sweep, long-format CSV")
    p.add_argument("--model", choices=("normal", "bernoulli"), default="normal")
    p.add_argument("--grid", action="append", metavar="NAME=SPEC",
                   help="axis as v1,v2,... or start:stop:count; give exactly two")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--metrics", help=f"comma list from {','.join(SIM_METRICS)}")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--m", type=int, default=100)
    p.add_argument("--q", type=float, default=0.1)
    p.add_argument("--p", type=float, default=0.1)
    p.add_argument("--mu", type=float, default=2.0)
    p.add_argument("--sigma1", type=float, default=0.1)
    p.add_argument("--sigma2", type=float, default=0.1)
    p.add_argument("--r0", type=float, default=0.5)
    p.add_argument("--r1", type=float, default=0.05)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_simulate)

    kp = sub.add_parser("kpca", help="kernel PCA image pipelines")
    ksub = kp.add_subparsers(dest="kpca_command", required=True, parser_class=_Parser)
    p = ksub.add_parser("denoise", help="add uniform noise to a PGM and reconstruct its rows")
    p.add_argument("input", nargs="?", help="P5 PGM (default: built-in synthetic image)")
    p.add_argument("--components", type=int, default=8)
    p.add_argument("--noise", type=float, default=0.3, help="uniform noise amplitude a")
    p.add_argument("--neighbors", type=int, default=10)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--size", type=int, default=64, help="synthetic image size")
    p.add_argument("--noisy-out", default="noisy.pgm")
    p.add_argument("--recon-out", default="reconstructed.pgm")
    p.add_argument("--threads", type=int, default=1)
    _kernel_args(p)
    p.set_defaults(func=cmd_kpca_denoise)
    p = ksub.add_parser("make-image", help="write the synthetic test image")
    p.add_argument("output")
    p.add_argument("--size", type=int, default=64)
    p.set_defaults(func=cmd_kpca_image)

    sp = sub.add_parser("svm", help="precomputed-kernel SVM")
    ssub = sp.add_subparsers(dest="svm_command", required=True, parser_class=_Parser)

    def common(p, multiple=False):
        p.add_argument("--C", type=float, default=1.0)
        p.add_argument("--tol", type=float, default=1e-3)
        p.add_argument("--psd-shift", action="store_true",
                       help="shift the diagonal of a non-PSD Gram instead of failing")
        _kernel_args(p, multiple=multiple)
        _table_args(p)

    p = ssub.add_parser("train")
    p.add_argument("data")
    p.add_argument("--labels", required=True)
    p.add_argument("-o", "--output", required=True)
    common(p)
    p.set_defaults(func=cmd_svm_train)

    p = ssub.add_parser("predict")
    p.add_argument("data")
    p.add_argument("--model", required=True)
    p.add_argument("--train", required=True, help="training table the model was fitted on")
    p.add_argument("-o", "--output")
    _table_args(p)
    p.set_defaults(func=cmd_svm_predict)

    p = ssub.add_parser("cv", help="stratified k-fold cross-validation")
    p.add_argument("data")
    p.add_argument("--labels", required=True)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(p, multiple=True)
    p.set_defaults(func=cmd_svm_cv)

    p = ssub.add_parser("holdout", help="stratified train/test split (3:1 by default)")
    p.add_argument("data")
    p.add_argument("--labels", required=True)
    p.add_argument("--test-fraction", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(p, multiple=True)
    p.set_defaults(func=cmd_svm_holdout)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except SemblanceError as exc:
        print(f"semblance: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
