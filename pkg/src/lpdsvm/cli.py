"""Command line entry point: ``lpdsvm train|predict|cv|grid``."""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time

import numpy as np

from . import dcd
from .dataio import load_libsvm
from .factor import DEFAULT_CHUNK_SIZE, DEFAULT_TAU_REL, build_factor
from .kernel import KernelParams
from .model import load_model, predict_file, save_model
from .modelsel import cross_validate, grid_search, kfold_split
from .multiclass import SolverOptions, ovo_train

log = logging.getLogger("lpdsvm")


def _positive(kind):
    def parse(s):
        v = kind(s)
        if not v > 0 or (kind is float and not math.isfinite(v)):
            raise argparse.ArgumentTypeError(f"expected a positive value, got {s!r}")
        return v

    return parse


def _fraction(s):
    v = float(s)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"expected a value in (0, 1), got {s!r}")
    return v


def _nonneg(s):
    v = float(s)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative value, got {s!r}")
    return v


def _int_range(s):
    try:
        lo, hi = (int(t) for t in s.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {s!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {s!r}")
    return list(range(lo, hi + 1))


def _add_solver_flags(p, with_c=True):
    p.add_argument("-B", "--budget", type=_positive(int), default=1000, help="number of landmarks (default 1000)")
    if with_c:
        p.add_argument("-c", "--C", dest="C", type=_positive(float), required=True, help="box constraint C")
        p.add_argument("-g", "--gamma", type=_positive(float), required=True, help="Gaussian kernel gamma")
    p.add_argument("-e", "--eps", type=_positive(float), default=dcd.DEFAULT_EPS, help="stopping tolerance (1e-3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive(int), default=os.cpu_count() or 1)
    p.add_argument("--tau", type=_nonneg, default=DEFAULT_TAU_REL, help="relative eigenvalue cut-off")
    p.add_argument("--chunk-size", type=_positive(int), default=DEFAULT_CHUNK_SIZE)
    p.add_argument("--shrink-k", type=_positive(int), default=dcd.DEFAULT_SHRINK_K,
                   help="unchanged visits before a variable is shrunk (5)")
    p.add_argument("--eta", type=_fraction, default=dcd.DEFAULT_ETA,
                   help="share of work spent re-checking shrunk variables (0.05)")
    p.add_argument("--max-epochs", type=_positive(int), default=dcd.DEFAULT_MAX_EPOCHS)
    p.add_argument("--no-shrinking", action="store_true")
    p.add_argument("--plot-dir", help="also render figures into this directory")


def _opts(args) -> SolverOptions:
    return SolverOptions(eps=args.eps, max_epochs=args.max_epochs, shrinking=not args.no_shrinking,
                         k=args.shrink_k, eta=args.eta)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpdsvm", description="Low-rank dual coordinate ascent kernel SVM")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model")
    _add_solver_flags(p)
    p.add_argument("data")
    p.add_argument("model")

    p = sub.add_parser("predict", help="predict labels of a data file")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("out", nargs="?")
    p.add_argument("--threads", type=_positive(int), default=os.cpu_count() or 1)

    p = sub.add_parser("cv", help="k-fold cross-validation")
    _add_solver_flags(p)
    p.add_argument("-k", "--folds", type=int, default=5)
    p.add_argument("data")

    p = sub.add_parser("grid", help="(C, gamma) grid search with cross-validation")
    _add_solver_flags(p, with_c=False)
    p.add_argument("--log2c", type=_int_range, default=list(range(0, 10)), help="range a:b of log2(C)")
    p.add_argument("--log2g", type=_int_range, required=True, help="range a:b of log2(gamma)")
    p.add_argument("-k", "--folds", type=int, default=5)
    p.add_argument("--no-warm-start", action="store_true")
    p.add_argument("--csv", help="write the per-fold report as CSV")
    p.add_argument("data")
    return ap


def _emit_timings(timings: dict, args, name: str) -> None:
    for stage, sec in timings.items():
        print(f"{stage},{sec:.6f}", file=sys.stderr)
    if getattr(args, "plot_dir", None):
        from .report import plot_timings

        os.makedirs(args.plot_dir, exist_ok=True)
        plot_timings(timings, os.path.join(args.plot_dir, f"{name}_timings.png"))


def cmd_train(args) -> int:
    timings = {}
    data = load_libsvm(args.data)
    factor = build_factor(data, args.budget, KernelParams(args.gamma), seed=args.seed, tau_rel=args.tau,
                          chunk_size=args.chunk_size, threads=args.threads, timings=timings)
    t0 = time.perf_counter()
    model = ovo_train(factor, data.raw_labels, args.C, _opts(args), seed=args.seed, threads=args.threads,
                      label_text=data.label_text)
    timings["linear training"] = time.perf_counter() - t0
    save_model(model, args.model)
    reports = [r.report for r in model.pair_results]
    print(f"n={data.n} classes={model.n_classes} B={factor.B} B_eff={factor.B_eff} C={args.C:g} "
          f"gamma={args.gamma:g} eps={args.eps:g}")
    print(f"pairs={len(reports)} epochs={sum(r.epochs for r in reports)} "
          f"visits={sum(r.coordinate_visits for r in reports)} "
          f"dual={sum(r.dual_objective for r in reports):.10g}")
    for a, b in model.nonconverged:
        print(f"warning: pair ({model.label_map.text(a)}, {model.label_map.text(b)}) did not converge",
              file=sys.stderr)
    _emit_timings(timings, args, "train")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    data = load_libsvm(args.data)
    t0 = time.perf_counter()
    if args.out:
        with open(args.out, "w") as f:
            err = predict_file(model, data, f, threads=args.threads)
    else:
        err = predict_file(model, data, sys.stdout, threads=args.threads)
    elapsed = time.perf_counter() - t0
    if err is None:
        print("error rate: n/a (no points)", file=sys.stderr if not args.out else sys.stdout)
    else:
        print(f"error rate: {100 * err:.4f}% ({int(round(err * data.n))}/{data.n})",
              file=sys.stderr if not args.out else sys.stdout)
    print(f"prediction,{elapsed:.6f}", file=sys.stderr)
    return 0


def cmd_cv(args) -> int:
    timings = {}
    data = load_libsvm(args.data)
    folds = kfold_split(data.raw_labels, args.folds, args.seed)
    factor = build_factor(data, args.budget, KernelParams(args.gamma), seed=args.seed, tau_rel=args.tau,
                          chunk_size=args.chunk_size, threads=args.threads, timings=timings)
    t0 = time.perf_counter()
    res = cross_validate(factor, data.raw_labels, folds, args.C, _opts(args), args.seed, threads=args.threads)
    timings["linear training"] = time.perf_counter() - t0
    for f, e in enumerate(res.fold_errors):
        print(f"fold {f}: " + ("skipped (class missing)" if e is None else f"{100 * e:.4f}%"))
    print(f"cv error: {100 * res.mean_error:.4f}%")
    _emit_timings(timings, args, "cv")
    return 0


def cmd_grid(args) -> int:
    data = load_libsvm(args.data)
    gammas = [2.0 ** e for e in args.log2g]
    Cs = [2.0 ** e for e in args.log2c]
    t0 = time.perf_counter()
    report = grid_search(data, args.budget, gammas, Cs, k=args.folds, opts=_opts(args), seed=args.seed,
                         warm_start=not args.no_warm_start, threads=args.threads, tau_rel=args.tau,
                         chunk_size=args.chunk_size)
    total = time.perf_counter() - t0
    print(report.text_table())
    best = report.best
    print(f"best: log2(gamma)={np.log2(best.gamma):g} log2(C)={np.log2(best.C):g} "
          f"cv error {100 * best.error:.4f}%")
    if args.csv:
        with open(args.csv, "w", newline="") as f:
            report.write_csv(f)
    timings = {"stage 1": report.stage1_seconds, "linear training": total - report.stage1_seconds}
    for stage, sec in timings.items():
        print(f"{stage},{sec:.6f}", file=sys.stderr)
    if args.plot_dir:
        from .report import plot_grid, plot_timings

        os.makedirs(args.plot_dir, exist_ok=True)
        plot_grid(report, os.path.join(args.plot_dir, "grid_cv_error.png"))
        plot_timings(timings, os.path.join(args.plot_dir, "grid_timings.png"))
    return 0


COMMANDS = {"train": cmd_train, "predict": cmd_predict, "cv": cmd_cv, "grid": cmd_grid}


RANGE_FLAGS = ("--log2c", "--log2g")


def _join_range_values(argv: list[str]) -> list[str]:
    # argparse would read "-9:-5" as an option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in RANGE_FLAGS:
            out.append(f"{tok}={next(it, '')}")
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_range_values(sys.argv[1:] if argv is None else list(argv)))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"lpdsvm {args.command}: error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
