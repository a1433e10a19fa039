"""Cross-validation and (C, gamma) grid search on a shared factor.

The factor is built once per gamma on the full data set and only then split
into folds, so all folds and all values of C reuse the same G. Along an
ascending C ladder every (fold, pair) problem is warm-started from its
solution at the previous C.
"""
from __future__ import annotations

import csv
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .dataio import Dataset, build_label_map
from .factor import DEFAULT_CHUNK_SIZE, DEFAULT_TAU_REL, LowRankFactor, build_factor
from .kernel import KernelParams
from .multiclass import SolverOptions, ovo_pairs, train_pairs, vote

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: np.ndarray
    k: int

    def sizes(self) -> np.ndarray:
        return np.bincount(self.fold_of, minlength=self.k)


def kfold_split(labels, k: int, seed: int = 0, stratified: bool = True) -> FoldAssignment:
    """Assign rows to ``k`` folds.

    Stratified mode shuffles each class separately and deals the classes,
    one after the other, round-robin over the folds.
    """
    labels = np.asarray(labels)
    n = labels.size
    if k < 2:
        raise ValueError("need at least 2 folds")
    if k > n:
        raise ValueError(f"{k} folds requested for {n} points")
    rng = np.random.default_rng(seed)
    if stratified:
        order = np.concatenate([rng.permutation(np.flatnonzero(labels == c)) for c in np.unique(labels)])
    else:
        order = rng.permutation(n)
    fold_of = np.empty(n, dtype=np.int64)
    fold_of[order] = np.arange(n) % k
    return FoldAssignment(fold_of, k)


@dataclass
class CVResult:
    mean_error: float
    fold_errors: list  # None for skipped folds
    fold_epochs: list
    fold_seconds: list
    skipped: list = field(default_factory=list)
    alphas: dict = field(default_factory=dict, repr=False)  # (fold, pair) -> alpha
    dual_objectives: dict = field(default_factory=dict, repr=False)
    binary_solves: int = 0


def cross_validate(
    factor: LowRankFactor | np.ndarray,
    raw_labels,
    folds: FoldAssignment,
    C: float,
    opts: SolverOptions | None = None,
    seed: int = 0,
    warm: dict | None = None,
    threads: int = 1,
) -> CVResult:
    """Train on all folds but one and score the held-out rows through their G rows."""
    G = factor.G if isinstance(factor, LowRankFactor) else factor
    label_map = build_label_map(raw_labels)
    c = len(label_map)
    pairs = ovo_pairs(c)
    class_idx = label_map.encode(raw_labels)
    res = CVResult(np.nan, [], [], [])
    for f in range(folds.k):
        t0 = time.perf_counter()
        held_out = folds.fold_of == f
        train_idx = np.where(held_out, -1, class_idx)
        if np.unique(train_idx[train_idx >= 0]).size < c:
            log.warning("fold %d: training split lacks a class, skipped", f)
            res.skipped.append(f)
            res.fold_errors.append(None)
            res.fold_epochs.append(0)
            res.fold_seconds.append(0.0)
            continue
        fold_warm = None if warm is None else {p: warm[(f, p)] for p in pairs if (f, p) in warm}
        results = train_pairs(G, train_idx, c, C, opts, seed, fold_warm, threads,
                              problem_id_offset=f * len(pairs))
        W = np.array([r.w for r in results])
        test_rows = np.flatnonzero(held_out)
        pred = vote(G[test_rows] @ W.T, c)
        res.fold_errors.append(float(np.mean(pred != class_idx[test_rows])))
        res.fold_epochs.append(sum(r.report.epochs for r in results))
        res.fold_seconds.append(time.perf_counter() - t0)
        res.binary_solves += len(results)
        for p, r in zip(pairs, results):
            res.alphas[(f, p)] = r.alpha
            res.dual_objectives[(f, p)] = r.report.dual_objective
            if not r.report.converged:
                log.warning("fold %d pair %s did not converge", f, p)
    done = [e for e in res.fold_errors if e is not None]
    res.mean_error = float(np.mean(done)) if done else np.nan
    return res


@dataclass
class GridEntry:
    gamma: float
    C: float
    cv: CVResult

    @property
    def error(self) -> float:
        return self.cv.mean_error

    @property
    def epochs(self) -> int:
        return int(sum(self.cv.fold_epochs))

    @property
    def seconds(self) -> float:
        return float(sum(self.cv.fold_seconds))


@dataclass
class GridReport:
    entries: list
    stage1_runs: int
    stage1_seconds: float
    binary_solves: int
    warm_start: bool

    @property
    def best(self) -> GridEntry:
        def key(e):
            err = e.error if np.isfinite(e.error) else np.inf
            return (err, e.C, e.gamma)

        return min(self.entries, key=key)

    def text_table(self) -> str:
        header = f"{'log2(gamma)':>12} {'log2(C)':>8} {'gamma':>12} {'C':>10} {'cv error %':>11} {'epochs':>9} {'seconds':>9}"
        lines = [header, "-" * len(header)]
        best = self.best
        for e in self.entries:
            mark = "  *" if e is best else ""
            lines.append(
                f"{np.log2(e.gamma):12.3g} {np.log2(e.C):8.3g} {e.gamma:12.6g} {e.C:10.6g} "
                f"{100 * e.error:11.3f} {e.epochs:9d} {e.seconds:9.3f}{mark}"
            )
        lines.append(
            f"stage-1 runs: {self.stage1_runs} ({self.stage1_seconds:.3f} s), "
            f"binary solves: {self.binary_solves}, warm starts: {'on' if self.warm_start else 'off'}"
        )
        return "\n".join(lines)

    def write_csv(self, sink) -> None:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(["gamma", "C", "fold", "error", "epochs", "seconds"])
        for e in self.entries:
            for f, (err, ep, sec) in enumerate(zip(e.cv.fold_errors, e.cv.fold_epochs, e.cv.fold_seconds)):
                writer.writerow([repr(e.gamma), repr(e.C), f, "" if err is None else repr(err), ep, f"{sec:.6f}"])


def default_grid(log2_gamma_center: float) -> tuple[list[float], list[float]]:
    gammas = [2.0 ** (log2_gamma_center + d) for d in range(-2, 3)]
    Cs = [2.0 ** e for e in range(10)]
    return gammas, Cs


def grid_search(
    dataset: Dataset,
    B: int,
    gamma_list,
    C_list,
    k: int = 5,
    opts: SolverOptions | None = None,
    seed: int = 0,
    stratified: bool = True,
    warm_start: bool = True,
    threads: int = 1,
    tau_rel: float = DEFAULT_TAU_REL,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> GridReport:
    gamma_list = [float(g) for g in gamma_list]
    C_list = [float(c) for c in C_list]
    if not gamma_list or not C_list:
        raise ValueError("gamma and C lists must be non-empty")
    if any(b <= a for a, b in zip(C_list, C_list[1:])):
        raise ValueError("C values must be strictly ascending")
    folds = kfold_split(dataset.raw_labels, k, seed, stratified)
    entries = []
    stage1_runs = 0
    stage1_seconds = 0.0
    solves = 0
    for gamma in gamma_list:
        t0 = time.perf_counter()
        factor = build_factor(dataset, B, KernelParams(gamma), seed=seed, tau_rel=tau_rel,
                              chunk_size=chunk_size, threads=threads)
        stage1_seconds += time.perf_counter() - t0
        stage1_runs += 1
        warm = None
        for C in C_list:
            cv = cross_validate(factor, dataset.raw_labels, folds, C, opts, seed, warm, threads)
            solves += cv.binary_solves
            entries.append(GridEntry(gamma, C, cv))
            log.info("gamma=%g C=%g cv error %.4f", gamma, C, cv.mean_error)
            if warm_start:
                warm = cv.alphas
    return GridReport(entries, stage1_runs, stage1_seconds, solves, warm_start)
