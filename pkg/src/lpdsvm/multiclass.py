"""One-versus-one training over a shared factor, and voting prediction."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import dcd
from .dataio import Dataset, LabelMap, build_label_map
from .factor import LowRankFactor
from .kernel import KernelParams, kernel_block


@dataclass(frozen=True)
class PairSpec:
    class_a: int
    class_b: int
    row_ids: np.ndarray
    y: np.ndarray  # +1 for class_a, -1 for class_b


@dataclass
class PairResult:
    spec: PairSpec
    alpha: np.ndarray
    w: np.ndarray
    report: dcd.SolveReport


@dataclass
class SolverOptions:
    eps: float = dcd.DEFAULT_EPS
    max_epochs: int = dcd.DEFAULT_MAX_EPOCHS
    shrinking: bool = True
    k: int = dcd.DEFAULT_SHRINK_K
    eta: float = dcd.DEFAULT_ETA


@dataclass
class OvoModel:
    label_map: LabelMap
    kernel_params: KernelParams
    landmarks: Dataset
    L: np.ndarray
    betas: np.ndarray  # (n_pairs, B), lexicographic pair order
    C: float
    eps: float
    seed: int
    nonconverged: list = field(default_factory=list)
    pair_results: list | None = field(default=None, repr=False, compare=False)

    @property
    def n_classes(self) -> int:
        return len(self.label_map)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return ovo_pairs(self.n_classes)


def ovo_pairs(c: int) -> list[tuple[int, int]]:
    """All class pairs ``(a, b)`` with ``a < b`` in lexicographic order."""
    if c < 2:
        raise ValueError("one-versus-one needs at least two classes")
    return [(a, b) for a in range(c) for b in range(a + 1, c)]


def pair_spec(class_idx: np.ndarray, a: int, b: int) -> PairSpec:
    """Rows of classes ``a`` and ``b``; entries of ``class_idx`` < 0 are ignored."""
    rows = np.flatnonzero((class_idx == a) | (class_idx == b))
    y = np.where(class_idx[rows] == a, 1.0, -1.0)
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError(f"pair ({a}, {b}) lacks one of its classes")
    return PairSpec(a, b, rows, y)


def train_pairs(
    G: np.ndarray,
    class_idx: np.ndarray,
    n_classes: int,
    C: float,
    opts: SolverOptions | None = None,
    seed: int = 0,
    warm: dict | None = None,
    threads: int = 1,
    problem_id_offset: int = 0,
) -> list[PairResult]:
    """Solve every pair on the rows of ``G``; ``warm`` maps pair -> alpha.

    Each pair has a fixed seed slot and result slot, so output does not
    depend on ``threads``.
    """
    opts = opts or SolverOptions()
    pairs = ovo_pairs(n_classes)
    results: list[PairResult | None] = [None] * len(pairs)

    def work(p):
        a, b = pairs[p]
        spec = pair_spec(class_idx, a, b)
        problem = dcd.make_problem(G, spec.row_ids, spec.y, C)
        alpha, w, report = dcd.solve_binary(
            problem, G, eps=opts.eps, max_epochs=opts.max_epochs,
            warm_alpha=None if warm is None else warm.get((a, b)),
            seed=seed, problem_id=problem_id_offset + p,
            shrinking=opts.shrinking, k=opts.k, eta=opts.eta,
        )
        results[p] = PairResult(spec, alpha, w, report)

    if threads > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, range(len(pairs))))
    else:
        for p in range(len(pairs)):
            work(p)
    return results


def ovo_train(
    factor: LowRankFactor,
    raw_labels,
    C: float,
    opts: SolverOptions | None = None,
    seed: int = 0,
    warm: dict | None = None,
    threads: int = 1,
    label_text=(),
) -> OvoModel:
    opts = opts or SolverOptions()
    label_map = build_label_map(raw_labels, label_text)
    if len(label_map) < 2:
        raise ValueError("training data contains a single class")
    class_idx = label_map.encode(raw_labels)
    results = train_pairs(factor.G, class_idx, len(label_map), C, opts, seed, warm, threads)
    betas = np.array([factor.L @ r.w for r in results])
    nonconverged = [(r.spec.class_a, r.spec.class_b) for r in results if not r.report.converged]
    return OvoModel(label_map, factor.kernel_params, factor.landmarks, factor.L, betas, float(C),
                    opts.eps, seed, nonconverged, results)


def vote(decisions: np.ndarray, n_classes: int) -> np.ndarray:
    """Class index per row of ``decisions`` (n_points, n_pairs).

    Strictly positive values vote for the smaller class of the pair; ties
    in the vote go to the smallest class index.
    """
    decisions = np.atleast_2d(decisions)
    votes = np.zeros((decisions.shape[0], n_classes), dtype=np.int64)
    for p, (a, b) in enumerate(ovo_pairs(n_classes)):
        pos = decisions[:, p] > 0
        votes[:, a] += pos
        votes[:, b] += ~pos
    return np.argmax(votes, axis=1)


def decision_values(model: OvoModel, points, chunk_size: int = 4096) -> np.ndarray:
    """``<z(x), beta>`` for every point and pair, z the kernels to the landmarks."""
    Z = kernel_block(points, model.landmarks, model.kernel_params, chunk_size=chunk_size)
    return Z @ model.betas.T


def predict_indices(model: OvoModel, points, chunk_size: int = 4096, threads: int = 1) -> np.ndarray:
    from .dataio import from_points

    data = points if isinstance(points, Dataset) else from_points(list(points))
    if data.n == 0:
        return np.zeros(0, dtype=np.int64)
    starts = list(range(0, data.n, chunk_size))

    def work(lo):
        block = data.subset(np.arange(lo, min(lo + chunk_size, data.n)))
        return vote(decision_values(model, block, chunk_size), model.n_classes)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(lo) for lo in starts]
    return np.concatenate(parts)


def ovo_predict(model: OvoModel, points, chunk_size: int = 4096, threads: int = 1) -> np.ndarray:
    """Predicted raw labels, in input order."""
    return model.label_map.decode(predict_indices(model, points, chunk_size, threads))
