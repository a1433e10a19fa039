"""Sparse labelled datasets in the LIBSVM text format."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.sparse as sp


class FormatError(ValueError):
    """Malformed LIBSVM input; carries the 1-based line number."""

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class SparseVector:
    """A point as ascending 0-based feature indices with their values."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-d arrays of equal length")
        if idx.size and (idx[0] < 0 or np.any(np.diff(idx) <= 0)):
            raise ValueError("indices must be non-negative and strictly ascending")
        if not np.all(np.isfinite(val)):
            raise ValueError("values must be finite")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)

    @classmethod
    def from_dict(cls, d: dict[int, float]) -> "SparseVector":
        """Build from ``{0-based index: value}``."""
        keys = sorted(d)
        return cls(np.array(keys, dtype=np.int64), np.array([d[k] for k in keys], dtype=np.float64))

    def to_dict(self) -> dict[int, float]:
        return {int(i): float(v) for i, v in zip(self.indices, self.values) if v != 0.0}

    def sq_norm(self) -> float:
        return float(self.values @ self.values)

    def __len__(self):
        return self.indices.size


@dataclass(frozen=True)
class Dataset:
    """Labelled points stored row-wise as a CSR matrix.

    ``dim`` is the largest 1-based feature index seen (or the override given
    at parse time); internally columns are 0-based so ``X.shape[1] == dim``.
    """

    X: sp.csr_matrix
    raw_labels: np.ndarray
    label_text: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if self.X.shape[0] != len(self.raw_labels):
            raise ValueError("number of points and labels differ")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, i: int) -> SparseVector:
        lo, hi = self.X.indptr[i], self.X.indptr[i + 1]
        return SparseVector(self.X.indices[lo:hi], self.X.data[lo:hi])

    @property
    def points(self) -> list[SparseVector]:
        return [self[i] for i in range(self.n)]

    def subset(self, rows: Sequence[int]) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        text = tuple(self.label_text[i] for i in rows) if self.label_text else ()
        return Dataset(self.X[rows], self.raw_labels[rows], text)

    def sq_norms(self) -> np.ndarray:
        return np.asarray(self.X.multiply(self.X).sum(axis=1)).ravel()


def from_points(points: Sequence[SparseVector], labels: Iterable[float] = (), dim: int | None = None) -> Dataset:
    """Assemble a Dataset from SparseVectors (labels default to zeros)."""
    labels = np.asarray(list(labels), dtype=np.float64)
    if labels.size == 0:
        labels = np.zeros(len(points))
    seen = max((int(p.indices[-1]) + 1 for p in points if len(p)), default=0)
    dim = seen if dim is None else max(dim, seen)
    indptr = np.zeros(len(points) + 1, dtype=np.int64)
    indptr[1:] = np.cumsum([len(p) for p in points])
    if points:
        indices = np.concatenate([p.indices for p in points])
        data = np.concatenate([p.values for p in points])
    else:
        indices = np.zeros(0, dtype=np.int64)
        data = np.zeros(0)
    X = sp.csr_matrix((data, indices, indptr), shape=(len(points), dim))
    return Dataset(X, labels)


def _parse_real(tok: str, lineno: int, what: str) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise FormatError(lineno, f"non-numeric {what} {tok!r}") from None
    if not math.isfinite(v):
        raise FormatError(lineno, f"non-finite {what} {tok!r}")
    return v


def parse_libsvm(stream: TextIO | Iterable[str], dim: int | None = None) -> Dataset:
    """Read ``<label> <idx>:<val> ...`` lines.

    Empty lines are skipped, ``#`` starts a comment, explicit zeros are
    dropped. ``dim`` widens the feature space beyond the largest index seen,
    e.g. for test files lacking trailing features.
    """
    labels: list[float] = []
    texts: list[str] = []
    indptr = [0]
    indices: list[int] = []
    data: list[float] = []
    max_idx = 0
    for lineno, line in enumerate(stream, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        labels.append(_parse_real(tokens[0], lineno, "label"))
        texts.append(tokens[0])
        prev = 0
        for tok in tokens[1:]:
            key, colon, val = tok.partition(":")
            if not colon:
                raise FormatError(lineno, f"malformed pair {tok!r}")
            try:
                idx = int(key)
            except ValueError:
                raise FormatError(lineno, f"malformed index {key!r}") from None
            if idx <= 0:
                raise FormatError(lineno, f"index {idx} must be positive")
            if idx <= prev:
                raise FormatError(lineno, f"indices not ascending ({idx} after {prev})")
            prev = idx
            v = _parse_real(val, lineno, "value")
            if v != 0.0:
                indices.append(idx - 1)
                data.append(v)
        max_idx = max(max_idx, prev)
        indptr.append(len(indices))
    if dim is not None and dim < max_idx:
        raise ValueError(f"dim override {dim} smaller than largest index {max_idx}")
    width = max_idx if dim is None else dim
    X = sp.csr_matrix(
        (np.array(data, dtype=np.float64), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
        shape=(len(labels), width),
    )
    return Dataset(X, np.array(labels, dtype=np.float64), tuple(texts))


def load_libsvm(path, dim: int | None = None) -> Dataset:
    with open(path, encoding="utf-8", newline=None) as f:
        return parse_libsvm(f, dim=dim)


def format_real(x: float) -> str:
    """Shortest text that round-trips a double (at most 17 significant digits)."""
    return repr(float(x)) if not float(x).is_integer() or abs(x) >= 1e16 else str(int(x))


def write_libsvm(dataset: Dataset, sink: TextIO) -> None:
    for i in range(dataset.n):
        p = dataset[i]
        label = dataset.label_text[i] if dataset.label_text else format_real(dataset.raw_labels[i])
        pairs = " ".join(f"{j + 1}:{format_real(v)}" for j, v in zip(p.indices, p.values))
        sink.write(f"{label} {pairs}".rstrip() + "\n")


@dataclass(frozen=True)
class LabelMap:
    classes: tuple[float, ...]
    texts: tuple[str, ...] = ()  # display text per class, as first seen in the input

    @property
    def to_index(self) -> dict[float, int]:
        return {c: i for i, c in enumerate(self.classes)}

    def __len__(self):
        return len(self.classes)

    def encode(self, raw_labels) -> np.ndarray:
        """Class indices for ``raw_labels``; unseen labels map to -1."""
        m = self.to_index
        return np.array([m.get(float(y), -1) for y in raw_labels], dtype=np.int64)

    def decode(self, idx) -> np.ndarray:
        return np.asarray(self.classes, dtype=np.float64)[np.asarray(idx)]

    def text(self, i: int) -> str:
        return self.texts[i] if self.texts else format_real(self.classes[i])


def build_label_map(raw_labels, label_text=()) -> LabelMap:
    raw = [float(y) for y in raw_labels]
    if not raw:
        raise ValueError("cannot build a label map from an empty label sequence")
    classes = tuple(sorted(set(raw)))
    if not label_text:
        return LabelMap(classes)
    first: dict[float, str] = {}
    for y, t in zip(raw, label_text):
        first.setdefault(y, t)
    return LabelMap(classes, tuple(first[c] for c in classes))


def squared_distance(a: SparseVector, b: SparseVector) -> float:
    """Squared Euclidean distance by merging the two sorted index lists."""
    i = j = 0
    na, nb = len(a), len(b)
    ai, av, bi, bv = a.indices, a.values, b.indices, b.values
    s = 0.0
    while i < na and j < nb:
        if ai[i] == bi[j]:
            d = av[i] - bv[j]
            s += d * d
            i += 1
            j += 1
        elif ai[i] < bi[j]:
            s += av[i] * av[i]
            i += 1
        else:
            s += bv[j] * bv[j]
            j += 1
    s += float(av[i:] @ av[i:]) + float(bv[j:] @ bv[j:])
    return float(s)
