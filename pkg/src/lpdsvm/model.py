"""Text model files and prediction on data files.

Layout (all reals as ``%.17g`` so doubles round-trip exactly)::

    LPDSVM 1
    kernel gaussian <gamma>
    labels <c> <label text> ...
    training C <C> eps <eps> seed <seed>
    landmarks <B> <dim>
    <B sparse lines, 1-based idx:val>
    L <B> <B_eff>
    <B lines of B_eff reals>
    betas <c(c-1)/2> <B>
    <a> <b> <B reals>
    nonconverged <count>
    <a> <b>
    end
"""
from __future__ import annotations

from typing import TextIO

import numpy as np
import scipy.sparse as sp

from .dataio import Dataset, LabelMap
from .kernel import KernelParams
from .multiclass import OvoModel, ovo_pairs, predict_indices

MAGIC = "LPDSVM"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def _r(x: float) -> str:
    return "%.17g" % x


def _row(values) -> str:
    return " ".join(_r(v) for v in values)


def export_model(model: OvoModel, sink: TextIO) -> int:
    """Write ``model``; returns the number of characters written."""
    out = [f"{MAGIC} {VERSION}", f"kernel {model.kernel_params.kind} {_r(model.kernel_params.gamma)}"]
    texts = [model.label_map.text(i) for i in range(model.n_classes)]
    out.append(f"labels {model.n_classes} " + " ".join(texts))
    out.append(f"training C {_r(model.C)} eps {_r(model.eps)} seed {model.seed}")
    lm = model.landmarks
    out.append(f"landmarks {lm.n} {lm.dim}")
    for i in range(lm.n):
        p = lm[i]
        out.append(" ".join(f"{j + 1}:{_r(v)}" for j, v in zip(p.indices, p.values)))
    out.append(f"L {model.L.shape[0]} {model.L.shape[1]}")
    out.extend(_row(r) for r in model.L)
    out.append(f"betas {model.betas.shape[0]} {model.betas.shape[1]}")
    for (a, b), beta in zip(model.pairs, model.betas):
        out.append(f"{a} {b} {_row(beta)}")
    out.append(f"nonconverged {len(model.nonconverged)}")
    out.extend(f"{a} {b}" for a, b in model.nonconverged)
    out.append("end")
    text = "\n".join(out) + "\n"
    sink.write(text)
    return len(text)


class _Lines:
    def __init__(self, source):
        self.it = iter(source)
        self.lineno = 0

    def next(self, what: str) -> str:
        try:
            line = next(self.it)
        except StopIteration:
            raise ModelFormatError(f"truncated model file: expected {what}") from None
        self.lineno += 1
        return line.rstrip("\r\n")

    def keyed(self, key: str) -> list[str]:
        tokens = self.next(f"'{key}' section").split()
        if not tokens or tokens[0] != key:
            raise ModelFormatError(f"line {self.lineno}: expected '{key}' section")
        return tokens[1:]

    def reals(self, count: int, what: str) -> np.ndarray:
        tokens = self.next(what).split()
        if len(tokens) != count:
            raise ModelFormatError(f"line {self.lineno}: expected {count} values in {what}, got {len(tokens)}")
        return np.array([float(t) for t in tokens])


def import_model(source) -> OvoModel:
    lines = _Lines(source)
    header = lines.next("header").split()
    if len(header) != 2 or header[0] != MAGIC or header[1] != str(VERSION):
        raise ModelFormatError(f"unsupported model header {' '.join(header)!r}, expected '{MAGIC} {VERSION}'")
    kind, gamma = lines.keyed("kernel")
    try:
        params = KernelParams(float(gamma), kind)
    except ValueError as exc:
        raise ModelFormatError(str(exc)) from None
    tok = lines.keyed("labels")
    c = int(tok[0])
    texts = tuple(tok[1:])
    if len(texts) != c:
        raise ModelFormatError("label count mismatch")
    label_map = LabelMap(tuple(float(t) for t in texts), texts)
    tok = lines.keyed("training")
    meta = dict(zip(tok[::2], tok[1::2]))
    B, dim = map(int, lines.keyed("landmarks"))
    indptr, indices, data = [0], [], []
    for _ in range(B):
        for pair in lines.next("landmark line").split():
            j, v = pair.split(":")
            indices.append(int(j) - 1)
            data.append(float(v))
        indptr.append(len(indices))
    X = sp.csr_matrix((np.array(data), np.array(indices, dtype=np.int64), np.array(indptr)), shape=(B, dim))
    landmarks = Dataset(X, np.zeros(B))
    rows, cols = map(int, lines.keyed("L"))
    if rows != B:
        raise ModelFormatError(f"L has {rows} rows but there are {B} landmarks")
    L = np.array([lines.reals(cols, "L row") for _ in range(rows)]).reshape(rows, cols)
    n_pairs, width = map(int, lines.keyed("betas"))
    pairs = ovo_pairs(c) if c >= 2 else []
    if n_pairs != len(pairs):
        raise ModelFormatError(f"{n_pairs} beta vectors for {c} classes, expected {len(pairs)}")
    if width != B:
        raise ModelFormatError(f"beta length {width} differs from landmark count {B}")
    betas = np.empty((n_pairs, B))
    for p, (a, b) in enumerate(pairs):
        v = lines.reals(B + 2, "beta line")
        if (int(v[0]), int(v[1])) != (a, b):
            raise ModelFormatError(f"line {lines.lineno}: expected pair {a} {b}")
        betas[p] = v[2:]
    (count,) = lines.keyed("nonconverged")
    nonconverged = [tuple(map(int, lines.next("pair").split())) for _ in range(int(count))]
    if lines.next("end").strip() != "end":
        raise ModelFormatError("missing end marker")
    return OvoModel(label_map, params, landmarks, L, betas, float(meta["C"]), float(meta["eps"]),
                    int(meta["seed"]), nonconverged)


def save_model(model: OvoModel, path) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        return export_model(model, f)


def load_model(path) -> OvoModel:
    with open(path, encoding="utf-8") as f:
        return import_model(f)


def predict_file(model: OvoModel, dataset: Dataset, sink: TextIO | None = None, threads: int = 1) -> float | None:
    """Write one predicted label per line; returns the error rate, or None for no points."""
    idx = predict_indices(model, dataset, threads=threads)
    if sink is not None:
        for i in idx:
            sink.write(model.label_map.text(i) + "\n")
    if dataset.n == 0:
        return None
    truth = model.label_map.encode(dataset.raw_labels)
    return float(np.mean(idx != truth))
