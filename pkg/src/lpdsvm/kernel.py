"""Gaussian kernel evaluation, scalar and batched over sparse rows."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dataio import Dataset, SparseVector, squared_distance

KERNEL_KINDS = ("gaussian",)


@dataclass(frozen=True)
class KernelParams:
    gamma: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma}")


def gaussian(a: SparseVector, b: SparseVector, params: KernelParams) -> float:
    return math.exp(-params.gamma * squared_distance(a, b))


def _as_csr(rows) -> sp.csr_matrix:
    if isinstance(rows, Dataset):
        return rows.X
    if sp.issparse(rows):
        return rows.tocsr()
    from .dataio import from_points

    return from_points(list(rows)).X


def _align(A: sp.csr_matrix, B: sp.csr_matrix) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    # missing trailing features are implicit zeros
    d = max(A.shape[1], B.shape[1])
    if A.shape[1] < d:
        A = sp.csr_matrix((A.data, A.indices, A.indptr), shape=(A.shape[0], d))
    if B.shape[1] < d:
        B = sp.csr_matrix((B.data, B.indices, B.indptr), shape=(B.shape[0], d))
    return A, B


def row_sq_norms(X: sp.csr_matrix) -> np.ndarray:
    return np.asarray(X.multiply(X).sum(axis=1)).ravel()


def kernel_block(
    rows_a,
    rows_b,
    params: KernelParams,
    norms_a: np.ndarray | None = None,
    norms_b: np.ndarray | None = None,
    chunk_size: int = 4096,
) -> np.ndarray:
    """Dense block ``K[i, j] = exp(-gamma * |a_i - b_j|^2)``.

    Distances come from ``|a|^2 + |b|^2 - 2 <a, b>`` with a sparse product
    core, processed ``chunk_size`` rows of ``rows_a`` at a time. Cached
    squared norms may be passed in.
    """
    A, B = _align(_as_csr(rows_a), _as_csr(rows_b))
    na = row_sq_norms(A) if norms_a is None else np.asarray(norms_a, dtype=np.float64)
    nb = row_sq_norms(B) if norms_b is None else np.asarray(norms_b, dtype=np.float64)
    out = np.empty((A.shape[0], B.shape[0]))
    Bt = B.T.tocsc()
    for lo in range(0, A.shape[0], max(1, chunk_size)):
        hi = min(lo + chunk_size, A.shape[0])
        out[lo:hi] = kernel_chunk(A[lo:hi], Bt, na[lo:hi], nb, params.gamma)
    return out


def kernel_chunk(A, Bt, na, nb, gamma: float) -> np.ndarray:
    inner = (A @ Bt).toarray()
    d2 = na[:, None] + nb[None, :] - 2.0 * inner
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2, out=d2)
