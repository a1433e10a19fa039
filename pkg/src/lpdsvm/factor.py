"""Low-rank kernel factor G with G G^T approximating the kernel matrix.

Landmarks are a uniform random subset of the training points. With ``K``
the landmark kernel matrix and ``K = U D U^T`` its eigendecomposition, the
factor is ``G = Z L`` where ``Z`` holds kernels between all points and the
landmarks and ``L = U D^{-1/2}`` restricted to the retained spectrum.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dataio import Dataset
from .kernel import KernelParams, kernel_block, kernel_chunk, row_sq_norms, _align

DEFAULT_TAU_REL = 1e-12
DEFAULT_CHUNK_SIZE = 4096


class EigenError(RuntimeError):
    pass


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


@dataclass(frozen=True)
class LowRankFactor:
    landmarks: Dataset
    landmark_ids: np.ndarray
    L: np.ndarray
    G: np.ndarray
    kernel_params: KernelParams
    spectrum: Spectrum

    @property
    def B(self) -> int:
        return self.L.shape[0]

    @property
    def B_eff(self) -> int:
        return self.L.shape[1]


def select_landmarks(n: int, B: int, seed: int) -> np.ndarray:
    """``min(B, n)`` distinct row indices, uniform without replacement."""
    if B < 1:
        raise ValueError("budget B must be at least 1")
    if n < 1:
        raise ValueError("cannot select landmarks from an empty dataset")
    rng = np.random.default_rng(seed)
    return np.sort(rng.choice(n, size=min(B, n), replace=False))


def eig_sym(K: np.ndarray) -> Spectrum:
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("eig_sym needs a square matrix")
    scale = max(1.0, float(np.abs(K).max(initial=0.0)))
    if np.abs(K - K.T).max(initial=0.0) > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    try:
        vals, vecs = np.linalg.eigh(0.5 * (K + K.T))
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigendecomposition did not converge: {exc}") from exc
    order = np.argsort(vals)[::-1]
    return Spectrum(vals[order], np.ascontiguousarray(vecs[:, order]))


def truncate_spectrum(spectrum: Spectrum, tau_rel: float = DEFAULT_TAU_REL) -> np.ndarray:
    """Indices of eigenvalues above ``tau_rel`` times the largest one."""
    lam = spectrum.eigenvalues
    if lam.size == 0 or lam[0] <= 0:
        raise ValueError("kernel matrix has no positive eigenvalue")
    return np.flatnonzero(lam > tau_rel * lam[0])


def build_L(spectrum: Spectrum, retained) -> np.ndarray:
    retained = np.asarray(retained, dtype=np.int64)
    lam = spectrum.eigenvalues[retained]
    if np.any(lam <= 0):
        raise ValueError("retained eigenvalues must be strictly positive")
    return spectrum.eigenvectors[:, retained] / np.sqrt(lam)[None, :]


def compute_G(
    dataset: Dataset,
    landmarks: Dataset,
    L: np.ndarray,
    params: KernelParams,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int = 1,
    norms: np.ndarray | None = None,
) -> np.ndarray:
    """``G = Z L`` computed in row chunks; chunks may run on several threads.

    Each chunk writes its own slice of the output, so the result does not
    depend on ``threads``.
    """
    if chunk_size < 1:
        raise ValueError("chunk_size must be at least 1")
    X, M = _align(dataset.X, landmarks.X)
    n = X.shape[0]
    nx = row_sq_norms(X) if norms is None else norms
    nm = row_sq_norms(M)
    Mt = M.T.tocsc()
    G = np.empty((n, L.shape[1]))

    def work(lo):
        hi = min(lo + chunk_size, n)
        Z = kernel_chunk(X[lo:hi], Mt, nx[lo:hi], nm, params.gamma)
        G[lo:hi] = Z @ L

    starts = range(0, n, chunk_size)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(work, starts))
    else:
        for lo in starts:
            work(lo)
    return G


def build_factor(
    dataset: Dataset,
    B: int,
    params: KernelParams,
    seed: int = 0,
    tau_rel: float = DEFAULT_TAU_REL,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    threads: int = 1,
    landmark_ids=None,
    timings: dict | None = None,
) -> LowRankFactor:
    """Run the whole first stage. ``timings`` receives per-step seconds."""
    import time

    t0 = time.perf_counter()
    ids = select_landmarks(dataset.n, B, seed) if landmark_ids is None else np.asarray(landmark_ids)
    landmarks = dataset.subset(ids)
    K = kernel_block(landmarks, landmarks, params)
    spectrum = eig_sym(K)
    L = build_L(spectrum, truncate_spectrum(spectrum, tau_rel))
    t1 = time.perf_counter()
    G = compute_G(dataset, landmarks, L, params, chunk_size=chunk_size, threads=threads)
    t2 = time.perf_counter()
    if timings is not None:
        timings["preparation"] = timings.get("preparation", 0.0) + (t1 - t0)
        timings["G computation"] = timings.get("G computation", 0.0) + (t2 - t1)
    return LowRankFactor(landmarks, ids, L, G, params, spectrum)
