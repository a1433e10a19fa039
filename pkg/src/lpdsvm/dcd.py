"""Dual coordinate ascent for the bias-free SVM dual on rows of a factor G.

The dual is ``max_{0 <= alpha <= C} sum(alpha) - 1/2 |w|^2`` with
``w = sum_i alpha_i y_i G_i``. Variables are updated one at a time by the
clipped Newton step; variables stuck at a bound for ``k`` visits in a row
are shrunk away and periodically re-checked.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

DEFAULT_EPS = 1e-3
DEFAULT_MAX_EPOCHS = 1000
DEFAULT_SHRINK_K = 5
DEFAULT_ETA = 0.05
DEGENERATE_Q = 1e-12


@dataclass
class BinaryProblem:
    row_ids: np.ndarray
    y: np.ndarray
    C: float
    q_diag: np.ndarray

    @property
    def n(self) -> int:
        return self.row_ids.size


@dataclass
class DualState:
    alpha: np.ndarray
    w: np.ndarray
    active: np.ndarray
    stall_count: np.ndarray
    steps_since_reactivation: int = 0

    @classmethod
    def cold(cls, problem: BinaryProblem, dim: int) -> "DualState":
        m = problem.n
        return cls(np.zeros(m), np.zeros(dim), np.ones(m, dtype=np.bool_), np.zeros(m, dtype=np.int64))


@dataclass
class SolveReport:
    epochs: int = 0
    coordinate_visits: int = 0
    reactivation_checks: int = 0
    reactivation_passes: int = 0
    final_violation: float = np.inf
    dual_objective: float = 0.0
    shrunk_peak: int = 0
    converged: bool = False
    warnings: list = field(default_factory=list)


def make_problem(G: np.ndarray, row_ids, y, C: float) -> BinaryProblem:
    row_ids = np.ascontiguousarray(row_ids, dtype=np.int64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if row_ids.shape != y.shape:
        raise ValueError("row_ids and y differ in length")
    if not np.all(np.abs(y) == 1):
        raise ValueError("labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("binary problem needs both classes")
    if not C > 0:
        raise ValueError("C must be positive")
    return BinaryProblem(row_ids, y, float(C), _row_sq_norms(G, row_ids))


@njit(cache=True, nogil=True)
def _row_sq_norms(G, rows):
    out = np.empty(rows.size)
    for t in range(rows.size):
        r = G[rows[t]]
        out[t] = r @ r
    return out


@njit(cache=True, nogil=True)
def _rebuild_w(G, rows, y, alpha):
    w = np.zeros(G.shape[1])
    for t in range(rows.size):
        if alpha[t] != 0.0:
            w += (alpha[t] * y[t]) * G[rows[t]]
    return w


@njit(cache=True, nogil=True)
def _violation(g, a, C):
    if a <= 0.0:
        return max(g, 0.0)
    if a >= C:
        return max(-g, 0.0)
    return abs(g)


@njit(cache=True, nogil=True)
def _step(G, rows, y, qd, C, alpha, w, i):
    """Clipped Newton step on variable i; returns (gradient, delta)."""
    r = G[rows[i]]
    g = 1.0 - y[i] * (r @ w)
    a = alpha[i]
    if qd[i] > DEGENERATE_Q:
        a_new = min(max(a + g / qd[i], 0.0), C)
    elif g > 0.0:
        a_new = C
    elif g < 0.0:
        a_new = 0.0
    else:
        a_new = a
    delta = a_new - a
    if delta != 0.0:
        alpha[i] = a_new
        w += (delta * y[i]) * r
    return g, delta


@njit(cache=True, nogil=True)
def _epoch(G, rows, y, qd, C, alpha, w, order, active, stall, k):
    vmax = 0.0
    for t in range(order.size):
        i = order[t]
        g, delta = _step(G, rows, y, qd, C, alpha, w, i)
        v = _violation(g, alpha[i] - delta, C)
        if v > vmax:
            vmax = v
        a = alpha[i]
        if delta == 0.0 and (a == 0.0 or a == C):
            stall[i] += 1
            if stall[i] >= k:
                active[i] = False
        else:
            stall[i] = 0
    return vmax


@njit(cache=True, nogil=True)
def _reactivate(G, rows, y, C, alpha, w, active, stall, eps):
    count = 0
    vmax = 0.0
    for i in range(rows.size):
        if active[i]:
            continue
        g = 1.0 - y[i] * (G[rows[i]] @ w)
        v = _violation(g, alpha[i], C)
        if v > vmax:
            vmax = v
        if v >= eps:
            active[i] = True
            stall[i] = 0
            count += 1
    return count, vmax


def dual_objective(state: DualState) -> float:
    return float(state.alpha.sum() - 0.5 * (state.w @ state.w))


def recompute_w(problem: BinaryProblem, G: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    return _rebuild_w(G, problem.row_ids, problem.y, np.ascontiguousarray(alpha, dtype=np.float64))


def coordinate_step(i: int, state: DualState, problem: BinaryProblem, G: np.ndarray) -> float:
    """Update variable ``i`` in place; returns the change of alpha_i."""
    _, delta = _step(G, problem.row_ids, problem.y, problem.q_diag, problem.C, state.alpha, state.w, i)
    return float(delta)


def violations(state: DualState, problem: BinaryProblem, G: np.ndarray) -> np.ndarray:
    """Projected-gradient violation of every variable (used by tests and reports)."""
    g = 1.0 - problem.y * (G[problem.row_ids] @ state.w)
    a, C = state.alpha, problem.C
    return np.where(a <= 0, np.maximum(g, 0), np.where(a >= C, np.maximum(-g, 0), np.abs(g)))


def shrink_rule(i: int, delta: float, state: DualState, problem: BinaryProblem, k: int = DEFAULT_SHRINK_K) -> bool:
    """Update the stall counter of ``i`` after a visit; False once it is shrunk."""
    a = state.alpha[i]
    if delta == 0.0 and (a == 0.0 or a == problem.C):
        state.stall_count[i] += 1
        if state.stall_count[i] >= k:
            state.active[i] = False
    else:
        state.stall_count[i] = 0
    return bool(state.active[i])


def epoch_order(active: np.ndarray, seed: int, problem_id: int, epoch: int) -> np.ndarray:
    rng = np.random.default_rng([seed, problem_id, epoch])
    return rng.permutation(np.flatnonzero(active))


def epoch(
    state: DualState,
    problem: BinaryProblem,
    G: np.ndarray,
    order: np.ndarray,
    k: int = DEFAULT_SHRINK_K,
) -> float:
    """Visit ``order`` (the shuffled active set) once; returns max violation."""
    return float(
        _epoch(G, problem.row_ids, problem.y, problem.q_diag, problem.C, state.alpha, state.w,
               np.ascontiguousarray(order, dtype=np.int64), state.active, state.stall_count, k)
    )


def reactivation_pass(state: DualState, problem: BinaryProblem, G: np.ndarray, eps: float) -> tuple[int, float]:
    """Re-check every shrunk variable; returns (reactivated count, max inactive violation)."""
    count, vmax = _reactivate(G, problem.row_ids, problem.y, problem.C, state.alpha, state.w,
                              state.active, state.stall_count, eps)
    return int(count), float(vmax)


def solve_binary(
    problem: BinaryProblem,
    G: np.ndarray,
    eps: float = DEFAULT_EPS,
    max_epochs: int = DEFAULT_MAX_EPOCHS,
    warm_alpha: np.ndarray | None = None,
    seed: int = 0,
    problem_id: int = 0,
    shrinking: bool = True,
    k: int = DEFAULT_SHRINK_K,
    eta: float = DEFAULT_ETA,
):
    """Solve one binary problem to max KKT violation below ``eps``.

    Returns ``(alpha, w, report)``. Convergence is only declared after a full
    pass over the shrunk variables reactivates nothing. If ``max_epochs`` runs
    out the current (feasible) state is returned with ``report.converged``
    set to False. ``max_epochs`` counts full-pass equivalents, i.e. the
    budget is ``max_epochs * n`` coordinate visits, since sweeps over a
    shrunk active set are much cheaper than full ones.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if k < 1:
        raise ValueError("shrink limit k must be at least 1")
    state = DualState.cold(problem, G.shape[1])
    if warm_alpha is not None:
        state.alpha = np.clip(np.asarray(warm_alpha, dtype=np.float64), 0.0, problem.C)
        state.w = recompute_w(problem, G, state.alpha)
    k_eff = k if shrinking else np.iinfo(np.int64).max
    report = SolveReport()
    m = problem.n
    visit_budget = max_epochs * m

    while True:
        active_ids = np.flatnonzero(state.active)
        if active_ids.size:
            if report.coordinate_visits >= visit_budget:
                break
            order = epoch_order(state.active, seed, problem_id, report.epochs)
            vmax = epoch(state, problem, G, order, k_eff)
            report.epochs += 1
            report.coordinate_visits += order.size
            state.steps_since_reactivation += order.size
        else:
            vmax = 0.0
        n_inactive = m - int(state.active.sum())
        report.shrunk_peak = max(report.shrunk_peak, n_inactive)

        if vmax < eps:
            count, inactive_v = reactivation_pass(state, problem, G, eps)
            report.reactivation_checks += n_inactive
            report.reactivation_passes += 1
            state.steps_since_reactivation = 0
            if count == 0:
                report.final_violation = max(vmax, inactive_v)
                report.converged = True
                break
        elif n_inactive and state.steps_since_reactivation * eta / (1.0 - eta) >= n_inactive:
            reactivation_pass(state, problem, G, eps)
            report.reactivation_checks += n_inactive
            report.reactivation_passes += 1
            state.steps_since_reactivation = 0

    if not report.converged:
        state.active[:] = True
        report.final_violation = float(violations(state, problem, G).max(initial=0.0))
        report.warnings.append(f"max_epochs={max_epochs} reached, violation {report.final_violation:.3g}")
    report.dual_objective = dual_objective(state)
    return state.alpha, state.w, report
