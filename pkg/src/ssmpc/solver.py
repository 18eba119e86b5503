"""Finite-horizon input-sequence optimizer and its brute-force oracle.

Direct single shooting: the decision vector is the acceleration sequence
u(0..n-1). Gradients are central differences; constraint handling is an
exact penalty plus box projection. The problem object supplies a batched
objective so gradient and line-search evaluations vectorize.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

PENALTY_WEIGHT = 1e4
FEAS_TOL = 1e-3
GRAD_STEP = 1e-4
STEP_TOL = 1e-6
F_TOL = 1e-7
MAX_ITER = 200
ORACLE_BUDGET = int(1e7)


@dataclass
class SolveReport:
    u_seq: np.ndarray
    objective: float
    iterations: int
    converged: bool
    violation_max: float
    wall_time: float

    @property
    def feasible(self) -> bool:
        return self.violation_max <= FEAS_TOL


def finite_diff_gradient(objective: Callable[[np.ndarray], float],
                         u_seq: np.ndarray, h: float) -> np.ndarray:
    """Central-difference gradient; non-finite probes zero that coordinate."""
    if h <= 0:
        raise ValueError("h must be positive")
    u = np.asarray(u_seq, dtype=float)
    g = np.zeros_like(u)
    for i in range(len(u)):
        up, dn = u.copy(), u.copy()
        up[i] += h
        dn[i] -= h
        fp, fm = objective(up), objective(dn)
        if np.isfinite(fp) and np.isfinite(fm):
            g[i] = (fp - fm) / (2.0 * h)
    return g


def _batched_gradient(objective_batch, u: np.ndarray, h: float) -> np.ndarray:
    n = len(u)
    probes = np.tile(u, (2 * n, 1))
    idx = np.arange(n)
    probes[idx, idx] += h
    probes[n + idx, idx] -= h
    vals = objective_batch(probes)
    g = (vals[:n] - vals[n:]) / (2.0 * h)
    return np.where(np.isfinite(g), g, 0.0)


def _descend(problem, u0: np.ndarray) -> tuple[np.ndarray, float, int]:
    """Projected gradient descent with backtracking line search from u0.

    The accepted objective sequence is monotone non-increasing; iteration
    stops at MAX_ITER, at a sub-STEP_TOL move, at a relative objective
    improvement below F_TOL, or when no decreasing step is found.
    """
    lo, hi = problem.a_min, problem.a_max
    u = np.clip(np.asarray(u0, dtype=float), lo, hi)
    f = float(problem.objective_batch(u[None, :])[0])
    if not np.isfinite(f):
        return u, f, 0

    step0 = 1.0
    iterations = 0
    for iterations in range(1, MAX_ITER + 1):
        g = _batched_gradient(problem.objective_batch, u, GRAD_STEP)
        if not np.any(g):
            break
        scales = step0 * 2.0 ** np.arange(5, -19, -1.0)
        cands = np.clip(u[None, :] - scales[:, None] * g[None, :], lo, hi)
        vals = problem.objective_batch(cands)
        vals = np.where(np.isfinite(vals), vals, np.inf)
        k = int(np.argmin(vals))
        if not vals[k] < f:
            break
        step0 = max(scales[k], 1e-8)
        u_new, f_new = cands[k], float(vals[k])
        move = float(np.max(np.abs(u_new - u)))
        gain = f - f_new
        u, f = u_new, f_new
        if move < STEP_TOL or gain < F_TOL * (1.0 + abs(f)):
            break
    return u, f, iterations


def solve(problem, warm_start: Optional[np.ndarray] = None) -> SolveReport:
    """Multi-start projected gradient descent.

    Descends from the warm start (or zeros) and from the saturated
    full-throttle sequence — the penalty landscape splits into a cautious
    basin and a committed basin separated by a constraint barrier, and a
    single start only ever finds one of them. The saturated full-brake
    sequence is tried as a rescue when both results are still infeasible
    (it is feasible whenever any input is, in the problems at hand).
    Returns the best point found, preferring feasibility over objective.
    """
    t0 = time.perf_counter()
    n = problem.n
    starts = [np.zeros(n) if warm_start is None else np.asarray(warm_start, dtype=float),
              np.full(n, problem.a_max),
              np.full(n, problem.a_min)]

    best = None  # ((unusable, objective), u, objective, violation)
    total_iters = 0
    for k, u0 in enumerate(starts):
        if k == 2 and not best[0][0]:
            break  # brake rescue only needed while everything is infeasible
        u, f, iters = _descend(problem, u0)
        total_iters += iters
        viol = float(problem.violation_batch(u[None, :])[0])
        usable = np.isfinite(f) and viol <= FEAS_TOL
        key = (not usable, f if np.isfinite(f) else np.inf)
        if best is None or key < best[0]:
            best = (key, u, f, viol)

    _, u, f, viol = best
    return SolveReport(u_seq=u, objective=f, iterations=total_iters,
                       converged=viol <= FEAS_TOL,
                       violation_max=viol,
                       wall_time=time.perf_counter() - t0)


def grid_oracle(problem, levels: int) -> SolveReport:
    """Exhaustive search over a uniform input grid; the verification oracle.

    Returns the feasible minimum, or a non-converged report carrying the
    least-infeasible point when no grid point is feasible.
    """
    t0 = time.perf_counter()
    n = problem.n
    total = levels ** n
    if total > ORACLE_BUDGET:
        raise ValueError(f"grid of {total} points exceeds oracle budget {ORACLE_BUDGET}")
    axis = np.linspace(problem.a_min, problem.a_max, levels)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    U = np.stack([g.ravel() for g in grids], axis=1)

    best_val, best_u, best_viol = np.inf, None, np.inf
    min_viol, min_viol_u = np.inf, U[0]
    chunk = 200_000
    for s in range(0, total, chunk):
        block = U[s:s + chunk]
        vals = problem.objective_batch(block)
        viols = problem.violation_batch(block)
        feas = viols <= FEAS_TOL
        if np.any(feas):
            i = int(np.argmin(np.where(feas, vals, np.inf)))
            if vals[i] < best_val:
                best_val, best_u, best_viol = float(vals[i]), block[i].copy(), float(viols[i])
        j = int(np.argmin(viols))
        if viols[j] < min_viol:
            min_viol, min_viol_u = float(viols[j]), block[j].copy()

    wall = time.perf_counter() - t0
    if best_u is not None:
        return SolveReport(best_u, best_val, total, True, best_viol, wall)
    val = float(problem.objective_batch(min_viol_u[None, :])[0])
    return SolveReport(min_viol_u, val, total, False, min_viol, wall)
