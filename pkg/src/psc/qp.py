"""Dual box QP with one equality constraint, solved by a two-coordinate
working-set method (maximal violating pair).

The pair-update loop is the hot kernel: it runs jitted under numba unless
PSC_DISABLE_NUMBA=1, in which case a vectorized numpy implementation of the
same iteration is used. Both paths break ties by lowest index and produce
the same iterates.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import _accel

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 10_000_000


class QpError(ValueError):
    """Malformed QP instance."""


@dataclass(frozen=True)
class BoxQP:
    """maximize -1/2 a^T G a + a^T 1  s.t.  a^T y = 0, 0 <= a_i <= upper_i."""

    G: np.ndarray
    y: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        G = np.ascontiguousarray(np.asarray(self.G, dtype=np.float64))
        y = np.asarray(self.y, dtype=np.float64).ravel()
        upper = np.asarray(self.upper, dtype=np.float64).ravel()
        n = y.shape[0]
        if G.shape != (n, n):
            raise QpError(f"G shape {G.shape} does not match n={n}")
        if upper.shape[0] != n:
            raise QpError("upper bound vector length mismatch")
        scale = max(1.0, float(np.abs(G).max()))
        if np.abs(G - G.T).max() > 1e-10 * scale:
            raise QpError("G is not symmetric")
        if not np.isin(y, (-1.0, 1.0)).all():
            raise QpError("y entries must be +1 or -1")
        if (upper <= 0).any():
            raise QpError("all upper bounds must be positive")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class DualSolution:
    alpha: np.ndarray
    objective: float
    kkt_residual: float
    iterations: int
    converged: bool


def objective(problem: BoxQP, alpha: np.ndarray) -> float:
    return float(-0.5 * alpha @ problem.G @ alpha + alpha.sum())


def _smo_loop(G, y, upper, tol, max_iter):  # pragma: no cover - jitted
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)  # gradient of 1/2 a^T G a - 1^T a
    it = 0
    gap = np.inf
    while it < max_iter:
        best_i = -1
        best_j = -1
        hi = -np.inf
        lo = np.inf
        for t in range(n):
            score = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < upper[t]) or (y[t] < 0 and alpha[t] > 0.0):
                if score > hi:
                    hi = score
                    best_i = t
            if (y[t] < 0 and alpha[t] < upper[t]) or (y[t] > 0 and alpha[t] > 0.0):
                if score < lo:
                    lo = score
                    best_j = t
        gap = hi - lo
        if best_i < 0 or best_j < 0 or gap <= tol:
            break
        i, j = best_i, best_j
        room_i = upper[i] - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else upper[j] - alpha[j]
        quad = G[i, i] + G[j, j] - 2.0 * y[i] * y[j] * G[i, j]
        if quad > 1e-12:
            step = min(gap / quad, room_i, room_j)
        else:
            step = min(room_i, room_j)
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        if alpha[i] < 0.0:
            alpha[i] = 0.0
        elif alpha[i] > upper[i]:
            alpha[i] = upper[i]
        if alpha[j] < 0.0:
            alpha[j] = 0.0
        elif alpha[j] > upper[j]:
            alpha[j] = upper[j]
        for t in range(n):
            grad[t] += step * (y[i] * G[t, i] - y[j] * G[t, j])
        it += 1
    return alpha, it, gap


_smo_loop_jit = _accel.njit(_smo_loop)


def _smo_numpy(G, y, upper, tol, max_iter, callback=None):
    """Vectorized fallback with the same selection and update rules."""
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    gap = np.inf
    while it < max_iter:
        score = -y * grad
        up_mask = ((y > 0) & (alpha < upper)) | ((y < 0) & (alpha > 0.0))
        low_mask = ((y < 0) & (alpha < upper)) | ((y > 0) & (alpha > 0.0))
        if not up_mask.any() or not low_mask.any():
            break
        i = int(np.argmax(np.where(up_mask, score, -np.inf)))
        j = int(np.argmin(np.where(low_mask, score, np.inf)))
        gap = score[i] - score[j]
        if gap <= tol:
            break
        room_i = upper[i] - alpha[i] if y[i] > 0 else alpha[i]
        room_j = alpha[j] if y[j] > 0 else upper[j] - alpha[j]
        quad = G[i, i] + G[j, j] - 2.0 * y[i] * y[j] * G[i, j]
        if quad > 1e-12:
            step = min(gap / quad, room_i, room_j)
        else:
            step = min(room_i, room_j)
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        alpha[i] = min(max(alpha[i], 0.0), upper[i])
        alpha[j] = min(max(alpha[j], 0.0), upper[j])
        grad += step * (y[i] * G[:, i] - y[j] * G[:, j])
        it += 1
        if callback is not None:
            callback(alpha.copy())
    return alpha, it, gap


def solve_smo(
    problem: BoxQP,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    callback=None,
) -> DualSolution:
    """Maximal-violating-pair ascent from alpha = 0.

    callback (alpha per iteration) forces the numpy path; it exists for
    monotonicity checks in tests.
    """
    if tol <= 0:
        raise QpError("tol must be positive")
    if callback is None and _accel.jit_enabled():
        alpha, it, gap = _smo_loop_jit(problem.G, problem.y, problem.upper, tol, max_iter)
    else:
        alpha, it, gap = _smo_numpy(problem.G, problem.y, problem.upper, tol, max_iter, callback)
    gap = max(float(gap), 0.0) if np.isfinite(gap) else 0.0
    return DualSolution(
        alpha=alpha,
        objective=objective(problem, alpha),
        kkt_residual=gap,
        iterations=int(it),
        converged=gap <= tol,
    )


def kkt_violation(problem: BoxQP, alpha: np.ndarray) -> float:
    """Max violating-pair gap at alpha; 0 at an exact optimum."""
    alpha = np.asarray(alpha, dtype=np.float64)
    y, upper = problem.y, problem.upper
    grad = problem.G @ alpha - 1.0
    score = -y * grad
    up_mask = ((y > 0) & (alpha < upper)) | ((y < 0) & (alpha > 0.0))
    low_mask = ((y < 0) & (alpha < upper)) | ((y > 0) & (alpha > 0.0))
    if not up_mask.any() or not low_mask.any():
        return 0.0
    hi = score[up_mask].max()
    lo = score[low_mask].min()
    return max(float(hi - lo), 0.0)


def brute_force_small(problem: BoxQP, grid_points: int = 201) -> DualSolution:
    """Exhaustive grid oracle for n <= 4: free coordinates on a grid, the
    first coordinate solved from the equality constraint."""
    n = problem.n
    if n > 4:
        raise QpError("brute force oracle limited to n <= 4")
    if grid_points > 401 or grid_points < 2:
        raise QpError("grid_points must be in [2, 401]")
    y, upper = problem.y, problem.upper
    grids = [np.linspace(0.0, upper[i], grid_points) for i in range(1, n)]
    slack = upper[0] * 1e-12
    best_alpha = np.zeros(n)
    best_obj = objective(problem, best_alpha)
    for tail in product(*grids) if n > 1 else [()]:
        tail = np.asarray(tail)
        a0 = -y[0] * float(tail @ y[1:]) if n > 1 else 0.0
        if a0 < -slack or a0 > upper[0] + slack:
            continue
        alpha = np.concatenate([[min(max(a0, 0.0), upper[0])], tail])
        obj = objective(problem, alpha)
        if obj > best_obj:
            best_obj = obj
            best_alpha = alpha
    return DualSolution(
        alpha=best_alpha,
        objective=best_obj,
        kkt_residual=kkt_violation(problem, best_alpha),
        iterations=grid_points ** max(n - 1, 0),
        converged=True,
    )
