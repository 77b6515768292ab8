"""Dense active-set solver for small inequality-constrained least squares.

Solves
    min_x ||M x - tau||^2   s.t.  A x <= b

via a primal active-set iteration. Each equality-constrained subproblem is
solved in the nullspace of the working-set rows (SVD-based, so linearly
dependent rows are harmless), which keeps the method exact and deterministic
for the tiny problems thruster allocation produces (a handful of variables,
tens of constraints). The working set from the previous solve can be passed
back in to warm-start the next one.
"""

from __future__ import annotations

import numpy as np

# Constraints are treated as satisfied up to this slack; it sits between the
# 1e-9 strictness margin on fan constraints (which makes the origin violate
# by exactly 1e-9) and the 1e-6 feasibility promised to callers.
FEAS_TOL = 1e-8
_STEP_TOL = 1e-11
_MULT_TOL = 1e-9


class QpError(Exception):
    pass


class Infeasible(QpError):
    """The starting point violates the constraints beyond tolerance."""


class NotConverged(QpError):
    """Active-set iteration exceeded its iteration budget."""


def _nullspace(a: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis of the nullspace of a (rows may be dependent)."""
    if a.shape[0] == 0:
        return np.eye(n)
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > max(a.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)))
    return vt[rank:].T


def solve_lsq_inequality(
    m: np.ndarray,
    tau: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray,
    warm_set: tuple[int, ...] = (),
    max_iter: int = 200,
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Minimize ||m x - tau||^2 subject to a x <= b, starting from feasible x0.

    Returns (x, active_set). warm_set seeds the working set with indices that
    are still active at x0; stale indices are dropped silently.
    """
    m = np.asarray(m, dtype=float)
    tau = np.asarray(tau, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    x = np.array(x0, dtype=float)
    n = x.size
    n_con = a.shape[0]

    slack = b - a @ x if n_con else np.zeros(0)
    if n_con and np.min(slack) < -FEAS_TOL:
        worst = int(np.argmin(slack))
        raise Infeasible(f"start violates constraint {worst} by {-slack[worst]:.3e}")

    work: list[int] = [i for i in warm_set if 0 <= i < n_con and slack[i] <= FEAS_TOL]

    for _ in range(max_iter):
        z = _nullspace(a[work], n) if work else np.eye(n)
        if z.shape[1] == 0:
            p = np.zeros(n)
        else:
            y, *_ = np.linalg.lstsq(m @ z, tau - m @ x, rcond=None)
            p = z @ y

        if np.max(np.abs(p), initial=0.0) <= _STEP_TOL:
            if not work:
                return x, ()
            grad = m.T @ (m @ x - tau)
            lam, *_ = np.linalg.lstsq(a[work].T, -grad, rcond=None)
            j = int(np.argmin(lam))
            if lam[j] >= -_MULT_TOL:
                return x, tuple(work)
            work.pop(j)
            continue

        alpha = 1.0
        blocking = -1
        if n_con:
            ap = a @ p
            for i in range(n_con):
                if i in work or ap[i] <= 1e-13:
                    continue
                limit = (b[i] - a[i] @ x) / ap[i]
                if limit < alpha:
                    alpha = max(limit, 0.0)
                    blocking = i
        x = x + alpha * p
        if blocking >= 0:
            work.append(blocking)

    raise NotConverged(f"no optimum within {max_iter} active-set iterations")
