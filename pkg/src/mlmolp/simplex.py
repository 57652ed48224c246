"""Primal simplex baselines (Bland's rule throughout).

``simplex_solve`` is the textbook two-phase tableau method for
``max c.x, A x <= b, x >= 0``; ``bounded_simplex_solve`` is the revised
bounded-variable method for the canonical form the adaptive method uses.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import SingularBasisError
from .lp import FEAS_TOL, BoundedCanonicalLP, InequalityLP, LUFactor

TOL = 1e-9
RATIO_TOL = 1e-12


class SimplexStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    UNBOUNDED = "Unbounded"
    INFEASIBLE = "Infeasible"
    ITERATION_LIMIT = "IterationLimit"


@dataclass
class SimplexOutcome:
    x_star: Optional[np.ndarray]
    objective: float
    status: SimplexStatus
    iterations: int
    duals: Optional[np.ndarray] = None
    basis: Optional[tuple] = None


def _pivot(T: np.ndarray, r: int, k: int) -> None:
    T[r] /= T[r, k]
    col = T[:, k].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _tableau_phase(T: np.ndarray, basis: list, allowed: np.ndarray, max_iter: int) -> tuple:
    """Maximize the objective held in the last row of T (stored as -reduced costs).

    Returns (status, iterations). Bland: smallest eligible column enters,
    smallest basic variable index leaves among ratio ties.
    """
    m = T.shape[0] - 1
    it = 0
    while True:
        obj = T[-1, :-1]
        cand = np.flatnonzero((obj < -TOL) & allowed)
        if cand.size == 0:
            return SimplexStatus.OPTIMAL, it
        if it >= max_iter:
            return SimplexStatus.ITERATION_LIMIT, it
        k = int(cand[0])
        col = T[:m, k]
        rows = np.flatnonzero(col > RATIO_TOL)
        if rows.size == 0:
            return SimplexStatus.UNBOUNDED, it
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + RATIO_TOL * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, r, k)
        basis[r] = k
        it += 1


def simplex_solve(lp: InequalityLP, max_iter: int = 10000) -> SimplexOutcome:
    A, b, c = lp.A, lp.b, lp.c
    m, n = A.shape
    if m == 0:
        if np.any(c > TOL):
            return SimplexOutcome(None, np.inf, SimplexStatus.UNBOUNDED, 0)
        return SimplexOutcome(np.zeros(n), 0.0, SimplexStatus.OPTIMAL, 0, np.zeros(0), ())

    # columns: x (n) | slacks (m) | artificials (m); rows with b < 0 are negated
    sgn = np.where(b < 0, -1.0, 1.0)
    T = np.zeros((m + 1, n + 2 * m + 1))
    T[:m, :n] = A * sgn[:, None]
    T[:m, n:n + m] = np.diag(sgn)
    T[:m, -1] = b * sgn
    need_art = sgn < 0
    basis = []
    for i in range(m):
        if need_art[i]:
            T[i, n + m + i] = 1.0
            basis.append(n + m + i)
        else:
            basis.append(n + i)
    allowed = np.ones(n + 2 * m, dtype=bool)
    allowed[n + m:] = False
    iters = 0

    if need_art.any():
        # phase one: maximize -sum(artificials)
        art = np.flatnonzero(need_art)
        allowed[n + m + art] = True
        T[-1, n + m + art] = 1.0
        for i in art:
            T[-1] -= T[i]
        status, k = _tableau_phase(T, basis, allowed, max_iter)
        iters += k
        if T[-1, -1] < -FEAS_TOL * max(1.0, np.abs(b).max()):
            return SimplexOutcome(None, -np.inf, SimplexStatus.INFEASIBLE, iters)
        # drive remaining zero-level artificials out of the basis
        for r in range(m):
            if basis[r] >= n + m:
                row = T[r, :n + m]
                nz = np.flatnonzero(np.abs(row) > TOL)
                if nz.size:
                    k0 = int(nz[0])
                    _pivot(T, r, k0)
                    basis[r] = k0
        allowed[n + m:] = False
        T[-1, :] = 0.0

    # phase two objective row: -c on x, then price out the basis
    T[-1, :n] = -c
    for r in range(m):
        if basis[r] < n and c[basis[r]] != 0.0:
            T[-1] += c[basis[r]] * T[r]
    status, k = _tableau_phase(T, basis, allowed, max_iter)
    iters += k
    if status is SimplexStatus.UNBOUNDED:
        return SimplexOutcome(None, np.inf, status, iters)

    x = np.zeros(n + m)
    for r in range(m):
        if basis[r] < n + m:
            x[basis[r]] = T[r, -1]
    xs = x[:n]
    # dual prices y_i = (c_B B^{-1})_i read off the slack columns of the last row
    duals = T[-1, n:n + m].copy()
    return SimplexOutcome(xs, float(c @ xs), status, iters, duals, tuple(basis))


def _bounded_phase(A, b, c, l, u, x, basis, max_iter):
    """Bounded-variable revised simplex from a basic solution with nonbasics at bounds."""
    m, n = A.shape
    basis = list(basis)
    it = 0
    while True:
        lu = LUFactor(A[:, basis])
        y = lu.solve_transposed(c[basis])
        red = c - A.T @ y
        inb = np.zeros(n, dtype=bool)
        inb[basis] = True
        up = (~inb) & (red > TOL) & (x < u - 1e-12)
        down = (~inb) & (red < -TOL) & (x > l + 1e-12)
        cand = np.flatnonzero(up | down)
        if cand.size == 0:
            return SimplexStatus.OPTIMAL, it, x, basis
        if it >= max_iter:
            return SimplexStatus.ITERATION_LIMIT, it, x, basis
        k = int(cand[0])
        sigma = 1.0 if up[k] else -1.0
        w = lu.solve(A[:, k])            # x_B changes by -sigma * t * w
        ratios = []
        for pos in range(m):
            j = basis[pos]
            dj = -sigma * w[pos]
            if dj > RATIO_TOL:
                ratios.append((max((u[j] - x[j]) / dj, 0.0), j, pos))
            elif dj < -RATIO_TOL:
                ratios.append((max((l[j] - x[j]) / dj, 0.0), j, pos))
        step = u[k] - l[k]
        leave = None
        if ratios:
            tmin = min(t for t, _, _ in ratios)
            if tmin < step:
                tie = RATIO_TOL * max(1.0, tmin)
                _, leave = min((j, pos) for t, j, pos in ratios if t <= tmin + tie)
                step = tmin
        if not np.isfinite(step):
            return SimplexStatus.UNBOUNDED, it, x, basis
        x = x.copy()
        x[basis] -= sigma * step * w
        x[k] += sigma * step
        if leave is None:
            x[k] = u[k] if sigma > 0 else l[k]
        else:
            j = basis[leave]
            x[j] = u[j] if -sigma * w[leave] > 0 else l[j]
            basis[leave] = k
        np.clip(x, l, u, out=x)
        it += 1


def bounded_simplex_solve(lp: BoundedCanonicalLP, max_iter: Optional[int] = None) -> SimplexOutcome:
    A, b, c, l, u = lp.A, lp.b, lp.c, lp.l, lp.u
    m, n = A.shape
    if max_iter is None:
        max_iter = 50 * (n + m)
    iters = 0
    x = l.copy()
    basis = None
    if lp.n_structural is not None:
        ns = lp.n_structural
        s = b - A[:, :ns] @ x[:ns]
        tol = FEAS_TOL * np.maximum(1.0, np.abs(b))
        if np.all(s >= l[ns:] - tol) and np.all(s <= u[ns:] + tol):
            x[ns:] = np.clip(s, l[ns:], u[ns:])
            basis = list(range(ns, n))
    if basis is None:
        r = b - A @ x
        signs = np.where(r < 0, -1.0, 1.0)
        A1 = np.hstack([A, np.diag(signs)])
        c1 = np.concatenate([np.zeros(n), -np.ones(m)])
        l1 = np.concatenate([l, np.zeros(m)])
        u1 = np.concatenate([u, np.full(m, np.inf)])
        x1 = np.concatenate([x, np.abs(r)])
        status, k, x1, b1 = _bounded_phase(A1, b, c1, l1, u1, x1, range(n, n + m), max_iter)
        iters += k
        if status is not SimplexStatus.OPTIMAL or x1[n:].sum() > 1e-7:
            return SimplexOutcome(None, -np.inf, SimplexStatus.INFEASIBLE, iters)
        x = x1[:n].copy()
        for pos, j in enumerate(b1):
            if j < n:
                continue
            lu = LUFactor(A1[:, b1])
            row = lu.solve_transposed(np.eye(m)[pos]) @ A
            cand = [q for q in range(n) if q not in b1 and abs(row[q]) > 1e-9]
            if not cand:
                raise SingularBasisError("constraint matrix is rank deficient")
            b1[pos] = cand[0]
        basis = list(b1)
    status, k, x, basis = _bounded_phase(A, b, c, l, u, x, basis, max_iter - iters)
    iters += k
    return SimplexOutcome(x, float(c @ x), status, iters, basis=tuple(basis))
