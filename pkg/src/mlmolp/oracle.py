"""Brute-force reference solver and random instance generator.

The enumeration never touches the solvers it is used to check: it walks every
choice of ``m`` basic columns and every assignment of the remaining columns to
one of their bounds, and keeps the best feasible point.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lp import BoundedCanonicalLP, InequalityLP, to_canonical


@dataclass
class OracleResult:
    objective: float
    x: Optional[np.ndarray]
    feasible: bool


def brute_force(lp: BoundedCanonicalLP, tol: float = 1e-9) -> OracleResult:
    A, b, c, l, u = lp.A, lp.b, lp.c, lp.l, lp.u
    m, n = A.shape
    best = -np.inf
    best_x = None
    k = n - m
    # every bound assignment of the k nonbasic columns, one per row of `pattern`
    pattern = np.array(list(itertools.product((0, 1), repeat=k)), dtype=float).reshape(-1, k)
    for B in itertools.combinations(range(n), m):
        A_B = A[:, B]
        if abs(np.linalg.det(A_B)) < 1e-10:
            continue
        N = [j for j in range(n) if j not in B]
        X_N = l[N] + pattern * (u[N] - l[N])              # (2^k, k)
        rhs = b[:, None] - A[:, N] @ X_N.T                # (m, 2^k)
        X_B = np.linalg.solve(A_B, rhs).T                 # (2^k, m)
        scale = 1.0 + np.maximum(np.abs(l[list(B)]), np.abs(u[list(B)]))
        ok = np.all(X_B >= l[list(B)] - tol * scale, axis=1) & np.all(
            X_B <= u[list(B)] + tol * scale, axis=1)
        if not np.any(ok):
            continue
        vals = X_B[ok] @ c[list(B)] + X_N[ok] @ c[N]
        i = int(np.argmax(vals))
        if vals[i] > best:
            best = float(vals[i])
            x = np.empty(n)
            x[list(B)] = X_B[ok][i]
            x[N] = X_N[ok][i]
            best_x = x
    return OracleResult(objective=best, x=best_x, feasible=best_x is not None)


@dataclass
class RandomInstance:
    ineq: InequalityLP
    l: np.ndarray
    u: np.ndarray
    canonical: BoundedCanonicalLP


def random_instance(rng: np.random.Generator, max_n: int = 8, max_m: int = 5) -> RandomInstance:
    """Feasible box-constrained LP with integer data in [-9, 9] and boxes in [0, 10].

    Feasibility is guaranteed by building ``b`` from an integer point of the box.
    """
    n = int(rng.integers(1, max_n + 1))
    m = int(rng.integers(1, max_m + 1))
    A = rng.integers(-9, 10, size=(m, n)).astype(float)
    c = rng.integers(-9, 10, size=n).astype(float)
    lo = rng.integers(0, 11, size=n)
    hi = rng.integers(0, 11, size=n)
    l = np.minimum(lo, hi).astype(float)
    u = np.maximum(lo, hi).astype(float)
    x0 = rng.integers(l.astype(int), u.astype(int) + 1).astype(float)
    b = A @ x0 + rng.integers(0, 10, size=m)
    ineq = InequalityLP(c=c, A=A, b=b)
    return RandomInstance(ineq=ineq, l=l, u=u, canonical=to_canonical(ineq, l, u))


def random_instances(count: int, seed: int = 0, **kw) -> list:
    rng = np.random.default_rng(seed)
    return [random_instance(rng, **kw) for _ in range(count)]
