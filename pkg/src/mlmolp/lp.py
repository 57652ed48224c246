"""LP containers, canonical-form conversion and the basic linear solve.

Vectors and matrices are plain ``numpy`` float arrays; the containers copy
their inputs and mark them read-only so they can be shared between workers.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from .errors import DimensionError, InfeasibleError, SingularBasisError

FEAS_TOL = 1e-8
BOUND_TOL = 1e-10
PIVOT_TOL = 1e-12


def _frozen(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise DimensionError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DimensionError(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class InequalityLP:
    """max c.x subject to A x <= b, x >= 0."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "c", _frozen(self.c, 1, "c"))
        object.__setattr__(self, "A", _frozen(self.A, 2, "A"))
        object.__setattr__(self, "b", _frozen(self.b, 1, "b"))
        m, n = self.A.shape
        if self.c.shape[0] != n or self.b.shape[0] != m:
            raise DimensionError(
                f"inconsistent dimensions: A is {m}x{n}, c has {self.c.shape[0]}, "
                f"b has {self.b.shape[0]}"
            )

    @property
    def shape(self):
        return self.A.shape


@dataclass(frozen=True, eq=False)
class BoundedCanonicalLP:
    """max c.x subject to A x = b, l <= x <= u with finite bounds and m < n.

    ``n_structural`` is set when the problem was produced by :func:`to_canonical`;
    the trailing ``n - n_structural`` columns are then the identity slack block.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    l: np.ndarray
    u: np.ndarray
    n_structural: Optional[int] = None

    def __post_init__(self):
        for name in ("c", "b", "l", "u"):
            object.__setattr__(self, name, _frozen(getattr(self, name), 1, name))
        object.__setattr__(self, "A", _frozen(self.A, 2, "A"))
        m, n = self.A.shape
        if any(v.shape[0] != n for v in (self.c, self.l, self.u)) or self.b.shape[0] != m:
            raise DimensionError("inconsistent dimensions in bounded canonical LP")
        if m >= n:
            raise DimensionError(f"bounded canonical form needs m < n, got m={m}, n={n}")
        if np.any(self.l > self.u):
            j = int(np.flatnonzero(self.l > self.u)[0])
            raise DimensionError(f"lower bound exceeds upper bound at column {j}")

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def objective(self, x) -> float:
        return float(self.c @ x)

    def project(self, x) -> np.ndarray:
        """Drop slack components, returning the original variables."""
        x = np.asarray(x, dtype=float)
        if self.n_structural is None:
            return x.copy()
        return x[: self.n_structural].copy()

    def is_feasible(self, x, feas_tol: float = FEAS_TOL, bound_tol: float = BOUND_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(
            np.max(np.abs(self.A @ x - self.b), initial=0.0) <= feas_tol
            and np.all(x >= self.l - bound_tol)
            and np.all(x <= self.u + bound_tol)
        )


class LUFactor:
    """LU factorization with partial pivoting of a square basis matrix."""

    def __init__(self, M):
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionError(f"basis matrix must be square, got shape {M.shape}")
        self.size = M.shape[0]
        if self.size == 0:
            self._lu = None
            return
        with warnings.catch_warnings():
            # singularity is reported through SingularBasisError below
            warnings.simplefilter("ignore", LinAlgWarning)
            lu, piv = lu_factor(M, check_finite=True)
        pivots = np.abs(np.diag(lu))
        if pivots.min() < PIVOT_TOL:
            raise SingularBasisError(
                f"singular basis matrix (smallest pivot {pivots.min():.3e})"
            )
        self._lu = (lu, piv)

    def solve(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self._lu is None:
            return rhs.copy()
        return lu_solve(self._lu, rhs)

    def solve_transposed(self, rhs) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self._lu is None:
            return rhs.copy()
        return lu_solve(self._lu, rhs, trans=1)


def basic_solve(A_B, rhs) -> np.ndarray:
    """Solve ``A_B y = rhs`` without forming an inverse."""
    rhs = np.asarray(rhs, dtype=float)
    lu = LUFactor(A_B)
    if rhs.shape[0] != lu.size:
        raise DimensionError("right-hand side does not match the basis size")
    return lu.solve(rhs)


def row_minima(A, l, u) -> np.ndarray:
    """min over the box l <= x <= u of each row A_i x."""
    A = np.asarray(A, dtype=float)
    return np.where(A > 0, A * l, A * u).sum(axis=1)


def to_canonical(lp: InequalityLP, bounds_l, bounds_u) -> BoundedCanonicalLP:
    """Append one bounded slack per inequality row.

    Slack ``i`` lives in ``[0, b_i - min_box(A_i x)]``; a negative width means the
    row cannot be satisfied anywhere in the box.
    """
    m, n = lp.shape
    l = np.asarray(bounds_l, dtype=float)
    u = np.asarray(bounds_u, dtype=float)
    if l.shape != (n,) or u.shape != (n,):
        raise DimensionError(f"box must have {n} components")
    if np.any(l > u):
        raise DimensionError("box lower bound exceeds upper bound")
    slack_ub = lp.b - row_minima(lp.A, l, u)
    scale = np.maximum(1.0, np.abs(lp.b))
    bad = slack_ub < -FEAS_TOL * scale
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise InfeasibleError(
            f"row {i} cannot be satisfied inside the box (slack bound {slack_ub[i]:.6g})"
        )
    slack_ub = np.maximum(slack_ub, 0.0)
    return BoundedCanonicalLP(
        c=np.concatenate([lp.c, np.zeros(m)]),
        A=np.hstack([lp.A, np.eye(m)]),
        b=lp.b,
        l=np.concatenate([l, np.zeros(m)]),
        u=np.concatenate([u, slack_ub]),
        n_structural=n,
    )


@dataclass(frozen=True, eq=False)
class SupportPlan:
    """A feasible point together with an ordered support (basis) index set."""

    x: np.ndarray
    basis: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x, 1, "x"))
        object.__setattr__(self, "basis", tuple(int(j) for j in self.basis))
        if len(set(self.basis)) != len(self.basis):
            raise DimensionError("support contains repeated indices")

    def nonbasis(self, n: Optional[int] = None) -> tuple:
        n = self.x.shape[0] if n is None else n
        inb = set(self.basis)
        return tuple(j for j in range(n) if j not in inb)

    def validate(self, lp: BoundedCanonicalLP, feas_tol: float = FEAS_TOL,
                 bound_tol: float = BOUND_TOL) -> LUFactor:
        """Check the supporting-plan invariants; returns the basis factorization."""
        if self.x.shape[0] != lp.n:
            raise DimensionError("plan dimension differs from the LP")
        if len(self.basis) != lp.m or any(j < 0 or j >= lp.n for j in self.basis):
            raise DimensionError(f"support must hold {lp.m} valid column indices")
        lu = LUFactor(lp.A[:, list(self.basis)])
        resid = np.max(np.abs(lp.A @ self.x - lp.b), initial=0.0)
        if resid > feas_tol:
            raise InfeasibleError(f"plan violates A x = b (residual {resid:.3e})")
        if np.any(self.x < lp.l - bound_tol) or np.any(self.x > lp.u + bound_tol):
            raise InfeasibleError("plan violates its box bounds")
        return lu


def make_plan(lp: BoundedCanonicalLP, x, basis: Sequence[int]) -> SupportPlan:
    plan = SupportPlan(x, tuple(basis))
    plan.validate(lp)
    return plan
