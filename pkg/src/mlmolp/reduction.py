"""Ideal bounds and the interval reduction applied between hierarchy levels.

Each decision maker, after solving, shrinks the intervals of the variables it
controls before the next level solves. The affine maps below carry an interval
onto its reduced image; ``reduce_component`` is the per-variable rule that the
driver actually applies.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, DomainError

CLASSIFY_TOL = 1e-7


def _check_member(x, lo, hi, what="x"):
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if not (lo - slack <= x <= hi + slack):
        raise DomainError(f"{what}={x!r} lies outside [{lo!r}, {hi!r}]")


@dataclass(frozen=True, eq=False)
class BoundsState:
    level: int
    l: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        l = np.array(self.l, dtype=float)
        u = np.array(self.u, dtype=float)
        if l.shape != u.shape or l.ndim != 1:
            raise DimensionError("bounds vectors must be 1-D and of equal length")
        if np.any(l > u):
            raise DimensionError("lower bound exceeds upper bound")
        l.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "u", u)

    @property
    def width(self) -> np.ndarray:
        return self.u - self.l

    def nested_in(self, other: "BoundsState", rtol: float = 1e-12) -> bool:
        scale = rtol * np.maximum(1.0, np.maximum(np.abs(other.l), np.abs(other.u)))
        return bool(np.all(self.l >= other.l - scale) and np.all(self.u <= other.u + scale))

    def contains(self, x, tol: float = 1e-8) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.l - tol) and np.all(x <= self.u + tol))


class CaseTag(str, enum.Enum):
    INTERIOR = "Interior"
    AT_UPPER = "AtUpper"
    AT_LOWER = "AtLower"


@dataclass(frozen=True)
class ReductionCase:
    tag: CaseTag
    component: tuple = ()


@dataclass(frozen=True)
class AlphaParams:
    """Relative reduction fractions, one array per decision-making level.

    ``alpha[i]`` applies to the variables of level ``i + 1``. Values are
    fractions of the interval width; 1 collapses a boundary interval to a point.
    """

    alpha: tuple

    def __post_init__(self):
        vals = []
        for a in self.alpha:
            arr = np.atleast_1d(np.array(a, dtype=float))
            if np.any(arr < 0) or np.any(arr > 1) or not np.all(np.isfinite(arr)):
                raise DomainError(f"alpha values must lie in [0, 1], got {arr.tolist()}")
            arr.setflags(write=False)
            vals.append(arr)
        object.__setattr__(self, "alpha", tuple(vals))

    @classmethod
    def per_level(cls, values: Sequence[float]) -> "AlphaParams":
        return cls(tuple(float(v) for v in values))

    def for_level(self, level: int, size: int) -> np.ndarray:
        """Per-component fractions for the variables of ``level`` (1-based)."""
        if level - 1 >= len(self.alpha):
            return np.zeros(size)
        a = self.alpha[level - 1]
        if a.size == 1:
            return np.full(size, a[0])
        if a.size != size:
            raise DimensionError(f"level {level} needs {size} alpha values, got {a.size}")
        return a.copy()

    def scalars(self) -> list:
        """One representative value per level (first component)."""
        return [float(a[0]) for a in self.alpha]


def ideal_bounds(level_solutions: Sequence) -> BoundsState:
    """Componentwise min and max over the levels' independent optima."""
    sols = [np.asarray(s, dtype=float) for s in level_solutions]
    if len(sols) < 2:
        raise DimensionError("ideal bounds need at least two level solutions")
    if len({s.shape for s in sols}) != 1:
        raise DimensionError("level solutions differ in dimension")
    X = np.vstack(sols)
    return BoundsState(level=1, l=X.min(axis=0), u=X.max(axis=0))


def sign(v: float) -> int:
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


def map_L(d1: float, d2: float, d3: float, x: float) -> float:
    """Affine increasing map of [d1, d2] onto [d1, d3]."""
    if not d1 < d3 < d2:
        raise DomainError(f"need d1 < d3 < d2, got {d1}, {d3}, {d2}")
    _check_member(x, d1, d2)
    return ((d3 - d1) * x + d1 * (d2 - d3)) / (d2 - d1)


def map_U(d1: float, d2: float, d3: float, x: float) -> float:
    """Affine increasing map of [d1, d2] onto [d3, d2]."""
    if not d1 < d3 < d2:
        raise DomainError(f"need d1 < d3 < d2, got {d1}, {d3}, {d2}")
    _check_member(x, d1, d2)
    return ((d2 - d3) * x + d2 * (d3 - d1)) / (d2 - d1)


def _check_alpha(l, u, alpha_abs):
    if not l < u:
        raise DomainError(f"need l < u, got [{l}, {u}]")
    if not 0 <= alpha_abs < u - l:
        raise DomainError(f"alpha={alpha_abs} must satisfy 0 <= alpha < u - l = {u - l}")


def map_L_alpha(l: float, u: float, alpha_abs: float, x: float) -> float:
    """Map [l, u] onto [l, u - alpha_abs]."""
    _check_alpha(l, u, alpha_abs)
    _check_member(x, l, u)
    return ((u - (l + alpha_abs)) * x + alpha_abs * l) / (u - l)


def map_U_alpha(l: float, u: float, alpha_abs: float, x: float) -> float:
    """Map [l, u] onto [l + alpha_abs, u]."""
    _check_alpha(l, u, alpha_abs)
    _check_member(x, l, u)
    return ((u - (l + alpha_abs)) * x + alpha_abs * u) / (u - l)


def psi(l, u, x_opt, c_prev, x):
    """Interior-case map: onto [l, x_opt] when c_prev < 0, onto [x_opt, u] when c_prev > 0."""
    t_minus = 1 - sign(c_prev)
    t_plus = 1 + sign(c_prev)
    return (t_minus * map_L(l, u, x_opt, x) + t_plus * map_U(l, u, x_opt, x)) / 2


def nu(l, u, x_opt, c_prev, c_curr, x):
    s2 = (sign(c_curr) * sign(c_prev)) ** 2
    if s2 == 0:
        _check_member(x, l, u)
        return float(x)
    return psi(l, u, x_opt, c_prev, x)


def psi_hat(l, u, x_opt, alpha_abs, x):
    """Boundary-case map: L^alpha when x_opt sits at u, U^alpha when it sits at l."""
    tag = classify_case(l, u, x_opt).tag
    if tag is CaseTag.INTERIOR:
        raise DomainError("psi_hat is only defined when x_opt sits on an interval endpoint")
    if tag is CaseTag.AT_UPPER:
        return map_L_alpha(l, u, alpha_abs, x)
    return map_U_alpha(l, u, alpha_abs, x)


def nu_hat(l, u, x_opt, alpha_abs, c_prev, c_curr, x):
    s2 = (sign(c_curr) * sign(c_prev)) ** 2
    if s2 == 0:
        _check_member(x, l, u)
        return float(x)
    return psi_hat(l, u, x_opt, alpha_abs, x)


def classify_case(l: float, u: float, x_opt: float, tau: float = CLASSIFY_TOL) -> ReductionCase:
    if x_opt < l - tau * max(1.0, abs(l)) or x_opt > u + tau * max(1.0, abs(u)):
        raise DomainError(f"x_opt={x_opt} lies outside [{l}, {u}]")
    if l == u:
        return ReductionCase(CaseTag.AT_LOWER)
    if abs(x_opt - u) <= tau * max(1.0, abs(u)):
        return ReductionCase(CaseTag.AT_UPPER)
    if abs(x_opt - l) <= tau * max(1.0, abs(l)):
        return ReductionCase(CaseTag.AT_LOWER)
    return ReductionCase(CaseTag.INTERIOR)


def reduce_component(l, u, x_opt, c_prev, c_curr, alpha_rel, gate: bool = True):
    """Reduced interval ``(new_l, new_u)`` for one variable of the preceding level.

    With ``gate`` set, the interval is left alone unless the variable carries a
    nonzero coefficient in both the preceding and the current objective. With
    ``gate`` cleared, boundary cases are reduced by ``alpha_rel`` regardless of
    coefficients, and the interior case only needs the preceding coefficient.
    """
    if not 0 <= alpha_rel <= 1:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha_rel}")
    if l > u:
        raise DomainError(f"empty interval [{l}, {u}]")
    if l == u:
        return l, u
    tag = classify_case(l, u, x_opt).tag
    active = sign(c_prev) * sign(c_curr) != 0 if gate else True
    if tag is CaseTag.INTERIOR:
        if not active or c_prev == 0:
            return l, u
        return (l, x_opt) if c_prev < 0 else (x_opt, u)
    if not active:
        return l, u
    w = u - l
    if alpha_rel == 1:
        return (l, l) if tag is CaseTag.AT_UPPER else (u, u)
    if tag is CaseTag.AT_UPPER:
        return l, max(l, u - alpha_rel * w)
    return min(u, l + alpha_rel * w), u


def level_slice(partition: Sequence[int], level: int) -> slice:
    """Columns controlled by ``level`` (1-based) under a variable partition."""
    if not 1 <= level <= len(partition):
        raise DimensionError(f"level {level} outside 1..{len(partition)}")
    start = int(sum(partition[: level - 1]))
    return slice(start, start + int(partition[level - 1]))


def apply_xi(p: int, bounds: BoundsState, prev_solution, c_prev, c_curr, alphas: AlphaParams,
             partition: Sequence[int], gate: bool = True) -> BoundsState:
    """Level-p bounds from level-(p-1) bounds; only the variables of level p-1 move."""
    prev_solution = np.asarray(prev_solution, dtype=float)
    c_prev = np.asarray(c_prev, dtype=float)
    c_curr = np.asarray(c_curr, dtype=float)
    n = bounds.l.shape[0]
    if int(sum(partition)) != n or any(v.shape != (n,) for v in (prev_solution, c_prev, c_curr)):
        raise DimensionError("partition or vector sizes do not match the bounds")
    if p < 2:
        return BoundsState(level=p, l=bounds.l, u=bounds.u)
    l = bounds.l.copy()
    u = bounds.u.copy()
    block = level_slice(partition, p - 1)
    a = alphas.for_level(p - 1, block.stop - block.start)
    for k, j in enumerate(range(block.start, block.stop)):
        l[j], u[j] = reduce_component(bounds.l[j], bounds.u[j], prev_solution[j],
                                      c_prev[j], c_curr[j], float(a[k]), gate=gate)
    return BoundsState(level=p, l=l, u=u)
