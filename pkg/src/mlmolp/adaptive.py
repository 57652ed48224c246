"""Gabasov's adaptive method for bounded-variable LPs.

Iterates supporting plans ``{x, J_B}``: nonbasic variables may sit strictly
inside their box, and the suboptimality estimate ``beta`` bounds the gap
``f(x*) - f(x)`` at every iterate.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionError, InfeasibleError, MLMOLPError, SingularBasisError
from .lp import (
    BOUND_TOL,
    FEAS_TOL,
    BoundedCanonicalLP,
    LUFactor,
    SupportPlan,
    make_plan,
)

E_TOL = 1e-9       # reduced cost regarded as zero
OPT_TOL = 1e-9     # beta regarded as zero
NNO_TOL = 1e-10    # strictness margin in the non-optimal index test
DIR_TOL = 1e-12    # direction components below this do not limit the step
PHASE_ONE_TOL = 1e-7


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    EPSILON_OPTIMAL = "EpsilonOptimal"
    ITERATION_LIMIT = "IterationLimit"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True)
class ReducedCosts:
    K: np.ndarray
    E: np.ndarray


@dataclass(frozen=True)
class IterationTrace:
    iteration: int
    beta: float
    entering: Optional[int]
    leaving: Optional[int]
    theta: float
    objective: float
    beta_after: Optional[float] = None

    def as_record(self) -> dict:
        return {
            "iteration": self.iteration,
            "beta": self.beta,
            "beta_after": self.beta_after,
            "j0": self.entering,
            "j1": self.leaving,
            "theta0": self.theta + 0.0,
            "objective": self.objective,
        }


@dataclass
class SolveOutcome:
    x_star: np.ndarray
    objective: float
    status: Status
    final_beta: float
    trace: list = field(default_factory=list)
    plan: Optional[SupportPlan] = None

    @property
    def iterations(self) -> int:
        return sum(1 for t in self.trace if t.entering is not None)


def _factor(lp: BoundedCanonicalLP, plan: SupportPlan) -> LUFactor:
    return LUFactor(lp.A[:, list(plan.basis)])


def reduced_costs(lp: BoundedCanonicalLP, plan: SupportPlan,
                  lu: Optional[LUFactor] = None) -> ReducedCosts:
    """K^T = c_B^T A_B^{-1} and E_j = K^T a_j - c_j for every column."""
    if lu is None:
        lu = _factor(lp, plan)
    basis = list(plan.basis)
    K = lu.solve_transposed(lp.c[basis])
    E = lp.A.T @ K - lp.c
    return ReducedCosts(K=K, E=E)


def suboptimality_estimate(lp: BoundedCanonicalLP, plan: SupportPlan,
                           rc: ReducedCosts) -> float:
    N = np.array(plan.nonbasis(lp.n), dtype=int)
    if N.size == 0:
        return 0.0
    E = rc.E[N]
    x = plan.x[N]
    pos = E > 0
    neg = E < 0
    beta = np.sum(E[pos] * (x[pos] - lp.l[N][pos])) + np.sum(E[neg] * (x[neg] - lp.u[N][neg]))
    return float(max(beta, 0.0))


def optimality_check(plan: SupportPlan, rc: ReducedCosts, lp: BoundedCanonicalLP) -> bool:
    """Relations of the optimality criterion, checked on every nonbasic index."""
    for j in plan.nonbasis(lp.n):
        e = rc.E[j]
        at_l = abs(plan.x[j] - lp.l[j]) <= BOUND_TOL
        at_u = abs(plan.x[j] - lp.u[j]) <= BOUND_TOL
        if at_l and e >= -E_TOL:
            continue
        if at_u and e <= E_TOL:
            continue
        if not at_l and not at_u and abs(e) <= E_TOL:
            continue
        return False
    return True


def nonoptimal_indices(plan: SupportPlan, rc: ReducedCosts, lp: BoundedCanonicalLP) -> list:
    out = []
    for j in plan.nonbasis(lp.n):
        e = rc.E[j]
        xj = plan.x[j]
        if (e < -NNO_TOL and xj < lp.u[j] - NNO_TOL) or (e > NNO_TOL and xj > lp.l[j] + NNO_TOL):
            out.append(j)
    return out


def improvement_direction(lp: BoundedCanonicalLP, plan: SupportPlan, rc: ReducedCosts,
                          j0: int, lu: Optional[LUFactor] = None) -> np.ndarray:
    if j0 in plan.basis:
        raise DimensionError(f"entering index {j0} is basic")
    if lu is None:
        lu = _factor(lp, plan)
    d = np.zeros(lp.n)
    d[j0] = -np.sign(rc.E[j0])
    d[list(plan.basis)] = -lu.solve(lp.A[:, j0] * d[j0])
    return d


def step_length(lp: BoundedCanonicalLP, plan: SupportPlan, rc: ReducedCosts, d: np.ndarray,
                j0: int):
    """Return ``(theta0, j1)``; ``j1`` is None when the entering variable's own
    bound limits the step (no support change)."""
    x = plan.x
    theta_j1 = np.inf
    j1 = None
    for j in sorted(plan.basis):
        dj = d[j]
        if dj > DIR_TOL:
            t = (lp.u[j] - x[j]) / dj
        elif dj < -DIR_TOL:
            t = (lp.l[j] - x[j]) / dj
        else:
            continue
        t = max(t, 0.0)
        if t < theta_j1:
            theta_j1, j1 = t, j
    e0 = rc.E[j0]
    if e0 > 0:
        theta_j0 = x[j0] - lp.l[j0]
    elif e0 < 0:
        theta_j0 = lp.u[j0] - x[j0]
    else:
        theta_j0 = 0.0
    theta_j0 = max(theta_j0, 0.0)
    if not np.isfinite(min(theta_j0, theta_j1)):
        raise MLMOLPError("internal error: unbounded step along an admissible direction")
    if theta_j0 <= theta_j1:
        return float(theta_j0), None
    return float(theta_j1), j1


def adaptive_solve(lp: BoundedCanonicalLP, initial: SupportPlan, epsilon: float = 0.0,
                   max_iter: Optional[int] = None) -> SolveOutcome:
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if max_iter is None:
        max_iter = 50 * (lp.n + lp.m)
    initial.validate(lp)

    x = np.array(initial.x, dtype=float)
    basis = list(initial.basis)
    trace = []
    stall = 0
    last_beta = np.inf

    def finish(status, beta, xs, bs):
        plan = SupportPlan(xs, tuple(bs))
        return SolveOutcome(x_star=plan.x, objective=lp.objective(plan.x), status=status,
                            final_beta=float(beta), trace=trace, plan=plan)

    for it in range(max_iter + 1):
        plan = SupportPlan(x, tuple(basis))
        lu = _factor(lp, plan)
        rc = reduced_costs(lp, plan, lu)
        beta = suboptimality_estimate(lp, plan, rc)
        f = lp.objective(x)
        if beta <= OPT_TOL:
            trace.append(IterationTrace(it, beta, None, None, 0.0, f))
            return finish(Status.OPTIMAL, beta, x, basis)
        if beta <= epsilon:
            trace.append(IterationTrace(it, beta, None, None, 0.0, f))
            return finish(Status.EPSILON_OPTIMAL, beta, x, basis)
        nno = nonoptimal_indices(plan, rc, lp)
        if not nno:
            # residual beta comes only from tolerance-sized reduced costs
            trace.append(IterationTrace(it, beta, None, None, 0.0, f))
            return finish(Status.OPTIMAL, beta, x, basis)
        if it == max_iter:
            trace.append(IterationTrace(it, beta, None, None, 0.0, f))
            return finish(Status.ITERATION_LIMIT, beta, x, basis)

        if stall >= lp.n:
            j0 = min(nno)
        else:
            absE = np.abs(rc.E[nno])
            j0 = nno[int(np.argmax(absE))]  # argmax keeps the first, i.e. smallest, index

        d = improvement_direction(lp, plan, rc, j0, lu)
        theta0, j1 = step_length(lp, plan, rc, d, j0)
        x_new = x + theta0 * d
        # land exactly on the bound that limited the step
        if j1 is None:
            x_new[j0] = lp.l[j0] if rc.E[j0] > 0 else lp.u[j0]
        else:
            x_new[j1] = lp.u[j1] if d[j1] > 0 else lp.l[j1]
        np.clip(x_new, lp.l, lp.u, out=x_new)
        beta_after = beta - theta0 * abs(rc.E[j0])
        trace.append(IterationTrace(it, beta, j0, j1, theta0, f, beta_after))

        if beta_after <= OPT_TOL:
            return finish(Status.OPTIMAL, max(beta_after, 0.0), x_new, basis)
        if beta_after <= epsilon:
            return finish(Status.EPSILON_OPTIMAL, beta_after, x_new, basis)

        if j1 is not None:
            basis[basis.index(j1)] = j0
            try:
                LUFactor(lp.A[:, basis])
            except SingularBasisError as exc:
                raise SingularBasisError(
                    f"iteration {it}: swapping {j1} out for {j0} gives a singular support"
                ) from exc
        if theta0 <= DIR_TOL and abs(beta - last_beta) <= OPT_TOL:
            stall += 1
        else:
            stall = 0
        last_beta = beta
        x = x_new

    raise AssertionError("unreachable")


def _slack_plan(lp: BoundedCanonicalLP, xs: np.ndarray) -> Optional[SupportPlan]:
    ns = lp.n_structural
    s = lp.b - lp.A[:, :ns] @ xs
    lo, hi = lp.l[ns:], lp.u[ns:]
    tol = FEAS_TOL * np.maximum(1.0, np.abs(lp.b))
    if np.any(s < lo - tol) or np.any(s > hi + tol):
        return None
    s = np.clip(s, lo, hi)
    x = np.concatenate([xs, s])
    try:
        return make_plan(lp, x, range(ns, lp.n))
    except (InfeasibleError, SingularBasisError):
        return None


def _phase_one(lp: BoundedCanonicalLP) -> SupportPlan:
    m, n = lp.m, lp.n
    x0 = 0.5 * (lp.l + lp.u)
    r = lp.b - lp.A @ x0
    signs = np.where(r < 0, -1.0, 1.0)
    width = 2.0 * np.abs(r)
    aux = BoundedCanonicalLP(
        c=np.concatenate([np.zeros(n), -np.ones(m)]),
        A=np.hstack([lp.A, np.diag(signs)]),
        b=lp.b,
        l=np.concatenate([lp.l, np.zeros(m)]),
        u=np.concatenate([lp.u, width]),
    )
    start = SupportPlan(np.concatenate([x0, np.abs(r)]), tuple(range(n, n + m)))
    out = adaptive_solve(aux, start, epsilon=0.0)
    if out.status is not Status.OPTIMAL or -out.objective > PHASE_ONE_TOL:
        raise InfeasibleError(
            f"phase one ended with artificial sum {-out.objective:.3e} ({out.status.value})"
        )

    basis = list(out.plan.basis)
    x = np.array(out.x_star[:n])
    for pos, j in enumerate(basis):
        if j < n:
            continue
        lu = LUFactor(aux.A[:, basis])
        row = lu.solve_transposed(np.eye(m)[pos])  # row `pos` of A_B^{-1}
        cand = [k for k in range(n) if k not in basis]
        alpha = np.abs(row @ lp.A[:, cand]) if cand else np.zeros(0)
        if alpha.size == 0 or alpha.max() <= 1e-9:
            raise SingularBasisError("constraint matrix is rank deficient; no support exists")
        basis[pos] = cand[int(np.argmax(alpha))]

    lu = LUFactor(lp.A[:, basis])
    N = [k for k in range(n) if k not in basis]
    x[basis] = lu.solve(lp.b - lp.A[:, N] @ x[N])
    slack = 10 * PHASE_ONE_TOL * np.maximum(1.0, np.abs(x))
    if np.any(x < lp.l - slack) or np.any(x > lp.u + slack):
        raise InfeasibleError("phase one support could not be polished into a feasible plan")
    x = np.clip(x, lp.l, lp.u)
    return make_plan(lp, x, basis)


def initial_support_plan(lp: BoundedCanonicalLP) -> SupportPlan:
    """Build a starting supporting plan, raising InfeasibleError if none exists.

    Problems coming from ``to_canonical`` first try the slack support with the
    original variables at their lower bounds, then at their box midpoints.
    Anything else goes through an auxiliary problem with artificial columns.
    """
    if lp.n_structural is not None:
        ns = lp.n_structural
        for xs in (lp.l[:ns].copy(), 0.5 * (lp.l[:ns] + lp.u[:ns])):
            plan = _slack_plan(lp, xs)
            if plan is not None:
                return plan
    return _phase_one(lp)
