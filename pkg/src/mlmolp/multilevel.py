"""Hierarchical solve: independent level optima, ideal box, then level-by-level reduction."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .adaptive import Status, adaptive_solve, initial_support_plan
from .errors import (DimensionError, InfeasibleError, MLMOLPError, ReducedModelInfeasible,
                     UnboundedError)
from .lp import FEAS_TOL, InequalityLP, to_canonical
from .reduction import AlphaParams, apply_xi, ideal_bounds, level_slice
from .simplex import SimplexStatus, bounded_simplex_solve, simplex_solve

BACKENDS = ("adaptive", "simplex")
ANCHORS = ("chain", "independent")


@dataclass(frozen=True, eq=False)
class MultilevelProblem:
    """max c_p.x for each level p over the shared region A x <= b, x >= 0.

    ``partition[p-1]`` is the number of variables controlled by level p; the
    variables are laid out level after level. ``coefficient_gate`` selects
    whether a preceding level's intervals are only reduced when the variable
    appears in both adjacent objectives.
    """

    partition: tuple
    objectives: np.ndarray
    A: np.ndarray
    b: np.ndarray
    names: Optional[tuple] = None
    coefficient_gate: bool = True
    notes: tuple = ()

    def __post_init__(self):
        part = tuple(int(v) for v in self.partition)
        C = np.array(self.objectives, dtype=float)
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float)
        if len(part) < 2 or any(v < 0 for v in part):
            raise DimensionError("need at least two levels with nonnegative variable counts")
        n = sum(part)
        if C.shape != (len(part), n):
            raise DimensionError(f"objectives must be {len(part)}x{n}, got {C.shape}")
        if A.ndim != 2 or A.shape[1] != n or b.shape != (A.shape[0],):
            raise DimensionError(f"A must be m x {n} with b of length m")
        if self.names is not None and len(self.names) != n:
            raise DimensionError("one name per variable required")
        for arr in (C, A, b):
            if not np.all(np.isfinite(arr)):
                raise DimensionError("problem data has non-finite entries")
            arr.setflags(write=False)
        object.__setattr__(self, "partition", part)
        object.__setattr__(self, "objectives", C)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(str(s) for s in self.names))

    @property
    def P(self) -> int:
        return len(self.partition)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def variable_names(self) -> tuple:
        if self.names is not None:
            return self.names
        return tuple(f"x{p}_{j + 1}" for p, k in enumerate(self.partition, 1) for j in range(k))

    def coefficient(self, p: int, i: int, j: int) -> float:
        """Coefficient of level i's j-th variable (1-based) in level p's objective."""
        sl = level_slice(self.partition, i)
        if not 1 <= j <= sl.stop - sl.start:
            raise DimensionError(f"level {i} controls {sl.stop - sl.start} variables")
        return float(self.objectives[p - 1, sl.start + j - 1])

    def region(self, c=None) -> InequalityLP:
        return InequalityLP(c=self.objectives[0] if c is None else c, A=self.A, b=self.b)

    def is_feasible(self, x, tol: float = FEAS_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(self.A @ x <= self.b + tol) and np.all(x >= -tol))

    def evaluate(self, x) -> np.ndarray:
        return self.objectives @ np.asarray(x, dtype=float)


@dataclass
class LevelSolution:
    p: int
    x_opt: np.ndarray
    f_max: float
    method: str
    iterations: int
    wall_ms: float = 0.0


@dataclass
class CompromiseReport:
    alphas: list
    backend: str
    anchor: str
    epsilon: float
    status: str = "ok"
    error: Optional[str] = None
    failed_level: Optional[int] = None
    level_solutions: list = field(default_factory=list)
    bounds_history: list = field(default_factory=list)
    level_compromises: list = field(default_factory=list)
    compromise: Optional[np.ndarray] = None
    objective_values: Optional[np.ndarray] = None
    iterations: list = field(default_factory=list)
    timings_ms: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def iterations_total(self) -> int:
        return int(sum(s.iterations for s in self.level_solutions) + sum(self.iterations))

    @property
    def wall_ms(self) -> float:
        return float(sum(s.wall_ms for s in self.level_solutions) + sum(self.timings_ms))


def _box_for_region(problem: MultilevelProblem) -> np.ndarray:
    """Upper bound on each variable over the shared region, for box-based backends."""
    ub = np.empty(problem.n)
    for j in range(problem.n):
        out = simplex_solve(problem.region(np.eye(problem.n)[j]))
        if out.status is SimplexStatus.UNBOUNDED:
            raise UnboundedError(f"variable {j} is unbounded over the shared region")
        if out.status is not SimplexStatus.OPTIMAL:
            raise InfeasibleError("shared region is empty")
        ub[j] = out.objective
    return ub


def solve_boxed(problem: MultilevelProblem, c, l, u, backend: str, epsilon: float = 1e-9,
                trace: Optional[Callable] = None):
    """max c.x over A x <= b inside the box [l, u]; returns (x, objective, iterations).

    ``trace`` receives one dict per adaptive iteration.
    """
    canon = to_canonical(problem.region(c), l, u)
    if backend == "adaptive":
        plan = initial_support_plan(canon)
        out = adaptive_solve(canon, plan, epsilon=epsilon)
        if out.status not in (Status.OPTIMAL, Status.EPSILON_OPTIMAL):
            raise MLMOLPError(f"adaptive solve stopped with status {out.status.value}")
        x, iters = out.x_star, out.iterations
        if trace is not None:
            for rec in out.trace:
                trace(rec.as_record())
    elif backend == "simplex":
        out = bounded_simplex_solve(canon)
        if out.status is SimplexStatus.INFEASIBLE:
            raise InfeasibleError("boxed model is infeasible")
        if out.status is not SimplexStatus.OPTIMAL:
            raise MLMOLPError(f"bounded simplex stopped with status {out.status.value}")
        x, iters = out.x_star, out.iterations
    else:
        raise ValueError(f"unknown backend {backend!r}")
    xs = canon.project(x)
    return xs, float(np.asarray(c) @ xs), int(iters)


def solve_levels_independently(problem: MultilevelProblem, backend: str = "simplex") -> list:
    """Each level's own optimum over the shared region."""
    sols = []
    box = None
    for p in range(1, problem.P + 1):
        c = problem.objectives[p - 1]
        t0 = time.perf_counter()
        if backend == "simplex":
            out = simplex_solve(problem.region(c))
            if out.status is SimplexStatus.INFEASIBLE:
                raise InfeasibleError(f"level {p}: shared region is empty")
            if out.status is SimplexStatus.UNBOUNDED:
                raise UnboundedError(f"level {p}: objective is unbounded over the shared region")
            if out.status is not SimplexStatus.OPTIMAL:
                raise MLMOLPError(f"level {p}: simplex stopped with status {out.status.value}")
            x, f, iters = out.x_star, out.objective, out.iterations
        elif backend == "adaptive":
            if box is None:
                box = _box_for_region(problem)
            try:
                x, f, iters = solve_boxed(problem, c, np.zeros(problem.n), box, "adaptive")
            except MLMOLPError as exc:
                raise type(exc)(f"level {p}: {exc}") from exc
        else:
            raise ValueError(f"unknown backend {backend!r}")
        ms = 1e3 * (time.perf_counter() - t0)
        sols.append(LevelSolution(p=p, x_opt=np.asarray(x, dtype=float), f_max=float(f),
                                  method=backend, iterations=int(iters), wall_ms=ms))
    return sols


def run_algorithm2(problem: MultilevelProblem, alphas: AlphaParams, backend: str = "adaptive",
                   epsilon: float = 1e-9, anchor: str = "chain",
                   gate: Optional[bool] = None, level_solutions: Optional[list] = None,
                   trace: Optional[Callable] = None) -> CompromiseReport:
    """Hierarchical compromise; raises ReducedModelInfeasible when a reduced box is empty.

    ``level_solutions`` lets a caller reuse Step-1 results across many runs.
    ``trace(level, record)`` is called for every adaptive iteration.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}")
    if anchor not in ANCHORS:
        raise ValueError(f"anchor must be one of {ANCHORS}")
    if not isinstance(alphas, AlphaParams):
        alphas = AlphaParams.per_level(alphas)
    if gate is None:
        gate = problem.coefficient_gate

    report = CompromiseReport(alphas=alphas.scalars(), backend=backend, anchor=anchor,
                              epsilon=float(epsilon))
    sols = level_solutions if level_solutions is not None else solve_levels_independently(problem)
    report.level_solutions = list(sols)
    bounds = ideal_bounds([s.x_opt for s in sols])
    report.bounds_history.append(bounds)

    prev = sols[0].x_opt
    x_hat = prev
    for p in range(2, problem.P + 1):
        bounds = apply_xi(p, bounds, prev, problem.objectives[p - 2], problem.objectives[p - 1],
                          alphas, problem.partition, gate=gate)
        report.bounds_history.append(bounds)
        t0 = time.perf_counter()
        try:
            sink = None if trace is None else (lambda rec, p=p: trace(p, rec))
            x_hat, _, iters = solve_boxed(problem, problem.objectives[p - 1], bounds.l, bounds.u,
                                          backend, epsilon, sink)
        except InfeasibleError as exc:
            err = ReducedModelInfeasible(p, bounds.l, bounds.u, str(exc))
            report.status, report.error, report.failed_level = "infeasible", str(err), p
            err.report = report
            raise err from exc
        report.timings_ms.append(1e3 * (time.perf_counter() - t0))
        report.iterations.append(iters)
        report.level_compromises.append(x_hat)
        prev = x_hat if anchor == "chain" else sols[p - 1].x_opt

    report.compromise = np.asarray(x_hat, dtype=float)
    report.objective_values = problem.evaluate(report.compromise)
    return report


def default_jobs() -> int:
    env = os.environ.get("MLMOLP_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def run_point(problem, alphas, backend, epsilon, anchor, gate, sols):
    try:
        return run_algorithm2(problem, alphas, backend, epsilon, anchor, gate, sols)
    except ReducedModelInfeasible as exc:
        partial = getattr(exc, "report", None)
        if partial is not None:
            return partial
        return CompromiseReport(alphas=alphas.scalars(), backend=backend, anchor=anchor,
                                epsilon=epsilon, status="infeasible", error=str(exc),
                                failed_level=exc.level, level_solutions=list(sols))
    except MLMOLPError as exc:
        return CompromiseReport(alphas=alphas.scalars(), backend=backend, anchor=anchor,
                                epsilon=epsilon, status="failed", error=str(exc),
                                level_solutions=list(sols))


def alpha_sweep(problem: MultilevelProblem, grid: Sequence, backends: Sequence[str] = BACKENDS,
                epsilon: float = 1e-9, anchor: str = "chain", gate: Optional[bool] = None,
                jobs: Optional[int] = None) -> list:
    """Every (grid point, backend) pair, in grid-major order; failures are recorded per point."""
    grid = [g if isinstance(g, AlphaParams) else AlphaParams.per_level(g) for g in grid]
    if not grid:
        raise ValueError("alpha grid is empty")
    sols = solve_levels_independently(problem)
    tasks = [(g, be) for g in grid for be in backends]
    jobs = default_jobs() if jobs is None else max(1, int(jobs))

    def run(task):
        g, be = task
        return run_point(problem, g, be, epsilon, anchor, gate, sols)

    if jobs == 1:
        return [run(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run, tasks))


def alpha_grid(levels: int, step: Optional[float] = None, values: Optional[Sequence] = None) -> list:
    """Cartesian grid over the ``levels`` reducing levels (P - 1 of them)."""
    if values is None:
        if step is None or not 0 < step <= 1:
            raise ValueError("grid step must lie in (0, 1]")
        k = int(round(1.0 / step))
        if abs(k * step - 1.0) > 1e-9:
            raise ValueError("grid step must divide 1")
        values = [i / k for i in range(k + 1)]
    values = [float(v) for v in values]
    out = [[]]
    for _ in range(levels):
        out = [row + [v] for row in out for v in values]
    return [AlphaParams.per_level(row) for row in out]
