"""Command-line interface.

Exit codes: 0 success, 1 usage, 2 infeasible model or solver failure, 3 I/O or
unreadable input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tracemalloc
from pathlib import Path
from typing import Optional


from . import report as rpt
from .adaptive import Status, adaptive_solve, initial_support_plan
from .errors import MLMOLPError, ReducedModelInfeasible, ScenarioError
from .multilevel import (run_point, alpha_grid, alpha_sweep, run_algorithm2,
                         solve_levels_independently)
from .oracle import brute_force, random_instances
from .reduction import AlphaParams
from .scenario import bundled_scenario_path, load_problem
from .simplex import SimplexStatus, bounded_simplex_solve

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3
UNITS = {"millions": 1.0, "1e4": 100.0, "1e3": 1000.0}


def _unit_label(units: str) -> str:
    # vaccine scenarios are held in millions; other problems are unitless
    return "model units" if units == "millions" else f"units of {units} (model value x {UNITS[units]:g})"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _floats(text: str) -> list:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _grid(text: str, levels: int) -> list:
    vals = _floats(text)
    if not vals:
        raise UsageError("empty grid")
    try:
        if len(vals) == 1:
            return alpha_grid(levels, step=vals[0])
        return alpha_grid(levels, values=vals)
    except (ValueError, MLMOLPError) as exc:
        raise UsageError(str(exc)) from None


def _alphas(text: str, levels: int) -> AlphaParams:
    vals = _floats(text)
    if len(vals) == 1:
        vals = vals * levels
    if len(vals) != levels:
        raise UsageError(f"--alpha needs {levels} values, got {len(vals)}")
    try:
        return AlphaParams.per_level(vals)
    except MLMOLPError as exc:
        raise UsageError(str(exc)) from None


def _backends(text: str) -> tuple:
    if text == "both":
        return ("adaptive", "simplex")
    if text in ("adaptive", "simplex"):
        return (text,)
    raise UsageError(f"unknown backend set {text!r}")


def _jobs(flag: int) -> int:
    env = os.environ.get("MLMOLP_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"MLMOLP_JOBS must be an integer, got {env!r}") from None
    return max(1, flag)


def _gate(args) -> Optional[bool]:
    return None if args.gate is None else args.gate == "on"


def _out_format(args) -> str:
    if args.format:
        return args.format
    if args.output:
        return "json" if str(args.output).endswith(".json") else "csv"
    return "text"


def _emit(text: str, args) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _reports_out(reports, problem, args, title: str) -> None:
    fmt = _out_format(args)
    if fmt == "csv":
        _emit(rpt.to_csv(reports, problem), args)
    elif fmt == "json":
        _emit(rpt.to_json(reports, problem), args)
    else:
        scale = UNITS[args.units]
        cols = [f"alpha{i}" for i in range(1, problem.P)] + ["backend", "status"]
        cols += [f"f{p}" for p in range(1, problem.P + 1)]
        first = problem.variable_names()[0]
        cols += [first, "iterations", "wall_ms"]
        rows = []
        for r in reports:
            row = [rpt.fmt(a) for a in r.alphas] + [r.backend, rpt._status(r)]
            if r.ok:
                row += ["%.6g" % v for v in r.objective_values] + ["%.6g" % (scale * r.compromise[0])]
            else:
                row += [""] * (problem.P + 1)
            row += [str(r.iterations_total), "%.3f" % r.wall_ms]
            rows.append(row)
        head = f"# {title}; {first} in {_unit_label(args.units)}\n"
        _emit(head + rpt.format_table(cols, rows), args)


def cmd_levels(args, problem) -> int:
    sols = solve_levels_independently(problem, backend=args.backend)
    names = problem.variable_names()
    scale = UNITS[args.units]
    cols = ["level", "f_max"] + list(names)
    rows = [[str(s.p), "%.12g" % s.f_max] + ["%.12g" % (scale * v) for v in s.x_opt] for s in sols]
    fmt = _out_format(args)
    if fmt == "json":
        doc = {"units": args.units, "variables": list(names),
               "levels": [{"p": s.p, "f_max": rpt.r12(s.f_max), "x_opt": rpt.r12(scale * s.x_opt),
                           "iterations": s.iterations} for s in sols]}
        _emit(json.dumps(doc, indent=2) + "\n", args)
    elif fmt == "csv":
        _emit(rpt.rows_to_csv(cols, rows, problem.notes), args)
    else:
        text = f"# independent level optima; x in {_unit_label(args.units)}\n"
        text += "".join(f"f{s.p}_max = {s.f_max:.12g}\n" for s in sols)
        _emit(text + rpt.format_table(cols, rows), args)
    return EXIT_OK


def cmd_solve(args, problem) -> int:
    alphas = _alphas(args.alpha, problem.P - 1)
    def sink(level, rec):
        sys.stderr.write(json.dumps({"level": level, **rpt_trace(rec)}) + "\n")
    try:
        rep = run_algorithm2(problem, alphas, args.backend, args.epsilon, args.anchor,
                             gate=_gate(args), trace=sink if args.trace else None)
    except ReducedModelInfeasible as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVER
    fmt = _out_format(args)
    if fmt == "text":
        scale = UNITS[args.units]
        names = problem.variable_names()
        lines = [f"# compromise ({args.backend}, anchor={args.anchor}); x in {_unit_label(args.units)}",
                 "alphas = " + ",".join(rpt.fmt(a) for a in rep.alphas)]
        lines += [f"f{p} = {v:.12g}" for p, v in enumerate(rep.objective_values, 1)]
        lines += [f"{nm} = {scale * v:.12g}" for nm, v in zip(names, rep.compromise)]
        lines.append(f"iterations_total = {rep.iterations_total}")
        _emit("\n".join(lines) + "\n", args)
    else:
        _reports_out([rep], problem, args, "compromise")
    return EXIT_OK


def rpt_trace(rec: dict) -> dict:
    return {k: (rpt.r12(v) if isinstance(v, float) else v) for k, v in rec.items()}


def cmd_sweep(args, problem) -> int:
    grid = _grid(args.grid, problem.P - 1)
    reps = alpha_sweep(problem, grid, _backends(args.backends), args.epsilon, args.anchor,
                       gate=_gate(args), jobs=_jobs(args.jobs))
    _reports_out(reps, problem, args, f"alpha sweep over {len(grid)} grid points")
    return EXIT_OK


def cmd_compare(args, problem) -> int:
    grid = _grid(args.grid, problem.P - 1)
    backends = _backends(args.backends)
    sols = solve_levels_independently(problem)
    pairs = []
    for g in grid:
        by = {}
        for be in backends:
            tracemalloc.start()
            rep = run_point(problem, g, be, args.epsilon, args.anchor, _gate(args), sols)
            _, peak = tracemalloc.get_traced_memory()
            tracemalloc.stop()
            by[be] = (rep, peak / 1024.0)
        pairs.append((g.scalars(), by))
    cols = rpt.compare_columns(problem, backends)
    rows = rpt.compare_table(pairs, problem, backends)
    fmt = _out_format(args)
    if fmt == "json":
        doc = {"columns": cols, "rows": rows, "notes": list(problem.notes)}
        _emit(json.dumps(doc, indent=2) + "\n", args)
    elif fmt == "csv":
        _emit(rpt.rows_to_csv(cols, rows, problem.notes), args)
    else:
        _emit(rpt.format_table(cols, rows), args)
    return EXIT_OK


def cmd_oracle(args) -> int:
    insts = random_instances(args.random, seed=args.seed)
    passed = failed = 0
    for k, inst in enumerate(insts):
        ref = brute_force(inst.canonical)
        ok = ref.feasible
        if ok:
            scale = max(1.0, abs(ref.objective))
            a = adaptive_solve(inst.canonical, initial_support_plan(inst.canonical))
            s = bounded_simplex_solve(inst.canonical)
            ok = (a.status in (Status.OPTIMAL, Status.EPSILON_OPTIMAL)
                  and s.status is SimplexStatus.OPTIMAL
                  and abs(a.objective - ref.objective) <= 1e-6 * scale
                  and abs(s.objective - ref.objective) <= 1e-6 * scale)
        if ok:
            passed += 1
        else:
            failed += 1
            print(f"instance {k}: mismatch")
    print(f"oracle: {passed} passed, {failed} failed of {len(insts)}")
    return EXIT_OK if failed == 0 else EXIT_SOLVER


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mlmolp", description="Multilevel mono-objective LP solver")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(p, alpha=False):
        p.add_argument("--problem", default=None,
                       help="scenario or problem file (default: bundled vaccine dataset)")
        p.add_argument("--production-cap", type=float, default=None)
        p.add_argument("--output", default=None)
        p.add_argument("--format", choices=("text", "csv", "json"), default=None)
        p.add_argument("--units", choices=tuple(UNITS), default="millions",
                       help="display unit for the vaccine quantities in text tables")
        if alpha:
            p.add_argument("--epsilon", type=float, default=1e-9)
            p.add_argument("--anchor", choices=("chain", "independent"), default="chain")
            p.add_argument("--gate", choices=("on", "off"), default=None,
                           help="override the problem's coefficient gate")

    p = sub.add_parser("solve", help="one hierarchical compromise")
    common(p, alpha=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--backend", choices=("adaptive", "simplex"), default="adaptive")
    p.add_argument("--trace", action="store_true", help="adaptive iterations as JSONL on stderr")

    p = sub.add_parser("sweep", help="grid of compromises")
    common(p, alpha=True)
    p.add_argument("--grid", default="0.25")
    p.add_argument("--backends", default="both")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("compare", help="side-by-side backend table")
    common(p, alpha=True)
    p.add_argument("--grid", default="0.25")
    p.add_argument("--backends", default="both")

    p = sub.add_parser("levels", help="independent level optima only")
    common(p)
    p.add_argument("--backend", choices=("adaptive", "simplex"), default="simplex")

    p = sub.add_parser("oracle", help="brute-force cross-validation on random LPs")
    p.add_argument("--random", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        if args.command == "oracle":
            return cmd_oracle(args)
        if getattr(args, "epsilon", 0.0) < 0:
            raise UsageError("--epsilon must be nonnegative")
        path = args.problem or bundled_scenario_path()
        try:
            problem = load_problem(path, args.production_cap)
        except (OSError, ScenarioError) as exc:
            sys.stderr.write(f"error: {exc}\n")
            return EXIT_IO
        handler = {"solve": cmd_solve, "sweep": cmd_sweep, "compare": cmd_compare,
                   "levels": cmd_levels}[args.command]
        return handler(args, problem)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except MLMOLPError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
