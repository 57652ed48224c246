"""CSV and JSON emission of compromise reports.

Numbers are written with 12 significant digits and a '.' decimal separator,
independent of locale. The CSV may start with ``#`` comment lines carrying
notes about the model; ``read_csv`` skips them.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .multilevel import CompromiseReport, MultilevelProblem

TIMING_COLUMNS = ("wall_ms",)


def fmt(v) -> str:
    if v is None:
        return ""
    return "%.12g" % float(v)


def r12(v):
    """Round to 12 significant digits, recursing through lists."""
    if v is None:
        return None
    if isinstance(v, (list, tuple, np.ndarray)):
        return [r12(x) for x in v]
    return float("%.12g" % float(v))


def csv_columns(problem: MultilevelProblem) -> list:
    cols = [f"alpha{i}" for i in range(1, problem.P)]
    cols += ["backend", "status"]
    cols += [f"f{p}" for p in range(1, problem.P + 1)]
    cols += list(problem.variable_names())
    cols += ["iterations_total", "wall_ms"]
    return cols


def _status(rep: CompromiseReport) -> str:
    if rep.ok:
        return "ok"
    if rep.failed_level is not None:
        return f"{rep.status}:level{rep.failed_level}"
    return rep.status


def csv_row(rep: CompromiseReport, problem: MultilevelProblem) -> list:
    alphas = list(rep.alphas) + [0.0] * (problem.P - 1 - len(rep.alphas))
    row = [fmt(a) for a in alphas[: problem.P - 1]]
    row += [rep.backend, _status(rep)]
    if rep.ok:
        row += [fmt(v) for v in rep.objective_values]
        row += [fmt(v) for v in rep.compromise]
    else:
        row += [""] * (problem.P + problem.n)
    row += [str(rep.iterations_total), fmt(rep.wall_ms)]
    return row


def to_csv(reports: Sequence[CompromiseReport], problem: MultilevelProblem,
           notes: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for note in list(problem.notes) + list(notes):
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(csv_columns(problem))
    for rep in reports:
        w.writerow(csv_row(rep, problem))
    return buf.getvalue()


def read_csv(text: str) -> list:
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def report_to_dict(rep: CompromiseReport, problem: Optional[MultilevelProblem] = None) -> dict:
    d = {
        "alphas": r12(rep.alphas),
        "backend": rep.backend,
        "anchor": rep.anchor,
        "epsilon": r12(rep.epsilon),
        "status": rep.status,
        "error": rep.error,
        "failed_level": rep.failed_level,
        "level_solutions": [
            {"p": s.p, "x_opt": r12(s.x_opt), "f_max": r12(s.f_max), "method": s.method,
             "iterations": s.iterations, "wall_ms": r12(s.wall_ms)}
            for s in rep.level_solutions
        ],
        "bounds_history": [{"level": b.level, "l": r12(b.l), "u": r12(b.u)}
                           for b in rep.bounds_history],
        "level_compromises": [r12(x) for x in rep.level_compromises],
        "compromise": r12(rep.compromise),
        "objective_values": r12(rep.objective_values),
        "iterations": list(rep.iterations),
        "timings_ms": r12(rep.timings_ms),
        "iterations_total": rep.iterations_total,
        "wall_ms": r12(rep.wall_ms),
    }
    if problem is not None:
        d["variables"] = list(problem.variable_names())
    return d


def to_json(reports: Sequence[CompromiseReport], problem: MultilevelProblem,
            notes: Sequence[str] = ()) -> str:
    doc = {
        "schema_version": 1,
        "notes": list(problem.notes) + list(notes),
        "variables": list(problem.variable_names()),
        "reports": [report_to_dict(r) for r in reports],
    }
    return json.dumps(doc, indent=2) + "\n"


def write_report(reports: Sequence[CompromiseReport], problem: MultilevelProblem, fmt_: str,
                 path, notes: Sequence[str] = ()) -> None:
    if not reports:
        raise ValueError("no reports to write")
    if fmt_ == "csv":
        text = to_csv(reports, problem, notes)
    elif fmt_ == "json":
        text = to_json(reports, problem, notes)
    else:
        raise ValueError(f"unknown report format {fmt_!r}")
    Path(path).write_text(text)


def compare_columns(problem: MultilevelProblem, backends: Sequence[str]) -> list:
    cols = [f"alpha{i}" for i in range(1, problem.P)]
    first = problem.variable_names()[0]
    for be in backends:
        cols += [f"{be}_status", f"{be}_{first}"]
        cols += [f"{be}_f{p}" for p in range(1, problem.P + 1)]
        cols += [f"{be}_iterations", f"{be}_wall_ms", f"{be}_peak_kib"]
    return cols


def compare_table(pairs: Sequence[tuple], problem: MultilevelProblem,
                  backends: Sequence[str]) -> list:
    """Rows for a side-by-side backend table.

    ``pairs`` holds ``(alphas, {backend: (report, peak_kib)})`` per grid point.
    """
    rows = []
    for alphas, by_backend in pairs:
        row = [fmt(a) for a in alphas]
        for be in backends:
            rep, peak = by_backend[be]
            row += [_status(rep), fmt(rep.compromise[0]) if rep.ok else ""]
            row += [fmt(v) for v in rep.objective_values] if rep.ok else [""] * problem.P
            row += [str(rep.iterations_total), fmt(rep.wall_ms), fmt(peak)]
        rows.append(row)
    return rows


def rows_to_csv(columns: Sequence[str], rows: Sequence[Sequence[str]],
                notes: Sequence[str] = ()) -> str:
    buf = io.StringIO()
    for note in notes:
        buf.write(f"# {note}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def strip_timing(text: str, extra: Sequence[str] = ()) -> str:
    """CSV text with the timing and memory columns removed, for reproducibility diffs."""
    lines = text.splitlines()
    head = [ln for ln in lines if ln.startswith("#")]
    body = list(csv.reader([ln for ln in lines if not ln.startswith("#")]))
    if not body:
        return text
    drop = {i for i, c in enumerate(body[0])
            if c in TIMING_COLUMNS or c in extra or c.endswith("_wall_ms") or c.endswith("_peak_kib")}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for r in body:
        w.writerow([v for i, v in enumerate(r) if i not in drop])
    return "\n".join(head + [""]) + buf.getvalue() if head else buf.getvalue()


def format_table(columns: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(c)), *(len(str(r[i])) for r in rows)) if rows else len(str(c))
              for i, c in enumerate(columns)]
    out = ["  ".join(str(c).rjust(w) for c, w in zip(columns, widths))]
    for r in rows:
        out.append("  ".join(str(v).rjust(w) for v, w in zip(r, widths)))
    return "\n".join(out) + "\n"
