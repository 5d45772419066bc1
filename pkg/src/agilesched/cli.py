"""Command-line front end.

Subcommands: ``generate``, ``solve``, ``validate``, ``export-lp``,
``benchmark`` and ``gantt``.  Exit codes: 0 success, 2 invalid input,
3 failed solve, 4 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

from .domain import (
    Instance,
    InstanceError,
    SolveReport,
    assigned_task_count,
    parse_instance,
    parse_schedule,
    write_instance,
    write_schedule,
)
from .gantt import render_gantt
from .heuristic import lambda_lower_bound, prune_clusters, solve_fifo, solve_heuristic
from .milp import build_model, export_lp
from .scengen import SynthSpec, random_window_instance, synth_instance
from .solver.bnb import BnbLimits, solve_exact
from .validator import StructuralError, validate_schedule

EXIT_OK, EXIT_INPUT, EXIT_SOLVE, EXIT_INVALID = 0, 2, 3, 4
SOLVED = ("Optimal", "TimeLimit", "Feasible")


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror or e}") from None


def _load_instance(path: str) -> Instance:
    try:
        return parse_instance(_read(path))
    except InstanceError as e:
        raise InputError(f"{path}: {e}") from None


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# --------------------------------------------------------------------------
# Benchmark


ALGO_LABEL = {"exact": "Direct MILP", "fifo": "FIFO"}


@dataclass(frozen=True)
class BenchmarkRow:
    scenario: str
    algorithm: str
    lam: Optional[int]
    lambda_lb: int
    objective: float
    gap_pct: float
    assigned: int
    rel_perf_pct: Optional[float]
    time_s: float
    rel_time_pct: Optional[float]
    status: str
    nodes: int

    @property
    def j_text(self) -> str:
        j = f"{self.objective:.0f}"
        if self.gap_pct > 0:
            p = f"{self.gap_pct:.2f}".rstrip("0").rstrip(".")
            return f"{j} ({p}%)"
        return j

    def stable(self) -> tuple:
        """Every field except the wall-clock ones."""
        d = asdict(self)
        d.pop("time_s")
        d.pop("rel_time_pct")
        return tuple(d.values())


CSV_FIELDS = (
    "scenario", "algorithm", "lambda", "lambda_lb", "J", "J_text", "gap_pct", "assigned",
    "rel_perf_pct", "time_s", "rel_time_pct", "status", "nodes",
)


def _opt(x: Optional[float], fmt: str) -> str:
    return "" if x is None else format(x, fmt)


def run_benchmark(
    instances: Sequence[tuple[str, Instance]],
    algorithms: Sequence[str] = ("exact", "heuristic", "fifo"),
    limits: BnbLimits = BnbLimits(),
    lambda_offsets: Sequence[int] = (0, 1, 2, 3),
) -> list[BenchmarkRow]:
    """One row per (instance, algorithm); heuristic gets one row per lambda.

    Relative columns are percentages of the exact row of the same scenario
    and are left empty when that row is missing or failed.
    """
    if not instances:
        raise ValueError("benchmark needs at least one instance")
    rows: list[BenchmarkRow] = []
    for name, inst in instances:
        lam_lb = lambda_lower_bound(inst)
        runs: list[tuple[str, Optional[int], Optional[SolveReport]]] = []
        for algo in algorithms:
            if algo == "heuristic":
                for off in lambda_offsets:
                    lam = lam_lb + off
                    runs.append((f"MILP-heuristic({lam})", lam, _try(lambda: solve_heuristic(inst, lam, limits))))
            elif algo == "exact":
                runs.append((ALGO_LABEL[algo], None, _try(lambda: solve_exact(build_model(inst), limits))))
            elif algo == "fifo":
                runs.append((ALGO_LABEL[algo], None, _try(lambda: solve_fifo(inst))))
            else:
                raise ValueError(f"unknown algorithm {algo!r}")
        ref = next((r for label, _, r in runs if label == "Direct MILP" and r is not None and r.status in SOLVED), None)
        for label, lam, rep in runs:
            if rep is None or rep.status not in SOLVED:
                rows.append(BenchmarkRow(name, label, lam, lam_lb, 0.0, 0.0, 0, None, 0.0, None,
                                         "failed" if rep is None else rep.status, 0))
                continue
            rel = rt = None
            if ref is not None:
                rel = 100.0 * rep.objective / ref.objective if ref.objective > 0 else None
                rt = 100.0 * rep.wall_time_s / ref.wall_time_s if ref.wall_time_s > 0 else None
            rows.append(
                BenchmarkRow(
                    name, label, lam, lam_lb, rep.objective, rep.gap * 100.0,
                    assigned_task_count(rep.schedule), rel, rep.wall_time_s, rt, rep.status, rep.nodes_explored,
                )
            )
    return rows


def _try(fn) -> Optional[SolveReport]:
    try:
        return fn()
    except (ArithmeticError, ValueError, RuntimeError):
        return None


def rows_to_csv(rows: Sequence[BenchmarkRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in rows:
        w.writerow([
            r.scenario, r.algorithm, "" if r.lam is None else r.lam, r.lambda_lb, f"{r.objective:.0f}", r.j_text,
            f"{r.gap_pct:.6f}", r.assigned, _opt(r.rel_perf_pct, ".6f"), f"{r.time_s:.6f}",
            _opt(r.rel_time_pct, ".6f"), r.status, r.nodes,
        ])
    return buf.getvalue()


def rows_to_text(rows: Sequence[BenchmarkRow]) -> str:
    head = ("Scenario", "Algorithm", "J", "Tasks", "Rel. perf", "Time (s)", "Rel. time", "lambda_LB", "Status")
    body = [
        (
            r.scenario, r.algorithm, r.j_text, str(r.assigned),
            _opt(r.rel_perf_pct, ".0f") + ("%" if r.rel_perf_pct is not None else ""),
            f"{r.time_s:.2f}", _opt(r.rel_time_pct, ".2f") + ("%" if r.rel_time_pct is not None else ""),
            str(r.lambda_lb), r.status,
        )
        for r in rows
    ]
    widths = [max(len(x) for x in col) for col in zip(head, *body)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(line, widths)).rstrip() for line in [head, *body]]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# Subcommands


def _limits(args) -> BnbLimits:
    try:
        return BnbLimits(time_limit_s=args.time_limit)
    except ValueError as e:
        raise InputError(str(e)) from None


def cmd_generate(args) -> int:
    if args.tiny:
        inst = random_window_instance(
            args.seed, n_tasks=args.tasks, n_sats=args.satellites, n_stations=max(args.stations, 1),
            max_windows_per_task=args.windows, n_dtws=args.dtws, horizon_s=args.horizon or 600.0,
        )
    else:
        spec = SynthSpec(
            n_tasks=args.tasks, task_kind=args.kind, n_satellites=args.satellites, n_stations=args.stations,
            seed=args.seed, stereo_fraction=args.stereo_fraction, horizon_s=args.horizon or 86400.0,
        )
        try:
            spec.validate()
        except ValueError as e:
            raise InputError(str(e)) from None
        inst = synth_instance(spec)
    _emit(write_instance(inst), args.output)
    return EXIT_OK


def _solve(inst: Instance, args) -> SolveReport:
    limits = _limits(args)
    if args.algo == "exact":
        return solve_exact(build_model(inst), limits, deterministic=args.deterministic)
    if args.algo == "heuristic":
        if args.lam is not None and args.lam < 1:
            raise InputError("--lambda must be at least 1")
        return solve_heuristic(inst, args.lam, limits)
    return solve_fifo(inst)


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    try:
        rep = _solve(inst, args)
    except (ArithmeticError, RuntimeError) as e:
        print(f"solve failed: {e}", file=sys.stderr)
        return EXIT_SOLVE
    summary = (
        f"algorithm={rep.algorithm} status={rep.status} J={rep.render_objective()} "
        f"bound={rep.dual_bound:g} nodes={rep.nodes_explored}"
    )
    print(summary if args.deterministic else f"{summary} time={rep.wall_time_s:.3f}s", file=sys.stderr)
    if rep.status not in SOLVED:
        return EXIT_SOLVE
    _emit(write_schedule(rep.schedule), args.output)
    if args.report:
        Path(args.report).write_text(json.dumps(
            {
                "algorithm": rep.algorithm, "status": rep.status, "objective": rep.objective,
                "dual_bound": rep.dual_bound, "gap": rep.gap, "nodes": rep.nodes_explored,
                **({} if args.deterministic else {"wall_time_s": rep.wall_time_s}),
            },
            indent=1, sort_keys=True,
        ) + "\n")
    if not validate_schedule(inst, rep.schedule).passed:
        return EXIT_INVALID
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = _load_instance(args.instance)
    try:
        sch = parse_schedule(_read(args.schedule))
        v = validate_schedule(inst, sch, tol_s=args.tol)
    except (InstanceError, StructuralError) as e:
        raise InputError(f"{args.schedule}: {e}") from None
    sys.stdout.write(v.render())
    if args.json:
        Path(args.json).write_text(json.dumps(v.to_dict(), indent=1) + "\n")
    return EXIT_OK if v.passed else EXIT_INVALID


def cmd_export_lp(args) -> int:
    inst = _load_instance(args.instance)
    keep = None
    if args.lam is not None:
        if args.lam < 1:
            raise InputError("--lambda must be at least 1")
        keep = prune_clusters(inst, args.lam).retained
    _emit(export_lp(build_model(inst, keep=keep, name=Path(args.instance).stem)), args.output)
    return EXIT_OK


def _gen_spec(text: str) -> tuple[str, Instance]:
    try:
        n, kind, seed = text.split(":")
        spec = SynthSpec(n_tasks=int(n), task_kind=kind, seed=int(seed))
        spec.validate()
    except ValueError as e:
        raise InputError(f"bad --generate value {text!r} (want N:KIND:SEED): {e}") from None
    return f"{n}-{kind}-{seed}", synth_instance(spec)


def cmd_benchmark(args) -> int:
    insts = [(Path(p).stem, _load_instance(p)) for p in args.instances]
    insts += [_gen_spec(g) for g in args.generate]
    if not insts:
        raise InputError("benchmark needs instance files or --generate")
    rows = run_benchmark(insts, args.algos, _limits(args), args.lambda_offsets)
    sys.stdout.write(rows_to_text(rows))
    if args.csv:
        Path(args.csv).write_text(rows_to_csv(rows))
    return EXIT_OK if all(r.status in SOLVED for r in rows) else EXIT_SOLVE


def cmd_gantt(args) -> int:
    inst = _load_instance(args.instance)
    try:
        sch = parse_schedule(_read(args.schedule))
        v = validate_schedule(inst, sch)
    except (InstanceError, StructuralError) as e:
        raise InputError(f"{args.schedule}: {e}") from None
    if not v.passed:
        sys.stderr.write(v.render())
        return EXIT_INVALID
    _emit(render_gantt(inst, sch, check=False), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="agilesched", description="Agile satellite observation and download scheduling")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded instance file")
    g.add_argument("--tasks", type=int, default=30)
    g.add_argument("--kind", choices=("spot", "strip"), default="spot")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--satellites", type=int, default=4)
    g.add_argument("--stations", type=int, default=2)
    g.add_argument("--stereo-fraction", type=float, default=0.1)
    g.add_argument("--horizon", type=float, default=None, help="seconds")
    g.add_argument("--tiny", action="store_true", help="abstract windows in a short horizon")
    g.add_argument("--windows", type=int, default=2, help="max windows per task (--tiny)")
    g.add_argument("--dtws", type=int, default=2, help="contact windows (--tiny)")
    g.add_argument("-o", "--output")
    g.set_defaults(fn=cmd_generate)

    s = sub.add_parser("solve", help="schedule an instance")
    s.add_argument("instance")
    s.add_argument("--algo", choices=("exact", "heuristic", "fifo"), default="exact")
    s.add_argument("--lambda", dest="lam", type=int, default=None, help="windows kept per cluster")
    s.add_argument("--time-limit", type=float, default=10800.0)
    s.add_argument("--deterministic", action="store_true")
    s.add_argument("-o", "--output")
    s.add_argument("--report", help="write a JSON solve summary")
    s.set_defaults(fn=cmd_solve)

    v = sub.add_parser("validate", help="check a schedule against an instance")
    v.add_argument("instance")
    v.add_argument("schedule")
    v.add_argument("--tol", type=float, default=1e-6)
    v.add_argument("--json", help="write findings as JSON")
    v.set_defaults(fn=cmd_validate)

    e = sub.add_parser("export-lp", help="write the MILP in LP format")
    e.add_argument("instance")
    e.add_argument("--lambda", dest="lam", type=int, default=None, help="prune windows first")
    e.add_argument("-o", "--output")
    e.set_defaults(fn=cmd_export_lp)

    b = sub.add_parser("benchmark", help="compare exact, heuristic and FIFO")
    b.add_argument("instances", nargs="*")
    b.add_argument("--generate", action="append", default=[], metavar="N:KIND:SEED")
    b.add_argument("--algos", nargs="+", choices=("exact", "heuristic", "fifo"), default=["exact", "heuristic", "fifo"])
    b.add_argument("--lambda-offsets", nargs="+", type=int, default=[0, 1, 2, 3])
    b.add_argument("--time-limit", type=float, default=10800.0)
    b.add_argument("--csv")
    b.add_argument("--deterministic", action="store_true", help="accepted; the search is always single-worker")
    b.set_defaults(fn=cmd_benchmark)

    k = sub.add_parser("gantt", help="draw a schedule as SVG")
    k.add_argument("instance")
    k.add_argument("schedule")
    k.add_argument("-o", "--output")
    k.set_defaults(fn=cmd_gantt)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
