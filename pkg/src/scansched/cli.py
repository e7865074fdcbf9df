"""Command line front end.

Subcommands: balance (emit a migration plan), simulate (one run to CSV),
sweep (scaling study), crossover (bisect the worthwhile-imbalance point),
cost (shape enumeration table). Exit code 0 on success, 1 on usage errors,
2 on validation failures in the inputs.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import psts
from .cost_model import (
    BurstScenario,
    ConcentrateScenario,
    CrossoverQuery,
    StepCosts,
    estimate_crossover,
    verify_optimality,
)
from .simulator import (
    REPORT_COLUMNS,
    Policy,
    SweepConfig,
    format_cell,
    report_row,
    simulate,
    sweep,
)
from .topology import GridShape, chain_cluster, embed, parse_topology
from .workload import generate_workload, parse_gen_spec, parse_tasks

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 (not 2) on usage errors."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _shape(text: str) -> GridShape:
    try:
        dims = tuple(int(part) for part in text.split("x"))
        return GridShape(dims)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad shape {text!r}: {exc}") from None


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def _policy(text: str) -> Policy:
    try:
        return Policy.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(out: Optional[str], text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _add_topology_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--topology", required=True, metavar="FILE", help="cluster description file")
    sub.add_argument("--shape", type=_shape, default=None, help="grid shape like 2x3x3 (default: binary hyper-grid)")


def _add_task_args(sub: argparse.ArgumentParser) -> None:
    group = sub.add_mutually_exclusive_group(required=True)
    group.add_argument("--tasks", metavar="FILE", help="task list file")
    group.add_argument("--gen", metavar="SPEC", help="generator recipe like m=100,beta=uniform:1:9,seed=7")
    sub.add_argument("--seed", type=int, default=None, help="override the generator seed")


def _load_instance(args: argparse.Namespace):
    cluster = parse_topology(_read(args.topology))
    hg = embed(cluster, args.shape)
    if args.tasks is not None:
        tasks = parse_tasks(_read(args.tasks))
        seed = args.seed
    else:
        spec = parse_gen_spec(args.gen)
        if args.seed is not None:
            spec = replace(spec, seed=args.seed)
        tasks = generate_workload(spec, cluster.real_ids)
        seed = spec.seed
    return cluster, hg, tasks, seed


def _cmd_balance(args: argparse.Namespace) -> int:
    cluster, hg, tasks, _ = _load_instance(args)
    views = [psts.PlannedTask(id=t.id, beta=t.beta, mu=t.mu, node=t.origin) for t in tasks]
    plan_ = psts.plan(hg, views, cluster.tau_by_id)
    _write(args.out, plan_.serialize())
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    cluster, hg, tasks, seed = _load_instance(args)
    costs = StepCosts(args.p, args.q)
    report = simulate(cluster, hg, tasks, args.policy, costs, seed=seed)
    _write(args.out, _csv_text(REPORT_COLUMNS, [report_row(report)]))
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = SweepConfig(
        node_counts=args.nodes,
        p=args.p,
        q=args.q,
        shape_kind=args.shape_kind,
        m=args.m,
        beta=args.beta,
        mu=args.mu,
        origin_fraction=args.origin_fraction,
        seed=args.seed,
        with_crossover=not args.no_crossover,
    )
    results = sweep(config)
    _write(args.out, _csv_text(REPORT_COLUMNS, [r.row() for r in results]))
    return 0


def _scenario(text: str):
    parts = text.split(":")
    try:
        numbers = [int(p) for p in parts[1:]]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad scenario parameters in {text!r}") from None
    if parts[0] == "concentrate" and 1 <= len(numbers) <= 3:
        return ConcentrateScenario(*numbers)
    if parts[0] == "burst" and 1 <= len(numbers) <= 3:
        return BurstScenario(*numbers)
    raise argparse.ArgumentTypeError(
        f"expected concentrate:<m>[:<beta>[:<mu>]] or burst:<backlog>[:<beta>[:<mu>]], got {text!r}"
    )


def _cmd_crossover(args: argparse.Namespace) -> int:
    if args.topology is not None:
        cluster = parse_topology(_read(args.topology))
    else:
        cluster = chain_cluster(args.nodes)
    shape = args.shape if args.shape is not None else embed(cluster).shape
    query = CrossoverQuery(
        cluster=cluster,
        shape=shape,
        scenario=args.scenario,
        costs=StepCosts(args.p, args.q),
        skew_lo=args.lo,
        skew_hi=args.hi,
    )
    result = estimate_crossover(query)
    header = ("status", "phi", "skew", "benefit", "overhead", "iterations", "monotone")
    row = [
        result.status,
        format_cell(result.phi),
        format_cell(result.skew),
        format_cell(result.benefit),
        format_cell(result.overhead),
        str(result.iterations),
        format_cell(result.monotone),
    ]
    _write(args.out, _csv_text(header, [row]))
    return 0


def _cmd_cost(args: argparse.Namespace) -> int:
    report = verify_optimality(args.nodes, StepCosts(args.p, args.q), max_capacity_slack=args.slack)
    rows = [
        ["x".join(str(d) for d in s.dims), str(s.capacity), str(s.steps), format_cell(s.total_seconds)]
        for s in report.shapes
    ]
    _write(args.out, _csv_text(("dims", "capacity", "steps", "total_seconds"), rows))
    if not report.all_at_least_optimal:
        print(f"warning: a shape beat the {report.optimal_steps}-step bound", file=sys.stderr)
        return 2
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="scansched", description="Scan-based task balancing on grid-mapped clusters.")
    subs = parser.add_subparsers(dest="command", required=True)

    balance = subs.add_parser("balance", parents=[], help="plan one balancing pass and print the moves")
    _add_topology_args(balance)
    _add_task_args(balance)
    balance.add_argument("--out", default="-", help="output path, - for stdout")
    balance.set_defaults(func=_cmd_balance)

    sim = subs.add_parser("simulate", help="run one instance and emit a CSV report")
    _add_topology_args(sim)
    _add_task_args(sim)
    sim.add_argument("--policy", type=_policy, default=Policy.none(), help="none, psts_at:<t> or psts_on_arrival:<phi>")
    sim.add_argument("--p", type=_fraction, default=Fraction(0), help="per-step transfer seconds")
    sim.add_argument("--q", type=_fraction, default=Fraction(0), help="per-step bookkeeping seconds")
    sim.add_argument("--out", default="-", help="output path, - for stdout")
    sim.set_defaults(func=_cmd_simulate)

    sw = subs.add_parser("sweep", help="speedup and crossover across cluster sizes")
    sw.add_argument("--nodes", type=_int_list, default=(2, 4, 8, 16, 32, 64), help="comma list of node counts")
    sw.add_argument("--shape-kind", choices=("hypercube", "line"), default="hypercube")
    sw.add_argument("--m", type=int, default=1024, help="tasks per instance")
    sw.add_argument("--beta", type=int, default=4, help="work units per task")
    sw.add_argument("--mu", type=int, default=1, help="packets per task")
    sw.add_argument("--origin-fraction", type=_fraction, default=Fraction(1, 2), help="fraction of nodes receiving tasks")
    sw.add_argument("--p", type=_fraction, default=Fraction(20), help="per-step transfer seconds")
    sw.add_argument("--q", type=_fraction, default=Fraction(0), help="per-step bookkeeping seconds")
    sw.add_argument("--seed", type=int, default=0)
    sw.add_argument("--no-crossover", action="store_true", help="skip the crossover bisection")
    sw.add_argument("--out", default="-", help="output path, - for stdout")
    sw.set_defaults(func=_cmd_sweep)

    cross = subs.add_parser("crossover", help="find the least imbalance worth one balancing pass")
    group = cross.add_mutually_exclusive_group(required=True)
    group.add_argument("--topology", metavar="FILE", help="cluster description file")
    group.add_argument("--nodes", type=int, help="size of a synthetic equal-power chain")
    cross.add_argument("--shape", type=_shape, default=None, help="grid shape (default: binary hyper-grid)")
    cross.add_argument("--scenario", type=_scenario, required=True, help="concentrate:<m>[:<beta>[:<mu>]] or burst:<backlog>[:<beta>[:<mu>]]")
    cross.add_argument("--p", type=_fraction, default=Fraction(0), help="per-step transfer seconds")
    cross.add_argument("--q", type=_fraction, default=Fraction(0), help="per-step bookkeeping seconds")
    cross.add_argument("--lo", type=_fraction, default=Fraction(0), help="lower skew bound")
    cross.add_argument("--hi", type=_fraction, default=Fraction(1), help="upper skew bound")
    cross.add_argument("--out", default="-", help="output path, - for stdout")
    cross.set_defaults(func=_cmd_crossover)

    cost = subs.add_parser("cost", help="enumerate grid shapes and their pass costs")
    cost.add_argument("--nodes", type=int, required=True, help="real node count")
    cost.add_argument("--p", type=_fraction, default=Fraction(1), help="per-step transfer seconds")
    cost.add_argument("--q", type=_fraction, default=Fraction(0), help="per-step bookkeeping seconds")
    cost.add_argument("--slack", type=float, default=1.0, help="capacity slack multiplier for the enumeration")
    cost.add_argument("--out", default="-", help="output path, - for stdout")
    cost.set_defaults(func=_cmd_cost)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
