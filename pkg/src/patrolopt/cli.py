"""Command-line surface: generate suites, plan, simulate, benchmark, compare, plot.

Exit status 0 on success, 2 on any input or file problem (with a message on
stderr).  All outputs are deterministic for identical inputs, except the
wall-clock seconds column in results tables, which is what it is.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from glob import glob
from typing import Dict, List, Optional, Tuple

from . import benchgen, results_io, stats, svgplot
from .instance_io import InstanceFormatError, read_instance
from .milp import ModelError
from .simulator import PLANNERS, run_episode, solve_single_round
from .tocp import FleetPlan, RouteIntegrityError, UnreachableMustVisitError


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        InstanceFormatError,
        UnreachableMustVisitError,
        RouteIntegrityError,
        ModelError,
        FileExistsError,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="patrolopt",
        description="Multi-vehicle patrol planning on graphs with growing vertex costs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a benchmark suite of instance files")
    p_gen.add_argument("--out", required=True, help="suite directory")
    p_gen.add_argument("--seeds", default="1..120", help="'A..B' range or comma list")
    p_gen.add_argument("--horizons", default="2,4,6,8,10", help="comma list")
    p_gen.add_argument("--vertex-choices", default=None, help="comma list override")
    p_gen.add_argument("--agent-choices", default=None, help="comma list override")
    p_gen.add_argument("--force", action="store_true", help="overwrite existing suite")
    p_gen.set_defaults(func=_cmd_gen)

    p_solve = sub.add_parser("solve", help="plan a single round on one instance")
    p_solve.add_argument("--instance", required=True)
    p_solve.add_argument("--planner", required=True, choices=PLANNERS)
    p_solve.add_argument("--iteration", type=int, default=1)
    p_solve.add_argument("--time-limit", type=float, default=None)
    p_solve.add_argument("--backend", default="highs", choices=("highs", "reference"))
    p_solve.add_argument("--out", required=True, help="plan JSON output")
    p_solve.set_defaults(func=_cmd_solve)

    p_sim = sub.add_parser("simulate", help="run one full episode")
    p_sim.add_argument("--instance", required=True)
    p_sim.add_argument("--planner", required=True, choices=PLANNERS)
    p_sim.add_argument("--time-limit", type=float, default=None)
    p_sim.add_argument("--backend", default="highs", choices=("highs", "reference"))
    p_sim.add_argument("--out", required=True, help="results CSV output")
    p_sim.set_defaults(func=_cmd_simulate)

    p_bench = sub.add_parser("bench", help="run planners across a whole suite")
    p_bench.add_argument("--suite", required=True)
    p_bench.add_argument("--planners", default="tocp,top,greedy", help="comma list")
    p_bench.add_argument("--time-limit", type=float, default=None)
    p_bench.add_argument("--jobs", type=int, default=1)
    p_bench.add_argument("--backend", default="highs", choices=("highs", "reference"))
    p_bench.add_argument("--out", required=True, help="results CSV output")
    p_bench.set_defaults(func=_cmd_bench)

    p_stats = sub.add_parser("stats", help="t-test comparison from a results CSV")
    p_stats.add_argument("--results", required=True)
    p_stats.add_argument("--pair", default="top,tocp", help="plannerA,plannerB")
    p_stats.add_argument("--welch", action="store_true", help="unequal-variance test")
    p_stats.set_defaults(func=_cmd_stats)

    p_plot = sub.add_parser("plot", help="SVG of an instance map or cost curves")
    p_plot.add_argument("--instance", default=None)
    p_plot.add_argument("--plan", default=None, help="plan JSON from solve")
    p_plot.add_argument("--results", default=None, help="results CSV")
    p_plot.add_argument("--out", required=True)
    p_plot.set_defaults(func=_cmd_plot)
    return parser


def _parse_int_list(text: str) -> Tuple[int, ...]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return tuple(range(int(lo), int(hi) + 1))
    return tuple(int(v) for v in text.split(",") if v)


def _cmd_gen(args) -> int:
    config = benchgen.BenchmarkConfig(
        seeds=_parse_int_list(args.seeds),
        horizons=_parse_int_list(args.horizons),
    )
    if args.vertex_choices:
        config.vertex_choices = _parse_int_list(args.vertex_choices)
    if args.agent_choices:
        config.agent_choices = _parse_int_list(args.agent_choices)
    written = benchgen.generate_suite(config, args.out, force=args.force)
    print(f"wrote {len(written)} instances under {args.out}")
    return 0


def _cmd_solve(args) -> int:
    instance = read_instance(args.instance)
    plan, status, model_stats = solve_single_round(
        instance,
        args.planner,
        iteration=args.iteration,
        time_limit=args.time_limit,
        backend=args.backend,
    )
    payload = {
        "instance": os.path.basename(args.instance),
        "planner": args.planner,
        "iteration": args.iteration,
        "status": status,
        "routes": None if plan is None else plan.routes,
        "lengths": None if plan is None else plan.lengths,
        "visited": None if plan is None else sorted(plan.visited()),
        "model": {k: v for k, v in model_stats.items() if k != "planner"},
    }
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    with open(args.out, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    print(f"{args.planner}: status {status}")
    if plan is not None:
        for i, route in enumerate(plan.routes):
            print(f"  agent {i + 1}: {'-'.join(str(v) for v in route)}")
    return 0 if plan is not None else 1


def _cmd_simulate(args) -> int:
    instance = read_instance(args.instance)
    result = run_episode(
        instance, args.planner, time_limit=args.time_limit, backend=args.backend
    )
    results_io.write_results(args.out, [results_io.result_to_row(result)])
    print(
        f"{result.instance_id} {args.planner}: total_cost {result.total_cost!r} "
        f"failed={int(result.failed)}"
    )
    return 0


def _suite_instance_paths(suite_dir: str) -> List[str]:
    paths = glob(os.path.join(suite_dir, "H*", "seed*.json"))
    if not paths:
        raise FileNotFoundError(f"no instance files under {suite_dir}")

    def key(path: str):
        h_part = os.path.basename(os.path.dirname(path))
        s_part = os.path.basename(path)
        return (int(h_part[1:]), int(s_part[4:-5]))

    return sorted(paths, key=key)


def _bench_episode(job: Tuple[str, str, Optional[float], str]) -> Dict[str, str]:
    path, planner, time_limit, backend = job
    instance = read_instance(path)
    result = run_episode(instance, planner, time_limit=time_limit, backend=backend)
    return results_io.result_to_row(result)


def _cmd_bench(args) -> int:
    planners = [p for p in args.planners.split(",") if p]
    for p in planners:
        if p not in PLANNERS:
            raise ValueError(f"unknown planner {p!r}; expected one of {PLANNERS}")
    paths = _suite_instance_paths(args.suite)
    jobs = [
        (path, planner, args.time_limit, args.backend)
        for path in paths
        for planner in planners
    ]
    rows: List[Dict[str, str]] = []
    if args.jobs <= 1:
        for i, job in enumerate(jobs):
            rows.append(_bench_episode(job))
            print(f"bench {i + 1}/{len(jobs)} done", file=sys.stderr)
    else:
        # Rows land in submission order regardless of completion order, so
        # the CSV is deterministic for a given suite and planner list.
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for i, row in enumerate(pool.map(_bench_episode, jobs)):
                rows.append(row)
                print(f"bench {i + 1}/{len(jobs)} done", file=sys.stderr)
    results_io.write_results(args.out, rows)
    print(f"wrote {len(rows)} rows to {args.out}")
    return 0


def _cmd_stats(args) -> int:
    rows = results_io.read_results(args.results)
    pair = [p for p in args.pair.split(",") if p]
    if len(pair) != 2:
        raise ValueError(f"--pair wants exactly two planners, got {args.pair!r}")
    a, b = pair
    table = stats.comparison_table(rows, a, b, welch=args.welch)
    solved = stats.all_solved_ids(rows)
    print(f"all-solved subset: {len(solved)} instances")
    header = f"{'H':>3} {'n':>4} {('mean_' + a):>14} {('mean_' + b):>14} {'t':>9} {'p':>10}"
    print(header)
    for entry in table:
        print(
            f"{entry['H']:>3} {entry['n']:>4} {entry['mean_' + a]:>14.4f} "
            f"{entry['mean_' + b]:>14.4f} {entry['t']:>9.3f} {entry['p']:>10.4g}"
        )
    print("failures:")
    for planner, count in sorted(stats.failure_counts(rows).items()):
        print(f"  {planner}: {count}")
    return 0


def _read_plan_json(path: str) -> FleetPlan:
    with open(path) as fh:
        payload = json.load(fh)
    routes = payload.get("routes")
    if not routes:
        raise ValueError(f"{path}: no routes recorded (status {payload.get('status')})")
    return FleetPlan(
        routes=[[int(v) for v in route] for route in routes],
        lengths=[float(v) for v in payload["lengths"]],
    )


def _cmd_plot(args) -> int:
    if (args.instance is None) == (args.results is None):
        raise ValueError("pass exactly one of --instance or --results")
    if args.instance is not None:
        instance = read_instance(args.instance)
        plan = _read_plan_json(args.plan) if args.plan else None
        svgplot.write_svg(svgplot.render_instance(instance, plan), args.out)
    else:
        rows = results_io.read_results(args.results)
        solved = stats.all_solved_ids(rows)
        table = []
        for planner in sorted({r["planner"] for r in rows}):
            for h in sorted({r["H"] for r in rows}):
                values = stats.totals(rows, planner, h, solved)
                if values:
                    table.append(
                        {"planner": planner, "H": h, "mean_cost": sum(values) / len(values)}
                    )
        svgplot.write_svg(svgplot.render_cost_curves(table), args.out)
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
