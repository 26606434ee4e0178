"""Closed-loop episodes: estimate rates, plan a round, execute, learn, repeat.

Each iteration: costs grow, the planner sees only the estimator's predicted
accruals, the fleet executes the plan, every visited vertex hands over its
accrued cost (which feeds the estimator), and the leftover cost on the graph
is charged to the episode.  A planner that produces nothing this round (model
infeasible, or the deadline passed with no incumbent) leaves the fleet at the
depot: only the depot is visited, the iteration is charged in full, and the
episode is flagged as failed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import List, Optional, Set

import numpy as np

from . import milp
from .cost_process import CostState
from .estimator import EstimatorState
from .graph import DEPOT, all_pairs_shortest
from .greedy import greedy_plan
from .instance_io import Instance, instance_graph, instance_id, kappa_table
from .tocp import (
    FleetPlan,
    UnreachableMustVisitError,
    build_tocp,
    build_top,
    extract_routes,
    plan_to_assignment,
)

PLANNERS = ("tocp", "top", "greedy")
STATUS_HEURISTIC = "heuristic"


@dataclass
class EpisodeResult:
    instance_id: str
    planner: str
    horizon: int
    residual_costs: List[float]  # leftover cost after each iteration
    total_cost: float
    compute_seconds: List[float]
    statuses: List[str]
    failed: bool
    plans: List[Optional[FleetPlan]] = field(default_factory=list)
    mu_hat_final: List[float] = field(default_factory=list)


def run_episode(
    instance: Instance,
    planner: str,
    time_limit: Optional[float] = None,
    backend: str = "highs",
    keep_plans: bool = False,
) -> EpisodeResult:
    """Run the full horizon with one planner; returns per-iteration records.

    With the reference solver backend, MIP planners get the greedy plan as a
    warm start when it encodes; the HiGHS backend has no warm-start hook.
    """
    if planner not in PLANNERS:
        raise ValueError(f"unknown planner {planner!r}; expected one of {PLANNERS}")
    graph = instance_graph(instance)
    dm = all_pairs_shortest(graph)
    cost = CostState(kappa_table(instance))
    est = EstimatorState(instance.num_vertices, instance.mu_default)

    residuals: List[float] = []
    seconds: List[float] = []
    statuses: List[str] = []
    plans: List[Optional[FleetPlan]] = []
    failed = False

    for t in range(1, instance.horizon + 1):
        cost.advance()
        c_hat = est.predicted_cost(t)
        t0 = time.perf_counter()
        plan, status = _plan_round(
            planner, graph, dm, c_hat, instance, time_limit, backend
        )
        seconds.append(time.perf_counter() - t0)
        statuses.append(status)
        if plan is None:
            failed = True
            visited: Set[int] = {DEPOT}
        else:
            visited = plan.visited() | {DEPOT}
        plans.append(plan if keep_plans else None)
        lumps = {v: float(cost.accrued[v]) for v in visited}
        cost.apply_visits(visited, t)
        residuals.append(cost.residual_cost())
        for v in sorted(visited):
            est.observe(v, lumps[v], t)

    return EpisodeResult(
        instance_id=instance_id(instance),
        planner=planner,
        horizon=instance.horizon,
        residual_costs=residuals,
        total_cost=float(sum(residuals)),
        compute_seconds=seconds,
        statuses=statuses,
        failed=failed,
        plans=plans if keep_plans else [],
        mu_hat_final=[float(v) for v in est.mu_hat()[1:]],
    )


def _plan_round(planner, graph, dm, c_hat, instance, time_limit, backend):
    """One round of planning; (FleetPlan or None, status string)."""
    if planner == "greedy":
        try:
            plan = greedy_plan(
                graph, dm, c_hat, instance.num_agents, instance.l_max,
                instance.must_visit,
            )
        except UnreachableMustVisitError:
            return None, milp.INFEASIBLE
        return plan, STATUS_HEURISTIC
    build = build_tocp if planner == "tocp" else build_top
    model, handles = build(
        graph, c_hat, instance.num_agents, instance.l_max, instance.must_visit,
        dist=dm,
    )
    warm = None
    if backend == "reference":
        try:
            seed_plan = greedy_plan(
                graph, dm, c_hat, instance.num_agents, instance.l_max,
                instance.must_visit,
            )
            warm = plan_to_assignment(seed_plan, model, handles, graph)
        except UnreachableMustVisitError:
            warm = None
    solution = milp.solve(model, time_limit=time_limit, backend=backend, warm_start=warm)
    if solution.status in (milp.OPTIMAL, milp.FEASIBLE_TIMEOUT):
        return extract_routes(solution, handles, graph), solution.status
    return None, solution.status


def solve_single_round(
    instance: Instance,
    planner: str,
    iteration: int = 1,
    time_limit: Optional[float] = None,
    backend: str = "highs",
):
    """Plan one round in isolation, as if nothing had ever been visited.

    Predicted costs come from the untrained estimator (every vertex at the
    prior default rate times the iteration index).  Returns (plan or None,
    status, model stats dict).
    """
    if planner not in PLANNERS:
        raise ValueError(f"unknown planner {planner!r}; expected one of {PLANNERS}")
    if not 1 <= iteration <= instance.horizon:
        raise ValueError(f"iteration must be in 1..{instance.horizon}")
    graph = instance_graph(instance)
    dm = all_pairs_shortest(graph)
    est = EstimatorState(instance.num_vertices, instance.mu_default)
    c_hat = est.predicted_cost(iteration)
    if planner == "greedy":
        try:
            plan = greedy_plan(
                graph, dm, c_hat, instance.num_agents, instance.l_max,
                instance.must_visit,
            )
            return plan, STATUS_HEURISTIC, {"planner": "greedy"}
        except UnreachableMustVisitError:
            return None, milp.INFEASIBLE, {"planner": "greedy"}
    build = build_tocp if planner == "tocp" else build_top
    model, handles = build(
        graph, c_hat, instance.num_agents, instance.l_max, instance.must_visit,
        dist=dm,
    )
    solution = milp.solve(model, time_limit=time_limit, backend=backend)
    stats = {
        "planner": planner,
        "num_variables": model.num_variables,
        "num_constraints": len(model.constraints),
        "status": solution.status,
        "objective": solution.objective_value,
        "gap": solution.gap,
        "node_count": solution.node_count,
    }
    if solution.status in (milp.OPTIMAL, milp.FEASIBLE_TIMEOUT):
        return extract_routes(solution, handles, graph), solution.status, stats
    return None, solution.status, stats
