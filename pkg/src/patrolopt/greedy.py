"""Myopic route construction: agents take turns grabbing the best next vertex.

Agents move in round-robin order.  On its turn an agent first serves the
nearest still-unclaimed required vertex it can reach and return home from;
once no required vertex is reachable it chases the best predicted-cost-per-
distance vertex instead, and when nothing worthwhile remains it heads home.
Vertices passed through along the way count as visited and leave the pools,
so later agents do not re-plan trips to them.
"""

from __future__ import annotations

from typing import List, Sequence, Set

import numpy as np

from .graph import DEPOT, DistanceMatrix, Graph
from .tocp import FleetPlan, UnreachableMustVisitError


def greedy_plan(
    graph: Graph,
    dist: DistanceMatrix,
    c_hat: np.ndarray,
    num_agents: int,
    l_max: float,
    must_visit: Sequence[int] = (),
) -> FleetPlan:
    """Build one closed walk per agent under the shared budget.

    All ties break to the lowest vertex index.  An agent already standing on a
    pool vertex claims it for free before weighing any move (the value-per-
    distance rule has no answer at distance zero).  Every required vertex must
    have a round trip within the budget, else the instance is rejected; with
    at most one required vertex per agent that also guarantees all of them
    get served.
    """
    d = dist.dist
    n = graph.num_vertices
    for v in must_visit:
        if d[DEPOT, v] + d[v, DEPOT] > l_max:
            raise UnreachableMustVisitError(
                f"must-visit vertex {v} has no round trip within budget {l_max}"
            )
    required: Set[int] = set(int(v) for v in must_visit)
    optional: Set[int] = set(range(1, n + 1)) - required
    optional.discard(DEPOT)

    routes: List[List[int]] = [[DEPOT] for _ in range(num_agents)]
    spent = [0.0 for _ in range(num_agents)]
    position = [DEPOT for _ in range(num_agents)]
    finished = [False for _ in range(num_agents)]

    def within_budget(m: int, v: int) -> bool:
        # Same association order as the spent updates, so the final walk
        # length compares against l_max exactly as it was accumulated.
        return (spent[m] + d[position[m], v]) + d[v, DEPOT] <= l_max

    def move_to(m: int, v: int) -> None:
        path = dist.shortest_path(position[m], v)
        if path is None:
            raise RuntimeError(f"no path {position[m]} -> {v} despite finite distance")
        spent[m] += d[position[m], v]
        routes[m].extend(path[1:])
        for w in path:
            required.discard(w)
            optional.discard(w)
        position[m] = v

    while not all(finished):
        for m in range(num_agents):
            if finished[m]:
                continue
            here = position[m]
            reachable_required = [v for v in sorted(required) if within_budget(m, v)]
            if reachable_required:
                target = min(reachable_required, key=lambda v: (d[here, v], v))
                move_to(m, target)
                continue
            if here in optional:
                # Standing on it already: claim without moving.
                optional.discard(here)
                continue
            best = None
            best_ratio = -np.inf
            for v in sorted(optional):
                dv = d[here, v]
                if not np.isfinite(dv) or not within_budget(m, v):
                    continue
                if c_hat[v] <= 0.0:
                    continue
                ratio = c_hat[v] / dv
                if ratio > best_ratio:
                    best = v
                    best_ratio = ratio
            if best is not None:
                move_to(m, best)
                continue
            move_to(m, DEPOT)
            finished[m] = True

    return FleetPlan(routes=routes, lengths=[float(s) for s in spent])
