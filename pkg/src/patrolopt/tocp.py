"""Team patrol route optimization as a mixed-integer program.

One planning round: a fleet of M agents starts and ends at the depot, each
within a shared travel budget, and the fleet maximizes the predicted cost
collected over the vertices anybody visits.  Vertices may be traversed and
visited repeatedly by default; ``build_top`` adds the classical
one-traversal-per-vertex restriction, which is strictly weaker on graphs
where high-value vertices sit behind a cut vertex.

Model shape per agent m over directed edges (i, j):
  * x_ijm        binary edge traversal
  * y_im         binary "agent m visits vertex i"
  * z_i          binary "somebody visits vertex i" (objective carrier)
  * u_ijm        continuous connectivity flow
Constraints: unit depot departure/return, traversal/visit coupling with a
big-M of l_max over the shortest edge, per-vertex flow balance, the travel
budget, and a single-commodity flow that leaves the depot carrying one unit
per visited vertex and drops one at each, which rules out subtours detached
from the depot.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .graph import DEPOT, DistanceMatrix, Graph, all_pairs_shortest, validate, walk_length
from .milp import MilpModel, MilpSolution, ModelError, complete_with_lp


class RouteIntegrityError(ValueError):
    """A solver assignment does not decompose into closed walks from the depot."""


class UnreachableMustVisitError(ValueError):
    """A required vertex has no round trip from the depot at all."""


@dataclass
class FleetPlan:
    """One closed walk per agent, depot to depot; [1] alone means the agent stays home."""

    routes: List[List[int]]
    lengths: List[float]

    @property
    def num_agents(self) -> int:
        return len(self.routes)

    def visited(self) -> Set[int]:
        out: Set[int] = {DEPOT}
        for route in self.routes:
            out.update(route)
        return out

    def reward(self, c_hat: np.ndarray) -> float:
        return float(sum(c_hat[v] for v in sorted(self.visited()) if v != DEPOT))


@dataclass
class VariableHandles:
    """Index maps from (vertex/edge, agent) keys into the flat variable vector."""

    x: Dict[Tuple[int, int, int], int]
    y: Dict[Tuple[int, int], int]
    z: Dict[int, int]
    u: Dict[Tuple[int, int, int], int]
    num_agents: int
    l_max: float
    big_m: float
    u_cap: float
    must_visit: Tuple[int, ...]
    variant: str
    allow_idle_agents: bool


def build_tocp(
    graph: Graph,
    c_hat: np.ndarray,
    num_agents: int,
    l_max: float,
    must_visit: Sequence[int] = (),
    *,
    dist: Optional[DistanceMatrix] = None,
    allow_idle_agents: bool = False,
    tight_u_bound: bool = False,
) -> Tuple[MilpModel, VariableHandles]:
    """Build the repeat-visit model; returns the model and its variable handles.

    must_visit vertices whose round trip to the depot is infinite are rejected
    up front (no budget could ever fix that); a finite round trip that exceeds
    l_max is left to the solver, which will report infeasibility.
    """
    problem = validate(graph)
    if problem is not None:
        raise ModelError(f"graph invalid: {problem}")
    n = graph.num_vertices
    m_count = int(num_agents)
    if m_count < 1:
        raise ModelError("need at least one agent")
    if l_max <= 0:
        raise ModelError("travel budget must be positive")
    c_hat = np.asarray(c_hat, dtype=float)
    if c_hat.shape != (n + 1,):
        raise ModelError(f"c_hat must have shape ({n + 1},)")
    must = tuple(sorted(set(int(v) for v in must_visit)))
    for v in must:
        if not 2 <= v <= n:
            raise ModelError(f"must-visit vertex {v} out of range (depot excluded)")
    if must:
        if dist is None:
            dist = all_pairs_shortest(graph)
        for v in must:
            if not np.isfinite(dist.dist[DEPOT, v] + dist.dist[v, DEPOT]):
                raise UnreachableMustVisitError(
                    f"must-visit vertex {v} has no round trip to the depot"
                )

    edges = [e for e, _ in graph.edge_items()]
    big_m = l_max / graph.min_edge_length()
    u_cap = float(n - 1 if tight_u_bound else n)

    model = MilpModel("max", name="tocp")
    x: Dict[Tuple[int, int, int], int] = {}
    y: Dict[Tuple[int, int], int] = {}
    z: Dict[int, int] = {}
    u: Dict[Tuple[int, int, int], int] = {}
    for m in range(1, m_count + 1):
        for (i, j) in edges:
            x[(i, j, m)] = model.add_binary(f"x_{i}_{j}_{m}")
    for m in range(1, m_count + 1):
        for i in range(1, n + 1):
            y[(i, m)] = model.add_binary(f"y_{i}_{m}")
    for i in range(1, n + 1):
        z[i] = model.add_binary(f"z_{i}")
    for m in range(1, m_count + 1):
        for (i, j) in edges:
            u[(i, j, m)] = model.add_continuous(f"u_{i}_{j}_{m}", 0.0, u_cap)

    out_edges: Dict[int, List[Tuple[int, int]]] = {i: [] for i in range(1, n + 1)}
    in_edges: Dict[int, List[Tuple[int, int]]] = {i: [] for i in range(1, n + 1)}
    for (i, j) in edges:
        out_edges[i].append((i, j))
        in_edges[j].append((i, j))

    for i in range(2, n + 1):
        model.set_objective_coefficient(z[i], float(c_hat[i]))

    for m in range(1, m_count + 1):
        # Depot departure/return: exactly once per agent, or at most once when
        # idle agents are allowed (balance then comes from the flow rows).
        depot_rel = "<=" if allow_idle_agents else "="
        model.add_constraint(
            [(x[(e[0], e[1], m)], 1.0) for e in out_edges[DEPOT]],
            depot_rel,
            1.0,
            name=f"depot_out_{m}",
        )
        if not allow_idle_agents:
            model.add_constraint(
                [(x[(e[0], e[1], m)], 1.0) for e in in_edges[DEPOT]],
                "=",
                1.0,
                name=f"depot_in_{m}",
            )
        # Per-vertex traversal balance: arrivals equal departures everywhere.
        for i in range(1, n + 1):
            terms = [(x[(e[0], e[1], m)], 1.0) for e in out_edges[i]]
            terms += [(x[(e[0], e[1], m)], -1.0) for e in in_edges[i]]
            model.add_constraint(terms, "=", 0.0, name=f"balance_{i}_{m}")
        # Visit/traversal coupling: visiting requires departing at least once,
        # and any departure forces the visit flag on.  (Balance makes the
        # incoming version equivalent.)
        for i in range(1, n + 1):
            outgoing = [(x[(e[0], e[1], m)], 1.0) for e in out_edges[i]]
            model.add_constraint(
                [(y[(i, m)], 1.0)] + [(idx, -coef) for idx, coef in outgoing],
                "<=",
                0.0,
                name=f"visit_lb_{i}_{m}",
            )
            model.add_constraint(
                outgoing + [(y[(i, m)], -big_m)],
                "<=",
                0.0,
                name=f"visit_ub_{i}_{m}",
            )
        # Travel budget.
        model.add_constraint(
            [(x[(i, j, m)], graph.lengths[(i, j)]) for (i, j) in edges],
            "<=",
            float(l_max),
            name=f"budget_{m}",
        )
        # Connectivity flow: the depot sends one unit per vertex the agent
        # visits, each visited vertex keeps one, and flow only moves on
        # traversed edges.  Any subtour avoiding the depot would starve.
        src_terms = [(u[(e[0], e[1], m)], 1.0) for e in out_edges[DEPOT]]
        src_terms += [(u[(e[0], e[1], m)], -1.0) for e in in_edges[DEPOT]]
        src_terms += [(y[(i, m)], -1.0) for i in range(2, n + 1)]
        model.add_constraint(src_terms, "=", 0.0, name=f"flow_src_{m}")
        for i in range(2, n + 1):
            terms = [(u[(e[0], e[1], m)], 1.0) for e in in_edges[i]]
            terms += [(u[(e[0], e[1], m)], -1.0) for e in out_edges[i]]
            terms.append((y[(i, m)], -1.0))
            model.add_constraint(terms, "=", 0.0, name=f"flow_use_{i}_{m}")
        for (i, j) in edges:
            model.add_constraint(
                [(u[(i, j, m)], 1.0), (x[(i, j, m)], -u_cap)],
                "<=",
                0.0,
                name=f"flow_cap_{i}_{j}_{m}",
            )

    # Anyone-visits coupling between y and z.
    for i in range(1, n + 1):
        model.add_constraint(
            [(z[i], 1.0)] + [(y[(i, m)], -1.0) for m in range(1, m_count + 1)],
            "<=",
            0.0,
            name=f"any_visit_lb_{i}",
        )
        model.add_constraint(
            [(y[(i, m)], 1.0) for m in range(1, m_count + 1)] + [(z[i], -float(m_count))],
            "<=",
            0.0,
            name=f"any_visit_ub_{i}",
        )

    for v in must:
        model.add_constraint([(z[v], 1.0)], "=", 1.0, name=f"must_visit_{v}")

    handles = VariableHandles(
        x=x,
        y=y,
        z=z,
        u=u,
        num_agents=m_count,
        l_max=float(l_max),
        big_m=big_m,
        u_cap=u_cap,
        must_visit=must,
        variant="tocp",
        allow_idle_agents=allow_idle_agents,
    )
    return model, handles


def build_top(
    graph: Graph,
    c_hat: np.ndarray,
    num_agents: int,
    l_max: float,
    must_visit: Sequence[int] = (),
    *,
    dist: Optional[DistanceMatrix] = None,
    allow_idle_agents: bool = False,
    tight_u_bound: bool = False,
) -> Tuple[MilpModel, VariableHandles]:
    """Single-visit variant: each non-depot vertex is entered at most once in total.

    Same variable layout as build_tocp plus one row per vertex, so routes
    cannot pass through an already-visited vertex, not even another agent's.
    """
    model, handles = build_tocp(
        graph,
        c_hat,
        num_agents,
        l_max,
        must_visit,
        dist=dist,
        allow_idle_agents=allow_idle_agents,
        tight_u_bound=tight_u_bound,
    )
    model.name = "top"
    n = graph.num_vertices
    in_edges: Dict[int, List[Tuple[int, int]]] = {i: [] for i in range(1, n + 1)}
    for (i, j), _ in graph.edge_items():
        in_edges[j].append((i, j))
    for i in range(2, n + 1):
        terms = [
            (handles.x[(e[0], e[1], m)], 1.0)
            for m in range(1, handles.num_agents + 1)
            for e in in_edges[i]
        ]
        model.add_constraint(terms, "<=", 1.0, name=f"visit_once_{i}")
    handles.variant = "top"
    return model, handles


def extract_routes(
    solution: MilpSolution, handles: VariableHandles, graph: Graph
) -> FleetPlan:
    """Turn an integral assignment into one closed walk per agent.

    Each agent's selected edges must form a single closed trail through the
    depot; leftovers or an open walk raise RouteIntegrityError.  Ties in the
    stitching order go to the lowest-numbered neighbor, so the result is
    deterministic for a given assignment.
    """
    if solution.assignment is None:
        raise RouteIntegrityError(f"solution has no assignment (status {solution.status})")
    assign = solution.assignment
    routes: List[List[int]] = []
    lengths: List[float] = []
    for m in range(1, handles.num_agents + 1):
        chosen = sorted(
            (i, j) for (i, j, mm), idx in handles.x.items() if mm == m and assign[idx] > 0.5
        )
        if not chosen:
            routes.append([DEPOT])
            lengths.append(0.0)
            continue
        route = _stitch_closed_walk(chosen, start=DEPOT)
        routes.append(route)
        lengths.append(walk_length(graph, route))
    return FleetPlan(routes=routes, lengths=lengths)


def _stitch_closed_walk(edges: List[Tuple[int, int]], start: int) -> List[int]:
    """Hierholzer's algorithm for a single closed trail using every edge once."""
    adj: Dict[int, List[int]] = {}
    for (i, j) in sorted(edges, reverse=True):
        adj.setdefault(i, []).append(j)  # descending, so list.pop() yields smallest
    if start not in adj:
        raise RouteIntegrityError(f"selected edges never leave vertex {start}")
    stack = [start]
    circuit: List[int] = []
    while stack:
        v = stack[-1]
        if adj.get(v):
            stack.append(adj[v].pop())
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    if circuit[0] != start or circuit[-1] != start:
        raise RouteIntegrityError("stitched walk does not start and end at the depot")
    used = len(circuit) - 1
    if used != len(edges):
        raise RouteIntegrityError(
            f"selected edges are disconnected: walk used {used} of {len(edges)}"
        )
    return circuit


def simplify_walk(route: List[int], graph: Graph) -> List[int]:
    """Rewrite a closed walk so no directed edge is traversed twice.

    When an edge (a, b) appears at two positions, the stretch between the two
    traversals is reversed (every road is two-way, so the reversed stretch is
    walkable) and both traversals drop out.  Each rewrite shortens the walk by
    twice that edge's length and keeps the visited vertex set intact, so
    repeating until no duplicate remains terminates.
    """
    route = list(route)
    while True:
        first_pos: Dict[Tuple[int, int], int] = {}
        dup: Optional[Tuple[int, int]] = None
        for p, (a, b) in enumerate(zip(route, route[1:])):
            if (a, b) in first_pos:
                dup = (first_pos[(a, b)], p)
                break
            first_pos[(a, b)] = p
        if dup is None:
            return route
        p1, p2 = dup
        middle = route[p1 + 1 : p2 + 1]  # runs from b ... a
        route = route[: p1 + 1] + middle[::-1][1:] + route[p2 + 2 :]


def plan_to_assignment(
    plan: FleetPlan, model: MilpModel, handles: VariableHandles, graph: Graph
) -> Optional[np.ndarray]:
    """Encode a fleet plan as a full solver assignment, or None if it cannot be.

    Only plans whose walks use each directed edge at most once fit the binary
    edge variables, and the continuous flow is filled in by LP, which also
    weeds out plans the model would not accept (an idle agent under the
    exactly-one depot departure, say).  Intended for warm starts, so failure
    is an answer, not an error.
    """
    fixed: Dict[int, float] = {}
    for key, idx in handles.x.items():
        fixed[idx] = 0.0
    for key, idx in handles.y.items():
        fixed[idx] = 0.0
    for key, idx in handles.z.items():
        fixed[idx] = 0.0
    visited_any: Set[int] = set()
    for m, route in enumerate(plan.routes, start=1):
        if len(route) == 1:
            continue  # parked at the depot: no traversal, so no visit flags
        seen_edges: Set[Tuple[int, int]] = set()
        for a, b in zip(route, route[1:]):
            if (a, b) in seen_edges:
                return None
            seen_edges.add((a, b))
            if (a, b, m) not in handles.x:
                return None
            fixed[handles.x[(a, b, m)]] = 1.0
        for v in set(route):
            fixed[handles.y[(v, m)]] = 1.0
        visited_any.update(route)
    for v in visited_any:
        fixed[handles.z[v]] = 1.0
    return complete_with_lp(model, fixed)


def audit_solution(
    graph: Graph, solution: MilpSolution, handles: VariableHandles, tol: float = 1e-6
) -> List[str]:
    """Re-check a solved assignment against the problem statement, from scratch.

    Deliberately ignores the model's own constraint rows and flow variables:
    degrees, budgets, coupling and must-visits are recomputed from the x/y/z
    values, and depot connectivity is certified by BFS over the chosen edges.
    Returns a list of violation messages; empty means clean.
    """
    issues: List[str] = []
    if solution.assignment is None:
        return [f"no assignment to audit (status {solution.status})"]
    assign = solution.assignment

    def val(idx: int) -> float:
        return float(assign[idx])

    n = graph.num_vertices
    for key, idx in list(handles.x.items()) + list(handles.y.items()):
        if abs(val(idx) - round(val(idx))) > 1e-5:
            issues.append(f"binary variable for {key} is fractional: {val(idx)}")
    x_sel = {
        (i, j, m): round(val(idx)) for (i, j, m), idx in handles.x.items()
    }
    y_sel = {(i, m): round(val(idx)) for (i, m), idx in handles.y.items()}
    z_sel = {i: round(val(idx)) for i, idx in handles.z.items()}

    for m in range(1, handles.num_agents + 1):
        chosen = [(i, j) for (i, j, mm), v in x_sel.items() if mm == m and v == 1]
        out_deg = {i: 0 for i in range(1, n + 1)}
        in_deg = {i: 0 for i in range(1, n + 1)}
        for (i, j) in chosen:
            out_deg[i] += 1
            in_deg[j] += 1
        if handles.allow_idle_agents:
            if out_deg[DEPOT] > 1:
                issues.append(f"agent {m}: depot out-degree {out_deg[DEPOT]} > 1")
        elif out_deg[DEPOT] != 1 or in_deg[DEPOT] != 1:
            issues.append(
                f"agent {m}: depot degree out={out_deg[DEPOT]} in={in_deg[DEPOT]}, want 1/1"
            )
        for i in range(1, n + 1):
            if out_deg[i] != in_deg[i]:
                issues.append(
                    f"agent {m}: vertex {i} unbalanced (out {out_deg[i]}, in {in_deg[i]})"
                )
        spent = sum(graph.lengths[(i, j)] for (i, j) in chosen)
        if spent > handles.l_max + tol:
            issues.append(f"agent {m}: budget {spent} exceeds {handles.l_max}")
        for i in range(1, n + 1):
            visits = y_sel[(i, m)]
            if visits == 1 and out_deg[i] == 0:
                issues.append(f"agent {m}: y says visit {i} but no traversal")
            if out_deg[i] >= 1 and visits == 0:
                issues.append(f"agent {m}: traversal through {i} without visit flag")
            if out_deg[i] > handles.big_m + tol:
                issues.append(f"agent {m}: vertex {i} out-degree exceeds big-M")
        if chosen:
            # Depot-rooted connectivity, certified without the flow variables.
            frontier = [DEPOT]
            seen = {DEPOT}
            adj: Dict[int, List[int]] = {}
            for (i, j) in chosen:
                adj.setdefault(i, []).append(j)
            while frontier:
                v = frontier.pop()
                for w in adj.get(v, []):
                    if w not in seen:
                        seen.add(w)
                        frontier.append(w)
            touched = {i for (i, j) in chosen} | {j for (i, j) in chosen}
            stranded = sorted(touched - seen)
            if stranded:
                issues.append(f"agent {m}: edges around {stranded} unreachable from depot")

    for i in range(1, n + 1):
        any_visit = any(y_sel[(i, m)] == 1 for m in range(1, handles.num_agents + 1))
        if bool(z_sel[i]) != any_visit:
            issues.append(f"vertex {i}: z={z_sel[i]} but per-agent visits say {any_visit}")
    for v in handles.must_visit:
        if z_sel[v] != 1:
            issues.append(f"must-visit vertex {v} not visited")
    if handles.variant == "top":
        for i in range(2, n + 1):
            arrivals = sum(
                v for (a, b, m), v in x_sel.items() if b == i
            )
            if arrivals > 1:
                issues.append(f"vertex {i}: {arrivals} arrivals under single-visit rules")
    return issues
