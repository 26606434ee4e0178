"""Symmetric directed graphs with a distinguished depot vertex.

Vertices are 1-indexed and vertex 1 is always the depot.  Arrays keyed by
vertex are sized N+1 with slot 0 unused so that code can write ``dist[i, j]``
with the same indices that appear in route lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

import numpy as np

DEPOT = 1
INF = math.inf


class Graph:
    """Directed graph with per-edge lengths.

    A well-formed graph contains every edge in both directions with identical
    lengths (two-way traffic on every road).  ``validate`` checks that; the
    constructor itself is permissive so malformed inputs can be inspected.
    """

    def __init__(
        self,
        num_vertices: int,
        edges: Dict[Tuple[int, int], float],
        positions: Optional[List[Tuple[float, float]]] = None,
    ):
        self.num_vertices = int(num_vertices)
        self.lengths: Dict[Tuple[int, int], float] = dict(edges)
        # positions[v] for v in 1..N; slot 0 unused.  Only the generator and
        # the SVG renderer care about these.
        self.positions = positions
        self._out: Dict[int, List[int]] = {i: [] for i in range(1, self.num_vertices + 1)}
        for (i, j) in sorted(self.lengths):
            if 1 <= i <= self.num_vertices:
                self._out[i].append(j)

    @property
    def num_edges(self) -> int:
        return len(self.lengths)

    def out_neighbors(self, i: int) -> List[int]:
        """Ascending list of j with (i, j) an edge."""
        return self._out[i]

    def edge_items(self) -> List[Tuple[Tuple[int, int], float]]:
        """All directed edges with lengths, sorted for deterministic iteration."""
        return sorted(self.lengths.items())

    def undirected_edges(self) -> List[Tuple[int, int]]:
        """Each edge once as (i, j) with i < j."""
        return sorted({(min(i, j), max(i, j)) for (i, j) in self.lengths})

    def min_edge_length(self) -> float:
        if not self.lengths:
            raise ValueError("graph has no edges")
        return min(self.lengths.values())


def symmetrize(edges: Iterable[Tuple[int, int, float]]) -> Dict[Tuple[int, int], float]:
    """Mirror each (i, j, length) into both directions with the same length."""
    out: Dict[Tuple[int, int], float] = {}
    for i, j, l in edges:
        out[(i, j)] = l
        out[(j, i)] = l
    return out


def validate(graph: Graph) -> Optional[str]:
    """Return a description of the first violated invariant, or None if well formed.

    Checked per directed edge in sorted order: vertex references in range,
    no self-loops, strictly positive finite lengths, reverse edge present,
    reverse length identical.
    """
    n = graph.num_vertices
    if n < 1:
        return "graph has no vertices"
    for (i, j) in sorted(graph.lengths):
        if not (1 <= i <= n and 1 <= j <= n):
            return f"edge ({i},{j}) references an unknown vertex"
        if i == j:
            return f"self-loop ({i},{j})"
        lij = graph.lengths[(i, j)]
        if not math.isfinite(lij) or lij <= 0:
            return f"nonpositive length on ({i},{j})"
        if (j, i) not in graph.lengths:
            return f"missing reverse edge ({j},{i})"
        if graph.lengths[(j, i)] != lij:
            return f"asymmetric length on ({i},{j})/({j},{i})"
    return None


@dataclass
class DistanceMatrix:
    """All-pairs shortest path distances with next-hop route reconstruction.

    ``dist[i, j]`` is inf when j is unreachable from i.  ``next_hop[i, j]`` is
    the successor of i on a shortest i->j path, or -1 when there is none.
    """

    dist: np.ndarray
    next_hop: np.ndarray

    def shortest_path(self, i: int, j: int) -> Optional[List[int]]:
        """Vertex list i..j along a shortest path, or None if unreachable."""
        if i == j:
            return [i]
        if self.next_hop[i, j] < 0:
            return None
        path = [i]
        cur = i
        while cur != j:
            cur = int(self.next_hop[cur, j])
            path.append(cur)
            if len(path) > self.dist.shape[0]:
                raise RuntimeError("next-hop table is cyclic")
        return path


def all_pairs_shortest(graph: Graph) -> DistanceMatrix:
    """Floyd-Warshall over all vertices.

    Ties between equal-length paths resolve to the smallest intermediate
    vertex index because relaxation only replaces on strict improvement and
    pivots are scanned in ascending order.
    """
    n = graph.num_vertices
    dist = np.full((n + 1, n + 1), INF)
    nxt = np.full((n + 1, n + 1), -1, dtype=np.int64)
    for i in range(1, n + 1):
        dist[i, i] = 0.0
        nxt[i, i] = i
    for (i, j), l in graph.edge_items():
        if l < dist[i, j]:
            dist[i, j] = l
            nxt[i, j] = j
    for k in range(1, n + 1):
        via = dist[:, k : k + 1] + dist[k : k + 1, :]
        better = via < dist
        if better.any():
            dist[better] = via[better]
            nxt[better] = np.broadcast_to(nxt[:, k : k + 1], nxt.shape)[better]
    return DistanceMatrix(dist=dist, next_hop=nxt)


def reachable_round_trip(graph: Graph, dm: DistanceMatrix, l_max: float) -> Set[int]:
    """Vertices that can be visited and returned from within the budget.

    The depot is always a member (round trip of length zero).
    """
    n = graph.num_vertices
    return {v for v in range(1, n + 1) if dm.dist[DEPOT, v] + dm.dist[v, DEPOT] <= l_max}


def walk_length(graph: Graph, route: List[int]) -> float:
    """Sum of edge lengths along a route, in traversal order.

    Raises KeyError if a consecutive pair is not an edge.
    """
    total = 0.0
    for a, b in zip(route, route[1:]):
        total += graph.lengths[(a, b)]
    return total
