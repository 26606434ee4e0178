"""Seeded random benchmark instances: 120 seeds by 5 horizons by default.

Layout of one instance: the depot sits at the origin, the other vertices fall
uniformly in a square, each vertex points at its few nearest neighbors, and
the edge set is symmetrized.  Budget, fleet size, growth rates, required
vertices and the whole growth table are then drawn from fixed laws.  All
draws come from named streams keyed by (seed, tag), so a (config, seed, H)
triple always produces a byte-identical file.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cost_process import GrowthParams, materialize_kappa
from .graph import DEPOT, Graph, all_pairs_shortest, reachable_round_trip, symmetrize
from .instance_io import Instance, write_instance

# Stream tag for the structural draws; growth draws use (seed, t) with t <= H,
# so any tag above the largest horizon keeps the streams disjoint.
_STRUCTURE_TAG = 101


@dataclass
class BenchmarkConfig:
    seeds: Tuple[int, ...] = tuple(range(1, 121))
    horizons: Tuple[int, ...] = (2, 4, 6, 8, 10)
    vertex_choices: Tuple[int, ...] = (10, 12, 14, 16, 18, 20)
    square_half_width: float = 5.0
    out_degree_choices: Tuple[int, ...] = (3, 4, 5)
    budget_base: float = 20.0
    budget_span_per_vertex: float = 2.0  # l_max ~ budget_base + U(0, this * N)
    agent_choices: Tuple[int, ...] = (2, 3, 4, 5)
    required_draw_choices: Tuple[int, ...] = (1, 2, 3)  # count = min(draw, M)
    rate_low: float = 0.1
    rate_high: float = 0.9
    noise_stddev: float = 0.1
    mu_default: float = 0.5
    seed_escalation_step: int = 1_000_000
    max_escalations: int = 50


@dataclass
class StructureDraw:
    """Intermediate record of one attempt, before growth materialization.

    Kept separate so tests can look at quantities the instance file does not
    retain, like the nearest-neighbor out-degrees before symmetrization.
    """

    num_vertices: int
    positions: List[Tuple[float, float]]
    out_degrees: List[int]
    nn_edges: List[Tuple[int, int]]  # directed nearest-neighbor picks
    edges: List[Tuple[int, int, float]]  # symmetrized, unordered pairs once
    l_max: float
    num_agents: int
    required_draw: int
    mu_star: List[float]


def draw_structure(config: BenchmarkConfig, effective_seed: int) -> StructureDraw:
    """All structural draws for one attempt, in a fixed documented order.

    Order: N, positions, per-vertex out-degrees, l_max, M, required-count
    draw, mu_star.  Changing this order changes every suite, so don't.
    """
    rng = np.random.default_rng((effective_seed, _STRUCTURE_TAG))
    n = int(rng.choice(np.asarray(config.vertex_choices)))
    hw = config.square_half_width
    others = rng.uniform(-hw, hw, size=(n - 1, 2))
    positions: List[Tuple[float, float]] = [(0.0, 0.0)]
    positions += [(float(x), float(y)) for x, y in others]
    out_degrees = [int(v) for v in rng.choice(np.asarray(config.out_degree_choices), size=n)]
    l_max = float(config.budget_base + rng.uniform(0.0, config.budget_span_per_vertex * n))
    num_agents = int(rng.choice(np.asarray(config.agent_choices)))
    required_draw = int(rng.choice(np.asarray(config.required_draw_choices)))
    mu_star = [float(v) for v in rng.uniform(config.rate_low, config.rate_high, size=n)]

    # Pairwise Euclidean lengths, computed once per unordered pair so both
    # directions carry the identical float.
    pair_len: Dict[Tuple[int, int], float] = {}

    def length(i: int, j: int) -> float:
        key = (min(i, j), max(i, j))
        if key not in pair_len:
            (xa, ya), (xb, yb) = positions[key[0] - 1], positions[key[1] - 1]
            pair_len[key] = math.hypot(xa - xb, ya - yb)
        return pair_len[key]

    nn_edges: List[Tuple[int, int]] = []
    chosen_pairs = set()
    for i in range(1, n + 1):
        ranked = sorted(
            (j for j in range(1, n + 1) if j != i),
            key=lambda j: (length(i, j), j),
        )
        for j in ranked[: out_degrees[i - 1]]:
            nn_edges.append((i, j))
            chosen_pairs.add((min(i, j), max(i, j)))
    edges = [(i, j, pair_len[(i, j)]) for (i, j) in sorted(chosen_pairs)]
    return StructureDraw(
        num_vertices=n,
        positions=positions,
        out_degrees=out_degrees,
        nn_edges=nn_edges,
        edges=edges,
        l_max=l_max,
        num_agents=num_agents,
        required_draw=required_draw,
        mu_star=mu_star,
    )


def generate_instance(config: BenchmarkConfig, seed: int, horizon: int) -> Instance:
    """One instance, escalating the seed when the draw cannot host its required vertices.

    Escalation re-rolls everything with seed + k * step and records k in the
    file, so a reader can reproduce the exact draw without searching.
    """
    if seed < 1:
        raise ValueError("seed must be >= 1")
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    for escalations in range(config.max_escalations + 1):
        effective_seed = seed + escalations * config.seed_escalation_step
        structure = draw_structure(config, effective_seed)
        required_count = min(structure.required_draw, structure.num_agents)
        graph = Graph(structure.num_vertices, symmetrize(structure.edges))
        dm = all_pairs_shortest(graph)
        pool = sorted(reachable_round_trip(graph, dm, structure.l_max) - {DEPOT})
        if len(pool) < required_count:
            continue
        # Separate stream for the required-vertex pick: it can only be drawn
        # after shortest paths exist, so it gets its own tag instead of
        # continuing the structure stream.
        rng = np.random.default_rng((effective_seed, _STRUCTURE_TAG, 1))
        must_visit = sorted(
            int(v) for v in rng.choice(np.asarray(pool), size=required_count, replace=False)
        )
        params = GrowthParams(
            mu_star=np.concatenate([[0.0], structure.mu_star]),
            noise_stddev=config.noise_stddev,
        )
        table = materialize_kappa(params, effective_seed, horizon)
        kappa = [[float(table[v, t]) for t in range(1, horizon + 1)]
                 for v in range(1, structure.num_vertices + 1)]
        return Instance(
            seed=seed,
            horizon=horizon,
            num_vertices=structure.num_vertices,
            num_agents=structure.num_agents,
            l_max=structure.l_max,
            positions=structure.positions,
            edges=structure.edges,
            must_visit=must_visit,
            mu_star=structure.mu_star,
            mu_default=config.mu_default,
            noise_stddev=config.noise_stddev,
            kappa=kappa,
            seed_escalations=escalations,
        )
    raise RuntimeError(
        f"seed {seed}: gave up after {config.max_escalations} escalations; "
        "the config cannot host its required vertices"
    )


def suite_paths(config: BenchmarkConfig, out_dir: str) -> List[Tuple[str, int, int]]:
    """Planned (path, seed, horizon) triples in generation order."""
    out = []
    for horizon in config.horizons:
        for seed in config.seeds:
            out.append((os.path.join(out_dir, f"H{horizon}", f"seed{seed}.json"), seed, horizon))
    return out


def generate_suite(config: BenchmarkConfig, out_dir: str, force: bool = False) -> List[str]:
    """Write the whole suite under out_dir/H{H}/seed{seed}.json.

    Refuses to touch a directory that already has content unless forced.
    """
    if os.path.isdir(out_dir) and os.listdir(out_dir) and not force:
        raise FileExistsError(
            f"{out_dir} already has content; pass force=True to overwrite"
        )
    written = []
    for path, seed, horizon in suite_paths(config, out_dir):
        instance = generate_instance(config, seed, horizon)
        write_instance(instance, path)
        written.append(path)
    return written
