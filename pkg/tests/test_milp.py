"""Mixed-integer model container and the two solver backends.

The reference backend is cross-checked against exhaustive enumeration on
knapsack-sized models, and both backends against each other.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from patrolopt.milp import (
    FEASIBLE_TIMEOUT,
    INFEASIBLE,
    OPTIMAL,
    TIMEOUT_NO_SOLUTION,
    MilpModel,
    ModelError,
    check_assignment,
    complete_with_lp,
    solve,
    write_lp,
)

BACKENDS = ("highs", "reference")


def knapsack_model(values, weights, capacity):
    m = MilpModel(sense="max", name="knapsack")
    idx = [m.add_binary(f"x{i}") for i in range(len(values))]
    for i, v in enumerate(values):
        m.set_objective_coefficient(idx[i], v)
    m.add_constraint([(idx[i], w) for i, w in enumerate(weights)], "<=", capacity, "cap")
    return m, idx


def knapsack_best(values, weights, capacity):
    best = 0.0
    for mask in itertools.product((0, 1), repeat=len(values)):
        if sum(w * b for w, b in zip(weights, mask)) <= capacity + 1e-12:
            best = max(best, sum(v * b for v, b in zip(values, mask)))
    return best


@pytest.mark.parametrize("backend", BACKENDS)
def test_knapsack_optima_match_enumeration(backend):
    for seed in range(8):
        rng = np.random.default_rng(seed)
        n = 8
        values = [float(rng.uniform(1, 10)) for _ in range(n)]
        weights = [float(rng.uniform(1, 5)) for _ in range(n)]
        cap = float(rng.uniform(5, 15))
        model, _ = knapsack_model(values, weights, cap)
        sol = solve(model, backend=backend)
        assert sol.status == OPTIMAL
        assert abs(sol.objective_value - knapsack_best(values, weights, cap)) < 1e-7
        assert check_assignment(model, sol.assignment) == []


@pytest.mark.parametrize("backend", BACKENDS)
def test_equality_and_continuous_mix(backend):
    # pick exactly two items; continuous y rides along up to the picked total
    m = MilpModel(sense="max")
    x = [m.add_binary(f"x{i}") for i in range(3)]
    y = m.add_continuous("y", 0.0, 10.0)
    for i, v in enumerate((1.0, 2.0, 3.0)):
        m.set_objective_coefficient(x[i], v)
    m.set_objective_coefficient(y, 0.5)
    m.add_constraint([(xi, 1.0) for xi in x], "=", 2.0, "pick2")
    m.add_constraint([(y, 1.0), (x[0], -4.0), (x[1], -4.0), (x[2], -4.0)], "<=", 0.0, "ylink")
    sol = solve(m, backend=backend)
    assert sol.status == OPTIMAL
    # best: items 2 and 3 (value 5) plus y = 8 at half weight
    assert abs(sol.objective_value - 9.0) < 1e-7


@pytest.mark.parametrize("backend", BACKENDS)
def test_infeasible_model_is_reported(backend):
    m = MilpModel(sense="max")
    a = m.add_binary("a")
    b = m.add_binary("b")
    m.add_constraint([(a, 1.0), (b, 1.0)], "=", 3.0, "impossible")
    sol = solve(m, backend=backend)
    assert sol.status == INFEASIBLE
    assert sol.assignment is None


def test_reference_timeout_without_incumbent():
    m, _ = knapsack_model([3.0, 5.0, 4.0], [2.0, 4.0, 3.0], 6.0)
    sol = solve(m, time_limit=0.0, backend="reference")
    assert sol.status == TIMEOUT_NO_SOLUTION


def test_reference_timeout_keeps_warm_start_incumbent():
    values, weights, cap = [3.0, 5.0, 4.0], [2.0, 4.0, 3.0], 6.0
    m, idx = knapsack_model(values, weights, cap)
    warm = np.zeros(m.num_variables)
    warm[idx[0]] = 1.0
    sol = solve(m, time_limit=0.0, backend="reference", warm_start=warm)
    assert sol.status == FEASIBLE_TIMEOUT
    assert sol.objective_value == 3.0
    assert sol.gap > 0.0


def test_reference_rejects_infeasible_warm_start():
    m, idx = knapsack_model([3.0, 5.0], [4.0, 4.0], 4.0)
    warm = np.ones(m.num_variables)  # violates the capacity row
    sol = solve(m, backend="reference", warm_start=warm)
    assert sol.status == OPTIMAL
    assert abs(sol.objective_value - 5.0) < 1e-9


def test_backends_agree_on_minimization():
    m = MilpModel(sense="min")
    x = [m.add_binary(f"x{i}") for i in range(4)]
    for i, c in enumerate((4.0, 2.0, 5.0, 3.0)):
        m.set_objective_coefficient(x[i], c)
    m.add_constraint([(xi, 1.0) for xi in x], ">=", 2.0, "atleast2")
    a = solve(m, backend="highs")
    b = solve(m, backend="reference")
    assert a.status == b.status == OPTIMAL
    assert abs(a.objective_value - 5.0) < 1e-9
    assert abs(b.objective_value - 5.0) < 1e-9


def test_check_assignment_flags_violations():
    m, idx = knapsack_model([1.0, 1.0], [3.0, 3.0], 4.0)
    bad = np.array([1.0, 1.0])
    msgs = check_assignment(m, bad)
    assert any("cap" in msg for msg in msgs)
    frac = np.array([0.5, 0.0])
    msgs = check_assignment(m, frac)
    assert any("integral" in msg or "binary" in msg for msg in msgs)


def test_validate_rejects_malformed_models():
    m = MilpModel()
    m.add_binary("dup")
    m.add_binary("dup")
    with pytest.raises(ModelError, match="duplicate"):
        m.validate()

    m = MilpModel()
    i = m.add_binary("x")
    m.add_constraint([(i + 5, 1.0)], "<=", 1.0, "badref")
    with pytest.raises(ModelError, match="unknown variable"):
        m.validate()

    m = MilpModel()
    i = m.add_binary("x")
    m.add_constraint([(i, float("nan"))], "<=", 1.0, "nan")
    with pytest.raises(ModelError, match="finite"):
        m.validate()

    m = MilpModel()
    i = m.add_binary("x")
    m.add_constraint([(i, 1.0)], "<>", 1.0, "badrel")
    with pytest.raises(ModelError, match="relation"):
        m.validate()

    with pytest.raises(ModelError):
        MilpModel(sense="sideways")

    # solve() validates before touching a backend
    m = MilpModel()
    m.add_continuous("y", 2.0, 1.0)
    with pytest.raises(ModelError):
        solve(m)


def test_gap_is_zero_at_proven_optimality():
    m, _ = knapsack_model([2.0, 3.0], [1.0, 1.0], 2.0)
    for backend in BACKENDS:
        sol = solve(m, backend=backend)
        assert sol.status == OPTIMAL
        assert sol.gap <= 1e-9


def test_complete_with_lp_fills_continuous_variables():
    m = MilpModel(sense="max")
    a = m.add_binary("a")
    y = m.add_continuous("y", 0.0, 5.0)
    m.set_objective_coefficient(a, 1.0)
    m.set_objective_coefficient(y, 1.0)
    m.add_constraint([(y, 1.0), (a, -3.0)], "<=", 0.0, "link")
    full = complete_with_lp(m, {a: 1.0})
    assert full is not None
    assert full[a] == 1.0
    assert abs(full[y] - 3.0) < 1e-9
    assert check_assignment(m, full) == []
    # fixing a = 0 with a >= 1 side row has no completion
    m.add_constraint([(a, 1.0)], ">=", 1.0, "force")
    assert complete_with_lp(m, {a: 0.0}) is None


def test_lp_text_round_trips_the_model_shape():
    m, _ = knapsack_model([3.0, 5.0], [2.0, 4.0], 6.0)
    text = write_lp(m)
    for section in ("Maximize", "Subject To", "Binary", "End"):
        assert section in text
    assert "cap:" in text
