"""End-to-end runs of the command-line entry point, in process via main()."""

import json
import os
import xml.etree.ElementTree as ET

import pytest

from patrolopt import results_io
from patrolopt.cli import main
from patrolopt.instance_io import write_instance

from test_simulator import make_instance


@pytest.fixture(scope="module")
def suite_dir(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("cli") / "suite")
    code = main([
        "gen", "--out", out, "--seeds", "1..4", "--horizons", "1,2",
        "--vertex-choices", "4,5", "--agent-choices", "1",
    ])
    assert code == 0
    return out


def read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


def rows_without_timing(path):
    rows = results_io.read_results(path)
    for row in rows:
        row.pop("iter_seconds")
    return rows


def test_gen_writes_suite_and_refuses_overwrite(suite_dir, capsys):
    for h in (1, 2):
        for seed in range(1, 5):
            assert os.path.exists(os.path.join(suite_dir, f"H{h}", f"seed{seed}.json"))
    code = main([
        "gen", "--out", suite_dir, "--seeds", "1..4", "--horizons", "1,2",
        "--vertex-choices", "4,5", "--agent-choices", "1",
    ])
    captured = capsys.readouterr()
    assert code == 2
    assert "error:" in captured.err
    code = main([
        "gen", "--out", suite_dir, "--seeds", "1..4", "--horizons", "1,2",
        "--vertex-choices", "4,5", "--agent-choices", "1", "--force",
    ])
    assert code == 0


def test_solve_writes_deterministic_plan_json(suite_dir, tmp_path):
    instance = os.path.join(suite_dir, "H2", "seed1.json")
    out_a = str(tmp_path / "plan_a.json")
    out_b = str(tmp_path / "plan_b.json")
    assert main(["solve", "--instance", instance, "--planner", "tocp",
                 "--out", out_a]) == 0
    assert main(["solve", "--instance", instance, "--planner", "tocp",
                 "--out", out_b]) == 0
    assert read_bytes(out_a) == read_bytes(out_b)
    payload = json.loads(read_bytes(out_a))
    assert payload["status"] == "optimal"
    assert payload["routes"]
    assert payload["routes"][0][0] == 1 and payload["routes"][0][-1] == 1
    assert sorted(payload["visited"]) == payload["visited"]
    # model stats carry sizes and gap, never wall-clock times
    assert set(payload["model"]) == {
        "num_variables", "num_constraints", "status", "objective", "gap",
        "node_count",
    }


def test_solve_reports_infeasible_with_exit_one(tmp_path):
    kappa = [[0.0], [0.5], [0.5]]
    instance = make_instance(
        3, [(1, 2, 1.0), (2, 3, 1.0)], l_max=2.0, horizon=1, kappa=kappa,
        must_visit=[3],
    )
    path = str(tmp_path / "tight.json")
    write_instance(instance, path)
    out = str(tmp_path / "plan.json")
    assert main(["solve", "--instance", path, "--planner", "tocp",
                 "--out", out]) == 1
    payload = json.loads(read_bytes(out))
    assert payload["status"] == "infeasible"
    assert payload["routes"] is None


def test_simulate_row_is_stable_apart_from_timings(suite_dir, tmp_path):
    instance = os.path.join(suite_dir, "H2", "seed2.json")
    out_a = str(tmp_path / "a.csv")
    out_b = str(tmp_path / "b.csv")
    assert main(["simulate", "--instance", instance, "--planner", "greedy",
                 "--out", out_a]) == 0
    assert main(["simulate", "--instance", instance, "--planner", "greedy",
                 "--out", out_b]) == 0
    rows_a = rows_without_timing(out_a)
    rows_b = rows_without_timing(out_b)
    assert len(rows_a) == 1
    assert rows_a == rows_b
    row = rows_a[0]
    assert row["instance_id"] == "H2_seed2"
    assert row["planner"] == "greedy"
    assert len(row["iter_costs"]) == 2
    assert row["iter_statuses"] == ["heuristic", "heuristic"]


def test_bench_rows_agree_across_worker_counts(suite_dir, tmp_path):
    serial = str(tmp_path / "serial.csv")
    parallel = str(tmp_path / "parallel.csv")
    argv = ["bench", "--suite", suite_dir, "--planners", "tocp,greedy"]
    assert main(argv + ["--jobs", "1", "--out", serial]) == 0
    assert main(argv + ["--jobs", "2", "--out", parallel]) == 0
    rows_serial = rows_without_timing(serial)
    rows_parallel = rows_without_timing(parallel)
    assert rows_serial == rows_parallel
    assert len(rows_serial) == 8 * 2  # instances times planners
    # suite order: horizon block, then seed, planners inside
    assert [r["instance_id"] for r in rows_serial[:4]] == [
        "H1_seed1", "H1_seed1", "H1_seed2", "H1_seed2",
    ]
    assert [r["planner"] for r in rows_serial[:2]] == ["tocp", "greedy"]


def test_stats_prints_comparison(suite_dir, tmp_path, capsys):
    results = str(tmp_path / "r.csv")
    assert main(["bench", "--suite", suite_dir, "--planners", "tocp,top",
                 "--out", results]) == 0
    capsys.readouterr()
    assert main(["stats", "--results", results, "--pair", "top,tocp"]) == 0
    out = capsys.readouterr().out
    assert "all-solved subset: 8 instances" in out
    assert "mean_top" in out and "mean_tocp" in out
    assert "failures:" in out
    assert main(["stats", "--results", results, "--pair", "top"]) == 2


def test_plot_instance_map(suite_dir, tmp_path):
    instance = os.path.join(suite_dir, "H1", "seed3.json")
    plan = str(tmp_path / "plan.json")
    assert main(["solve", "--instance", instance, "--planner", "tocp",
                 "--out", plan]) == 0
    bare = str(tmp_path / "bare.svg")
    bare_again = str(tmp_path / "bare2.svg")
    overlay = str(tmp_path / "overlay.svg")
    assert main(["plot", "--instance", instance, "--out", bare]) == 0
    assert main(["plot", "--instance", instance, "--out", bare_again]) == 0
    assert main(["plot", "--instance", instance, "--plan", plan,
                 "--out", overlay]) == 0
    assert read_bytes(bare) == read_bytes(bare_again)
    assert read_bytes(bare) != read_bytes(overlay)
    ET.fromstring(read_bytes(overlay))


def test_plot_cost_curves(suite_dir, tmp_path):
    results = str(tmp_path / "r.csv")
    assert main(["bench", "--suite", suite_dir, "--planners", "tocp,greedy",
                 "--out", results]) == 0
    curves = str(tmp_path / "curves.svg")
    assert main(["plot", "--results", results, "--out", curves]) == 0
    root = ET.fromstring(read_bytes(curves))
    ns = "{http://www.w3.org/2000/svg}"
    assert len(root.findall(f"{ns}polyline")) == 2


def test_plot_needs_exactly_one_source(suite_dir, tmp_path, capsys):
    instance = os.path.join(suite_dir, "H1", "seed1.json")
    out = str(tmp_path / "x.svg")
    assert main(["plot", "--out", out]) == 2
    assert "error:" in capsys.readouterr().err
    results = str(tmp_path / "r.csv")
    assert main(["bench", "--suite", suite_dir, "--planners", "greedy",
                 "--out", results]) == 0
    assert main(["plot", "--instance", instance, "--results", results,
                 "--out", out]) == 2


def test_malformed_instance_file_exits_two(tmp_path, capsys):
    bad = str(tmp_path / "bad.json")
    with open(bad, "w") as fh:
        fh.write('{"seed": 1}')
    out = str(tmp_path / "plan.json")
    code = main(["solve", "--instance", bad, "--planner", "tocp", "--out", out])
    captured = capsys.readouterr()
    assert code == 2
    assert "error:" in captured.err
    assert not os.path.exists(out)


def test_unknown_planner_in_bench_exits_two(suite_dir, tmp_path, capsys):
    out = str(tmp_path / "r.csv")
    code = main(["bench", "--suite", suite_dir, "--planners", "tocp,banana",
                 "--out", out])
    assert code == 2
    assert "unknown planner" in capsys.readouterr().err


def test_missing_suite_dir_exits_two(tmp_path, capsys):
    out = str(tmp_path / "r.csv")
    code = main(["bench", "--suite", str(tmp_path / "nowhere"), "--out", out])
    assert code == 2
    assert "no instance files" in capsys.readouterr().err


def test_argparse_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["solve", "--instance", "x.json", "--planner", "tabu",
              "--out", str(tmp_path / "p.json")])
    assert info.value.code == 2
