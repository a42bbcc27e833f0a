import json
import math

import numpy as np
import pytest

from navgraph import harness
from navgraph.construction import Seed
from navgraph.harness import (AggregateRow, ExperimentResult, ExperimentSpec,
                              aggregate_csv_text, build_model, build_space,
                              csv_without_wall_ms, experiment_spec_from_dict,
                              export_csv, fit_scaling, load_experiment_config,
                              raw_csv_text, read_aggregate_csv, run_experiment)
from navgraph.routing import RoutingMode
from navgraph.spaces import DirectedCycle, Grid, TreeLeaves, UndirectedCycle


def make_spec(**overrides):
    base = dict(model="two-directed-cycles", sizes=(32, 64), seeds=(1, 2),
                routes_per_size=40,
                routing_modes=(RoutingMode.parse("greedy-1"),))
    base.update(overrides)
    return ExperimentSpec(**base)


def synthetic_result(values_by_n, mode="greedy-1"):
    spec = make_spec(sizes=tuple(sorted(values_by_n)),
                     routing_modes=(RoutingMode.parse(mode),))
    rows = [AggregateRow("two-directed-cycles", n, 1, mode, 10, 10, 1.0,
                         mean, mean, 2.0, 1.0)
            for n, mean in sorted(values_by_n.items())]
    return ExperimentResult(spec, rows, [])


# ---------------------------------------------------------------------------
# spec and config


def test_spec_validation():
    with pytest.raises(ValueError):
        make_spec(sizes=())
    with pytest.raises(ValueError):
        make_spec(sizes=(64, 32))
    with pytest.raises(ValueError):
        make_spec(sizes=(32, 32))
    with pytest.raises(ValueError):
        make_spec(routes_per_size=0)
    with pytest.raises(ValueError):
        make_spec(model="heptagon")
    with pytest.raises(ValueError):
        make_spec(seeds=())


def test_config_round_trip(tmp_path):
    spec = make_spec(routing_modes=(RoutingMode.parse("greedy-1"),
                                    RoutingMode.parse("combined")),
                     params={"branching": 2})
    path = tmp_path / "sweep.cfg"
    path.write_text(json.dumps(spec.to_dict()))
    loaded = load_experiment_config(path)
    assert loaded == spec


def test_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        experiment_spec_from_dict({"model": "two-directed-cycles",
                                   "sizes": [8], "seeds": [1], "routez": 5})


# ---------------------------------------------------------------------------
# spaces from descriptors / model instantiation


def test_build_space_descriptors():
    assert isinstance(build_space({"kind": "directed-cycle"}, 8), DirectedCycle)
    assert isinstance(build_space({"kind": "undirected-cycle"}, 8), UndirectedCycle)
    grid = build_space({"kind": "grid"}, 64)
    assert isinstance(grid, Grid) and grid.dims == (8, 8)
    rect = build_space({"kind": "grid"}, 32)
    assert rect.dims == (8, 4)
    tree = build_space({"kind": "tree", "branching": 2}, 16)
    assert isinstance(tree, TreeLeaves) and tree.height == 4
    with pytest.raises(ValueError):
        build_space({"kind": "tree", "branching": 2}, 100)
    with pytest.raises(ValueError):
        build_space({"kind": "grid", "dims": [3, 4]}, 16)
    with pytest.raises(ValueError):
        build_space({"kind": "dodecahedron"}, 8)


def test_build_model_continuum_uses_boxes():
    assignment, graph = build_model("continuum", {}, 50, Seed(3))
    assert assignment.space1.points.shape == (50, 2)
    assert assignment.space2.points.shape == (50, 3)
    assert assignment.space1.points[:, 0].max() <= 1.33
    assert assignment.space1.points[:, 1].max() <= 1.0
    assert graph.n == 50


def test_build_model_rejects_pi_for_baselines():
    with pytest.raises(ValueError):
        build_model("independent-interest", {}, 8, Seed(0), pi=np.arange(8))


# ---------------------------------------------------------------------------
# running experiments


def test_two_directed_cycles_all_routes_succeed():
    spec = make_spec(sizes=(128,), seeds=(1,), routes_per_size=100)
    result = run_experiment(spec)
    row = result.rows[0]
    assert row.routes == 100
    assert row.success_rate == 1.0
    assert row.mean_len is not None and row.mean_len > 0


def test_row_structure_and_raw_records():
    spec = make_spec(routing_modes=(RoutingMode.parse("greedy-1"),
                                    RoutingMode.parse("greedy-2")))
    result = run_experiment(spec)
    # 2 sizes x 2 seeds x 2 modes
    assert len(result.rows) == 8
    assert len(result.raw) == 2 * 2 * 2 * 40
    keys = [(r.n, r.seed, r.mode) for r in result.rows]
    assert keys == sorted(keys, key=lambda k: (k[0], k[1], k[2] != "greedy-1"))


def test_route_endpoints_unique_and_valid():
    spec = make_spec(sizes=(16,), seeds=(3,), routes_per_size=1000)
    result = run_experiment(spec)
    records = [(r.source, r.target) for r in result.raw]
    assert len(records) == 16 * 15  # capped at the number of ordered pairs
    assert len(set(records)) == len(records)
    assert all(s != t for s, t in records)


def test_budget_refusal():
    spec = make_spec(sizes=(2**15,))
    with pytest.raises(ValueError, match="allow_large"):
        run_experiment(spec)
    with pytest.raises(ValueError, match="ceiling"):
        run_experiment(make_spec(sizes=(2**17,)), allow_large=True)


def test_determinism_and_worker_independence():
    spec = make_spec(sizes=(48,), seeds=(5, 6), routes_per_size=60,
                     routing_modes=(RoutingMode.parse("greedy-1"),
                                    RoutingMode.parse("combined")))
    r1 = run_experiment(spec)
    r2 = run_experiment(spec)
    r_par = run_experiment(spec, workers=2)
    assert csv_without_wall_ms(aggregate_csv_text(r1)) == \
        csv_without_wall_ms(aggregate_csv_text(r2))
    assert raw_csv_text(r1) == raw_csv_text(r2) == raw_csv_text(r_par)
    assert csv_without_wall_ms(aggregate_csv_text(r1)) == \
        csv_without_wall_ms(aggregate_csv_text(r_par))


def test_thinning_flag_reduces_edges():
    dense = run_experiment(make_spec(sizes=(256,), seeds=(1,), routes_per_size=5))
    thinned = run_experiment(make_spec(sizes=(256,), seeds=(1,), routes_per_size=5,
                                       thinning=True))
    assert thinned.rows[0].mean_outdeg < dense.rows[0].mean_outdeg


def test_edge_dump(tmp_path):
    spec = make_spec(sizes=(32,), seeds=(1,), routes_per_size=5)
    run_experiment(spec, dump_edges_dir=str(tmp_path / "edges"))
    dumped = list((tmp_path / "edges").glob("*.edges"))
    assert len(dumped) == 1
    assert "two-directed-cycles-n32-seed1" in dumped[0].name


# ---------------------------------------------------------------------------
# scaling fits


def test_fit_scaling_recovers_linear_law():
    values = {n: 2.0 * math.log2(n) + 1.0 for n in (64, 128, 256, 512)}
    fits = fit_scaling(synthetic_result(values))
    fit = fits["greedy-1"]
    assert fit.slope == pytest.approx(2.0)
    assert fit.intercept == pytest.approx(1.0)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_scaling_constant_input():
    fits = fit_scaling(synthetic_result({64: 5.0, 128: 5.0, 256: 5.0}))
    assert fits["greedy-1"].slope == pytest.approx(0.0)


def test_fit_scaling_needs_three_sizes():
    with pytest.raises(ValueError):
        fit_scaling(synthetic_result({64: 1.0, 128: 2.0}))


def test_clustering_slope_close_to_interest_slope():
    # double clustering pays only a constant over independent interest, so
    # the fitted slopes agree to within the stated 0.9 factor
    sizes = (64, 128, 256, 512, 1024, 2048)
    seeds = (1, 2)
    dc = run_experiment(ExperimentSpec(
        model="two-undirected-cycles", sizes=sizes, seeds=seeds,
        routes_per_size=400, routing_modes=(RoutingMode.parse("greedy-1"),)))
    ii = run_experiment(ExperimentSpec(
        model="independent-interest", sizes=sizes, seeds=seeds,
        routes_per_size=400, routing_modes=(RoutingMode.parse("greedy-1"),),
        params={"space": {"kind": "undirected-cycle"}}))
    dc_slope = fit_scaling(dc)["greedy-1"].slope
    ii_slope = fit_scaling(ii)["greedy-1"].slope
    assert dc_slope > 0.9 * ii_slope
    assert dc_slope > 0


# ---------------------------------------------------------------------------
# CSV round trips


def test_export_csv_header_only_when_empty(tmp_path):
    spec = make_spec()
    empty = ExperimentResult(spec, [], [])
    path = tmp_path / "out.csv"
    export_csv(empty, path)
    assert path.read_text() == harness.AGGREGATE_HEADER + "\n"


def test_export_csv_row_count_and_round_trip(tmp_path):
    spec = make_spec(routing_modes=(RoutingMode.parse("greedy-1"),
                                    RoutingMode.parse("greedy-2")),
                     seeds=(1,))
    result = run_experiment(spec)
    path = tmp_path / "out.csv"
    raw_path = tmp_path / "raw.csv"
    export_csv(result, path, raw_path=raw_path)
    text = path.read_text()
    assert len(text.splitlines()) == 1 + 4  # header + 2 sizes x 1 seed x 2 modes
    assert raw_path.read_text().splitlines()[0] == harness.RAW_HEADER
    assert read_aggregate_csv(path) == result.rows


def test_round_trip_preserves_missing_means(tmp_path):
    spec = make_spec()
    row = AggregateRow("two-directed-cycles", 32, 1, "greedy-1", 5, 0, 0.0,
                       None, None, 1.5, 2.25)
    path = tmp_path / "out.csv"
    export_csv(ExperimentResult(spec, [row], []), path)
    assert read_aggregate_csv(path) == [row]


def test_csv_without_wall_ms_strips_only_last_column():
    text = "a,b,wall_ms\n1,2,3.5\n"
    assert csv_without_wall_ms(text) == "a,b\n1,2\n"
