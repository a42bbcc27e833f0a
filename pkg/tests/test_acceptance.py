"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.  The heavyweight sweeps are shared module-scoped
fixtures; re-runs for the determinism criterion rebuild everything from
the same seeds.
"""

import math
import os
import time
from fractions import Fraction

import numpy as np
import pytest

from navgraph.construction import Assignment, Seed, build_double_clustering
from navgraph.harness import (ExperimentSpec, aggregate_csv_text,
                              csv_without_wall_ms, fit_scaling, raw_csv_text,
                              run_experiment)
from navgraph.oracle import (find_divergent_permutation, marginal_edge_law,
                             monotonicity_check, random_disjoint_sets, tau_tail)
from navgraph.routing import RoutingMode, route
from navgraph.spaces import DirectedCycle


def _report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[criterion {criterion:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    value = fn(*args, **kwargs)
    return value, time.perf_counter() - t0


def _pooled_mean(rows):
    vals = [r.mean_len for r in rows if r.mean_len is not None]
    return sum(vals) / len(vals)


def _mean_and_se(per_seed_means):
    k = len(per_seed_means)
    mean = sum(per_seed_means) / k
    var = sum((m - mean) ** 2 for m in per_seed_means) / (k - 1)
    return mean, math.sqrt(var / k)


# ---------------------------------------------------------------------------
# shared experiment fixtures (each returns (result, spec, elapsed_seconds))


def _run(spec):
    result, elapsed = _timed(run_experiment, spec)
    return result, spec, elapsed


@pytest.fixture(scope="module")
def exp_cycles():
    # shared by the scaling (5) and half-greedy (8) criteria
    return _run(ExperimentSpec(
        model="two-undirected-cycles",
        sizes=(2**9, 2**10, 2**11, 2**12, 2**13, 2**14),
        seeds=(1, 2, 3, 4, 5), routes_per_size=1000,
        routing_modes=(RoutingMode.parse("greedy-1"),
                       RoutingMode.parse("half-greedy-1"))))


@pytest.fixture(scope="module")
def exp_dc_ordering():
    return _run(ExperimentSpec(
        model="two-undirected-cycles", sizes=(2**12,), seeds=(1, 2, 3, 4, 5),
        routes_per_size=1000,
        routing_modes=(RoutingMode.parse("greedy-1"),
                       RoutingMode.parse("combined"))))


@pytest.fixture(scope="module")
def exp_ii_ordering():
    return _run(ExperimentSpec(
        model="independent-interest", sizes=(2**12,), seeds=(1, 2, 3, 4, 5),
        routes_per_size=1000,
        routing_modes=(RoutingMode.parse("greedy-1"),),
        params={"space": {"kind": "undirected-cycle"}}))


@pytest.fixture(scope="module")
def exp_grid_tree():
    return _run(ExperimentSpec(
        model="grid-tree", sizes=(2**14,), seeds=(1, 2), routes_per_size=1000,
        routing_modes=(RoutingMode.parse("greedy-2"),
                       RoutingMode.parse("combined")),
        params={"branching": 2}))


@pytest.fixture(scope="module")
def exp_degree():
    return _run(ExperimentSpec(
        model="independent-interest", sizes=(1024,),
        seeds=tuple(range(1, 21)), routes_per_size=1,
        routing_modes=(RoutingMode.parse("greedy-1"),),
        params={"space": {"kind": "directed-cycle"}}))


def _kleinberg_spec(alpha):
    return ExperimentSpec(
        model="kleinberg", sizes=(64 * 64,), seeds=(1, 2, 3),
        routes_per_size=1000,
        routing_modes=(RoutingMode.parse("greedy-1"),),
        params={"alpha": alpha, "links": 1, "space": {"kind": "grid"}})


@pytest.fixture(scope="module")
def exp_kleinberg():
    r0, s0, t0 = _run(_kleinberg_spec(0.0))
    r2, s2, t2 = _run(_kleinberg_spec(2.0))
    return (r0, s0), (r2, s2), t0 + t2


@pytest.fixture(scope="module")
def tau_setup():
    set_a, set_b = random_disjoint_sets(1000, 100, 100, Seed(2024))
    report, elapsed = _timed(tau_tail, 1000, set_a, set_b, 10000, Seed(2024))
    return report, (set_a, set_b), elapsed


# ---------------------------------------------------------------------------
# criteria


def test_criterion_1_exact_marginal_law():
    t0 = time.perf_counter()
    details = []
    ok = True
    for n in (6, 7):
        report = marginal_edge_law(n)
        ok = ok and report.all_exact
        for row in report.rows:
            ok = ok and row.probability == Fraction(1, row.distance)
        details.append(f"n={n} exact={report.all_exact}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30
    _report(1, ok, f"marginal law {'; '.join(details)} ({elapsed:.1f}s < 30s)")


def test_criterion_2_monotonicity():
    report, elapsed = _timed(monotonicity_check, 7)
    ok = report.violations == 0 and elapsed < 60
    _report(2, ok, f"n=7 exhaustive: {report.violations} violations over "
                   f"{report.paths_checked} paths ({elapsed:.1f}s < 60s)")


def test_criterion_3_divergence_witness():
    t0 = time.perf_counter()
    witness = find_divergent_permutation(8)
    ok = witness is not None
    replay_ok = False
    if ok:
        space = DirectedCycle(witness.n)
        a = Assignment(space, DirectedCycle(witness.n), np.array(witness.pi))
        g = build_double_clustering(a)
        p1 = route(g, a, RoutingMode("greedy", space=1),
                   witness.source, witness.target).path
        p2 = route(g, a, RoutingMode("greedy", space=2),
                   witness.source, witness.target).path
        replay_ok = (tuple(p1) == witness.path_d
                     and tuple(p2) == witness.path_dpi and p1 != p2)
    elapsed = time.perf_counter() - t0
    ok = ok and replay_ok and elapsed < 60
    _report(3, ok, f"witness {witness and (witness.n, witness.pi)} replayed "
                   f"with differing paths ({elapsed:.1f}s < 60s)")


def test_criterion_4_degree_law(exp_degree):
    result, _, elapsed = exp_degree
    harmonic = sum(1.0 / k for k in range(1, 1024))  # oracle before the builds
    degrees = [r.mean_outdeg for r in result.rows]
    observed = sum(degrees) / len(degrees)
    rel = abs(observed - harmonic) / harmonic
    ok = rel <= 0.05 and elapsed < 10
    _report(4, ok, f"mean out-degree {observed:.4f} vs H_1023={harmonic:.4f} "
                   f"({rel:.2%} <= 5%, {elapsed:.1f}s < 10s)")


def test_criterion_5_logarithmic_scaling(exp_cycles):
    result, _, elapsed = exp_cycles
    fit = fit_scaling(result)["greedy-1"]
    top = [2**12, 2**13, 2**14]
    ratios = [_pooled_mean(result.rows_for("greedy-1", n)) / math.log2(n)
              for n in top]
    spread = max(ratios) / min(ratios) - 1
    ok = fit.r_squared >= 0.95 and spread < 0.15 and elapsed < 600
    _report(5, ok, f"greedy fit R^2={fit.r_squared:.4f} >= 0.95, "
                   f"slope={fit.slope:.3f}, top-3 ratio spread "
                   f"{spread:.2%} < 15% ({elapsed:.0f}s < 600s)")


def test_criterion_6_mode_ordering(exp_dc_ordering, exp_ii_ordering):
    dc_result, _, t_dc = exp_dc_ordering
    ii_result, _, t_ii = exp_ii_ordering
    combined = [r.mean_len for r in dc_result.rows_for("combined")]
    dc_greedy = [r.mean_len for r in dc_result.rows_for("greedy-1")]
    ii_greedy = [r.mean_len for r in ii_result.rows_for("greedy-1")]
    (m_c, se_c), (m_i, se_i), (m_d, se_d) = map(
        _mean_and_se, (combined, ii_greedy, dc_greedy))
    gap1 = "confirmed" if m_c + se_c < m_i - se_i else "inconclusive"
    gap2 = "confirmed" if m_i + se_i < m_d - se_d else "inconclusive"
    elapsed = t_dc + t_ii
    ok = m_c < m_i < m_d and elapsed < 300
    _report(6, ok,
            f"combined {m_c:.2f}+-{se_c:.2f} < interest {m_i:.2f}+-{se_i:.2f} "
            f"({gap1}) < clustering {m_d:.2f}+-{se_d:.2f} ({gap2}) "
            f"over 5 seeds ({elapsed:.0f}s < 300s)")


def test_criterion_7_grid_tree_success(exp_grid_tree):
    result, _, elapsed = exp_grid_tree
    tree_rows = result.rows_for("greedy-2")
    comb_rows = result.rows_for("combined")
    tree_rate = sum(r.successes for r in tree_rows) / sum(r.routes for r in tree_rows)
    comb_rate = sum(r.successes for r in comb_rows) / sum(r.routes for r in comb_rows)
    ok = 0.65 <= tree_rate <= 0.95 and comb_rate >= tree_rate
    _report(7, ok, f"n=2^14 tree-only success {tree_rate:.3f} in [0.65, 0.95], "
                   f"combined {comb_rate:.3f} >= tree-only "
                   f"(2^16 reproduction stays behind the large-size flag; "
                   f"{elapsed:.0f}s)")


def test_criterion_8_half_greedy_polylog(exp_cycles):
    result, _, elapsed = exp_cycles
    sizes = [2**10, 2**12, 2**14]
    means = {n: _pooled_mean(result.rows_for("half-greedy-1", n)) for n in sizes}
    ratios = [means[n] / math.log2(n) ** 2 for n in sizes]
    bound_ok = all(means[n] <= 4 * math.log2(n) ** 2 for n in sizes)
    growth_ok = all(ratios[j] <= 1.25 * ratios[i]
                    for i in range(len(sizes)) for j in range(i + 1, len(sizes)))
    ok = bound_ok and growth_ok and elapsed < 600
    detail = ", ".join(f"n=2^{int(math.log2(n))}: {means[n]:.2f} "
                       f"(ratio {r:.4f})" for n, r in zip(sizes, ratios))
    _report(8, ok, f"half-greedy means <= 4*log2(n)^2 and ratio growth <= 25%: "
                   f"{detail} ({elapsed:.0f}s < 600s)")


def test_criterion_9_tau_tail(tau_setup):
    report, _, elapsed = tau_setup
    early = report.tail[:10]
    nonincreasing = all(b <= a for a, b in zip(early, early[1:]))
    ok = report.tau1_probability >= 0.485 and nonincreasing and elapsed < 60
    _report(9, ok, f"P(tau=1)={report.tau1_probability:.4f} >= 0.485, "
                   f"tail nonincreasing through t=10 ({elapsed:.1f}s < 60s)")


def test_criterion_10_kleinberg_exponent(exp_kleinberg):
    # Known red at this lattice size: the inverse-square advantage is
    # asymptotic, and at 4096 vertices uniform links still produce shorter
    # greedy paths (the link sampler itself is verified exactly against the
    # stated law in the construction tests).  The curves only meet around
    # 2^16 vertices; see test_kleinberg_exponent_growth_separation for the
    # size-feasible form of the claim.
    (r0, _), (r2, _), elapsed = exp_kleinberg
    mean0 = _pooled_mean(r0.rows)
    mean2 = _pooled_mean(r2.rows)
    ok = mean2 < mean0 and elapsed < 120
    _report(10, ok, f"64x64 grid, 1 link: mean greedy length alpha=2 "
                    f"({mean2:.1f}) < alpha=0 ({mean0:.1f}) "
                    f"({elapsed:.0f}s < 120s)")


@pytest.mark.skipif(not os.environ.get("NAVGRAPH_LARGE"),
                    reason="set NAVGRAPH_LARGE=1 to run the 2^16 lattice check")
def test_kleinberg_exponent_growth_separation():
    # Non-gating: the measurable form of the exponent law within the size
    # budget.  Growing the lattice 64x64 -> 256x256 inflates uniform-link
    # greedy paths polynomially (~ side^(2/3), factor ~2.5) but
    # inverse-square paths only polylogarithmically (factor ~2.0); the
    # strict mean ordering itself only emerges past 2^16 vertices.
    def spec(alpha, side):
        return ExperimentSpec(
            model="kleinberg", sizes=(side * side,), seeds=(1,),
            routes_per_size=600,
            routing_modes=(RoutingMode.parse("greedy-1"),),
            params={"alpha": alpha, "links": 1, "space": {"kind": "grid"}})

    means = {}
    for alpha in (0.0, 2.0):
        for side in (64, 256):
            result = run_experiment(spec(alpha, side), allow_large=True)
            means[alpha, side] = _pooled_mean(result.rows)
    growth_uniform = means[0.0, 256] / means[0.0, 64]
    growth_inverse_sq = means[2.0, 256] / means[2.0, 64]
    print(f"[large-scale] growth 64->256: alpha=0 x{growth_uniform:.2f}, "
          f"alpha=2 x{growth_inverse_sq:.2f}; means at 256x256: "
          f"alpha=0 {means[0.0, 256]:.1f}, alpha=2 {means[2.0, 256]:.1f}")
    assert growth_inverse_sq < growth_uniform


def test_criterion_11_determinism(exp_cycles, exp_dc_ordering, exp_ii_ordering,
                                  exp_grid_tree, exp_degree, exp_kleinberg,
                                  tau_setup):
    reruns = []
    for result, spec, _ in (exp_cycles, exp_dc_ordering, exp_ii_ordering,
                            exp_grid_tree, exp_degree):
        reruns.append((spec.model, result, run_experiment(spec)))
    (r0, s0), (r2, s2), _ = exp_kleinberg
    reruns.append(("kleinberg-a0", r0, run_experiment(s0)))
    reruns.append(("kleinberg-a2", r2, run_experiment(s2)))
    mismatches = []
    for name, first, second in reruns:
        agg_same = (csv_without_wall_ms(aggregate_csv_text(first))
                    == csv_without_wall_ms(aggregate_csv_text(second)))
        raw_same = raw_csv_text(first) == raw_csv_text(second)
        if not (agg_same and raw_same):
            mismatches.append(name)
    tau_report, (set_a, set_b), _ = tau_setup
    tau_again = tau_tail(1000, set_a, set_b, 10000, Seed(2024))
    if tau_report.tail != tau_again.tail:
        mismatches.append("tau")
    ok = not mismatches
    _report(11, ok, "re-runs of criteria 4-10 reproduce byte-identical CSV "
                    f"(wall_ms excluded); mismatches: {mismatches or 'none'}")
