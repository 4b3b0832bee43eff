"""Acceptance gate: one test per release criterion, each timed and printed.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
pass/fail lines.  The random suites are fully seeded; expected values come
from the independent brute-force oracle in conftest.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from conftest import (
    brute_force_max,
    brute_force_optima,
    make_business_generators,
    make_demo5,
    random_instance,
)
from qrobust import (
    build_design,
    compare_bounds,
    differing_elements,
    fit_model,
    fix_slack,
    fix_variables,
    format_instance,
    instantiate_scenario,
    pair_slack,
    positive_sum_bound,
    run_count,
    run_robust_analysis,
    solve_exact,
    solve_heuristic,
)
from qrobust.cli import main
from qrobust.design import DifferenceSet, perturbed_generators
from qrobust.solver import PROVEN_OPTIMAL, SolverConfig


@contextmanager
def criterion(num: int, description: str, limit_seconds: float):
    t0 = time.perf_counter()
    try:
        yield
    except Exception:
        print(f"criterion {num} ({description}): FAIL")
        raise
    elapsed = time.perf_counter() - t0
    ok = elapsed < limit_seconds
    print(
        f"criterion {num} ({description}): {'PASS' if ok else 'FAIL'} "
        f"[{elapsed:.1f}s, limit {limit_seconds:.0f}s]"
    )
    assert ok, f"criterion {num} exceeded its {limit_seconds}s runtime limit"


@pytest.fixture(scope="session")
def oracle_suite():
    """200 random integer instances, n <= 20, with brute-force optima."""
    rng = np.random.default_rng(20240202)
    suite = []
    for t in range(200):
        n = int(rng.integers(6, 21))
        density = [0.1, 0.5, 1.0][t % 3]
        inst = random_instance(rng, n, density)
        suite.append((inst, brute_force_max(inst)))
    return suite


def test_criterion_1_worked_fixture():
    with criterion(1, "worked 5-variable fixture", 1.0):
        demo = make_demo5()
        assert fix_slack(demo, 3) == 8.0
        assert pair_slack(demo, 3, 2) == 4.0
        report = fix_variables(demo)
        assert report.assignments == ((3, 1),)
        assert report.constant == 100.0
        assert [report.reduced.diagonal(i) for i in range(4)] == [20.0, 90.0, 50.0, 98.0]
        out = solve_exact(demo, SolverConfig(time_budget=None))
        assert out.status == PROVEN_OPTIMAL
        assert out.solution.value == 288.0
        assert out.solution.bits == (0, 1, 0, 1, 1)


def test_criterion_2_solver_oracle_equivalence(oracle_suite):
    with criterion(2, "solver oracle equivalence, 200 instances", 120.0):
        unlimited = SolverConfig(time_budget=None)
        forced_bnb = SolverConfig(time_budget=None, enum_threshold=5)
        heuristic_hits = 0
        for t, (inst, oracle) in enumerate(oracle_suite):
            enum_out = solve_exact(inst, unlimited)
            assert enum_out.solution.value == oracle
            assert enum_out.status == PROVEN_OPTIMAL
            bnb_out = solve_exact(inst, forced_bnb)
            assert bnb_out.solution.value == oracle
            assert bnb_out.status == PROVEN_OPTIMAL
            heur = solve_heuristic(inst, SolverConfig(restarts=20, seed=9000 + t))
            heuristic_hits += heur.solution.value == oracle
        assert heuristic_hits >= 0.95 * len(oracle_suite), heuristic_hits


def test_criterion_3_fixing_soundness():
    with criterion(3, "fixing soundness, 500 instances", 120.0):
        rng = np.random.default_rng(20240303)
        for t in range(500):
            n = int(rng.integers(3, 17))
            inst = random_instance(rng, n, [0.1, 0.5, 1.0][t % 3])
            report = fix_variables(inst)
            best, winners = brute_force_optima(inst)
            reduced_best = brute_force_max(report.reduced) if report.reduced.n else 0.0
            assert report.constant + reduced_best == best
            # strict dominance chains preserve every optimum
            if report.assignments and all(report.strict):
                for i, b in report.assignments:
                    assert all(w[i] == b for w in winners)


def test_criterion_4_design_properties():
    with criterion(4, "design balance and orthogonality", 30.0):
        assert run_count(23) == 64
        assert run_count(123) == 256
        assert run_count(130) == 512
        for d in (3, 23, 130):
            design = build_design(run_count(d), d)
            assert design.is_balanced()
            assert design.is_orthogonal()


def test_criterion_5_regression_recovery():
    with criterion(5, "exact linear regression recovery", 30.0):
        rng = np.random.default_rng(20240505)
        for d in (2, 5, 23, 60):
            k = run_count(d)
            design = build_design(k, d)
            diff = DifferenceSet(positions=tuple((0, j + 1) for j in range(d)))
            beta = rng.uniform(-10, 10, size=d)
            intercept = float(rng.uniform(-20, 20))
            y = intercept + design.levels.astype(float) @ beta
            model = fit_model(design, y, diff)
            assert abs(model.intercept - intercept) <= 1e-9
            assert float(np.max(np.abs(model.coefficients - beta))) <= 1e-9
            assert model.standard_error <= 1e-9


def test_criterion_6_bound_validity(oracle_suite):
    with criterion(6, "positive-sum and surface bound validity", 300.0):
        for inst, oracle in oracle_suite:
            assert positive_sum_bound(inst) >= oracle
        gen = make_business_generators()
        diff = differing_elements(gen)
        design = build_design(run_count(diff.d), diff.d)
        exact = SolverConfig(mode="exact", time_budget=None)
        optima = [
            solve_exact(instantiate_scenario(gen, diff, design.levels[r]), exact).solution.value
            for r in range(design.k)
        ]
        model = fit_model(design, optima, diff)
        comparison = compare_bounds(model, gen, 1000, seed=20240606, solver_config=exact)
        assert all(r.proven for r in comparison.rows)
        valid = sum(1 for r in comparison.rows if r.g_bound >= r.optimum)
        assert valid >= 990, f"surface bound valid on only {valid}/1000 scenarios"
        g_gap, possum_gap = comparison.mean_gaps()
        assert g_gap < possum_gap, (g_gap, possum_gap)


def test_criterion_7_pipeline_reproducibility(tmp_path):
    with criterion(7, "benchmark-shape pipeline reproducibility", 600.0):
        rng = np.random.default_rng(20240501)
        inst = random_instance(rng, 50, 0.10)
        d = differing_elements(perturbed_generators(inst, 0.05)).d
        assert run_count(d) in (256, 512)
        inst_path = tmp_path / "bench50.txt"
        inst_path.write_text(format_instance(inst))
        outputs = {}
        for jobs in (1, 8):
            report = tmp_path / f"report_j{jobs}.json"
            scen = tmp_path / f"scen_j{jobs}.csv"
            code = main(
                [
                    "analyze", "--in", str(inst_path), "--perturb", "0.05",
                    "--mode", "heuristic", "--restarts", "3", "--seed", "99",
                    "--jobs", str(jobs), "--reference", "average",
                    "--out", str(report), "--scenarios", str(scen),
                ]
            )
            assert code == 0
            outputs[jobs] = (report.read_bytes(), scen.read_bytes())
        assert outputs[1] == outputs[8], "worker count changed the output bytes"
        doc = json.loads(outputs[1][0])
        assert doc["k"] in (256, 512)
        assert sum(e["frequency"] for e in doc["pool"]) == doc["k"]
        assert 0.0 <= doc["coverage"]["percent"] <= 100.0

        # widening the generators must not shrink the solution pool on average;
        # smaller instances keep this part exactly solvable
        pool_sizes = {0.05: [], 0.10: []}
        config = SolverConfig(mode="exact", time_budget=None)
        singles = 0
        for seed in range(5):
            base = random_instance(np.random.default_rng(600 + seed), 16, 0.10)
            for fraction in (0.05, 0.10):
                report, _ = run_robust_analysis(perturbed_generators(base, fraction), config)
                assert report.exactness == 1.0
                pool_sizes[fraction].append(len(report.pool))
            singles += pool_sizes[0.05][-1] == 1
        assert singles >= 1, "expected at least one single-solution pool at the narrow width"
        assert np.mean(pool_sizes[0.10]) >= np.mean(pool_sizes[0.05]), pool_sizes


def test_criterion_8_business_example_shape():
    with criterion(8, "business fixture pool structure", 60.0):
        gen = make_business_generators()
        report, _results = run_robust_analysis(gen, SolverConfig(mode="exact"))
        assert report.k == 64
        exclusive = range(4)
        for entry in report.pool:
            selected = [i for i in exclusive if entry.bits[i] == "1"]
            assert len(selected) <= 1, f"{entry.bits} co-selects {selected}"
        modal = report.most_robust
        assert sum(modal[i] == "1" for i in exclusive) == 1
