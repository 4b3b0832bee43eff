"""The scenario loop: instantiate every design run, solve it, pool the optima.

Scenarios are independent, so the loop parallelizes over processes; results
are re-sorted by scenario index before pooling, which makes reports
identical regardless of worker count or completion order.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

from .design import (
    DesignMatrix,
    DifferenceSet,
    ScenarioGenerators,
    build_design,
    differing_elements,
    instantiate_scenario,
    run_count,
)
from .qubo import QuboInstance, evaluate, format_number
from .solver import PROVEN_OPTIMAL, BinarySolution, SolverConfig, solve


@dataclass(frozen=True)
class ScenarioResult:
    scenario_index: int
    solution: BinarySolution
    status: str
    value: float


@dataclass(frozen=True)
class PoolEntry:
    bits: str
    frequency: int
    mean_value: float


@dataclass(frozen=True)
class RobustnessReport:
    """Pooled optima over all scenarios.

    ``pool`` is sorted by descending frequency, then descending mean value,
    then bitstring, so its head is the most robust solution.  ``exactness``
    is the fraction of scenarios solved to proven optimality.
    """

    k: int
    pool: tuple[PoolEntry, ...]
    most_robust: str
    exactness: float
    reference: tuple[str, float] | None = None


def scenario_instances(
    gen: ScenarioGenerators,
) -> tuple[DifferenceSet, int, DesignMatrix | None, list[QuboInstance]]:
    """Difference set, run count, design and the instantiated scenario matrices.

    With no differing positions there is nothing to vary: a single scenario
    equal to the common matrix is returned and no design is built.
    """
    diff = differing_elements(gen)
    k = run_count(diff.d)
    if diff.d == 0:
        return diff, 1, None, [instantiate_scenario(gen, diff, ())]
    design = build_design(k, diff.d)
    instances = [instantiate_scenario(gen, diff, design.levels[i]) for i in range(k)]
    return diff, k, design, instances


def _scenario_task(args) -> tuple[int, object]:
    index, instance, config = args
    return index, solve(instance, config)


def run_robust_analysis(
    gen: ScenarioGenerators,
    solver_config: SolverConfig | None = None,
    jobs: int = 1,
    reference: Sequence[int] | None = None,
) -> tuple[RobustnessReport, list[ScenarioResult]]:
    """Solve every scenario and pool the returned solutions by bitstring.

    Scenario i derives its solver seed as ``seed + i`` so runs are
    reproducible for any worker count.  When ``reference`` bits are given,
    the report also carries their value-match coverage over the scenarios.
    """
    config = solver_config or SolverConfig()
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    _diff, k, _design, instances = scenario_instances(gen)
    tasks = [
        (i, instances[i], replace(config, seed=(config.seed + i) % 2**64))
        for i in range(k)
    ]
    if jobs > 1 and k > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(
                pool.map(_scenario_task, tasks, chunksize=max(1, k // (4 * jobs)))
            )
    else:
        outcomes = [_scenario_task(t) for t in tasks]
    outcomes.sort(key=lambda pair: pair[0])
    results = [
        ScenarioResult(
            scenario_index=i,
            solution=out.solution,
            status=out.status,
            value=out.solution.value,
        )
        for i, out in outcomes
    ]

    grouped: dict[str, list[float]] = {}
    for r in results:
        grouped.setdefault(r.solution.bitstring, []).append(r.value)
    entries = tuple(
        sorted(
            (
                PoolEntry(bits=bits, frequency=len(vals), mean_value=sum(vals) / len(vals))
                for bits, vals in grouped.items()
            ),
            key=lambda e: (-e.frequency, -e.mean_value, e.bits),
        )
    )
    exactness = sum(1 for r in results if r.status == PROVEN_OPTIMAL) / k
    ref_field = None
    if reference is not None:
        percent = coverage(results, instances, reference)
        ref_field = ("".join(str(int(b)) for b in reference), percent)
    report = RobustnessReport(
        k=k,
        pool=entries,
        most_robust=entries[0].bits,
        exactness=exactness,
        reference=ref_field,
    )
    return report, results


def coverage(
    results: Sequence[ScenarioResult],
    scenarios: Sequence[QuboInstance],
    reference: Sequence[int],
    atol: float = 0.0,
) -> float:
    """Percentage of scenarios where the reference attains the scenario optimum.

    The match is on objective value, not bits, so alternate optima count as
    covered.
    """
    if len(results) != len(scenarios):
        raise ValueError("results and scenarios must align one to one")
    if not scenarios:
        raise ValueError("cannot compute coverage over zero scenarios")
    if len(reference) != scenarios[0].n:
        raise ValueError(
            f"reference length {len(reference)} != n={scenarios[0].n}"
        )
    hits = 0
    for res, inst in zip(results, scenarios):
        if abs(evaluate(inst, reference) - res.value) <= atol:
            hits += 1
    return 100.0 * hits / len(results)


def most_robust(report: RobustnessReport) -> str:
    """Pool entry with maximal frequency; ties prefer the larger mean value,
    then the lexicographically smallest bitstring."""
    if not report.pool:
        raise ValueError("solution pool is empty")
    winner = min(report.pool, key=lambda e: (-e.frequency, -e.mean_value, e.bits))
    return winner.bits


def report_to_json(report: RobustnessReport) -> dict:
    doc: dict = {
        "k": report.k,
        "pool": [
            {"bits": e.bits, "frequency": e.frequency, "mean_value": e.mean_value}
            for e in report.pool
        ],
        "most_robust": report.most_robust,
        "exactness": report.exactness,
    }
    if report.reference is not None:
        doc["coverage"] = {
            "reference_bits": report.reference[0],
            "percent": report.reference[1],
        }
    return doc


def results_to_csv(results: Sequence[ScenarioResult]) -> str:
    lines = ["index,bits,value,status"]
    for r in results:
        lines.append(
            f"{r.scenario_index},{r.solution.bitstring},{format_number(r.value)},{r.status}"
        )
    return "\n".join(lines) + "\n"
