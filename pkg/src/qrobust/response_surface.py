"""Linear response surface over coded scenario coefficients.

Fitting the scenario optima against the +1/-1 design columns yields a
regression that predicts the optimal objective of any matrix between the
generator extremes in constant time; adding three residual standard errors
turns the prediction into an empirical upper bound, compared here against
the always-valid positive-element sum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .design import (
    DesignMatrix,
    DifferenceSet,
    ScenarioGenerators,
    differing_elements,
    random_scenario,
)
from .qubo import QuboInstance, format_number, positive_sum_bound
from .solver import PROVEN_OPTIMAL, SolverConfig, solve_exact


@dataclass(frozen=True, eq=False)
class SurfaceModel:
    """Main-effects regression: intercept + one coefficient per differing position."""

    intercept: float
    coefficients: np.ndarray
    standard_error: float
    dof: int
    diff: DifferenceSet

    def __post_init__(self):
        beta = np.asarray(self.coefficients, dtype=float)
        if beta.shape != (self.diff.d,):
            raise ValueError(
                f"coefficient count {beta.shape} != factor count {self.diff.d}"
            )
        if self.standard_error < 0.0:
            raise ValueError("standard error must be >= 0")
        if self.dof < 0:
            raise ValueError("degrees of freedom must be >= 0")
        object.__setattr__(self, "coefficients", beta)


@dataclass(frozen=True)
class BoundRow:
    label: str
    optimum: float
    g_estimate: float
    g_bound: float
    possum_bound: float
    g_gap_pct: float | None
    possum_gap_pct: float | None
    proven: bool


@dataclass(frozen=True)
class BoundComparison:
    rows: tuple[BoundRow, ...]

    def mean_gaps(self) -> tuple[float, float]:
        """Mean percentage gaps (surface bound, positive-sum bound) over usable rows."""
        usable = [r for r in self.rows if r.proven and r.g_gap_pct is not None]
        if not usable:
            raise ValueError("no proven rows with defined gaps")
        g = sum(r.g_gap_pct for r in usable) / len(usable)
        p = sum(r.possum_gap_pct for r in usable) / len(usable)
        return g, p


def code_scenario(
    gen: ScenarioGenerators, diff: DifferenceSet, instance: QuboInstance
) -> np.ndarray:
    """Map a scenario's coefficients onto the coded [-1, +1] factor scale.

    level_a codes to +1, level_b to -1, the midpoint to 0.  The instance
    must agree with the generators at every non-differing position and stay
    inside the closed level interval at every differing one.
    """
    if instance.n != gen.n:
        raise ValueError(f"instance has n={instance.n}, generators n={gen.n}")
    diff_set = set(diff.positions)
    for pos, v in instance.coefficients.items():
        if pos not in gen.entries and pos not in diff_set:
            raise ValueError(f"instance has a coefficient at {pos} unknown to the generators")
    for pos, (a, b) in gen.entries.items():
        if pos in diff_set:
            continue
        v = instance.coefficients.get(pos, 0.0)
        if v != a:
            raise ValueError(
                f"non-differing position {pos} is {v}, generators fix it at {a}"
            )
    z = np.zeros(diff.d)
    for m, pos in enumerate(diff.positions):
        a, b = gen.entries[pos]
        q = instance.coefficients.get(pos, 0.0)
        lo, hi = min(a, b), max(a, b)
        tol = 1e-9 * max(1.0, abs(lo), abs(hi))
        if q < lo - tol or q > hi + tol:
            raise ValueError(
                f"value {q} at {pos} outside the level interval [{lo}, {hi}]"
            )
        z[m] = (2.0 * q - (a + b)) / (a - b)
    return z


def fit_model(
    design: DesignMatrix, optima: Sequence[float], diff: DifferenceSet
) -> SurfaceModel:
    """Least-squares fit of scenario optima against the coded design columns.

    Balanced orthogonal designs admit the closed form: intercept = mean of
    the optima, coefficient m = (column_m . optima) / k.  The orthogonality
    is checked before the shortcut is used; anything else falls back to a
    generic least-squares solve.  ``diff`` names the coefficient position
    behind each design column.
    """
    y = np.asarray(optima, dtype=float)
    if y.shape != (design.k,):
        raise ValueError(f"need one optimum per run: got {y.shape}, k={design.k}")
    if diff.d != design.d:
        raise ValueError(
            f"difference set has {diff.d} positions, design has {design.d} factors"
        )
    dof = design.k - design.d - 1
    if dof < 1:
        raise ValueError(
            f"regression needs k - d - 1 >= 1 residual degrees of freedom, "
            f"got k={design.k}, d={design.d}"
        )
    x = design.levels.astype(float)
    if design.is_balanced() and design.is_orthogonal():
        intercept = float(y.mean())
        beta = x.T @ y / design.k
    else:
        full = np.column_stack([np.ones(design.k), x])
        coef, *_ = np.linalg.lstsq(full, y, rcond=None)
        intercept = float(coef[0])
        beta = coef[1:]
    residuals = y - (intercept + x @ beta)
    se = float(np.sqrt(residuals @ residuals / dof))
    return SurfaceModel(
        intercept=intercept,
        coefficients=beta,
        standard_error=se,
        dof=dof,
        diff=diff,
    )


def estimate(model: SurfaceModel, z: Sequence[float]) -> float:
    """Predicted optimal objective at a coded scenario."""
    zv = np.asarray(z, dtype=float)
    if zv.shape != (len(model.coefficients),):
        raise ValueError(
            f"coded vector length {zv.shape} != coefficient count {len(model.coefficients)}"
        )
    if np.any(zv < -1.0 - 1e-9) or np.any(zv > 1.0 + 1e-9):
        raise ValueError("coded entries must lie in [-1, +1]")
    return model.intercept + float(model.coefficients @ zv)


def upper_bound(model: SurfaceModel, z: Sequence[float]) -> float:
    """Estimate plus three residual standard errors: an empirical upper bound."""
    return estimate(model, z) + 3.0 * model.standard_error


def compare_bounds(
    model: SurfaceModel,
    gen: ScenarioGenerators,
    count: int,
    seed: int,
    solver_config: SolverConfig | None = None,
) -> BoundComparison:
    """Solve random interior scenarios exactly and tabulate both bounds.

    Scenario t draws with seed ``seed + t``.  Rows are sorted by descending
    surface-bound gap; rows without a proven optimum keep their bounds but
    are flagged and excluded from gap statistics (as are zero optima, whose
    percentage gap is undefined).
    """
    if count < 1:
        raise ValueError(f"scenario count must be >= 1, got {count}")
    diff = differing_elements(gen)
    if diff.positions != model.diff.positions:
        raise ValueError("model was fit against a different difference set")
    config = solver_config or SolverConfig()
    rows = []
    for t in range(count):
        inst = random_scenario(gen, (seed + t) % 2**64)
        out = solve_exact(inst, config)
        proven = out.status == PROVEN_OPTIMAL
        opt = out.solution.value
        z = code_scenario(gen, diff, inst)
        est = estimate(model, z)
        gub = est + 3.0 * model.standard_error
        psb = positive_sum_bound(inst)
        if proven and opt != 0.0:
            g_gap = 100.0 * (gub - opt) / abs(opt)
            p_gap = 100.0 * (psb - opt) / abs(opt)
        else:
            g_gap = p_gap = None
        rows.append(
            BoundRow(
                label=f"s{t}",
                optimum=opt,
                g_estimate=est,
                g_bound=gub,
                possum_bound=psb,
                g_gap_pct=g_gap,
                possum_gap_pct=p_gap,
                proven=proven,
            )
        )
    rows.sort(key=lambda r: (r.g_gap_pct is None, -(r.g_gap_pct or 0.0)))
    return BoundComparison(rows=tuple(rows))


def model_to_json(model: SurfaceModel) -> dict:
    return {
        "intercept": model.intercept,
        "coefficients": [
            {"i": i, "j": j, "beta": float(beta)}
            for (i, j), beta in zip(model.diff.positions, model.coefficients)
        ],
        "standard_error": model.standard_error,
        "dof": model.dof,
    }


def model_from_json(obj: dict) -> SurfaceModel:
    try:
        positions = tuple((int(e["i"]), int(e["j"])) for e in obj["coefficients"])
        beta = np.array([float(e["beta"]) for e in obj["coefficients"]])
        return SurfaceModel(
            intercept=float(obj["intercept"]),
            coefficients=beta,
            standard_error=float(obj["standard_error"]),
            dof=int(obj["dof"]),
            diff=DifferenceSet(positions=positions),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed model document: {exc}") from exc


def comparison_to_csv(comparison: BoundComparison) -> str:
    num = format_number
    lines = ["scenario,optimum,g_estimate,g_bound,possum_bound,g_gap_pct,possum_gap_pct"]
    for r in comparison.rows:
        g = "" if r.g_gap_pct is None else num(r.g_gap_pct)
        p = "" if r.possum_gap_pct is None else num(r.possum_gap_pct)
        lines.append(
            f"{r.label},{num(r.optimum)},{num(r.g_estimate)},{num(r.g_bound)},"
            f"{num(r.possum_bound)},{g},{p}"
        )
    return "\n".join(lines) + "\n"
