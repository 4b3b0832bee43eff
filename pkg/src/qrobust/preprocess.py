"""Variable fixing by diagonal dominance and the associated sensitivity ranges.

A variable with a positive diagonal that outweighs twice the sum of its
negative off-diagonal coefficients is 1 in every optimal solution
(diagonally dominant); the mirror condition against the positive
off-diagonal sum forces 0 (diagonally recessive).  Fixed variables are
folded out of the matrix, which can enable further fixing, so the scan
repeats to a fixpoint.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .qubo import QuboInstance

FIX_ONE = "one"
FIX_ZERO = "zero"
FIX_NONE = "none"


@dataclass(frozen=True)
class FixReport:
    """Outcome of fixpoint variable fixing.

    For every completion y of the surviving variables,
    evaluate(original, merge(assignments, y)) == constant + evaluate(reduced, y).

    ``strict`` marks, per assignment, whether the fix came from a strict
    dominance inequality (holds in all optima) or from a weak all-one-sign
    rule (holds in at least one optimum); ``deltas`` records each
    variable's slack at the moment it was fixed.
    """

    assignments: tuple[tuple[int, int], ...]
    constant: float
    reduced: QuboInstance
    index_map: tuple[int, ...]
    rounds: int
    strict: tuple[bool, ...] = ()
    deltas: tuple[float, ...] = ()


@dataclass(frozen=True)
class SensitivityRecord:
    index: int
    diagonal: float
    delta: float
    fixable: str
    near_threshold: bool


@dataclass(frozen=True)
class SensitivityReport:
    records: tuple[SensitivityRecord, ...]

    def to_json_rows(self) -> list[dict]:
        return [
            {"index": r.index, "delta": r.delta, "fixable": r.fixable, "near": r.near_threshold}
            for r in self.records
        ]


def _row_sums(instance: QuboInstance) -> tuple[list[float], list[float], list[float]]:
    """Per-variable diagonal, doubled negative and doubled positive row sums."""
    diag = [0.0] * instance.n
    neg = [0.0] * instance.n
    pos = [0.0] * instance.n
    for (i, j), v in instance.coefficients.items():
        if i == j:
            diag[i] = v
        elif v < 0.0:
            neg[i] += 2.0 * v
            neg[j] += 2.0 * v
        else:
            pos[i] += 2.0 * v
            pos[j] += 2.0 * v
    return diag, neg, pos


def _classify(diag: float, neg: float, pos: float) -> tuple[float, str, bool]:
    """Slack value, fixable classification and strictness for one variable.

    Nonnegative diagonals report the dominance slack diag + neg (how far the
    diagonal may drop while the variable stays pinned at 1); negative
    diagonals report the recessive slack diag + pos (negative when the
    variable is pinned at 0, and its magnitude is how far the diagonal may
    rise).
    """
    if diag >= 0.0:
        delta = diag + neg
        if diag > 0.0 and delta > 0.0:
            return delta, FIX_ONE, True
        if neg == 0.0 and pos > 0.0:
            # zero diagonal, every off-diagonal nonnegative, one strictly
            # positive: setting the variable to 1 never hurts.
            return delta, FIX_ONE, False
        if diag == 0.0 and pos == 0.0 and neg < 0.0:
            # mirror case: setting the variable to 0 never hurts.
            return delta, FIX_ZERO, False
        return delta, FIX_NONE, False
    delta = diag + pos
    if delta < 0.0:
        return delta, FIX_ZERO, True
    return delta, FIX_NONE, False


def fix_slack(instance: QuboInstance, i: int) -> float:
    """Signed slack of the fixing rules at variable i.

    Positive values (nonnegative diagonal) certify x_i = 1 in every optimum
    and measure how far c_ii may decrease before the guarantee breaks;
    negative values (negative diagonal) certify x_i = 0 and measure, in
    magnitude, how far c_ii may increase.
    """
    if not (0 <= i < instance.n):
        raise ValueError(f"variable index {i} out of range for n={instance.n}")
    diag, neg, pos = _row_sums(instance)
    return _classify(diag[i], neg[i], pos[i])[0]


def pair_slack(instance: QuboInstance, i: int, j: int) -> float:
    """How far the symmetric pair value c_ij may decrease with x_i still pinned at 1.

    Requires the strict dominance rule to hold at i.  The slack is half the
    diagonal slack because the pair value enters the objective twice.
    """
    if not (0 <= i < instance.n) or not (0 <= j < instance.n):
        raise ValueError("variable index out of range")
    if i == j:
        raise ValueError("pair slack requires two distinct variables")
    diag, neg, _pos = _row_sums(instance)
    delta = diag[i] + neg[i]
    if diag[i] <= 0.0 or delta <= 0.0:
        raise ValueError(f"variable {i} is not strictly dominant (slack {delta})")
    return delta / 2.0


def reduce_instance(
    instance: QuboInstance, assignments: Iterable[tuple[int, int]]
) -> tuple[QuboInstance, float]:
    """Fold fixed variables out of the matrix.

    Fixing x_i = 1 moves c_ii into the constant and adds 2*c_ij to every
    remaining diagonal c_jj; fixing x_i = 0 just deletes row and column i.
    Returns the densely reindexed instance over the survivors and the
    accumulated constant; the caller can recover original indices from the
    survivors' sorted order.
    """
    fixes = list(assignments)
    seen: set[int] = set()
    for i, b in fixes:
        if not (0 <= i < instance.n):
            raise ValueError(f"assignment index {i} out of range")
        if b not in (0, 1):
            raise ValueError(f"assignment bit must be 0 or 1, got {b!r}")
        if i in seen:
            raise ValueError(f"duplicate assignment for variable {i}")
        seen.add(i)

    work = dict(instance.coefficients)
    constant = 0.0
    removed: set[int] = set()
    for i, b in sorted(fixes):
        if b == 1:
            constant += work.pop((i, i), 0.0)
            for (p, q), v in list(work.items()):
                if p == i or q == i:
                    j = q if p == i else p
                    work[(j, j)] = work.get((j, j), 0.0) + 2.0 * v
                    del work[(p, q)]
        else:
            for key in [k for k in work if i in k]:
                del work[key]
        removed.add(i)

    survivors = [i for i in range(instance.n) if i not in removed]
    remap = {orig: new for new, orig in enumerate(survivors)}
    reduced = QuboInstance(
        n=len(survivors),
        coefficients={(remap[i], remap[j]): v for (i, j), v in work.items()},
        name=instance.name,
    )
    return reduced, constant


def fix_variables(instance: QuboInstance) -> FixReport:
    """Fix every variable the dominance rules decide, repeating to a fixpoint.

    Each round scans the unfixed variables in ascending index against the
    current reduced matrix, fixes all that satisfy a rule, folds them out
    and rescans, because folding can newly enable a rule.  The final no-op
    scan counts toward ``rounds``.
    """
    assignments: list[tuple[int, int]] = []
    strict_flags: list[bool] = []
    fix_deltas: list[float] = []
    constant = 0.0
    current = instance
    index_map = list(range(instance.n))
    rounds = 0
    while True:
        rounds += 1
        diag, neg, pos = _row_sums(current)
        found: list[tuple[int, int, bool, float]] = []
        for i in range(current.n):
            delta, fixable, strict = _classify(diag[i], neg[i], pos[i])
            if fixable == FIX_ONE:
                found.append((i, 1, strict, delta))
            elif fixable == FIX_ZERO:
                found.append((i, 0, strict, delta))
        if not found:
            break
        for i, b, strict, delta in found:
            assignments.append((index_map[i], b))
            strict_flags.append(strict)
            fix_deltas.append(delta)
        reduced, step_constant = reduce_instance(current, [(i, b) for i, b, _s, _d in found])
        constant += step_constant
        fixed_local = {i for i, _b, _s, _d in found}
        index_map = [orig for local, orig in enumerate(index_map) if local not in fixed_local]
        current = reduced
    return FixReport(
        assignments=tuple(assignments),
        constant=constant,
        reduced=current,
        index_map=tuple(index_map),
        rounds=rounds,
        strict=tuple(strict_flags),
        deltas=tuple(fix_deltas),
    )


def merge_assignment(
    n: int,
    assignments: Sequence[tuple[int, int]],
    index_map: Sequence[int],
    completion: Sequence[int],
) -> tuple[int, ...]:
    """Recombine fixed bits with a completion of the surviving variables."""
    bits = [0] * n
    for i, b in assignments:
        bits[i] = b
    for local, b in zip(index_map, completion):
        bits[local] = int(b)
    return tuple(bits)


def sensitivity_report(instance: QuboInstance, near_tolerance: float = 0.0) -> SensitivityReport:
    """Per-variable slack, fixability and near-threshold flags.

    ``near_threshold`` marks unfixable variables whose slack magnitude is
    within the tolerance, i.e. those a small coefficient change could pin.
    """
    if near_tolerance < 0.0:
        raise ValueError(f"near tolerance must be >= 0, got {near_tolerance}")
    diag, neg, pos = _row_sums(instance)
    records = []
    for i in range(instance.n):
        delta, fixable, _strict = _classify(diag[i], neg[i], pos[i])
        near = fixable == FIX_NONE and abs(delta) <= near_tolerance
        records.append(
            SensitivityRecord(
                index=i, diagonal=diag[i], delta=delta, fixable=fixable, near_threshold=near
            )
        )
    return SensitivityReport(records=tuple(records))
