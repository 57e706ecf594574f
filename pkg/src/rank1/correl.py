"""Exact correlations mu(T^m A ∩ B) between cylinder sets."""

from __future__ import annotations

import csv
from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Callable, Iterable, Sequence

from . import tower
from .arith import fmt_fraction
from .schedule import ConstructionSchedule
from .tower import LevelSet

DEFAULT_TOLERANCE = Fraction(1, 10**9)


@dataclass(frozen=True)
class CorrelationResult:
    m: int
    lower: Fraction
    upper: Fraction
    stage_used: int

    @property
    def exact(self) -> bool:
        return self.lower == self.upper

    def as_row(self) -> list[str]:
        return [str(self.m), fmt_fraction(self.lower), fmt_fraction(self.upper), str(self.stage_used)]


class ToleranceUnreachable(RuntimeError):
    """The unresolved mass stayed above tolerance; ``result`` is the best bracket."""

    def __init__(self, result: CorrelationResult, tolerance: Fraction):
        self.result = result
        super().__init__(
            f"m={result.m}: bracket [{result.lower}, {result.upper}] wider than {tolerance}"
        )


def _common_stage(A: LevelSet, B: LevelSet) -> int:
    if A.stage != B.stage:
        raise ValueError(f"A and B must share a stage (got {A.stage} and {B.stage})")
    return A.stage


def _bracket(schedule, A, B, lower, unresolved, m, J) -> CorrelationResult:
    # unresolved mass may land in B, but never more than B has
    upper = min(lower + unresolved, B.measure(schedule))
    return CorrelationResult(m=m, lower=lower, upper=upper, stage_used=J)


def correlation(
    schedule: ConstructionSchedule,
    A: LevelSet,
    B: LevelSet,
    m: int,
    tolerance: Fraction | None = DEFAULT_TOLERANCE,
    cap: int | None = None,
) -> CorrelationResult:
    """Bracket for ``mu(T^m A ∩ B)``.

    Raises :class:`ToleranceUnreachable` when ``upper - lower`` exceeds
    ``tolerance``; ``tolerance=None`` returns whatever bracket was reached.

    Negative shifts use ``mu(T^m A ∩ B) = mu(T^{-m} B ∩ A)``, so the engine
    only ever pushes mass upward, where large last spacers resolve it.
    """
    j0 = _common_stage(A, B)
    A.validate(schedule)
    B.validate(schedule)
    if m < 0:
        r = correlation(schedule, B, A, -m, tolerance, cap)
        return CorrelationResult(m=m, lower=r.lower, upper=r.upper, stage_used=r.stage_used)
    J = tower.working_stage(schedule, j0, m)
    if m > schedule.h(J):
        raise ValueError(f"|m|={m} too large for a schedule with {schedule.n_towers} towers")
    AJ = tower.expand_set(schedule, A, J, cap)
    sr = tower.shift_levels(schedule, AJ, m, cap=cap)
    bset = set(B.levels)
    lower = Fraction(0)
    for s, ps in sr.pieces:
        hits = sum(1 for p in ps if tower.decode(schedule, p, s, j0) in bset)
        lower += hits * schedule.base_measure(s)
    res = _bracket(schedule, A, B, lower, sr.unresolved_mass, m, J)
    if tolerance is not None and res.upper - res.lower > tolerance:
        raise ToleranceUnreachable(res, tolerance)
    return res


def _batch_nonneg(
    schedule: ConstructionSchedule,
    A: LevelSet,
    B: LevelSet,
    ms: Sequence[int],
    J: int,
    cap: int | None,
) -> dict[int, tuple[Fraction, Fraction]]:
    """Pair-difference counting in tower J for shifts m >= 0.

    A point of A at position a lands on b = a + m inside tower J; positions
    with a + m > h_J are not resolved at this stage.
    """
    PA = tower.expand_positions(schedule, A.levels, A.stage, J, cap)
    PB = tower.expand_positions(schedule, B.levels, B.stage, J, cap)
    hJ = schedule.h(J)
    w = schedule.base_measure(J)
    lo, hi = min(ms), max(ms)
    window = sum(bisect_right(PB, a + hi) - bisect_left(PB, a + lo) for a in PA)
    counts: Counter[int] | dict[int, int]
    if window <= len(ms) * len(PA):
        counts = Counter()
        for a in PA:
            for b in PB[bisect_left(PB, a + lo): bisect_right(PB, a + hi)]:
                counts[b - a] += 1
    else:
        sB = set(PB)
        counts = {m: sum(1 for a in PA if a + m in sB) for m in ms}
    out = {}
    for m in ms:
        over = len(PA) - bisect_right(PA, hJ - m)
        out[m] = (counts.get(m, 0) * w, over * w)
    return out


def correlation_series(
    schedule: ConstructionSchedule,
    A: LevelSet,
    B: LevelSet,
    m_from: int,
    m_to: int,
    stride: int = 1,
    tolerance: Fraction | None = DEFAULT_TOLERANCE,
    ms: Iterable[int] | None = None,
    cap: int | None = None,
) -> list[CorrelationResult]:
    """Correlations for ``m`` in ``range(m_from, m_to + 1, stride)`` (or explicit ``ms``).

    Shifts are grouped by working stage and each group is evaluated from one
    pair of expansions.  Shifts left with unresolved mass are re-counted one
    tower deeper, all together, which matches the per-shift recursion of
    :func:`correlation`.
    """
    j0 = _common_stage(A, B)
    A.validate(schedule)
    B.validate(schedule)
    if ms is None:
        if m_from > m_to or stride < 1:
            raise ValueError("need m_from <= m_to and stride >= 1")
        ms = range(m_from, m_to + 1, stride)
    ms = sorted(set(ms))
    top = schedule.n_towers
    if ms and max(abs(ms[0]), abs(ms[-1])) > schedule.h(top):
        raise ValueError(f"|m| too large for a schedule with {top} towers")
    groups: dict[tuple[int, bool], list[int]] = {}
    for m in ms:
        groups.setdefault((tower.working_stage(schedule, j0, m), m < 0), []).append(m)
    results: dict[int, CorrelationResult] = {}
    for (J, neg), group in groups.items():
        src, dst = (B, A) if neg else (A, B)
        pending = [abs(m) for m in group]
        stage = J
        while pending:
            batch = _batch_nonneg(schedule, src, dst, pending, stage, cap)
            deeper = []
            for am in pending:
                lower, unres = batch[am]
                if unres > 0 and (tolerance is None or unres > tolerance) and stage < top:
                    deeper.append(am)
                    continue
                m = -am if neg else am
                res = _bracket(schedule, src, dst, lower, unres, m, J)
                if tolerance is not None and res.upper - res.lower > tolerance:
                    raise ToleranceUnreachable(res, tolerance)
                results[m] = res
            pending, stage = deeper, stage + 1
    return [results[m] for m in ms]


def write_csv(
    results: Sequence[CorrelationResult],
    fh: IO[str],
    bound: Callable[[CorrelationResult], Fraction | None] | None = None,
) -> None:
    """CSV with columns m, lower, upper, stage_used[, bound]."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["m", "lower", "upper", "stage_used"] + (["bound"] if bound else []))
    for r in results:
        row = r.as_row()
        if bound:
            b = bound(r)
            row.append("" if b is None else fmt_fraction(b))
        w.writerow(row)


# -- averaging operator -----------------------------------------------------------

@dataclass(frozen=True)
class AveragingEstimate:
    """Brackets for ||P(j,n) chi_A||^2 and for the window majorant.

    The majorant is (1/(eps r_j))^2 ||sum_{|s|<=r_j} T^s chi_A||^2 with
    eps = (r_j - n - 1)/r_j, the largest eps for which n < (1 - eps) r_j
    still leaves r_j - n - 1 averaged terms.
    """

    j: int
    n: int
    epsilon: Fraction
    value_bracket: tuple[Fraction, Fraction]
    bound_bracket: tuple[Fraction, Fraction]

    @property
    def value(self) -> Fraction:
        return self.value_bracket[1]

    @property
    def bound(self) -> Fraction:
        return self.bound_bracket[0]


def spacer_drifts(schedule: ConstructionSchedule, j: int, n: int) -> list[int]:
    """S_j(i, n) = sum_{k=1..n} s_j(i+k) - n H_j for i = 1 .. r_j - n - 1."""
    st = schedule.stage(j)
    if st.algebraic is None:
        raise ValueError(f"stage {j} has no algebraic parameters")
    H = st.algebraic.H
    prefix = [0]
    for s in st.spacers:
        prefix.append(prefix[-1] + s)
    # sum_{k=1..n} s(i+k) = prefix[i+n] - prefix[i]
    return [prefix[i + n] - prefix[i] - n * H for i in range(1, st.r - n)]


def averaging_norm(
    schedule: ConstructionSchedule,
    j: int,
    n: int,
    A: LevelSet,
    tolerance: Fraction | None = None,
) -> AveragingEstimate:
    r = schedule.stage(j).r
    if not 1 <= n <= r - 2:
        raise ValueError(f"need 1 <= n <= r_j - 2 = {r - 2}")
    S = spacer_drifts(schedule, j, n)
    W = len(S)
    diffs = Counter(abs(a - b) for a in S for b in S)
    window = Counter()
    for s in range(-r, r + 1):
        for t in range(-r, r + 1):
            window[abs(s - t)] += 1
    needed = sorted(set(diffs) | set(window))
    corr = {c.m: c for c in correlation_series(schedule, A, A, 0, 0, ms=needed, tolerance=tolerance)}
    value = (sum(k * corr[d].lower for d, k in diffs.items()) / W**2,
             sum(k * corr[d].upper for d, k in diffs.items()) / W**2)
    bound = (sum(k * corr[d].lower for d, k in window.items()) / W**2,
             sum(k * corr[d].upper for d, k in window.items()) / W**2)
    return AveragingEstimate(j=j, n=n, epsilon=Fraction(W, r), value_bracket=value, bound_bracket=bound)


def correlation_profile(
    schedule: ConstructionSchedule,
    A: LevelSet,
    B: LevelSet,
    x_lo: int,
    x_hi: int,
    cap: int | None = None,
) -> dict[int, CorrelationResult]:
    """Nonzero brackets of ``mu(T^x A ∩ B)`` for ``0 <= x_lo <= x <= x_hi``.

    Shifts absent from the result are exactly zero.  Entries left with
    unresolved mass in the working tower are re-counted in deeper towers
    (deepest bracket, no tolerance).
    """
    j0 = _common_stage(A, B)
    if not 0 <= x_lo <= x_hi:
        raise ValueError("need 0 <= x_lo <= x_hi")
    J = tower.working_stage(schedule, j0, x_hi)
    PA = tower.expand_positions(schedule, A.levels, j0, J, cap)
    PB = tower.expand_positions(schedule, B.levels, j0, J, cap)
    w = schedule.base_measure(J)
    hJ = schedule.h(J)
    counts: Counter[int] = Counter()
    for a in PA:
        for b in PB[bisect_left(PB, a + x_lo): bisect_right(PB, a + x_hi)]:
            counts[b - a] += 1
    out = {x: CorrelationResult(x, n * w, n * w, J) for x, n in counts.items()}
    # shifts that push part of A past the top of tower J
    first_over = max(x_lo, hJ - PA[-1] + 1) if PA else x_hi + 1
    if first_over <= x_hi:
        for r in correlation_series(schedule, A, B, first_over, x_hi, tolerance=None, cap=cap):
            if r.upper > 0:
                out[r.m] = r
            else:
                out.pop(r.m, None)
    return out
