"""Symbolic tower engine.

A level of tower ``j`` sits inside tower ``j + 1`` once per column, at
position ``o(c) + i``.  Iterating that embedding gives the positions of a
stage-``j`` level inside any deeper tower, and ``T^m`` acts on a position
``p`` of tower ``J`` as ``p -> p + m`` as long as the result stays in
``[0, h_J]``.  Positions that leave the tower are pushed one stage deeper,
where all but the extremal column land inside the bigger tower.
"""

from __future__ import annotations

import os
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .schedule import ConstructionSchedule

DEFAULT_CAP = 10**7

# number of ShiftResults whose mass conservation has been checked
conservation_checks = 0


class CapExceeded(RuntimeError):
    pass


def position_cap() -> int:
    return int(os.environ.get("RANK1_CAP", DEFAULT_CAP))


@dataclass(frozen=True)
class LevelSet:
    """Union of levels of tower ``stage``."""

    stage: int
    levels: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(sorted(set(int(x) for x in self.levels))))

    def validate(self, schedule: ConstructionSchedule) -> LevelSet:
        h = schedule.h(self.stage)
        if self.levels and (self.levels[0] < 0 or self.levels[-1] > h):
            raise ValueError(f"levels must lie in [0, {h}] for stage {self.stage}")
        return self

    def measure(self, schedule: ConstructionSchedule) -> Fraction:
        return len(self.levels) * schedule.base_measure(self.stage)

    def to_dict(self) -> dict:
        return {"stage": self.stage, "levels": [str(x) for x in self.levels]}

    @classmethod
    def from_dict(cls, d: dict) -> LevelSet:
        return cls(stage=int(d["stage"]), levels=tuple(int(x) for x in d["levels"]))

    # presets
    @classmethod
    def base(cls, j: int) -> LevelSet:
        """E_j."""
        return cls(j, (0,))

    @classmethod
    def level(cls, j: int, i: int) -> LevelSet:
        """T^i E_j."""
        return cls(j, (i,))

    @classmethod
    def tower(cls, schedule: ConstructionSchedule, j: int) -> LevelSet:
        """U_j."""
        return cls(j, tuple(range(schedule.h(j) + 1)))


@dataclass(frozen=True)
class ColumnOffsets:
    stage: int
    offsets: tuple[int, ...]


def column_offsets(schedule: ConstructionSchedule, j: int) -> ColumnOffsets:
    return ColumnOffsets(j, schedule.offsets(j))


@dataclass(frozen=True)
class PositionExpansion:
    from_stage: int
    to_stage: int
    positions: tuple[int, ...]


def _check_cap(count: int, cap: int | None) -> None:
    cap = position_cap() if cap is None else cap
    if count > cap:
        raise CapExceeded(f"expansion would produce {count} positions (cap {cap})")


def expand_positions(
    schedule: ConstructionSchedule,
    positions: Sequence[int],
    j: int,
    J: int,
    cap: int | None = None,
) -> list[int]:
    """Positions in tower ``J`` of the given tower-``j`` positions, sorted."""
    if J < j:
        raise ValueError("target stage must not precede source stage")
    mult = 1
    for l in range(j, J):
        mult *= schedule.stage(l).r
    _check_cap(len(positions) * mult, cap)
    cur = sorted(positions)
    for l in range(j, J):
        offs = schedule.offsets(l)
        # columns are disjoint blocks, so concatenating by column keeps order
        cur = [o + p for o in offs for p in cur]
    return cur


def expand_level(
    schedule: ConstructionSchedule, j: int, i: int, J: int, cap: int | None = None
) -> PositionExpansion:
    if not 0 <= i <= schedule.h(j):
        raise ValueError(f"level {i} outside tower {j}")
    schedule.h(J)
    return PositionExpansion(j, J, tuple(expand_positions(schedule, [i], j, J, cap)))


def decode(schedule: ConstructionSchedule, p: int, J: int, j: int) -> int | None:
    """Level of tower ``j`` containing position ``p`` of tower ``J``; None for a spacer."""
    while J > j:
        J -= 1
        offs = schedule.offsets(J)
        c = bisect_right(offs, p) - 1
        p -= offs[c]
        if p > schedule.h(J):
            return None
    return p


@dataclass(frozen=True)
class ShiftResult:
    """Image of a level set under ``T^m``.

    ``pieces`` holds ``(stage, positions)`` groups: positions resolved while
    working in that tower.  ``resolved`` re-expresses all of them in the
    deepest tower used.
    """

    schedule: ConstructionSchedule
    input_stage: int
    input_measure: Fraction
    pieces: tuple[tuple[int, tuple[int, ...]], ...]
    unresolved_mass: Fraction

    def __post_init__(self):
        global conservation_checks
        if self.unresolved_mass < 0:
            raise AssertionError("negative unresolved mass")
        if self.resolved_measure + self.unresolved_mass != self.input_measure:
            raise AssertionError(
                f"mass not conserved: {self.resolved_measure} + {self.unresolved_mass} "
                f"!= {self.input_measure}"
            )
        conservation_checks += 1

    @property
    def final_stage(self) -> int:
        return max((s for s, _ in self.pieces), default=self.input_stage)

    @property
    def resolved_measure(self) -> Fraction:
        return sum((len(ps) * self.schedule.base_measure(s) for s, ps in self.pieces), Fraction(0))

    @property
    def resolved(self) -> LevelSet:
        J = self.final_stage
        out: list[int] = []
        for s, ps in self.pieces:
            out.extend(expand_positions(self.schedule, ps, s, J))
        return LevelSet(J, tuple(out))


def shift_levels(
    schedule: ConstructionSchedule,
    A: LevelSet,
    m: int,
    max_extra_stages: int | None = None,
    cap: int | None = None,
) -> ShiftResult:
    """Apply ``T^m`` to a level set, pushing out-of-tower positions deeper.

    Requires ``|m| <= h_J`` for ``J = A.stage``.  Mass that still leaves the
    tower after ``max_extra_stages`` deeper stages (default: as many as the
    schedule has) is reported in ``unresolved_mass``.
    """
    J = A.stage
    A.validate(schedule)
    if abs(m) > schedule.h(J):
        raise ValueError(f"|m|={abs(m)} exceeds h_{J}={schedule.h(J)}; expand first")
    if max_extra_stages is None:
        max_extra_stages = schedule.n_towers - J
    pieces = []
    pending = list(A.levels)
    stage = J
    while True:
        h = schedule.h(stage)
        ok = []
        out = []
        for p in pending:
            t = p + m
            (ok if 0 <= t <= h else out).append(p)
        if ok:
            pieces.append((stage, tuple(sorted(p + m for p in ok))))
        pending = out
        if not pending or stage - J >= max_extra_stages or stage >= schedule.n_towers:
            break
        pending = expand_positions(schedule, pending, stage, stage + 1, cap)
        stage += 1
    return ShiftResult(
        schedule=schedule,
        input_stage=J,
        input_measure=A.measure(schedule),
        pieces=tuple(pieces),
        unresolved_mass=len(pending) * schedule.base_measure(stage),
    )


def working_stage(schedule: ConstructionSchedule, j0: int, m: int) -> int:
    """Smallest stage ``J >= j0`` with ``h_J >= |m| + h_{j0}``; the last tower if none."""
    need = abs(m) + schedule.h(j0)
    for J in range(j0, schedule.n_towers + 1):
        if schedule.h(J) >= need:
            return J
    return schedule.n_towers


def expand_set(schedule: ConstructionSchedule, A: LevelSet, J: int, cap: int | None = None) -> LevelSet:
    return LevelSet(J, tuple(expand_positions(schedule, A.levels, A.stage, J, cap)))

