"""Construction schedules for rank-one cutting and stacking.

Convention: tower ``j`` has levels ``T^0 E_j .. T^{h_j} E_j`` (``h_j + 1``
levels), ``mu(E_1) = 1`` and

    h_{j+1} + 1 = (h_j + 1) r_j + sum_i s_j(i).

Stages are indexed from 1 as in the construction; ``schedule.stage(j)``
returns the cutting/spacer data used to go from tower ``j`` to ``j + 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Any, Sequence

from . import arith


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class AlgebraicStageParams:
    r: int
    q: int
    H: int
    s_last: int = 0

    def __post_init__(self):
        if not arith.is_prime(self.r):
            raise ScheduleError(f"r={self.r} must be prime")
        if not arith.is_primitive_root(self.q, self.r):
            raise ScheduleError(f"q={self.q} is not a primitive root mod {self.r}")
        if self.H < self.r:
            raise ScheduleError(f"H={self.H} must be >= r={self.r}")
        if self.s_last < 0:
            raise ScheduleError("s_last must be non-negative")

    def rep(self, i: int) -> int:
        """Representative of q**i in {1..r-1}."""
        return pow(self.q, i, self.r)


@dataclass(frozen=True)
class StageSpec:
    r: int
    spacers: tuple[int, ...]
    algebraic: AlgebraicStageParams | None = None

    def __post_init__(self):
        object.__setattr__(self, "spacers", tuple(int(s) for s in self.spacers))
        if self.r < 2:
            raise ScheduleError(f"cutting number r={self.r} must be >= 2")
        if len(self.spacers) != self.r:
            raise ScheduleError(f"expected {self.r} spacers, got {len(self.spacers)}")
        if any(s < 0 for s in self.spacers):
            raise ScheduleError("spacer counts must be non-negative")

    def s(self, i: int) -> int:
        """1-based spacer access s(i)."""
        return self.spacers[i - 1]


def derive_heights(h1: int, stages: Sequence[StageSpec]) -> tuple[int, ...]:
    if h1 < 0:
        raise ScheduleError("h1 must be >= 0")
    hs = [h1]
    for st in stages:
        hs.append((hs[-1] + 1) * st.r + sum(st.spacers) - 1)
    return tuple(hs)


@dataclass(frozen=True)
class ConstructionSchedule:
    """A finite prefix of a rank-one construction.

    ``heights[j-1]`` is ``h_j`` for ``j = 1 .. n_towers``; the last tower has
    no stage above it, so ``T`` is undefined on its top level.
    """

    h1: int
    stages: tuple[StageSpec, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))

    @cached_property
    def heights(self) -> tuple[int, ...]:
        return derive_heights(self.h1, self.stages)

    @property
    def n_towers(self) -> int:
        """Index of the deepest tower (J_max)."""
        return len(self.stages) + 1

    def h(self, j: int) -> int:
        if not 1 <= j <= self.n_towers:
            raise IndexError(f"tower {j} outside 1..{self.n_towers}")
        return self.heights[j - 1]

    def stage(self, j: int) -> StageSpec:
        if not 1 <= j < self.n_towers:
            raise IndexError(f"stage {j} outside 1..{self.n_towers - 1}")
        return self.stages[j - 1]

    def base_measure(self, j: int) -> Fraction:
        """mu(E_j) = 1 / prod_{l<j} r_l."""
        d = 1
        for st in self.stages[: j - 1]:
            d *= st.r
        return Fraction(1, d)

    def tower_measure(self, j: int) -> Fraction:
        return (self.h(j) + 1) * self.base_measure(j)

    @cached_property
    def _offsets(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for j, st in enumerate(self.stages, start=1):
            h = self.heights[j - 1]
            o = [0]
            for c in range(1, st.r):
                o.append(o[-1] + h + 1 + st.s(c))
            out.append(tuple(o))
        return tuple(out)

    def offsets(self, j: int) -> tuple[int, ...]:
        self.stage(j)
        return self._offsets[j - 1]

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        stages = []
        for st in self.stages:
            d: dict[str, Any] = {"r": st.r, "spacers": [str(s) for s in st.spacers]}
            if st.algebraic is not None:
                a = st.algebraic
                d["algebraic"] = {"q": a.q, "H": str(a.H), "s_last": str(a.s_last)}
            stages.append(d)
        return {
            "h1": str(self.h1),
            "stages": stages,
            "heights": [str(h) for h in self.heights],
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ConstructionSchedule:
        stages = []
        for sd in d["stages"]:
            r = int(sd["r"])
            alg = None
            if "algebraic" in sd:
                a = sd["algebraic"]
                alg = AlgebraicStageParams(r=r, q=int(a["q"]), H=int(a["H"]), s_last=int(a["s_last"]))
            stages.append(StageSpec(r=r, spacers=[int(s) for s in sd["spacers"]], algebraic=alg))
        sched = cls(h1=int(d["h1"]), stages=tuple(stages), meta=d.get("meta", {}))
        if "heights" in d and [int(h) for h in d["heights"]] != list(sched.heights):
            raise ScheduleError("stored heights disagree with the height recursion")
        return sched

    @classmethod
    def from_json(cls, text: str) -> ConstructionSchedule:
        return cls.from_dict(json.loads(text))


def explicit_schedule(h1: int, stages: Sequence[tuple[int, Sequence[int]]]) -> ConstructionSchedule:
    """Schedule from literal ``(r, spacers)`` pairs."""
    specs = tuple(StageSpec(r=r, spacers=tuple(s)) for r, s in stages)
    derive_heights(h1, specs)
    return ConstructionSchedule(h1=h1, stages=specs, meta={"family": "explicit", "params": {}})


# -- algebraic spacers ---------------------------------------------------------

def algebraic_spacers(params: AlgebraicStageParams) -> StageSpec:
    """s(i) = H + {q^i} - {q^(i+1)} for i < r, s(r) = s_last."""
    p = params
    sp = [p.H + p.rep(i) - p.rep(i + 1) for i in range(1, p.r)]
    sp.append(p.s_last)
    return StageSpec(r=p.r, spacers=tuple(sp), algebraic=p)


def algebraic_schedule(
    h1: int,
    primes: Sequence[int],
    H: Sequence[int] | None = None,
    s_last: int | str = 0,
) -> ConstructionSchedule:
    """Algebraic-spacer schedule, one stage per prime.

    ``H`` defaults to ``H_j = r_j``.  ``s_last`` is either a fixed count or
    ``"height"``, meaning ``s_j(r_j) = h_j``; the latter makes every positive
    shift of a cylinder set resolve within one extra stage.
    """
    if H is not None and len(H) != len(primes):
        raise ScheduleError("H must have one entry per prime")
    stages = []
    h = h1
    for idx, r in enumerate(primes):
        q = arith.find_primitive_root(r)
        last = h if s_last == "height" else int(s_last)
        st = algebraic_spacers(AlgebraicStageParams(r=r, q=q, H=r if H is None else int(H[idx]), s_last=last))
        stages.append(st)
        h = (h + 1) * st.r + sum(st.spacers) - 1
    meta = {"family": "algebraic",
            "params": {"primes": list(primes), "H": None if H is None else [str(x) for x in H],
                       "s_last": s_last if isinstance(s_last, str) else str(s_last)}}
    return ConstructionSchedule(h1=h1, stages=tuple(stages), meta=meta)


# -- Sidon schedules -------------------------------------------------------------

def growth_spacers(h: int, r: int, growth_factor: int = 2) -> tuple[int, ...]:
    """Domination chain s(1) = g(h+1), s(i+1) = g(s(i) + h + 1)."""
    sp = [growth_factor * (h + 1)]
    while len(sp) < r:
        sp.append(growth_factor * (sp[-1] + h + 1))
    return tuple(sp)


def sidon_growth_schedule(h1: int, cuts: Sequence[int], growth_factor: int = 2) -> ConstructionSchedule:
    if growth_factor < 2:
        raise ScheduleError("growth_factor must be >= 2")
    stages = []
    h = h1
    for r in cuts:
        st = StageSpec(r=r, spacers=growth_spacers(h, r, growth_factor))
        stages.append(st)
        h = (h + 1) * r + sum(st.spacers) - 1
    meta = {"family": "sidon", "params": {"cuts": list(cuts), "growth_factor": growth_factor}}
    return ConstructionSchedule(h1=h1, stages=tuple(stages), meta=meta)


# h_{j+1} = DECAY_SCALE * h_j * r_j^2 for sidon-set decay stages
DECAY_SCALE = 11


def sidon_set_spacers(h: int, r: int) -> tuple[int, ...]:
    """Column bases at (2h+1) * sigma_c for a Sidon set sigma; next height 11 h r^2.

    Distinct column-base differences then differ by more than 2h.  The last
    spacer pads the tower so that h_{j+1} / (h_j r_j^2) is the same at every
    stage; 11 leaves room for any r since sigma_max < 4 r^2 (Bertrand).
    """
    if h < 1:
        raise ScheduleError("sidon-set spacing needs h >= 1")
    k = 2 * h + 1
    sig = arith.sidon_set(r)
    sp = [k * (sig[c + 1] - sig[c]) - h - 1 for c in range(r - 1)]
    last = DECAY_SCALE * h * r * r - k * sig[-1] - h
    if last < h:
        raise AssertionError(f"padding spacer {last} smaller than h={h}")
    sp.append(last)
    return tuple(sp)


def _next_height(h: int, r: int, spacing: str, growth_factor: int = 2) -> int:
    if spacing == "sidon-set":
        return DECAY_SCALE * h * r * r
    # growth chain s_i = (h+1)(g^(i+1) - g)/(g-1), summed in closed form
    g = growth_factor
    total = (h + 1) * (g * (g**r - 1) // (g - 1) - r) * g // (g - 1)
    return (h + 1) * r + total - 1


class DecayScheduleError(ScheduleError):
    def __init__(self, stage: int, h: int, cap: int, attained: int):
        self.stage, self.h, self.cap, self.attained = stage, h, cap, attained
        super().__init__(
            f"stage {stage}: no r <= {cap} gives psi(h_next) >= sqrt({_short(h)}); "
            f"largest attained h_next = {_short(attained)}"
        )


def _short(n: int) -> str:
    # decimal for moderate sizes, else a power-of-two magnitude
    return str(n) if n.bit_length() <= 256 else f"~2^{n.bit_length() - 1}"


def _psi_dominates(psi: str, h_next: int, h: int) -> bool:
    """Certified psi(h_next) >= sqrt(h); undecided counts as False."""
    if h_next < arith.psi_min_arg(psi):
        return False
    for prec in (128, 512, 2048):
        c = arith.compare(arith.psi_bounds(psi, h_next, prec), arith.sqrt_bounds(h, prec // 2))
        if c is not None:
            return c >= 0
    return False


def decay_rate_schedule(
    h1: int,
    psi: str = "lnln",
    C_hint: Fraction | int = 1,
    max_stages: int = 3,
    spacing: str = "sidon-set",
    r_cap: int = 10**6,
) -> ConstructionSchedule:
    """Sidon schedule with ``r_j`` the smallest cut such that psi(h_{j+1}) >= sqrt(h_j).

    ``spacing="sidon-set"`` (default) uses :func:`sidon_set_spacers`, giving
    ``h_{j+1} = 11 h_j r_j^2``, so ``mu(A)/r_j <= C sqrt(h_j/h_{j+1})`` with
    the same ``C`` at every stage.  ``spacing="growth"`` uses the factor-2
    domination chain of :func:`sidon_growth_schedule`; heights then grow
    exponentially in ``r_j`` and no stage-independent ``C`` exists.
    """
    if h1 < 2 or max_stages < 1:
        raise ScheduleError("need h1 >= 2 and max_stages >= 1")
    if psi not in arith.PSI_CATALOG:
        raise ScheduleError(f"unknown psi {psi!r}")
    if spacing not in ("sidon-set", "growth"):
        raise ScheduleError(f"unknown spacing {spacing!r}")
    stages = []
    certs = []
    h = h1
    for j in range(1, max_stages + 1):
        # h_next is increasing in r: certify the cap, then bisect for the smallest r
        if not _psi_dominates(psi, _next_height(h, r_cap, spacing), h):
            raise DecayScheduleError(j, h, r_cap, _next_height(h, r_cap, spacing))
        lo, hi = 1, r_cap  # invariant: lo fails (or is < 2), hi succeeds
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if _psi_dominates(psi, _next_height(h, mid, spacing), h):
                hi = mid
            else:
                lo = mid
        r = max(hi, 2)
        sp = sidon_set_spacers(h, r) if spacing == "sidon-set" else growth_spacers(h, r)
        st = StageSpec(r=r, spacers=sp)
        h_next = (h + 1) * r + sum(sp) - 1
        assert h_next == _next_height(h, r, spacing)
        stages.append(st)
        certs.append({"stage": j, "r": r, "h": str(h), "h_next": str(h_next)})
        h = h_next
    meta = {"family": "decay",
            "params": {"psi": psi, "C_hint": arith.fmt_fraction(Fraction(C_hint)),
                       "spacing": spacing, "max_stages": max_stages, "certificates": certs}}
    return ConstructionSchedule(h1=h1, stages=tuple(stages), meta=meta)


def with_stage(schedule: ConstructionSchedule, j: int, stage: StageSpec) -> ConstructionSchedule:
    """Copy of ``schedule`` with stage ``j`` replaced (used for negative controls)."""
    stages = list(schedule.stages)
    stages[j - 1] = stage
    return ConstructionSchedule(h1=schedule.h1, stages=tuple(stages), meta=dict(schedule.meta))
