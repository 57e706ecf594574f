"""Witness-bearing verifiers for the finitely checkable claims about a schedule.

Every report carries a verdict in {"pass", "fail", "indeterminate"}; a fail
always carries at least one witness that can be replayed through the public
functions of :mod:`rank1.schedule`, :mod:`rank1.tower` and :mod:`rank1.correl`.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import arith, correl
from .correl import CorrelationResult
from .schedule import ConstructionSchedule
from .tower import LevelSet

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


@dataclass
class VerificationReport:
    property: str
    stage_range: tuple[int, ...]
    verdict: str = PASS
    witnesses: list[dict] = field(default_factory=list)
    stats: dict = field(default_factory=dict)

    def fail(self, **witness) -> None:
        self.verdict = FAIL
        self.witnesses.append(witness)

    def undecided(self, **witness) -> None:
        if self.verdict != FAIL:
            self.verdict = INDETERMINATE
        self.witnesses.append(dict(witness, indeterminate=True))

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "stage_range": list(self.stage_range),
            "verdict": self.verdict,
            "witnesses": [_jsonable(w) for w in self.witnesses],
            "stats": _jsonable(self.stats),
        }


def _jsonable(x):
    if isinstance(x, Fraction):
        return arith.fmt_fraction(x)
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return str(x) if abs(x) >= 2**53 else x
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def merge_verdicts(reports: Iterable[VerificationReport]) -> str:
    verdicts = {r.verdict for r in reports}
    if FAIL in verdicts:
        return FAIL
    if INDETERMINATE in verdicts:
        return INDETERMINATE
    return PASS


# -- algebraic spacers --------------------------------------------------------------

def verify_ornstein(schedule: ConstructionSchedule, j: int) -> VerificationReport:
    """-r_j <= S_j(i, n) <= r_j for every n < r_j and i <= r_j - n - 1."""
    r = schedule.stage(j).r
    rep = VerificationReport("ornstein", (j,))
    checks = 0
    for n in range(1, r - 1):
        for i, S in enumerate(correl.spacer_drifts(schedule, j, n), start=1):
            checks += 1
            if not -r <= S <= r:
                rep.fail(j=j, i=i, n=n, S=S, r=r)
    rep.stats["checks"] = checks
    return rep


def verify_injectivity(schedule: ConstructionSchedule, j: int) -> VerificationReport:
    """i -> S_j(i, n) is injective on {1 .. r_j - n - 1} for every n."""
    r = schedule.stage(j).r
    rep = VerificationReport("injectivity", (j,))
    checks = 0
    for n in range(1, r - 1):
        seen: dict[int, int] = {}
        for i, S in enumerate(correl.spacer_drifts(schedule, j, n), start=1):
            checks += 1
            if S in seen:
                rep.fail(j=j, n=n, i=seen[S], i2=i, S=S)
            else:
                seen[S] = i
    rep.stats["checks"] = checks
    return rep


# -- Sidon single-column property -----------------------------------------------------

def _offset_differences(schedule: ConstructionSchedule, j: int) -> list[tuple[int, int, int]]:
    o = schedule.offsets(j)
    return sorted((o[b] - o[a], a + 1, b + 1) for a in range(len(o)) for b in range(a + 1, len(o)))


def aligned_pairs(schedule: ConstructionSchedule, j: int, m: int) -> list[tuple[int, int]]:
    """Ordered column pairs (c, c') of stage j with |o(c') - o(c) - m| <= h_j."""
    h = schedule.h(j)
    o = schedule.offsets(j)
    return [(a + 1, b + 1) for a in range(len(o)) for b in range(len(o)) if abs(o[b] - o[a] - m) <= h]


def verify_sidon(schedule: ConstructionSchedule, j: int, budget: int = 10**6) -> VerificationReport:
    """At most one aligned column pair for every m in (h_j, h_{j+1}].

    Ranges up to ``budget`` are swept one m at a time; longer ranges are
    handled by an event sweep over the intervals [d - h_j, d + h_j] of the
    offset differences d, which still covers every m.
    """
    h, H = schedule.h(j), schedule.h(j + 1)
    diffs = _offset_differences(schedule, j)
    ds = [d for d, _, _ in diffs]
    rep = VerificationReport("sidon", (j,))
    rep.stats.update(m_checked=H - h, pairs=len(diffs))
    if H - h <= budget:
        rep.stats["mode"] = "per-m"
        for m in range(h + 1, H + 1):
            lo, hi = bisect_left(ds, m - h), bisect_right(ds, m + h)
            if hi - lo >= 2:
                rep.fail(j=j, m=m, pairs=[list(diffs[k][1:]) for k in range(lo, hi)])
                break
        return rep
    rep.stats["mode"] = "sweep"
    events = []
    for d, a, b in diffs:
        lo, hi = max(d - h, h + 1), min(d + h, H)
        if lo <= hi:
            events.append((lo, 1, (a, b)))
            events.append((hi + 1, -1, (a, b)))
    events.sort(key=lambda e: (e[0], e[1]))
    active: set = set()
    for pos, delta, pair in events:
        if delta < 0:
            active.discard(pair)
        else:
            active.add(pair)
            if len(active) >= 2:
                rep.fail(j=j, m=pos, pairs=sorted(list(p) for p in active))
                break
    return rep


# -- decay certificate ------------------------------------------------------------------

def decay_rhs_bounds(C: Fraction, psi: str, m: int, prec: int = 128) -> tuple[Fraction, Fraction]:
    """Enclosure of C * psi(m) / sqrt(m)."""
    plo, phi = arith.psi_bounds(psi, m, prec)
    slo, shi = arith.sqrt_bounds(m, prec // 2)
    return C * plo / shi, C * phi / slo


def _stage_of(schedule: ConstructionSchedule, m: int) -> int | None:
    for j in range(1, schedule.n_towers):
        if schedule.h(j) < m <= schedule.h(j + 1):
            return j
    return None


def decay_samples(schedule: ConstructionSchedule, j0: int, rng, per_stage: int = 100) -> list[int]:
    """Every column-offset difference in (h_j, h_{j+1}] plus random shifts, for j0 <= j < J_max - 1."""
    ms: set[int] = set()
    for j in range(j0, schedule.n_towers - 1):
        h, H = schedule.h(j), schedule.h(j + 1)
        ms.update(d for d, _, _ in _offset_differences(schedule, j) if h < d <= H)
        ms.update(rng.randint(h + 1, H) for _ in range(per_stage))
    return sorted(ms)


def decay_constant(schedule: ConstructionSchedule, A: LevelSet, j: int = 1) -> Fraction:
    """Certified upper bound for mu(A) sqrt(h_{j+1}/h_j) / r_j.

    With this C, mu(A)/r_j <= C sqrt(h_j)/sqrt(h_{j+1}) at stage j.
    """
    _, root = arith.sqrt_bounds(Fraction(schedule.h(j + 1), schedule.h(j)))
    c = A.measure(schedule) * root / schedule.stage(j).r
    # round up to 1e-6 for readable reports
    return Fraction(-(-c.numerator * 10**6 // c.denominator), 10**6)


def verify_decay(
    schedule: ConstructionSchedule,
    A: LevelSet,
    psi: str,
    C: Fraction,
    m_samples: Sequence[int],
) -> VerificationReport:
    """mu(A ∩ T^m A) <= C psi(m) / sqrt(m) on the sampled shifts, three-valued.

    Also checks psi(h_{j+1})/sqrt(h_{j+1}) <= psi(m)/sqrt(m) for the stage
    containing each m; outcomes of that premise go to ``stats["premise"]``.
    """
    ms = sorted(set(m_samples))
    stages = sorted({s for m in ms if (s := _stage_of(schedule, m)) is not None})
    rep = VerificationReport("decay", tuple(stages))
    premise = Counter()
    results = correl.correlation_series(schedule, A, A, 0, 0, ms=ms, tolerance=None)
    for r in results:
        for prec in (128, 512):
            lo, hi = decay_rhs_bounds(C, psi, r.m, prec)
            if r.upper <= lo or r.lower > hi:
                break
        if r.upper <= lo:
            pass
        elif r.lower > hi:
            rep.fail(m=r.m, lower=r.lower, upper=r.upper, rhs_lo=lo, rhs_hi=hi)
        else:
            rep.undecided(m=r.m, lower=r.lower, upper=r.upper, rhs_lo=lo, rhs_hi=hi)
        j = _stage_of(schedule, r.m)
        if j is not None:
            H = schedule.h(j + 1)
            if r.m == H:
                c = 0
            else:
                c = arith.compare(decay_rhs_bounds(Fraction(1), psi, H, 256), decay_rhs_bounds(Fraction(1), psi, r.m, 256))
            premise[{-1: "pass", 0: "pass", 1: "fail", None: "indeterminate"}[c]] += 1
    rep.stats.update(samples=len(ms), C=C, psi=psi, premise=dict(premise))
    return rep


# -- joinings ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JoiningCoefficients:
    """a_j^k for the off-diagonal joining nu = Delta^l, Delta^l(A x B) = mu(T^l A ∩ B).

    ``a`` maps k to the exact lower bound; ``upper`` holds the k whose value
    carries unresolved mass.  Zero coefficients are omitted.
    """

    j: int
    l: int
    a: dict[int, Fraction]
    upper: dict[int, Fraction]

    @property
    def exact(self) -> bool:
        return all(self.upper[k] == self.a.get(k, 0) for k in self.upper)

    def bracket(self, k: int) -> tuple[Fraction, Fraction]:
        lo = self.a.get(k, Fraction(0))
        return lo, self.upper.get(k, lo)

    def total(self) -> tuple[Fraction, Fraction]:
        lo = sum(self.a.values(), Fraction(0))
        return lo, lo + sum(u - self.a.get(k, 0) for k, u in self.upper.items())


def joining_coefficients(schedule: ConstructionSchedule, j: int, l: int) -> JoiningCoefficients:
    """a_j^k = Delta^l(E_j x T^k E_j)/mu(E_j) for k >= 0, Delta^l(T^{-k}E_j x E_j)/mu(E_j) for k < 0.

    Both reduce to c(l - k) with c(x) = mu(T^x E_j ∩ E_j)/mu(E_j) = c(-x).
    """
    h = schedule.h(j)
    E = LevelSet.base(j)
    muE = schedule.base_measure(j)
    x_lo = max(0, abs(l) - h) if abs(l) > h else 0
    profile = correl.correlation_profile(schedule, E, E, x_lo, abs(l) + h)
    a: dict[int, Fraction] = {}
    upper: dict[int, Fraction] = {}
    for k in range(-h, h + 1):
        r = profile.get(abs(l - k))
        if r is None:
            continue
        if r.lower:
            a[k] = r.lower / muE
        if not r.exact:
            upper[k] = r.upper / muE
    return JoiningCoefficients(j, l, a, upper)


def verify_joining_mass(schedule: ConstructionSchedule, j: int, l: int) -> VerificationReport:
    """sum_k a_j^k <= 2, and a_j^k = [k == 0] when l == 0."""
    co = joining_coefficients(schedule, j, l)
    rep = VerificationReport("joining_mass", (j,))
    lo, hi = co.total()
    rep.stats.update(l=l, total_lower=lo, total_upper=hi, nonzero=len(co.a))
    if lo > 2:
        rep.fail(j=j, l=l, total_lower=lo)
    elif hi > 2:
        rep.undecided(j=j, l=l, total_upper=hi)
    if l == 0 and (co.a != {0: 1} or not co.exact):
        rep.fail(j=j, l=0, coefficients={k: v for k, v in co.a.items()})
    return rep


def block_counts(A: LevelSet, B: LevelSet) -> Counter[int]:
    """N(k, A, B): number of level pairs (a, b), a in A, b in B, with b - a = k."""
    return Counter(b - a for a in A.levels for b in B.levels)


def verify_lemma_decomposition(
    schedule: ConstructionSchedule, j: int, l: int, A: LevelSet, B: LevelSet
) -> VerificationReport:
    """Delta^l(A x B) = mu(E_j) sum_k a_j^k N(k, A, B) for stage-j cylinders A, B."""
    if A.stage != j or B.stage != j:
        raise ValueError("A and B must be stage-j level sets")
    rep = VerificationReport("lemma_decomposition", (j,))
    lhs = correl.correlation(schedule, A, B, l, tolerance=None)
    co = joining_coefficients(schedule, j, l)
    muE = schedule.base_measure(j)
    N = block_counts(A, B)
    rlo = muE * sum((n * co.bracket(k)[0] for k, n in N.items()), Fraction(0))
    rhi = muE * sum((n * co.bracket(k)[1] for k, n in N.items()), Fraction(0))
    rep.stats.update(l=l, lhs=(lhs.lower, lhs.upper), rhs=(rlo, rhi), blocks=sum(N.values()))
    if lhs.exact and rlo == rhi:
        if lhs.lower != rlo:
            rep.fail(j=j, l=l, A=list(A.levels), B=list(B.levels), lhs=lhs.lower, rhs=rlo)
    elif lhs.upper < rlo or rhi < lhs.lower:
        rep.fail(j=j, l=l, A=list(A.levels), B=list(B.levels), lhs=(lhs.lower, lhs.upper), rhs=(rlo, rhi))
    else:
        rep.undecided(j=j, l=l, lhs=(lhs.lower, lhs.upper), rhs=(rlo, rhi))
    return rep


def correlation_bound_report(
    results: Sequence[CorrelationResult], bound, name: str, stages: tuple[int, ...]
) -> VerificationReport:
    """Generic check ``upper <= bound(m)`` over a correlation series."""
    rep = VerificationReport(name, stages)
    for r in results:
        b = bound(r.m)
        if b is not None and r.upper > b:
            rep.fail(m=r.m, upper=r.upper, bound=b)
    rep.stats["checks"] = len(results)
    return rep


def sidon_bound(schedule: ConstructionSchedule, A: LevelSet):
    """m -> mu(A)/r_j for m in (h_j, h_{j+1}], j > A.stage; None elsewhere."""
    muA = A.measure(schedule)

    def bound(m: int) -> Fraction | None:
        j = _stage_of(schedule, abs(m))
        if j is None or j <= A.stage:
            return None
        return muA / schedule.stage(j).r

    return bound
