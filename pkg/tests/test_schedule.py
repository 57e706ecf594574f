from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import small_schedules
from rank1 import arith
from rank1.schedule import (
    AlgebraicStageParams,
    ConstructionSchedule,
    DecayScheduleError,
    ScheduleError,
    StageSpec,
    algebraic_schedule,
    algebraic_spacers,
    decay_rate_schedule,
    derive_heights,
    explicit_schedule,
    growth_spacers,
    sidon_growth_schedule,
    sidon_set_spacers,
)


def _recursion_holds(s: ConstructionSchedule) -> bool:
    hs = s.heights
    return all(hs[j + 1] + 1 == (hs[j] + 1) * st.r + sum(st.spacers) for j, st in enumerate(s.stages))


# -- heights -------------------------------------------------------------------------

def test_derive_heights_examples():
    assert derive_heights(3, [StageSpec(2, (1, 2))]) == (3, 10)
    assert derive_heights(0, [StageSpec(2, (0, 0))]) == (0, 1)
    assert derive_heights(5, []) == (5,)


@given(small_schedules(max_stages=4))
def test_height_recursion_explicit(s):
    assert _recursion_holds(s)
    assert s.heights[0] == s.h1


def test_stage_spec_validation():
    with pytest.raises(ScheduleError):
        StageSpec(1, (0,))
    with pytest.raises(ScheduleError):
        StageSpec(2, (0,))
    with pytest.raises(ScheduleError):
        StageSpec(2, (0, -1))


# -- algebraic spacers ---------------------------------------------------------------

def test_algebraic_spacers_examples():
    # reps of 2^1..2^5 mod 5 are 2, 4, 3, 1, 2: one spacer per column, s(5) = s_last
    assert algebraic_spacers(AlgebraicStageParams(r=5, q=2, H=5, s_last=0)).spacers == (3, 6, 7, 4, 0)
    # reps of 2^1..2^3 mod 3 are 2, 1, 2
    assert algebraic_spacers(AlgebraicStageParams(r=3, q=2, H=3, s_last=1)).spacers == (4, 2, 1)


def test_algebraic_params_validation():
    with pytest.raises(ScheduleError):
        AlgebraicStageParams(r=6, q=5, H=6)
    with pytest.raises(ScheduleError):
        AlgebraicStageParams(r=7, q=2, H=7)  # 2 has order 3 mod 7
    with pytest.raises(ScheduleError):
        AlgebraicStageParams(r=7, q=3, H=6)


@pytest.mark.parametrize("r", [p for p in range(3, 200) if arith.is_prime(p)])
def test_telescoping(r):
    q = arith.find_primitive_root(r)
    for H in (r, r + 3, 5 * r):
        st = algebraic_spacers(AlgebraicStageParams(r=r, q=q, H=H, s_last=7))
        assert sum(st.spacers[:-1]) == (r - 1) * H
        assert min(st.spacers[:-1]) >= 2


def test_algebraic_schedule_heights():
    s = algebraic_schedule(0, (5, 7))
    assert s.heights == (0, 24, 216)
    assert s.stage(1).spacers == (3, 6, 7, 4, 0)
    assert _recursion_holds(s)
    t = algebraic_schedule(0, (5, 7, 11), s_last="height")
    assert [t.stage(j).spacers[-1] for j in (1, 2, 3)] == [t.h(1), t.h(2), t.h(3)]


# -- Sidon schedules -----------------------------------------------------------------

def test_growth_example():
    s = sidon_growth_schedule(1, (2,), growth_factor=2)
    assert s.stage(1).spacers == (4, 12)


@given(st.integers(0, 50), st.lists(st.integers(2, 6), min_size=1, max_size=4), st.integers(2, 4))
def test_growth_domination_chain(h1, cuts, g):
    s = sidon_growth_schedule(h1, cuts, g)
    assert _recursion_holds(s)
    for j, stg in enumerate(s.stages, start=1):
        h = s.h(j)
        assert stg.s(1) >= g * (h + 1)
        for i in range(1, stg.r):
            assert stg.s(i + 1) >= g * (stg.s(i) + h + 1)


@given(st.integers(0, 50), st.lists(st.integers(2, 6), min_size=1, max_size=4))
def test_sidon_total_measure_doubles(h1, cuts):
    s = sidon_growth_schedule(h1, cuts)
    for j in range(1, s.n_towers):
        assert s.tower_measure(j + 1) >= 2 * s.tower_measure(j)


def test_algebraic_measure_grows():
    s = algebraic_schedule(0, (5, 7, 11, 13))
    ms = [s.tower_measure(j) for j in range(1, s.n_towers + 1)]
    assert all(b > a for a, b in zip(ms, ms[1:]))
    # with H_j = r_j the added spacer mass per stage is summable
    assert ms[-1] < 7


@given(st.integers(1, 10**6), st.integers(2, 200))
def test_sidon_set_spacers_height(h, r):
    sp = sidon_set_spacers(h, r)
    assert len(sp) == r and min(sp) >= 0 and sp[-1] >= h
    assert (h + 1) * r + sum(sp) - 1 == 11 * h * r * r


# -- decay schedules -----------------------------------------------------------------

def test_decay_sqrt_stub_picks_two():
    s = decay_rate_schedule(2, psi="sqrt", max_stages=3)
    assert [stg.r for stg in s.stages] == [2, 2, 2]
    assert _recursion_holds(s)


def test_decay_lnln_threshold_growth_spacing():
    s = decay_rate_schedule(16, psi="lnln", max_stages=1, spacing="growth")
    h2 = s.h(2)
    with mpmath.workdps(60):
        threshold = mpmath.exp(mpmath.exp(4))
        assert mpmath.mpf(h2) > threshold
        assert mpmath.log(mpmath.log(h2)) >= 4
    assert h2 > 5 * 10**23
    r = s.stage(1).r
    # minimality: one fewer column misses the threshold
    smaller = sidon_growth_schedule(16, (r - 1,))
    with mpmath.workdps(60):
        assert mpmath.log(mpmath.log(smaller.h(2))) < 4
    cert = s.meta["params"]["certificates"][0]
    assert cert["h"] == "16" and cert["h_next"] == str(h2)


def test_decay_lnln_sidon_set_exceeds_cap():
    with pytest.raises(DecayScheduleError) as ei:
        decay_rate_schedule(16, psi="lnln", max_stages=1)
    assert ei.value.cap == 10**6 and ei.value.h == 16


def test_decay_ln_two_stages():
    s = decay_rate_schedule(2, psi="ln", max_stages=2)
    assert s.heights == (2, 88, 15488)
    assert _recursion_holds(s)
    for j in range(1, 3):
        h, H = s.h(j), s.h(j + 1)
        assert arith.compare(arith.psi_bounds("ln", H), arith.sqrt_bounds(h)) == 1
        # minimality of r_j
        r = s.stage(j).r
        if r > 2:
            assert arith.compare(arith.psi_bounds("ln", 11 * h * (r - 1) ** 2), arith.sqrt_bounds(h)) == -1


def test_decay_ln_third_stage_exceeds_cap():
    # ln(h_4) >= sqrt(15488) needs h_4 > e^124, far beyond 11 h r^2 with r <= 10^6
    with pytest.raises(DecayScheduleError) as ei:
        decay_rate_schedule(2, psi="ln", max_stages=3)
    assert ei.value.stage == 3 and ei.value.h == 15488


def test_decay_rejects_small_h1():
    with pytest.raises(ScheduleError):
        decay_rate_schedule(1)


# -- serialization -------------------------------------------------------------------

@given(small_schedules(max_stages=4))
def test_json_round_trip(s):
    t = ConstructionSchedule.from_json(s.to_json())
    assert t.heights == s.heights
    assert t.stages == s.stages
    assert t.to_json() == s.to_json()


def test_json_round_trip_algebraic_and_big():
    for s in (algebraic_schedule(0, (5, 11, 23)), decay_rate_schedule(16, psi="lnln", max_stages=1, spacing="growth")):
        t = ConstructionSchedule.from_json(s.to_json())
        assert t.heights == s.heights and t.stages == s.stages


def test_json_rejects_wrong_heights():
    d = explicit_schedule(0, [(2, (1, 0))]).to_dict()
    d["heights"] = ["0", "3"]
    with pytest.raises(ScheduleError):
        ConstructionSchedule.from_dict(d)


def test_big_integers_are_strings():
    s = decay_rate_schedule(16, psi="lnln", max_stages=1, spacing="growth")
    d = s.to_dict()
    assert all(isinstance(h, str) for h in d["heights"])
    assert Fraction(1) == s.base_measure(1)
