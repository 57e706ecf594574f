import io
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import level_sets, small_schedules
from interval_oracle import IntervalTowers
from rank1 import algebraic_schedule, explicit_schedule, sidon_growth_schedule
from rank1.correl import (
    ToleranceUnreachable,
    averaging_norm,
    correlation,
    correlation_profile,
    correlation_series,
    spacer_drifts,
    write_csv,
)
from rank1.tower import LevelSet, expand_set, shift_levels


def test_identity_shift(sidon_sched):
    A = LevelSet(2, (1, 4, 9))
    r = correlation(sidon_sched, A, A, 0)
    assert r.lower == r.upper == A.measure(sidon_sched)


def test_hand_example(hand_sched):
    A, B = LevelSet(2, (2,)), LevelSet(2, (0,))
    r = correlation(hand_sched, B, A, 2)
    assert r.lower == r.upper == Fraction(1, 2)
    lo, und = IntervalTowers.from_schedule(hand_sched).correlation(2, [0], [2], 2)
    assert (lo, und) == (Fraction(1, 2), 0)


def test_disjoint_supports(hand_sched):
    # level 1 of tower 2 is the stage-1 spacer; E_1 expands to levels {0, 2}
    A = LevelSet(2, (1,))
    B = expand_set(hand_sched, LevelSet.base(1), 2)
    assert correlation(hand_sched, A, B, 0).upper == 0


def test_mismatched_stages(hand_sched):
    with pytest.raises(ValueError):
        correlation(hand_sched, LevelSet.base(1), LevelSet.base(2), 1)


def test_shift_too_large(hand_sched):
    with pytest.raises(ValueError):
        correlation(hand_sched, LevelSet.base(2), LevelSet.base(2), 16)


def test_tolerance_unreachable_reports_bracket():
    s = algebraic_schedule(0, (5, 7))
    # the copy of level 24 in the last column of tower 3 is pushed past the top
    A = LevelSet(2, (24,))
    with pytest.raises(ToleranceUnreachable) as ei:
        correlation(s, A, A, 1, tolerance=Fraction(0))
    r = ei.value.result
    assert r.lower == 0 and r.upper == s.base_measure(3)
    assert correlation(s, A, A, 1, tolerance=None) == r


# -- symmetry and series ---------------------------------------------------------------

@given(small_schedules(), st.data())
def test_symmetry_against_oracle(s, data):
    oracle = IntervalTowers.from_schedule(s)
    j = data.draw(st.integers(1, s.n_towers))
    M = s.h(s.n_towers) - s.h(j) - 1
    assume(M >= 0)
    A = data.draw(level_sets(s, j))
    B = data.draw(level_sets(s, j))
    m = data.draw(st.integers(0, M))
    # mu(T^m A ∩ B) = mu(A ∩ T^-m B): geometric T^-m applied to B, read off the line
    lo_f, und_f = oracle.correlation(j, A.levels, B.levels, m)
    lo_b, und_b = oracle.correlation(j, B.levels, A.levels, -m)
    if und_f == 0 and und_b == 0:
        assert lo_f == lo_b
    assert lo_f <= lo_b + und_b and lo_b <= lo_f + und_f
    r = correlation(s, B, A, -m, tolerance=None)
    assert r.lower <= lo_b + und_b and lo_b <= r.upper


@given(small_schedules(max_stages=4), st.data())
def test_series_matches_single(s, data):
    j = data.draw(st.integers(1, s.n_towers))
    M = s.h(s.n_towers) - s.h(j) - 1
    assume(M >= 0)
    A = data.draw(level_sets(s, j))
    B = data.draw(level_sets(s, j))
    lo = data.draw(st.integers(-M, M))
    hi = data.draw(st.integers(lo, M))
    stride = data.draw(st.integers(1, 5))
    series = correlation_series(s, A, B, lo, hi, stride, tolerance=None)
    assert [r.m for r in series] == list(range(lo, hi + 1, stride))
    for r in series:
        one = correlation(s, A, B, r.m, tolerance=None)
        assert (r.lower, r.upper) == (one.lower, one.upper)


def test_sidon_series_exact(sidon_sched):
    A = LevelSet.base(1)
    for r in correlation_series(sidon_sched, A, A, -2799, 2799, 7, tolerance=Fraction(0)):
        assert r.exact


def test_shift_invariance(sidon_sched):
    s = sidon_sched
    A, B = LevelSet(2, (0, 3, 20)), LevelSet(2, (1, 7))
    for k in (1, 5, 11):
        TA = shift_levels(s, A, k).resolved
        TB = shift_levels(s, B, k).resolved
        K = max(TA.stage, TB.stage)
        TA, TB = expand_set(s, TA, K), expand_set(s, TB, K)
        for m in (-40, -3, 0, 2, 60, 700):
            base, moved = correlation(s, A, B, m), correlation(s, TA, TB, m)
            assert base.exact and (moved.lower, moved.upper) == (base.lower, base.upper)


def test_profile_matches_series(sidon_sched):
    A, B = LevelSet(2, (0, 3)), LevelSet(2, (1, 7, 40))
    prof = correlation_profile(sidon_sched, A, B, 0, 3000)
    for r in correlation_series(sidon_sched, A, B, 0, 3000):
        got = prof.get(r.m)
        if got is None:
            assert r.upper == 0
        else:
            assert (got.lower, got.upper) == (r.lower, r.upper)


def test_csv_output():
    s = explicit_schedule(0, [(2, (1, 0)), (2, (5, 5))])
    out = io.StringIO()
    rows = correlation_series(s, LevelSet.base(2), LevelSet.base(2), 0, 2)
    write_csv(rows, out, bound=lambda r: Fraction(1, 3) if r.m else None)
    assert out.getvalue() == "m,lower,upper,stage_used,bound\n0,1/2,1/2,2,\n1,0/1,0/1,3,1/3\n2,0/1,0/1,3,1/3\n"


# -- averaging ------------------------------------------------------------------------

def test_spacer_drifts_example():
    s = algebraic_schedule(0, (5,))
    assert spacer_drifts(s, 1, 1) == [1, 2, -1]
    with pytest.raises(ValueError):
        spacer_drifts(sidon_growth_schedule(1, (3,)), 1, 1)


def test_averaging_single_term():
    s = algebraic_schedule(0, (5, 7, 11), s_last="height")
    A = LevelSet.base(1)
    est = averaging_norm(s, 2, 5, A)
    assert est.value_bracket == (A.measure(s), A.measure(s))


@pytest.mark.parametrize("s_last", [0, "height"])
def test_averaging_below_majorant_and_decreasing(s_last):
    s = algebraic_schedule(0, (5, 11, 23, 47), s_last=s_last)
    A = LevelSet.base(1)
    values = []
    for j in range(1, 5):
        r = s.stage(j).r
        n = r // 2
        est = averaging_norm(s, j, n, A)
        assert est.value <= est.bound
        W = r - n - 1
        assert est.value <= A.measure(s) * (2 * r + 1) ** 2 / W**2
        assert est.epsilon == Fraction(W, r)
        values.append(est.value)
    assert all(b < a for a, b in zip(values, values[1:]))


def test_averaging_range_checked():
    s = algebraic_schedule(0, (5,))
    with pytest.raises(ValueError):
        averaging_norm(s, 1, 4, LevelSet.base(1))
