from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bwlab import BlockStep, DivergentWeight, Lebesgue, LogStep, ParameterError, RapidV, Standard, moment, shift
from bwlab import classdiag as D
from bwlab.construct import t7_radius
from bwlab.profiles import ProfileKind, RatioProfile

from oracles import quad_pieces

GRID = D.default_grid()
IN, OUT, UNSURE = D.Verdict.EVIDENCE_IN, D.Verdict.EVIDENCE_OUT, D.Verdict.INCONCLUSIVE


def _const(values, target):
    v = np.asarray(values)
    assert v.max() / v.min() - 1.0 < 1e-9
    np.testing.assert_allclose(v, target, rtol=1e-9)


@pytest.mark.parametrize("alpha", [-0.5, 0.0, 1.0, 2.5])
def test_standard_profiles_are_constant(alpha):
    w = Standard(alpha)
    _const(D.dhat_profile(w, 2.0, GRID).values, 2.0 ** (alpha + 1))
    _const(D.dcheck_profile(w, 4.0, GRID).values, 4.0 ** (alpha + 1))
    _const(D.tail_comparison(w, GRID).values, alpha + 1)
    _const(D.regularity_profile(w, GRID).values, alpha + 1)
    xs = np.geomspace(0.1, 1e6, 30)
    got = D.moment_condition_profile(w, 1.0, xs).values
    np.testing.assert_allclose(got, xs * (alpha + 1) / (xs + alpha + 2), rtol=1e-8)


def test_lebesgue_examples():
    _const(D.dhat_profile(Lebesgue(), 2.0, GRID).values, 2.0)
    _const(D.dcheck_profile(Lebesgue(), 2.0, GRID).values, 2.0)
    xs = np.array([0.5, 1.0, 7.0, 100.0])
    np.testing.assert_allclose(D.moment_condition_profile(Lebesgue(), 1.0, xs).values, xs / (xs + 2), rtol=1e-10)


@pytest.mark.parametrize("x", [0.5, 3.0, 40.0])
def test_moment_condition_against_quadrature(x):
    # x * int r^x (1-r) v_3 dr / int r^x v_3 dr, in the level variable
    ld = lambda lam: (1.0 + lam) ** -3 * (-math.expm1(-lam)) ** x
    edges = [0.0, 1.0, 4.0, 16.0, 64.0, 400.0, 5000.0]
    num = quad_pieces(lambda lam: ld(lam) * math.exp(-lam), edges)
    den = quad_pieces(ld, edges) + 0.5 / 5001.0**2
    got = D.moment_condition_profile(RapidV(3.0), 1.0, [x]).values[0]
    assert got == pytest.approx(x * num / den, rel=1e-8)


@pytest.mark.parametrize("w", [Lebesgue(), Standard(1.5), RapidV(3.0), LogStep(), BlockStep()], ids=repr)
def test_dhat_and_dcheck_share_values(w):
    grid = D.default_grid(w)
    a = D.dhat_profile(w, 4.0, grid)
    b = D.dcheck_profile(w, 4.0, grid)
    np.testing.assert_array_equal(a.values, b.values)
    assert a.kind is ProfileKind.DHAT_RATIO and b.kind is ProfileKind.DCHECK_RATIO


def test_rapidv_closed_forms():
    big_l = 1.0 + GRID
    np.testing.assert_allclose(
        D.dcheck_profile(RapidV(3.0), 2.0, GRID).values, ((big_l + math.log(2)) / big_l) ** 2, rtol=1e-12
    )
    tc = D.tail_comparison(RapidV(3.0), GRID)
    np.testing.assert_allclose(tc.values, 1.0 / big_l, rtol=1e-12)
    assert tc.summary.sup == pytest.approx(1.0 / (1.0 + GRID[0]))
    np.testing.assert_allclose(D.regularity_profile(RapidV(3.0), GRID).values, 2.0 / big_l, rtol=1e-12)


def test_blockstep_regularity_vanishes_on_gaps():
    gaps = [0.5 * (t7_radius(2.0 * n + 2) + t7_radius(2.0 * n + 3)) for n in range(1, 6)]
    assert np.all(D.regularity_profile(BlockStep(), gaps).values == 0.0)


def test_logstep_dhat_at_spikes_matches_witness():
    from bwlab.construct import t3_witness

    lv = np.array([4.0, 16.0, 256.0])
    got = D.dhat_profile(LogStep(), math.e, lv).values
    want = [t3_witness(j)[1] for j in (1, 2, 3)]
    np.testing.assert_allclose(got, want, rtol=1e-10)
    assert got[0] < got[1] < got[2]


def test_logstep_tail_comparison_is_stable():
    w = LogStep()
    s60 = D.tail_comparison(w, D.default_grid(w, hi=60.0)).summary.sup
    s120 = D.tail_comparison(w, D.default_grid(w, hi=120.0)).summary.sup
    assert math.isfinite(s60) and abs(s120 - s60) < 0.01 * s60


def test_default_grids_are_nested():
    w = LogStep()
    small, big = D.default_grid(w, hi=60.0), D.default_grid(w, hi=120.0)
    assert np.all(np.isin(small, big))
    assert small.size >= 256 and np.all(np.diff(big) > 0)


def test_errors():
    with pytest.raises(DivergentWeight):
        D.tail_comparison(RapidV(2.0), GRID)
    for beta in (0.0, -1.0):
        with pytest.raises(ParameterError):
            D.moment_condition_profile(Lebesgue(), beta, [1.0, 2.0])
    with pytest.raises(ParameterError):
        D.dhat_profile(Lebesgue(), 2.0, [3.0, 1.0])


# -- verdicts ------------------------------------------------------------------------


def _verdicts(w):
    return (
        D.dhat_verdict(w).verdict,
        D.dcheck_verdict(w).verdict,
        D.regularity_verdict(w).verdict,
        D.tail_comparison_verdict(w).verdict,
        D.moment_condition_verdict(w).verdict,
    )


@pytest.mark.parametrize(
    "w, expected",
    [
        (Lebesgue(), (IN, IN, IN, IN, IN)),
        (Standard(0.0), (IN, IN, IN, IN, IN)),
        (Standard(3.0), (IN, IN, IN, IN, IN)),
        (RapidV(3.0), (IN, OUT, OUT, IN, IN)),
        # the moment ratio rises only like log log log log x; see the verdict note
        (LogStep(), (OUT, OUT, OUT, IN, UNSURE)),
        (shift(LogStep(), 1.0), (OUT, IN, OUT, OUT, OUT)),
    ],
    ids=["lebesgue", "standard0", "standard3", "rapidv3", "logstep", "shifted-logstep"],
)
def test_verdict_table(w, expected):
    assert _verdicts(w) == expected


def test_logstep_dhat_witness_escapes():
    v = D.dhat_verdict(LogStep())
    assert v.verdict is OUT
    ratios = [r for _, r in v.witness]
    assert len(ratios) >= 3
    assert all(b >= 1.25 * a for a, b in zip(ratios, ratios[1:]))


def test_logstep_moment_ratio_rises_at_spikes():
    w = LogStep()
    peaks = []
    for n in (4.0, 16.0, 256.0):
        xs = np.geomspace(0.5, 8.0, 9) * math.exp(n + 1.0)
        peaks.append(D.moment_condition_profile(w, 1.0, xs).summary.sup)
    assert peaks[0] < peaks[1] < peaks[2]
    assert "still rising" in D.moment_condition_verdict(w).note


def test_regular_implies_doubling_both_ways():
    for w in (Lebesgue(), Standard(0.5), Standard(4.0), RapidV(3.0), LogStep(), BlockStep()):
        if D.regularity_verdict(w).verdict is IN:
            assert D.dhat_verdict(w).verdict is IN
            assert D.dcheck_verdict(w).verdict is IN


def test_out_verdict_needs_witness():
    with pytest.raises(ParameterError):
        D.ClassVerdict(OUT, None, "no witness")
    with pytest.raises(ParameterError):
        D.ClassVerdict(OUT, ((1.0, 2.0), (2.0, 3.0)), "too short")
    D.ClassVerdict(OUT, ((1.0, 2.0), (2.0, 3.0), (4.0, 4.0)), "ok")


# -- profile container ----------------------------------------------------------------


@given(arrays(float, st.integers(1, 40), elements=st.floats(1e-6, 1e6)))
def test_profile_summary_brackets_values(vals):
    grid = np.arange(vals.size, dtype=float)
    prof = RatioProfile(grid, vals, ProfileKind.TAIL_COMPARISON)
    s = prof.summary
    assert s.sup >= vals.max() and s.inf <= vals.min()
    assert math.isfinite(s.tail_trend)
    assert prof.rows()[0] == (0.0, float(vals[0]))


def test_profile_is_read_only_and_validated():
    prof = RatioProfile([0.0, 1.0], [1.0, 2.0], ProfileKind.REGULARITY)
    with pytest.raises(ValueError):
        prof.values[0] = 3.0
    with pytest.raises(ParameterError):
        RatioProfile([1.0, 1.0], [1.0, 2.0], ProfileKind.REGULARITY)
    with pytest.raises(ParameterError):
        RatioProfile([0.0, 1.0], [1.0], ProfileKind.REGULARITY)


def test_power_law_tail_trend():
    grid = np.geomspace(1.0, 100.0, 50)
    prof = RatioProfile(grid, (1.0 + grid) ** -2.0, ProfileKind.REGULARITY)
    assert prof.summary.tail_trend == pytest.approx(-2.0, rel=1e-9)


def test_moment_of_shift_used_by_profile():
    w = LogStep()
    x = 5.0
    got = D.moment_condition_profile(w, 1.0, [x]).values[0]
    assert got == pytest.approx(x * moment(shift(w, 1.0), x) / moment(w, x), rel=1e-14)
