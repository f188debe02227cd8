from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import beta as beta_fn
from scipy.special import ellipkm1

from bwlab import Divergent, Lebesgue, LogStep, ParameterError, RapidV, Standard, moment, tail_hat, tilde_hat
from bwlab import means as M
from bwlab.levels import radius

from oracles import c_p_gamma

LEVELS = np.array([0.0, 0.01, 0.3, 1.0, 2.5, 7.0, 15.0, 30.0])


# -- test functions ---------------------------------------------------------------------


FUNCS = [
    M.Monomial(0),
    M.Monomial(3),
    M.HLExtremal(1),
    M.HLExtremal(2),
    M.HLExtremal(3),
    M.Taylor((1.0, 2.0 - 1.0j, 0.0, 0.5j)),
    M.Dilate(M.HLExtremal(1), 0.9),
    M.Dilate(M.Taylor((0.0, 1.0, 1.0)), 0.5),
]


def _points(seed=1, n=100):
    rng = np.random.default_rng(seed)
    rad = 0.95 * np.sqrt(rng.uniform(0, 1, n))
    return rad * np.exp(1j * rng.uniform(-math.pi, math.pi, n))


@pytest.mark.parametrize("f", FUNCS, ids=repr)
def test_derivative_matches_finite_differences(f):
    z = _points()
    h = 1e-6
    fd = (f.value(z + h) - f.value(z - h)) / (2 * h)
    np.testing.assert_allclose(f.derivative(z), fd, rtol=1e-6, atol=1e-6)


def test_values_match_direct_formulas():
    z = _points(2)
    np.testing.assert_allclose(M.HLExtremal(2).value(z), 1j / (1 - z) ** 2, rtol=1e-13)
    np.testing.assert_allclose(M.Monomial(5).value(z), z**5, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(M.Taylor((1, 2)).real_part(z), np.real(1 + 2 * z), rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(M.Dilate(M.HLExtremal(1), 0.5).value(z), 1 / (1 - 0.5 * z), rtol=1e-13)


@pytest.mark.parametrize("k", range(1, 9))
def test_extremal_prefactor_exact(k):
    assert M.HLExtremal(k).at_zero() == [1, 1j, -1, -1j][(k - 1) % 4]


@pytest.mark.parametrize(
    "make", [lambda: M.Monomial(-1), lambda: M.HLExtremal(0), lambda: M.Taylor(()), lambda: M.Dilate(M.Monomial(1), 1.0)]
)
def test_function_validation(make):
    with pytest.raises(ParameterError):
        make()


# -- integral means -------------------------------------------------------------------------------


@pytest.mark.parametrize("n", [0, 1, 7, 40])
@pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 3.5, math.inf])
def test_monomial_means(n, p):
    got = [M.mp_mean(M.Monomial(n), "f", p, lam) for lam in LEVELS]
    np.testing.assert_allclose(got, radius(LEVELS) ** n, rtol=1e-12)


def test_extremal_means():
    f = M.HLExtremal(1)
    delta = np.exp(-LEVELS)
    one_minus_r2 = delta * (2.0 - delta)
    np.testing.assert_allclose([M.mp_mean(f, "f", 2.0, x) for x in LEVELS], one_minus_r2**-0.5, rtol=1e-10)
    np.testing.assert_allclose([M.mp_mean(f, "re", 1.0, x) for x in LEVELS], 1.0, rtol=1e-10)
    # M_1 of 1/(1 - z) is the complete elliptic integral (2/pi) K(r)
    want = 2.0 / math.pi * ellipkm1(one_minus_r2)
    np.testing.assert_allclose([M.mp_mean(f, "f", 1.0, x) for x in LEVELS], want, rtol=1e-10)
    np.testing.assert_allclose([M.mp_mean(f, "f", math.inf, x) for x in LEVELS], np.exp(LEVELS), rtol=1e-10)


@pytest.mark.parametrize("r", [0.3, 0.9, 0.999])
def test_real_part_mean_value_by_quadrature(r):
    u = lambda t: (1 - r * math.cos(t)) / (1 - 2 * r * math.cos(t) + r * r)
    val = quad(u, -math.pi, math.pi, points=[0.0], epsabs=0.0, epsrel=1e-12, limit=400)[0] / (2 * math.pi)
    assert val == pytest.approx(1.0, rel=1e-10)
    lam = -math.log1p(-r)
    assert M.mp_mean(M.HLExtremal(1), "re", 1.0, lam) == pytest.approx(val, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(
    coeffs=st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=1, max_size=16),
    lam=st.floats(0.0, 20.0),
)
def test_parseval(coeffs, lam):
    f = M.Taylor(tuple(coeffs))
    r = float(radius(lam))
    want = math.fsum(abs(a) ** 2 * r ** (2 * m) for m, a in enumerate(coeffs))
    got = M.mp_mean(f, "f", 2.0, lam) ** 2
    assert got == pytest.approx(want, rel=1e-10, abs=1e-12 * max(1.0, sum(abs(a) ** 2 for a in coeffs)))


@settings(max_examples=40, deadline=None)
@given(p=st.floats(0.05, 12.0))
def test_cos_mean_matches_gamma_formula(p):
    assert M.cos_mean(p) == pytest.approx(c_p_gamma(p), rel=1e-12)


@pytest.mark.parametrize("f", FUNCS, ids=repr)
@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_mean_profile_invariants(f, p):
    grid = np.linspace(0.0, 12.0, 25)
    prof = M.mean_profile(f, "f", p, grid)
    assert np.all(np.diff(prof.sup_env) >= 0) and np.all(prof.sup_env >= prof.mp_pow)
    # |f|^p is subharmonic, so its circle means increase with r
    assert np.all(np.diff(prof.mp_pow) >= -1e-10 * prof.mp_pow[1:])
    re = M.mean_profile(f, "re", p, grid)
    assert np.all(re.mp_pow <= prof.mp_pow * (1 + 1e-10))


def test_running_sup_examples():
    g = np.arange(5.0)
    mono = M.MeanProfile(g, np.array([1.0, 2.0, 3.0, 4.0, 5.0]), None, 1.0, M.Target.RE)
    np.testing.assert_array_equal(M.running_sup(mono).sup_env, mono.mp_pow)
    spike = M.MeanProfile(g, np.array([1.0, 5.0, 2.0, 1.0, 3.0]), None, 1.0, M.Target.RE)
    np.testing.assert_array_equal(M.running_sup(spike).sup_env, [1.0, 5.0, 5.0, 5.0, 5.0])


def test_mean_rejects_bad_target_and_p():
    with pytest.raises(ParameterError):
        M.mp_mean(M.Monomial(1), "imag", 1.0, 1.0)
    with pytest.raises(ParameterError):
        M.mp_mean(M.Monomial(1), "f", -1.0, 1.0)


@pytest.mark.parametrize("k", [1, 2])
def test_extremal_growth_law(k):
    p = 1.0 / k
    lam = np.linspace(2.0, 14.0, 25)
    vals = np.array([M.mp_mean(M.HLExtremal(k), "f", p, x) ** p for x in lam]) / (1.0 + lam)
    assert vals.min() > 0 and vals.max() / vals.min() <= 2.0


# -- norms -------------------------------------------------------------------------------------------


WEIGHTS = [Lebesgue(), Standard(1.0), Standard(2.5), RapidV(3.0), LogStep()]


@pytest.mark.parametrize("w", WEIGHTS, ids=repr)
@pytest.mark.parametrize("p", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("n", [0, 1, 5, 33])
def test_monomial_norm_closed_form(w, p, n):
    got = M.bergman_norm(M.Monomial(n), w, p)
    assert got**p == pytest.approx(2.0 * moment(w, n * p + 1.0), rel=1e-9)
    re = M.repart_norm(M.Monomial(n), w, p)
    c = 1.0 if n == 0 else c_p_gamma(p)
    assert re**p == pytest.approx(2.0 * c * moment(w, n * p + 1.0), rel=1e-9)


def test_repart_examples():
    w = Standard(0.0)
    for n in (1, 4, 9):
        assert M.repart_norm(M.Monomial(n), w, 2.0) ** 2 == pytest.approx(moment(w, 2 * n + 1), rel=1e-12)
    assert M.repart_norm(M.Monomial(0), w, 1.5) == pytest.approx(M.bergman_norm(M.Monomial(0), w, 1.5), rel=1e-14)
    for w in (RapidV(2.0), Standard(1.0), LogStep()):
        assert M.repart_norm(M.HLExtremal(1), w, 1.0) == pytest.approx(2.0 * moment(w, 1.0), rel=1e-9)


@pytest.mark.parametrize("c", [2.0, -0.5 + 1j])
@pytest.mark.parametrize("p", [0.5, 2.0])
def test_constant_norm(c, p):
    w = Standard(1.0)
    got = M.bergman_norm(M.Taylor((c,)), w, p) ** p
    assert got == pytest.approx(abs(c) ** p * 2.0 * moment(w, 1.0), rel=1e-12)


def test_extremal_norm_diverges_on_rapid_weight():
    out = M.bergman_norm(M.HLExtremal(1), RapidV(2.0), 1.0)
    assert isinstance(out, Divergent)
    vals = [v for _, v in out.partials]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    part = M.norm_partials(M.HLExtremal(1), RapidV(2.0), 1.0)
    lv = np.log([a for a, _ in part])
    pv = np.array([v for _, v in part])
    slope, icpt = np.polyfit(lv, pv, 1)
    assert slope > 0 and np.max(np.abs(pv - (icpt + slope * lv))) < 0.2 * slope * (lv[-1] - lv[0])


def test_extremal_norm_finite_on_standard_weight():
    # 2 int M_1(r, f) r dr with M_1 ~ log(1/(1-r)) is finite
    got = M.bergman_norm(M.HLExtremal(1), Standard(0.0), 1.0)
    r_int = lambda r: 2 * r * 2 / math.pi * ellipkm1((1 - r) * (1 + r)) if r < 1 else 0.0
    ref = quad(r_int, 0, 1, epsabs=0, epsrel=1e-12, limit=400)[0]
    assert got == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("f", [M.Monomial(2), M.HLExtremal(1), M.Taylor((1, -1j, 2)), M.Dilate(M.HLExtremal(2), 0.8)], ids=repr)
@pytest.mark.parametrize("w", [Lebesgue(), RapidV(3.0)], ids=repr)
@pytest.mark.parametrize("p", [1.0, 2.0])
def test_real_part_norm_below_full_norm(f, w, p):
    full = M.bergman_norm(f, w, p)
    if isinstance(full, Divergent):
        return
    assert M.repart_norm(f, w, p) <= full * (1 + 1e-10)


# -- Littlewood-Paley functional ----------------------------------------------------------------------------


def test_lp_examples():
    assert M.lp_functional(M.Taylor((3.0,)), Standard(1.0), 1.5) == pytest.approx(3.0**1.5, rel=1e-14)
    assert M.lp_functional(M.Monomial(1), Lebesgue(), 2.0) == pytest.approx(1.0 / 6.0, rel=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 2.0])
@pytest.mark.parametrize("p", [1.0, 2.0, 0.7])
@pytest.mark.parametrize("n", [1, 2, 10, 64])
def test_lp_monomial_beta_form(alpha, p, n):
    want = n**p * 2.0 * beta_fn((n - 1) * p + 2.0, p + alpha + 1.0)
    assert M.lp_functional(M.Monomial(n), Standard(alpha), p) == pytest.approx(want, rel=1e-9)


def test_lp_custom_exponent():
    # exponent p - 1 on Lebesgue: n^2 * 2 * B(2n, 2) for p = 2
    n = 3
    want = n**2 * 2.0 * beta_fn(2 * (n - 1) + 2.0, 2.0)
    assert M.lp_functional(M.Monomial(n), Lebesgue(), 2.0, derivative_weight_exponent=1.0) == pytest.approx(want, rel=1e-9)


def test_lp_logstep_is_finite_upper_direction_only():
    for n in (1, 8, 32):
        lp = M.lp_functional(M.Monomial(n), LogStep(), 1.0)
        assert math.isfinite(lp) and lp > 0


@pytest.mark.parametrize("f", [M.HLExtremal(1), M.Taylor((0, 1, 1j, 0.5))], ids=repr)
def test_derivative_bound_spot_check(f):
    """``M_p(r, f') (rho - r)`` against ``sup_{t < rho} M_p(t, Re f)`` with ``rho`` halfway to 1."""

    def ratios(lams):
        out = []
        for lam in lams:
            lam_rho = lam + math.log(2.0)
            gap = math.exp(-lam) / 2.0
            env = M.mean_profile(f, "re", 2.0, np.linspace(0.0, lam_rho, 40)).sup_env[-1] ** 0.5
            out.append(M.mp_mean(f, "df", 2.0, lam) * gap / env)
        return np.array(out)

    short = ratios(np.linspace(0.0, 10.0, 11))
    long = ratios(np.linspace(0.0, 20.0, 21))
    assert long.max() <= 1.05 * short.max()


# -- maximal function ----------------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "zeta, z, inside",
    [
        ((1.0, 0.0), 0.9, True),
        ((1.0, 0.0), 0.9 * np.exp(0.1j), False),
        ((0.5, 0.0), 0.6, False),
        ((1.0, 0.0), 0.0, False),
        ((1.0, math.pi), -0.9 * np.exp(0.01j), True),
        ((1.0, -math.pi + 0.01), -0.9, True),
    ],
)
def test_stolz_examples(zeta, z, inside):
    assert M.stolz_contains(zeta, z) is inside


def test_stolz_rejects_bad_zeta():
    with pytest.raises(ParameterError):
        M.stolz_contains((0.0, 0.0), 0.5)


@settings(max_examples=60, deadline=None)
@given(rz=st.floats(0.01, 1.0), th=st.floats(-4.0, 4.0), r=st.floats(0.001, 0.999), t=st.floats(-4.0, 4.0))
def test_stolz_points_lie_inside_zeta_circle(rz, th, r, t):
    z = r * np.exp(1j * t)
    if M.stolz_contains((rz, th), z):
        assert abs(z) < rz


@pytest.mark.parametrize("c", [1.0, 2.0, -3.0])
@pytest.mark.parametrize("p", [1.0, 2.0])
def test_maximal_norm_of_constant(c, p):
    w = Standard(1.0)
    got = M.maximal_norm(M.Taylor((c,)), w, p)
    assert got == pytest.approx(abs(c) * (2.0 * moment(w, 1.0)) ** (1.0 / p), rel=1e-10)


def test_maximal_norm_dilated_extremal():
    f = M.Dilate(M.HLExtremal(1), 0.99)
    assert M.maximal_norm(f, Lebesgue(), 1.0) >= M.bergman_norm(f, Lebesgue(), 1.0)


def test_maximal_norm_grows_with_resolution():
    f, w = M.Monomial(4), Standard(0.0)
    s = M.Sampling()
    coarse = M.maximal_norm(f, w, 1.0, s)
    fine = M.maximal_norm(f, w, 1.0, s.refined())
    assert fine >= coarse * (1 - 1e-12)


@pytest.mark.parametrize("lam", [0.1, 1.0, 5.0, 20.0])
def test_maximal_of_z_bounded_by_modulus(lam):
    # the region of zeta only holds points closer to 0, so N(Re z)(zeta) <= |zeta|
    vals = M._maximal_values(M.Monomial(1), lam, M.Sampling().refined())
    assert np.all(vals <= radius(lam) * (1 + 1e-15))
    assert np.mean(vals) < radius(lam)


# -- comparison report ---------------------------------------------------------------------------------------


@pytest.mark.parametrize("p", [1.0, 2.0])
@pytest.mark.parametrize("n", [1, 6])
def test_conjugate_report_monomial(p, n):
    rep = M.conjugate_report(M.Monomial(n), Standard(1.0), p)
    assert rep.ratios["norm_f/norm_re"] == pytest.approx(c_p_gamma(p) ** (-1.0 / p), rel=1e-9)
    assert all(math.isfinite(v) and v > 0 for v in rep.values.values())


def test_conjugate_report_constant():
    w = Standard(1.0)
    rep = M.conjugate_report(M.Monomial(0), w, 1.0)
    assert rep["sup_omega"] == pytest.approx(tail_hat(w, 0.0), rel=1e-10)
    assert rep["sup_tilde"] == pytest.approx(tilde_hat(w, 0.0), rel=1e-10)
    assert rep["lp"] == pytest.approx(1.0)


def test_conjugate_report_failure_witness():
    rep = M.conjugate_report(M.HLExtremal(1), RapidV(2.0), 1.0)
    assert isinstance(rep["norm_f"], Divergent)
    assert rep["norm_re"] == pytest.approx(2.0 * moment(RapidV(2.0), 1.0), rel=1e-9)
    assert isinstance(rep["sup_tilde"], Divergent)
    assert rep.ratios["norm_f/norm_re"] is None


# -- tails on slowly decaying weights ----------------------------------------------------------------


def _level_quad(h):
    edges = [0.0, 1.0, 4.0, 16.0, 64.0, 256.0]
    body = sum(quad(h, a, b, epsabs=0.0, epsrel=1e-13, limit=400)[0] for a, b in zip(edges[:-1], edges[1:]))
    return body + quad(h, edges[-1], np.inf, epsabs=0.0, epsrel=1e-12, limit=400)[0]


def test_extremal_norm_on_rapid_weight_by_elliptic_oracle():
    # M_1(r, 1/(1 - z)) = (2/pi) K(r), integrated against (1 + lam)^-3 (1 - e^-lam) d lam
    def h(lam):
        d = math.exp(-lam)
        # past level 40 use K = log(4/k') + O(k'^2 log k'), exact in double precision there
        k = ellipkm1(d * (2.0 - d)) if lam < 40.0 else 1.5 * math.log(2.0) + 0.5 * lam
        return 2.0 / math.pi * k * (1.0 + lam) ** -3 * -math.expm1(-lam)

    want = 2.0 * _level_quad(h)
    assert M.bergman_norm(M.HLExtremal(1), RapidV(3.0), 1.0) == pytest.approx(want, rel=1e-9)


def test_lp_of_failure_witness_is_finite():
    # M_1(r, f') (1 - r) = 1/(2 - delta) in the level variable
    h = lambda lam: (1.0 + lam) ** -2 * -math.expm1(-lam) / (2.0 - math.exp(-lam))
    want = 1.0 + 2.0 * _level_quad(h)
    assert M.lp_functional(M.HLExtremal(1), RapidV(2.0), 1.0) == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("w", [RapidV(3.0), RapidV(1.5), LogStep()], ids=repr)
def test_polynomial_norm_by_parseval_on_slow_weights(w):
    coeffs = (1.0, -1j, 2.0, 0.0, 0.25)
    want = 2.0 * math.fsum(abs(a) ** 2 * moment(w, 2.0 * m + 1.0) for m, a in enumerate(coeffs))
    assert M.bergman_norm(M.Taylor(coeffs), w, 2.0) ** 2 == pytest.approx(want, rel=1e-9)
