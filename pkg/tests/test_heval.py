import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from foxh.hcore import HParams, Side, derived_params
from foxh.heval import (
    EvalDomainError,
    ContourError,
    Method,
    eval_auto,
    eval_contour,
    eval_many,
    eval_series_left,
    eval_series_right,
    leading_term,
)
from foxh.hrewrite import reflect
from foxh.kernel import beta2_instance, fundamental_instance, g_elementary
from foxh.mittag import ml_instance
from foxh.positivity import _psi_tilde_params

EXP = HParams(1, 0, [], [(0, 1)])
ML_HALF_AT_1 = 0.42758357615580700441  # exp(1) erfc(1), 50 digits


def test_left_series_exponential():
    res = eval_series_left(EXP, 1.0)
    assert res.method is Method.SeriesLeft
    assert res.value == pytest.approx(math.exp(-1), rel=1e-13)
    assert res.abs_err_est < 1e-10
    assert res.terms_or_nodes > 5


def test_left_series_mittag_leffler():
    assert float(mp.exp(1) * mp.erfc(1)) == pytest.approx(ML_HALF_AT_1, rel=1e-15)
    res = eval_series_left(ml_instance(0.5), 1.0)
    assert res.value == pytest.approx(ML_HALF_AT_1, rel=1e-12)


def test_left_series_double_pole_log_term():
    h = fundamental_instance(1.5, 2.0, 2)
    c1, e, has_log = leading_term(h)
    assert has_log and e == 1.0
    # independent: (s + 1)^2 K(s) at s -> -1, with K = Gamma(1+s)^2 / Gamma(1 + 3s/2)
    mp.mp.dps = 40
    eps = mp.mpf(10) ** -15
    s = -1 + eps
    a2 = float(eps**2 * mp.gamma(1 + s) ** 2 / mp.gamma(1 + 1.5 * s))
    mp.mp.dps = 15
    assert c1 == pytest.approx(-a2, rel=1e-12)
    # 1 - alpha < 0 factor makes z log z the dominating negative-log-coefficient pattern
    z = 1e-8
    v = eval_series_left(h, z).value
    assert v == pytest.approx(c1 * z * math.log(z), rel=0.1)


def test_left_series_domain():
    with pytest.raises(EvalDomainError):
        eval_series_left(fundamental_instance(1.5, 1.2, 1), 0.5)  # D < 0
    h = fundamental_instance(1.5, 1.5, 1)  # D = 0
    with pytest.raises(EvalDomainError):
        eval_series_left(h, 2 * derived_params(h).delta)
    with pytest.raises(EvalDomainError):
        eval_series_left(EXP, -1.0)


def test_right_series_asymptotic_ml():
    res = eval_series_right(ml_instance(0.5), 50.0)
    assert res.asymptotic
    assert res.value == pytest.approx(1 / (math.gamma(0.5) * 50), rel=0.03)


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.5])
def test_right_series_d_zero_closed_form(beta):
    h = fundamental_instance(beta, beta, 1)
    delta = derived_params(h).delta
    for r in (1.5, 3.0, 20.0):
        z = (r / 2) ** beta
        if z <= 1.1 * delta:
            continue
        res = eval_series_right(h, z)
        assert not res.asymptotic
        g = res.value / (math.sqrt(math.pi) * r)
        assert g == pytest.approx(g_elementary(beta, 1.0, r), rel=1e-8)


def test_right_series_no_poles():
    res = eval_series_right(beta2_instance(1.0, 3), 5.0)
    assert res.value == 0.0 and res.terms_or_nodes == 0
    assert math.isinf(res.abs_err_est) and "exponential" in res.note


def test_contour_exponential():
    res = eval_contour(EXP, 2.0)
    assert res.method is Method.Contour
    assert res.value == pytest.approx(math.exp(-2), abs=1e-10)
    assert abs(res.imag) <= 10 * 1e-10


def test_contour_vs_left():
    h = fundamental_instance(0.5, 2.0, 1)
    assert eval_contour(h, 0.1).value == pytest.approx(eval_series_left(h, 0.1).value, abs=1e-8)


def test_contour_vs_right():
    h = fundamental_instance(1.5, 1.2, 1)
    assert eval_contour(h, 3.0).value == pytest.approx(eval_series_right(h, 3.0).value, abs=1e-7)


def test_contour_requires_positive_astar():
    with pytest.raises(ContourError):
        eval_contour(HParams(1, 0, [(0, 1)], [(0, 1)]), 0.5)


def test_auto_routes():
    h = fundamental_instance(1.2, 1.2, 1)
    assert eval_auto(h, derived_params(h).delta).method is Method.Contour
    assert eval_auto(fundamental_instance(0.5, 1.5, 2), 1e-3).method is Method.SeriesLeft
    assert eval_auto(fundamental_instance(1.5, 1.2, 1), 4.0).method is Method.SeriesRight
    h = fundamental_instance(0.8, 0.8, 1)
    assert eval_auto(h, 0.5 * derived_params(h).delta).method is Method.SeriesLeft
    assert eval_auto(h, 3.0 * derived_params(h).delta).method is Method.SeriesRight


def test_auto_falls_back_from_asymptotic_region():
    # D > 0 with a large argument: no convergent series, contour must be used
    res = eval_auto(fundamental_instance(0.6, 1.4, 2), 30.0)
    assert res.method in (Method.Contour, Method.SeriesLeft)
    ref = eval_contour(fundamental_instance(0.6, 1.4, 2), 30.0, 1e-13)
    assert res.value == pytest.approx(ref.value, rel=1e-8)


def test_eval_many_keeps_order():
    zs = [0.3, 2.0, 0.01, 5.0]
    seq = [eval_auto(EXP, z).value for z in zs]
    par = [r.value for r in eval_many(EXP, zs, threads=3)]
    assert par == seq


def test_leading_term_fundamental_power():
    for alpha, beta, d in ((1.0, 0.6, 1), (0.7, 1.5, 1), (1.5, 1.8, 1), (1.3, 2.0, 1)):
        c, e, has_log = leading_term(fundamental_instance(alpha, beta, d))
        ref = (2 / beta) * math.gamma(1 - d / beta) * math.gamma(d / beta) \
            / (math.gamma(1 - alpha * d / beta) * math.gamma(d / 2)) if alpha != 1 else \
            (2 / beta) * math.gamma(d / beta) / math.gamma(d / 2)
        assert not has_log
        assert e == pytest.approx(d / beta)
        assert c == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("alpha,beta,d", [(1.5, 1.0, 2), (1.5, 2.0, 3), (1.3, 1.5, 3), (1.7, 0.6, 1)])
def test_leading_term_psi_second(alpha, beta, d):
    c, e, has_log = leading_term(_psi_tilde_params(alpha, beta, d, True))
    ref = beta * math.gamma(2 - alpha) * math.gamma((d - beta) / 2) / (2 * math.gamma(1 - alpha) * math.gamma(beta / 2))
    assert not has_log
    assert e == pytest.approx(beta / 2)
    assert c == pytest.approx(ref, rel=1e-12)
    assert c < 0


def test_leading_term_exponential():
    assert leading_term(EXP) == (1.0, 0.0, False)
    with pytest.raises(EvalDomainError):
        leading_term(EXP, Side.Right)


# -- invariants ----------------------------------------------------------------

params = st.tuples(st.floats(0.2, 1.9), st.floats(0.3, 2.0), st.integers(1, 3))


@given(params, st.floats(-3, 1))
def test_auto_matches_contour(p, logz):
    h = fundamental_instance(round(p[0], 3), round(p[1], 3), p[2])
    z = 10.0**logz
    der = derived_params(h)
    if abs(der.big_d) < 1e-12 and abs(z / der.delta - 1) < 0.15:
        return
    a = eval_auto(h, z, 1e-12)
    c = eval_contour(h, z, 1e-12)
    assert abs(a.value - c.value) <= max(1e-8, 10 * (a.abs_err_est + c.abs_err_est))


@given(params, st.floats(-3, -0.5))
def test_left_right_reflection(p, logz):
    h = fundamental_instance(round(p[0], 3), round(p[1], 3), p[2])
    if derived_params(h).big_d <= 0.05:
        return
    z = 10.0**logz
    left = eval_series_left(h, z)
    right = eval_series_right(reflect(h), 1 / z)
    assert right.value == pytest.approx(left.value, rel=1e-9, abs=1e-12 * abs(left.value) + 1e-300)


def test_heat_instance_positive_and_exponential_rate():
    h = beta2_instance(1.0, 1)
    zs = np.geomspace(10, 100, 12)
    vals = np.array([eval_auto(h, z).value for z in zs])
    assert np.all(vals > 0)
    rate = np.polyfit(np.log(zs), np.log(-np.log(vals)), 1)[0]
    assert rate == pytest.approx(1 / (2 - 1.0), rel=0.05)


@pytest.mark.parametrize("alpha,d", [(1.5, 2), (0.7, 1), (1.3, 1)])
def test_double_pole_profile_fit(alpha, d):
    beta = float(d)
    h = fundamental_instance(alpha, beta, d)
    c1, e, has_log = leading_term(h)
    assert has_log
    zs = np.geomspace(1e-6, 1e-4, 25)
    v = np.array([eval_auto(h, z).value for z in zs])
    basis = np.column_stack([zs**e * np.log(zs), zs**e])
    coef, *_ = np.linalg.lstsq(basis, v, rcond=None)
    resid = v - basis @ coef
    r2 = 1 - np.sum(resid**2) / np.sum((v - v.mean()) ** 2)
    assert r2 > 0.9999
    assert coef[0] == pytest.approx(c1, rel=1e-3)
