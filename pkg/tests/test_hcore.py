import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from foxh.hcore import (
    GammaPair,
    HParams,
    PoleMergeError,
    Side,
    derived_params,
    effective_poles,
    enumerate_poles,
    format_hparams,
    laurent_at,
    mellin_kernel,
    parse_hparams,
    parse_number,
    pole_gap,
    validate,
)
from foxh.kernel import fundamental_instance
from foxh.specfun import GammaPoleError

EXP = HParams(1, 0, [], [(0, 1)])


def test_derived_fundamental():
    der = derived_params(fundamental_instance(1.5, 2.0, 3))
    assert der.a_star == pytest.approx(0.5, abs=1e-15)
    assert der.big_d == pytest.approx(0.5, abs=1e-15)
    assert der.delta == pytest.approx(1.5**-1.5, rel=1e-14)
    assert der.delta == pytest.approx(0.5443310539, abs=1e-10)


def test_derived_exponential():
    der = derived_params(EXP)
    assert (der.a_star, der.big_d, der.delta, der.mu) == (1.0, 1.0, 1.0, -0.5)


@pytest.mark.parametrize("alpha,beta,d", [(0.3, 1.1, 1), (1.2, 2.0, 2), (1.9, 0.4, 3)])
def test_derived_fundamental_family(alpha, beta, d):
    der = derived_params(fundamental_instance(alpha, beta, d))
    assert der.a_star == pytest.approx(2 - alpha)
    assert der.big_d == pytest.approx(beta - alpha)


def test_kernel_exponential():
    assert mellin_kernel(EXP, 0.5).real == pytest.approx(math.sqrt(math.pi), rel=1e-14)


def test_kernel_mittag_leffler_instance():
    h = HParams(1, 1, [(0, 1)], [(0, 1), (0, 0.5)])
    ref = (math.pi / math.sin(math.pi / 4)) / math.gamma(0.875)
    assert mellin_kernel(h, 0.25).real == pytest.approx(ref, rel=1e-13)


def test_kernel_fundamental_simplified():
    # alpha = beta = 1, d = 1: Gamma(1/2 + s/2) Gamma(1 + s) Gamma(-s) / (Gamma(1 + s) Gamma(-s/2))
    s = 0.3
    ref = float(mp.gamma(0.5 + s / 2) * mp.gamma(-s) / mp.gamma(-s / 2))
    got = mellin_kernel(fundamental_instance(1.0, 1.0, 1), s)
    assert got.real == pytest.approx(ref, rel=1e-11)
    assert abs(got.imag) < 1e-14


def test_kernel_complex_against_mpmath():
    h = fundamental_instance(0.7, 1.3, 2)
    for s in (-0.2 + 3j, -0.5 - 40j, 0.4 + 150j):
        ref = complex(mp.gamma(1 + 0.65 * s) * mp.gamma(1 + s) * mp.gamma(-s)
                      / (mp.gamma(1 + 0.7 * s) * mp.gamma(-0.65 * s)))
        got = complex(mellin_kernel(h, s))
        assert abs(got - ref) <= 1e-11 * abs(ref)


def test_kernel_poles_and_zeros():
    with pytest.raises(GammaPoleError):
        mellin_kernel(EXP, -2.0)
    # 1/Gamma(1 + alpha s) vanishes at s = -1/alpha = -2.5; numerators are finite there
    h = fundamental_instance(0.4, 1.0, 3)
    assert mellin_kernel(h, -2.5 + 0j) == 0.0


def test_poles_double_when_d_equals_beta():
    poles = enumerate_poles(fundamental_instance(1.5, 2.0, 2), Side.Left, 4)
    assert [p.location for p in poles] == [-1.0, -2.0, -3.0, -4.0]
    assert all(p.order == 2 for p in poles)


def test_poles_listing_order():
    poles = enumerate_poles(fundamental_instance(1.5, 1.2, 1), Side.Left, 4)
    locs = [p.location for p in poles]
    assert locs == pytest.approx([-1 / 1.2, -1.0, -2.0, -2.5])
    assert all(p.order == 1 for p in poles)
    assert all(p.side is Side.Left for p in poles)


def test_poles_exponential():
    poles = enumerate_poles(EXP, Side.Left, 5)
    assert [p.location for p in poles] == [0, -1, -2, -3, -4]
    assert enumerate_poles(EXP, Side.Right, 3) == []


def test_poles_right_side():
    poles = enumerate_poles(fundamental_instance(0.5, 1.0, 1), Side.Right, 3)
    assert [p.location for p in poles] == [0, 1, 2]


def test_enumerate_count_guard():
    with pytest.raises(ValueError):
        enumerate_poles(EXP, Side.Left, 0)


def test_triple_merge_rejected():
    h = HParams(3, 0, [], [(0, 1), (0, 1), (0, 1)])
    with pytest.raises(PoleMergeError):
        enumerate_poles(h, Side.Left, 2)


def test_removable_poles_skipped():
    # alpha = 0.5, beta = 1, d = 3: Gamma(1 + s) poles at -2, -4, ... cancelled by Gamma(1 + s/2)
    h = fundamental_instance(0.5, 1.0, 3)
    locs = [p.location for p in effective_poles(h, Side.Left, 4)]
    assert locs == pytest.approx([-1.0, -3.0, -5.0, -7.0])


def test_laurent_simple_pole_of_gamma():
    lau = laurent_at(EXP, -2.0)
    assert lau.order == 1
    assert lau.sign * math.exp(lau.logabs) == pytest.approx(0.5, rel=1e-14)  # Res Gamma at -2


def test_pole_gap():
    lo, hi = pole_gap(fundamental_instance(0.7, 1.5, 2))
    assert lo == pytest.approx(-1.0)
    # Gamma(-s) at s = 0 is cancelled by 1/Gamma(-beta s/2)
    assert hi == pytest.approx(1.0)


def test_validate_fundamental_grid_clean():
    for alpha in (0.2, 0.7, 1.0, 1.5, 1.9):
        for beta in (0.4, 1.0, 1.5, 2.0):
            for d in (1, 2, 3):
                assert validate(fundamental_instance(alpha, beta, d)) == []


def test_validate_collision():
    # Gamma(s) on the left, Gamma(1 - 1 - s) = Gamma(-s) on the right: both have a pole at 0
    diags = validate(HParams(1, 1, [(1, 1)], [(0, 1)]))
    assert len(diags) == 1 and "coincides" in diags[0]


def test_validate_negative_scale():
    diags = validate(HParams(1, 0, [], [(0, -1)]))
    assert diags and "nonpositive scale" in diags[0]


def test_parse_roundtrip():
    h = parse_hparams(" 2 1 | 1:1 , 1:3/2 | 3/2:1, 1 : 1, 1:1 ")
    assert h == fundamental_instance(1.5, 2.0, 3)
    assert parse_hparams(format_hparams(h)) == h
    assert format_hparams(h) == "2 1 | 1:1, 1:3/2 | 3/2:1, 1:1, 1:1"
    assert parse_hparams("1 0 | - | 0:1") == EXP


@pytest.mark.parametrize("text", ["2 1 | 1:1", "x 1 | 1:1 | 0:1", "1 0 | | 0;1", "1 0 | | 0:1/0",
                                  "3 0 | | 0:1", "1 0 | | 0:abc"])
def test_parse_errors(text):
    with pytest.raises(ValueError):
        parse_hparams(text)


def test_parse_number():
    assert parse_number("3/4") == Fraction(3, 4)
    assert parse_number("-0.25") == Fraction(-1, 4)
    assert parse_number("1e-3") == Fraction(1, 1000)


def test_gamma_pair_exact():
    assert GammaPair(0.5, "3/2") == GammaPair(Fraction(1, 2), Fraction(3, 2))


# -- properties ---------------------------------------------------------------

params = st.tuples(st.floats(0.1, 1.95), st.floats(0.1, 2.0), st.integers(1, 4))


@given(params, st.floats(0.05, 0.95))
def test_kernel_real_in_gap(p, frac):
    h = fundamental_instance(*p)
    lo, hi = pole_gap(h)
    s = lo + frac * (hi - lo)
    try:
        v = mellin_kernel(h, s)
    except GammaPoleError:
        # only removable singularities can sit inside the gap
        assert laurent_at(h, s).order <= 0
        assume(False)
    assert abs(v.imag) <= 1e-12 * abs(v)


@pytest.mark.parametrize("h", [fundamental_instance(0.7, 1.3, 2), fundamental_instance(1.5, 2.0, 3),
                               HParams(1, 1, [(0, 1)], [(0, 1), (0, 0.6)]), EXP])
def test_kernel_vertical_decay_rate(h):
    der = derived_params(h)
    lo, hi = pole_gap(h)
    gamma = 0.5 * (max(lo, hi - 2) + hi) if math.isfinite(hi) else lo + 0.5
    rho = np.linspace(50, 200, 61)
    logk = np.log(np.abs(mellin_kernel(h, gamma + 1j * rho)))
    logk -= (der.big_d * gamma + der.mu) * np.log(rho)
    slope = np.polyfit(rho, logk, 1)[0]
    assert -slope == pytest.approx(math.pi * der.a_star / 2, rel=0.05)


pairs = st.lists(st.tuples(st.fractions(-3, 3, max_denominator=8), st.fractions(Fraction(1, 8), 3, max_denominator=8)),
                 min_size=0, max_size=3)


@given(pairs, pairs, pairs, pairs, st.randoms(use_true_random=False))
def test_derived_permutation_invariant(up_n, up_rest, lo_m, lo_rest, rnd):
    h = HParams(len(lo_m), len(up_n), up_n + up_rest, lo_m + lo_rest)
    shuffled = []
    for block in (up_n, up_rest, lo_m, lo_rest):
        b = list(block)
        rnd.shuffle(b)
        shuffled.append(b)
    g = HParams(len(lo_m), len(up_n), shuffled[0] + shuffled[1], shuffled[2] + shuffled[3])
    a, b = derived_params(h), derived_params(g)
    for x, y in zip((a.a_star, a.big_d, a.delta, a.mu), (b.a_star, b.big_d, b.delta, b.mu)):
        assert x == pytest.approx(y, rel=1e-12, abs=1e-12)


@given(pairs, pairs, st.integers(0, 3), st.integers(0, 3))
def test_format_parse_roundtrip(up, lo, m, n):
    h = HParams(min(m, len(lo)), min(n, len(up)), up, lo)
    assert parse_hparams(format_hparams(h)) == h
