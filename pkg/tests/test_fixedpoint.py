"""Fixed-precision grid arithmetic, checked against an mpmath interval oracle."""

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from craspkit.fixedpoint import (
    Precision, Fixed, FixedError, ZeroDenominator, fixed_from_fraction,
    round_to, bit, from_bits, exp_round, expmul_round, sumdiv_round,
)

P84 = Precision(8, 4)
P124 = Precision(12, 4)


def mp_floor_to_grid(value, prec):
    """Oracle floor using 80-digit floats, snapping when the exact result sits
    on the grid (where a float floor is ill-conditioned)."""
    with mpmath.workdps(80):
        scaled = value * (1 << prec.s)
        nearest = mpmath.nint(scaled)
        if abs(scaled - nearest) < mpmath.mpf("1e-40"):
            m = int(nearest)
        else:
            m = int(mpmath.floor(scaled))
    return min(max(m, prec.min_m), prec.max_m)


def test_precision_validation():
    with pytest.raises(FixedError):
        Precision(1, 0)
    with pytest.raises(FixedError):
        Precision(4, 4)
    assert P84.min_m == -128 and P84.max_m == 127
    assert P84.grid == Fraction(1, 16)


def test_fixed_str_is_exact_decimal():
    assert str(Fixed(-8, Precision(8, 2))) == "-2.00"
    assert str(Fixed(5, Precision(8, 4))) == "0.3125"
    assert str(Fixed(7, Precision(4, 0))) == "7"


def test_fixed_from_fraction_grid_only():
    assert fixed_from_fraction(Fraction(3, 16), P84).m == 3
    with pytest.raises(FixedError):
        fixed_from_fraction(Fraction(1, 3), P84)


def test_round_to_floor_and_saturation():
    assert round_to(Fraction(1, 3), P84).m == 5          # floor(16/3)
    assert round_to(Fraction(-1, 3), P84).m == -6        # floor rounds down
    assert round_to(Fraction(1000), P84).m == P84.max_m  # saturates high
    assert round_to(Fraction(-1000), P84).m == P84.min_m  # saturates low
    assert round_to(Fraction(1, 16), P84).m == 1         # exact grid point


def test_bit_twos_complement_round_trip():
    for prec in (Precision(4, 1), Precision(6, 2)):
        for x in prec.all_values():
            bits = [bit(x, b) for b in range(1, prec.p + 1)]
            assert from_bits(bits, prec) == x
            assert bits[-1] == (1 if x.m < 0 else 0)  # sign bit
    with pytest.raises(FixedError):
        bit(Fixed(0, P84), 0)
    with pytest.raises(FixedError):
        bit(Fixed(0, P84), P84.p + 1)


def test_exp_round_all_inputs_small_precision():
    prec = Precision(8, 3)
    with mpmath.workdps(80):
        for x in prec.all_values():
            ex = mpmath.exp(mpmath.mpf(x.value.numerator) / x.value.denominator)
            assert exp_round(x).m == mp_floor_to_grid(ex, prec), x


def test_exp_round_edges():
    assert exp_round(Fraction(0), P124).value == 1
    assert exp_round(Fraction(50), P124).m == P124.max_m
    assert exp_round(Fraction(-100), P124).m == 0


def test_expmul_round_against_oracle():
    prec = Precision(8, 3)
    xs = [Fraction(m, 8) for m in range(-24, 25, 5)]
    vs = [Fraction(m, 8) for m in range(-16, 17, 3)]
    with mpmath.workdps(80):
        for x in xs:
            ex = mpmath.exp(mpmath.mpf(x.numerator) / x.denominator)
            for v in vs:
                expected = mp_floor_to_grid(
                    ex * v.numerator / v.denominator, prec)
                assert expmul_round(x, v, prec).m == expected, (x, v)


def test_expmul_round_edges():
    assert expmul_round(Fraction(5), Fraction(0), P124).m == 0
    assert expmul_round(Fraction(0), Fraction(3, 16), P124).m == 3
    assert expmul_round(Fraction(100), Fraction(1, 16), P124).m == P124.max_m
    assert expmul_round(Fraction(100), Fraction(-1, 16), P124).m == P124.min_m
    # a tiny positive product floors to 0; a tiny negative one to -grid
    assert expmul_round(Fraction(-100), Fraction(1), P124).m == 0
    assert expmul_round(Fraction(-100), Fraction(-1), P124).m == -1


def test_sumdiv_exact_sums_single_round():
    prec = P124
    nums = [Fraction(1, 3), Fraction(1, 3), Fraction(1, 3)]
    dens = [Fraction(1, 2), Fraction(1, 2)]
    assert sumdiv_round(nums, dens, prec) == round_to(Fraction(1), prec)
    with pytest.raises(ZeroDenominator):
        sumdiv_round([Fraction(1)], [Fraction(1), Fraction(-1)], prec)


def test_sumdiv_no_dilution():
    # n copies of v in both numerator and denominator give exactly v, for any n
    prec = P124
    for n in (10, 1000, 10 ** 6):
        v = Fraction(5, 16)
        assert sumdiv_round([v] * 3 + [0] * 0, [Fraction(1)] * 3, prec).value == v
        # the classic dilution trap: mean of n equal values is still exact
        assert sumdiv_round([v * n], [Fraction(n)], prec).value == v


@settings(max_examples=300, deadline=None)
@given(st.fractions(min_value=-8, max_value=8))
def test_round_to_is_floor(x):
    r = round_to(x, P84)
    assert r.value <= x or r.m == P84.min_m
    if P84.min_value <= x <= P84.max_value:
        assert 0 <= x - r.value < P84.grid


@settings(max_examples=100, deadline=None)
@given(st.fractions(min_value=-20, max_value=20))
def test_exp_round_brackets_true_value(x):
    r = exp_round(x, P124)
    with mpmath.workdps(60):
        ex = mpmath.exp(mpmath.mpf(x.numerator) / x.denominator)
        if r.m not in (P124.min_m, P124.max_m):
            lo = mpmath.mpf(r.value.numerator) / r.value.denominator
            grid = mpmath.mpf(1) / (1 << P124.s)
            eps = mpmath.mpf("1e-40")
            assert lo - eps <= ex < lo + grid + eps
