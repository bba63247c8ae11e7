"""Correctly rounded sin/cos of rational multiples of 2*pi.

sin_round(q, prec) returns the floor-to-grid (saturating) of sin(2*pi*q) for
rational q. Rational angles have rational sine only for the classic values
0, +-1/2, +-1, which are handled by table; all other values are irrational,
so interval refinement with rational pi bounds and Taylor series decides the
floor exactly.
"""

from fractions import Fraction

from .fixedpoint import FixedError, round_to

# 55 digits of pi, floor and ceil of the truncation
_PI_DIGITS = 31415926535897932384626433832795028841971693993751058209
PI_LO = Fraction(_PI_DIGITS, 10 ** 55)
PI_HI = Fraction(_PI_DIGITS + 1, 10 ** 55)

# sin(2*pi*q) for the rational-valued angles, q in lowest terms with q in [0,1)
_EXACT_SIN = {
    Fraction(0): Fraction(0),
    Fraction(1, 12): Fraction(1, 2), Fraction(5, 12): Fraction(1, 2),
    Fraction(1, 4): Fraction(1),
    Fraction(1, 2): Fraction(0),
    Fraction(7, 12): Fraction(-1, 2), Fraction(11, 12): Fraction(-1, 2),
    Fraction(3, 4): Fraction(-1),
}


def _sin_taylor_bounds(x_lo, x_hi, n):
    """Bounds for sin on [x_lo, x_hi] subset of [0, pi/2] (monotone there)."""
    def partials(x):
        term = x
        lo = hi = None
        total = Fraction(0)
        for k in range(n):
            total += term
            if k % 2 == 0:
                hi = total
            else:
                lo = total
            term = -term * x * x / ((2 * k + 2) * (2 * k + 3))
        return lo, hi

    lo1, _ = partials(x_lo)
    _, hi1 = partials(x_hi)
    return lo1, hi1


def _cos_taylor_bounds(x_lo, x_hi, n):
    """Bounds for cos on [x_lo, x_hi] subset of [0, pi/2] (decreasing there)."""
    def partials(x):
        term = Fraction(1)
        lo = hi = None
        total = Fraction(0)
        for k in range(n):
            total += term
            if k % 2 == 0:
                hi = total
            else:
                lo = total
            term = -term * x * x / ((2 * k + 1) * (2 * k + 2))
        return lo, hi

    lo1, _ = partials(x_hi)
    _, hi1 = partials(x_lo)
    return lo1, hi1


def _sin_bounds(q, n):
    """Rational bounds of sin(2*pi*q); q reduced to [0,1) by the caller."""
    # fold into the first quadrant using symmetries
    sign = 1
    if q >= Fraction(1, 2):
        q = q - Fraction(1, 2)
        sign = -1
    use_cos = False
    if q > Fraction(1, 4):
        q = Fraction(1, 2) - q
    if q > Fraction(1, 8):
        # sin(x) = cos(pi/2 - x); keeps the series argument small
        q = Fraction(1, 4) - q
        use_cos = True
    x_lo, x_hi = 2 * PI_LO * q, 2 * PI_HI * q
    if use_cos:
        lo, hi = _cos_taylor_bounds(x_lo, x_hi, n)
    else:
        lo, hi = _sin_taylor_bounds(x_lo, x_hi, n)
    return (sign * lo, sign * hi) if sign > 0 else (sign * hi, sign * lo)


def sin_round(q, prec):
    q = Fraction(q) % 1
    exact = _EXACT_SIN.get(q)
    if exact is not None:
        return round_to(exact, prec)
    n = 6
    while n < 200:
        lo, hi = _sin_bounds(q, n)
        rl, rh = round_to(lo, prec), round_to(hi, prec)
        if rl == rh:
            return rl
        n = n * 2
    raise FixedError(f"could not settle sin(2*pi*{q}) at this precision")


def cos_round(q, prec):
    return sin_round(Fraction(q) + Fraction(1, 4), prec)
