"""Exact fixed-precision arithmetic over F_{p,s}.

F_{p,s} = { m * 2^-s : -2^(p-1) <= m < 2^(p-1) }. Rounding is floor-to-grid
with saturation at both ends. exp is evaluated by interval refinement with
exact rational Taylor bounds, so the returned grid floor is bit-exact without
trusting floating point (e^x is irrational for rational x != 0, so the floor
is always decidable).
"""

from dataclasses import dataclass
from fractions import Fraction


class FixedError(Exception):
    pass


class ZeroDenominator(Exception):
    """Signals the attention zero-denominator case to the caller."""


@dataclass(frozen=True)
class Precision:
    p: int
    s: int

    def __post_init__(self):
        if self.p < 2 or not 0 <= self.s < self.p:
            raise FixedError(f"need p >= 2 and 0 <= s < p, got (p={self.p}, s={self.s})")

    @property
    def min_m(self):
        return -(1 << (self.p - 1))

    @property
    def max_m(self):
        return (1 << (self.p - 1)) - 1

    @property
    def grid(self):
        return Fraction(1, 1 << self.s)

    @property
    def max_value(self):
        return Fraction(self.max_m, 1 << self.s)

    @property
    def min_value(self):
        return Fraction(self.min_m, 1 << self.s)

    def all_values(self):
        return [Fixed(m, self) for m in range(self.min_m, self.max_m + 1)]


@dataclass(frozen=True)
class Fixed:
    m: int
    prec: Precision

    def __post_init__(self):
        if not self.prec.min_m <= self.m <= self.prec.max_m:
            raise FixedError(f"significand {self.m} out of range for {self.prec}")

    @property
    def value(self):
        return Fraction(self.m, 1 << self.prec.s)

    def __str__(self):
        # exact decimal: m * 2^-s = m * 5^s / 10^s
        s = self.prec.s
        scaled = self.m * 5 ** s
        sign = "-" if scaled < 0 else ""
        scaled = abs(scaled)
        if s == 0:
            return f"{sign}{scaled}"
        digits = str(scaled).rjust(s + 1, "0")
        return f"{sign}{digits[:-s]}.{digits[-s:]}"


def fixed_from_fraction(x, prec):
    """Exact conversion; errors if x is not on the grid (use round_to for floors)."""
    x = Fraction(x)
    m = x * (1 << prec.s)
    if m.denominator != 1:
        raise FixedError(f"{x} is not representable in F_{{{prec.p},{prec.s}}}")
    return Fixed(int(m), prec)


def round_to(x, prec):
    """Greatest element of F <= x, saturating at both ends."""
    x = Fraction(x)
    m = (x.numerator << prec.s) // x.denominator  # floor
    m = min(max(m, prec.min_m), prec.max_m)
    return Fixed(m, prec)


def bit(x, b):
    """Bit b in [1,p] of the two's-complement significand; b = p is the sign bit."""
    prec = x.prec
    if not 1 <= b <= prec.p:
        raise FixedError(f"bit index {b} out of range for p={prec.p}")
    # floor(x / 2^(b-s-1)) odd  <=>  floor(m / 2^(b-1)) odd
    return (x.m >> (b - 1)) & 1


def from_bits(bits, prec):
    """Inverse of bit: bits[b-1] for b in 1..p, two's complement."""
    if len(bits) != prec.p:
        raise FixedError("wrong number of bits")
    m = sum(bb << i for i, bb in enumerate(bits[:-1]))
    if bits[-1]:
        m -= 1 << (prec.p - 1)
    return Fixed(m, prec)


# --- Interval exponential ---

def _exp_bounds_nonneg(x, n):
    """Rational (lo, hi) with lo <= e^x <= hi for x >= 0, using n series terms."""
    term = Fraction(1)
    total = Fraction(1)
    for j in range(1, n + 1):
        term = term * x / j
        total += term
    # remainder: sum_{j>n} x^j/j! <= term * (x/(n+1)) / (1 - x/(n+2)) for n+2 > x
    if x >= n + 2:
        return total, None
    tail = term * x / (n + 1) * Fraction(n + 2) / (n + 2 - x)
    return total, total + tail


def _exp_bounds(x, n):
    if x >= 0:
        return _exp_bounds_nonneg(x, n)
    lo_p, hi_p = _exp_bounds_nonneg(-x, n)
    if hi_p is None:
        return Fraction(0), None
    return 1 / hi_p, 1 / lo_p


def _refine(x, decide):
    """Grow the series until decide(lo, hi) returns a value."""
    n = 8
    while True:
        lo, hi = _exp_bounds(x, n)
        if hi is not None:
            res = decide(lo, hi)
            if res is not None:
                return res
        n = n * 2 + 8


def exp_round(x, prec=None):
    """Exact floor-to-grid (with saturation) of e^x for x in F or rational."""
    if isinstance(x, Fixed):
        if prec is None:
            prec = x.prec
        x = x.value
    x = Fraction(x)
    if prec is None:
        raise FixedError("precision required")
    if x == 0:
        return round_to(Fraction(1), prec)
    # e^43 > 2^62 >= max for any supported precision (p <= 32)
    if x >= 43:
        return Fixed(prec.max_m, prec)
    # e^-75 * anything on the grid is below one grid step
    if x <= -75:
        return Fixed(0, prec)

    def decide(lo, hi):
        rl, rh = round_to(lo, prec), round_to(hi, prec)
        return rl if rl == rh else None

    return _refine(x, decide)


def expmul_round(x, v, prec):
    """Exact floor-to-grid of v * e^x (v rational); the attention numerator entry."""
    x = Fraction(x)
    v = Fraction(v)
    if v == 0:
        return Fixed(0, prec)
    if x == 0:
        return round_to(v, prec)
    if x >= 43 and abs(v) >= prec.grid:
        # |v * e^x| >= 2^-31 * 2^62 >= 2^31 >= max
        return Fixed(prec.max_m if v > 0 else prec.min_m, prec)
    if x <= -75:
        # |v * e^x| < 2^31 * e^-75 < 2^-31 <= one grid step
        return Fixed(0, prec) if v > 0 else Fixed(-1, prec)

    def decide(lo, hi):
        a, b = (lo * v, hi * v) if v > 0 else (hi * v, lo * v)
        ra, rb = round_to(a, prec), round_to(b, prec)
        return ra if ra == rb else None

    return _refine(x, decide)


def sumdiv_round(numerators, denominators, prec):
    """round(sum(numerators) / sum(denominators)); exact internal sums."""
    sd = sum(map(Fraction, denominators), Fraction(0))
    if sd == 0:
        raise ZeroDenominator()
    sn = sum(map(Fraction, numerators), Fraction(0))
    return round_to(sn / sd, prec)
