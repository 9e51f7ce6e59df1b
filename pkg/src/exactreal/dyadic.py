"""Exact dyadic rationals m * 2^e with arbitrary-precision mantissa.

Canonical form: the mantissa is odd or zero, and zero is always 0 * 2^0.
Value equality therefore coincides with representation equality, which
makes dyadics usable as cache keys.  All arithmetic here is exact; the
only lossy operations are the explicit rounding helpers, and those
return their error bound so the ball layer can absorb it into a radius.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import ExponentOverflow, ParseError

# Exponents live in a machine-width range.  Python integers would happily
# grow past this, but precisions beyond 2^63 bits are unreachable at desk
# scale, so treating overflow as a fatal configuration error keeps the
# arithmetic honest about what it could ever compute.
_EXP_LIMIT = 1 << 63

_DYADIC_RE = re.compile(r"^([+-]?\d+)\*2\^([+-]?\d+)$")
_DECIMAL_RE = re.compile(r"^([+-]?\d+)(?:\.(\d+))?$")


class Dyadic:
    """Immutable exact dyadic rational."""

    __slots__ = ("m", "e")

    def __init__(self, m: int, e: int = 0, normalized: bool = False):
        if not normalized:
            if m == 0:
                e = 0
            else:
                shift = (m & -m).bit_length() - 1
                if shift:
                    m >>= shift
                    e += shift
        if not -_EXP_LIMIT < e < _EXP_LIMIT:
            raise ExponentOverflow(f"dyadic exponent {e} outside machine width")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "e", e)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("Dyadic is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_int(n: int) -> "Dyadic":
        return Dyadic(n, 0)

    @staticmethod
    def from_float(x: float) -> "Dyadic":
        """Exact conversion from a finite binary float."""
        if math.isnan(x) or math.isinf(x):
            raise ValueError("cannot convert non-finite float")
        num, den = x.as_integer_ratio()
        return Dyadic(num, -(den.bit_length() - 1))

    @staticmethod
    def parse(text: str) -> "Dyadic":
        """Parse "m*2^e", an integer, or a finite decimal literal.

        Decimal literals are converted exactly; decimals whose value is
        not a dyadic rational (e.g. "0.1") are rejected here — the Real
        layer handles general rationals.
        """
        s = text.strip()
        m = _DYADIC_RE.match(s)
        if m:
            return Dyadic(int(m.group(1)), int(m.group(2)))
        m = _DECIMAL_RE.match(s)
        if m is None:
            raise ParseError(f"not a dyadic literal: {text!r}")
        if m.group(2) is None:
            return Dyadic(int(m.group(1)), 0)
        frac = Fraction(s)
        den = frac.denominator
        if den & (den - 1):
            raise ParseError(f"decimal {text!r} is not a dyadic rational")
        return Dyadic(frac.numerator, -(den.bit_length() - 1))

    # -- predicates and accessors -------------------------------------

    def is_zero(self) -> bool:
        return self.m == 0

    def sign(self) -> int:
        return (self.m > 0) - (self.m < 0)

    def msb(self) -> int:
        """floor(log2(|self|)); undefined for zero."""
        if self.m == 0:
            raise ValueError("msb of zero")
        return self.e + abs(self.m).bit_length() - 1

    # -- exact arithmetic ----------------------------------------------

    def __add__(self, other: "Dyadic") -> "Dyadic":
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        if self.e >= other.e:
            hi, lo = self, other
        else:
            hi, lo = other, self
        return Dyadic((hi.m << (hi.e - lo.e)) + lo.m, lo.e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        return self + (-other)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.m, self.e, normalized=True)

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.m), self.e, normalized=True)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        m = self.m * other.m
        if m == 0:
            return ZERO
        return Dyadic(m, self.e + other.e, normalized=True)

    def scale(self, k: int) -> "Dyadic":
        """Exact multiplication by 2^k."""
        if self.m == 0:
            return self
        return Dyadic(self.m, self.e + k, normalized=True)

    def mul_int(self, n: int) -> "Dyadic":
        return Dyadic(self.m * n, self.e)

    # -- comparison -----------------------------------------------------

    def cmp(self, other: "Dyadic") -> int:
        """-1, 0, or 1 as self <, ==, > other."""
        sa, sb = self.sign(), other.sign()
        if sa != sb:
            return -1 if sa < sb else 1
        if sa == 0:
            return 0
        ma, mb = self.msb(), other.msb()
        if ma != mb:
            cmp_mag = -1 if ma < mb else 1
            return cmp_mag if sa > 0 else -cmp_mag
        diff = self - other
        return diff.sign()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.m == other.m and self.e == other.e

    def __hash__(self) -> int:
        return hash((self.m, self.e))

    def __lt__(self, other: "Dyadic") -> bool:
        return self.cmp(other) < 0

    def __le__(self, other: "Dyadic") -> bool:
        return self.cmp(other) <= 0

    def __gt__(self, other: "Dyadic") -> bool:
        return self.cmp(other) > 0

    def __ge__(self, other: "Dyadic") -> bool:
        return self.cmp(other) >= 0

    # -- rounding --------------------------------------------------------

    def round_to(self, p: int) -> tuple["Dyadic", "Dyadic"]:
        """Round to at most p significant bits, nearest, ties away from zero.

        Returns (rounded, err) with err the exact |rounded - self|, so the
        ball layer can add it to a radius.  err <= 2^(msb - p), i.e. the
        relative error is at most 2^(1-p).
        """
        if p < 1:
            raise ValueError("precision must be >= 1")
        mag = abs(self.m)
        drop = mag.bit_length() - p
        if drop <= 0:
            return self, ZERO
        q, rem = divmod(mag, 1 << drop)
        if rem >= (1 << (drop - 1)):
            q += 1
        err_m = abs((q << drop) - mag)
        rounded = Dyadic(q if self.m > 0 else -q, self.e + drop)
        return rounded, Dyadic(err_m, self.e)

    def round_up(self, p: int) -> "Dyadic":
        """Round a non-negative value up (toward +inf) to p significant bits."""
        if self.m < 0:
            raise ValueError("round_up expects a non-negative value")
        drop = self.m.bit_length() - p
        if drop <= 0:
            return self
        q, rem = divmod(self.m, 1 << drop)
        if rem:
            q += 1
        return Dyadic(q, self.e + drop)

    def round_down(self, p: int) -> "Dyadic":
        """Round a non-negative value down (toward 0) to p significant bits."""
        if self.m < 0:
            raise ValueError("round_down expects a non-negative value")
        drop = self.m.bit_length() - p
        if drop <= 0:
            return self
        return Dyadic(self.m >> drop, self.e + drop)

    # -- integer extraction ----------------------------------------------

    def floor_int(self) -> int:
        if self.e >= 0:
            return self.m << self.e
        return self.m >> -self.e

    def ceil_int(self) -> int:
        if self.e >= 0:
            return self.m << self.e
        return -((-self.m) >> -self.e)

    def nearest_int(self) -> int:
        """Nearest integer, ties away from zero."""
        if self.e >= 0:
            return self.m << self.e
        mag = abs(self.m)
        q = (mag + (1 << (-self.e - 1))) >> -self.e
        return q if self.m > 0 else -q

    # -- conversions -------------------------------------------------------

    def to_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.m << self.e)
        return Fraction(self.m, 1 << -self.e)

    def __float__(self) -> float:
        # Good enough for display/telemetry; not part of any guarantee.
        if self.m == 0:
            return 0.0
        r, _ = self.round_to(53)
        try:
            return math.ldexp(r.m, r.e)
        except OverflowError:
            return math.inf if self.m > 0 else -math.inf

    def __str__(self) -> str:
        return f"{self.m}*2^{self.e}"

    def __repr__(self) -> str:
        return f"Dyadic({self.m}, {self.e})"


ZERO = Dyadic(0, 0, normalized=True)
ONE = Dyadic(1, 0, normalized=True)
TWO = Dyadic(1, 1, normalized=True)
HALF = Dyadic(1, -1, normalized=True)


def pow2(k: int) -> Dyadic:
    """2^k as a dyadic."""
    return Dyadic(1, k, normalized=True)


def dyadic_max(a: Dyadic, b: Dyadic) -> Dyadic:
    return a if a.cmp(b) >= 0 else b


def dyadic_min(a: Dyadic, b: Dyadic) -> Dyadic:
    return a if a.cmp(b) <= 0 else b


def ceil_log2(a: Dyadic) -> int:
    """Smallest t with a <= 2^t, for a > 0."""
    if a.sign() <= 0:
        raise ValueError("ceil_log2 of non-positive value")
    t = a.msb()
    if a.m == 1:  # exactly a power of two (canonical form)
        return t
    return t + 1


def div_nearest(a: Dyadic, b: Dyadic, p: int) -> tuple[Dyadic, Dyadic]:
    """a / b to about p significant bits, with an error bound.

    Returns (q, err) with |a/b - q| <= err <= one ulp of q at p bits.
    """
    if b.m == 0:
        raise ZeroDivisionError("dyadic division by zero")
    if a.m == 0:
        return ZERO, ZERO
    na, nb = abs(a.m), abs(b.m)
    shift = max(0, p + nb.bit_length() - na.bit_length() + 2)
    q, rem = divmod(na << shift, nb)
    exp = a.e - b.e - shift
    sign = 1 if (a.m > 0) == (b.m > 0) else -1
    if rem == 0:
        return Dyadic(sign * q, exp), ZERO
    if 2 * rem >= nb:
        q += 1
    return Dyadic(sign * q, exp), Dyadic(1, exp - 1, normalized=True)


def div_ceil(a: Dyadic, b: Dyadic, p: int) -> Dyadic:
    """Upper bound on a / b with about p significant bits, for a >= 0, b > 0."""
    if b.sign() <= 0:
        raise ValueError("div_ceil needs positive divisor")
    if a.m == 0:
        return ZERO
    if a.sign() < 0:
        raise ValueError("div_ceil needs non-negative dividend")
    shift = max(0, p + b.m.bit_length() - a.m.bit_length() + 2)
    q, rem = divmod(a.m << shift, b.m)
    if rem:
        q += 1
    return Dyadic(q, a.e - b.e - shift)


def sqrt_enclosure(a: Dyadic, p: int) -> tuple[Dyadic, Dyadic]:
    """(lo, hi) with lo <= sqrt(a) <= hi and hi - lo <= one ulp at p bits."""
    if a.sign() < 0:
        raise ValueError("square root of a negative dyadic")
    if a.m == 0:
        return ZERO, ZERO
    shift = max(0, 2 * p + 2 - a.m.bit_length())
    if (a.e - shift) & 1:
        shift += 1
    s = math.isqrt(a.m << shift)
    half_e = (a.e - shift) // 2
    lo = Dyadic(s, half_e)
    hi = Dyadic(s + 1, half_e)
    return lo, hi
