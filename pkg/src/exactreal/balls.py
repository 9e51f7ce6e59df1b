"""Ball arithmetic: (center, radius) enclosures at a working precision.

Every kernel takes valid enclosures of its operands and returns a valid
enclosure of the exact image: centers are rounded to p significant bits
and all rounding error is added to the radius.  Radii are kept short
(RADIUS_BITS significant bits, rounded up) so they never dominate the
cost of the computation they account for.
"""

from __future__ import annotations

import threading

from .dyadic import (
    Dyadic,
    ZERO,
    ONE,
    HALF,
    pow2,
    div_ceil,
    div_nearest,
    dyadic_max,
    dyadic_min,
    sqrt_enclosure,
)
from .errors import DomainError, NotSeparated

RADIUS_BITS = 24


class Ball:
    """Midpoint/radius enclosure of one exact real value."""

    __slots__ = ("center", "radius")

    def __init__(self, center: Dyadic, radius: Dyadic = ZERO):
        if radius.sign() < 0:
            raise ValueError("ball radius must be non-negative")
        self.center = center
        self.radius = radius

    def lower(self) -> Dyadic:
        return self.center - self.radius

    def upper(self) -> Dyadic:
        return self.center + self.radius

    def contains(self, x: Dyadic) -> bool:
        return abs(x - self.center) <= self.radius

    def intersects(self, other: "Ball") -> bool:
        return abs(self.center - other.center) <= self.radius + other.radius

    def radius_le_pow2(self, k: int) -> bool:
        r = self.radius
        return r.m == 0 or (r.m > 0 and r.msb() < k) or r == pow2(k)

    def __repr__(self) -> str:
        return f"Ball({self.center!r}, {self.radius!r})"


def _trim(radius: Dyadic) -> Dyadic:
    return radius.round_up(RADIUS_BITS)


trim_radius = _trim


def _make(center: Dyadic, radius: Dyadic, p: int) -> Ball:
    c, err = center.round_to(p)
    return Ball(c, _trim(radius + err))


def from_endpoints(lo: Dyadic, hi: Dyadic, p: int) -> Ball:
    """Ball enclosing the interval [lo, hi]."""
    center = (lo + hi).scale(-1)
    radius = (hi - lo).scale(-1)
    return _make(center, radius, p)


def ball_add(a: Ball, b: Ball, p: int) -> Ball:
    return _make(a.center + b.center, a.radius + b.radius, p)


def ball_sub(a: Ball, b: Ball, p: int) -> Ball:
    return _make(a.center - b.center, a.radius + b.radius, p)


def ball_neg(a: Ball) -> Ball:
    return Ball(-a.center, a.radius)


def ball_mul(a: Ball, b: Ball, p: int) -> Ball:
    center = a.center * b.center
    radius = abs(a.center) * b.radius + abs(b.center) * a.radius + a.radius * b.radius
    return _make(center, radius, p)


def ball_mul_int(a: Ball, n: int, p: int) -> Ball:
    return _make(a.center.mul_int(n), a.radius.mul_int(abs(n)), p)


def ball_div_int(a: Ball, n: int, p: int) -> Ball:
    if n == 0:
        raise ZeroDivisionError("ball division by zero integer")
    c, err = div_nearest(a.center, Dyadic(n), p)
    r = div_ceil(a.radius, Dyadic(abs(n)), RADIUS_BITS) if a.radius.m else ZERO
    return Ball(c, _trim(r + err))


def ball_recip(a: Ball, p: int) -> Ball:
    """1/x for every x in the ball; requires the ball to avoid 0."""
    mag = abs(a.center)
    if mag <= a.radius:
        raise NotSeparated("reciprocal of an enclosure containing zero")
    c, err = div_nearest(ONE, a.center, p)
    if a.radius.m:
        prop = div_ceil(a.radius, mag * (mag - a.radius), RADIUS_BITS)
    else:
        prop = ZERO
    return Ball(c, _trim(prop + err))


def ball_sqrt(a: Ball, p: int) -> Ball:
    """sqrt over the ball; the represented value is promised >= 0.

    The low endpoint is clamped at 0, so enclosures that merely dip
    below zero stay legal; an enclosure entirely below zero is a
    decisive domain violation.
    """
    hi = a.upper()
    if hi.sign() < 0:
        raise DomainError("square root of an enclosure entirely below zero")
    lo = dyadic_max(ZERO, a.lower())
    slo, _ = sqrt_enclosure(lo, p + 2)
    _, shi = sqrt_enclosure(hi, p + 2)
    return from_endpoints(slo, shi, p)


def ball_pow_int(a: Ball, k: int, p: int) -> Ball:
    """a^k for k >= 1 by binary exponentiation."""
    result: Ball | None = None
    base = a
    n = k
    while n:
        if n & 1:
            result = base if result is None else ball_mul(result, base, p)
        n >>= 1
        if n:
            base = ball_mul(base, base, p)
    assert result is not None
    return result


# -- cached constants ---------------------------------------------------

_const_lock = threading.Lock()
_e_cache: dict[int, Ball] = {}
_ln2_cache: dict[int, Ball] = {}


def e_ball(p: int) -> Ball:
    """Enclosure of e = exp(1) with radius <= 2^-p."""
    with _const_lock:
        cached = _e_cache.get(p)
    if cached is not None:
        return cached
    work = p + 16
    total = ZERO
    err = ZERO
    fact = 1
    j = 0
    # sum 1/j! until the tail 2/(N+1)! drops below 2^-(p+2)
    while True:
        term, terr = div_nearest(ONE, Dyadic(fact), work)
        total = total + term
        err = err + terr
        j += 1
        fact *= j
        if fact.bit_length() > p + 4 and j >= 2:
            break
    tail = div_ceil(Dyadic(2), Dyadic(fact), RADIUS_BITS)
    ball = _make(total, err + tail, work)
    with _const_lock:
        _e_cache[p] = ball
    return ball


def ln2_ball(p: int) -> Ball:
    """Enclosure of ln 2 = 2*atanh(1/3) with radius <= 2^-p."""
    with _const_lock:
        cached = _ln2_cache.get(p)
    if cached is not None:
        return cached
    work = p + 16
    z, zerr = div_nearest(ONE, Dyadic(3), work)
    ball = _atanh_ball(Ball(z, zerr), p, work)
    ball = ball_mul_int(ball, 2, work)
    with _const_lock:
        _ln2_cache[p] = ball
    return ball


def _atanh_ball(z: Ball, p: int, work: int) -> Ball:
    """atanh over a ball with |z| <= 0.34, by the odd power series."""
    z2 = ball_mul(z, z, work)
    power = z
    acc = z
    j = 1
    # upper bound on |z|, rounded up coarsely, drives the tail bound
    zhi = _trim(abs(z.center) + z.radius)
    power_hi = zhi
    threshold = pow2(-(p + 4))
    while True:
        power = ball_mul(power, z2, work)
        acc = ball_add(acc, ball_div_int(power, 2 * j + 1, work), work)
        power_hi = _trim(power_hi * zhi * zhi)
        j += 1
        # remaining tail <= power_hi * 2 for |z| <= 0.34
        if power_hi.scale(1) <= threshold:
            break
    return Ball(acc.center, _trim(acc.radius + power_hi.scale(1)))


def ln_point(t: Dyadic, p: int) -> Ball:
    """Enclosure of ln t for an exact dyadic t > 0."""
    if t.sign() <= 0:
        raise DomainError("logarithm of a non-positive point")
    # t = s * 2^g with s in [1, 2)
    g = t.msb()
    s = t.scale(-g)
    work = p + 16 + max(0, abs(g).bit_length())
    num = s - ONE
    if num.m == 0:
        ln_s: Ball = Ball(ZERO, ZERO)
    else:
        z, zerr = div_nearest(num, s + ONE, work)
        ln_s = ball_mul_int(_atanh_ball(Ball(z, zerr), work - 8, work), 2, work)
    if g == 0:
        return ln_s
    scaled = ball_mul_int(ln2_ball(work - 8), g, work)
    return ball_add(ln_s, scaled, work)


# -- exponential --------------------------------------------------------

_LOG2E_NUM, _LOG2E_DEN = 13, 9  # 13/9 = 1.444... >= log2(e)


def _exp_crude_upper_exponent(w: Dyadic) -> int:
    """Integer E with e^w <= 2^E, for any dyadic w."""
    if w.sign() <= 0:
        return 0
    scaled = div_ceil(w.mul_int(_LOG2E_NUM), Dyadic(_LOG2E_DEN), 32)
    return scaled.ceil_int()


def _exp_taylor(v: Ball, p: int) -> Ball:
    """exp over a ball by Taylor series with a rigorous tail bound."""
    bhi = _trim(abs(v.center) + v.radius)
    # pick N with 2 * bhi^(N+1) / (N+1)! <= 2^-(p+2), requiring N >= 2*bhi
    threshold = pow2(-(p + 2))
    n_min = max(1, (bhi.ceil_int() * 2) if bhi.sign() > 0 else 1)
    term = ONE
    n = 0
    fact = 1
    while True:
        n += 1
        fact *= n
        term = div_ceil(term * bhi, Dyadic(n), RADIUS_BITS)
        if n >= n_min and term.scale(1) <= threshold:
            break
    tail = term.scale(1)
    # Horner over j = n-1 .. 0 of sum v^j / j!
    coeff_den = fact // n  # (n-1)!
    acc = Ball(ZERO, ZERO)
    for j in range(n - 1, -1, -1):
        cj, cj_err = div_nearest(ONE, Dyadic(coeff_den), p + 8)
        acc = ball_add(ball_mul(acc, v, p + 8), Ball(cj, cj_err), p + 8)
        if j:
            coeff_den //= j
    return Ball(acc.center, _trim(acc.radius + tail))


def ball_exp(a: Ball, p: int) -> Ball:
    """exp over a ball: argument reduction x = k + u, Taylor on u."""
    if a.radius > Dyadic(1, -2):
        # wide first-pass enclosure: a crude but valid bound is cheaper
        # than a long Taylor sum the restart loop will discard anyway
        hi_exp = _exp_crude_upper_exponent(a.upper())
        half = pow2(hi_exp - 1)
        return Ball(half, half)
    k = a.center.nearest_int()
    u = a.center - Dyadic(k)
    work = p + 8 + 2 * max(1, abs(k).bit_length())
    t = _exp_taylor(Ball(u, a.radius), work)
    if k == 0:
        out = t
    else:
        power = ball_pow_int(e_ball(work), abs(k), work)
        if k < 0:
            power = ball_recip(power, work)
        out = ball_mul(t, power, work)
    return _make(out.center, out.radius, p)


# -- the explicitly hard function 1 / (1 - ln x) on [0, 1] ---------------


def hexp_point(t: Dyadic, p: int) -> Ball:
    """Enclosure of 1/(1 - ln t) for an exact dyadic t in (0, 1]."""
    lnt = ln_point(t, p + 6)
    den = ball_sub(Ball(ONE, ZERO), lnt, p + 6)
    return ball_recip(den, p + 2)


def ball_hexp(a: Ball, p: int) -> Ball:
    """The hard exponential-time function over a ball.

    Total on [0, 1]: increasing, value 0 at 0, so an enclosure that
    straddles 0 maps to [0, f(upper)].  Values above 1 are impossible by
    the domain promise; the upper endpoint is clamped.  Only an
    enclosure entirely outside [0, 1] is a domain violation.
    """
    lo = a.lower()
    hi = a.upper()
    if lo > ONE:
        raise DomainError("hexp argument enclosure entirely above 1")
    if hi.sign() < 0:
        raise DomainError("hexp argument enclosure entirely below 0")
    hi_eff = dyadic_min(hi, ONE)
    lo_eff = dyadic_max(lo, ZERO)
    if hi_eff.m == 0:
        return Ball(ZERO, ZERO)
    upper = hexp_point(hi_eff, p + 2).upper()
    if lo_eff.m == 0:
        return from_endpoints(ZERO, upper, p)
    lower = hexp_point(lo_eff, p + 2).lower()
    if lower.sign() < 0:
        lower = ZERO
    return from_endpoints(lower, upper, p)
