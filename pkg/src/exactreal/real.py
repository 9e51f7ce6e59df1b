"""Lazy exact reals: immutable expression DAGs queried for 2^-n approximations.

A Real never holds a numeric value, only a recipe.  approx(x, n) evaluates
the whole DAG bottom-up in ball arithmetic at one working precision and
restarts at higher precision until the root enclosure is tight enough to
answer: the returned integer a satisfies |x - a * 2^-n| <= 2^-n.

Every node caches the best enclosure found so far; a cached ball is only
ever replaced by a strictly smaller one, so repeated queries sharpen
monotonically and concurrent queries stay safe (at worst they duplicate
work).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from . import balls
from .balls import Ball
from .dyadic import Dyadic, ZERO, ONE, pow2, div_nearest
from .errors import (
    DomainError,
    NotSeparated,
    OracleViolation,
    PrecisionExhausted,
    PromiseViolation,
)

_GUARD_BITS = 32
_CACHE_LOCK = threading.Lock()


@dataclass(frozen=True)
class EvalConfig:
    """Knobs of the precision-restart loop."""

    initial_precision: int = 64
    precision_growth: int = 2
    max_precision: int = 1 << 24

    def __post_init__(self):
        if self.initial_precision < 1:
            raise ValueError("initial_precision must be >= 1")
        if self.precision_growth < 2:
            raise ValueError("precision_growth must be >= 2")
        if self.max_precision < self.initial_precision:
            raise ValueError("max_precision must be >= initial_precision")


DEFAULT_CONFIG = EvalConfig()


@dataclass
class EvalStats:
    """Telemetry from one approx call (for benchmarks and audits)."""

    work_precision: int = 0
    restarts: int = 0
    series_truncation: int = 0


class Real:
    """One node of an immutable expression DAG."""

    __slots__ = ("kind", "children", "payload", "_cache")

    def __init__(self, kind: str, children: tuple["Real", ...] = (), payload=None):
        self.kind = kind
        self.children = children
        self.payload = payload
        self._cache: Ball | None = None

    # cache protocol: replace only by a strictly smaller radius ---------

    def cached_ball(self) -> Ball | None:
        return self._cache

    def _offer_cache(self, ball: Ball) -> None:
        with _CACHE_LOCK:
            old = self._cache
            if old is None or ball.radius < old.radius:
                self._cache = ball

    # sugar --------------------------------------------------------------

    def __add__(self, other: "Real") -> "Real":
        return add(self, _coerce(other))

    def __radd__(self, other) -> "Real":
        return add(_coerce(other), self)

    def __sub__(self, other) -> "Real":
        return sub(self, _coerce(other))

    def __rsub__(self, other) -> "Real":
        return sub(_coerce(other), self)

    def __mul__(self, other) -> "Real":
        return mul(self, _coerce(other))

    def __rmul__(self, other) -> "Real":
        return mul(_coerce(other), self)

    def __truediv__(self, other) -> "Real":
        return mul(self, recip(_coerce(other)))

    def __neg__(self) -> "Real":
        return neg(self)

    def __repr__(self) -> str:
        return f"<Real {self.kind} at {id(self):#x}>"


def _coerce(value) -> Real:
    if isinstance(value, Real):
        return value
    if isinstance(value, int):
        return const(Dyadic(value))
    if isinstance(value, Dyadic):
        return const(value)
    if isinstance(value, Fraction):
        return from_fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as a Real")


# -- constructors ---------------------------------------------------------


def const(value: Dyadic | int | float) -> Real:
    if isinstance(value, int):
        value = Dyadic(value)
    elif isinstance(value, float):
        value = Dyadic.from_float(value)
    return Real("const", payload=value)


def rational(num: int, den: int) -> Real:
    """The exact rational num/den."""
    if den == 0:
        raise ZeroDivisionError("rational with zero denominator")
    fr = Fraction(num, den)
    den = fr.denominator
    if den & (den - 1) == 0:
        return const(Dyadic(fr.numerator, -(den.bit_length() - 1)))
    return Real("rational", payload=(fr.numerator, fr.denominator))


def from_fraction(fr: Fraction) -> Real:
    return rational(fr.numerator, fr.denominator)


def from_oracle(callback: Callable[[int], int], name: str = "oracle") -> Real:
    """Wrap a user approximation callback as a leaf.

    The callback must honour the approximation protocol: for queried n it
    returns an integer a with |x - a * 2^-n| <= 2^-n.  Consistency is
    checked best-effort: enclosures from different queries must overlap.
    """
    return Real("leaf_oracle", payload=(callback, name))


def neg(x: Real) -> Real:
    return Real("neg", (x,))


def add(x: Real, y: Real) -> Real:
    return Real("add", (x, y))


def sub(x: Real, y: Real) -> Real:
    return Real("sub", (x, y))


def mul(x: Real, y: Real) -> Real:
    return Real("mul", (x, y))


def recip(x: Real) -> Real:
    """Adaptive reciprocal: searches for separation from 0 by restarting.

    May never terminate for a value indistinguishable from 0; the
    precision cap turns that into PrecisionExhausted.  Prefer
    recip_enriched when a lower-bound exponent is known.
    """
    return Real("recip", (x,))


def recip_enriched(x: Real, k: int) -> Real:
    """Reciprocal under the promise x >= 2^-k.

    Evaluation starts at working precision >= k + n + guard bits so
    separation succeeds on the first pass whenever the promise holds.
    A promise discovered false (enclosure entirely below 2^-(k+1))
    raises PromiseViolation; the check is best-effort.
    """
    if k < 0:
        raise ValueError("enrichment exponent must be >= 0")
    return Real("recip_enriched", (x,), payload=k)


def sqrt(x: Real) -> Real:
    return Real("sqrt", (x,))


def exp(x: Real) -> Real:
    return Real("exp", (x,))


def hexp(x: Real) -> Real:
    """1/(1 - ln x) on [0, 1], with hexp(0) = 0."""
    return Real("hexp", (x,))


def limit(sequence, rate: Callable[[int], int]) -> Real:
    """Limit of sequence.at(j) under the promise |x - x_j| <= 2^-rate(j).

    rate must be non-decreasing and unbounded.
    """
    return Real("limit", payload=(sequence, rate))


# series nodes are built by the seq module; the payload must provide
# domain_radius, truncation_degree(p) -> int, tail_bound(p) -> Dyadic,
# and coefficient(j) -> Real.


def series_node(plan, x: Real) -> Real:
    return Real("series", (x,), payload=plan)


# -- evaluation ------------------------------------------------------------


def _iter_nodes(root: Real) -> Iterable[Real]:
    seen: set[int] = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(node.children)


def _precision_floor(root: Real, n: int) -> int:
    """Start precision required by enrichment promises in the DAG."""
    floor = 0
    for node in _iter_nodes(root):
        if node.kind == "recip_enriched":
            floor = max(floor, node.payload + n + _GUARD_BITS)
    return floor


def _eval_into(memo: dict[int, Ball], root: Real, p: int, stats: EvalStats) -> Ball:
    """Evaluate root at working precision p, reusing memo; iterative."""
    reuse_bound = -(p + 2)
    stack = [root]
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        cached = node._cache
        if cached is not None and cached.radius_le_pow2(reuse_bound):
            memo[id(node)] = cached
            stack.pop()
            continue
        pending = [c for c in node.children if id(c) not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        ball = _step(node, memo, p, stats)
        memo[id(node)] = ball
        node._offer_cache(ball)
    return memo[id(root)]


def _step(node: Real, memo: dict[int, Ball], p: int, stats: EvalStats) -> Ball:
    kind = node.kind
    kids = node.children
    if kind == "const":
        c, err = node.payload.round_to(p)
        return Ball(c, err)
    if kind == "rational":
        num, den = node.payload
        c, err = div_nearest(Dyadic(num), Dyadic(den), p)
        return Ball(c, err)
    if kind == "leaf_oracle":
        callback, name = node.payload
        a = callback(p)
        if not isinstance(a, int):
            raise OracleViolation(f"oracle {name!r} returned non-integer {a!r}")
        ball = Ball(Dyadic(a, -p), pow2(-p))
        old = node._cache
        if old is not None and not ball.intersects(old):
            raise OracleViolation(
                f"oracle {name!r} returned disjoint enclosures across precisions"
            )
        return ball
    if kind == "neg":
        return balls.ball_neg(memo[id(kids[0])])
    if kind == "add":
        return balls.ball_add(memo[id(kids[0])], memo[id(kids[1])], p)
    if kind == "sub":
        return balls.ball_sub(memo[id(kids[0])], memo[id(kids[1])], p)
    if kind == "mul":
        return balls.ball_mul(memo[id(kids[0])], memo[id(kids[1])], p)
    if kind == "recip":
        return balls.ball_recip(memo[id(kids[0])], p)
    if kind == "recip_enriched":
        k = node.payload
        child = memo[id(kids[0])]
        if child.upper() < pow2(-(k + 1)):
            raise PromiseViolation(
                f"reciprocal promise x >= 2^-{k} is false: enclosure below 2^-{k + 1}"
            )
        return balls.ball_recip(child, p)
    if kind == "sqrt":
        return balls.ball_sqrt(memo[id(kids[0])], p)
    if kind == "exp":
        return balls.ball_exp(memo[id(kids[0])], p)
    if kind == "hexp":
        return balls.ball_hexp(memo[id(kids[0])], p)
    if kind == "series":
        return _step_series(node, memo, p, stats)
    if kind == "limit":
        sequence, rate = node.payload
        j = 0
        while rate(j) < p + 1:
            j = 2 * j + 1
            if j > 1 << 32:
                raise PrecisionExhausted("limit rate never reached the target")
        inner = _eval_into(memo, sequence.at(j), p, stats)
        return Ball(inner.center, balls.trim_radius(inner.radius + pow2(-rate(j))))
    raise AssertionError(f"unknown node kind {kind!r}")


def _step_series(node: Real, memo: dict[int, Ball], p: int, stats: EvalStats) -> Ball:
    plan = node.payload
    xball = memo[id(node.children[0])]
    if abs(xball.center) - xball.radius > plan.domain_radius:
        raise DomainError("series argument provably outside the certified radius")
    n_trunc = plan.truncation_degree(p)
    stats.series_truncation = max(stats.series_truncation, n_trunc)
    acc = Ball(ZERO, ZERO)
    for j in range(n_trunc, -1, -1):
        cj = _eval_into(memo, plan.coefficient(j), p, stats)
        acc = balls.ball_add(balls.ball_mul(acc, xball, p), cj, p)
    return Ball(acc.center, balls.trim_radius(acc.radius + plan.tail_bound(p)))


def _restart_loop(x: Real, target_exp: int, cfg: EvalConfig, floor: int, stats: EvalStats) -> Ball:
    """Evaluate until the root radius is <= 2^target_exp."""
    p = max(cfg.initial_precision, -target_exp + _GUARD_BITS, floor)
    last_error: NotSeparated | None = None
    while p <= cfg.max_precision:
        stats.work_precision = p
        memo: dict[int, Ball] = {}
        try:
            ball = _eval_into(memo, x, p, stats)
        except NotSeparated as exc:
            last_error = exc
        else:
            if ball.radius_le_pow2(target_exp):
                return ball
        stats.restarts += 1
        p *= cfg.precision_growth
    detail = f" (last failure: {last_error})" if last_error else ""
    raise PrecisionExhausted(
        f"working precision would exceed {cfg.max_precision} bits{detail}"
    )


def approx_with_stats(
    x: Real, n: int, cfg: EvalConfig = DEFAULT_CONFIG
) -> tuple[int, EvalStats]:
    """approx plus evaluation telemetry."""
    if n < 0:
        raise ValueError("precision must be >= 0")
    stats = EvalStats()
    ball = _restart_loop(x, -(n + 1), cfg, _precision_floor(x, n), stats)
    scaled = ball.center.scale(n)
    return scaled.nearest_int(), stats


def approx(x: Real, n: int, cfg: EvalConfig = DEFAULT_CONFIG) -> int:
    """Integer a with |x - a * 2^-n| <= 2^-n.

    The root enclosure is tightened to radius <= 2^-(n+1) and the center
    rounded to the grid, so the two half-errors sum to the contract bound.
    The answer may legitimately differ between calls for values on grid
    boundaries (multivalued output).
    """
    return approx_with_stats(x, n, cfg)[0]


def enclosure(x: Real, n: int, cfg: EvalConfig = DEFAULT_CONFIG) -> Ball:
    """A ball around x with radius <= 2^-n."""
    stats = EvalStats()
    return _restart_loop(x, -n, cfg, _precision_floor(x, n), stats)


def soft_compare(x: Real, y: Real, n: int, cfg: EvalConfig = DEFAULT_CONFIG) -> bool:
    """Multivalued comparison at resolution 2^-n.

    True implies x < y + 2^-n; False implies y <= x + 2^-n.  Within the
    tie region |x - y| <= 2^-n either answer is legal and the one given
    may depend on evaluation history.  Total for every pair of arguments
    whose difference can be evaluated at precision n + 2; it never
    escalates precision beyond what that target needs.
    """
    stats = EvalStats()
    d = sub(x, y)
    ball = _restart_loop(d, -(n + 2), cfg, _precision_floor(d, n + 2), stats)
    return ball.center.sign() <= 0


_LOG2_10_NUM, _LOG2_10_DEN = 33220, 10000  # 3.3220 >= log2(10)


def to_decimal(x: Real, digits: int, cfg: EvalConfig = DEFAULT_CONFIG) -> str:
    """Decimal string with |x - value| <= 10^-digits.

    Not correctly rounded: the guarantee is the absolute error bound only.
    """
    if digits < 1:
        raise ValueError("digits must be >= 1")
    n = -(-digits * _LOG2_10_NUM // _LOG2_10_DEN) + 2
    a = approx(x, n, cfg)
    scaled = a * 10**digits
    q, rem = divmod(abs(scaled), 1 << n)
    if 2 * rem >= (1 << n):
        q += 1
    sign = "-" if (a < 0 and q > 0) else ""
    whole, frac = divmod(q, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"
