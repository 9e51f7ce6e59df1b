"""Error kinds shared across the library.

The kinds are deliberately distinct so callers can tell user error
(broken promises, bad oracles, malformed input) from resource
exhaustion (precision caps, grid caps) without string matching.
"""

from __future__ import annotations


class ExactRealError(Exception):
    """Base class for all library errors."""

    kind = "error"


class DomainError(ExactRealError):
    """Input is decisively outside the domain of the operation."""

    kind = "domain"


class NotSeparated(ExactRealError):
    """An enclosure straddles a forbidden point (e.g. 0 for reciprocal).

    Internal control flow: the restart loop catches this and retries at
    higher working precision.  It only escapes as PrecisionExhausted.
    """

    kind = "not_separated"


class PrecisionExhausted(ExactRealError):
    """Working precision would exceed the configured cap."""

    kind = "precision_exhausted"


class PromiseViolation(ExactRealError):
    """A discrete enrichment promise was discovered to be false."""

    kind = "promise_violation"


class OracleViolation(ExactRealError):
    """A user-supplied approximation callback returned inconsistent data."""

    kind = "oracle_violation"


class GridExplosion(ExactRealError):
    """A sampling grid exceeded its size cap.

    Expected behaviour for maximum/integral queries at high precision;
    this is the observable face of their exponential worst-case cost.
    """

    kind = "grid_explosion"


class StepExplosion(ExactRealError):
    """The ODE solver's step count exceeded its cap."""

    kind = "step_explosion"


class AuditFailure(ExactRealError):
    """A registered operation exceeded its declared discrete-output bound."""

    kind = "audit_failure"


class CapExceeded(ExactRealError):
    """A resource cap (step count, projected memory) refused a request."""

    kind = "cap_exceeded"


class ExponentOverflow(ExactRealError):
    """A dyadic exponent left the machine-width range; fatal configuration error."""

    kind = "exponent_overflow"


class ParseError(ExactRealError):
    """Expression or number syntax error, with a byte offset when known."""

    kind = "parse"

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset

    def __str__(self) -> str:
        base = super().__str__()
        if self.offset is not None:
            return f"{base} (at offset {self.offset})"
        return base
