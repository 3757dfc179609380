"""Exact rational arithmetic helpers.

Every value exposed by the public API is a `fractions.Fraction` (canonical
form: reduced, positive denominator).  Hot loops run on `gmpy2.mpq` when it
is installed -- identical semantics, several times faster -- and fall back
to `Fraction` otherwise.  Rationals serialize as "p/q" strings.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ValidationError

try:
    from gmpy2 import mpq as RAT
except ImportError:  # pragma: no cover - gmpy2 is normally available
    RAT = Fraction

R_ZERO = RAT(0)
R_ONE = RAT(1)

_RATIONAL_RE = re.compile(r"^(-?\d+)(?:/([1-9]\d*))?$")


def to_fraction(value) -> Fraction:
    """Convert an int, Fraction, or gmpy2.mpq to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(int(value.numerator), int(value.denominator))


def format_rational(value) -> str:
    """Render a rational as "p/q" (the denominator is always written)."""
    f = to_fraction(value)
    return f"{f.numerator}/{f.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" (or a bare integer "p") into a Fraction.

    Decimal notation is rejected on purpose: it cannot represent the exact
    values this toolkit traffics in.
    """
    match = _RATIONAL_RE.match(text.strip())
    if match is None:
        raise ValidationError(
            f"not a rational: {text!r} (expected 'p/q' or an integer)"
        )
    num, den = match.groups()
    return Fraction(int(num), int(den) if den else 1)
