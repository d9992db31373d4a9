"""Numeric formatting helpers.

All rounding in the toolkit is round-half-up, applied to the shortest
decimal representation of the value (``repr``), not to its raw binary
expansion. Keeping the rule in one place lets CSV cells, percent tables
and console output agree with each other.
"""

from __future__ import annotations

from decimal import ROUND_HALF_UP, Decimal

_SIX_PLACES = Decimal("0.000001")


def round_half_up(value: float, digits: int = 0) -> float:
    """Round ``value`` to ``digits`` decimal places, halves away from zero."""
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def round_count(value: float) -> int:
    """Round a nonnegative real to the nearest integer, halves up."""
    return int(Decimal(repr(value)).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def format_number(value: float) -> str:
    """Render a finite real with at most 6 fractional digits, no exponent.

    Trailing zeros (and a bare decimal point) are trimmed, so integral
    values come out as plain integers.
    """
    d = Decimal(repr(value)).quantize(_SIX_PLACES, rounding=ROUND_HALF_UP)
    text = format(d, "f")
    if "." in text:
        text = text.rstrip("0").rstrip(".")
    if text in ("", "-0"):
        return "0"
    return text


def format_fixed(value: float, digits: int) -> str:
    """Render with exactly ``digits`` decimal places, halves up."""
    q = Decimal(1).scaleb(-digits)
    return format(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP), "f")


def percent_str(numerator: int, denominator: int) -> str:
    """Exact percentage of two counts, two decimals, trailing ``%``.

    A zero denominator renders as ``0.00%`` so empty table columns stay
    printable.
    """
    if numerator < 0 or denominator < 0:
        raise ValueError("percent_str takes nonnegative counts")
    if denominator == 0:
        return "0.00%"
    pct = (Decimal(numerator) * 100) / Decimal(denominator)
    return format(pct.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP), "f") + "%"
