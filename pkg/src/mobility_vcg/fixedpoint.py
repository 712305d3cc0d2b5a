"""Exact money/time arithmetic on a 6-digit fixed-point grid.

Public values are ``Decimal`` quantized to ``QUANTUM``. The solvers work on
integer micro-units (``to_micro``) so comparisons never drift.
"""

from __future__ import annotations

from decimal import ROUND_HALF_EVEN, Decimal, InvalidOperation
from typing import Union

PLACES = 6
SCALE = 10**PLACES
QUANTUM = Decimal(1).scaleb(-PLACES)
ZERO = Decimal(0).quantize(QUANTUM)

Number = Union[int, str, Decimal]


class PrecisionError(ValueError):
    """Raised when a value carries more than ``PLACES`` fractional digits."""


def D(value: Number) -> Decimal:
    """Convert to a quantized ``Decimal``, rejecting excess precision.

    Floats are refused outright: ``Decimal(0.1)`` is not 0.1.
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"refusing inexact value {value!r}; pass a str or Decimal")
    try:
        d = value if isinstance(value, Decimal) else Decimal(str(value).strip())
    except InvalidOperation as exc:
        raise ValueError(f"not a decimal number: {value!r}") from exc
    if not d.is_finite():
        raise ValueError(f"not a finite number: {value!r}")
    q = d.quantize(QUANTUM)
    if q != d:
        raise PrecisionError(f"{value!r} has more than {PLACES} fractional digits")
    return q


def round_q(value: Decimal) -> Decimal:
    """Round an exact product back onto the grid (banker's rounding, monotone)."""
    return value.quantize(QUANTUM, rounding=ROUND_HALF_EVEN)


def to_micro(value: Decimal) -> int:
    return int(value.scaleb(PLACES))


def from_micro(micro: int) -> Decimal:
    return Decimal(micro).scaleb(-PLACES).quantize(QUANTUM)


def fmt(value: Decimal) -> str:
    """Canonical string form used in files (always ``PLACES`` digits)."""
    return f"{value.quantize(QUANTUM):f}"
