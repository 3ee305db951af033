"""Exact bound arithmetic for temporal constraints.

Finite values are ``fractions.Fraction`` (no floating-point drift between
propagation and replay); the infinities are the float sentinels, which
compare exactly against any Fraction. ``add`` guards the one combination
that would produce a NaN.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

Bound = Union[Fraction, float]

INF: Bound = float("inf")
NEG_INF: Bound = float("-inf")


def is_finite(b: Bound) -> bool:
    return b != INF and b != NEG_INF


def fr(value) -> Bound:
    """Coerce a JSON/CLI value into a Bound.

    Accepts int, Fraction, strings like "8", "7/2", "inf", "-inf", and
    floats (converted via their decimal repr, so 3.5 -> 7/2, 0.1 -> 1/10).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError(f"not a temporal value: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if value == INF:
            return INF
        if value == NEG_INF:
            return NEG_INF
        return Fraction(str(value))
    if isinstance(value, str):
        text = value.strip()
        if text in ("inf", "+inf", "Infinity"):
            return INF
        if text in ("-inf", "-Infinity"):
            return NEG_INF
        return Fraction(text)
    raise ValueError(f"not a temporal value: {value!r}")


def add(a: Bound, b: Bound) -> Bound:
    """Exact a + b; +inf absorbs finite values, -inf + +inf is rejected."""
    if a == INF or b == INF:
        if a == NEG_INF or b == NEG_INF:
            raise ArithmeticError("inf + -inf")
        return INF
    if a == NEG_INF or b == NEG_INF:
        return NEG_INF
    return a + b


def neg(a: Bound) -> Bound:
    if a == INF:
        return NEG_INF
    if a == NEG_INF:
        return INF
    return -a


def fmt(b: Bound) -> str:
    """Canonical text form used in every JSON surface: "8", "7/2", "inf"."""
    if b == INF:
        return "inf"
    if b == NEG_INF:
        return "-inf"
    return str(b)
