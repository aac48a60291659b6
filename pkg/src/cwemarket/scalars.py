"""Exact rational scalars.

All money and value quantities in this package are `fractions.Fraction`
instances; nothing here ever touches floating point.  Scalars serialize
as "p/q" strings (or bare integers) in JSON files.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Optional, Union

from .errors import InputError

Scalar = Fraction

RawScalar = Union[int, str, Fraction]


def parse_scalar(raw: RawScalar) -> Fraction:
    """Parse a scalar from its serialized form.

    Accepts ints and "p/q" / "p" strings.  Floats are rejected: they
    cannot be trusted to round-trip exactly.
    """
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, bool):
        raise InputError(f"not a scalar: {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if isinstance(raw, float):
        raise InputError(
            f"float scalar {raw!r} rejected; use an exact \"p/q\" string"
        )
    if isinstance(raw, str):
        try:
            return Fraction(raw.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad scalar {raw!r}: {exc}") from None
    raise InputError(f"bad scalar of type {type(raw).__name__}: {raw!r}")


def format_scalar(x: Fraction) -> str:
    return str(Fraction(x))


def rational_gcd(a: Fraction, b: Fraction) -> Fraction:
    # gcd(p1/q1, p2/q2) = gcd(p1, p2) / lcm(q1, q2) for reduced fractions
    return Fraction(gcd(a.numerator, b.numerator), lcm(a.denominator, b.denominator))


def common_granularity(values: Iterable[Fraction]) -> Optional[Fraction]:
    """Greatest rational g such that every nonzero input is an integer
    multiple of g.  None when there is no nonzero input.
    """
    g: Optional[Fraction] = None
    for v in values:
        if v == 0:
            continue
        v = abs(v)
        g = v if g is None else rational_gcd(g, v)
    return g
