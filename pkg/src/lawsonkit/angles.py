"""Exact angles stored as rational multiples of pi.

Every angle produced by the lattice is (p/q)*pi for small integers p, q.
Keeping the multiple as a Fraction makes wraparound identities exact
(phi + pi flips a point, phi + 2*pi is the same point) and lets circles and
spheres be deduplicated by value instead of by float comparison.
"""

from __future__ import annotations

import math
from fractions import Fraction


class Angle:
    """(times_pi) * pi with times_pi an exact Fraction."""

    __slots__ = ("times_pi",)

    def __init__(self, times_pi):
        object.__setattr__(self, "times_pi", Fraction(times_pi))

    def __setattr__(self, name, value):
        raise AttributeError("Angle is immutable")

    @property
    def radians(self) -> float:
        return float(self.times_pi) * math.pi

    def cos(self) -> float:
        return math.cos(self.reduced(2).radians)

    def sin(self) -> float:
        return math.sin(self.reduced(2).radians)

    def reduced(self, period) -> "Angle":
        """Representative in [0, period*pi)."""
        return Angle(self.times_pi % Fraction(period))

    def key(self, period) -> Fraction:
        """Exact dedup key for identification modulo period*pi."""
        return self.times_pi % Fraction(period)

    def __add__(self, other):
        return Angle(self.times_pi + _times_pi(other))

    def __sub__(self, other):
        return Angle(self.times_pi - _times_pi(other))

    def __neg__(self):
        return Angle(-self.times_pi)

    def __mul__(self, scalar):
        return Angle(self.times_pi * Fraction(scalar))

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, Angle) and self.times_pi == other.times_pi

    def __hash__(self):
        return hash(("Angle", self.times_pi))

    def __repr__(self):
        return f"Angle({self.times_pi!s}*pi)"

    def label(self) -> str:
        """Serializable exact form, e.g. '5/6' for (5/6)*pi."""
        return str(self.times_pi)


def _times_pi(x) -> Fraction:
    if isinstance(x, Angle):
        return x.times_pi
    return Fraction(x)


def half_integer(x) -> Fraction:
    """Coerce an index from the half-integer grid (1/2)Z to an exact Fraction.

    Accepts ints, Fractions and floats that are exactly representable on the
    grid; anything else is an error rather than a silent rounding.
    """
    f = Fraction(x).limit_denominator(2) if isinstance(x, float) else Fraction(x)
    if isinstance(x, float) and abs(f - Fraction(x)) > 0:
        raise ValueError(f"index {x!r} is not on the half-integer grid")
    if f.denominator not in (1, 2):
        raise ValueError(f"index {x!r} is not on the half-integer grid")
    return f
