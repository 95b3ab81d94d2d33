"""Scalar modes and projective coordinates on the compactified plane.

Every quantity in the package lives in one of three scalar modes:

* ``double``   -- hardware floats,
* ``bigfloat`` -- mpmath floats with a configurable mantissa width,
* ``rational`` -- exact ``fractions.Fraction`` arithmetic.

Each axis of the compactified plane (R u {oo}) x (R u {oo}) is stored as a
homogeneous pair (num : den).  Infinity is the single point (1 : 0); the map
permutes the lines at infinity, so arithmetic there has to be first class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

HALF_PI = math.pi / 2.0


class ScalarContext:
    """Factory and policy object for one scalar mode.

    ``bits`` is the mantissa width: 53 for doubles, caller-chosen for
    bigfloat, and irrelevant (infinite) for rationals.  Bigfloat contexts own
    a cloned mpmath context so two widths never silently mix.
    """

    def __init__(self, mode="double", bits=53):
        if mode not in ("double", "bigfloat", "rational"):
            raise ValueError(f"unknown scalar mode {mode!r}")
        if mode == "bigfloat":
            if bits < 24:
                raise ValueError("bigfloat mantissa must be at least 24 bits")
            self._mp = mpmath.mp.clone()
            self._mp.prec = bits
        else:
            self._mp = None
            bits = 53 if mode == "double" else 0
        self.mode = mode
        self.bits = bits

    def __repr__(self):
        return f"ScalarContext({self.mode!r}, bits={self.bits})"

    @property
    def exact(self):
        return self.mode == "rational"

    def scalar(self, value):
        """Coerce a number or numeric string into this context's scalar type."""
        if self.mode == "rational":
            if isinstance(value, float) and not value.is_integer():
                # floats carry binary noise; demand an explicit fraction
                raise TypeError(
                    f"refusing inexact float {value!r} in rational mode; "
                    "pass a Fraction or string like '-1/2'"
                )
            return Fraction(value)
        if self.mode == "bigfloat":
            if isinstance(value, str):
                return self._mp.mpf(value)
            if isinstance(value, Fraction):
                return self._mp.mpf(value.numerator) / value.denominator
            return self._mp.mpf(value)
        if isinstance(value, str):
            return float(Fraction(value))
        return float(value)

    def check(self, value):
        """Assert *value* belongs to this context (no silent width mixing)."""
        if self.mode == "rational" and not isinstance(value, (Fraction, int)):
            raise TypeError(f"{value!r} is not exact-rational")
        if self.mode == "double" and not isinstance(value, (float, int)):
            raise TypeError(f"{value!r} is not a hardware double")

    def to_float(self, value):
        if isinstance(value, Fraction):
            try:
                return float(value)
            except OverflowError:
                return math.inf if value > 0 else -math.inf
        return float(value)

    def eps(self):
        """One unit of relative rounding for this mode (0 when exact)."""
        if self.mode == "rational":
            return 0
        return 2.0 ** (1 - self.bits)


DOUBLE = ScalarContext("double")
RATIONAL = ScalarContext("rational")


def as_fraction(value):
    """Parse a parameter given as int/Fraction/'p/q' string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    raise TypeError(f"cannot interpret {value!r} as a rational")


class InvalidCoordinateError(ValueError):
    """Raised for the degenerate homogeneous pair (0 : 0)."""


@dataclass(frozen=True)
class ProjCoord:
    """A point of R u {oo} as a normalized homogeneous pair (num : den).

    Normalized form: den >= 0 always; infinity is exactly (1 : 0) and zero is
    (0 : 1).  Float modes keep max(|num|, |den|) = 1, rational mode keeps
    lowest terms with denominator 1 (or (1 : 0)).
    """

    num: object
    den: object

    @property
    def is_finite(self):
        return self.den != 0

    @property
    def is_infinite(self):
        return self.den == 0

    def affine(self):
        """The affine value num/den; +inf for the infinite point."""
        if self.den == 0:
            return math.inf
        if isinstance(self.num, Fraction) or isinstance(self.den, Fraction):
            return Fraction(self.num) / Fraction(self.den)
        return self.num / self.den

    def angle(self):
        """arctan of the affine value, with the infinite point at pi/2."""
        return coord_angle(self.num, self.den)

    def __eq__(self, other):
        if not isinstance(other, ProjCoord):
            return NotImplemented
        # cross multiplication: projective equality of normalized pairs
        return self.num * other.den == other.num * self.den and (
            (self.den == 0) == (other.den == 0)
        )

    def __hash__(self):
        return hash((str(self.num), str(self.den)))

    def __repr__(self):
        if self.den == 0:
            return "oo"
        return f"({self.num}:{self.den})"


def coord_angle(num, den):
    """atan2-style angle in (-pi/2, pi/2] for a homogeneous pair with den>=0."""
    if den == 0:
        return HALF_PI
    if isinstance(num, Fraction):
        try:
            return math.atan2(float(num), float(den))
        except OverflowError:
            big = num / den
            return HALF_PI if big > 0 else -HALF_PI
    return math.atan2(float(num), float(den))


def normalize(num, den):
    """Normalize a homogeneous pair into canonical ProjCoord form."""
    if num == 0 and den == 0:
        raise InvalidCoordinateError("degenerate homogeneous coordinate (0:0)")
    if isinstance(num, Fraction) or isinstance(den, Fraction) or (
        isinstance(num, int) and isinstance(den, int)
    ):
        if den == 0:
            return ProjCoord(Fraction(1), Fraction(0))
        value = Fraction(num) / Fraction(den)
        return ProjCoord(value, Fraction(1))
    # float / bigfloat path
    if den == 0:
        return ProjCoord(type(num)(1) if not isinstance(num, float) else 1.0, num * 0)
    if num == 0:
        return ProjCoord(num * 0, den / den)
    if den < 0:
        num, den = -num, -den
    m = max(abs(num), abs(den))
    if not (m == m) or m == math.inf:  # NaN or overflow upstream
        raise InvalidCoordinateError(f"non-finite homogeneous pair ({num}:{den})")
    return ProjCoord(num / m, den / m)


def proj(value, ctx=DOUBLE):
    """Lift an affine scalar (or 'inf' / an infinite float) to a ProjCoord."""
    if (isinstance(value, str) and value.strip() in ("inf", "-inf", "oo")) or (
        isinstance(value, float) and math.isinf(value)
    ):
        one = ctx.scalar(1)
        return ProjCoord(one, one * 0)
    s = ctx.scalar(value)
    return normalize(s, ctx.scalar(1))


@dataclass(frozen=True)
class PlanePoint:
    """A point of the compactified plane, one ProjCoord per axis."""

    x: ProjCoord
    y: ProjCoord

    @property
    def is_finite(self):
        return self.x.is_finite and self.y.is_finite

    def affine(self):
        """Pair of affine values (inf allowed)."""
        return (self.x.affine(), self.y.affine())

    def angles(self):
        return (self.x.angle(), self.y.angle())

    def __repr__(self):
        return f"PlanePoint({self.x!r}, {self.y!r})"


def embed_affine(x, y, ctx=DOUBLE):
    """Lift affine coordinates to a PlanePoint (denominators 1, normalized)."""
    return PlanePoint(proj(x, ctx), proj(y, ctx))


def point_at(x, y, ctx=DOUBLE):
    """Like embed_affine but accepting 'inf' for either coordinate."""
    return PlanePoint(proj(x, ctx), proj(y, ctx))


def chordal_distance(p, q):
    """max-of-arctan distance between two points of the compactified plane.

    Each axis is measured as the difference of arctans, with the infinite
    point at pi/2.  This is the metric of the (arctan x, arctan y) plotting
    square; the parabolic point at infinity is an ordinary point of it.
    """
    pa = p.angles()
    qa = q.angles()
    return max(abs(pa[0] - qa[0]), abs(pa[1] - qa[1]))


def chordal_distance_angles(pa, qa):
    return max(abs(pa[0] - qa[0]), abs(pa[1] - qa[1]))
