"""Exact rational-map composition and Fibonacci degree growth.

The map and its iterates are stored as four sparse bivariate polynomials with
exact rational coefficients.  After every composition the four component
fractions are reduced by a GCD; the bidegrees of generic level curves of the
reduced iterate f^n must then follow the Fibonacci numbers:

    {first component  = c}  has bidegree (F_{n+1}, F_n),
    {second component = c}  has bidegree (F_n, F_{n-1}).

The generic constant c is realized as a ratio of two large primes, which
makes accidental leading-term cancellation essentially impossible while
keeping the arithmetic bivariate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy

from .subshift import fibonacci

_X, _Y = sympy.symbols("x y")

#: generic level constant: ratio of two fixed large primes
GENERIC_C = Fraction(1000003, 999983)


class DegreeGrowthError(AssertionError):
    pass


@dataclass(frozen=True)
class BiPoly:
    """Sparse bivariate polynomial: {(deg_x, deg_y): Fraction}, no zeros."""

    coeffs: tuple  # sorted tuple of ((dx, dy), Fraction)

    @staticmethod
    def from_dict(d):
        items = tuple(sorted((k, Fraction(v)) for k, v in d.items() if v != 0))
        return BiPoly(items)

    @staticmethod
    def const(c):
        c = Fraction(c)
        return BiPoly.from_dict({(0, 0): c} if c != 0 else {})

    @staticmethod
    def var(which):
        return BiPoly.from_dict({(1, 0) if which == "x" else (0, 1): 1})

    def to_dict(self):
        return dict(self.coeffs)

    @property
    def is_zero(self):
        return not self.coeffs

    def bidegree(self):
        """(max deg_x, max deg_y) over the support; (-inf,-inf) if zero."""
        if not self.coeffs:
            return (float("-inf"), float("-inf"))
        return (max(k[0] for k, _ in self.coeffs), max(k[1] for k, _ in self.coeffs))

    def __add__(self, other):
        d = dict(self.coeffs)
        for k, v in other.coeffs:
            d[k] = d.get(k, Fraction(0)) + v
        return BiPoly.from_dict(d)

    def __sub__(self, other):
        d = dict(self.coeffs)
        for k, v in other.coeffs:
            d[k] = d.get(k, Fraction(0)) - v
        return BiPoly.from_dict(d)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return BiPoly.from_dict({k: v * other for k, v in self.coeffs})
        d = {}
        for (ax, ay), av in self.coeffs:
            for (bx, by), bv in other.coeffs:
                k = (ax + bx, ay + by)
                d[k] = d.get(k, Fraction(0)) + av * bv
        return BiPoly.from_dict(d)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, BiPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def evaluate(self, x, y):
        out = Fraction(0)
        for (dx, dy), v in self.coeffs:
            out += v * x**dx * y**dy
        return out

    def to_sympy(self):
        return sympy.Poly.from_dict({k: sympy.Rational(v) for k, v in self.coeffs},
                                    _X, _Y, domain="QQ")

    @staticmethod
    def from_sympy(p):
        return BiPoly.from_dict(
            {k: Fraction(c.p, c.q) for k, c in p.as_dict().items()}
        )

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{v}*x^{k[0]}*y^{k[1]}" for k, v in self.coeffs)


def poly_gcd(p: BiPoly, q: BiPoly) -> BiPoly:
    """GCD with content/primitive normalization (positive lexicographic lead).

    Backed by sympy's exact QQ arithmetic; the result is monic-normalized so
    its leading coefficient in lex term order is positive.
    """
    if p.is_zero:
        return _normalize_sign(q)
    if q.is_zero:
        return _normalize_sign(p)
    g = sympy.gcd(p.to_sympy(), q.to_sympy())
    return _normalize_sign(BiPoly.from_sympy(sympy.Poly(g, _X, _Y, domain="QQ")))


def _normalize_sign(p: BiPoly) -> BiPoly:
    if p.is_zero:
        return p
    lead = max(p.coeffs)  # lex order on (dx, dy)
    if lead[1] < 0:
        return p * Fraction(-1)
    return p


def poly_div_exact(p: BiPoly, g: BiPoly) -> BiPoly:
    """Exact division p/g (g must divide p)."""
    q, r = sympy.div(p.to_sympy(), g.to_sympy())
    if not r.is_zero:
        raise ArithmeticError("non-exact polynomial division")
    return BiPoly.from_sympy(sympy.Poly(q, _X, _Y, domain="QQ"))


@dataclass(frozen=True)
class SymRationalMap:
    """A rational self-map of the plane: (x,y) -> (xn/xd, yn/yd), reduced."""

    x_num: BiPoly
    x_den: BiPoly
    y_num: BiPoly
    y_den: BiPoly
    a: Fraction

    @staticmethod
    def family_forward(a):
        """f(x,y) = (y(x+a)/(x-1), x+a-1)."""
        a = Fraction(a)
        return SymRationalMap(
            BiPoly.from_dict({(1, 1): 1, (0, 1): a}),
            BiPoly.from_dict({(1, 0): 1, (0, 0): -1}),
            BiPoly.from_dict({(1, 0): 1, (0, 0): a - 1}),
            BiPoly.const(1),
            a,
        )

    @staticmethod
    def family_inverse(a):
        """f^{-1}(x,y) = (y+1-a, x(y-a)/(y+1))."""
        a = Fraction(a)
        return SymRationalMap(
            BiPoly.from_dict({(0, 1): 1, (0, 0): 1 - a}),
            BiPoly.const(1),
            BiPoly.from_dict({(1, 1): 1, (1, 0): -a}),
            BiPoly.from_dict({(0, 1): 1, (0, 0): 1}),
            a,
        )

    @staticmethod
    def identity(a):
        return SymRationalMap(BiPoly.var("x"), BiPoly.const(1),
                              BiPoly.var("y"), BiPoly.const(1), Fraction(a))

    def components(self):
        return (self.x_num, self.x_den, self.y_num, self.y_den)

    def reduced_eq(self, other):
        """Equality of reduced maps up to scalar on each component fraction."""
        for (n1, d1), (n2, d2) in zip(
            ((self.x_num, self.x_den), (self.y_num, self.y_den)),
            ((other.x_num, other.x_den), (other.y_num, other.y_den)),
        ):
            if (n1 * d2) != (n2 * d1):
                return False
        return True

    def evaluate(self, x, y):
        x, y = Fraction(x), Fraction(y)
        return (
            self.x_num.evaluate(x, y) / self.x_den.evaluate(x, y),
            self.y_num.evaluate(x, y) / self.y_den.evaluate(x, y),
        )


def _subst(poly: BiPoly, A, B, C, D, dx, dy):
    """Numerator of poly(A/B, C/D) over the common denominator B^dx * D^dy."""
    out = BiPoly.const(0)
    # precompute powers
    Ap = _powers(A, dx)
    Bp = _powers(B, dx)
    Cp = _powers(C, dy)
    Dp = _powers(D, dy)
    for (i, j), v in poly.coeffs:
        term = Ap[i] * Bp[dx - i] * Cp[j] * Dp[dy - j] * v
        out = out + term
    return out


def _powers(p, n):
    out = [BiPoly.const(1)]
    for _ in range(n):
        out.append(out[-1] * p)
    return out


def _reduce_fraction(num: BiPoly, den: BiPoly):
    if den.is_zero:
        raise ArithmeticError("zero denominator after composition (bug)")
    g = poly_gcd(num, den)
    if g.bidegree() != (0, 0):
        num = poly_div_exact(num, g)
        den = poly_div_exact(den, g)
    # scale so the lex-leading denominator coefficient is +1
    lead = max(den.coeffs)[1] if den.coeffs else Fraction(1)
    if lead != 1:
        num = num * (1 / lead)
        den = den * (1 / lead)
    return num, den


def compose_reduce(g: SymRationalMap, h: SymRationalMap) -> SymRationalMap:
    """The reduced composition g(h(x,y)); all four fractions in lowest terms."""
    if g.a != h.a:
        raise ValueError("cannot compose maps with different parameters")
    A, B, C, D = h.components()
    out = []
    for num, den in ((g.x_num, g.x_den), (g.y_num, g.y_den)):
        dx = max(num.bidegree()[0], den.bidegree()[0], 0)
        dy = max(num.bidegree()[1], den.bidegree()[1], 0)
        n = _subst(num, A, B, C, D, dx, dy)
        d = _subst(den, A, B, C, D, dx, dy)
        out.append(_reduce_fraction(n, d))
    (xn, xd), (yn, yd) = out
    return SymRationalMap(xn, xd, yn, yd, g.a)


def iterate_map(a, n):
    """Reduced representations of f, f^2, ..., f^n."""
    f = SymRationalMap.family_forward(a)
    out = [f]
    for _ in range(n - 1):
        out.append(compose_reduce(f, out[-1]))
    return out


def level_curve_bidegree(num: BiPoly, den: BiPoly, c=GENERIC_C):
    """Bidegree of {num/den = c}, i.e. of num - c*den for generic c."""
    return (num - den * c).bidegree()


def verify_fibonacci_growth(a, n_max, strict=True):
    """Check the Fibonacci bidegree law for f^1..f^n_max at rational a.

    Returns a report dict; with ``strict`` a mismatch raises
    DegreeGrowthError naming the failing n.  For exceptional parameters a
    bidegree strictly below the prediction appears for some small n.
    """
    a = Fraction(a)
    if a == -1 or a == 0:
        raise ValueError("parameter must differ from 0 and -1")
    if not 1 <= n_max <= 8:
        raise ValueError("n_max must be in 1..8 (cost guard)")
    rows = []
    ok_all = True
    for n, fn in enumerate(iterate_map(a, n_max), start=1):
        got_x = level_curve_bidegree(fn.x_num, fn.x_den)
        got_y = level_curve_bidegree(fn.y_num, fn.y_den)
        want_x = (fibonacci(n + 1), fibonacci(n))
        want_y = (fibonacci(n), fibonacci(n - 1))
        ok = got_x == want_x and got_y == want_y
        ok_all &= ok
        rows.append({
            "n": n,
            "bidegree_first": got_x,
            "bidegree_second": got_y,
            "expected_first": want_x,
            "expected_second": want_y,
            "pass": ok,
        })
        if strict and not ok:
            raise DegreeGrowthError(
                f"bidegree mismatch at n={n}: first {got_x} vs {want_x}, "
                f"second {got_y} vs {want_y}"
            )
    return {"a": str(a), "n_max": n_max, "all_pass": ok_all, "rows": rows}
