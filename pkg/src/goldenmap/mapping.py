"""The birational family f(x,y) = (y(x+a)/(x-1), x+a-1) and its inverse.

Evaluation is done on homogeneous pairs per axis, in the factored form

    x' = ( yn*(xn + a*xd) : yd*(xn - xd) ),      y' = ( xn + (a-1)*xd : xd ),

which is finite on the lines at infinity and realizes the translation actions
there exactly: (oo,y) -> (y,oo), (x,oo) -> (oo, x+a-1), and (t,t-1) ->
(t+a, t+a-1) on {y = x-1}.  The pair degenerates to (0:0) precisely at the
two points of indeterminacy.

A vectorized evaluator over numpy arrays of homogeneous quadruples backs the
curve tracing and Monte Carlo subsystems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .scalars import (
    DOUBLE,
    InvalidCoordinateError,
    PlanePoint,
    ProjCoord,
    ScalarContext,
    as_fraction,
    chordal_distance,
    normalize,
    point_at,
)

#: default chordal tolerance for treating a float point as indeterminate
EPS_IND = 1e-12


class Regime(Enum):
    DEEP_NEGATIVE = "deep"        # a < -1
    SHALLOW_NEGATIVE = "shallow"  # -1 < a < 0


class ParameterError(ValueError):
    """Raised when the parameter a is outside the admissible range."""


class IndeterminateError(ArithmeticError):
    """Evaluation requested at (or within tolerance of) an indeterminacy point."""

    def __init__(self, point, which):
        super().__init__(f"indeterminate at {which}")
        self.point = point
        self.which = which


class CriticalPointError(ArithmeticError):
    """Derivative or density requested on a critical line / pole."""


def is_exceptional(a, tol=1e-12):
    """True iff a = (n-1)/(n+1) or a = 1/n for some integer n >= 1.

    At such parameters an indeterminacy orbit collides with the inverse
    indeterminacy set and degree growth degenerates.  No a < 0 qualifies.
    """
    if isinstance(a, Fraction):
        if a == 0 or a == 1:
            return True
        if 0 < a < 1:
            # a=(n-1)/(n+1)  <=>  n=(1+a)/(1-a);  a=1/n  <=>  n=1/a
            n = (1 + a) / (1 - a)
            if n.denominator == 1 and n >= 1:
                return True
            n = 1 / a
            if n.denominator == 1 and n >= 1:
                return True
        return False
    a = float(a)
    if a < -tol or a > 1 + tol:
        return False
    for fam in ("ratio", "recip"):
        if fam == "ratio":
            if abs(1 - a) < tol:
                continue
            n_est = (1 + a) / (1 - a)
        else:
            if abs(a) < tol:
                return True  # handled below via n -> oo? a=0 is n=1 of ratio family
            n_est = 1 / a
        n = round(n_est)
        if n >= 1:
            val = (n - 1) / (n + 1) if fam == "ratio" else 1 / n
            if abs(a - val) <= tol:
                return True
    return abs(a) <= tol or abs(a - 1) <= tol


@dataclass(frozen=True)
class MapParams:
    """Validated parameter bundle: a < 0, a != -1, never exceptional."""

    a: object
    regime: Regime
    ctx: ScalarContext

    @staticmethod
    def make(a, ctx=DOUBLE):
        a_s = ctx.scalar(a)
        if not a_s < 0:
            raise ParameterError(f"parameter a={a} must be negative")
        if a_s == -1:
            raise ParameterError("parameter a=-1 excluded (affine, dynamically trivial)")
        regime = Regime.DEEP_NEGATIVE if a_s < -1 else Regime.SHALLOW_NEGATIVE
        assert not is_exceptional(as_fraction(a) if ctx.exact else a_s)
        return MapParams(a_s, regime, ctx)

    @property
    def deep(self):
        return self.regime is Regime.DEEP_NEGATIVE

    def to_ctx(self, ctx):
        if self.ctx.exact and not ctx.exact:
            return MapParams.make(ctx.scalar(float(self.a)), ctx)
        return MapParams.make(self.a, ctx)


def special_sets(m: MapParams):
    """Indeterminacy points, critical lines, and blow-up image lines of f."""
    ctx = m.ctx
    a = m.a
    return {
        "indeterminacy_fwd": (point_at(1, 0, ctx), point_at(-a, "inf", ctx)),
        "indeterminacy_bwd": (point_at(0, -1, ctx), point_at("inf", a, ctx)),
        "critical_fwd": ({"x": ctx.scalar(1)}, {"x": -a}),
        "critical_bwd": ({"y": ctx.scalar(-1)}, {"y": a}),
        "blowup_images": {"(1,0)": {"y": a}, "(-a,oo)": {"y": ctx.scalar(-1)}},
    }


def involution(p: PlanePoint) -> PlanePoint:
    """(x,y) -> (-y,-x); conjugates f to its inverse."""
    return PlanePoint(
        normalize(-p.y.num, p.y.den), normalize(-p.x.num, p.x.den)
    )


def _indeterminacy_hit(m, p, points, eps_ind):
    for which, q in points:
        if m.ctx.exact:
            if p.x == q.x and p.y == q.y:
                return which
        elif chordal_distance(p, q) <= eps_ind:
            return which
    return None


def eval_forward(m: MapParams, p: PlanePoint, eps_ind=EPS_IND) -> PlanePoint:
    """One forward step of f on the compactified plane.

    Raises IndeterminateError exactly on I(f) = {(1,0), (-a,oo)} in rational
    mode, and within chordal tolerance ``eps_ind`` of it in float modes.
    """
    a = m.a
    ind = _indeterminacy_hit(
        m,
        p,
        (("(1,0)", point_at(1, 0, m.ctx)), ("(-a,oo)", point_at(-a, "inf", m.ctx))),
        eps_ind,
    )
    if ind is not None:
        raise IndeterminateError(p, ind)
    xn, xd = p.x.num, p.x.den
    yn, yd = p.y.num, p.y.den
    try:
        new_x = normalize(yn * (xn + a * xd), yd * (xn - xd))
        new_y = normalize(xn + (a - 1) * xd, xd)
    except InvalidCoordinateError:
        raise IndeterminateError(p, "numeric (0:0)") from None
    return PlanePoint(new_x, new_y)


def eval_inverse(m: MapParams, p: PlanePoint, eps_ind=EPS_IND) -> PlanePoint:
    """One step of the inverse f^{-1}(x,y) = (y+1-a, x(y-a)/(y+1))."""
    a = m.a
    ind = _indeterminacy_hit(
        m,
        p,
        (("(0,-1)", point_at(0, -1, m.ctx)), ("(oo,a)", point_at("inf", a, m.ctx))),
        eps_ind,
    )
    if ind is not None:
        raise IndeterminateError(p, ind)
    xn, xd = p.x.num, p.x.den
    yn, yd = p.y.num, p.y.den
    try:
        new_x = normalize(yn + (1 - a) * yd, yd)
        new_y = normalize(xn * (yn - a * yd), xd * (yn + yd))
    except InvalidCoordinateError:
        raise IndeterminateError(p, "numeric (0:0)") from None
    return PlanePoint(new_x, new_y)


def eval_step(m, p, forward=True, eps_ind=EPS_IND):
    return eval_forward(m, p, eps_ind) if forward else eval_inverse(m, p, eps_ind)


def iterate(m, p, steps, eps_ind=EPS_IND):
    """Iterate |steps| times, backward when steps < 0.  Returns the point list
    including the start; stops silently at an indeterminacy hit."""
    pts = [p]
    fwd = steps >= 0
    for _ in range(abs(steps)):
        try:
            p = eval_step(m, p, fwd, eps_ind)
        except IndeterminateError:
            break
        pts.append(p)
    return pts


def jacobian(m: MapParams, p: PlanePoint, direction="fwd"):
    """Exact 2x2 derivative of f (or f^{-1}) at a finite non-critical point.

    Rows are d(x',y')/d(x,y); entries are scalars of the active mode.
    """
    if not p.is_finite:
        raise CriticalPointError("jacobian requested at an infinite point")
    x, y = p.affine()
    a = m.a
    if direction == "fwd":
        d = x - 1
        if d == 0:
            raise CriticalPointError("on the critical line {x=1}")
        return (
            (-y * (1 + a) / (d * d), (x + a) / d),
            (m.ctx.scalar(1), m.ctx.scalar(0)),
        )
    d = y + 1
    if d == 0:
        raise CriticalPointError("on the critical line {y=-1}")
    return (
        (m.ctx.scalar(0), m.ctx.scalar(1)),
        ((y - a) / d, x * (1 + a) / (d * d)),
    )


def two_form_density(p: PlanePoint):
    """Density 1/(y-x+1) of the invariant 2-form dx^dy/(y-x+1)."""
    if not p.is_finite:
        raise CriticalPointError("density requested at an infinite point")
    x, y = p.affine()
    d = y - x + 1
    if d == 0:
        raise CriticalPointError("pole of the 2-form on {y=x-1}")
    if isinstance(d, Fraction):
        return 1 / d
    return 1.0 / d if isinstance(d, float) else d**-1


def near_infinity_prediction(m: MapParams, p: PlanePoint):
    """Second-order expansion of f^2 for |x|,|y| large.

    Returns the predicted image of f^2 ignoring O(|x|^-2 + |y|^-2) terms:
    (x(1+(a-1)/x+(a+1)/y), y(1+(a-1)/y+(a+1)/x)).
    """
    x, y = p.affine()
    a = m.a
    px = x * (1 + (a - 1) / x + (a + 1) / y)
    py = y * (1 + (a - 1) / y + (a + 1) / x)
    return point_at(px, py, m.ctx)


def slope_ratio_prediction(m: MapParams, p: PlanePoint):
    """First-order prediction of (m o f^2)/m with m(x,y) = y/x: 1 + 2/x - 2/y."""
    x, y = p.affine()
    return 1 + 2 / x - 2 / y


# ---------------------------------------------------------------------------
# vectorized homogeneous evaluation (double precision only)
# ---------------------------------------------------------------------------

def h_from_affine(x, y):
    """Pack affine float arrays into a homogeneous quadruple (xn,xd,yn,yd);
    infinite entries are allowed."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xn = np.where(np.isinf(x), 1.0, x)
    xd = np.where(np.isinf(x), 0.0, 1.0)
    yn = np.where(np.isinf(y), 1.0, y)
    yd = np.where(np.isinf(y), 0.0, 1.0)
    return _h_normalize(xn, xd, yn, yd)


def _norm_axis(n, d):
    flip = d < 0
    n = np.where(flip, -n, n)
    d = np.where(flip, -d, d)
    zero_d = d == 0
    n = np.where(zero_d & (n != 0), np.sign(n), n)
    m = np.maximum(np.abs(n), np.abs(d))
    bad = m == 0
    safe = np.where(bad, 1.0, m)
    return n / safe, d / safe, bad


def _h_normalize(xn, xd, yn, yd):
    xn, xd, badx = _norm_axis(xn, xd)
    yn, yd, bady = _norm_axis(yn, yd)
    bad = badx | bady
    return xn, xd, yn, yd, bad


def h_forward(a, xn, xd, yn, yd):
    """Vectorized forward step on homogeneous quadruples.

    Returns (xn,xd,yn,yd,bad) where ``bad`` marks indeterminate entries.
    """
    nx = yn * (xn + a * xd)
    dx = yd * (xn - xd)
    ny = xn + (a - 1.0) * xd
    dy = xd.copy() if isinstance(xd, np.ndarray) else xd
    return _h_normalize(nx, dx, ny, dy)


def h_inverse(a, xn, xd, yn, yd):
    nx = yn + (1.0 - a) * yd
    dx = yd.copy() if isinstance(yd, np.ndarray) else yd
    ny = xn * (yn - a * yd)
    dy = xd * (yn + yd)
    return _h_normalize(nx, dx, ny, dy)


def h_orbit(a, xn, xd, yn, yd, steps, forward=True):
    """Apply ``steps`` vectorized map steps; accumulates the bad mask."""
    step = h_forward if forward else h_inverse
    bad = np.zeros(np.shape(xn), dtype=bool)
    for _ in range(steps):
        xn, xd, yn, yd, b = step(a, xn, xd, yn, yd)
        bad |= b
    return xn, xd, yn, yd, bad


def h_angles(xn, xd, yn, yd):
    """Per-axis arctan angles of homogeneous arrays (infinity at +pi/2)."""
    ax = np.arctan2(xn, xd)
    ay = np.arctan2(yn, yd)
    return ax, ay


def h_affine(xn, xd, yn, yd):
    """Affine views with np.inf at infinite entries."""
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(xd == 0, np.inf * np.where(xn >= 0, 1.0, -1.0), xn / np.where(xd == 0, 1.0, xd))
        y = np.where(yd == 0, np.inf * np.where(yn >= 0, 1.0, -1.0), yn / np.where(yd == 0, 1.0, yd))
    return x, y


def h_point(xn, xd, yn, yd):
    """Scalar helper: build a PlanePoint from one homogeneous quadruple."""
    return PlanePoint(normalize(float(xn), float(xd)), normalize(float(yn), float(yd)))
