"""Filtration rectangles, itinerary coding, expansivity, basin classification.

The compactified plane is covered by four closed rectangles whose boundary
lines depend on the parameter regime:

    a < -1:      R+ = [-oo,1]x[-oo,0]   R- = [0,oo]x[-1,oo]
                 R0 = [1,oo]x[-oo,-1]   R1 = [-oo,0]x[0,oo]
    -1 < a < 0:  same with {x=-a},{y=a} replacing {x=1},{y=-1}.

R+ is forward invariant with drift at least one unit per step, R- backward
invariant; orbits that stay in R0 u R1 are coded by the golden mean subshift
(the block 11 cannot occur).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import mapping
from .mapping import MapParams, IndeterminateError
from .scalars import HALF_PI, PlanePoint, chordal_distance, point_at
from .subshift import Word

EPS_BD = 1e-10  # boundary tolerance for rectangle membership (double)


@dataclass(frozen=True)
class Interval:
    """Closed interval of the compactified line, endpoints may be +-oo."""

    lo: object
    hi: object

    @property
    def angles(self):
        return (_atan_ext(self.lo), _atan_ext(self.hi))

    def contains_angle(self, theta, eps):
        alo, ahi = self.angles
        if alo - eps <= theta <= ahi + eps:
            return True
        # the single point at infinity folds the two ends together
        if self.lo == -math.inf and theta >= HALF_PI - eps:
            return True
        if self.hi == math.inf and theta <= -HALF_PI + eps:
            return True
        return False

    def interior_angle(self, theta, eps):
        alo, ahi = self.angles
        return alo + eps < theta < ahi - eps

    def contains_exact(self, coord):
        """Exact membership for rational-mode ProjCoords."""
        if coord.is_infinite:
            return self.lo == -math.inf or self.hi == math.inf
        v = coord.affine()
        if self.lo != -math.inf and v < self.lo:
            return False
        if self.hi != math.inf and v > self.hi:
            return False
        return True

    def interior_exact(self, coord):
        if coord.is_infinite:
            return False
        v = coord.affine()
        lo_ok = self.lo == -math.inf or v > self.lo
        hi_ok = self.hi == math.inf or v < self.hi
        return lo_ok and hi_ok


def _atan_ext(v):
    if v == math.inf:
        return HALF_PI
    if v == -math.inf:
        return -HALF_PI
    return math.atan(float(v))


@dataclass(frozen=True)
class Rect:
    name: str
    xiv: Interval
    yiv: Interval

    def contains(self, p: PlanePoint, eps=EPS_BD, exact=False):
        if exact:
            return self.xiv.contains_exact(p.x) and self.yiv.contains_exact(p.y)
        ax, ay = p.angles()
        return self.xiv.contains_angle(ax, eps) and self.yiv.contains_angle(ay, eps)

    def interior(self, p: PlanePoint, eps=EPS_BD, exact=False):
        if exact:
            return self.xiv.interior_exact(p.x) and self.yiv.interior_exact(p.y)
        ax, ay = p.angles()
        return self.xiv.interior_angle(ax, eps) and self.yiv.interior_angle(ay, eps)


class Filtration:
    """The four covering rectangles for one parameter regime."""

    def __init__(self, m: MapParams):
        a = float(m.a) if not isinstance(m.a, float) else m.a
        inf = math.inf
        if m.deep:
            xcut, ycut = 1.0, -1.0
        else:
            xcut, ycut = -a, a
        self.m = m
        self.xcut, self.ycut = xcut, ycut
        self.plus = Rect("R+", Interval(-inf, xcut), Interval(-inf, 0.0))
        self.minus = Rect("R-", Interval(0.0, inf), Interval(ycut, inf))
        self.r0 = Rect("R0", Interval(xcut, inf), Interval(-inf, ycut))
        self.r1 = Rect("R1", Interval(-inf, 0.0), Interval(0.0, inf))
        self.by_digit = (self.r0, self.r1)

    def all_rects(self):
        return (self.plus, self.minus, self.r0, self.r1)

    def classify(self, p: PlanePoint, eps=EPS_BD):
        """Memberships {name: 'interior'|'boundary'} over all four rectangles."""
        exact = self.m.ctx.exact
        out = {}
        for r in self.all_rects():
            if r.contains(p, eps, exact):
                out[r.name] = "interior" if r.interior(p, eps, exact) else "boundary"
        return out

    def digit_at(self, p, eps=EPS_BD):
        """(digit, ambiguous) for p in R0 u R1, or (None, _) outside."""
        exact = self.m.ctx.exact
        in0 = self.r0.contains(p, eps, exact)
        in1 = self.r1.contains(p, eps, exact)
        if not (in0 or in1):
            return None, False
        if in0 and in1:
            return 0, True  # only the corner (oo,oo)
        digit = 0 if in0 else 1
        rect = self.by_digit[digit]
        ambiguous = not rect.interior(p, eps, exact)
        return digit, ambiguous


def classify_point(fil: Filtration, p: PlanePoint, eps=EPS_BD):
    return fil.classify(p, eps)


def filtration_inequality_check(m: MapParams, p: PlanePoint, eps=1e-9):
    """One-step drift check of the filtration inequalities at a finite point.

    For p in R+ checks f(p) in R+ and the unit drift; for p in R- checks the
    backward version; for p in R1 checks non-return to int R1 either way.
    Returns a record of the checks performed (empty if p is in none).
    """
    fil = Filtration(m)
    a = float(m.a)
    x0, y0 = (float(v) for v in p.affine())
    record = {}
    if fil.plus.contains(p) and p.is_finite:
        q = mapping.eval_forward(m, p)
        ok_in = fil.plus.contains(q)
        if q.is_finite:
            x1, y1 = (float(v) for v in q.affine())
            if m.deep:
                drift_ok = min(x1 - 1, y1) <= min(x0 - 1, y0) - 1 + eps
            else:
                drift_ok = max(x1 + a, y1) <= max(x0 + a, y0) + a + eps
        else:
            drift_ok = True  # drift statement is for finite images
        record["plus"] = {"contained": ok_in, "drift": drift_ok}
    if fil.minus.contains(p) and p.is_finite:
        q = mapping.eval_inverse(m, p)
        ok_in = fil.minus.contains(q)
        if q.is_finite:
            x1, y1 = (float(v) for v in q.affine())
            if m.deep:
                drift_ok = max(x1, y1 + 1) >= max(x0, y0 + 1) + 1 - eps
            else:
                drift_ok = min(x1, y1 - a) >= min(x0, y0 - a) - a - eps
        else:
            drift_ok = True
        record["minus"] = {"contained": ok_in, "drift": drift_ok}
    if fil.r1.contains(p):
        rec = {}
        try:
            rec["fwd_avoids_int"] = not fil.r1.interior(mapping.eval_forward(m, p))
        except IndeterminateError:
            rec["fwd_avoids_int"] = True
        try:
            rec["bwd_avoids_int"] = not fil.r1.interior(mapping.eval_inverse(m, p))
        except IndeterminateError:
            rec["bwd_avoids_int"] = True
        record["r1"] = rec
    record["ok"] = all(v for sub in record.values() for v in sub.values())
    return record


class TerminationKind(Enum):
    COMPLETED = "completed"
    HIT_INDETERMINACY = "hit_indeterminacy"
    ESCAPED_TO_R_PLUS = "escaped_to_R+"
    ESCAPED_TO_R_MINUS = "escaped_to_R-"
    PRECISION_LOSS = "precision_loss"


@dataclass(frozen=True)
class Termination:
    kind: TerminationKind
    step: int

    def to_json(self):
        return {"kind": self.kind.value, "step": self.step}


@dataclass
class OrbitRecord:
    """Coded orbit segment: points, digits, and how each direction ended."""

    base: PlanePoint
    forward_points: list
    backward_points: list
    digits: dict            # index -> digit, only while inside R0 u R1
    ambiguous: set          # indices whose digit touched a boundary
    fwd_termination: Termination
    bwd_termination: Termination

    @property
    def termination(self):
        for t in (self.fwd_termination, self.bwd_termination):
            if t.kind is not TerminationKind.COMPLETED:
                return t
        return self.fwd_termination

    def word(self):
        """The itinerary as a Word, or None if index 0 was never coded."""
        if 0 not in self.digits:
            return None
        lo = 0
        while lo - 1 in self.digits:
            lo -= 1
        hi = 0
        while hi + 1 in self.digits:
            hi += 1
        return Word(tuple(self.digits[i] for i in range(lo, hi + 1)), lo)

    def to_json(self):
        return {
            "base": _pt_json(self.base),
            "forward": [_pt_json(p) for p in self.forward_points],
            "backward": [_pt_json(p) for p in self.backward_points],
            "digits": {str(k): v for k, v in sorted(self.digits.items())},
            "ambiguous": sorted(self.ambiguous),
            "fwd_termination": self.fwd_termination.to_json(),
            "bwd_termination": self.bwd_termination.to_json(),
        }


def _pt_json(p):
    x, y = p.affine()
    return [_num_json(x), _num_json(y)]


def _num_json(v):
    f = float(v)
    return "inf" if math.isinf(f) else f


def _cond2(mat):
    """Condition number of a 2x2 matrix (ratio of singular values)."""
    a, b = float(mat[0][0]), float(mat[0][1])
    c, d = float(mat[1][0]), float(mat[1][1])
    t = a * a + b * b + c * c + d * d
    det = a * d - b * c
    disc = max(t * t - 4 * det * det, 0.0)
    s = math.sqrt(disc)
    smax = (t + s) / 2
    smin = (t - s) / 2
    if smin <= 0:
        return math.inf
    return math.sqrt(smax / smin)


def itinerary(m: MapParams, p: PlanePoint, n_back, n_fwd,
              eps_bd=EPS_BD, eps_ind=mapping.EPS_IND) -> OrbitRecord:
    """Code the orbit of p over [-n_back, n_fwd].

    Digits are recorded while the orbit stays in R0 u R1; leaving, hitting an
    indeterminacy point, or exhausting the scalar mode's precision ends the
    corresponding direction.  The complete itinerary never contains '11'.
    """
    fil = Filtration(m)
    digits = {}
    ambiguous = set()
    bits_budget = (m.ctx.bits - 8) if not m.ctx.exact else None

    def run(direction, steps):
        pts = []
        q = p
        log_cond = 0.0
        for k in range(steps + 1):
            idx = k * direction
            digit, amb = fil.digit_at(q, eps_bd)
            if digit is None:
                kind = (TerminationKind.ESCAPED_TO_R_PLUS
                        if fil.plus.contains(q, eps_bd, m.ctx.exact)
                        else TerminationKind.ESCAPED_TO_R_MINUS)
                return pts, Termination(kind, idx)
            if k > 0 or direction > 0:  # index 0 recorded once, by the forward pass
                digits[idx] = digit
                if amb:
                    ambiguous.add(idx)
            if k == steps:
                break
            if bits_budget is not None and q.is_finite:
                try:
                    jac = mapping.jacobian(m, q, "fwd" if direction > 0 else "bwd")
                    log_cond += math.log2(max(_cond2(jac), 1.0))
                except mapping.CriticalPointError:
                    pass
                if log_cond > bits_budget:
                    return pts, Termination(TerminationKind.PRECISION_LOSS, idx)
            try:
                q = mapping.eval_step(m, q, direction > 0, eps_ind)
            except IndeterminateError:
                return pts, Termination(TerminationKind.HIT_INDETERMINACY, idx)
            pts.append(q)
        return pts, Termination(TerminationKind.COMPLETED, steps * direction)

    fwd_pts, fwd_term = run(+1, n_fwd)
    bwd_pts, bwd_term = run(-1, n_back)
    return OrbitRecord(p, fwd_pts, bwd_pts, digits, ambiguous, fwd_term, bwd_term)


def expansivity_constant(m: MapParams):
    """0.9 x the chordal distance from R1 to the two critical strips of R0.

    Closed form from the arctan interval endpoints: pi/4 for a < -1 and
    arctan(-a) for -1 < a < 0 (both strips give the same gap, by the
    reversibility symmetry).
    """
    fil = Filtration(m)
    a = float(m.a)
    lo_x, hi_x = sorted((fil.xcut, 1.0 if m.deep else 1.0))
    if m.deep:
        strip1 = Rect("s1", Interval(1.0, -a), fil.r0.yiv)
        strip2 = Rect("s2", fil.r0.xiv, Interval(a, -1.0))
    else:
        strip1 = Rect("s1", Interval(-a, 1.0), fil.r0.yiv)
        strip2 = Rect("s2", fil.r0.xiv, Interval(-1.0, a))
    d1 = _rect_gap(fil.r1, strip1)
    d2 = _rect_gap(fil.r1, strip2)
    return 0.9 * min(d1, d2)


def _interval_gap(i1: Interval, i2: Interval):
    a1, b1 = i1.angles
    a2, b2 = i2.angles
    if b1 < a2:
        return a2 - b1
    if b2 < a1:
        return a1 - b2
    return 0.0


def _rect_gap(r1: Rect, r2: Rect):
    """Distance of two axis-product sets in the max-of-arctan metric."""
    return max(_interval_gap(r1.xiv, r2.xiv), _interval_gap(r1.yiv, r2.yiv))


class BasinClass(Enum):
    FORWARD_BASIN = "forward"
    BACKWARD_BASIN = "backward"
    NEAR_OMEGA = "near_omega"
    UNDECIDED = "undecided"


def basin_classify(m: MapParams, p: PlanePoint, max_iter=100, eps_bd=EPS_BD):
    """Classify p against the parabolic basins.

    Entering int R+ forward (resp. int R- backward) with margin is conclusive
    by the filtration inequalities.  NEAR_OMEGA only means the orbit stayed in
    R0 u R1 for max_iter steps both ways; it is evidence, not membership.
    """
    fil = Filtration(m)

    def probe(direction, absorbing):
        q = p
        stayed = True
        for _ in range(max_iter):
            if absorbing.interior(q, eps_bd):
                return True, stayed
            if fil.digit_at(q, eps_bd)[0] is None:
                stayed = False
            try:
                q = mapping.eval_step(m, q, direction > 0)
            except IndeterminateError:
                return False, stayed
        if absorbing.interior(q, eps_bd):
            return True, stayed
        return False, stayed

    fwd_hit, fwd_stayed = probe(+1, fil.plus)
    if fwd_hit:
        return BasinClass.FORWARD_BASIN
    bwd_hit, bwd_stayed = probe(-1, fil.minus)
    if bwd_hit:
        return BasinClass.BACKWARD_BASIN
    if fwd_stayed and bwd_stayed:
        return BasinClass.NEAR_OMEGA
    return BasinClass.UNDECIDED


# ---------------------------------------------------------------------------
# vectorized membership on homogeneous arrays (double precision)
# ---------------------------------------------------------------------------

class FiltrationArrays:
    """Angle-space rectangle tests over numpy arrays of homogeneous points."""

    def __init__(self, m: MapParams, eps=EPS_BD):
        fil = Filtration(m)
        self.eps = eps
        self.rects = {}
        for r in fil.all_rects():
            self.rects[r.name] = (r.xiv, r.yiv)

    def member(self, name, ax, ay, eps=None):
        eps = self.eps if eps is None else eps
        xiv, yiv = self.rects[name]
        return _vec_in(xiv, ax, eps) & _vec_in(yiv, ay, eps)

    def interior(self, name, ax, ay, eps=None):
        eps = self.eps if eps is None else eps
        xiv, yiv = self.rects[name]
        return _vec_int(xiv, ax, eps) & _vec_int(yiv, ay, eps)

    def digit_member(self, digit, ax, ay, eps=None):
        return self.member("R0" if digit == 0 else "R1", ax, ay, eps)


def _vec_in(iv: Interval, theta, eps):
    alo, ahi = iv.angles
    ok = (theta >= alo - eps) & (theta <= ahi + eps)
    if iv.lo == -math.inf:
        ok |= theta >= HALF_PI - eps
    if iv.hi == math.inf:
        ok |= theta <= -HALF_PI + eps
    return ok


def _vec_int(iv: Interval, theta, eps):
    alo, ahi = iv.angles
    return (theta > alo + eps) & (theta < ahi - eps)
