"""Canonical s/u-arc tracing, rectangle assembly, cones and slope bounds.

A u-arc of the rectangle R(w[-n,0]) is the piece of the n-th forward image of
an axis-parallel seed line whose n-step itinerary matches the word; s-arcs
are the backward analogue.  Arcs are traced by mapping seed parameters
through the word and branch-selecting by itinerary, never by continuation:
the itinerary is a discrete invariant that survives rounding.

Cone boundary fields:

* a < -1: pencils of lines through (0,-1) (for C^u) and (1,0) (for C-hat),
  swept to the horizontal in R0 and from the vertical in R1.
* -1 < a < 0: tangents of the quadric families x(y-a)=c and (x-a)y=c in R0;
  in R1 the cone runs from the tangent of y(x+a)=c to the vertical.  The
  derivative maps the y(x+a) tangent field exactly onto the x(y-a) field
  (g = x(y-a) satisfies g o f = y(x+a)), which makes these cones invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mapping
from .coding import EPS_BD, Filtration, FiltrationArrays
from .mapping import MapParams
from .scalars import HALF_PI, PlanePoint, normalize
from .subshift import TransversalOrderRule, Word, words_of_length

DELTA_ARC = 1e-4       # chordal refinement target for polylines
EPS_SEED_INF = 1e-7    # angle offset replacing seed lines at infinity
SLOPE_SKIP_EDGE = 1e-3 # skip slope checks this close (angle) to infinity


class TraceError(RuntimeError):
    """Arc tracing failed: branch lost, empty window, or indeterminacy."""


@dataclass(frozen=True)
class SeedLine:
    """Axis-parallel seed line: {y=c} when axis='h', {x=c} when axis='v'."""

    axis: str
    value: float

    def quadruple(self, thetas):
        """Homogeneous quadruples of the line points at parameter angles."""
        s = np.sin(thetas)
        c = np.cos(thetas)
        v = np.full_like(s, self.value)
        ones = np.ones_like(s)
        if self.axis == "h":
            return s, c, v, ones
        return v, ones, s, c


def transversal_interval(m: MapParams, digit, kind):
    """Angle interval of the transversal T^{s/u}_digit (seed-line values)."""
    fil = Filtration(m)
    r = fil.by_digit[digit]
    if kind == "u":
        iv = r.yiv if digit == 0 else r.xiv
    else:
        iv = r.xiv if digit == 0 else r.yiv
    return iv.angles


def seed_axis(digit, kind):
    """Seed-line orientation for arcs of this kind homed at R_digit."""
    if kind == "u":
        return "h" if digit == 0 else "v"
    return "v" if digit == 0 else "h"


def param_interval(m: MapParams, digit, kind):
    """Angle interval swept by the seed-line parameter inside R_digit."""
    fil = Filtration(m)
    r = fil.by_digit[digit]
    if kind == "u":
        iv = r.xiv if digit == 0 else r.yiv
    else:
        iv = r.yiv if digit == 0 else r.xiv
    return iv.angles


def canonical_seed(m: MapParams, digit, kind, frac=0.5):
    """Seed line at the given arctan-fraction of the transversal interval.

    frac=0/1 are the extreme (boundary) lines; near-infinite ends are pulled
    in by EPS_SEED_INF so the line itself is representable.
    """
    lo, hi = transversal_interval(m, digit, kind)
    lo = max(lo, -HALF_PI + EPS_SEED_INF)
    hi = min(hi, HALF_PI - EPS_SEED_INF)
    theta = lo + (hi - lo) * frac
    return SeedLine(seed_axis(digit, kind), math.tan(theta))


def _word_digits(w, kind):
    """Digit tuple of a one-sided word, ordered seed-first.

    u-arcs consume a [-n,0] word (seed digit w_{-n} first); s-arcs a [0,m]
    word (seed digit w_m first).  Two-sided words are truncated to the
    relevant side.
    """
    if isinstance(w, Word):
        if kind == "u":
            return tuple(w.window(w.lo, 0))
        return tuple(reversed(w.window(0, w.hi)))
    return tuple(w)


@dataclass
class Arc:
    """Traced canonical arc: a monotone graph polyline inside its rectangle."""

    m: MapParams
    kind: str                    # 's' | 'u'
    word: tuple                  # seed-first digit tuple
    seed: SeedLine
    window: tuple                # (theta_lo, theta_hi) on the seed parameter
    thetas: np.ndarray           # seed parameters of the samples
    quad: tuple                  # (xn, xd, yn, yd) arrays of arc points
    graph_axis: str              # 'x' | 'y'
    monotone_violations: int = 0

    @property
    def home(self):
        return self.word[-1]

    @property
    def steps(self):
        return len(self.word) - 1

    @property
    def angles(self):
        return mapping.h_angles(*self.quad)

    @property
    def key_angles(self):
        ax, ay = self.angles
        return ax if self.graph_axis == "x" else ay

    @property
    def val_angles(self):
        ax, ay = self.angles
        return ay if self.graph_axis == "x" else ax

    def affine(self):
        return mapping.h_affine(*self.quad)

    def points(self):
        xn, xd, yn, yd = self.quad
        return [mapping.h_point(xn[i], xd[i], yn[i], yd[i]) for i in range(len(xn))]

    def endpoints(self):
        pts = self.points()
        return pts[0], pts[-1]

    def chordal_length(self):
        ax, ay = self.angles
        return float(np.sum(np.maximum(np.abs(np.diff(ax)), np.abs(np.diff(ay)))))

    def evaluate_thetas(self, thetas):
        """Map extra seed parameters through the word (no window checks)."""
        return _map_thetas(self.m, self.kind, self.word, self.seed, np.asarray(thetas))

    def interp_val(self, key):
        """Piecewise-linear value-angle at the given key-angle(s)."""
        k = self.key_angles
        v = self.val_angles
        if k[0] > k[-1]:
            k, v = k[::-1], v[::-1]
        return np.interp(key, k, v)

    def to_polyline(self):
        """(arctan x, arctan y) vertex array for plotting/serialization."""
        ax, ay = self.angles
        return np.column_stack([ax, ay])


class _Tracer:
    """Shared evaluation context for one arc trace."""

    def __init__(self, m, kind, word, seed):
        self.m = m
        self.kind = kind
        self.word = word
        self.seed = seed
        self.a = float(m.a)
        self.fa = FiltrationArrays(m)
        self.forward = kind == "u"

    def map_thetas(self, thetas, prefix_len=None):
        """Orbit endpoints for seed parameters: (quad, ok_mask)."""
        word = self.word if prefix_len is None else self.word[:prefix_len]
        xn, xd, yn, yd = self.seed.quadruple(np.asarray(thetas, dtype=float))
        xn, xd, yn, yd, bad0 = mapping._h_normalize(xn, xd, yn, yd)
        ok = ~bad0
        ax, ay = mapping.h_angles(xn, xd, yn, yd)
        ok &= self.fa.digit_member(word[0], ax, ay)
        step = mapping.h_forward if self.forward else mapping.h_inverse
        for k in range(len(word) - 1):
            xn, xd, yn, yd, bad = step(self.a, xn, xd, yn, yd)
            ok &= ~bad
            ax, ay = mapping.h_angles(xn, xd, yn, yd)
            ok &= self.fa.digit_member(word[k + 1], ax, ay)
        return (xn, xd, yn, yd), ok

    def compat(self, thetas, prefix_len):
        return self.map_thetas(thetas, prefix_len)[1]


def _map_thetas(m, kind, word, seed, thetas):
    return _Tracer(m, kind, word, seed).map_thetas(thetas)


def _zoom_edge(tracer, depth, t_out, t_in, rounds=3, pts=17):
    """Shrink [t_out, t_in] (outside->inside) around the compat edge."""
    for _ in range(rounds):
        ts = np.linspace(t_out, t_in, pts)
        ok = tracer.compat(ts, depth)
        idx = np.nonzero(ok)[0]
        if len(idx) == 0:
            return t_in
        first = idx[0] if t_out < t_in else idx[-1]
        # walk from the outside end toward the first compatible sample
        order = range(len(ts)) if t_out < t_in else range(len(ts) - 1, -1, -1)
        prev = t_out
        for i in order:
            if ok[i]:
                t_in = ts[i]
                t_out = prev
                break
            prev = ts[i]
    return t_in if rounds == 0 else 0.5 * (t_out + t_in)


def _find_window(tracer: _Tracer, scan=65, max_scan=4097, edge_rounds=3):
    """Locate the parameter subinterval whose itinerary matches the word.

    Progressively refines through word prefixes; the matching set is a single
    interval by the product structure of rectangles.
    """
    word = tracer.word
    lo, hi = param_interval(tracer.m, word[0], tracer.kind)
    lo, hi = lo + 1e-12, hi - 1e-12
    for depth in range(2, len(word) + 1):
        last = depth == len(word)
        n = scan
        idx = []
        while n <= max_scan:
            ts = np.linspace(lo, hi, n)
            ok = tracer.compat(ts, depth)
            idx = np.nonzero(ok)[0]
            if len(idx):
                break
            n = n * 4 + 1
        if len(idx) == 0:
            raise TraceError(
                f"no parameters match prefix {word[:depth]} of {word} "
                f"(kind {tracer.kind}, seed {tracer.seed})"
            )
        i0, i1 = idx[0], idx[-1]
        rounds = edge_rounds + (4 if last else 0)
        new_lo = ts[i0] if i0 == 0 else _zoom_edge(tracer, depth, ts[i0 - 1], ts[i0], rounds)
        new_hi = ts[i1] if i1 == len(ts) - 1 else _zoom_edge(tracer, depth, ts[i1 + 1], ts[i1], rounds)
        lo, hi = new_lo, new_hi
        if not lo < hi:
            lo, hi = min(lo, hi), max(lo, hi)
    return lo, hi


def trace_arc(m: MapParams, w, kind, seed: SeedLine | None = None,
              delta=DELTA_ARC, max_points=60000, min_dtheta=1e-13) -> Arc:
    """Trace the canonical arc of R(w) cut out by the seed line.

    ``w`` is a one-sided word: extent [-n,0] for u-arcs (traced by n forward
    steps of the seed line in R_{w_-n}) or [0,m] for s-arcs (m backward
    steps).  Sampling is refined until adjacent samples are closer than
    ``delta`` in the chordal metric.
    """
    word = _word_digits(w, kind)
    if seed is None:
        seed = canonical_seed(m, word[0], kind)
    if seed.axis != seed_axis(word[0], kind):
        raise TraceError(f"seed line {seed} does not cut R_{word[0]} in a proper {kind}-arc")
    tracer = _Tracer(m, kind, word, seed)
    t_lo, t_hi = _find_window(tracer)
    n0 = 33
    thetas = np.linspace(t_lo, t_hi, n0)
    quad, ok = tracer.map_thetas(thetas)
    thetas = thetas[ok]
    quad = tuple(q[ok] for q in quad)
    if len(thetas) < 2:
        raise TraceError(f"window for {word} collapsed ({len(thetas)} samples)")
    while len(thetas) < max_points:
        ax, ay = mapping.h_angles(*quad)
        gaps = np.maximum(np.abs(np.diff(ax)), np.abs(np.diff(ay)))
        need = (gaps > delta) & (np.diff(thetas) > min_dtheta)
        if not need.any():
            break
        mids = 0.5 * (thetas[:-1][need] + thetas[1:][need])
        mq, mok = tracer.map_thetas(mids)
        mids = mids[mok]
        mq = tuple(q[mok] for q in mq)
        if len(mids) == 0:
            break
        thetas = np.concatenate([thetas, mids])
        order = np.argsort(thetas)
        thetas = thetas[order]
        quad = tuple(np.concatenate([q, nq])[order] for q, nq in zip(quad, mq))
    axis = _graph_axis(word[-1], kind)
    arc = Arc(m, kind, word, seed, (t_lo, t_hi), thetas, quad, axis)
    arc.monotone_violations = _count_monotone_violations(arc)
    return arc


def _graph_axis(home_digit, kind):
    if home_digit == 0:
        return "x" if kind == "u" else "y"
    return "y" if kind == "u" else "x"


def _count_monotone_violations(arc):
    k = arc.key_angles
    d = np.diff(k)
    return int(min((d > 0).sum(), (d < 0).sum()))


# ---------------------------------------------------------------------------
# slope bounds (uniformity of arcs)
# ---------------------------------------------------------------------------

def _bound_funcs(m: MapParams, home, kind):
    """Bound interval (lo(x,y), hi(x,y)) for the graph-coordinate secant.

    For graphs over x the coordinate is dy/dx; for graphs over y it is dx/dy.
    Returns functions of affine (x, y); either side may be None (unbounded).
    """
    a = float(m.a)
    if m.deep:
        if kind == "u":
            if home == 0:   # dy/dx in ((y+1)/x, 0)
                return (lambda x, y: (y + 1) / x), (lambda x, y: 0.0)
            # home 1: dx/dy in (x/(y+1), 0)
            return (lambda x, y: x / (y + 1)), (lambda x, y: 0.0)
        if home == 0:       # s, graph over y: dx/dy in ((x-1)/y, 0)
            return (lambda x, y: (x - 1) / y), (lambda x, y: 0.0)
        # s, home 1, graph over x: dy/dx in (y/(x-1), 0)
        return (lambda x, y: y / (x - 1)), (lambda x, y: 0.0)
    if kind == "u":
        if home == 0:       # dy/dx in (0, (a-y)/x)
            return (lambda x, y: 0.0), (lambda x, y: (a - y) / x)
        # home 1: dx/dy in (0, (x+a)/(-y)) [reciprocal of the y(x+a) tangent]
        return (lambda x, y: 0.0), (lambda x, y: (x + a) / (-y))
    if home == 0:           # s, graph over y: dx/dy in (0, -(x+a)/y)
        return (lambda x, y: 0.0), (lambda x, y: -(x + a) / y)
    # s, home 1, graph over x: dy/dx in (0, (a-y)/x)
    return (lambda x, y: 0.0), (lambda x, y: (a - y) / x)


def check_slopes(m: MapParams, arc: Arc, delta_slope=1e-8):
    """Verify the cone slope bounds on every finite interior secant of an arc.

    Secants are compared against the bound fields evaluated at both segment
    endpoints (the fields vary monotonically along arcs); segments touching
    the arc ends or within SLOPE_SKIP_EDGE of infinity are skipped.  Returns
    a record with the worst margin (>= -delta_slope passes).
    """
    ax, ay = arc.angles
    x, y = arc.affine()
    k = arc.key_angles
    order = np.argsort(k)
    x, y, ax, ay = x[order], y[order], ax[order], ay[order]
    lo_f, hi_f = _bound_funcs(m, arc.home, arc.kind)
    finite = np.isfinite(x) & np.isfinite(y) \
        & (np.abs(ax) < HALF_PI - SLOPE_SKIP_EDGE) \
        & (np.abs(ay) < HALF_PI - SLOPE_SKIP_EDGE)
    worst = math.inf
    checked = 0
    n = len(x)
    for i in range(1, n - 2):
        if not (finite[i] and finite[i + 1]):
            continue
        if arc.graph_axis == "x":
            du, dv = x[i + 1] - x[i], y[i + 1] - y[i]
        else:
            du, dv = y[i + 1] - y[i], x[i + 1] - x[i]
        if du == 0:
            continue
        sec = dv / du
        margins = []
        if lo_f is not None:
            b = min(lo_f(x[i], y[i]), lo_f(x[i + 1], y[i + 1]))
            margins.append(sec - b)
        if hi_f is not None:
            b = max(hi_f(x[i], y[i]), hi_f(x[i + 1], y[i + 1]))
            margins.append(b - sec)
        mmin = min(margins)
        worst = min(worst, mmin)
        checked += 1
    passed = checked > 0 and worst >= -delta_slope
    return {"checked_segments": checked, "worst_margin": worst,
            "pass": bool(passed), "delta_slope": delta_slope}


# ---------------------------------------------------------------------------
# cones
# ---------------------------------------------------------------------------

def cone_angles(m: MapParams, p: PlanePoint, kind="u", hat=False):
    """Direction-space interval (lo, hi) in [0, pi] of the requested cone.

    s-cones are the involution images of u-cones (conjugating f to f^{-1}).
    """
    if kind == "s":
        q = mapping.involution(p)
        lo, hi = cone_angles(m, q, "u", hat)
        # slope m -> 1/m under (x,y)->(-y,-x): direction angle th -> pi/2 - th
        return _norm_cone(HALF_PI - hi, HALF_PI - lo)
    x, y = (float(v) for v in p.affine())
    a = float(m.a)
    fil = Filtration(m)
    in0 = fil.r0.contains(p)
    if m.deep:
        mm = y / (x - 1) if hat else (y + 1) / x
        ang = math.atan(mm) % math.pi
        if in0:
            return (ang, math.pi)
        return (HALF_PI, ang)
    if in0:
        mm = -y / (x - a) if hat else (a - y) / x
        return (0.0, math.atan(mm) % math.pi)
    mm = -y / (x + a)
    return (math.atan(mm) % math.pi, HALF_PI)


def _norm_cone(lo, hi):
    if lo > hi:
        lo, hi = hi, lo
    if lo < 0:
        lo, hi = lo + math.pi, hi + math.pi
        if lo > hi:
            lo, hi = hi, lo
    return lo, hi


def cone_margin(theta, lo, hi):
    """Signed angular distance of direction theta into the cone [lo, hi]."""
    best = -math.inf
    for t in (theta - math.pi, theta, theta + math.pi):
        best = max(best, min(t - lo, hi - t))
    return best


def direction_angle(v):
    return math.atan2(v[1], v[0]) % math.pi


def _push(jac, theta):
    c, s = math.cos(theta), math.sin(theta)
    return (jac[0][0] * c + jac[0][1] * s, jac[1][0] * c + jac[1][1] * s)


def cone_invariance_check(m: MapParams, p: PlanePoint, samples=16):
    """One-step and two-step cone checks at a point.

    Df must carry the hat cone at p into the cone at fp; Df^2 must carry the
    cone at p strictly inside the cone at f^2 p.  Reports minimum angular
    margins of the image directions to the image-cone boundary.
    """
    fil = Filtration(m)
    fp = mapping.eval_forward(m, p)
    f2p = mapping.eval_forward(m, fp)
    for q, name in ((p, "p"), (fp, "fp"), (f2p, "f2p")):
        if not q.is_finite or not (fil.r0.contains(q) or fil.r1.contains(q)):
            raise ValueError(f"{name} outside (R0 u R1) n R^2")
    j1 = mapping.jacobian(m, p)
    j2 = mapping.jacobian(m, fp)
    j2tot = _mat_mul(j2, j1)
    hat = cone_angles(m, p, "u", hat=True)
    cone_p = cone_angles(m, p, "u", hat=False)
    cone_fp = cone_angles(m, fp, "u", hat=False)
    cone_f2p = cone_angles(m, f2p, "u", hat=False)
    margin1 = math.inf
    for theta in np.linspace(hat[0], hat[1], samples):
        img = direction_angle(_push(j1, theta))
        margin1 = min(margin1, cone_margin(img, *cone_fp))
    margin2 = math.inf
    for theta in np.linspace(cone_p[0], cone_p[1], samples):
        img = direction_angle(_push(j2tot, theta))
        margin2 = min(margin2, cone_margin(img, *cone_f2p))
    return {"margin_one_step": margin1, "margin_two_step": margin2,
            "pass_one_step": margin1 >= -1e-9, "pass_two_step": margin2 > 0.0}


def _mat_mul(a, b):
    return (
        (a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]),
        (a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]),
    )


# ---------------------------------------------------------------------------
# rectangles
# ---------------------------------------------------------------------------

@dataclass
class RectangleApprox:
    """R(w) for a finite two-sided word, bounded by four extreme arcs."""

    word: Word
    boundary_u: tuple      # pair of Arc (from R(w^-))
    boundary_s: tuple      # pair of Arc (from R(w^+))
    corners: list          # PlanePoints, pairwise boundary intersections
    corner_ids: list       # (u_index, s_index) per corner

    @property
    def home(self):
        return self.word.digit(0)

    def delta_corner(self):
        """Corner nearest the origin (finite corners only)."""
        finite = [c for c in self.corners if c.is_finite]
        return min(finite, key=_corner_norm) if finite else None

    def delta_far_corner(self):
        inf = [c for c in self.corners if not c.is_finite]
        if inf:
            return inf[0]
        return max(self.corners, key=_corner_norm) if self.corners else None

    def corner_midpoint(self):
        """Mean of the finite corners in affine coordinates (Newton seed)."""
        finite = [c for c in self.corners if c.is_finite]
        if not finite:
            raise TraceError(f"no finite corners for {self.word}")
        xs = [float(c.x.affine()) for c in finite]
        ys = [float(c.y.affine()) for c in finite]
        return (sum(xs) / len(xs), sum(ys) / len(ys))


def _corner_norm(c):
    x, y = c.affine()
    return float(x) ** 2 + float(y) ** 2


def build_rectangle(m: MapParams, w: Word, delta=1e-3) -> RectangleApprox:
    """Boundary arcs and corners of R(w) for a finite admissible word.

    The u-boundary arcs are traced from the extreme transversal lines of
    R(w^-), the s-boundary from those of R(w^+); corners are located by
    bisection of the monotone graphing functions (unique crossing by the
    slope bounds).
    """
    w.validate()
    wm = w.minus()
    wp = w.plus()
    u_arcs = []
    s_arcs = []
    for frac in (0.0, 1.0):
        seed = canonical_seed(m, wm.digit(wm.lo), "u", frac)
        u_arcs.append(trace_arc(m, wm, "u", seed, delta=delta))
    for frac in (0.0, 1.0):
        seed = canonical_seed(m, wp.digit(wp.hi), "s", frac)
        s_arcs.append(trace_arc(m, wp, "s", seed, delta=delta))
    corners = []
    ids = []
    for iu, ua in enumerate(u_arcs):
        for isa, sa in enumerate(s_arcs):
            try:
                c = intersect_arcs(ua, sa)
            except TraceError:
                continue
            corners.append(c)
            ids.append((iu, isa))
    return RectangleApprox(w, tuple(u_arcs), tuple(s_arcs), corners, ids)


def intersect_arcs(u_arc: Arc, s_arc: Arc, tol=1e-10, refine_rounds=2):
    """Unique crossing of a u-arc and an s-arc of the same home rectangle.

    Works on the monotone graph representations: with x = h(y) on the s-arc
    and y = g(x) on the u-arc, F(x) = h(g(x)) - x is strictly monotone and
    has exactly one root.  After bisection on the polylines the crossing is
    refined by resampling both true arcs locally.
    """
    if u_arc.home != s_arc.home:
        raise TraceError("arcs live in different rectangles")
    root = None
    for _ in range(refine_rounds + 1):
        root = _polyline_cross(u_arc, s_arc)
        if root is None:
            raise TraceError("no crossing bracket found")
        key_u, key_s = root
        u_arc = _local_resample(u_arc, key_u)
        s_arc = _local_resample(s_arc, key_s)
    root = _polyline_cross(u_arc, s_arc)
    if root is None:
        raise TraceError("crossing lost during refinement")
    key_u, key_s = root
    if u_arc.graph_axis == "x":
        ax, ay = key_u, float(u_arc.interp_val(key_u))
    else:
        ax, ay = float(u_arc.interp_val(key_u)), key_u
    return PlanePoint(normalize(math.sin(ax), math.cos(ax)),
                      normalize(math.sin(ay), math.cos(ay)))


def _polyline_cross(u_arc, s_arc):
    """Bisection crossing of the two graph interpolants, in angle space."""
    ku = np.sort(u_arc.key_angles)
    ks = np.sort(s_arc.key_angles)
    # u graphs key->val where val lives on s's key axis and vice versa
    lo = max(ku[0], float(np.min(s_arc.val_angles)))
    hi = min(ku[-1], float(np.max(s_arc.val_angles)))
    if not lo < hi:
        lo, hi = ku[0], ku[-1]

    def F(t):
        v = float(u_arc.interp_val(t))
        v = min(max(v, ks[0]), ks[-1])
        return float(s_arc.interp_val(v)) - t

    ts = np.linspace(lo, hi, 129)
    vals = [F(t) for t in ts]
    bracket = None
    for i in range(len(ts) - 1):
        if vals[i] == 0:
            bracket = (ts[i], ts[i])
            break
        if vals[i] * vals[i + 1] < 0:
            bracket = (ts[i], ts[i + 1])
            break
    if bracket is None:
        return None
    t0, t1 = bracket
    for _ in range(80):
        tm = 0.5 * (t0 + t1)
        if F(t0) * F(tm) <= 0:
            t1 = tm
        else:
            t0 = tm
        if t1 - t0 < 1e-15:
            break
    t = 0.5 * (t0 + t1)
    return t, float(np.clip(u_arc.interp_val(t), ks[0], ks[-1]))


def _local_resample(arc: Arc, key_angle, n_extra=9):
    """Insert true samples around the segment containing key_angle."""
    k = arc.key_angles
    order = np.argsort(k)
    ksorted = k[order]
    idx = int(np.searchsorted(ksorted, key_angle))
    idx = min(max(idx, 1), len(ksorted) - 1)
    th_pair = arc.thetas[order][max(idx - 1, 0): idx + 1]
    if len(th_pair) < 2:
        return arc
    t0, t1 = float(th_pair[0]), float(th_pair[1])
    extra = np.linspace(min(t0, t1), max(t0, t1), n_extra + 2)[1:-1]
    quad, ok = _map_thetas(arc.m, arc.kind, arc.word, arc.seed, extra)
    extra = extra[ok]
    quad = tuple(q[ok] for q in quad)
    if len(extra) == 0:
        return arc
    thetas = np.concatenate([arc.thetas, extra])
    order2 = np.argsort(thetas)
    merged = tuple(np.concatenate([q0, q1])[order2] for q0, q1 in zip(arc.quad, quad))
    return Arc(arc.m, arc.kind, arc.word, arc.seed, arc.window,
               thetas[order2], merged, arc.graph_axis)


def band_contains(outer_pair, inner_arc: Arc, tol=1e-3):
    """True if the inner arc lies between the two outer arcs (same graph).

    Compared pointwise on the overlap of the key ranges, with tolerance in
    angle space; used for the nesting property R(w') subset R(w).
    """
    g1, g2 = outer_pair
    k = inner_arc.key_angles
    lo = max(float(np.min(g1.key_angles)), float(np.min(g2.key_angles)), float(np.min(k)))
    hi = min(float(np.max(g1.key_angles)), float(np.max(g2.key_angles)), float(np.max(k)))
    sel = (k >= lo) & (k <= hi)
    if not sel.any():
        return True
    v = inner_arc.val_angles[sel]
    v1 = g1.interp_val(k[sel])
    v2 = g2.interp_val(k[sel])
    vlo = np.minimum(v1, v2) - tol
    vhi = np.maximum(v1, v2) + tol
    return bool(np.all((v >= vlo) & (v <= vhi)))


# ---------------------------------------------------------------------------
# transversal order calibration
# ---------------------------------------------------------------------------

_ORDER_CACHE = {}


def arc_position(arc: Arc):
    """Geometric position of an arc on its transversal (angle coordinate)."""
    k = arc.key_angles
    mid = 0.5 * (float(np.min(k)) + float(np.max(k)))
    return float(arc.interp_val(mid))


def _positions_for(m, side, home, depth):
    kind = "s" if side == "+" else "u"
    out = []
    for digits in words_of_length(depth + 1, first=home):
        if side == "+":
            w = Word.one_sided(digits, "+")
        else:
            w = Word.one_sided(tuple(reversed(digits)), "-")
        arc = trace_arc(m, w, kind, delta=5e-3)
        out.append((digits, arc_position(arc)))
    return out


def calibrate_transversal_order(m: MapParams, side="+", depth=4):
    """Fit the combinatorial transversal order against traced arc positions.

    Returns (rule, report).  The rule's base/branch orientation bits are
    chosen so the recursive comparator reproduces the geometric left-to-right
    (resp. bottom-to-top) order of traced arcs exactly; the fitted table is
    part of the report rather than asserted a priori.
    """
    key = (float(m.a), side, depth)
    if key in _ORDER_CACHE:
        return _ORDER_CACHE[key]
    pos = {h: _positions_for(m, side, h, depth) for h in (0, 1)}
    candidates = []
    for b0 in (1, -1):
        for br00 in (1, -1):
            for br01 in (1, -1):
                for br10 in (1, -1):
                    rule = TransversalOrderRule(
                        base={0: b0, 1: b0},
                        branch={(0, 0): br00, (0, 1): br01, (1, 0): br10},
                    )
                    if _rule_matches(rule, pos):
                        candidates.append(rule)
    if not candidates:
        raise TraceError("no orientation table reproduces the traced arc order")
    rule = candidates[0]
    report = {
        "side": side,
        "depth": depth,
        "base": dict(rule.base),
        "branch": {f"{k[0]}->{k[1]}": v for k, v in rule.branch.items()},
        "candidates": len(candidates),
        "words_checked": sum(len(v) for v in pos.values()),
    }
    _ORDER_CACHE[key] = (rule, report)
    return rule, report


def _rule_matches(rule, pos):
    import functools
    for home, items in pos.items():
        geo = [d for d, _ in sorted(items, key=lambda t: t[1])]
        comb = sorted((d for d, _ in items),
                      key=functools.cmp_to_key(rule.compare))
        if geo != comb and geo != list(reversed(comb)):
            return False
    return True
