"""The golden mean subshift: admissible words, counting, and its measures.

Symbols are {0,1} and the block "11" is forbidden.  Extents follow the
convention [-n, m] with -n <= 0 <= m; infinite tails are representable when
eventually periodic (stored as a repeating cycle beyond the finite core).

Two measures live here:

* the stationary Markov (Parry) measure ``nu`` of maximal entropy log(phi),
  realized through the Perron data of the incidence matrix [[1,1],[1,0]], and
* the *balanced* one-sided measures ``nu+/-`` under which each right inverse
  of the one-sided shift contracts mass by exactly 1/phi.

Both are computed exactly in Q(sqrt 5).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

PHI = (1 + math.sqrt(5)) / 2


class ForbiddenBlockError(ValueError):
    def __init__(self, index):
        super().__init__(f"forbidden block '11' at index {index}")
        self.index = index


class ExtentError(ValueError):
    """Word extent no longer brackets index 0."""


def fibonacci(n):
    """Fibonacci numbers with F_{-1}=1, F_0=0, F_1=1."""
    if n < -1:
        raise ValueError("fibonacci defined for n >= -1 here")
    a, b = 1, 0  # F_{-1}, F_0
    for _ in range(n):
        a, b = b, a + b
    return b if n >= 0 else a


# ---------------------------------------------------------------------------
# exact arithmetic in Q(sqrt 5)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Q5:
    """p + q*sqrt(5) with rational p, q; exact field arithmetic."""

    p: Fraction
    q: Fraction

    @staticmethod
    def of(p, q=0):
        return Q5(Fraction(p), Fraction(q))

    def __add__(self, o):
        o = _q5(o)
        return Q5(self.p + o.p, self.q + o.q)

    __radd__ = __add__

    def __sub__(self, o):
        o = _q5(o)
        return Q5(self.p - o.p, self.q - o.q)

    def __rsub__(self, o):
        return _q5(o) - self

    def __mul__(self, o):
        o = _q5(o)
        return Q5(self.p * o.p + 5 * self.q * o.q, self.p * o.q + self.q * o.p)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = _q5(o)
        n = o.p * o.p - 5 * o.q * o.q
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt5)")
        return self * Q5(o.p / n, -o.q / n)

    def __neg__(self):
        return Q5(-self.p, -self.q)

    def __pow__(self, k):
        if k < 0:
            return Q5.of(1) / self ** (-k)
        out = Q5.of(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, o):
        o = _q5(o)
        return self.p == o.p and self.q == o.q

    def __hash__(self):
        return hash((self.p, self.q))

    def sign(self):
        if self.q == 0:
            return -1 if self.p < 0 else (0 if self.p == 0 else 1)
        if self.p == 0:
            return -1 if self.q < 0 else 1
        if self.p > 0 and self.q > 0:
            return 1
        if self.p < 0 and self.q < 0:
            return -1
        # opposite signs: compare p^2 with 5 q^2
        lhs = self.p * self.p
        rhs = 5 * self.q * self.q
        big_p = lhs > rhs
        if self.p > 0:
            return 1 if big_p else -1
        return -1 if big_p else 1

    def __lt__(self, o):
        return (self - _q5(o)).sign() < 0

    def __le__(self, o):
        return (self - _q5(o)).sign() <= 0

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(5)

    def __repr__(self):
        return f"({self.p}+{self.q}*sqrt5)"


def _q5(v):
    if isinstance(v, Q5):
        return v
    return Q5(Fraction(v), Fraction(0))


GOLDEN = Q5(Fraction(1, 2), Fraction(1, 2))       # phi
GOLDEN_INV = Q5(Fraction(-1, 2), Fraction(1, 2))  # 1/phi = phi - 1


# ---------------------------------------------------------------------------
# words
# ---------------------------------------------------------------------------

def _check_block(digits, offset=0):
    for i in range(len(digits) - 1):
        if digits[i] == 1 and digits[i + 1] == 1:
            raise ForbiddenBlockError(offset + i)


@dataclass(frozen=True)
class Word:
    """Admissible word with finite core digits on extent [lo, lo+len-1].

    ``left_cycle`` / ``right_cycle``, when set, repeat the word beyond the
    core: digit(lo-1-j) continues the left cycle leftward and
    digit(hi+1+j) continues the right cycle rightward.  Cycles are aligned so
    the core boundary digit is the last (resp. first) cycle entry.
    """

    digits: tuple
    lo: int
    left_cycle: tuple = None
    right_cycle: tuple = None

    def __post_init__(self):
        if not all(d in (0, 1) for d in self.digits):
            raise ValueError("digits must be 0/1")
        if self.left_cycle is not None and len(self.left_cycle) == 0:
            raise ValueError("empty left cycle")
        if self.right_cycle is not None and len(self.right_cycle) == 0:
            raise ValueError("empty right cycle")
        if len(self.digits) == 0:
            raise ValueError("empty word")

    # -- basic geometry ----------------------------------------------------

    @property
    def hi(self):
        return self.lo + len(self.digits) - 1

    @property
    def extent(self):
        return (self.lo if self.left_cycle is None else -math.inf,
                self.hi if self.right_cycle is None else math.inf)

    @property
    def finite(self):
        return self.left_cycle is None and self.right_cycle is None

    def digit(self, i):
        if self.lo <= i <= self.hi:
            return self.digits[i - self.lo]
        if i < self.lo:
            if self.left_cycle is None:
                raise ExtentError(f"index {i} outside extent [{self.lo},{self.hi}]")
            c = self.left_cycle
            return c[(i - self.lo) % len(c)]
        if self.right_cycle is None:
            raise ExtentError(f"index {i} outside extent [{self.lo},{self.hi}]")
        c = self.right_cycle
        return c[(i - self.lo) % len(c)]

    def window(self, lo, hi):
        """Digits on [lo, hi] as a tuple (materializing cycles as needed)."""
        return tuple(self.digit(i) for i in range(lo, hi + 1))

    # -- construction ------------------------------------------------------

    @staticmethod
    def finite_word(digits, lo=0):
        digits = tuple(int(d) for d in digits)
        hi = lo + len(digits) - 1
        if not (lo <= 0 <= hi):
            raise ExtentError(f"extent [{lo},{hi}] does not bracket 0")
        _check_block(digits, lo)
        return Word(digits, lo)

    @staticmethod
    def periodic(cycle):
        """Two-sided periodic word ...ccc.ccc... with digit 0 at index 0."""
        cycle = tuple(int(d) for d in cycle)
        _check_block(cycle + cycle)
        return Word(cycle, 0, left_cycle=cycle, right_cycle=cycle)

    @staticmethod
    def one_sided(digits, side="+", cycle=None):
        """A [0,m] word (side '+') or [-n,0] word (side '-'), optional tail."""
        digits = tuple(int(d) for d in digits)
        _check_block(digits)
        if side == "+":
            w = Word(digits, 0, right_cycle=tuple(cycle) if cycle else None)
        else:
            w = Word(digits, -len(digits) + 1, left_cycle=tuple(cycle) if cycle else None)
        w.validate()
        return w

    # -- operations --------------------------------------------------------

    def validate(self):
        """Check admissibility including cycle junctions; returns self."""
        _check_block(self.digits, self.lo)
        if self.left_cycle:
            _check_block(self.left_cycle + self.left_cycle, self.lo - 2 * len(self.left_cycle))
            # junction: cycle digit at lo-1 followed by core digit at lo
            if self.digit(self.lo - 1) == 1 and self.digits[0] == 1:
                raise ForbiddenBlockError(self.lo - 1)
        if self.right_cycle:
            _check_block(self.right_cycle + self.right_cycle, self.hi + 1)
            if self.digits[-1] == 1 and self.digit(self.hi + 1) == 1:
                raise ForbiddenBlockError(self.hi)
        return self

    def shift(self, k):
        """sigma^k: digit'_j = digit_{j+k}, i.e. reindex by lo -> lo - k."""
        lo = self.lo - k
        hi = lo + len(self.digits) - 1
        if self.finite:
            if not (lo <= 0 <= hi):
                raise ExtentError(f"shift({k}) leaves extent [{lo},{hi}] off 0")
            return Word(self.digits, lo)
        # with infinite tails, rebuild a core that brackets 0
        w = Word(self.digits, lo, self.left_cycle, self.right_cycle)
        new_lo, new_hi = min(lo, 0), max(hi, 0)
        core = tuple(w.digit(i) for i in range(new_lo, new_hi + 1))
        return Word(core, new_lo, self.left_cycle, self.right_cycle)

    def truncate(self, n_left, m_right):
        """Finite subword on [-n_left, m_right]."""
        return Word(self.window(-n_left, m_right), -n_left)

    def minus(self):
        """w^- = w[lo..0] (left one-sided part of the finite core)."""
        return Word(self.window(self.lo, 0), self.lo)

    def plus(self):
        """w^+ = w[0..hi] (right one-sided part of the finite core)."""
        return Word(self.window(0, self.hi), 0)

    @property
    def alternating(self):
        """True if no '00' (and no '11') appears: subword of ...0101..."""
        d = self.digits
        core = all(d[i] != d[i + 1] for i in range(len(d) - 1))
        if not core:
            return False
        for c, at_left in ((self.left_cycle, True), (self.right_cycle, False)):
            if c is None:
                continue
            if len(c) == 1:
                return False  # constant tail 0 repeats 00
            if tuple(sorted(set(c))) != (0, 1):
                return False
            j = self.lo - 1 if at_left else self.hi + 1
            if self.digit(j) == (self.digits[0] if at_left else self.digits[-1]):
                return False
        return True

    def cycle_canonical(self):
        """Canonical rotation (lexicographic minimum) of a periodic word's cycle."""
        if self.left_cycle is None or self.right_cycle is None:
            raise ValueError("not a two-sided periodic word")
        c = self.digits
        rots = [c[i:] + c[:i] for i in range(len(c))]
        return min(rots)

    def __str__(self):
        left = "".join(str(d) for d in self.digits[: -self.lo]) if self.lo < 0 else ""
        right = "".join(str(d) for d in self.digits[-self.lo:]) if self.lo < 0 else "".join(map(str, self.digits))
        pre = f"[{''.join(map(str, self.left_cycle))}]..." if self.left_cycle else ""
        post = f"...[{''.join(map(str, self.right_cycle))}]" if self.right_cycle else ""
        return f"{pre}{left}.{right}{post}"


def validate(digits, lo=0):
    """Validate raw digits into a Word; raises ForbiddenBlockError on '11'."""
    return Word.finite_word(digits, lo)


def admissible(digits):
    return all(not (digits[i] == 1 and digits[i + 1] == 1) for i in range(len(digits) - 1))


def count_words(n_left, m_right, first, last):
    """Number of admissible [-n,m] words with given first and last digits.

    This is the (first,last) entry of [[1,1],[1,0]]^(n+m); for first=last=0
    it equals F_{n+m+1}.
    """
    steps = n_left + m_right
    a = ((1, 1), (1, 0))
    # integer matrix power by squaring
    def mul(u, v):
        return (
            (u[0][0] * v[0][0] + u[0][1] * v[1][0], u[0][0] * v[0][1] + u[0][1] * v[1][1]),
            (u[1][0] * v[0][0] + u[1][1] * v[1][0], u[1][0] * v[0][1] + u[1][1] * v[1][1]),
        )
    out = ((1, 0), (0, 1))
    base = a
    k = steps
    while k:
        if k & 1:
            out = mul(out, base)
        base = mul(base, base)
        k >>= 1
    return out[first][last]


def words_of_length(length, first=None, last=None):
    """All admissible digit tuples of a given length (optionally pinned ends)."""
    out = []
    def rec(prefix):
        if len(prefix) == length:
            if last is None or prefix[-1] == last:
                out.append(tuple(prefix))
            return
        for d in (0, 1):
            if prefix and prefix[-1] == 1 and d == 1:
                continue
            prefix.append(d)
            rec(prefix)
            prefix.pop()
    if first is None:
        rec([])
    else:
        rec([first])
    return out


def enumerate_periodic(n):
    """All words w with sigma^n w = w, as two-sided periodic Words.

    Count equals trace([[1,1],[1,0]]^n) = F_{n+1} + F_{n-1}.
    """
    if not 1 <= n <= 24:
        raise ValueError("period must be in 1..24")
    out = []
    for digits in words_of_length(n):
        if digits[-1] == 1 and digits[0] == 1:
            continue  # wrap-around 11
        out.append(Word.periodic(digits))
    return out


def periodic_cycles(n):
    """Representatives (canonical rotations) of the period-n orbits, as digit
    tuples, for all divisors-of-n periods; excludes nothing."""
    seen = {}
    for w in enumerate_periodic(n):
        seen.setdefault(w.cycle_canonical(), w)
    return seen


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

class ParryMeasure:
    """Perron data of [[1,1],[1,0]] and the two associated measures.

    ``cylinder`` is the stationary Markov measure of maximal entropy;
    ``balanced_cylinder`` is the one-sided transverse measure scaled by 1/phi
    under each right inverse of the shift.  Everything is exact in Q(sqrt5).
    """

    def __init__(self):
        phi = GOLDEN
        one = Q5.of(1)
        denom = one + phi * phi
        self.phi = phi
        self.stationary = (phi * phi / denom, one / denom)
        inv = GOLDEN_INV
        self.transition = ((inv, inv * inv), (one, Q5.of(0)))

    def cylinder(self, word: Word):
        """nu-mass of the cylinder over a finite word (exact Q5)."""
        if not word.finite:
            raise ValueError("cylinder measure needs a finite word")
        d = word.digits
        out = self.stationary[d[0]]
        for i in range(len(d) - 1):
            out = out * self.transition[d[i]][d[i + 1]]
        return out

    def cylinder_float(self, word):
        return float(self.cylinder(word))

    def balanced_cylinder(self, digits):
        """nu+ mass of a one-sided cylinder: phi^-len, one extra phi^-1 if the
        far digit is 1.  (For nu- pass the digits reversed.)"""
        digits = tuple(digits)
        if not admissible(digits):
            return Q5.of(0)
        k = len(digits) + (1 if digits[-1] == 1 else 0)
        return GOLDEN_INV**k

    def balanced_check(self, digits):
        """Verify the balanced identity for every admissible prepended digit.

        Returns a record with per-branch ratios; raises AssertionError if any
        branch fails nu+(C(kw)) = phi^-1 nu+(C(w)) exactly.
        """
        digits = tuple(digits)
        base = self.balanced_cylinder(digits)
        branches = {}
        for k in (0, 1):
            if k == 1 and digits[0] == 1:
                continue
            ext = self.balanced_cylinder((k,) + digits)
            branches[k] = ext
            assert ext == GOLDEN_INV * base, f"branch {k} violates the balanced identity"
        return {
            "word": "".join(map(str, digits)),
            "base_mass": float(base),
            "branches": {k: float(v) for k, v in branches.items()},
            "ratio": float(GOLDEN_INV),
        }


# ---------------------------------------------------------------------------
# transversal order and distance (one-sided words along a transversal)
# ---------------------------------------------------------------------------

#: Geometric orientation data for the combinatorial order on transversals.
#: base[j] = +1 if, among arcs whose word starts with digit j, the block of
#: words continuing with 0 precedes (in the geometric order) the block
#: continuing with 1.  branch[(k, j)] = +1 if prepending digit k to words of
#: the home-j transversal preserves their order, -1 if it reverses.
#: Calibrated against traced arcs; see arcs.calibrate_transversal_order.
@dataclass(frozen=True)
class TransversalOrderRule:
    base: dict
    branch: dict

    def compare(self, d1, d2):
        """Order of two one-sided digit tuples with d1[0] == d2[0].

        Returns -1/0/+1.  Eventually differing digits are required unless the
        tuples are equal as given (compared over the common length; a strict
        prefix sorts by its continuation digit against the other's digit).
        """
        if d1 == d2:
            return 0
        n = min(len(d1), len(d2))
        i = next((k for k in range(n) if d1[k] != d2[k]), None)
        if i is None:
            raise ValueError("one word is a strict prefix of the other; extend both")
        if i == 0:
            raise ValueError("words lie on different transversals")
        sign = 1
        for t in range(i - 1):
            sign *= self.branch[(d1[t], d1[t + 1])]
        lowfirst = self.base[d1[i - 1]]
        raw = -1 if d1[i] < d2[i] else 1
        return raw * lowfirst * sign


def _orientation_steps(rule, digits):
    """omega(prefix) for every proper prefix of ``digits``: the geometric
    order of the two admissible one-digit continuations (+1 keeps 0 left)."""
    omega = rule.base[digits[0]]
    out = [omega]
    for t in range(len(digits) - 2):
        omega *= rule.base[digits[t]] * rule.branch[(digits[t], digits[t + 1])] * rule.base[digits[t + 1]]
        out.append(omega)
    return out


def _mass_left_of(measure, rule, digits):
    """nu+ mass of all depth-len(digits) cylinders strictly left of ``digits``."""
    total = Q5.of(0)
    omegas = _orientation_steps(rule, digits)
    for i in range(1, len(digits)):
        prev, cur = digits[i - 1], digits[i]
        if prev == 1:
            continue  # single admissible child, nothing to its side
        omega = omegas[i - 1]
        left_child = 0 if omega > 0 else 1
        if cur != left_child:
            total = total + measure.balanced_cylinder(digits[:i] + (left_child,))
    return total


def transversal_distance(measure: ParryMeasure, rule: TransversalOrderRule,
                         w1, w2, side="+", depth=12):
    """dist'(w1, w2) = nu+/- mass of the order interval between two words of
    one transversal, computed at cylinder ``depth`` with certified truncation
    error <= phi^-depth.

    ``w1``/``w2`` are Words one-sided toward the given side (or raw digit
    tuples long enough for the requested depth).  Returns a dict with 'value'
    (float), exact Q5 'lower'/'upper' bounds, and 'depth'.
    """
    if not 1 <= depth <= 40:
        raise ValueError("depth must be in 1..40")
    m = depth + 2
    d1 = _one_sided_digits(w1, side, m)
    d2 = _one_sided_digits(w2, side, m)
    if d1[0] != d2[0]:
        raise ValueError("words lie on different transversals")
    if d1 == d2:
        zero = Q5.of(0)
        return {"value": 0.0, "lower": zero, "upper": zero, "depth": depth}
    if rule.compare(d1, d2) > 0:
        d1, d2 = d2, d1
    between = _mass_left_of(measure, rule, d2) - _mass_left_of(measure, rule, d1) \
        - measure.balanced_cylinder(d1)
    upper = between + measure.balanced_cylinder(d1) + measure.balanced_cylinder(d2)
    value = (float(between) + float(upper)) / 2.0
    return {"value": value, "lower": between, "upper": upper, "depth": depth}


def _one_sided_digits(w, side, length):
    if isinstance(w, Word):
        if side == "+":
            return tuple(w.digit(i) for i in range(0, length))
        return tuple(w.digit(-i) for i in range(0, length))
    d = tuple(w)
    if len(d) < length:
        raise ValueError(f"digit tuple shorter than requested depth {length}")
    return d[:length]
