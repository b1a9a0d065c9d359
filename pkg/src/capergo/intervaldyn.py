"""Interval-union sets on a circle segment [0, c) and piecewise-affine maps.

Two arithmetic modes coexist: exact (Fraction endpoints) and float with a
1e-12 comparison tolerance.  All intervals are half-open [a, b); boundary
points belong to the right-continuous side, so partitions and preimages
stay half-open and measure computations never see boundary ambiguity.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

EPS = 1e-12
BOUNDARY_SNAP = 1e-15
DOUBLING_BUDGET = 24

# default irrational rotation parameter: reversed golden ratio, badly
# approximable, so Birkhoff sums converge at the best worst-case rate
GOLDEN = 0.6180339887498949


class BudgetError(RuntimeError):
    pass


class BoundaryHitError(RuntimeError):
    pass


def _num(x):
    """Parse an endpoint: Fraction, int, float, or 'p/q' string."""
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    return float(x)


class IntervalSet:
    """Sorted disjoint half-open intervals inside [0, c)."""

    def __init__(self, intervals: Sequence = (), c=2):
        self.c = _num(c)
        self.intervals = self._normalize(intervals)

    def _normalize(self, raw):
        pieces = []
        for a, b in raw:
            a, b = _num(a), _num(b)
            if not (0 <= a and b <= self.c):
                raise ValueError("interval outside [0, c)")
            if a < b:
                pieces.append((a, b))
        pieces.sort()
        merged = []
        for a, b in pieces:
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1] = (merged[-1][0], b)
            else:
                merged.append((a, b))
        return [tuple(p) for p in merged]

    def measure(self):
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def union(self, other: "IntervalSet") -> "IntervalSet":
        self._check(other)
        return IntervalSet(self.intervals + other.intervals, self.c)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        self._check(other)
        out = []
        j = 0
        for a, b in self.intervals:
            while j < len(other.intervals) and other.intervals[j][1] <= a:
                j += 1
            k = j
            while k < len(other.intervals) and other.intervals[k][0] < b:
                lo = max(a, other.intervals[k][0])
                hi = min(b, other.intervals[k][1])
                if lo < hi:
                    out.append((lo, hi))
                k += 1
        return IntervalSet(out, self.c)

    def complement(self) -> "IntervalSet":
        out = []
        prev = _num(0)
        for a, b in self.intervals:
            if prev < a:
                out.append((prev, a))
            prev = b
        if prev < self.c:
            out.append((prev, self.c))
        return IntervalSet(out, self.c)

    def contains(self, x) -> bool:
        for a, b in self.intervals:
            if a <= x < b:
                return True
        return False

    def _check(self, other):
        if self.c != other.c:
            raise ValueError("mismatched circumference")

    def to_json(self):
        def enc(x):
            return str(x) if isinstance(x, Fraction) else x
        return {"c": enc(self.c),
                "intervals": [[enc(a), enc(b)] for a, b in self.intervals]}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["intervals"], obj.get("c", 2))

    def __eq__(self, other):
        return (self.c == other.c and self.intervals == other.intervals)

    def __repr__(self):
        return "IntervalSet(%r, c=%s)" % (self.intervals, self.c)


class RestrictedLebesgue:
    """A |-> Lebesgue measure of A intersected with a window."""

    def __init__(self, window: IntervalSet):
        self.window = window

    def __call__(self, s: IntervalSet):
        return s.intersect(self.window).measure()


class PiecewiseAffineMap:
    """Branch list (lo, hi, slope, intercept): x -> slope*x + intercept.

    Branch domains partition [0, c) and each branch image already lies in
    [0, c), so applying the map never needs an explicit mod.
    """

    def __init__(self, branches, c=2, kind="custom"):
        self.c = _num(c)
        self.kind = kind
        self.branches = [(_num(lo), _num(hi), _num(s), _num(t))
                         for lo, hi, s, t in branches]
        self.expanding = any(abs(b[2]) > 1 for b in self.branches)

    def apply(self, x):
        if isinstance(x, float):
            for lo, hi, _, _ in self.branches:
                if lo != 0 and abs(x - float(lo)) < BOUNDARY_SNAP:
                    raise BoundaryHitError("orbit hit a branch boundary")
        for lo, hi, s, t in self.branches:
            if lo <= x < hi:
                return s * x + t
        raise ValueError("point outside [0, c)")

    def preimage(self, s_set: IntervalSet) -> IntervalSet:
        if s_set.c != self.c:
            raise ValueError("mismatched circumference")
        out = []
        for lo, hi, s, t in self.branches:
            img_lo, img_hi = s * lo + t, s * hi + t
            if s < 0:
                img_lo, img_hi = img_hi, img_lo
            for a, b in s_set.intervals:
                a2, b2 = max(a, img_lo), min(b, img_hi)
                if a2 < b2:
                    xa, xb = (a2 - t) / s, (b2 - t) / s
                    if s < 0:
                        xa, xb = xb, xa
                    out.append((max(xa, lo), min(xb, hi)))
        return IntervalSet(out, self.c)

    @classmethod
    def rotation(cls, alpha, c=1):
        alpha = _num(alpha) % _num(c)
        if alpha == 0:
            return cls([(0, c, 1, 0)], c, kind="rotation")
        return cls([(0, _num(c) - alpha, 1, alpha),
                    (_num(c) - alpha, c, 1, alpha - _num(c))],
                   c, kind="rotation")

    @classmethod
    def doubling(cls):
        return cls([(0, Fraction(1, 2), 2, 0), (Fraction(1, 2), 1, 2, -1)],
                   c=1, kind="doubling")

    @classmethod
    def rotation_swap(cls, alpha=GOLDEN):
        alpha = _num(alpha)
        if not 0 < alpha < 1:
            raise ValueError("alpha must lie in (0,1)")
        # [0,1) rotates by alpha then moves up to [1,2); [1,2) drops down
        return cls([(0, 1 - alpha, 1, alpha + 1),
                    (1 - alpha, 1, 1, alpha),
                    (1, 2, 1, -1)], c=2, kind="rotation_swap")

    @classmethod
    def doubling_paste(cls):
        # [0,1) doubles mod 1 then moves up to [1,2); [1,2) drops down
        return cls([(0, Fraction(1, 2), 2, 1),
                    (Fraction(1, 2), 1, 2, 0),
                    (1, 2, 1, -1)], c=2, kind="doubling_paste")

    def to_json(self):
        out = {"kind": self.kind}
        if self.kind in ("rotation", "rotation_swap"):
            alpha = self.branches[0][3]
            if self.kind == "rotation_swap":
                alpha = alpha - 1
            out["alpha"] = str(alpha) if isinstance(alpha, Fraction) else alpha
        if self.kind == "rotation":
            out["c"] = str(self.c) if isinstance(self.c, Fraction) else self.c
        return out

    @classmethod
    def from_json(cls, obj):
        kind = obj["kind"]
        if kind == "rotation":
            return cls.rotation(_num(obj.get("alpha", GOLDEN)),
                                _num(obj.get("c", 1)))
        if kind == "doubling":
            return cls.doubling()
        if kind == "rotation_swap":
            return cls.rotation_swap(_num(obj.get("alpha", GOLDEN)))
        if kind == "doubling_paste":
            return cls.doubling_paste()
        raise ValueError("unknown map kind %r" % kind)


class PiecewiseConstant:
    """Function on [0, c): value values[j] on [cuts[j], cuts[j+1])."""

    def __init__(self, cuts, values, c=2):
        self.c = _num(c)
        self.cuts = [_num(x) for x in cuts]
        self.values = list(values)
        if len(self.values) != len(self.cuts) - 1:
            raise ValueError("need one value per piece")
        if self.cuts[0] != 0 or self.cuts[-1] != self.c:
            raise ValueError("pieces must cover [0, c)")
        if any(a >= b for a, b in zip(self.cuts, self.cuts[1:])):
            raise ValueError("cuts must increase")

    def __call__(self, x):
        lo, hi = 0, len(self.values) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.cuts[mid] <= x:
                lo = mid
            else:
                hi = mid - 1
        return self.values[lo]

    def pieces(self):
        for j, v in enumerate(self.values):
            yield IntervalSet([(self.cuts[j], self.cuts[j + 1])], self.c), v

    @classmethod
    def indicator(cls, s: IntervalSet):
        cuts = [_num(0)]
        values = []
        for a, b in s.intervals:
            if a > cuts[-1]:
                values.append(0)
                cuts.append(a)
            values.append(1)
            cuts.append(b)
        if cuts[-1] < s.c:
            values.append(0)
            cuts.append(s.c)
        if len(cuts) == 1:  # empty set
            cuts.append(s.c)
            values.append(0)
        return cls(cuts, values, s.c)


def correlation_sequence(p: RestrictedLebesgue, mp: PiecewiseAffineMap,
                         b: IntervalSet, c_set: IntervalSet, n: int,
                         budget: int = DOUBLING_BUDGET) -> list:
    """Terms P(B intersect T^{-i} C) for i = 0 .. n-1.

    For the plain doubling map the i-th preimage is periodic with period
    2^-i and a pattern that is just C rescaled, so the terms are computed
    in constant work per i and the exponential interval blowup (and with
    it the iterate budget) disappears.  Other expanding maps honour the
    budget literally.
    """
    if mp.kind == "doubling":
        return _doubling_correlations(p, b, c_set, n)
    if mp.kind == "rotation_swap" or (mp.kind == "rotation" and mp.c == 1):
        return _rotation_correlations(p, mp, b, c_set, n)
    if mp.expanding and n - 1 > budget:
        raise BudgetError("preimage budget exceeded at iterate %d" % (budget + 1))
    out = []
    cur = c_set
    for i in range(n):
        out.append(p(b.intersect(cur)))
        if i + 1 < n:
            cur = mp.preimage(cur)
    return out


def _rot_overlap(x_pieces, y_pieces, t):
    """Measure of X intersected with the unit-circle rotate of Y by -t."""
    t = t % 1
    total = 0.0
    for a, b in y_pieces:
        a2 = (a - t) % 1
        b2 = a2 + (b - a)
        shifted = [(a2, b2)] if b2 <= 1 else [(a2, 1.0), (0.0, b2 - 1)]
        for lo, hi in shifted:
            for xa, xb in x_pieces:
                l, h = max(lo, xa), min(hi, xb)
                if l < h:
                    total += h - l
    return total


def _split_halves(pieces):
    """Split [0,2) pieces into lower and (down-shifted) upper unit parts."""
    low, up = [], []
    for a, b in pieces:
        if a < 1:
            low.append((a, min(b, 1)))
        if b > 1:
            up.append((max(a, 1) - 1, b - 1))
    return low, up


def _rotation_correlations(p, mp, b, c_set, n):
    """Closed-form terms for the circle rotation and the rotation-swap map.

    The i-th preimage is a rotate of C (rotation) or, for the swap map, a
    parity-alternating pair of rotates of C's two unit halves: the square
    of the swap map rotates each half by alpha.
    """
    bw = b.intersect(p.window)
    bw_f = [(float(a), float(hi)) for a, hi in bw.intervals]
    if mp.kind == "rotation":
        alpha = float(mp.branches[0][3]) % 1
        cf = [(float(a), float(hi)) for a, hi in c_set.intervals]
        return [_rot_overlap(bw_f, cf, (i * alpha) % 1) for i in range(n)]
    alpha = float(mp.branches[0][3]) - 1  # lower branch sends x to x+a+1
    x_low, x_up = _split_halves(bw_f)
    y0, y1 = _split_halves([(float(a), float(hi))
                            for a, hi in c_set.intervals])
    out = []
    for i in range(n):
        k = i // 2
        if i % 2 == 0:
            val = _rot_overlap(x_low, y0, (k * alpha) % 1) + \
                _rot_overlap(x_up, y1, (k * alpha) % 1)
        else:
            val = _rot_overlap(x_low, y1, ((k + 1) * alpha) % 1) + \
                _rot_overlap(x_up, y0, (k * alpha) % 1)
        out.append(val)
    return out


def _doubling_correlations(p, b, c_set, n):
    # T^{-i}C = union over residues m of (C / 2^i + m / 2^i): periodic
    # with period 2^-i and pattern C scaled by 2^-i.
    window = p.window
    bw = b.intersect(window)
    out = [p(b.intersect(c_set))]
    pattern = [(Fraction(a), Fraction(bb)) for a, bb in c_set.intervals]
    period = Fraction(1)
    for _ in range(1, n):
        period = period / 2
        pattern = [(a / 2, bb / 2) for a, bb in pattern]
        total = Fraction(0)
        for a, bb in bw.intervals:
            total += _periodic_overlap(Fraction(a), Fraction(bb),
                                       pattern, period)
        out.append(total)
    return out


def _periodic_overlap(a, b, pattern, period):
    """Measure of [a,b) intersected with the period-tiled pattern."""
    w_measure = sum(hi - lo for lo, hi in pattern)
    ia = a // period
    ib = b // period
    if ia == ib:
        return _window_overlap(a - ia * period, b - ia * period, pattern)
    head = _window_overlap(a - ia * period, period, pattern)
    tail = _window_overlap(Fraction(0), b - ib * period, pattern)
    return head + tail + (ib - ia - 1) * w_measure


def _window_overlap(lo, hi, pattern):
    total = Fraction(0)
    for a, b in pattern:
        l, h = max(lo, a), min(hi, b)
        if l < h:
            total += h - l
    return total


def orbit_average(mp: PiecewiseAffineMap, f, x, n: int):
    """(1/n) * sum of f(T^i x) over i = 0 .. n-1 by forward iteration.

    Rotation-family maps with a float start use a vectorized closed form
    for the orbit (the swap map's square rotates each half by alpha).
    """
    if isinstance(x, float) and isinstance(f, PiecewiseConstant) and \
            mp.kind in ("rotation", "rotation_swap"):
        return _orbit_average_rotation(mp, f, x, n)
    total = 0.0 if isinstance(x, float) else Fraction(0)
    for _ in range(n):
        total += f(x)
        x = mp.apply(x)
    return total / n


def _orbit_average_rotation(mp, f, x, n):
    import numpy as np
    cuts = np.array([float(v) for v in f.cuts])
    vals = np.array([float(v) for v in f.values])
    if mp.kind == "rotation":
        alpha = float(mp.branches[0][3]) % float(mp.c)
        pos = (x + alpha * np.arange(n)) % float(mp.c)
    else:
        alpha = float(mp.branches[0][3]) - 1
        pos = np.empty(n)
        if x >= 1:
            pos[0] = x
            start_low, off = x - 1, 1
        else:
            start_low, off = x, 0
        k = np.arange(n - off)
        low = (start_low + alpha * ((k + 1) // 2)) % 1.0
        low[1::2] += 1.0  # odd steps from the lower half land in [1, 2)
        pos[off:] = low
    # boundary-hit detection against branch cuts and f's cuts
    edges = sorted({float(br[0]) for br in mp.branches} |
                   {float(v) for v in f.cuts})
    for e in edges:
        if e and np.any(np.abs(pos - e) < BOUNDARY_SNAP):
            raise BoundaryHitError("orbit hit a partition boundary")
    idx = np.searchsorted(cuts, pos, side="right") - 1
    return float(vals[np.clip(idx, 0, len(vals) - 1)].mean())


class BitstreamPoint:
    """Deterministic fair-coin binary expansion; bit m is the m-th digit.

    Applying the doubling map m times to the encoded point just moves the
    read head to offset m, so orbit values at arbitrary iterates are exact
    reads of finitely many bits.
    """

    def __init__(self, seed: int, budget: int):
        import random
        self.budget = budget
        self._big = random.Random(seed).getrandbits(budget)

    def bit(self, k: int) -> int:
        if k >= self.budget:
            raise BudgetError("bit budget exceeded")
        return (self._big >> k) & 1

    def value_at(self, m: int, depth: int) -> Fraction:
        """The first `depth` binary digits of T^m x, as a dyadic rational."""
        if m + depth > self.budget:
            raise BudgetError("bit budget exceeded")
        num = 0
        for j in range(depth):
            num = (num << 1) | self.bit(m + j)
        return Fraction(num, 1 << depth)


def _dyadic_depth(f: PiecewiseConstant) -> int:
    depth = 0
    for x in f.cuts:
        fr = Fraction(x) if not isinstance(x, Fraction) else x
        d = fr.denominator
        if d & (d - 1):
            raise ValueError("f endpoints must be dyadic")
        depth = max(depth, d.bit_length() - 1)
    return depth


def polynomial_orbit_average(f: PiecewiseConstant, p, x: BitstreamPoint,
                             n: int):
    """(1/n) * sum over i = 1..n of f(T^{p(i)} x) on the doubling shift.

    f must have dyadic endpoints: its value at T^m x then depends on
    finitely many bits, read exactly from the stream.
    """
    if f.c != 1:
        raise ValueError("polynomial averages run on the unit circle")
    depth = max(_dyadic_depth(f), 1)
    total = Fraction(0)
    for i in range(1, n + 1):
        m = p(i)
        if m < 0:
            raise ValueError("polynomial must be nonnegative")
        total += f(x.value_at(m, depth))
    return total / n


def verify_eigenfunction(f: PiecewiseConstant, mp: PiecewiseAffineMap,
                         lam, tol=EPS) -> bool:
    """Decide f(T x) = lam * f(x) off a finite set of boundary points.

    The composition f o T is piecewise constant on the refinement of the
    map's branches against the preimages of f's pieces; on each refined
    piece both sides are single labels, compared exactly (or within tol
    in float mode).
    """
    cuts = set()
    for lo, hi, _, _ in mp.branches:
        cuts.add(lo)
        cuts.add(hi)
    for x in f.cuts:
        cuts.add(_num(x))
    for piece, _ in f.pieces():
        pre = mp.preimage(piece)
        for a, b in pre.intervals:
            cuts.add(a)
            cuts.add(b)
    cuts = sorted(cuts, key=float)
    for a, b in zip(cuts, cuts[1:]):
        if not a < b:
            continue
        mid = (a + b) / 2
        lhs = f(mp.apply(mid))
        rhs = lam * f(mid)
        if abs(lhs - rhs) > tol:
            return False
    return True
