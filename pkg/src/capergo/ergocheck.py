"""Cesaro-characterization checks of ergodicity and weak mixing.

The checks run against a MeasuredSystem facade over either regime:
finite (exact rational limits via cycle periodicity, tolerance zero) or
interval (partial Cesaro means at checkpoints N/8, N/4, N/2, N against a
tolerance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import finitedyn, intervaldyn
from .finitedyn import Endomap
from .intervaldyn import IntervalSet, PiecewiseAffineMap, RestrictedLebesgue
from .setfun import UpperProbability, choquet_integral, indices_of


def checkpoints_of(n: int) -> list[int]:
    pts = sorted({max(1, n // 8), max(1, n // 4), max(1, n // 2), n})
    return pts


@dataclass
class ConvergenceReport:
    name: str
    checkpoints: list
    partials: list
    target: object
    tolerance: object
    status: str = "ok"  # "ok" or "no-skeleton"
    exact_limit: object = None
    extra: dict = field(default_factory=dict)

    @property
    def final_deviation(self):
        if self.exact_limit is not None:
            return abs(self.exact_limit - self.target)
        return abs(self.partials[-1] - self.target)

    @property
    def verdict(self) -> bool:
        if self.status != "ok":
            return False
        return self.final_deviation <= self.tolerance

    def csv_rows(self):
        rows = [("checkpoint", "partial_mean", "target", "deviation")]
        for n, v in zip(self.checkpoints, self.partials):
            rows.append((n, float(v), float(self.target),
                         float(abs(v - self.target))))
        return rows

    def summary(self):
        return {"check": self.name, "verdict": bool(self.verdict),
                "status": self.status,
                "final_deviation": float(self.final_deviation),
                "tolerance": float(self.tolerance),
                "target": float(self.target)}


class MeasuredSystem:
    """Uniform facade: events, correlation terms, skeleton, orbits."""

    def __init__(self, regime, **kw):
        self.regime = regime
        self.__dict__.update(kw)

    @classmethod
    def from_finite(cls, v: UpperProbability, t: Endomap):
        sk = finitedyn.ergodic_skeleton(v, t)
        return cls("finite", v=v, t=t,
                   skeleton=sk["skeleton"] if sk.get("ok") else None,
                   skeleton_report=sk)

    @classmethod
    def from_interval(cls, mp: PiecewiseAffineMap,
                      family: Sequence[RestrictedLebesgue],
                      budget: int = intervaldyn.DOUBLING_BUDGET):
        # For the rotation-swap / doubling-paste systems the unique shared
        # invariant skeleton is normalized Lebesgue on [0, c); for the
        # c = 1 Lebesgue systems it is Lebesgue itself.
        c = mp.c

        def q_measure(s: IntervalSet):
            return s.measure() / c

        return cls("interval", map=mp, family=list(family),
                   q_measure=q_measure, budget=budget)

    # -- finite-regime helpers ------------------------------------------

    def _mask_measure(self, p: Sequence, mask: int):
        return sum((p[i] for i in indices_of(mask)), Fraction(0))

    def correlation_terms_finite(self, p: Sequence, b: int, c: int):
        """Terms P(B & T^{-i}C) with the eventual period of the mask orbit.

        Returns (terms up to one full period past the transient,
        transient_length, period).
        """
        seen = {}
        masks = []
        cur = c
        while cur not in seen:
            seen[cur] = len(masks)
            masks.append(cur)
            cur = self.t.preimage_mask(cur)
        transient = seen[cur]
        period = len(masks) - transient
        terms = [self._mask_measure(p, b & m) for m in masks]
        return terms, transient, period

    def exact_cesaro(self, terms, transient, period):
        cyc = terms[transient:transient + period]
        return sum(cyc, Fraction(0)) / period


def _partial_means(terms, pts, transform=None):
    out = []
    total = Fraction(0) if not isinstance(terms[0], float) else 0.0
    k = 0
    for i, x in enumerate(terms):
        total = total + (transform(x) if transform else x)
        if k < len(pts) and i + 1 == pts[k]:
            out.append(total / (i + 1))
            k += 1
    return out


def _finite_partials(sys, p, b, terms, transient, period, pts, transform=None):
    # reconstruct the eventually periodic term sequence lazily
    def term(i):
        if i < transient + period:
            return terms[i]
        return terms[transient + (i - transient) % period]
    seq = [term(i) for i in range(pts[-1])]
    return _partial_means(seq, pts, transform)


def independence_check(sys: MeasuredSystem, p, b, c, n: int,
                       tol=None) -> ConvergenceReport:
    """Cesaro mean of P(B & T^{-i}C) against the target P(B) Q(C)."""
    pts = checkpoints_of(n)
    if sys.regime == "finite":
        if sys.skeleton is None:
            return ConvergenceReport("independence", pts, [], 0, 0,
                                     status="no-skeleton")
        terms, transient, period = sys.correlation_terms_finite(p, b, c)
        limit = sys.exact_cesaro(terms, transient, period)
        target = sys._mask_measure(p, b) * sys._mask_measure(sys.skeleton, c)
        partials = _finite_partials(sys, p, b, terms, transient, period, pts)
        return ConvergenceReport("independence", pts, partials, target,
                                 tol if tol is not None else 0,
                                 exact_limit=limit)
    pr = p if isinstance(p, RestrictedLebesgue) else RestrictedLebesgue(p)
    terms = intervaldyn.correlation_sequence(pr, sys.map, b, c, n,
                                             sys.budget)
    target = pr(b) * sys.q_measure(c)
    partials = _partial_means(terms, pts)
    return ConvergenceReport("independence", pts, partials, target,
                             tol if tol is not None else 1e-3)


def squared_deviation_check(sys: MeasuredSystem, p, b, c, n: int,
                            tol=None) -> ConvergenceReport:
    """Cesaro mean of |P(B & T^{-i}C) - P(B)Q(C)|^2; zero iff weak mixing."""
    pts = checkpoints_of(n)
    if sys.regime == "finite":
        if sys.skeleton is None:
            return ConvergenceReport("squared_deviation", pts, [], 0, 0,
                                     status="no-skeleton")
        terms, transient, period = sys.correlation_terms_finite(p, b, c)
        center = sys._mask_measure(p, b) * sys._mask_measure(sys.skeleton, c)
        sq = [(x - center) ** 2 for x in terms]
        limit = sys.exact_cesaro(sq, transient, period)
        partials = _finite_partials(sys, p, b, sq, transient, period, pts)
        return ConvergenceReport("squared_deviation", pts, partials, 0,
                                 tol if tol is not None else 0,
                                 exact_limit=limit)
    pr = p if isinstance(p, RestrictedLebesgue) else RestrictedLebesgue(p)
    terms = intervaldyn.correlation_sequence(pr, sys.map, b, c, n,
                                             sys.budget)
    center = pr(b) * sys.q_measure(c)
    partials = _partial_means(terms, pts,
                              transform=lambda x: (x - center) ** 2)
    return ConvergenceReport("squared_deviation", pts, partials, 0,
                             tol if tol is not None else 1e-2)


def choquet_independence_check(sys: MeasuredSystem, f: Sequence, g: Sequence,
                               n: int, tol=0) -> ConvergenceReport:
    """Choquet average of f * (g o T^i) against (int f dV)(int g dQ).

    Finite regime only: each checkpoint evaluates an exact Choquet
    integral of the running Cesaro average, and the exact limit is the
    Choquet integral of f times the common conditional expectation of g.
    """
    if sys.regime != "finite":
        raise NotImplementedError("choquet check runs on finite systems")
    pts = checkpoints_of(n)
    if sys.skeleton is None:
        return ConvergenceReport("choquet_independence", pts, [], 0, 0,
                                 status="no-skeleton")
    if any(x < 0 for x in g):
        raise ValueError("g must be nonnegative")
    t, v = sys.t, sys.v
    m = v.n
    orbit = list(range(m))  # orbit[x] = T^i x
    running = [Fraction(0)] * m
    partials = []
    k = 0
    for i in range(pts[-1]):
        for x in range(m):
            running[x] = running[x] + Fraction(f[x]) * g[orbit[x]]
        orbit = [t(x) for x in orbit]
        if i + 1 == pts[k]:
            avg = [r / (i + 1) for r in running]
            partials.append(choquet_integral(v, avg))
            k += 1
    ghat = finitedyn.common_cond_exp(g, t)
    limit = choquet_integral(v, [Fraction(f[x]) * ghat[x] for x in range(m)])
    target = choquet_integral(v, list(f)) * sum(
        Fraction(g[x]) * sys.skeleton[x] for x in range(m))
    return ConvergenceReport("choquet_independence", pts, partials, target,
                             tol, exact_limit=limit)


def sqrt_moment_check(sys: MeasuredSystem, p, b, c, r, n: int,
                      tol=1e-2) -> dict:
    """Cesaro means of P(B & T^{-i}C)**r against the two-sided bounds.

    For r = 1/2 the partial means from N/2 on must sit inside
    [P(B)**0.5 * P(C) - tol, P(B)**0.5 * P(C)**0.5 + tol]; the finite
    periodic case yields an exact limit instead.
    """
    pts = checkpoints_of(n)
    if sys.regime == "finite":
        terms, transient, period = sys.correlation_terms_finite(p, b, c)
        powered = [float(x) ** r for x in terms]
        limit = sum(powered[transient:transient + period]) / period
        pb = float(sys._mask_measure(p, b))
        pc = float(sys._mask_measure(p, c))
        return {"exact_limit": limit, "lower": pb ** r * pc,
                "upper": pb ** r * pc ** r,
                "partials": _finite_partials(sys, p, b, powered, transient,
                                             period, pts),
                "checkpoints": pts}
    pr = p if isinstance(p, RestrictedLebesgue) else RestrictedLebesgue(p)
    terms = intervaldyn.correlation_sequence(pr, sys.map, b, c, n,
                                             sys.budget)
    partials = _partial_means(terms, pts, transform=lambda x: float(x) ** r)
    pb, pc = float(pr(b)), float(pr(c))
    lower, upper = pb ** 0.5 * pc, pb ** 0.5 * pc ** 0.5
    late = [v for q, v in zip(pts, partials) if q >= n // 2]
    verdict = all(lower - tol <= v <= upper + tol for v in late)
    return {"partials": partials, "checkpoints": pts, "lower": lower,
            "upper": upper, "verdict": verdict, "tolerance": tol}


# ---------------------------------------------------------------------------
# density machinery


class DensitySubset:
    """A subset of the integers with window-count access.

    Membership is a predicate; count_fn, when given, returns
    |A intersect [0, n]| in closed form so huge windows stay cheap.
    Sets are assumed to live in the nonnegative integers unless
    membership says otherwise (two-sided windows then enumerate).
    """

    def __init__(self, membership: Callable[[int], bool], bound: int,
                 count_fn: Optional[Callable[[int], int]] = None,
                 two_sided_symmetric: bool = False):
        self.membership = membership
        self.bound = bound
        self.count_fn = count_fn
        self.two_sided_symmetric = two_sided_symmetric

    def window_count(self, n: int) -> int:
        """|A intersect [-n, n]|."""
        if self.count_fn is not None:
            pos = self.count_fn(n)
            if self.two_sided_symmetric:
                return 2 * pos - (1 if self.membership(0) else 0)
            return pos
        if n > self.bound:
            raise ValueError("window exceeds enumeration bound")
        return sum(1 for k in range(-n, n + 1) if self.membership(k))

    def window_density(self, n: int) -> float:
        return self.window_count(n) / (2 * n + 1)


def block_power_set() -> DensitySubset:
    """The integers in some [2^{2j}, 2^{2j+1}] (endpoints included)."""

    def member(k):
        if k < 1:
            return False
        e = k.bit_length() - 1
        if e % 2 == 0:
            return True
        return k == 1 << e  # the included right endpoint 2^{2j+1}

    def count(n):
        total = 0
        j = 0
        while (1 << (2 * j)) <= n:
            lo = 1 << (2 * j)
            hi = min(n, 2 * lo)
            total += hi - lo + 1
            j += 1
        return total

    return DensitySubset(member, bound=1 << 30, count_fn=count)


def density(a: DensitySubset, windows: Sequence[int],
            subsequences: Optional[dict] = None) -> dict:
    """Two-sided window densities plus optional subsequence estimates."""
    vals = {n: a.window_density(n) for n in windows}
    out = {"windows": vals,
           "upper_estimate": max(vals.values()),
           "lower_estimate": min(vals.values())}
    if subsequences:
        subs = {}
        for label, ns in subsequences.items():
            dv = [a.window_density(n) for n in ns]
            subs[label] = {"densities": dv, "estimate": dv[-1]}
        out["subsequences"] = subs
    return out


def extract_null_density_set(seq: Sequence[float], limit: float,
                             m_max: int = 8) -> dict:
    """Koopman-von Neumann extraction of a density-zero exception set.

    Level sets J_m = {n : |seq_n - limit| > 1/m} are merged blockwise:
    N_m is chosen empirically as the first index from which the running
    density of J_{m+1} stays below 1/(m+1), and J picks up J_{m+1} on
    (N_m, N_{m+1}].  Off J, deviations past block m are at most 1/(m+1).
    Refuses when the Cesaro mean of |seq - limit| has not converged to 0
    over the horizon.
    """
    horizon = len(seq)
    devs = [abs(x - limit) for x in seq]
    cesaro_tail = sum(devs) / horizon
    if cesaro_tail > 1.0 / (m_max + 1):
        return {"refused": True, "cesaro_mean": cesaro_tail}

    def level_set(m):
        return [n for n, d in enumerate(devs) if d > 1.0 / m]

    # first index from which the running density of J_m stays <= 1/m
    def settle_index(jm, m):
        bad_after = horizon
        cnt = 0
        counts = [0] * (horizon + 1)
        js = set(jm)
        for n in range(horizon):
            if n in js:
                cnt += 1
            counts[n + 1] = cnt
        for n in range(horizon, 0, -1):
            if counts[n] / n > 1.0 / m:
                return n  # density still too high at window n
        return 0

    blocks = []
    prev = 0
    for m in range(1, m_max + 1):
        jm = level_set(m + 1)
        start = settle_index(jm, m + 1)
        nm = max(prev + 1, start)
        if nm >= horizon:
            break
        blocks.append((prev, nm, m + 1))
        prev = nm
    blocks.append((prev, horizon, blocks[-1][2] + 1 if blocks else 2))

    j = []
    off_dev = []
    for lo, hi, m in blocks:
        lvl = set(level_set(m))
        block_members = [n for n in range(lo, hi) if n in lvl]
        j.extend(block_members)
        off = [devs[n] for n in range(lo, hi) if n not in lvl]
        off_dev.append({"block_threshold": 1.0 / m,
                        "max_off_deviation": max(off) if off else 0.0})
    j.sort()
    pts = checkpoints_of(horizon)
    dens = []
    js = set(j)
    for n in pts:
        dens.append(sum(1 for k in j if k < n) / n)
    return {"refused": False, "indices": j,
            "certificate": {"checkpoints": pts, "window_density": dens,
                            "blocks": off_dev}}


# ---------------------------------------------------------------------------
# the no-Cesaro-limit sequence of square roots


def remark_sequence_value(i: int) -> Fraction:
    """Term a_i: 1/4 on blocks (2^{2k-1}, 2^{2k}], else 1/2 / 0 alternating."""
    if i < 1:
        raise ValueError("sequence starts at i = 1")
    e = (i - 1).bit_length()  # smallest e with i <= 2^e
    if e % 2 == 0:
        return Fraction(1, 4)
    return Fraction(1, 2) if i % 2 == 0 else Fraction(0)


def _remark_block_sum(n: int, w) -> float:
    """Sum of w(a_i) for i = 1..n via per-block counts."""
    total = 0.0
    k = 0
    while True:
        q_lo = (1 << (2 * k - 1)) if k else 0  # quarter block (q_lo, 2^{2k}]
        q_hi = 1 << (2 * k)
        if q_lo >= n:
            break
        cnt = min(q_hi, n) - q_lo
        if cnt > 0:
            total += w(Fraction(1, 4)) * cnt
        a_lo, a_hi = q_hi, 1 << (2 * k + 1)  # alternating block (a_lo, a_hi]
        if a_lo < n:
            m = min(a_hi, n)
            evens = m // 2 - a_lo // 2
            odds = (m - a_lo) - evens
            total += w(Fraction(1, 2)) * evens + w(Fraction(0)) * odds
        k += 1
    return total


def paper_sequence_6_remark(K: int) -> dict:
    """Cesaro means of sqrt(a_i) along n = 2^{2K} and n = 2^{2K+1}.

    The two subsequence limits differ (1/3 + 1/(6 sqrt 2) versus
    1/6 + 1/(3 sqrt 2)), while the plain Cesaro mean of a_i tends to 1/4.
    """
    if K > 14:
        raise ValueError("block budget: K <= 14")
    sqrt_w = lambda a: math.sqrt(float(a))
    plain_w = float
    n_even, n_odd = 1 << (2 * K), 1 << (2 * K + 1)
    return {
        "sqrt_cesaro_even_window": _remark_block_sum(n_even, sqrt_w) / n_even,
        "sqrt_cesaro_odd_window": _remark_block_sum(n_odd, sqrt_w) / n_odd,
        "plain_cesaro": _remark_block_sum(n_even, plain_w) / n_even,
        "targets": {"even": 1 / 3 + 1 / (6 * math.sqrt(2)),
                    "odd": 1 / 6 + 1 / (3 * math.sqrt(2)),
                    "plain": 0.25},
    }


# ---------------------------------------------------------------------------
# stationary-process SLLN


def process_slln_check(sys: MeasuredSystem, h: Sequence, depth: int,
                       n: int, tol=0) -> dict:
    """Stationarity of Y_k = h o T^{k-1} plus the per-point SLLN.

    Stationarity compares V of every depth-d cylinder event with V of its
    one-step shift (an exact event-algebra identity when V is invariant).
    The SLLN compares each point's exact Birkhoff limit of h with
    int h dQ; the failure set must be V-null.
    """
    if depth > 8:
        raise ValueError("depth budget: depth <= 8")
    if sys.regime != "finite":
        raise NotImplementedError("process checks run on finite systems")
    t, v = sys.t, sys.v
    m = v.n
    stationary = True
    witness = None
    # depth-d cylinder events {x : (h(x), h(Tx), ...) = word} as masks
    cylinders = {}
    for x in range(m):
        word = []
        y = x
        for _ in range(depth):
            word.append(h[y])
            y = t(y)
        word = tuple(word)
        cylinders[word] = cylinders.get(word, 0) | (1 << x)
    for word, mask in cylinders.items():
        if v.table[mask] != v.table[t.preimage_mask(mask)]:
            stationary = False
            witness = word
            break
    out = {"stationary": stationary, "witness": witness}
    if sys.skeleton is None:
        out["slln"] = {"status": "no-skeleton"}
        return out
    target = sum(Fraction(h[x]) * sys.skeleton[x] for x in range(m))
    limits = [finitedyn.birkhoff_limit(h, t, x) for x in range(m)]
    fail_mask = 0
    for x in range(m):
        if abs(limits[x] - target) > tol:
            fail_mask |= 1 << x
    finite_avgs = [float(finitedyn.birkhoff_average(h, t, x, n))
                   for x in range(m)]
    out["slln"] = {"status": "ok", "target": target,
                   "pointwise_limits": limits,
                   "averages_at_n": finite_avgs,
                   "failure_mask": fail_mask,
                   "verdict": v.table[fail_mask] == 0}
    return out
