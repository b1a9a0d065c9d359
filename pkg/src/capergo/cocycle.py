"""Matrix cocycles over finite or interval bases: Lyapunov spectra,
exterior powers, subadditivity checks, and Oseledets filtration
approximants.

The matrix norm throughout is the operator 2-norm.  Long products are
never formed densely: exponents come from QR re-orthonormalization, and
slow singular subspaces from a backward pass with the transposed
generator (a dense product over 10^4 steps is not representable in
float64, so quantities are extracted from propagated factorizations
instead).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

GAP_TOL = 1e-3


class MatrixGen:
    """Generator L: base point -> invertible d x d matrix, with a declared
    bound M on |log ||L||| that is spot-checked at evaluation time."""

    def __init__(self, d: int, l_of: Callable, step: Callable,
                 bound_m: float, label: str = "gen"):
        self.d = d
        self.l_of = l_of
        self.step = step  # base map: point -> next point
        self.bound_m = bound_m
        self.label = label
        self._validated = set()

    def matrix(self, omega) -> np.ndarray:
        a = np.asarray(self.l_of(omega), dtype=float)
        if a.shape != (self.d, self.d):
            raise ValueError("generator dimension mismatch")
        # spot-check the declared bound once per distinct (hashable) point
        key = omega if isinstance(omega, (int, str)) else None
        if key is None or key not in self._validated:
            nrm = np.linalg.norm(a, 2)
            if nrm == 0 or not np.isfinite(nrm):
                raise ValueError("generator must be invertible and finite")
            if abs(math.log(nrm)) > self.bound_m + 1e-9:
                raise ValueError("declared log-norm bound violated")
            if key is not None:
                self._validated.add(key)
        return a

    def orbit(self, omega, n: int) -> list:
        pts = [omega]
        for _ in range(n - 1):
            pts.append(self.step(pts[-1]))
        return pts

    @classmethod
    def periodic(cls, matrices: Sequence, label: str = "periodic"):
        """Base = cyclic shift on {0, ..., l-1}; L(i) = matrices[i]."""
        mats = [np.asarray(m, dtype=float) for m in matrices]
        d = mats[0].shape[0]
        ell = len(mats)
        bound = max(abs(math.log(np.linalg.norm(m, 2))) for m in mats) + \
            max(abs(math.log(np.linalg.norm(np.linalg.inv(m), 2)))
                for m in mats) + 1
        return cls(d, lambda i: mats[i % ell], lambda i: (i + 1) % ell,
                   bound, label)

    @classmethod
    def from_json(cls, obj):
        kind = obj["kind"]
        d = obj["d"]
        if kind in ("table", "two_point"):
            return cls.periodic(obj["matrices"])
        if kind == "rotation_angle":
            # L(x) = planar rotation by angle_scale * x over the circle
            # rotation base with the default irrational angle
            from .intervaldyn import GOLDEN, PiecewiseAffineMap
            scale = float(obj.get("angle_scale", 1.0))
            mp = PiecewiseAffineMap.rotation(GOLDEN, c=1)

            def l_of(x):
                th = scale * float(x)
                return [[math.cos(th), -math.sin(th)],
                        [math.sin(th), math.cos(th)]]

            return cls(2, l_of, mp.apply, bound_m=1.0, label="rotation_angle")
        raise ValueError("unknown generator kind %r" % kind)


def cocycle_matrix(gen: MatrixGen, omega, n: int) -> np.ndarray:
    """Phi(n, omega) = L(T^{n-1} omega) ... L(omega), right-to-left.

    Overflow guard: if any partial product norm leaves float range the
    call fails loudly; long-horizon quantities should use the QR
    estimators instead of dense products.
    """
    if n < 1:
        raise ValueError("n >= 1 required")
    phi = np.eye(gen.d)
    x = omega
    for _ in range(n):
        phi = gen.matrix(x) @ phi
        x = gen.step(x)
        nrm = np.abs(phi).max()
        if not np.isfinite(nrm) or nrm > 1e300 or (nrm and nrm < 1e-300):
            raise OverflowError("dense cocycle product left float range")
    return phi


def compound_power(a: np.ndarray, k: int) -> np.ndarray:
    """Matrix of k x k minors acting on the k-th exterior power."""
    a = np.asarray(a, dtype=float)
    d = a.shape[0]
    if not 1 <= k <= d:
        raise ValueError("need 1 <= k <= d")
    subsets = list(itertools.combinations(range(d), k))
    out = np.empty((len(subsets), len(subsets)))
    for i, rows in enumerate(subsets):
        for j, cols in enumerate(subsets):
            out[i, j] = np.linalg.det(a[np.ix_(rows, cols)])
    return out


@dataclass
class LyapunovSpectrum:
    exponents: list
    multiplicities: list = field(default_factory=list)
    n: int = 0
    renorm_period: int = 1

    def grouped(self, gap_tol=GAP_TOL):
        """Distinct exponents with multiplicities, split at gaps > gap_tol."""
        groups = []
        for lam in self.exponents:
            if groups and abs(groups[-1][0][-1] - lam) <= gap_tol:
                groups[-1][0].append(lam)
            else:
                groups.append(([lam],))
        return [(sum(g) / len(g), len(g)) for (g,) in groups]


def lyapunov_qr(gen: MatrixGen, omega, n: int, renorm_period: int = 1,
                burn_in: int = None) -> LyapunovSpectrum:
    """QR-propagated exponent estimates: accumulated log-diagonals.

    The propagated frame needs a transient to align with the invariant
    flag; logs accumulated during the first burn_in steps (default n/5)
    are discarded and the average runs over the remaining steps.
    """
    if n < renorm_period or renorm_period < 1:
        raise ValueError("need n >= renorm_period >= 1")
    if burn_in is None:
        burn_in = n // 5
    if burn_in >= n:
        raise ValueError("burn_in must be < n")
    d = gen.d
    q = np.eye(d)
    logs = np.zeros(d)
    x = omega
    block = np.eye(d)
    steps = 0
    for i in range(n):
        block = gen.matrix(x) @ block
        x = gen.step(x)
        steps += 1
        if steps == renorm_period or i == n - 1:
            q, r = np.linalg.qr(block @ q)
            if i >= burn_in:
                logs += np.log(np.abs(np.diag(r)))
            block = np.eye(d)
            steps = 0
    exps = sorted((logs / (n - burn_in)).tolist(), reverse=True)
    return LyapunovSpectrum(exps, [1] * d, n, renorm_period)


def monodromy_oracle(gen: MatrixGen, cycle: Sequence) -> LyapunovSpectrum:
    """Exact spectrum on a periodic base: eigenvalue moduli of the
    period product, log'd and divided by the period."""
    ell = len(cycle)
    for i, pt in enumerate(cycle):
        if gen.step(pt) != cycle[(i + 1) % ell]:
            raise ValueError("point list is not a cycle of the base map")
    phi = np.eye(gen.d)
    for pt in cycle:
        phi = gen.matrix(pt) @ phi
    eig = np.linalg.eigvals(phi)
    mods = sorted(np.abs(eig).tolist(), reverse=True)
    if any(m == 0 for m in mods):
        raise ValueError("monodromy is singular")
    exps = [math.log(m) / ell for m in mods]
    return LyapunovSpectrum(exps, [1] * gen.d, ell)


def subadditive_check(gen: MatrixGen, omega, k: int, n_max: int,
                      pairs: int = 40, seed: int = 0) -> dict:
    """f_n = log ||wedge^k Phi(n, .)||: subadditivity and the linear bound.

    Verifies f_{n+m}(w) <= f_n(w) + f_m(T^n w) on sampled (n, m) with
    n + m <= n_max, and |f_n| <= k n M throughout.
    """
    import random
    rng = random.Random(seed)
    orbit = gen.orbit(omega, n_max + 1)

    def f(n, start_idx):
        if k == gen.d:
            # top compound is the determinant; evaluating it per step
            # avoids the LU roundoff of an ill-conditioned dense product
            return sum(np.linalg.slogdet(
                gen.matrix(orbit[start_idx + i]))[1] for i in range(n))
        phi = np.eye(gen.d)
        for i in range(n):
            phi = gen.matrix(orbit[start_idx + i]) @ phi
        nrm = np.linalg.norm(compound_power(phi, k), 2)
        if nrm == 0 or not np.isfinite(nrm):
            raise OverflowError("dense compound product left float range; "
                                "shorten n_max")
        return math.log(nrm)

    ok = True
    witness = None
    bound_ok = True
    samples = [(rng.randint(1, n_max - 1),) for _ in range(pairs)]
    for (n,) in samples:
        m = rng.randint(1, n_max - n)
        fn = f(n, 0)
        fm = f(m, n)
        fnm = f(n + m, 0)
        if fnm > fn + fm + 1e-9 * max(1.0, abs(fn) + abs(fm)):
            ok = False
            witness = (n, m, fnm, fn + fm)
        for nn, val in ((n, fn), (n + m, fnm)):
            if abs(val) > k * nn * gen.bound_m + 1e-9:
                bound_ok = False
    return {"subadditive": ok, "witness": witness, "linear_bound": bound_ok}


def _right_subspace_basis(gen: MatrixGen, orbit: Sequence) -> np.ndarray:
    """Orthonormal basis whose first s columns span, for every s, the
    top-s right-singular subspace of Phi(n, omega).

    Propagates the transposed generator backward along the orbit (the
    transpose product has the same right singular structure with the
    factor order reversed), QR-normalizing each step.
    """
    d = gen.d
    q = np.eye(d)
    for pt in reversed(orbit):
        q, r = np.linalg.qr(gen.matrix(pt).T @ q)
        q = q * np.sign(np.diag(r))  # fix orientation for determinism
    return q


def principal_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    qu, _ = np.linalg.qr(u)
    qv, _ = np.linalg.qr(v)
    sv = np.linalg.svd(qu.T @ qv, compute_uv=False)
    sv = np.clip(sv, -1.0, 1.0)
    return np.arccos(sv)


@dataclass
class OseledetsApprox:
    exponents: list            # distinct block exponents, decreasing
    multiplicities: list
    filtration: list           # V_1 > V_2 > ... as orthonormal column bases
    n: int
    checks: dict = field(default_factory=dict)


def oseledets_filtration(gen: MatrixGen, omega, n: int,
                         gap_tol: float = GAP_TOL,
                         dir_horizon: int = None,
                         seed: int = 0) -> OseledetsApprox:
    """Filtration approximant V_i = {x : growth rate <= lambda_i}.

    Exponents come from the forward QR pass; V_i is the orthogonal
    complement of the top right-singular subspace, obtained from a
    backward transposed-QR pass over the stored orbit.  Three checks are
    run: (a) directional exponents of vectors in V_i \\ V_{i+1} against
    lambda_i, (b) the same invariantly one step along the orbit, and
    (c) principal angles between L(omega) V_i(omega) and V_i(T omega).

    Directional exponents are measured over a shortened horizon: a slow
    vector's forward iterates pick up fast components at the level of
    machine epsilon, which dominate after roughly 36/gap steps, so the
    horizon is capped accordingly.
    """
    import random
    rng = random.Random(seed)
    d = gen.d
    spec = lyapunov_qr(gen, omega, n)
    groups = spec.grouped(gap_tol)
    orbit = gen.orbit(omega, n)
    basis = _right_subspace_basis(gen, orbit)
    basis_next = _right_subspace_basis(gen, gen.orbit(gen.step(omega), n))

    filtration = []
    sizes = []
    s = 0
    for lam, mult in groups:
        filtration.append(basis[:, s:])  # V_i: slow part after s fast dirs
        sizes.append(mult)
        s += mult
    min_gap = min((groups[i][0] - groups[i + 1][0]
                   for i in range(len(groups) - 1)), default=1.0)

    # On a periodic base the V_i at every cycle point are available, so a
    # slow vector can be re-projected into its V_i each step; that stops
    # machine-epsilon fast components from taking over and allows a long
    # measurement horizon.  Aperiodic bases fall back to a horizon capped
    # near 30/gap, before the roundoff contamination sets in.
    period = _detect_period(gen, omega)
    if period:
        cycle = gen.orbit(omega, period)
        bases_at = [_right_subspace_basis(gen, gen.orbit(pt, n))
                    for pt in cycle]
        if dir_horizon is None:
            dir_horizon = min(n, 500 * period)
    elif dir_horizon is None:
        dir_horizon = max(40, min(n, int(30.0 / max(min_gap, 1e-2))))

    def directional(x, start_idx, block_start):
        v = np.array(x, dtype=float)
        acc = 0.0
        for i in range(dir_horizon):
            if period:
                j = (start_idx + i) % period
                pt = cycle[j]
            else:
                pt = aperiodic_orbit[start_idx + i]
            v = gen.matrix(pt) @ v
            if period:
                vi_here = bases_at[(start_idx + i + 1) % period][:,
                                                                 block_start:]
                v = vi_here @ (vi_here.T @ v)
            nrm = np.linalg.norm(v)
            acc += math.log(nrm)
            v /= nrm
        return acc / dir_horizon

    if not period:
        aperiodic_orbit = gen.orbit(omega, dir_horizon + 2)

    checks = {"directional": [], "invariance": [], "angles": []}
    s = 0
    for bi, (lam, mult) in enumerate(groups):
        vi = filtration[bi]
        # random x in V_i, generically outside V_{i+1}
        coeffs = np.array([rng.gauss(0, 1) for _ in range(vi.shape[1])])
        x = vi @ coeffs
        x /= np.linalg.norm(x)
        lam_x = directional(x, 0, s)
        checks["directional"].append((lam, lam_x))
        lx = gen.matrix(omega) @ x
        lam_lx = directional(lx / np.linalg.norm(lx), 1, s)
        checks["invariance"].append((lam_x, lam_lx))
        # (c) L(omega) V_i(omega) vs V_i(T omega)
        vi_next = basis_next[:, s:]
        img = gen.matrix(omega) @ vi
        ang = principal_angles(img, vi_next)
        checks["angles"].append(float(ang.max()) if ang.size else 0.0)
        s += mult
    return OseledetsApprox([g[0] for g in groups], sizes, filtration, n,
                           checks)


def _detect_period(gen, omega, limit: int = 64):
    try:
        hash(omega)
    except TypeError:
        return 0
    x = gen.step(omega)
    for ell in range(1, limit + 1):
        if x == omega:
            return ell
        x = gen.step(x)
    return 0


def subadditive_limit_finite(f_seq: Callable[[int], Sequence], t,
                             horizon: int, sample_pairs: int = 30,
                             seed: int = 0) -> dict:
    """f* = inf over n <= horizon of the cycle average of f_n / n.

    f_seq(n) returns the vector of f_n values on the finite base.
    Subadditivity f_{n+m} <= f_n + f_m o T^n is spot-checked; the inf is
    required to have stabilized over the last quarter of the horizon.
    """
    import random
    from fractions import Fraction

    from . import finitedyn
    rng = random.Random(seed)
    m_pts = len(f_seq(1))
    for _ in range(sample_pairs):
        n = rng.randint(1, horizon - 1)
        m = rng.randint(1, horizon - n)
        fn, fm, fnm = f_seq(n), f_seq(m), f_seq(n + m)
        for x in range(m_pts):
            y = x
            for _ in range(n):
                y = t(y)
            if fnm[x] > fn[x] + fm[y] + 1e-9:
                return {"ok": False,
                        "witness": {"n": n, "m": m, "point": x}}
    best = None
    history = []
    for n in range(1, horizon + 1):
        g = finitedyn.common_cond_exp([v / Fraction(n) if not
                                       isinstance(v, float) else v / n
                                       for v in f_seq(n)], t)
        if best is None:
            best = list(g)
        else:
            best = [min(a, b) for a, b in zip(best, g)]
        history.append(list(best))
    tail = history[3 * horizon // 4:]
    drift = max(abs(float(a - b))
                for snap in tail for a, b in zip(snap, history[-1]))
    f_star = history[-1]
    # pathwise limits of f_n / n at every point, at the horizon
    pathwise = [f_seq(horizon)[x] / horizon for x in range(m_pts)]
    return {"ok": True, "f_star": f_star, "stabilized": drift < 1e-9,
            "pathwise_at_horizon": pathwise}
