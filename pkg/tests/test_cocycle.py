import math
import random

import numpy as np
import pytest

from capergo.cocycle import (MatrixGen, cocycle_matrix, compound_power,
                             lyapunov_qr, monodromy_oracle,
                             oseledets_filtration, principal_angles,
                             subadditive_check, subadditive_limit_finite)
from capergo.finitedyn import Endomap
from capergo.scenarios import compare_with_oracle, random_periodic_generator

LOG2 = math.log(2.0)


def diag_gen(*entries):
    return MatrixGen.periodic([np.diag(entries)])


def two_cycle_gen():
    return MatrixGen.periodic([np.diag([2.0, 1.0]), np.diag([1.0, 0.5])])


def random_gen(rng, d, ell):
    mats = []
    while len(mats) < ell:
        m = np.array([[rng.uniform(-1, 1) for _ in range(d)]
                      for _ in range(d)])
        if abs(np.linalg.det(m)) > 0.05:
            mats.append(m)
    return MatrixGen.periodic(mats)


# --- dense products ---------------------------------------------------------


def test_cocycle_matrix_identity_generator():
    gen = diag_gen(1.0, 1.0)
    assert np.allclose(cocycle_matrix(gen, 0, 5), np.eye(2))


def test_cocycle_matrix_diagonal_powers():
    gen = diag_gen(2.0, 0.5)
    assert np.allclose(cocycle_matrix(gen, 0, 3), np.diag([8.0, 0.125]))


def test_cocycle_matrix_two_cycle():
    gen = two_cycle_gen()
    assert np.allclose(cocycle_matrix(gen, 0, 2), np.diag([2.0, 0.5]))
    # starting at the other cycle point gives the conjugate product
    assert np.allclose(cocycle_matrix(gen, 1, 2), np.diag([2.0, 0.5]))


def test_cocycle_law():
    rng = random.Random(40)
    for _ in range(10):
        gen = random_gen(rng, 3, rng.randint(1, 5))
        n, m = rng.randint(1, 6), rng.randint(1, 6)
        x = rng.randrange(5)
        lhs = cocycle_matrix(gen, x, n + m)
        y = x
        for _ in range(n):
            y = gen.step(y)
        rhs = cocycle_matrix(gen, y, m) @ cocycle_matrix(gen, x, n)
        assert np.abs(lhs - rhs).max() <= 1e-10 * max(1, np.abs(lhs).max())


def test_dense_product_overflow_raises():
    gen = diag_gen(10.0, 10.0)
    with pytest.raises(OverflowError):
        cocycle_matrix(gen, 0, 400)


def test_generator_bound_is_enforced():
    gen = MatrixGen(2, lambda i: np.diag([100.0, 1.0]),
                    lambda i: i, bound_m=0.5)
    with pytest.raises(ValueError):
        gen.matrix(0)


# --- exterior powers --------------------------------------------------------


def test_compound_power_extremes():
    rng = random.Random(41)
    a = np.array([[rng.uniform(-2, 2) for _ in range(3)] for _ in range(3)])
    assert np.allclose(compound_power(a, 1), a)
    det = compound_power(a, 3)
    assert det.shape == (1, 1)
    assert abs(det[0, 0] - np.linalg.det(a)) <= 1e-10


def test_compound_power_of_diagonal():
    a = np.diag([2.0, 3.0, 5.0])
    minors = compound_power(a, 2)
    got = sorted(np.abs(np.diag(minors)).tolist())
    assert np.allclose(got, [6.0, 10.0, 15.0])


def test_compound_is_multiplicative():
    rng = random.Random(42)
    for _ in range(10):
        d = rng.randint(2, 4)
        k = rng.randint(1, d)
        a = np.array([[rng.uniform(-1, 1) for _ in range(d)]
                      for _ in range(d)])
        b = np.array([[rng.uniform(-1, 1) for _ in range(d)]
                      for _ in range(d)])
        lhs = compound_power(a @ b, k)
        rhs = compound_power(a, k) @ compound_power(b, k)
        assert np.abs(lhs - rhs).max() <= 1e-10


def test_compound_norm_dominated_by_singular_values():
    rng = random.Random(43)
    for _ in range(10):
        a = np.array([[rng.uniform(-1, 1) for _ in range(4)]
                      for _ in range(4)])
        sv = np.linalg.svd(a, compute_uv=False)
        for k in (1, 2, 3):
            nrm = np.linalg.norm(compound_power(a, k), 2)
            assert nrm <= np.prod(sv[:k]) + 1e-10


# --- subadditivity ----------------------------------------------------------


def test_subadditive_isometries_give_zero():
    th = 0.7
    rot = [[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]]
    gen = MatrixGen.periodic([np.array(rot)])
    out = subadditive_check(gen, 0, k=1, n_max=20)
    assert out["subadditive"] and out["linear_bound"]
    spec = lyapunov_qr(gen, 0, 200)
    assert max(abs(x) for x in spec.exponents) <= 1e-10


def test_subadditive_check_diagonal_additive_case():
    out = subadditive_check(diag_gen(2.0, 0.5), 0, k=1, n_max=30)
    assert out["subadditive"] and out["witness"] is None


def test_subadditive_check_random_generators():
    rng = random.Random(44)
    for _ in range(5):
        gen = random_gen(rng, 3, rng.randint(1, 4))
        for k in (1, 2, 3):
            out = subadditive_check(gen, 0, k, n_max=16, seed=7)
            assert out["subadditive"] and out["linear_bound"]


# --- QR exponents against the periodic oracle -------------------------------


def test_lyapunov_qr_diagonal():
    spec = lyapunov_qr(diag_gen(2.0, 0.5), 0, 400)
    assert abs(spec.exponents[0] - LOG2) <= 1e-12
    assert abs(spec.exponents[1] + LOG2) <= 1e-12


def test_lyapunov_qr_two_cycle_averages():
    spec = lyapunov_qr(two_cycle_gen(), 0, 400, burn_in=0)
    assert abs(spec.exponents[0] - LOG2 / 2) <= 1e-12
    assert abs(spec.exponents[1] + LOG2 / 2) <= 1e-12


def test_monodromy_fixed_point_diag():
    spec = monodromy_oracle(diag_gen(3.0, 5.0), [0])
    assert np.allclose(spec.exponents, [math.log(5.0), math.log(3.0)])


def test_monodromy_rejects_non_cycle():
    gen = two_cycle_gen()
    with pytest.raises(ValueError):
        monodromy_oracle(gen, [0])  # period is 2, not 1


def test_qr_matches_monodromy_on_random_generators():
    rng = random.Random(45)
    for _ in range(3):
        d = rng.choice([2, 3])
        ell = rng.randint(1, 5)
        gen = random_periodic_generator(rng, d, ell)
        worst, qr, oracle = compare_with_oracle(gen, ell, 10_000)
        assert worst <= 1e-6


def test_qr_exponents_invariant_along_orbit():
    rng = random.Random(46)
    gen = random_periodic_generator(rng, 3, 4)
    exps = []
    for start in range(4):
        burn = 10_000 // 5
        burn += (10_000 - burn) % 4
        spec = lyapunov_qr(gen, start, 10_000, burn_in=burn)
        exps.append(spec.exponents)
    oracle = monodromy_oracle(gen, [0, 1, 2, 3]).exponents
    for e in exps:
        # block sums agree at every starting point
        assert abs(sum(e) - sum(oracle)) <= 1e-6
        assert abs(e[0] - oracle[0]) <= 1e-4


def test_top_exponent_sums_match_compound_generator():
    rng = random.Random(47)
    gen = random_periodic_generator(rng, 3, 2)
    n = 4000
    burn = n // 5
    burn += (n - burn) % 2
    spec = lyapunov_qr(gen, 0, n, burn_in=burn)
    for k in (1, 2, 3):
        cgen = MatrixGen.periodic([compound_power(gen.matrix(i), k)
                                   for i in range(2)])
        top = lyapunov_qr(cgen, 0, n, burn_in=burn).exponents[0]
        assert abs(top - sum(spec.exponents[:k])) <= 1e-6


# --- filtrations ------------------------------------------------------------


def test_oseledets_diagonal_two_exponents():
    approx = oseledets_filtration(diag_gen(2.0, 0.5), 0, 2000)
    assert len(approx.exponents) == 2
    assert abs(approx.exponents[0] - LOG2) <= 1e-9
    # V_2 is the slow axis e2
    v2 = approx.filtration[1]
    assert v2.shape[1] == 1
    assert abs(abs(v2[1, 0]) - 1.0) <= 1e-9
    for lam, lam_x in approx.checks["directional"]:
        assert abs(lam - lam_x) <= 1e-2
    for a, b in approx.checks["invariance"]:
        assert abs(a - b) <= 1e-2
    assert max(approx.checks["angles"]) <= 1e-6


def test_oseledets_identity_single_block():
    approx = oseledets_filtration(diag_gen(1.0, 1.0, 1.0), 0, 500)
    assert approx.exponents == [0.0]
    assert approx.multiplicities == [3]


def test_oseledets_two_cycle_scalars():
    gen = MatrixGen.periodic([np.array([[2.0]]), np.array([[1.0]])])
    approx = oseledets_filtration(gen, 0, 2000)
    assert abs(approx.exponents[0] - LOG2 / 2) <= 1e-9


def test_oseledets_random_generator_checks_pass():
    rng = random.Random(48)
    gen = random_periodic_generator(rng, 3, 3, min_gap=0.1)
    approx = oseledets_filtration(gen, 0, 10_000)
    for lam, lam_x in approx.checks["directional"]:
        assert abs(lam - lam_x) <= 1e-2
    for a, b in approx.checks["invariance"]:
        assert abs(a - b) <= 1e-2
    assert max(approx.checks["angles"]) <= 1e-4


def test_exponents_constant_along_transient_orbit():
    # base has a tail point feeding a 2-cycle; after burn-in the window
    # sits entirely on the cycle, so the spectrum matches the monodromy
    t = Endomap([1, 2, 1])
    mats = [np.diag([3.0, 1.0]), np.diag([2.0, 1.0]), np.diag([1.0, 0.5])]
    gen = MatrixGen(2, lambda i: mats[i], lambda i: t(i), bound_m=3.0)
    n = 4000
    burn = n // 5
    burn += (n - burn) % 2
    spec = lyapunov_qr(gen, 0, n, burn_in=burn)
    oracle = monodromy_oracle(gen, [1, 2])
    assert abs(spec.exponents[0] - oracle.exponents[0]) <= 1e-9
    assert abs(spec.exponents[1] - oracle.exponents[1]) <= 1e-9


def test_principal_angles_orthogonal_vs_aligned():
    e1 = np.array([[1.0], [0.0]])
    e2 = np.array([[0.0], [1.0]])
    assert abs(principal_angles(e1, e1).max()) <= 1e-12
    assert abs(principal_angles(e1, e2).max() - math.pi / 2) <= 1e-12


# --- finite-base subadditive limits -----------------------------------------


def test_kingman_two_cycle_log_norms():
    t = Endomap([1, 0])
    mats = [np.diag([2.0, 1.0]), np.diag([1.0, 0.5])]

    def f_seq(n):
        out = []
        for x in range(2):
            phi = np.eye(2)
            y = x
            for _ in range(n):
                phi = mats[y] @ phi
                y = t(y)
            out.append(math.log(np.linalg.norm(phi, 2)))
        return out

    res = subadditive_limit_finite(f_seq, t, horizon=60)
    assert res["ok"] and res["stabilized"]
    for v in res["f_star"]:
        assert abs(v - LOG2 / 2) <= 1e-9


def test_kingman_linear_decreasing_sequence():
    t = Endomap([0])
    res = subadditive_limit_finite(lambda n: [-float(n)], t, horizon=40)
    assert res["ok"]
    assert abs(res["f_star"][0] + 1.0) <= 1e-12


def test_kingman_rejects_superadditive_sequence():
    t = Endomap([0])
    res = subadditive_limit_finite(lambda n: [float(n * n)], t, horizon=30)
    assert not res["ok"] and res["witness"]
