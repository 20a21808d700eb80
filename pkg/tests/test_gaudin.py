from fractions import Fraction
from functools import reduce
from itertools import combinations

import numpy as np
import pytest

from conftest import random_points
from gaudin_lab.gaudin import (
    NORMALIZATION,
    GaudinParams,
    direct_generating_function,
    filtration_degree,
    generating_function,
    generator_set,
    inhomogeneous_hamiltonian,
    mu_embedding,
    quadratic_hamiltonian,
)
from gaudin_lab.lie import TensorSpace, build_algebra
from gaudin_lab.operators import OperatorMatrix, exact

E = np.array([[0, 1], [0, 0]], dtype=float)
F = E.T.copy()
H = np.diag([1.0, -1.0])


def _kron_on(mats, N):
    return reduce(np.kron, [mats.get(k, np.eye(2)) for k in range(N)])


def _omega_oracle(i, k, N):
    """Omega^(ik) for spin-1/2 factors under the trace form: e f + f e + h h / 2."""
    return (_kron_on({i: E, k: F}, N) + _kron_on({i: F, k: E}, N) + 0.5 * _kron_on({i: H, k: H}, N))


def test_h1_eigenvalues_two_spins(sl2):
    T = TensorSpace(sl2, (1, 1))
    p = GaudinParams((0, 1))
    H1 = quadratic_hamiltonian(1, p, T)
    oracle = -_omega_oracle(0, 1, 2)
    assert np.allclose(H1.toarray(), oracle)
    vals = np.linalg.eigvalsh(oracle)
    assert np.allclose(sorted(vals), [-0.5, -0.5, -0.5, 1.5])
    triplet = np.array([1.0, 0, 0, 0])
    singlet = np.array([0, 1.0, -1.0, 0])
    assert np.allclose(H1.toarray() @ triplet, -0.5 * triplet)
    assert np.allclose(H1.toarray() @ singlet, 1.5 * singlet)


@pytest.mark.parametrize("weights", [(1, 1, 1), (2, 1, 3), (1, 1, 1, 1)])
def test_hamiltonians_sum_to_zero(sl2, rng, weights):
    T = TensorSpace(sl2, weights)
    p = GaudinParams(random_points(rng, len(weights), gaussian=True))
    total = OperatorMatrix.zeros(T.dim)
    for i in range(1, T.N + 1):
        total = total + quadratic_hamiltonian(i, p, T)
    assert total.is_zero()


def test_hamiltonians_against_kron_oracle(sl2):
    z = (Fraction(0), Fraction(2), Fraction(-3, 2))
    T = TensorSpace(sl2, (1, 1, 1))
    p = GaudinParams(z)
    for i in range(3):
        oracle = sum(_omega_oracle(i, k, 3) / float(z[i] - z[k]) for k in range(3) if k != i)
        assert np.allclose(quadratic_hamiltonian(i + 1, p, T).toarray(), oracle)


def test_scaling_example(sl2):
    T = TensorSpace(sl2, (1, 1))
    h01 = quadratic_hamiltonian(1, GaudinParams((0, 1)), T)
    h02 = quadratic_hamiltonian(1, GaudinParams((0, 2)), T)
    assert h01 == h02.scale(exact(2))


@pytest.mark.parametrize("mu", [None, "h", "f", "h+e+f"])
def test_affine_semiinvariance_exact(sl2, rng, mu):
    T = TensorSpace(sl2, (1, 2, 1))
    p = GaudinParams(random_points(rng, 3), mu)
    for _ in range(3):
        a = Fraction(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))
        b = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        q = p.affine(a, b)
        for i in range(1, 4):
            lhs = inhomogeneous_hamiltonian(i, q, T)
            rhs = inhomogeneous_hamiltonian(i, p, T).scale(exact(1 / a))
            assert lhs == rhs


def test_affine_gaussian_translation(sl2, rng):
    T = TensorSpace(sl2, (1, 1, 1))
    p = GaudinParams(random_points(rng, 3, gaussian=True))
    q = p.affine((2, 1), (Fraction(1, 3), -1))
    a = exact((2, 1))
    for i in range(1, 4):
        assert quadratic_hamiltonian(i, q, T).scale(a) == quadratic_hamiltonian(i, p, T)


def test_form_rescaling_covariance(rng):
    z = random_points(rng, 3)
    T1 = TensorSpace(build_algebra("sl2"), (1, 1, 1))
    T3 = TensorSpace(build_algebra("sl2", form=3), (1, 1, 1))
    for i in range(1, 4):
        h1 = quadratic_hamiltonian(i, GaudinParams(z), T1)
        h3 = quadratic_hamiltonian(i, GaudinParams(z), T3)
        assert h3.scale(exact(3)) == h1


def test_mu_zero_reduces(sl2):
    T = TensorSpace(sl2, (1, 1))
    for mu in (None, 0, "0"):
        p = GaudinParams((0, 1), mu)
        assert inhomogeneous_hamiltonian(1, p, T) == quadratic_hamiltonian(1, p, T)


def test_mu_f_adds_lowering(sl2):
    T = TensorSpace(sl2, (1, 1, 2))
    p = GaudinParams((0, 1, 3), "f")
    for i in range(1, 4):
        diff = inhomogeneous_hamiltonian(i, p, T) - quadratic_hamiltonian(i, p, T)
        assert diff == T.embed(sl2.element("f"), i)


def test_mu_h_example(sl2):
    T = TensorSpace(sl2, (1, 1))
    p = GaudinParams((0, 1), "h")
    diff = inhomogeneous_hamiltonian(1, p, T) - quadratic_hamiltonian(1, p, T)
    assert np.array_equal(diff.toarray(), np.diag([1, 1, -1, -1]).astype(complex))


def test_mu_embedding_for_sl3_is_dual(sl3):
    T = TensorSpace(sl3, (1, 1))
    p = GaudinParams((0, 1), "E12")
    # B(mu, x_a) x^a with B = trace form: E12 pairs with E21, so mu^(i) = E12^(i)
    assert mu_embedding(1, p, T) == T.embed(sl3.element("E12"), 1)


@pytest.mark.parametrize("N", [2, 3])
def test_sum_z_s1_is_pair_casimir(sl2, rng, N):
    T = TensorSpace(sl2, (1,) * N)
    p = GaudinParams(random_points(rng, N))
    S = generating_function(p, T)
    lhs = OperatorMatrix.zeros(T.dim)
    for zi, (_, s1) in zip(p.z, S.points):
        lhs = lhs + s1.scale(zi / NORMALIZATION)
    rhs = T.diagonal_casimir()
    for i in range(1, N + 1):
        rhs = rhs - T.casimir(i)
    assert lhs == rhs.scale(exact(Fraction(1, 2)))
    pair_sum = OperatorMatrix.zeros(T.dim)
    for i, k in combinations(range(1, N + 1), 2):
        pair_sum = pair_sum + T.omega(i, k)
    assert lhs == pair_sum


def test_homogeneous_coefficients(sl2, rng):
    T = TensorSpace(sl2, (1, 2, 1))
    p = GaudinParams(random_points(rng, 3))
    S = generating_function(p, T)
    total = OperatorMatrix.zeros(T.dim)
    for i, (s2, s1) in enumerate(S.points, start=1):
        assert s1 == quadratic_hamiltonian(i, p, T).scale(exact(2))
        assert s2 == T.casimir(i)
        total = total + s1
    assert total.is_zero()
    assert S.infinity[0] == T.diagonal_casimir()


@pytest.mark.parametrize("N", [1, 2])
def test_infinity_coefficient_mu_h(sl2, N):
    """S(w) w^2 at infinity: expand the product formula symbolically in 1/w."""
    T = TensorSpace(sl2, (1,) * N)
    pts = tuple(range(N))
    p = GaudinParams(pts, "h")
    S = generating_function(p, T)
    assert S.infinity[1] == T.diag(sl2.element("h")).scale(exact(NORMALIZATION))
    # oracle: w^2 S(w) = w^2 B(mu,mu) + w * 2 diag(mu) + O(1); read the w^1 term by finite differences
    big = [10 ** 6, 2 * 10 ** 6]
    vals = [direct_generating_function(p, T, w).scale(exact(w * w)) for w in big]
    const = S.infinity[2]
    slope = (vals[1] - vals[0] - const.scale(exact(big[1] ** 2 - big[0] ** 2))).scale(exact(Fraction(1, big[1] - big[0])))
    assert np.allclose(slope.toarray(), S.infinity[1].toarray(), atol=1e-5)


@pytest.mark.parametrize("mu", [None, "h", "e+f"])
def test_partial_fractions_match_product_formula(sl2, rng, mu):
    T = TensorSpace(sl2, (1, 2))
    p = GaudinParams(random_points(rng, 2, gaussian=True), mu)
    S = generating_function(p, T)
    for w in (Fraction(7, 3), (Fraction(1, 2), Fraction(5, 7))):
        assert S.evaluate(w) == direct_generating_function(p, T, w)


@pytest.mark.parametrize("mu", [None, "h", "f", "h+e+f"])
def test_generator_set_commutes_exactly(sl2, rng, mu):
    T = TensorSpace(sl2, (2, 1, 3))
    p = GaudinParams(random_points(rng, 3, gaussian=True), mu)
    gs = generator_set(p, T)
    assert gs.commutator_failures() == []
    assert len(gs) == 2 * 3 + 3


def test_sl3_hamiltonians_commute(sl3, rng):
    T = TensorSpace(sl3, (1, 1, 1))
    for mu in (None, "h", "h+e+f", "f"):
        gs = generator_set(GaudinParams(random_points(rng, 3, gaussian=True), mu), T, full=False)
        assert gs.commutator_failures() == []
    with pytest.raises(ValueError):
        generator_set(GaudinParams((0, 1, 2)), T)


def test_homogeneous_generators_are_invariant(sl2, rng):
    T = TensorSpace(sl2, (1, 1, 2))
    gs = generator_set(GaudinParams(random_points(rng, 3)), T)
    for x in ("e", "h", "f"):
        d = T.diag(sl2.element(x))
        for op in gs.ops:
            assert op.commutator(d).is_zero()


def test_mu_h_breaks_e_invariance(sl2):
    T = TensorSpace(sl2, (1, 1))
    gs = generator_set(GaudinParams((0, 1), "h"), T)
    de, dh = T.diag(sl2.element("e")), T.diag(sl2.element("h"))
    assert all(op.commutator(dh).is_zero() for op in gs.ops)
    assert any(not op.commutator(de).is_zero() for op in gs.ops)


def test_degeneration_exact(sl2, rng):
    T = TensorSpace(sl2, (1, 2, 1))
    p = GaudinParams(random_points(rng, 3), "h+e+f")
    mu = sl2.element("h+e+f")
    for s in (Fraction(1, 10), Fraction(1, 1000)):
        ps = p.scaled_mu(s)
        total = OperatorMatrix.zeros(T.dim)
        for i in range(1, 4):
            d = (inhomogeneous_hamiltonian(i, ps, T) - quadratic_hamiltonian(i, ps, T)).scale(exact(1 / s))
            assert d == mu_embedding(i, p, T)
            total = total + d
        assert total == T.diag(mu)


def test_filtration_degrees(sl2):
    T = TensorSpace(sl2, (1, 1, 1))
    p = GaudinParams((0, 1, 3))
    h1 = quadratic_hamiltonian(1, p, T)
    assert filtration_degree(h1, T)[:2] == (0, 0)
    assert filtration_degree(h1, T)[2] == h1
    hf = inhomogeneous_hamiltonian(1, p.with_mu("f"), T)
    lo, hi, lead = filtration_degree(hf, T)
    assert (lo, hi) == (-1, 0)
    assert lead == h1
    assert filtration_degree(T.embed(sl2.element("e"), 1), T)[:2] == (1, 1)
    assert filtration_degree(OperatorMatrix.zeros(T.dim), T)[:2] == (None, None)


def test_params_validation():
    with pytest.raises(ValueError):
        GaudinParams((0, 1, 0))
    with pytest.raises(ValueError):
        GaudinParams((0, 1), weights=(1, 1, 1))
    p = GaudinParams(("1/2", "2+1/3i"))
    assert not p.is_real
    assert GaudinParams((0.5, 1.5)).is_real
