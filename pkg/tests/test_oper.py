from fractions import Fraction

import numpy as np
import pytest
import sympy

from conftest import random_real_floats
from gaudin_lab.bethe import BetheConfig, bethe_residual, solve_bethe
from gaudin_lab.gaudin import GaudinParams
from gaudin_lab.lie import TensorSpace, build_algebra
from gaudin_lab.oper import (
    CalibrationError,
    Sl2Oper,
    calibration,
    count_bijection,
    eigen_opers,
    frobenius_obstruction,
    indicial_roots,
    miura_oper,
    miura_simple_pole_at_root,
    monodromy_report,
    oper_from_eigenvalue,
    oper_space_dimension,
    residue_check,
)


@pytest.mark.parametrize("N", range(2, 7))
def test_oper_space_dimensions(sl2, N):
    reg = oper_space_dimension(sl2, N)
    assert int(reg) == 2 * (N - 1) + 1
    assert reg.independent == 2 * N - 1 and reg.agree
    irr = oper_space_dimension(sl2, N, irregular=True)
    assert int(irr) == 2 * N == irr.independent


def test_oper_dimension_small_cases(sl2):
    assert int(oper_space_dimension(sl2, 3)) == 5
    assert int(oper_space_dimension(sl2, 2)) == 3
    assert int(oper_space_dimension(sl2, 2, irregular=True)) == 4
    with pytest.raises(ValueError):
        oper_space_dimension(sl2, 0)


def test_indicial_roots():
    assert indicial_roots(0) == (0, 1)
    assert indicial_roots(Fraction(3, 4)) == (Fraction(-1, 2), Fraction(3, 2))
    assert indicial_roots(2) == (-1, 2)
    assert indicial_roots(Fraction(1, 3)) is None


def test_calibration_is_form_covariant():
    assert calibration(build_algebra("sl2")) == (Fraction(1, 2), 0)
    assert calibration(build_algebra("sl2", form="killing")) == (Fraction(2), 0)


def _two_spin_entries(sl2):
    p = GaudinParams((0, 1), weights=(1, 1))
    T = TensorSpace(sl2, (1, 1))
    return p, eigen_opers(p, T, (1, 1))


def test_eigenvalue_opers_two_spins(sl2):
    p, eig = _two_spin_entries(sl2)
    assert sorted(eig) == [0, 2]
    for nu, h1 in ((2, -0.5), (0, 1.5)):
        (vals, op, mult), = eig[nu]
        assert mult == 1
        assert op.a == (Fraction(3, 4), Fraction(3, 4))
        assert abs(op.c[0] + op.c[1]) < 1e-12
        assert np.isclose(op.c[0], 2 * 0.5 * h1)  # alpha * chi(S[1,1]) = (1/2) * 2 H_1
        assert residue_check(op)
        assert monodromy_report(op).verdict


def test_miura_matches_eigen_opers(sl2):
    p, eig = _two_spin_entries(sl2)
    singlet = miura_oper(BetheConfig((0.5,), (1, 1)), p)
    triplet = miura_oper(BetheConfig((), (1, 1)), p)
    assert singlet.max_distance(eig[0][0][1]) <= 1e-10
    assert triplet.max_distance(eig[2][0][1]) <= 1e-10


def test_miura_rejects_non_solution():
    p = GaudinParams((0, 1), weights=(1, 1))
    with pytest.raises(ValueError):
        miura_oper(BetheConfig((0.3,), (1, 1)), p)


def test_miura_permutation_invariant():
    p = GaudinParams((0.0, 0.5, 1.4, 3.0), weights=(1, 1, 1, 1))
    cfg = solve_bethe(p, 2)[0]
    swapped = BetheConfig(tuple(reversed(cfg.roots)), cfg.weights)
    assert miura_oper(cfg, p) == miura_oper(swapped, p)


def test_oper_sum_c_vanishes(sl2, rng):
    z = random_real_floats(rng, 4)
    p = GaudinParams(z, weights=(1, 1, 1, 1))
    eig = eigen_opers(p, TensorSpace(sl2, (1, 1, 1, 1)), (1, 1, 1, 1))
    for entries in eig.values():
        for _, op, _ in entries:
            assert abs(op.sum_c()) < 1e-10


def _symbolic_simple_pole(z, lam, w):
    t = sympy.Symbol("t")
    u = sum(sympy.Rational(l, 2) / (t - zi) for l, zi in zip(lam, z)) - sum(1 / (t - wj) for wj in w)
    T = sympy.together(u ** 2 - sympy.diff(u, t))
    return [sympy.residue(T, t, wj) for wj in w]


@pytest.mark.parametrize("w", [(Fraction(1, 3),), (Fraction(2, 7), Fraction(-5, 3))])
def test_miura_simple_pole_symbolic(w):
    """Symbolic oracle: the 1/(t - w_j) coefficient of u^2 - u' is minus the Bethe residual."""
    z = (Fraction(0), Fraction(1), Fraction(5, 2))
    lam = (1, 2, 1)
    sym = _symbolic_simple_pole([sympy.Rational(x.numerator, x.denominator) for x in z], lam,
                                [sympy.Rational(x.numerator, x.denominator) for x in w])
    p = GaudinParams(z, weights=lam)
    cfg = BetheConfig(tuple(float(x) for x in w), lam)
    got = miura_simple_pole_at_root(cfg, p)
    res = bethe_residual(cfg, p)
    order = [tuple(float(x) for x in w).index(r.real) for r in cfg.roots]
    for k, j in enumerate(order):
        assert np.isclose(got[k], complex(sym[j]), rtol=1e-12)
        assert np.isclose(got[k], -res[k], rtol=1e-12)


def test_miura_double_pole_cancels_identically():
    t, w, z = sympy.symbols("t w z")
    u = sympy.Rational(1, 2) / (t - z) - 1 / (t - w)
    T = u ** 2 - sympy.diff(u, t)
    assert sympy.limit(sympy.simplify(T * (t - w) ** 2), t, w) == 0


def test_random_accessory_parameters_obstructed():
    rng = np.random.default_rng(0)
    vals = []
    for _ in range(10):
        c1 = rng.standard_normal() * 2
        op = Sl2Oper((0j, 1 + 0j), (Fraction(3, 4),) * 2, (complex(c1), complex(-c1)), (1, 1))
        vals.append(abs(frobenius_obstruction(op, 1)))
    assert min(vals) > 1e-3


def test_weight_zero_point_is_trivial():
    p = GaudinParams((0.0, 0.7, 2.0), weights=(1, 0, 1))
    for m in (0, 1):
        for cfg in solve_bethe(p, m):
            op = miura_oper(cfg, p)
            assert op.c[1] == 0 and frobenius_obstruction(op, 2) == 0
            assert residue_check(op)


def test_residue_check_rejects_mismatch():
    op = Sl2Oper((0j, 1 + 0j), (Fraction(3, 4), Fraction(2)), (0j, 0j), (1, 1))
    assert not residue_check(op)
    with pytest.raises(ValueError):
        frobenius_obstruction(op, 2)


def test_calibration_error_on_wrong_residue(sl2):
    p = GaudinParams((0, 1), weights=(1, 1))
    chi = {"S[1,1]": -1.0, "S[2,1]": 1.0, "S[1,2]": 5.0, "S[2,2]": 1.5}
    with pytest.raises(CalibrationError):
        oper_from_eigenvalue(chi, p, sl2)


def test_monodromy_at_infinity_reported_separately(sl2):
    p, eig = _two_spin_entries(sl2)
    for nu, entries in eig.items():
        rep = monodromy_report(entries[0][1], include_infinity=True)
        assert rep.verdict
        assert rep.infinity["nu"] == nu and rep.infinity["pass"]


def test_obstruction_affine_invariance():
    p = GaudinParams((0.0, 0.5, 1.4, 3.0), weights=(1, 1, 1, 1))
    q = GaudinParams((1.0, 0.0, -1.8, -5.0), weights=(1, 1, 1, 1))
    for cfg in solve_bethe(p, 2):
        moved = BetheConfig(tuple(-2 * w + 1 for w in cfg.roots), cfg.weights)
        assert monodromy_report(miura_oper(cfg, p)).verdict
        assert monodromy_report(miura_oper(moved, q)).verdict


@pytest.mark.parametrize("weights,total", [((1, 1), 2), ((1, 1, 1, 1), 6), ((2, 2), 3)])
def test_bijection_counts(rng, weights, total):
    p = GaudinParams(random_real_floats(rng, len(weights)), weights=weights)
    rep = count_bijection(p)
    assert rep.verdict and not rep.incomplete
    assert rep.totals == {"eigenvalues": total, "bethe": total}


def test_bijection_two_spin_sectors():
    rep = count_bijection(GaudinParams((0, 1), weights=(1, 1)))
    assert {nu: (s["eigenvalues"], s["bethe"]) for nu, s in rep.sectors.items()} == {2: (1, 1), 0: (1, 1)}
