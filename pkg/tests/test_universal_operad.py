from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from gaudin_lab.gaudin import GaudinParams, generator_set
from gaudin_lab.lie import TensorSpace, singular_subspace
from gaudin_lab.operad import (
    CollisionSchedule,
    OperadTree,
    SetPartition,
    all_trees,
    collision_limit_check,
    d_homomorphism,
    flatness_dimensions,
    gamma_substitute,
    gaudin_elements,
    i_homomorphism,
    limit_algebra,
    limit_spectrum_suite,
)
from gaudin_lab.operators import OperatorMatrix
from gaudin_lab.spectral import CommutativityError, joint_diagonalize, simple_spectrum
from gaudin_lab.universal import UElement


# ---------------------------------------------------------------------------
# U(g)^{(x)n} elements


def test_uelement_commutator_is_bracket(sl2):
    e, h, f = (sl2.element(s) for s in ("e", "h", "f"))
    E, H, F = (UElement.letter(sl2, 2, 1, x) for x in (e, h, f))
    assert E.commutator(F) == H
    assert H.commutator(E) == E.scale(2)
    E2 = UElement.letter(sl2, 2, 2, e)
    assert E.commutator(E2) == UElement(sl2, 2)


def test_uelement_represent_matches_tensor_space(sl2):
    T = TensorSpace(sl2, (1, 2))
    assert UElement.omega(sl2, 2, 1, 2).represent(T) == T.omega(1, 2)
    assert UElement.omega(sl2, 2, 2, 2).represent(T) == T.casimir(2)
    assert UElement.one(sl2, 2, 3).represent(T) == OperatorMatrix.identity(T.dim).scale(3)


def test_casimir_is_central_in_universal_algebra(sl2):
    C = UElement.omega(sl2, 1, 1, 1)
    for s in ("e", "h", "f"):
        assert C.commutator(UElement.letter(sl2, 1, 1, sl2.element(s))) == UElement(sl2, 1)
    assert C.degree() == 2 and C.is_exact


# ---------------------------------------------------------------------------
# D and I


def test_d_on_single_block_is_diagonal(sl2):
    T = TensorSpace(sl2, (1, 1, 2))
    for s in ("e", "h", "f"):
        assert d_homomorphism(SetPartition(((1, 2, 3),)), (s,), T) == T.diag(sl2.element(s))


def test_d_on_singletons_is_identity_relabel(sl2):
    T = TensorSpace(sl2, (1, 2, 1))
    part = SetPartition(((1,), (2,), (3,)))
    assert d_homomorphism(part, ("e", None, "f"), T) == T.embed(sl2.element("e"), 1) @ T.embed(sl2.element("f"), 3)


def test_d_respects_brackets(sl2):
    T = TensorSpace(sl2, (1, 1, 1, 1))
    part = SetPartition(((1, 3), (2, 4)))
    for x, y in product(("e", "h", "f"), repeat=2):
        for slot in (0, 1):
            tx = [None, None]
            ty = [None, None]
            tx[slot], ty[slot] = x, y
            br = sl2.bracket(sl2.element(x), sl2.element(y))
            tb = [None, None]
            tb[slot] = br
            lhs = d_homomorphism(part, tuple(tb), T)
            rhs = d_homomorphism(part, tuple(tx), T).commutator(d_homomorphism(part, tuple(ty), T))
            assert lhs == rhs


def test_d_of_products_is_multiplicative(sl2):
    T = TensorSpace(sl2, (1, 1, 1))
    part = SetPartition(((1, 2), (3,)))
    both = d_homomorphism(part, ("e", "f"), T)
    assert both == d_homomorphism(part, ("e", None), T) @ d_homomorphism(part, (None, "f"), T)


def test_i_homomorphism_examples(sl2):
    T = TensorSpace(sl2, (1, 2, 1))
    x = UElement.letter(sl2, 2, 2, sl2.element("e"))
    assert i_homomorphism((1, 3), x, T) == T.embed(sl2.element("e"), 3)
    full = UElement.omega(sl2, 3, 1, 2)
    assert i_homomorphism((1, 2, 3), full, T) == T.omega(1, 2)
    # matrix input: Omega on V_2 (x) V_1 placed on factors 2, 3
    sub = TensorSpace(sl2, (2, 1))
    assert i_homomorphism((2, 3), sub.omega(1, 2), T) == T.omega(2, 3)
    a = i_homomorphism((1,), UElement.letter(sl2, 1, 1, sl2.element("f")), T)
    b = i_homomorphism((2, 3), sub.omega(1, 2), T)
    assert a.commutator(b).is_zero()
    with pytest.raises(ValueError):
        i_homomorphism((3, 1), full, T)


def test_partition_validation():
    with pytest.raises(ValueError):
        SetPartition(((1, 2), (2, 3)))
    with pytest.raises(ValueError):
        SetPartition(((1,), (3,)))


# ---------------------------------------------------------------------------
# gamma and limit algebras


def _elements(sl2, points):
    return gaudin_elements(sl2, points)


def test_gamma_example_commutes(sl2):
    T = TensorSpace(sl2, (1, 1, 1))
    part = SetPartition(((1, 2), (3,)))
    outer = _elements(sl2, (0, 1))
    inner = [_elements(sl2, (0, Fraction(1, 3))), None]
    gs = gamma_substitute(part, outer, inner, T)
    assert gs.field == "exact"
    assert gs.commutator_failures() == []


def test_gamma_with_centres_only(sl2):
    T = TensorSpace(sl2, (1, 2, 1, 1))
    part = SetPartition(((1, 4), (2, 3)))
    outer = [("C", UElement.omega(sl2, 2, 1, 1)), ("C2", UElement.omega(sl2, 2, 2, 2))]
    inner = [_elements(sl2, (0, 1)), _elements(sl2, (Fraction(2), Fraction(-1)))]
    assert gamma_substitute(part, outer, inner, T).commutator_failures() == []


def test_gamma_rejects_non_invariant_input(sl2):
    T = TensorSpace(sl2, (1, 1, 1))
    part = SetPartition(((1, 2), (3,)))
    outer = _elements(sl2, (0, 1))
    inner = [[("e1", UElement.letter(sl2, 2, 1, sl2.element("e")))], None]
    with pytest.raises(CommutativityError):
        gamma_substitute(part, outer, inner, T)


def test_caterpillar_matches_explicit_gamma(sl2):
    T = TensorSpace(sl2, (1, 1, 1))
    tree = OperadTree((OperadTree((1, 2), (0, 1)), 3), (0, 1))
    la = limit_algebra(tree, T)
    gs = gamma_substitute(SetPartition(((1, 2), (3,))), _elements(sl2, (0, 1)),
                          [_elements(sl2, (0, 1)), None], T)
    keys = {tuple(sorted((r, c, str(v)) for r, c, v in op.entries())) for op in gs.ops}
    keys.discard(())
    assert la.operator_set() == frozenset(keys)


@pytest.mark.parametrize("spec", [[[[1, 2], 3], 4], [[1, 2], [3, 4]], [[1, [2, 4]], 3], [[1, 2, 3], 4]])
def test_recursive_equals_direct_and_order_free(sl2, spec):
    T = TensorSpace(sl2, (1, 1, 1, 1))
    ref = limit_algebra(spec, T, method="recursive").operator_set()
    assert limit_algebra(spec, T, method="direct").operator_set() == ref
    for seed in (1, 2, 3):
        assert limit_algebra(spec, T, seed=seed).operator_set() == ref
        assert limit_algebra(spec, T, method="direct", seed=seed).operator_set() == ref


def test_limit_algebra_commutes_with_weights_up_to_two(sl2):
    for weights in ((2, 1, 2, 1), (2, 2, 2)):
        T = TensorSpace(sl2, weights)
        for tree in all_trees(len(weights)):
            assert limit_algebra(tree, T).generators.commutator_failures() == []


def test_depth_one_tree_is_generator_set(sl2):
    pts = (Fraction(0), Fraction(1, 3), Fraction(1))
    T = TensorSpace(sl2, (1, 2, 1))
    la = limit_algebra(OperadTree((1, 2, 3), pts), T)
    gs = generator_set(GaudinParams(pts), T)
    keys = {tuple(sorted((r, c, str(v)) for r, c, v in op.entries())) for op in gs.ops}
    keys.discard(())
    assert la.operator_set() == frozenset(keys)


def test_provenance_labels(sl2):
    T = TensorSpace(sl2, (1, 1, 1, 1))
    la = limit_algebra([[1, 2], [3, 4]], T)
    assert set(la.provenance) == {(), (1,), (2,)}
    assert "v.2:S[inf,0]" in la.labels


def test_tree_parsing_and_normal_form():
    t = OperadTree.parse({"children": [{"children": [2, 1], "points": [5, 7]}, 3], "points": [2, 4]})
    assert t.points == (0, 1) and t.children[0].points == (0, 1)
    assert t.shape() == (2, 1)
    assert OperadTree.parse(t.to_dict()).child_blocks() == t.child_blocks()
    with pytest.raises(ValueError):
        OperadTree.parse([[1, 2], 4])
    with pytest.raises(ValueError):
        OperadTree((1, 2), (0, 0))
    with pytest.raises(ValueError):
        OperadTree((1,))


def test_tree_counts():
    assert len(all_trees(3)) == 3
    assert len(all_trees(4)) == 25
    assert len(all_trees(3, include_interior=True)) == 4
    assert len(all_trees(4, include_interior=True)) == 26
    assert all(t.is_real for t in all_trees(4))


# ---------------------------------------------------------------------------
# collision limits and flatness


def test_collision_limit_three_points():
    sched = CollisionSchedule((0, 0, 1), (0, 1, 0))
    rep = collision_limit_check((1, 1, 1), sched)
    assert rep.exponents == {"s*H[1]": 1, "s*H[2]": 1, "sum H[1,2]": 0, "H[3]": 0}
    assert rep.richardson <= 1e-6 and rep.ratio <= 0.6
    assert abs(rep.ratio - 0.5) < 1e-3  # first-order convergence
    assert rep.in_limit_algebra and rep.flat and rep.verdict


def test_collision_limit_four_points_two_clusters():
    sched = CollisionSchedule((0, 0, 1, 1), (0, 1, 0, 2))
    rep = collision_limit_check(GaudinParams((0, 1, 2, 3), weights=(1, 1, 1, 1)), sched)
    assert rep.verdict
    assert rep.flatness == [8, 8, 8, 8]


def test_flatness_dimension_three_points(sl2):
    sched = CollisionSchedule((0, 0, 1), (0, 1, 0))
    assert flatness_dimensions(sched, TensorSpace(sl2, (1, 1, 1)), (Fraction(1, 2), Fraction(1, 3))) == [6, 6, 6]


def test_collision_guards():
    with pytest.raises(ValueError):
        collision_limit_check((1, 1), CollisionSchedule((0, 0), (0, 1)))
    with pytest.raises(ValueError):
        CollisionSchedule((0, 0, 1), (1, 1, 0))
    with pytest.raises(ValueError):
        collision_limit_check((1, 1, 1), CollisionSchedule((0, 0, 1), (0, 1, 0)), tree=[[1, 3], 2])


# ---------------------------------------------------------------------------
# spectra of limit algebras


def test_caterpillar_suite_three_spins():
    rep = limit_spectrum_suite([[1, 2], 3], (1, 1, 1))
    assert rep.passes and rep.dim == 3
    assert rep.spectrum.min_gap >= 1e-8


def test_depth_one_suite_matches_interior(sl2):
    pts = (Fraction(0), Fraction(2, 5), Fraction(1))
    rep = limit_spectrum_suite(OperadTree((1, 2, 3), pts), (1, 1, 1))
    T = TensorSpace(sl2, (1, 1, 1))
    sub = generator_set(GaudinParams(pts), T, restrict_to=singular_subspace(T))
    verdict = simple_spectrum(joint_diagonalize(sub.ops))
    assert rep.passes and verdict.simple
    assert np.isclose(rep.spectrum.min_gap, verdict.min_gap, rtol=1e-10)


def test_suite_rejects_complex_coordinates():
    with pytest.raises(ValueError):
        limit_spectrum_suite(OperadTree((1, 2, 3), (0, (1, 1), 1)), (1, 1, 1))
