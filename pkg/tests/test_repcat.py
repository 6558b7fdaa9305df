import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from lflat.exactla import Matrix, Subspace
from lflat.repcat import (COMPLEX, QUATERNIONIC, REAL, REDUCIBLE, UNDECIDED, DualityStructure, FiniteGroup,
                          InfiniteGroupError, MatrixGroupRep, RepError, average_invariant_form,
                          classify_type, coefficient_group, commutant, element_order, endomorphism_algebra,
                          group_closure, hat_rep, invariant_forms, k0_grading_ranks, meataxe_split, spin)

Z3 = Matrix([[0, -1], [1, -1]])
QI = Matrix(O._QI)
QJ = Matrix(O._QJ)


def rep_of(irr: O.Irreducible) -> MatrixGroupRep:
    names = tuple(sorted(irr.gens))
    return MatrixGroupRep(names, tuple(Matrix(irr.gens[n]) for n in names), dim=irr.dim)


@pytest.mark.parametrize("m, order", [
    (Z3, 3), (Matrix([[1, 1], [0, 1]]), None), (Matrix([[2, 1], [1, 1]]), None),
    (-Matrix.identity(3), 2), (Matrix([[0, -1], [1, 0]]), 4), (Matrix([[0, -1], [1, 1]]), 6),
    (Matrix([[0, 0, 1], [1, 0, 0], [0, 1, 0]]), 3), (Matrix.identity(2), 1),
    (Matrix([["1/2", 0], [0, 2]]), None),
])
def test_element_order(m, order):
    assert element_order(m) == order


def test_group_closure_sizes():
    assert len(group_closure([QI, QJ])) == 8
    assert len(group_closure([Z3])) == 3
    with pytest.raises(InfiniteGroupError):
        group_closure([Matrix([[1, 1], [0, 1]])])


def test_q8_conjugacy_classes():
    G = FiniteGroup(("i", "j"), (QI, QJ))
    assert G.order == 8
    assert sorted(len(c) for c in G.conjugacy_classes()) == [1, 1, 2, 2, 2]
    inv = G.inverse_index()
    assert all(inv[inv[i]] == i for i in range(8))


def test_relations_are_checked():
    with pytest.raises(RepError):
        MatrixGroupRep(("g",), (Z3,), ((("g", 2),),))
    MatrixGroupRep(("g",), (Z3,), ((("g", 3),),))


@pytest.mark.parametrize("group", sorted(O.CATALOG))
def test_catalog_irreducibles_get_their_type(group):
    for irr in O.CATALOG[group]:
        res = classify_type(rep_of(irr))
        assert res.kind == irr.kind and res.certified
        assert res.end_dim == {REAL: 1, COMPLEX: 2, QUATERNIONIC: 4}[res.kind]


def test_frobenius_schur_agrees_with_type():
    # (1/|G|) sum chi(g^2) is 1, 0, -1 for absolutely irreducible real, complex, quaternionic
    # characters; a rational complex-type irreducible carries two conjugate characters
    for group in ("Z3", "Z4", "Q8"):
        whole, _ = O.full_group(group)
        for irr in O.CATALOG[group]:
            mats = irr.mats()
            vals = [O._trace(O.evaluate(w + w, mats, irr.dim)) for w in whole.words]
            nu = sum(vals, 0) / len(whole.words)
            expect = {REAL: 1, COMPLEX: 0, QUATERNIONIC: -2}[irr.kind]
            assert nu == expect


def test_reducible_is_detected():
    rep = MatrixGroupRep(("g",), (Matrix.diag([1, -1]),))
    assert classify_type(rep).kind == REDUCIBLE
    split = meataxe_split(rep)
    assert split.subspace is not None and 0 < split.subspace.dim < 2


def test_hat_rep_end_dimension_doubles():
    rep = MatrixGroupRep(("g",), (Z3,))
    dual = DualityStructure(0, Matrix([[2, -1], [-1, 2]]))
    h = hat_rep(rep, dual)
    assert h.dim == 4
    assert len(endomorphism_algebra(h)) == 2 * len(endomorphism_algebra(rep))
    assert classify_type(rep, dual).hat_end_dim == 4


def test_coefficient_groups():
    assert coefficient_group(REAL, 0, True) == "Z"
    assert coefficient_group(REAL, 1, True) == "0"
    assert coefficient_group(COMPLEX, 1, True) == "Z"
    assert coefficient_group(QUATERNIONIC, 1, True) == "Z2"
    assert coefficient_group(QUATERNIONIC, 0, False) == "0"


def test_invariant_forms():
    rep = MatrixGroupRep(("g",), (Z3,))
    sym = invariant_forms(rep, 0)
    anti = invariant_forms(rep, 1)
    assert len(sym) == 1 and len(anti) == 1
    for f in sym:
        assert f.T == f and Z3.T @ f @ Z3 == f
    for f in anti:
        assert f.T == -f and Z3.T @ f @ Z3 == f
    assert average_invariant_form(rep, 0) is not None


def test_form_must_be_invariant():
    rep = MatrixGroupRep(("g",), (Z3,))
    with pytest.raises(RepError):
        DualityStructure(0, Matrix.identity(2)).check_invariant(rep)
    with pytest.raises(RepError):
        DualityStructure(1, Matrix.identity(2))


def test_commutant_of_scalars_is_everything():
    assert len(commutant([Matrix.identity(2) * 3], 2)) == 4


def test_spin_closes_under_the_group():
    s = spin(Matrix.column([1, 0]), [Z3])
    assert s == Subspace.full(2)


@given(st.lists(st.sampled_from([1, -1, 2, -3]), min_size=1, max_size=6))
def test_k0_ranks_are_inertia(diag):
    dual = DualityStructure(0, Matrix.diag(diag))
    assert k0_grading_ranks(dual) == (sum(d > 0 for d in diag), sum(d < 0 for d in diag))


def test_k0_ranks_symplectic():
    assert k0_grading_ranks(DualityStructure(1, Matrix([[0, 1], [-1, 0]]))) == (1, 1)


def test_non_absolutely_irreducible_is_undecided():
    # the cyclotomic Phi_8 piece of Z8 has End = Q(zeta_8), of dimension 4 and commutative
    c8 = Matrix([[0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]])
    res = classify_type(MatrixGroupRep(("g",), (c8,)))
    assert res.kind == UNDECIDED and not res.certified
