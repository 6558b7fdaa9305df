import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from lflat import complexes as cx
from lflat import io
from lflat.exactla import Matrix, Subspace
from lflat.lgroups import (ExtendedLGenerator, LGenerator, LGroupError, NotInvariantError, NotIsotropicError,
                           classify, classify_many, direct_sum, ex_direct_sum, ex_lagrangian_reduce,
                           find_invariant_isotropic, lagrangian_verify, product_sign, reduce_fully,
                           sublagrangian_reduce, tensor_product)
from lflat.repcat import DualityStructure, MatrixGroupRep, invariant_forms
from lflat.sheaves import LocalSystem, OrientedComplex

GROUPS = sorted(O.CATALOG)
Z3 = Matrix([[0, -1], [1, -1]])


def planted(group, eps, seed, max_rank=6):
    return O.planted_generator(group, eps, random.Random(seed), max_rank)


def lift(g: O.PlainGenerator) -> LGenerator:
    return io.generator(g.to_json())


@given(st.sampled_from(GROUPS), st.integers(0, 1), st.integers(0, 10**6))
def test_classify_matches_projector_oracle(group, eps, seed):
    g = planted(group, eps, seed)
    assert classify(lift(g)).invariants() == O.oracle_normal_form(g, group)


@given(st.sampled_from(GROUPS), st.integers(0, 1), st.integers(0, 10**6))
def test_classify_is_additive(group, eps, seed):
    a, b = planted(group, eps, seed, 4), planted(group, eps, seed + 1, 4)
    la, lb = lift(a), lift(b)
    na, nb, nab = classify_many([la, lb, direct_sum(la, lb)])
    assert na + nb == nab


@given(st.sampled_from(GROUPS), st.integers(0, 1), st.integers(0, 10**6))
def test_negation_flips_the_class(group, eps, seed):
    g = lift(planted(group, eps, seed))
    nf, neg = classify_many([g, g.negate()])
    assert (nf + neg).is_zero


@pytest.mark.parametrize("group", GROUPS)
def test_reduction_matches_brute_force_and_keeps_the_class(group):
    for k in range(6):
        g = planted(group, k % 2, 100 + k)
        gen = lift(g)
        residue, steps = reduce_fully(gen)
        assert residue.dim == gen.dim - 2 * sum(steps)
        brute, _ = O.bruteforce_reduce(g)
        assert residue.dim == brute.dim
        if residue.dim:
            before, after = classify_many([gen, residue])
            assert before == after
        else:
            assert classify(gen).is_zero


def test_hyperbolic_plane_is_zero():
    q = Matrix([[0, 1], [1, 0]])
    gen = LGenerator(DualityStructure(0, q), rep=MatrixGroupRep(("g",), (Matrix.identity(2),)))
    L = Subspace.span(2, [[1, 0]])
    assert lagrangian_verify(gen, L)
    assert sublagrangian_reduce(gen, L).dim == 0
    assert classify(gen).is_zero
    assert find_invariant_isotropic(gen) is not None


def test_definite_form_has_no_isotropic_subspace():
    gen = LGenerator(DualityStructure(0, Matrix.diag([1, 2])), rep=MatrixGroupRep(("g",), (-Matrix.identity(2),)))
    assert find_invariant_isotropic(gen) is None
    assert list(classify(gen).invariants().values()) == [2]
    with pytest.raises(NotIsotropicError):
        sublagrangian_reduce(gen, Subspace.span(2, [[1, 0]]))


def test_non_invariant_subspace_is_rejected():
    q = Matrix([[0, 1], [1, 0]])
    swap = Matrix([[0, 1], [1, 0]])
    gen = LGenerator(DualityStructure(0, q), rep=MatrixGroupRep(("g",), (swap,)))
    with pytest.raises(NotInvariantError):
        lagrangian_verify(gen, Subspace.span(2, [[1, 0]]))


def test_form_must_match_epsilon_and_group():
    with pytest.raises(LGroupError):
        direct_sum(lift(planted("Z2", 0, 1)), lift(planted("Z2", 1, 1)))
    with pytest.raises(LGroupError):
        LGenerator(DualityStructure(0, Matrix.identity(1)))


def test_quaternionic_symplectic_invariant_is_mod_two():
    q8 = O.CATALOG["Q8"][-1]
    rep = MatrixGroupRep(("i", "j"), tuple(Matrix(q8.gens[n]) for n in ("i", "j")))
    gen = LGenerator(DualityStructure(1, invariant_forms(rep, 1)[0]), rep=rep)
    nf = classify(gen)
    assert [s.coefficient for s in nf.summands] == ["Z2"]
    assert (nf + nf).is_zero


def test_tensor_product_sign():
    assert [product_sign(a, b) for a in (0, 1) for b in (0, 1)] == [1, 1, 1, -1]
    rep = MatrixGroupRep(("g",), (Z3,))
    a = LGenerator(DualityStructure(0, Matrix([[2, -1], [-1, 2]])), rep=rep)
    one = LGenerator(DualityStructure(0, Matrix([[1]])), rep=MatrixGroupRep(("g",), (Matrix.identity(1),)))
    t = tensor_product(a, one)
    assert t.dim == 2 and classify(t) == classify(a)
    sym = LGenerator(DualityStructure(1, Matrix([[0, 1], [-1, 0]])),
                     rep=MatrixGroupRep(("g",), (Matrix.identity(2),)))
    tt = tensor_product(sym, sym)
    assert tt.epsilon == 0 and tt.dual.q.T == tt.dual.q


def test_local_system_carrier_uses_holonomy():
    X = cx.circle()
    F = LocalSystem(2, {(0, 2): Matrix([[0, 1], [1, 0]])})
    gen = LGenerator(DualityStructure(0, Matrix.identity(2)), complex=X, local=F)
    nf = classify(gen)
    assert sorted(nf.invariants().values()) == [1, 1]


def test_extended_reduction_adds_tau():
    M = OrientedComplex.orient(cx.circle())
    gen = LGenerator(DualityStructure(1, Matrix([[0, 1], [-1, 0]])), complex=M.base, local=LocalSystem.trivial(2))
    L = Subspace.span(2, [[1, 0]])
    out = ex_lagrangian_reduce(ExtendedLGenerator(gen, 5), L, M)
    assert out.z == 5 and out.base.dim == 0
    shear = io.system({"stalk_dim": 2, "monodromy": {"e1-2": [[1, 1], [0, 1]]}}, M.base)
    sheared = LGenerator(gen.dual, complex=M.base, local=shear)
    assert ex_lagrangian_reduce(ExtendedLGenerator(sheared, 3), L, M).z == 1
    assert ex_direct_sum(ExtendedLGenerator(gen, 1), ExtendedLGenerator(gen, 2)).z == 3


def test_extended_reduction_needs_a_lagrangian():
    M = OrientedComplex.orient(cx.circle())
    q = Matrix([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
    gen = LGenerator(DualityStructure(1, q), complex=M.base, local=LocalSystem.trivial(4))
    with pytest.raises(NotIsotropicError):
        ex_lagrangian_reduce(ExtendedLGenerator(gen, 0), Subspace.span(4, [[1, 0, 0, 0]]), M)
