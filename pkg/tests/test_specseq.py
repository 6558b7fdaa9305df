import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles as O
from check_corpus import filtered_data
from lflat import complexes as cx
from lflat.exactla import Matrix, Subspace, signature
from lflat.repcat import DualityStructure
from lflat.sheaves import CochainComplex, LocalSystem, OrientedComplex
from lflat.specseq import (Bicomplex, FilteredComplex, SpectralError, compute_pages, lagrangian_bicomplex,
                           tau_lagrangian)
from strategies import planted_filtered_complexes, symmetric_matrices
from systems import symplectic_circle_system

CIRCLE = OrientedComplex.orient(cx.circle())


def page_table(page):
    return {k: c.dim for k, c in page.cells.items() if c.dim}


@given(planted_filtered_complexes())
def test_pages_match_the_planted_structure(planted):
    fc, expect = planted
    for method in ("reduction", "subspace"):
        ss = compute_pages(fc, method=method)
        for r in range(1, fc.length + 2):
            assert page_table(ss.page(r)) == expect(r)
        assert page_table(ss.infinity) == expect(None)
        assert all(ss.checks.values())


@given(planted_filtered_complexes(max_items=5))
def test_pages_and_differentials_match_subspace_oracle(planted):
    fc, _ = planted
    fd = filtered_data(fc)
    ss = compute_pages(fc)
    for r in range(1, fc.length + 1):
        page = ss.page(r)
        assert page_table(page) == {k: v for k, v in O.page_dims(fd, r).items() if v}
        for (p, n), m in page.diffs.items():
            assert m.rank() == O.d_r_rank(fd, r, p, n)
    assert page_table(ss.infinity) == {k: v for k, v in O.infinite_page_dims(fd).items() if v}
    assert [ss.infinity.total_dim(n) for n in range(fc.top + 1)] == O.cohomology_of(fd)


def test_filtration_must_be_preserved():
    C = CochainComplex((1, 1), (Matrix([[1]]), Matrix.zeros(0, 1)))
    with pytest.raises(SpectralError):
        FilteredComplex(C, ((1,), (0,)))
    FilteredComplex(C, ((0,), (1,)))


def test_bicomplex_total_is_a_complex():
    one = Matrix([[1]])
    bic = Bicomplex({(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1},
                    {(0, 0): one, (0, 1): one}, {(0, 0): one, (1, 0): one})
    fc = bic.total()
    assert fc.complex.dims == (1, 2, 1)
    ss = compute_pages(fc)
    assert page_table(ss.page(1)) == {}
    assert ss.infinity.total_dim(1) == 0


def brute_tau(M, F, dual, L):
    bic, blocks = lagrangian_bicomplex(M, F, dual, L)
    shift = (2, M.dim + 2)
    chain = {k: v.flint for k, v in bic.total_pairing(shift, blocks).items()}
    fd = filtered_data(bic.total())
    total = 0
    for r in (1, 2):
        (pos, neg, _), sym = O.q_form_signature(fd, r, chain, shift)
        assert sym
        total += pos - neg
    return 2 * total


def test_trivial_circle_has_tau_zero():
    F, dual, L = symplectic_circle_system(Matrix.zeros(1, 1))
    res = tau_lagrangian(CIRCLE, F, dual, L)
    assert res.tau == 0 and all(res.checks.values())


def test_shear_has_tau_minus_two():
    F, dual, L = symplectic_circle_system(Matrix([[1]]))
    assert tau_lagrangian(CIRCLE, F, dual, L).tau == -2 == brute_tau(CIRCLE, F, dual, L)


@settings(max_examples=15)
@given(symmetric_matrices(max_dim=2, entries=st.integers(-2, 2)))
def test_tau_is_minus_twice_the_shear_signature(S):
    if S.rows == 0:
        return
    F, dual, L = symplectic_circle_system(S)
    tau = tau_lagrangian(CIRCLE, F, dual, L).tau
    pos, neg, _ = signature(S)
    assert tau == brute_tau(CIRCLE, F, dual, L) == -2 * (pos - neg)


@settings(max_examples=10)
@given(symmetric_matrices(max_dim=2, entries=st.integers(-2, 2)),
       symmetric_matrices(max_dim=2, entries=st.integers(-2, 2)))
def test_tau_is_additive_and_odd(S, T):
    if not S.rows or not T.rows:
        return
    Fa, da, La = symplectic_circle_system(S)
    Fb, db, Lb = symplectic_circle_system(T)
    from lflat.exactla import block_diag
    Fs = Fa.direct_sum(Fb)
    ds = DualityStructure(1, block_diag(da.q, db.q))
    Ls = Subspace(La.ambient_dim + Lb.ambient_dim, block_diag(La.basis, Lb.basis))
    ta, tb = tau_lagrangian(CIRCLE, Fa, da, La).tau, tau_lagrangian(CIRCLE, Fb, db, Lb).tau
    assert tau_lagrangian(CIRCLE, Fs, ds, Ls).tau == ta + tb
    assert tau_lagrangian(CIRCLE, Fa, da.negate(), La).tau == -ta


def test_tau_rejects_bad_input():
    F, dual, L = symplectic_circle_system(Matrix([[1]]))
    with pytest.raises(SpectralError):
        tau_lagrangian(CIRCLE, F, dual, Subspace.span(2, [[1, 1]]))
    with pytest.raises(SpectralError):
        tau_lagrangian(OrientedComplex.orient(cx.sphere()), LocalSystem.trivial(2), dual, L)
    with pytest.raises(SpectralError):
        tau_lagrangian(CIRCLE, LocalSystem.trivial(2), DualityStructure(0, Matrix([[1, 0], [0, -1]])),
                       Subspace.span(2, [[1, 1]]))
