from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles as O
from lflat.exactla import (LinAlgError, Matrix, NotWellDefined, Subquotient, Subspace, SymmetricForm,
                           block_diag, fstr, image, induced_map, intersect, kernel, kron, preimage,
                           quotient_map, sign, signature, solve, sum_spaces, to_fraction)
from strategies import invertible_matrices, matrices, rationals, symmetric_matrices


def test_parses_rational_strings():
    m = Matrix([["1/2", 3], ["-4/6", "0"]])
    assert to_fraction(m[0, 0]) == Fraction(1, 2)
    assert to_fraction(m[1, 0]) == Fraction(-2, 3)
    assert m.to_json() == [["1/2", "3"], ["-2/3", "0"]]


def test_rejects_floats():
    with pytest.raises(TypeError):
        Matrix([[0.5]])


@given(rationals)
def test_fstr_round_trip(x):
    assert Fraction(fstr(x)) == x
    assert ("/" in fstr(x)) == (x.denominator != 1)


def test_matrix_is_immutable():
    m = Matrix.identity(2)
    with pytest.raises(AttributeError):
        m.foo = 1


@given(matrices(max_dim=5))
def test_rank_nullity(m):
    assert m.rank() + kernel(m).dim == m.cols
    assert image(m).dim == m.rank()
    assert (m @ kernel(m).basis).is_zero()


@given(matrices(max_dim=5))
def test_kernel_against_flint_nullspace(m):
    if not m.cols:
        assert kernel(m).dim == 0
        return
    ref = O.nullspace(m.flint) if m.rows else O._identity(m.cols)
    assert kernel(m) == Subspace(m.cols, Matrix(ref))


@given(st.data())
def test_solve_finds_a_solution(data):
    a = data.draw(matrices(max_dim=4))
    x = data.draw(matrices(rows=a.cols, cols=2))
    b = a @ x
    assert a @ solve(a, b) == b


def test_solve_inconsistent():
    with pytest.raises(LinAlgError):
        solve(Matrix([[1, 0], [0, 0]]), Matrix([[0], [1]]))


@given(st.data())
def test_sum_and_intersection_dimensions(data):
    n = data.draw(st.integers(1, 5))
    a = Subspace(n, data.draw(matrices(rows=n, max_dim=4)))
    b = Subspace(n, data.draw(matrices(rows=n, max_dim=4)))
    s, i = sum_spaces(a, b), intersect(a, b)
    assert s.dim + i.dim == a.dim + b.dim
    assert s.contains_subspace(a) and s.contains_subspace(b)
    assert a.contains_subspace(i) and b.contains_subspace(i)


@given(st.data())
def test_quotient_map_kernel_is_the_subspace(data):
    n = data.draw(st.integers(1, 5))
    W = Subspace(n, data.draw(matrices(rows=n, max_dim=4)))
    proj, k = quotient_map(n, W)
    assert k == n - W.dim
    assert kernel(proj) == W


@given(st.data())
def test_preimage(data):
    f = data.draw(matrices(rows=3, cols=4))
    T = Subspace(3, data.draw(matrices(rows=3, max_dim=3)))
    P = preimage(f, T)
    assert T.contains(f @ P.basis)
    assert P.contains_subspace(kernel(f))


def test_subquotient_coordinates():
    top = Subspace.full(3)
    bottom = Subspace.span(3, [[1, 1, 0]])
    sq = Subquotient(top, bottom)
    assert sq.dim == 2
    assert sq.is_zero_class(Matrix.column([2, 2, 0]))
    with pytest.raises(LinAlgError):
        Subquotient(bottom, top)


def test_induced_map_checks_well_definedness():
    X = Subspace.full(2)
    with pytest.raises(NotWellDefined):
        induced_map(Matrix([[0, 1], [1, 0]]), X, Subspace.span(2, [[1, 0]]), X, Subspace.span(2, [[1, 0]]))
    m = induced_map(Matrix.identity(2), X, Subspace.span(2, [[1, 0]]), X, Subspace.span(2, [[1, 0]]))
    assert m.shape == (1, 1) and m[0, 0] != 0


def test_kron_and_block_diag():
    a = Matrix([[1, 2], [3, 4]])
    assert kron(Matrix.identity(1), a) == a
    assert block_diag(a, Matrix.identity(1)).shape == (3, 3)
    assert kron(a, Matrix.identity(2))[1, 3] == 2


# -- signature ----------------------------------------------------------------------------


def test_signature_small_cases():
    assert signature(Matrix([[0, 1], [1, 0]])) == (1, 1, 0)
    assert signature(Matrix([[1, 0, 0], [0, 0, 0], [0, 0, -3]])) == (1, 1, 1)
    assert signature(Matrix.zeros(0, 0)) == (0, 0, 0)
    assert sign(Matrix.diag([1, 2, 3])) == 3


def test_signature_rejects_asymmetric():
    with pytest.raises(LinAlgError):
        SymmetricForm(Matrix([[0, 1], [0, 0]]))


@given(symmetric_matrices(max_dim=8))
def test_signature_matches_congruence_oracle(m):
    assert signature(m) == O.congruence_signature(m.tolist())


@given(symmetric_matrices(max_dim=6, entries=rationals))
def test_signature_matches_eigenvalues(m):
    pos, neg, null = signature(m)
    assert null == m.rows - m.rank()
    fp, fn, _ = O.float_signature(m.tolist())
    if null == 0:
        assert (pos, neg) == (fp, fn)


@given(st.data())
def test_signature_is_a_congruence_invariant(data):
    m = data.draw(symmetric_matrices(max_dim=5))
    p = data.draw(invertible_matrices(m.rows))
    assert signature(p.T @ m @ p) == signature(m)
