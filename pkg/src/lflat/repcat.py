"""Finite group representations over Q with epsilon-symmetric duality structures.

Covers the hat construction on F + F*, endomorphism algebras, type
classification (real / complex / quaternionic) and invariant-form averaging.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from math import gcd
from dataclasses import dataclass, field
from typing import Sequence

import flint

from .exactla import (
    LinAlgError, Matrix, Subspace, block_diag, hstack, kernel, kron, rref, signature, vstack,
)

DEFAULT_GROUP_CAP = 10_000
DEFAULT_MEATAXE_TRIES = 64

Word = tuple  # tuple of (generator_name, +1 | -1)


class RepError(ValueError):
    pass


class InfiniteGroupError(RepError):
    """Closure enumeration exceeded its cap: the group is possibly infinite."""


@dataclass(frozen=True)
class MatrixGroupRep:
    generator_names: tuple[str, ...]
    generator_matrices: tuple[Matrix, ...]
    relations: tuple[Word, ...] = ()
    dim: int = -1

    def __post_init__(self):
        names = tuple(self.generator_names)
        mats = tuple(self.generator_matrices)
        object.__setattr__(self, "generator_names", names)
        object.__setattr__(self, "generator_matrices", mats)
        object.__setattr__(self, "relations", tuple(tuple(tuple(x) for x in w) for w in self.relations))
        if len(names) != len(mats):
            raise RepError("one matrix per generator name required")
        dim = self.dim
        if dim < 0:
            if not mats:
                raise RepError("dimension required for a representation without generators")
            dim = mats[0].rows
            object.__setattr__(self, "dim", dim)
        for n, m in zip(names, mats):
            if m.shape != (dim, dim):
                raise RepError(f"generator {n!r} has shape {m.shape}, expected {(dim, dim)}")
            if not m.is_invertible():
                raise RepError(f"generator {n!r} is not invertible")
        for w in self.relations:
            if self.evaluate(w) != Matrix.identity(dim):
                raise RepError(f"relation {w} does not evaluate to the identity")

    @classmethod
    def trivial(cls, names: Sequence[str], dim: int) -> "MatrixGroupRep":
        return cls(tuple(names), tuple(Matrix.identity(dim) for _ in names), dim=dim)

    def matrix(self, name: str) -> Matrix:
        return self.generator_matrices[self.generator_names.index(name)]

    def evaluate(self, word) -> Matrix:
        out = Matrix.identity(self.dim)
        for name, e in word:
            out = out @ (self.matrix(name) ** e)
        return out

    def conjugate(self, a: Matrix) -> "MatrixGroupRep":
        """The isomorphic representation g -> a^-1 rho(g) a."""
        ai = a.inv()
        return MatrixGroupRep(self.generator_names,
                              tuple(ai @ m @ a for m in self.generator_matrices),
                              self.relations, self.dim)

    def direct_sum(self, other: "MatrixGroupRep") -> "MatrixGroupRep":
        if self.generator_names != other.generator_names:
            raise RepError("direct sum needs the same generator names")
        return MatrixGroupRep(self.generator_names,
                              tuple(block_diag(a, b) for a, b in
                                    zip(self.generator_matrices, other.generator_matrices)),
                              self.relations, self.dim + other.dim)

    def restrict(self, basis: Matrix) -> "MatrixGroupRep":
        """Action on an invariant subspace, in the coordinates of ``basis``."""
        from .exactla import solve
        mats = []
        for n, m in zip(self.generator_names, self.generator_matrices):
            try:
                mats.append(solve(basis, m @ basis))
            except LinAlgError:
                raise RepError(f"subspace is not invariant under generator {n!r}") from None
        return MatrixGroupRep(self.generator_names, tuple(mats), (), basis.cols)


@dataclass(frozen=True)
class DualityStructure:
    epsilon: int
    q: Matrix

    def __post_init__(self):
        object.__setattr__(self, "epsilon", self.epsilon % 2)
        if not self.q.is_square():
            raise RepError("duality matrix must be square")
        if not self.q.is_invertible():
            raise RepError("duality matrix must be invertible")
        sgn = -1 if self.epsilon else 1
        if self.q.T != self.q * sgn:
            raise RepError(f"q is not {self.epsilon}-symmetric (q^T != {sgn:+d} q)")

    @property
    def dim(self) -> int:
        return self.q.rows

    def negate(self) -> "DualityStructure":
        return DualityStructure(self.epsilon, -self.q)

    def check_invariant(self, rep: MatrixGroupRep):
        if rep.dim != self.dim:
            raise RepError("duality and representation dimensions differ")
        for n, g in zip(rep.generator_names, rep.generator_matrices):
            if g.T @ self.q @ g != self.q:
                raise RepError(f"duality is not invariant under generator {n!r}")


# -- finite groups -------------------------------------------------------------


def element_order(g: Matrix) -> int | None:
    """Order of g, or None when it is infinite.

    g has finite order iff every irreducible factor of its characteristic
    polynomial is cyclotomic and g^m = 1 for the lcm m of their indices.
    """
    n = g.rows
    if n == 0:
        return 1
    _, factors = g.flint.charpoly().factor()
    m = 1
    for f, _ in factors:
        f = f / f[f.degree()]
        d = f.degree()
        k = next((k for k in range(1, 2 * d * d + 3)
                  if flint.fmpq_poly(flint.fmpz_poly.cyclotomic(k)) == f), None)
        if k is None:
            return None
        m = m * k // gcd(m, k)
    ident = Matrix.identity(n)
    if g ** m != ident:
        return None
    for p in sorted({p for p in range(2, m + 1) if m % p == 0 and all(p % r for r in range(2, p))}):
        while m % p == 0 and g ** (m // p) == ident:
            m //= p
    return m


def group_closure(generators: Sequence[Matrix], cap: int = DEFAULT_GROUP_CAP) -> list[Matrix]:
    """All products of the generators (BFS from the identity), in discovery order."""
    return [m for _, m in _closure_words(list(generators), None, cap)]


def _closure_words(mats, names, cap):
    if not mats:
        raise RepError("closure of an empty generator list needs a dimension")
    n = mats[0].rows
    for k, g in enumerate(mats):
        if element_order(g) is None:
            raise InfiniteGroupError(f"generator {names[k] if names else k} has infinite order")
    ident = Matrix.identity(n)
    seen = {ident: ()}
    order = [((), ident)]
    todo = deque(order)
    while todo:
        w, m = todo.popleft()
        for k, g in enumerate(mats):
            h = m @ g
            if h not in seen:
                if len(seen) >= cap:
                    raise InfiniteGroupError(
                        f"closure exceeded {cap} elements: possibly infinite group")
                word = w + (((names[k] if names else k), 1),)
                seen[h] = word
                order.append((word, h))
                todo.append((word, h))
    return order


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """A finite group presented by named generators of a faithful matrix representation."""

    generator_names: tuple[str, ...]
    generator_matrices: tuple[Matrix, ...]
    cap: int = DEFAULT_GROUP_CAP
    words: tuple[Word, ...] = field(init=False)
    elements: tuple[Matrix, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "generator_names", tuple(self.generator_names))
        object.__setattr__(self, "generator_matrices", tuple(self.generator_matrices))
        mats = list(self.generator_matrices)
        if not mats:
            mats, names = [Matrix.identity(1)], ["_"]
        else:
            names = list(self.generator_names)
        pairs = _closure_words(mats, names, self.cap)
        object.__setattr__(self, "words", tuple(w for w, _ in pairs))
        object.__setattr__(self, "elements", tuple(m for _, m in pairs))

    @classmethod
    def image_of(cls, rep: MatrixGroupRep, cap: int = DEFAULT_GROUP_CAP) -> "FiniteGroup":
        return cls(rep.generator_names, rep.generator_matrices, cap)

    @classmethod
    def common(cls, reps: Sequence[MatrixGroupRep], cap: int = DEFAULT_GROUP_CAP) -> "FiniteGroup":
        """The image of the direct sum of ``reps``: faithful for every one of them."""
        total = reps[0]
        for r in reps[1:]:
            total = total.direct_sum(r)
        return cls.image_of(total, cap)

    @property
    def order(self) -> int:
        return len(self.words)

    def inverse_index(self) -> list[int]:
        idx = {m: i for i, m in enumerate(self.elements)}
        return [idx[m.inv()] for m in self.elements]

    def conjugacy_classes(self) -> list[list[int]]:
        idx = {m: i for i, m in enumerate(self.elements)}
        seen, classes = set(), []
        for i, g in enumerate(self.elements):
            if i in seen:
                continue
            cls_ = sorted({idx[h.inv() @ g @ h] for h in self.elements})
            seen.update(cls_)
            classes.append(cls_)
        return classes

    def images(self, rep: MatrixGroupRep) -> list[Matrix]:
        if rep.generator_names != self.generator_names and self.generator_names:
            raise RepError("representation and group use different generator names")
        if not self.generator_names:
            return [Matrix.identity(rep.dim)]
        return [rep.evaluate(w) for w in self.words]

    def character(self, rep: MatrixGroupRep) -> tuple:
        return tuple(m.trace() for m in self.images(rep))


# -- hat construction and endomorphisms ------------------------------------------


def hat_rep(rep: MatrixGroupRep, dual: DualityStructure) -> MatrixGroupRep:
    """Representation of G x Z2 on F + F*: rho(g) + rho(g^-1)^T, and [[0, q^-1], [q, 0]]."""
    dual.check_invariant(rep)
    n, q = rep.dim, dual.q
    mats = tuple(block_diag(g, g.inv().T) for g in rep.generator_matrices)
    swap = vstack(hstack(Matrix.zeros(n, n), q.inv()), hstack(q, Matrix.zeros(n, n)))
    name = "hat"
    while name in rep.generator_names:
        name += "_"
    rels = [((name, 1), (name, 1))]
    rels += [((name, 1), (g, 1), (name, -1), (g, -1)) for g in rep.generator_names]
    return MatrixGroupRep(rep.generator_names + (name,), mats + (swap,), tuple(rels), 2 * n)


def commutant(mats: Sequence[Matrix], n: int) -> list[Matrix]:
    """Basis of {X : g X = X g for all g}."""
    if not mats:
        return [_unit_matrix(n, i, j) for j in range(n) for i in range(n)]
    ident = Matrix.identity(n)
    eqs = vstack(*[kron(ident, g) - kron(g.T, ident) for g in mats])
    k = kernel(eqs)
    flat, d = k.basis.entries(), k.dim
    # column-stacked vec(X): entry (i, j) of X sits in row j * n + i
    return [Matrix(flint.fmpq_mat(n, n, [flat[(j * n + i) * d + c] for i in range(n) for j in range(n)]))
            for c in range(d)]


def _unit_matrix(n, i, j):
    m = flint.fmpq_mat(n, n)
    m[i, j] = 1
    return Matrix(m)


def endomorphism_algebra(rep: MatrixGroupRep) -> list[Matrix]:
    basis = commutant(rep.generator_matrices, rep.dim)
    # put the identity first so callers can rely on it
    ident = Matrix.identity(rep.dim)
    if rep.dim and basis:
        vecs = Matrix(flint.fmpq_mat(len(basis) + 1, rep.dim ** 2,
                                     [x for b in (ident, *basis) for x in b.entries()])).T
        _, piv = rref(vecs)
        return [ident] + [basis[p - 1] for p in piv if p > 0]
    return basis


# -- type classification -----------------------------------------------------------

REAL, COMPLEX, QUATERNIONIC, REDUCIBLE, UNDECIDED = (
    "Real", "Complex", "Quaternionic", "Reducible", "Undecided")


@dataclass(frozen=True)
class RepTypeResult:
    kind: str
    end_dim: int
    certified: bool = False
    hat_end_dim: int | None = None
    coefficient: str | None = None   # "Z", "Z2" or "0"
    note: str = ""

    def __post_init__(self):
        expected = {REAL: 1, COMPLEX: 2, QUATERNIONIC: 4}
        if self.kind in expected and (self.end_dim != expected[self.kind] or not self.certified):
            raise RepError(f"kind {self.kind} needs a certified end_dim {expected[self.kind]}")


def _trace_form_signature(basis: Sequence[Matrix]) -> tuple[int, int, int]:
    m = Matrix([[(a @ b).trace() for b in basis] for a in basis])
    return signature(m)


def division_type(end_basis: Sequence[Matrix]) -> str | None:
    """R, C or H when End tensor R is that division algebra (exact test), else None.

    The real algebra is read off from the trace form tr(XY) on End, whose
    signature is (1,0) for R, (1,1) for C and (1,3) for H; every other
    semisimple real algebra of dimension <= 4 is excluded by dimension,
    commutativity or that signature.
    """
    k = len(end_basis)
    if k == 1:
        return REAL
    if k not in (2, 4):
        return None
    commutative = all(a @ b == b @ a for a in end_basis for b in end_basis)
    pos, neg, null = _trace_form_signature(end_basis)
    if null:
        return None
    if k == 2 and commutative and (pos, neg) == (1, 1):
        return COMPLEX
    if k == 4 and not commutative and (pos, neg) == (1, 3):
        return QUATERNIONIC
    return None


def coefficient_group(kind: str, epsilon: int, has_form: bool) -> str:
    """Witt-type coefficient of an irreducible of the given type."""
    if not has_form:
        return "0"
    if kind == QUATERNIONIC and epsilon % 2 == 1:
        return "Z2"
    if kind == REAL and epsilon % 2 == 1:
        return "0"
    return "Z"


def classify_type(rep: MatrixGroupRep, dual: DualityStructure | None = None, *,
                  seed: int = 0, tries: int = DEFAULT_MEATAXE_TRIES,
                  cap: int = DEFAULT_GROUP_CAP) -> RepTypeResult:
    """Type of ``rep`` over R, certified only when End_G(F) tensor R is R, C or H."""
    end = endomorphism_algebra(rep)
    hat_dim = None
    if dual is not None:
        hat_dim = len(endomorphism_algebra(hat_rep(rep, dual)))
    kind = division_type(end)
    if kind is not None:
        eps = dual.epsilon if dual is not None else 0
        if dual is not None:
            has_form = True
        else:
            has_form = average_invariant_form(rep, eps, cap=cap) is not None
        return RepTypeResult(kind, len(end), True, hat_dim, coefficient_group(kind, eps, has_form),
                             "End tensor R is a division algebra (trace-form test)")
    try:
        split = meataxe_split(rep, seed=seed, tries=tries)
    except InfiniteGroupError as exc:
        return RepTypeResult(UNDECIDED, len(end), False, hat_dim, None, str(exc))
    if split.subspace is not None:
        return RepTypeResult(REDUCIBLE, len(end), True, hat_dim, None, "proper invariant subspace found")
    return RepTypeResult(UNDECIDED, len(end), False, hat_dim, None,
                         "no split found and End tensor R is not a division algebra")


# -- meataxe -----------------------------------------------------------------------


@dataclass(frozen=True)
class MeataxeResult:
    subspace: Subspace | None
    certificate: str


def _poly_at(f: flint.fmpq_poly, a: Matrix) -> Matrix:
    coeffs = f.coeffs()
    out = Matrix.zeros(a.rows, a.rows)
    ident = Matrix.identity(a.rows)
    for c in reversed(coeffs):
        out = out @ a + ident * c
    return out


def spin(vectors: Matrix, mats: Sequence[Matrix]) -> Subspace:
    """Smallest subspace containing ``vectors`` and invariant under ``mats``."""
    n = vectors.rows
    cur = Subspace(n, vectors)
    while True:
        grown = Subspace(n, hstack(cur.basis, *[g @ cur.basis for g in mats]))
        if grown.dim == cur.dim:
            return cur
        cur = grown


def _is_proper(s: Subspace) -> bool:
    return 0 < s.dim < s.ambient_dim


def meataxe_split(rep: MatrixGroupRep, *, seed: int = 0,
                  tries: int = DEFAULT_MEATAXE_TRIES) -> MeataxeResult:
    """Look for a proper invariant subspace.

    Each try draws a random commutant element and a random group-algebra element
    with small integer coefficients, factors their characteristic polynomials
    over Q, and spins null vectors of the factors (also for the transposed
    action). Failure is a heuristic certificate only.
    """
    n = rep.dim
    if n <= 1:
        return MeataxeResult(None, "dimension <= 1")
    rng = random.Random(seed)
    gens = list(rep.generator_matrices)
    end = endomorphism_algebra(rep)
    words = [Matrix.identity(n)] + gens
    for g in gens:
        for h in gens:
            words.append(g @ h)
    for _ in range(tries):
        if len(end) > 1:
            x = end[0] * 0
            for b in end:
                x = x + b * rng.randint(-3, 3)
            for f, _m in x.charpoly().factor()[1]:
                k = kernel(_poly_at(f, x))
                if _is_proper(k):
                    return MeataxeResult(k, "kernel of a commutant factor")
        a = Matrix.zeros(n, n)
        for w in words:
            a = a + w * rng.randint(-2, 2)
        for f, _m in a.charpoly().factor()[1]:
            fa = _poly_at(f, a)
            k = kernel(fa)
            if k.dim:
                s = spin(k.basis.col(0), gens)
                if _is_proper(s):
                    return MeataxeResult(s, "spin of a null vector")
            kt = kernel(fa.T)
            if kt.dim:
                s = spin(kt.basis.col(0), [g.T for g in gens])
                if _is_proper(s):
                    return MeataxeResult(kernel(s.basis.T), "annihilator of a transposed spin")
    return MeataxeResult(None, f"heuristic: {tries} random elements found no invariant subspace")


# -- invariant forms ------------------------------------------------------------------


def invariant_inner_product(rep: MatrixGroupRep, cap: int = DEFAULT_GROUP_CAP) -> Matrix:
    """Positive definite G-invariant form sum_g g^T g."""
    els = group_closure(rep.generator_matrices, cap) if rep.generator_matrices else [Matrix.identity(rep.dim)]
    out = Matrix.zeros(rep.dim, rep.dim)
    for g in els:
        out = out + g.T @ g
    return out


def _form_basis(n: int, epsilon: int) -> list[Matrix]:
    out = []
    for i in range(n):
        for j in range(i if epsilon == 0 else i + 1, n):
            m = _unit_matrix(n, i, j)
            if i != j:
                m = m + _unit_matrix(n, j, i) * (-1 if epsilon else 1)
            out.append(m)
    return out


def invariant_forms(rep: MatrixGroupRep, epsilon: int, cap: int = DEFAULT_GROUP_CAP) -> list[Matrix]:
    """Basis of the G-invariant epsilon-symmetric forms, by group averaging."""
    els = group_closure(rep.generator_matrices, cap) if rep.generator_matrices else [Matrix.identity(rep.dim)]
    avgs = []
    for s in _form_basis(rep.dim, epsilon % 2):
        acc = Matrix.zeros(rep.dim, rep.dim)
        for g in els:
            acc = acc + g.T @ s @ g
        avgs.append(acc)
    if not avgs:
        return []
    n = rep.dim
    vecs = hstack(*[Matrix.column(x for row in a.tolist() for x in row) for a in avgs])
    sp = Subspace(n * n, vecs)
    return [Matrix([[sp.basis[i * n + j, c] for j in range(n)] for i in range(n)]) for c in range(sp.dim)]


def average_invariant_form(rep: MatrixGroupRep, epsilon: int, *, seed: int = 0,
                           cap: int = DEFAULT_GROUP_CAP) -> DualityStructure | None:
    """Some invertible invariant epsilon-symmetric form, or None if none exists.

    det(sum t_i S_i) has degree <= n in every t_i, so if it vanishes on the grid
    {0..n}^k it vanishes identically; the grid is searched after cheap probes.
    """
    eps = epsilon % 2
    basis = invariant_forms(rep, eps, cap)
    if not basis:
        return None
    for b in basis:
        if b.is_invertible():
            return DualityStructure(eps, b)
    rng = random.Random(seed)
    for _ in range(64):
        m = Matrix.zeros(rep.dim, rep.dim)
        for b in basis:
            m = m + b * rng.randint(-5, 5)
        if m.is_invertible():
            return DualityStructure(eps, m)
    n, k = rep.dim, len(basis)
    if (n + 1) ** k > 200_000:
        raise RepError(f"invertibility undecided: grid of size {(n + 1) ** k} too large")
    for t in itertools.product(range(n + 1), repeat=k):
        m = Matrix.zeros(n, n)
        for c, b in zip(t, basis):
            if c:
                m = m + b * c
        if m.is_invertible():
            return DualityStructure(eps, m)
    return None


def k0_grading_ranks(dual: DualityStructure) -> tuple[int, int]:
    """Ranks of the +/- eigenbundles of the grading induced by a metric structure."""
    n = dual.dim
    if dual.epsilon == 0:
        pos, neg, _ = signature(dual.q)
        return pos, neg
    if n % 2:
        raise RepError("an invertible antisymmetric form needs even dimension")
    return n // 2, n // 2
