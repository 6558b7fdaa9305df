"""Generators of L_eps(G) / L_eps(X), reductions, products and normal forms.

A generator is an eps-symmetric duality q on a finite-dimensional
representation (or on a local system, read through its holonomy).  The
normal form records, for every isotypic component, the real Witt invariant
of the restricted form:

    Real         eps=0: signature / dim V            (Z)
                 eps=1: nothing, symplectic spaces are hyperbolic
    Complex      eps=0: signature / dim V            (Z)
                 eps=1: signature of q(Jx, y) / dim V  (Z), J a central
                        class-sum element acting as a complex structure
    Quaternionic eps=0: signature / dim V            (Z)
                 eps=1: multiplicity mod 2           (Z2)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .exactla import (
    Matrix, Subspace, hstack, kernel, signature, solve,
)
from .repcat import (
    COMPLEX, DEFAULT_MEATAXE_TRIES, QUATERNIONIC, UNDECIDED, DualityStructure,
    FiniteGroup, MatrixGroupRep, RepTypeResult, coefficient_group,
    division_type, endomorphism_algebra, invariant_inner_product, meataxe_split, spin,
)
from .sheaves import LocalSystem, OrientedComplex, SimplicialComplex, holonomy, tree_transports


class LGroupError(ValueError):
    pass


class NotInvariantError(LGroupError):
    """The subspace is not preserved by the representation."""


class NotIsotropicError(LGroupError):
    pass


@dataclass(frozen=True, eq=False)
class LGenerator:
    """(carrier, q): carrier is a representation or a local system on a complex.

    For a local-system carrier, subspaces (lagrangians, isotropic W) are given
    in the stalk at ``basepoint`` and must be invariant under holonomy.
    """

    dual: DualityStructure
    rep: MatrixGroupRep | None = None
    complex: SimplicialComplex | None = None
    local: LocalSystem | None = None
    basepoint: int = 0
    group: FiniteGroup | None = None

    def __post_init__(self):
        if (self.rep is None) == (self.local is None):
            raise LGroupError("exactly one of rep / local system must be given")
        if self.local is not None:
            if self.complex is None:
                raise LGroupError("a local-system carrier needs its complex")
            if self.local.stalk_dim != self.dual.dim:
                raise LGroupError("stalk and duality dimensions differ")
            self.local.check_duality(self.complex, self.dual)
        else:
            self.dual.check_invariant(self.rep)

    @property
    def epsilon(self) -> int:
        return self.dual.epsilon

    @property
    def dim(self) -> int:
        return self.dual.dim

    @property
    def is_local(self) -> bool:
        return self.local is not None

    def representation(self) -> MatrixGroupRep:
        if self.rep is not None:
            return self.rep
        return holonomy(self.complex, self.local, self.basepoint)

    def with_dual(self, dual: DualityStructure, carrier) -> "LGenerator":
        if self.is_local:
            return LGenerator(dual, complex=self.complex, local=carrier,
                              basepoint=self.basepoint, group=self.group)
        return LGenerator(dual, rep=carrier, group=self.group)

    def negate(self) -> "LGenerator":
        return self.with_dual(self.dual.negate(), self.local if self.is_local else self.rep)

    @classmethod
    def zero_like(cls, gen: "LGenerator") -> "LGenerator":
        z = DualityStructure(gen.epsilon, Matrix.zeros(0, 0))
        if gen.is_local:
            return cls(z, complex=gen.complex, local=LocalSystem.trivial(0),
                       basepoint=gen.basepoint, group=gen.group)
        r = gen.rep
        return cls(z, rep=MatrixGroupRep(r.generator_names,
                                         tuple(Matrix.zeros(0, 0) for _ in r.generator_names),
                                         (), 0), group=gen.group)


@dataclass(frozen=True, eq=False)
class ExtendedLGenerator:
    base: LGenerator
    z: int = 0


# -- sums and products -------------------------------------------------------------


def _same_base(a: LGenerator, b: LGenerator):
    if a.is_local != b.is_local:
        raise LGroupError("cannot combine a representation with a local system")
    if a.is_local:
        if a.complex != b.complex or a.basepoint != b.basepoint:
            raise LGroupError("generators live on different complexes")
    elif a.rep.generator_names != b.rep.generator_names:
        raise LGroupError("generators use different group generators")


def direct_sum(a: LGenerator, b: LGenerator) -> LGenerator:
    if a.epsilon != b.epsilon:
        raise LGroupError(f"epsilon mismatch: {a.epsilon} vs {b.epsilon}")
    _same_base(a, b)
    from .exactla import block_diag
    dual = DualityStructure(a.epsilon, block_diag(a.dual.q, b.dual.q))
    if a.is_local:
        return a.with_dual(dual, a.local.direct_sum(b.local))
    return a.with_dual(dual, a.rep.direct_sum(b.rep))


def product_sign(eps_a: int, eps_b: int) -> int:
    """Real value of sqrt((-1)^a) sqrt((-1)^b) / sqrt((-1)^(a+b))."""
    return -1 if (eps_a % 2 and eps_b % 2) else 1


def tensor_product(a: LGenerator, b: LGenerator) -> LGenerator:
    _same_base(a, b)
    from .exactla import kron
    eps = (a.epsilon + b.epsilon) % 2
    q = kron(a.dual.q, b.dual.q) * product_sign(a.epsilon, b.epsilon)
    dual = DualityStructure(eps, q)
    if a.is_local:
        return LGenerator(dual, complex=a.complex, local=a.local.tensor(b.local),
                          basepoint=a.basepoint, group=a.group)
    rep = MatrixGroupRep(a.rep.generator_names,
                         tuple(kron(x, y) for x, y in
                               zip(a.rep.generator_matrices, b.rep.generator_matrices)),
                         a.rep.relations, a.dim * b.dim)
    return LGenerator(dual, rep=rep, group=a.group)


def ex_direct_sum(a: ExtendedLGenerator, b: ExtendedLGenerator) -> ExtendedLGenerator:
    return ExtendedLGenerator(direct_sum(a.base, b.base), a.z + b.z)


# -- lagrangians and reduction -------------------------------------------------------


def _check_invariant(gen: LGenerator, W: Subspace):
    if W.ambient_dim != gen.dim:
        raise LGroupError("subspace lives in the wrong ambient dimension")
    rep = gen.representation()
    for name, g in zip(rep.generator_names, rep.generator_matrices):
        if not W.contains(g @ W.basis):
            raise NotInvariantError(f"subspace is not invariant under {name!r}")


def orthogonal(q: Matrix, W: Subspace) -> Subspace:
    """W^perp = ker(i^T q)."""
    return kernel(W.basis.T @ q)


def is_isotropic(q: Matrix, W: Subspace) -> bool:
    return (W.basis.T @ q @ W.basis).is_zero()


def lagrangian_verify(gen: LGenerator, L: Subspace) -> bool:
    """True iff L is isotropic and L = ker(i^T q); raises NotInvariantError if L is not invariant."""
    _check_invariant(gen, L)
    if not is_isotropic(gen.dual.q, L):
        return False
    return orthogonal(gen.dual.q, L) == L


def _induced(C: Matrix, W: Subspace, g: Matrix) -> Matrix:
    """Matrix a with g C = C a mod W, for g preserving span(C) + W."""
    full = hstack(C, W.basis) if W.dim else C
    x = solve(full, g @ C)
    return x.submatrix(range(C.cols), range(C.cols))


def sublagrangian_reduce(gen: LGenerator, W: Subspace) -> LGenerator:
    """The generator W^perp / W with induced form and action; same class in L."""
    _check_invariant(gen, W)
    q = gen.dual.q
    if not is_isotropic(q, W):
        raise NotIsotropicError("W is not isotropic for q")
    perp = orthogonal(q, W)
    # complement of W inside W^perp
    coords = Subspace(perp.dim, solve(perp.basis, W.basis)) if W.dim else Subspace.zero(perp.dim)
    C = perp.basis @ coords.complement() if perp.dim else perp.basis
    qbar = C.T @ q @ C
    dual = DualityStructure(gen.epsilon, qbar)
    if gen.is_local:
        paths, _ = tree_transports(gen.complex, gen.local, gen.basepoint)
        tr = {}
        for (u, v) in gen.complex.edges:
            h = paths[v].inv() @ gen.local.t(u, v) @ paths[u]
            a = _induced(C, W, h)
            if a != Matrix.identity(C.cols):
                tr[(u, v)] = a
        return gen.with_dual(dual, LocalSystem(C.cols, tr))
    rep = gen.rep
    mats = tuple(_induced(C, W, g) for g in rep.generator_matrices)
    return gen.with_dual(dual, MatrixGroupRep(rep.generator_names, mats, rep.relations, C.cols))


def ex_lagrangian_reduce(gen: ExtendedLGenerator, L: Subspace,
                         manifold: OrientedComplex) -> ExtendedLGenerator:
    """(F, q, z) ~ (0, 0, z + tau(F, q, L))."""
    from .specseq import tau_lagrangian
    base = gen.base
    if not base.is_local or base.complex != manifold.base:
        raise LGroupError("extended reduction needs a local system on the given manifold")
    if not lagrangian_verify(base, L):
        raise NotIsotropicError("L is not lagrangian")
    tau = tau_lagrangian(manifold, base.local, base.dual, L, basepoint=base.basepoint).tau
    return ExtendedLGenerator(LGenerator.zero_like(base), gen.z + tau)


# -- isotypic decomposition ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class IrreduciblePiece:
    basis: Matrix           # columns span an irreducible invariant subspace
    type: RepTypeResult


def decompose(rep: MatrixGroupRep, *, seed: int = 0,
              tries: int = DEFAULT_MEATAXE_TRIES) -> list[IrreduciblePiece]:
    """Split into irreducible summands, orthogonal for the averaged inner product.

    A piece is certified irreducible when End tensor R is a division algebra;
    pieces the meataxe cannot split otherwise come back as Undecided.
    """
    P = invariant_inner_product(rep) if rep.generator_matrices else Matrix.identity(rep.dim)
    out: list[IrreduciblePiece] = []
    todo = [Matrix.identity(rep.dim)] if rep.dim else []
    while todo:
        U = todo.pop()
        sub = rep.restrict(U)
        end = endomorphism_algebra(sub)
        kind = division_type(end)
        if kind is not None:
            out.append(IrreduciblePiece(U, RepTypeResult(kind, len(end), True, note="trace-form test")))
            continue
        split = meataxe_split(sub, seed=seed, tries=tries)
        if split.subspace is None:
            out.append(IrreduciblePiece(U, RepTypeResult(UNDECIDED, len(end), False,
                                                         note=split.certificate)))
            continue
        W = U @ split.subspace.basis
        comp = kernel(W.T @ P @ U)
        todo.append(U @ comp.basis)
        todo.append(W)
    out.sort(key=lambda p: p.basis.tolist())
    return out


def character_identifier(dim: int, character: Sequence) -> str:
    return f"d{dim}[" + ",".join(str(c) for c in character) + "]"


# -- normal forms ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Summand:
    identifier: str
    kind: str
    coefficient: str          # "Z" or "Z2"
    invariant: int
    dim: int = field(default=0, compare=False)
    reference: str = field(default="", compare=False)


@dataclass(frozen=True)
class LNormalForm:
    epsilon: int
    summands: tuple[Summand, ...] = ()
    certified: bool = True
    undecided_dims: tuple[int, ...] = field(default=(), compare=False)
    group_order: int = field(default=1, compare=False)

    def __post_init__(self):
        kept = sorted(s for s in self.summands if s.invariant != 0)
        object.__setattr__(self, "summands", tuple(kept))

    @property
    def is_zero(self) -> bool:
        return not self.summands

    def invariants(self) -> dict[str, int]:
        return {s.identifier: s.invariant for s in self.summands}

    def __add__(self, other: "LNormalForm") -> "LNormalForm":
        if self.epsilon != other.epsilon:
            raise LGroupError("epsilon mismatch")
        acc = {s.identifier: s for s in self.summands}
        for s in other.summands:
            if s.identifier in acc:
                a = acc[s.identifier]
                if (a.kind, a.coefficient) != (s.kind, s.coefficient):
                    raise LGroupError(f"irreducible {s.identifier} typed inconsistently")
                v = a.invariant + s.invariant
                if s.coefficient == "Z2":
                    v %= 2
                acc[s.identifier] = Summand(a.identifier, a.kind, a.coefficient, v, a.dim, a.reference)
            else:
                acc[s.identifier] = s
        return LNormalForm(self.epsilon, tuple(acc.values()), self.certified and other.certified,
                           self.undecided_dims + other.undecided_dims, self.group_order)

    def to_json(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "certified": self.certified,
            "group_order": self.group_order,
            "summands": [
                {"irrep": s.identifier, "dim": s.dim, "type": s.kind,
                 "coefficient_group": s.coefficient, "invariant": s.invariant,
                 "reference_form": s.reference}
                for s in self.summands
            ],
            "undecided_dims": list(self.undecided_dims),
        }


def _complex_structure(group: FiniteGroup, rep_I: MatrixGroupRep) -> tuple[Matrix, int]:
    """First class-sum difference sum_C g - sum_{C^-1} g acting nontrivially; returns (J, class index)."""
    imgs = group.images(rep_I)
    inv = group.inverse_index()
    for k, cls in enumerate(group.conjugacy_classes()):
        J = Matrix.zeros(rep_I.dim, rep_I.dim)
        for i in cls:
            J = J + imgs[i] - imgs[inv[i]]
        if not J.is_zero():
            return J, k
    raise LGroupError("no central element acts as a complex structure")


def _invariant_for(kind: str, eps: int, group: FiniteGroup, rep_I: MatrixGroupRep,
                   q_I: Matrix, dim_v: int) -> tuple[int, str]:
    if eps == 1 and kind == QUATERNIONIC:
        return (rep_I.dim // dim_v) % 2, "multiplicity mod 2"
    if eps == 1 and kind == COMPLEX:
        J, k = _complex_structure(group, rep_I)
        form = J.T @ q_I
        if form.T != form:
            raise LGroupError("q(Jx, y) is not symmetric")
        pos, neg, null = signature(form)
        ref = f"signature of q(Jx,y), J = class sum of conjugacy class {k} minus its inverse class"
    else:
        pos, neg, null = signature(q_I)
        ref = "signature of q on the isotypic component"
    if null:
        raise LGroupError("restricted form is degenerate on an isotypic component")
    if (pos - neg) % dim_v:
        raise LGroupError("signature is not divisible by the irreducible dimension")
    return (pos - neg) // dim_v, ref


def classify(gen: LGenerator, *, group: FiniteGroup | None = None, seed: int = 0,
             tries: int = DEFAULT_MEATAXE_TRIES) -> LNormalForm:
    """Normal form of the class of ``gen`` in L_eps(G) tensor R.

    Irreducible identifiers are characters over ``group`` (by default the image
    of the representation), so normal forms are comparable only over a common group.
    """
    rep = gen.representation()
    if group is None:
        group = gen.group or FiniteGroup.image_of(rep)
    eps = gen.epsilon
    pieces = decompose(rep, seed=seed, tries=tries)
    classes: dict[str, list[IrreduciblePiece]] = {}
    undecided = []
    for p in pieces:
        if p.type.kind == UNDECIDED:
            undecided.append(p.basis.cols)
            continue
        ident = character_identifier(p.basis.cols, group.character(rep.restrict(p.basis)))
        classes.setdefault(ident, []).append(p)
    summands = []
    for ident, ps in sorted(classes.items()):
        kind = ps[0].type.kind
        dim_v = ps[0].basis.cols
        coeff = coefficient_group(kind, eps, True)
        if coeff == "0":
            continue
        I = hstack(*[p.basis for p in ps])
        rep_I = rep.restrict(I)
        q_I = I.T @ gen.dual.q @ I
        value, ref = _invariant_for(kind, eps, group, rep_I, q_I, dim_v)
        summands.append(Summand(ident, kind, coeff, value, dim_v, ref))
    return LNormalForm(eps, tuple(summands), not undecided, tuple(undecided), group.order)


def classify_many(gens: Sequence[LGenerator], **kw) -> list[LNormalForm]:
    """Classify over the common image group so the normal forms can be compared."""
    group = FiniteGroup.common([g.representation() for g in gens])
    return [classify(g, group=group, **kw) for g in gens]


def find_invariant_isotropic(gen: LGenerator, *, seed: int = 0,
                             tries: int = DEFAULT_MEATAXE_TRIES,
                             search_dim: int = 8) -> Subspace | None:
    """A nonzero invariant isotropic subspace, if one is found.

    Tries single irreducible pieces, then graphs {x + f(x)} of isomorphisms
    between two pieces of one isotypic component for small integer combinations
    f of intertwiners.  In dimension at most ``search_dim`` it finally spins up
    vectors with entries in {-1, 0, 1}, in the standard basis and in the basis
    of pieces, and keeps the first orbit span that is isotropic.
    """
    rep = gen.representation()
    q = gen.dual.q
    pieces = [p for p in decompose(rep, seed=seed, tries=tries) if p.type.kind != UNDECIDED]
    for p in pieces:
        W = Subspace(rep.dim, p.basis)
        if is_isotropic(q, W):
            return W
    import itertools
    for a, b in itertools.combinations(pieces, 2):
        if a.basis.cols != b.basis.cols:
            continue
        homs = _intertwiners(rep, a.basis, b.basis)
        if not homs:
            continue
        for coeffs in itertools.product(range(-2, 3), repeat=len(homs)):
            if not any(coeffs):
                continue
            f = Matrix.zeros(b.basis.cols, a.basis.cols)
            for c, h in zip(coeffs, homs):
                f = f + h * c
            W = Subspace(rep.dim, a.basis + b.basis @ f)
            if W.dim == a.basis.cols and is_isotropic(q, W):
                return W
    if rep.dim > search_dim:
        return None
    bases = [Matrix.identity(rep.dim)]
    if pieces and sum(p.basis.cols for p in pieces) == rep.dim:
        bases.append(hstack(*[p.basis for p in pieces]))
    for B in bases:
        W = _small_vector_search(rep, q, B)
        if W is not None:
            return W
    return None


def _small_vector_search(rep: MatrixGroupRep, q: Matrix, B: Matrix) -> Subspace | None:
    import itertools
    mats = rep.generator_matrices
    for c in itertools.product((0, 1, -1), repeat=B.cols):
        # first nonzero coordinate positive: v and -v span the same orbit
        if next((x for x in c if x), -1) != 1:
            continue
        v = B @ Matrix.column(c)
        if not (v.T @ q @ v).is_zero() or any(not (v.T @ q @ g @ v).is_zero() for g in mats):
            continue
        W = spin(v, mats)
        if is_isotropic(q, W):
            return W
    return None


def _intertwiners(rep: MatrixGroupRep, A: Matrix, B: Matrix) -> list[Matrix]:
    """Basis of G-maps from span(A) to span(B) in piece coordinates."""
    ra, rb = rep.restrict(A), rep.restrict(B)
    from .exactla import kron, vstack
    n, m = A.cols, B.cols
    if not ra.generator_matrices:
        eqs = Matrix.zeros(0, n * m)
    else:
        eqs = vstack(*[kron(Matrix.identity(n), gb) - kron(ga.T, Matrix.identity(m))
                       for ga, gb in zip(ra.generator_matrices, rb.generator_matrices)])
    k = kernel(eqs) if eqs.rows else Subspace.full(n * m)
    out = []
    for c in range(k.dim):
        col = k.basis.col(c)
        out.append(Matrix([[col[j * m + i, 0] for j in range(n)] for i in range(m)]))
    return out


def reduce_fully(gen: LGenerator, *, seed: int = 0, max_steps: int = 64) -> tuple[LGenerator, list[int]]:
    """Repeatedly peel invariant isotropic subspaces; returns the residue and the peeled dims."""
    steps = []
    cur = gen
    for _ in range(max_steps):
        if cur.dim == 0:
            break
        W = find_invariant_isotropic(cur, seed=seed)
        if W is None:
            break
        steps.append(W.dim)
        cur = sublagrangian_reduce(cur, W)
    return cur, steps
