"""Flat fibre bundles, derived pushforward and the index maps pi_*^L, pi_*^{L^ex}.

A bundle is flat: over every base edge (u, v) a simplicial automorphism of
the fibre carries the fibre over u to the fibre over v, together with
coefficient transports T(x): stalk at x -> stalk at phi(x).  The Leray-Serre
spectral sequence is the spectral sequence of the double complex
C^p(B, C^q(fibre)) filtered by p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import flint

from .exactla import Matrix, Subspace, block_diag, kernel
from .lgroups import (
    ExtendedLGenerator, LGenerator, classify_many, find_invariant_isotropic, is_isotropic,
    sublagrangian_reduce,
)
from .repcat import DualityStructure
from .sheaves import (
    CochainComplex, LocalSystem, OrientedComplex, SimplicialComplex, cross_cup_matrix, edge_name,
    epsilon_n, poincare_pairing, spanning_tree, twisted_complex,
)
from .specseq import (
    Bicomplex, PageDuality, SpectralError, TauResult, compute_pages, descend_pairing, q_form,
)


class BundleError(ValueError):
    pass


def _perm_sign(seq: Sequence[int]) -> int:
    s = 1
    seq = list(seq)
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                s = -s
    return s


@dataclass(frozen=True, eq=False)
class Transition:
    """Fibre over u -> fibre over v: x -> vertex_map[x], coefficients by transports[x]."""

    vertex_map: tuple[int, ...]
    transports: tuple[Matrix, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertex_map", tuple(self.vertex_map))
        object.__setattr__(self, "transports", tuple(self.transports))
        if sorted(self.vertex_map) != list(range(len(self.vertex_map))):
            raise BundleError("vertex map is not a permutation")
        if len(self.transports) != len(self.vertex_map):
            raise BundleError("one coefficient transport per fibre vertex required")

    @classmethod
    def identity(cls, nverts: int, k: int) -> "Transition":
        return cls(tuple(range(nverts)), tuple(Matrix.identity(k) for _ in range(nverts)))

    def inverse(self) -> "Transition":
        n = len(self.vertex_map)
        inv = [0] * n
        tr = [None] * n
        for x, y in enumerate(self.vertex_map):
            inv[y] = x
            tr[y] = self.transports[x].inv()
        return Transition(tuple(inv), tuple(tr))

    def then(self, other: "Transition") -> "Transition":
        """Apply self, then other."""
        return Transition(tuple(other.vertex_map[y] for y in self.vertex_map),
                          tuple(other.transports[y] @ self.transports[x]
                                for x, y in enumerate(self.vertex_map)))

    def __eq__(self, other) -> bool:
        return (isinstance(other, Transition) and self.vertex_map == other.vertex_map
                and self.transports == other.transports)

    __hash__ = None

    def to_json(self) -> dict:
        return {"vertex_map": list(self.vertex_map),
                "coefficient_transport": [t.to_json() for t in self.transports]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Transition":
        return cls(tuple(data["vertex_map"]),
                   tuple(Matrix.from_json(t) for t in data["coefficient_transport"]))


def cochain_pushforward(fiber: SimplicialComplex, system: LocalSystem, tr: Transition, q: int) -> Matrix:
    """Matrix of (Phi c)(tau) = sign(pi) t(phi(s0), tau0) T(s0) c(s), tau = sorted phi(s)."""
    k = system.stalk_dim
    n = fiber.count(q) * k
    out = flint.fmpq_mat(n, n)
    for i, s in enumerate(fiber.simplices[q]):
        img = [tr.vertex_map[x] for x in s]
        tau = tuple(sorted(img))
        j = fiber.index[q].get(tau)
        if j is None:
            raise BundleError(f"vertex map does not send simplex {s} to a simplex")
        blk = (system.t(img[0], tau[0]) @ tr.transports[s[0]]
               if img[0] != tau[0] else tr.transports[s[0]]) * _perm_sign(img)
        b = blk.flint
        for a in range(k):
            for c in range(k):
                out[j * k + a, i * k + c] = b[a, c]
    return Matrix(out)


@dataclass(frozen=True, eq=False)
class FlatFiberBundle:
    base: SimplicialComplex
    fiber: OrientedComplex
    system: LocalSystem                      # coefficients on the fibre
    transitions: Mapping[tuple[int, int], Transition] = field(default_factory=dict)
    basepoint: int = 0

    def __post_init__(self):
        tr = {}
        for (u, v), t in dict(self.transitions).items():
            if u > v:
                u, v, t = v, u, t.inverse()
            tr[(u, v)] = t
        object.__setattr__(self, "transitions", tr)
        if not self.base.is_connected():
            raise BundleError("base must be connected")
        X, F = self.fiber.base, self.system
        F.check_flat(X)
        for e in tr:
            if e not in self.base.index[1]:
                raise BundleError(f"transition on {e}, which is not a base edge")
        for e, t in tr.items():
            if len(t.vertex_map) != X.vertices:
                raise BundleError(f"transition on {e} has the wrong number of fibre vertices")
            self._check_automorphism(e, t)
        for (a, b, c) in (self.base.simplices[2] if self.base.dim >= 2 else []):
            if self.transition(a, b).then(self.transition(b, c)) != self.transition(a, c):
                raise BundleError(f"bundle is not flat on base triangle {(a, b, c)}")

    def _check_automorphism(self, e, t: Transition):
        X, F = self.fiber.base, self.system
        for p in range(1, X.dim + 1):
            for s in X.simplices[p]:
                if tuple(sorted(t.vertex_map[x] for x in s)) not in X.index[p]:
                    raise BundleError(f"transition on {e} is not simplicial: {s} has no image")
        n = self.fiber.dim
        for c, s in zip(self.fiber.cycle, X.simplices[n]):
            img = [t.vertex_map[x] for x in s]
            j = X.index[n][tuple(sorted(img))]
            if self.fiber.cycle[j] != c * _perm_sign(img):
                raise BundleError(f"transition on {e} does not preserve the fibre orientation")
        for (x, y) in X.edges:
            lhs = t.transports[y] @ F.t(x, y)
            rhs = F.t(t.vertex_map[x], t.vertex_map[y]) @ t.transports[x]
            if lhs != rhs:
                raise BundleError(f"coefficient transport on {e} is not equivariant along fibre edge {(x, y)}")

    # -- constructors ------------------------------------------------------------------

    @classmethod
    def product(cls, base: SimplicialComplex, fiber: OrientedComplex,
                system: LocalSystem) -> "FlatFiberBundle":
        return cls(base, fiber, system, {})

    @classmethod
    def from_monodromy(cls, base: SimplicialComplex, fiber: OrientedComplex, system: LocalSystem,
                       monodromy: Mapping[str, Transition], basepoint: int = 0) -> "FlatFiberBundle":
        """Identity over a spanning tree; the named non-tree edge 'e{u}-{v}' carries its transition."""
        _, tree = spanning_tree(base, basepoint)
        tree = {tuple(sorted(e)) for e in tree}
        names = {edge_name(e): e for e in base.edges if e not in tree}
        unknown = set(monodromy) - set(names)
        if unknown:
            raise BundleError(f"monodromy given for unknown generators {sorted(unknown)}")
        tr = {names[n]: t for n, t in monodromy.items()}
        return cls(base, fiber, system, tr, basepoint)

    @property
    def fiber_dim(self) -> int:
        return self.fiber.dim

    @property
    def stalk_dim(self) -> int:
        return self.system.stalk_dim

    def transition(self, u: int, v: int) -> Transition:
        if u <= v:
            t = self.transitions.get((u, v))
            return t if t is not None else Transition.identity(self.fiber.base.vertices, self.stalk_dim)
        return self.transition(v, u).inverse()

    def direct_sum(self, other: "FlatFiberBundle") -> "FlatFiberBundle":
        if self.base != other.base or self.fiber.base != other.fiber.base:
            raise BundleError("direct sum needs the same base and fibre")
        tr = {}
        for e in set(self.transitions) | set(other.transitions):
            a, b = self.transition(*e), other.transition(*e)
            if a.vertex_map != b.vertex_map:
                raise BundleError("direct sum needs the same fibre vertex maps")
            tr[e] = Transition(a.vertex_map, tuple(block_diag(x, y) for x, y in
                                                    zip(a.transports, b.transports)))
        return FlatFiberBundle(self.base, self.fiber, self.system.direct_sum(other.system),
                               tr, self.basepoint)

    def to_json(self) -> dict:
        return {"base": self.base.to_json(), "fiber": self.fiber.to_json(),
                "system": self.system.to_json(), "basepoint": self.basepoint,
                "transitions": {f"{u}-{v}": t.to_json() for (u, v), t in sorted(self.transitions.items())}}

    @classmethod
    def from_json(cls, data: Mapping) -> "FlatFiberBundle":
        base = SimplicialComplex.from_json(data["base"])
        fiber = OrientedComplex.from_json(data["fiber"])
        system = LocalSystem.from_json(data["system"])
        bp = int(data.get("basepoint", 0))
        if "monodromy" in data:
            mono = {n: Transition.from_json(t) for n, t in data["monodromy"].items()}
            return cls.from_monodromy(base, fiber, system, mono, bp)
        tr = {}
        for key, t in data.get("transitions", {}).items():
            u, v = (int(x) for x in key.split("-"))
            tr[(u, v)] = Transition.from_json(t)
        return cls(base, fiber, system, tr, bp)

    # -- cochain level --------------------------------------------------------------------

    @cached_property
    def fiber_complex(self) -> CochainComplex:
        return twisted_complex(self.fiber.base, self.system)

    def cochain_map(self, u: int, v: int, q: int) -> Matrix:
        cache = self.__dict__.setdefault("_phi", {})
        key = (u, v, q)
        if key not in cache:
            cache[key] = cochain_pushforward(self.fiber.base, self.system, self.transition(u, v), q)
            C = self.fiber_complex
            if q < C.top and q + 1 >= 0:
                nxt = self.cochain_map(u, v, q + 1)
                if C.d[q].rows and nxt @ C.d[q] != C.d[q] @ cache[key]:
                    raise BundleError(f"transition on {(u, v)} does not give a chain map in degree {q}")
        return cache[key]

    def leray_serre(self) -> Bicomplex:
        """A^{p,q} = (+)_{sigma in B_p} C^q(fibre) sited over the minimal vertex of sigma."""
        B, C = self.base, self.fiber_complex
        dims, h, v = {}, {}, {}
        for p in range(B.dim + 1):
            for q in range(C.top + 1):
                dims[(p, q)] = B.count(p) * C.dims[q]
        for p in range(B.dim + 1):
            for q in range(C.top + 1):
                c = C.dims[q]
                v[(p, q)] = block_diag(*[C.d[q]] * B.count(p)) if B.count(p) else Matrix.zeros(0, 0)
                if p < B.dim:
                    h[(p, q)] = self._base_coboundary(p, q, c)
        return Bicomplex(dims, h, v)

    def _base_coboundary(self, p: int, q: int, c: int) -> Matrix:
        B = self.base
        out = flint.fmpq_mat(B.count(p + 1) * c, B.count(p) * c)
        for r, s in enumerate(B.simplices[p + 1]):
            for i in range(len(s)):
                col = B.index[p][s[:i] + s[i + 1:]]
                if i == 0:
                    blk = self.cochain_map(s[1], s[0], q).flint
                    for a in range(c):
                        for b in range(c):
                            if blk[a, b] != 0:
                                out[r * c + a, col * c + b] += blk[a, b]
                else:
                    sgn = -1 if i % 2 else 1
                    for a in range(c):
                        out[r * c + a, col * c + a] += sgn
        return Matrix(out)


# -- derived pushforward ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PushforwardResult:
    systems: tuple[LocalSystem, ...]        # R^i on the base
    representatives: tuple[Matrix, ...]     # fibre cohomology lifts, the stalk bases
    total: LocalSystem                      # (+)_i R^i
    dual: DualityStructure | None = None    # pi_*(q) on the total
    epsilon: int | None = None

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.stalk_dim for s in self.systems)


def derived_pushforward(bundle: FlatFiberBundle) -> PushforwardResult:
    """R^i with stalk H^i(fibre) and transports induced by the transitions."""
    C = bundle.fiber_complex
    H = C.cohomology
    systems = []
    for i, h in enumerate(H):
        tr = {}
        for e in bundle.base.edges:
            if e not in bundle.transitions:
                continue
            m = h.coords(bundle.cochain_map(e[0], e[1], i) @ h.lifts)
            if m != Matrix.identity(h.dim):
                tr[e] = m
        R = LocalSystem(h.dim, tr)
        R.check_flat(bundle.base)
        systems.append(R)
    total = systems[0]
    for s in systems[1:]:
        total = total.direct_sum(s)
    return PushforwardResult(tuple(systems), tuple(h.lifts for h in H), total)


def pushforward_duality(bundle: FlatFiberBundle, dual: DualityStructure) -> PushforwardResult:
    """pi_*(q): fibre Poincare duality with coefficients paired by q; (eps + eps_n)-symmetric."""
    res = derived_pushforward(bundle)
    pr = poincare_pairing(bundle.fiber, bundle.system, dual)
    for a, b in zip(pr.representatives, res.representatives):
        if a != b:
            raise BundleError("fibre cohomology bases disagree")
    eps = (dual.epsilon + epsilon_n(bundle.fiber_dim)) % 2
    pq = DualityStructure(eps, pr.form)
    res.total.check_duality(bundle.base, pq)
    return PushforwardResult(res.systems, res.representatives, res.total, pq, eps)


def pi_L(bundle: FlatFiberBundle, dual: DualityStructure) -> LGenerator:
    res = pushforward_duality(bundle, dual)
    return LGenerator(res.dual, complex=bundle.base, local=res.total, basepoint=bundle.basepoint)


# -- tau of a fibration --------------------------------------------------------------------------

TAU_FIBRATION_FORMULA = "tau = 2 sum_{r>=2} sign Q_r on the Leray-Serre spectral sequence"
PI_LEX_FORMULA = "pi_*^{L^ex}(F, q, z) = (pi_*^L(F, q), z - tau)"


def fibration_pairing(bundle: FlatFiberBundle, base: OrientedComplex, dual: DualityStructure,
                      bic: Bicomplex) -> PageDuality:
    """E_2 pairing: base cup product with coefficients paired by fibre Poincare duality.

    Representatives are read through their leading (lowest filtration) component,
    which is a base cochain with values in fibre cocycles.
    """
    m, n = base.dim, bundle.fiber_dim
    res = derived_pushforward(bundle)
    pr = poincare_pairing(bundle.fiber, bundle.system, dual)
    H = bundle.fiber_complex.cohomology
    B = bundle.base
    keys = bic.keys_by_degree
    lead, cup = {}, {}
    for p in range(m + 1):
        for q in range(n + 1):
            proj = H[q]._proj
            lead[(p, q)] = block_diag(*[proj] * B.count(p)) if B.count(p) else Matrix.zeros(0, 0)
            sgn = -1 if (q * (m - p)) % 2 else 1
            cup[(p, q)] = cross_cup_matrix(base, res.systems[q], res.systems[n - q],
                                           pr.pairings[q], p) * sgn

    def block(N, p, X):
        off = 0
        for (pp, qq) in keys[N]:
            if pp == p:
                return X.submatrix(range(off, off + bic.dims[(pp, qq)]), range(X.cols))
            off += bic.dims[(pp, qq)]
        raise SpectralError(f"no bidegree with p={p} in total degree {N}")

    def pair(p, N, X, pp, NN, Y):
        q, qq = N - p, NN - pp
        if not (0 <= q <= n and 0 <= qq <= n and p + pp == m and q + qq == n):
            return Matrix.zeros(X.cols, Y.cols)
        x = lead[(p, q)] @ block(N, p, X)
        y = lead[(pp, qq)] @ block(NN, pp, Y)
        return x.T @ cup[(p, q)] @ y

    return PageDuality((m, m + n), pair, r0=2)


def tau_fibration(bundle: FlatFiberBundle, base: OrientedComplex, dual: DualityStructure,
                  *, check_parity: bool = True) -> TauResult:
    m, n = base.dim, bundle.fiber_dim
    if base.base != bundle.base:
        raise BundleError("orientation is for a different base complex")
    if check_parity and dual.epsilon != (1 - epsilon_n(n) - epsilon_n(m)) % 2:
        raise BundleError(f"epsilon must be 1 - eps_n - eps_m = {(1 - epsilon_n(n) - epsilon_n(m)) % 2}")
    bic = bundle.leray_serre()
    fc = bic.total()
    ss = compute_pages(fc)
    duality = fibration_pairing(bundle, base, dual, bic)
    desc = descend_pairing(ss, duality)
    forms = tuple(q_form(ss.page(d.r), d, duality.shift) for d in desc if d.r >= 2)
    tau = 2 * sum(f.sign for f in forms)
    checks = dict(ss.checks)
    checks.update({"pairing_descends": True, "q_forms_symmetric": True,
                   "e2_pairing_perfect": desc[0].perfect if desc else True})
    return TauResult(tau, forms, ss, TAU_FIBRATION_FORMULA, checks)


def pi_Lex(bundle: FlatFiberBundle, base: OrientedComplex, dual: DualityStructure,
           z: int = 0) -> tuple[ExtendedLGenerator, TauResult]:
    t = tau_fibration(bundle, base, dual)
    return ExtendedLGenerator(pi_L(bundle, dual), z - t.tau), t


# -- total spaces and composition ------------------------------------------------------------------


def covering_total_space(bundle: FlatFiberBundle) -> tuple[OrientedComplex | SimplicialComplex, LocalSystem]:
    """Total space of a bundle with 0-dimensional fibre, with its local system.

    Vertex (b, x) has index b * |fibre| + x; a base simplex (b0..bk) lifts through
    x over b0 to the vertices (b_i, g_{b0 b_i}(x)).  Returns an OrientedComplex
    when the base is given one.
    """
    if bundle.fiber_dim != 0:
        raise BundleError("covering_total_space needs a 0-dimensional fibre")
    nf = bundle.fiber.base.vertices
    B = bundle.base
    tops, tr = [], {}
    for s in B.maximal_simplices():
        for x in range(nf):
            tops.append(tuple(b * nf + bundle.transition(s[0], b).vertex_map[x] for b in s))
    for (u, v) in B.edges:
        t = bundle.transition(u, v)
        for x in range(nf):
            a, b = u * nf + x, v * nf + t.vertex_map[x]
            if t.transports[x] != Matrix.identity(bundle.stalk_dim):
                tr[(a, b)] = t.transports[x]
    Y = SimplicialComplex(B.vertices * nf, tops)
    return Y, LocalSystem(bundle.stalk_dim, tr)


def oriented_covering(bundle: FlatFiberBundle, base: OrientedComplex) -> tuple[OrientedComplex, LocalSystem]:
    Y, F = covering_total_space(bundle)
    nf = bundle.fiber.base.vertices
    m = base.dim
    cyc = [0] * Y.count(m)
    for c, s in zip(base.cycle, base.base.simplices[m]):
        for x in range(nf):
            lift = tuple(b * nf + bundle.transition(s[0], b).vertex_map[x] for b in s)
            cyc[Y.index[m][lift]] = c * bundle.fiber.cycle[x]
    return OrientedComplex(Y, tuple(cyc)), F


@dataclass(frozen=True, eq=False)
class BundleMap:
    """Lift of a mid-level vertex map: mid vertex m -> mid_map[m], fibre over m by lifts[m]."""

    mid_map: tuple[int, ...]
    lifts: tuple[Transition, ...]

    def to_json(self) -> dict:
        return {"vertex_map": list(self.mid_map), "lifts": [t.to_json() for t in self.lifts]}

    @classmethod
    def from_json(cls, data: Mapping) -> "BundleMap":
        return cls(tuple(data["vertex_map"]), tuple(Transition.from_json(t) for t in data["lifts"]))


@dataclass(frozen=True, eq=False)
class ComposedBundles:
    composite: FlatFiberBundle     # fibre = total space of inner
    outer: FlatFiberBundle         # fibre = mid, coefficients = pushforward of inner
    inner: FlatFiberBundle


def compose_bundles(inner: FlatFiberBundle, mid: OrientedComplex, base: SimplicialComplex,
                    maps: Mapping[tuple[int, int], BundleMap], basepoint: int = 0) -> ComposedBundles:
    """Iterated bundle base <- mid <- fibre as one bundle base <- total(inner)."""
    if inner.base != mid.base:
        raise BundleError("inner bundle's base is not the outer fibre")
    total, tsys = oriented_covering(inner, mid)
    nf = inner.fiber.base.vertices
    comp_tr, outer_tr = {}, {}
    push = derived_pushforward(inner)
    H = inner.fiber_complex.cohomology
    for e, bm in maps.items():
        if len(bm.mid_map) != mid.base.vertices or len(bm.lifts) != mid.base.vertices:
            raise BundleError(f"map on {e} has the wrong size")
        vm, trs = [0] * total.base.vertices, [None] * total.base.vertices
        for b in range(mid.base.vertices):
            for x in range(nf):
                vm[b * nf + x] = bm.mid_map[b] * nf + bm.lifts[b].vertex_map[x]
                trs[b * nf + x] = bm.lifts[b].transports[x]
        comp_tr[e] = Transition(tuple(vm), tuple(trs))
        coeff = []
        for b in range(mid.base.vertices):
            blocks = []
            for i, h in enumerate(H):
                phi = cochain_pushforward(inner.fiber.base, inner.system, bm.lifts[b], i)
                blocks.append(h.coords(phi @ h.lifts))
            coeff.append(block_diag(*blocks))
        outer_tr[e] = Transition(bm.mid_map, tuple(coeff))
    try:
        composite = FlatFiberBundle(base, total, tsys, comp_tr, basepoint)
    except BundleError as exc:
        raise BundleError(f"outer monodromy does not lift to the inner bundle: {exc}") from None
    outer = FlatFiberBundle(base, mid, push.total, outer_tr, basepoint)
    return ComposedBundles(composite, outer, inner)


@dataclass(frozen=True)
class FunctorialityReport:
    classify_iterated: object
    classify_composed: object
    classify_agree: bool
    z_iterated: int | None
    z_composed: int | None
    z_agree: bool | None
    tau: dict


def compose_check(cb: ComposedBundles, mid: OrientedComplex, base: OrientedComplex | None,
                  dual: DualityStructure, z: int = 0) -> FunctorialityReport:
    """pi_*^L(iterated) vs pi_*^L(composed), and the z-parts of pi_*^{L^ex} when parity allows."""
    g1 = pi_L(cb.inner, dual)
    iterated = pi_L(cb.outer, g1.dual)
    composed = pi_L(cb.composite, dual)
    a, b = classify_many([iterated, composed])
    zi = zc = za = None
    taus = {}
    if base is not None:
        t_inner = tau_fibration(cb.inner, mid, dual)
        t_outer = tau_fibration(cb.outer, base, g1.dual)
        t_comp = tau_fibration(cb.composite, base, dual)
        zi = z - t_inner.tau - t_outer.tau
        zc = z - t_comp.tau
        za = zi == zc
        taus = {"inner": t_inner.tau, "outer": t_outer.tau, "composite": t_comp.tau}
    return FunctorialityReport(a, b, a == b, zi, zc, za, taus)


# -- well-definedness harness -------------------------------------------------------------------------


@dataclass(frozen=True)
class WellDefinedReport:
    status: str                  # "reduced" or "inconclusive"
    steps: tuple[int, ...]       # dims of the isotropic subspaces peeled off
    residue_dim: int
    pushforward_dim: int


def pi_L_well_defined_check(bundle: FlatFiberBundle, dual: DualityStructure, L: Subspace,
                            *, budget: int = 32, seed: int = 0) -> WellDefinedReport:
    """Exhibit a reduction of pi_*^L(F, q) to zero, starting from the image of H(fibre; L).

    L is a subspace of the stalk at fibre vertex 0, flat along the fibre and
    preserved by the transitions; it must be lagrangian.
    """
    from .specseq import flat_subsystem
    X = bundle.fiber.base
    q = dual.q
    if not is_isotropic(q, L) or kernel(L.basis.T @ q) != L:
        raise BundleError("L is not lagrangian")
    bases, Lsys = flat_subsystem(X, bundle.system, L, 0)
    for e, t in bundle.transitions.items():
        for x in range(X.vertices):
            img = t.transports[x] @ bases[x]
            if not Subspace(bundle.stalk_dim, bases[t.vertex_map[x]]).contains(img):
                raise BundleError(f"transition on {e} does not preserve L")
    gen = pi_L(bundle, dual)
    # chain map C(fibre; L) -> C(fibre; F), then into cohomology coordinates
    H = bundle.fiber_complex.cohomology
    CL = twisted_complex(X, Lsys)
    cols = []
    for i, h in enumerate(H):
        inc = block_diag(*[bases[s[0]] for s in X.simplices[i]]) if X.count(i) else Matrix.zeros(0, 0)
        hl = CL.cohomology[i]
        img = h.coords(inc @ hl.lifts) if hl.dim else Matrix.zeros(h.dim, 0)
        cols.append(img)
    W0 = Subspace(gen.dim, block_diag(*cols)) if gen.dim else Subspace.zero(0)
    steps = []
    cur = gen
    if W0.dim:
        if not is_isotropic(cur.dual.q, W0):
            raise BundleError("image of H(fibre; L) is not isotropic")
        steps.append(W0.dim)
        cur = sublagrangian_reduce(cur, W0)
    for _ in range(budget):
        if cur.dim == 0:
            break
        W = find_invariant_isotropic(cur, seed=seed)
        if W is None:
            break
        steps.append(W.dim)
        cur = sublagrangian_reduce(cur, W)
    status = "reduced" if cur.dim == 0 else "inconclusive"
    return WellDefinedReport(status, tuple(steps), cur.dim, gen.dim)
