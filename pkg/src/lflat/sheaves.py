"""Simplicial complexes, local systems and twisted cochains.

Conventions (fixed once, checked by d^2 = 0 and perfect-pairing tests):

* a p-cochain with values in a local system assigns to each sorted simplex
  (v0 < ... < vp) a vector in the stalk at its minimal vertex v0;
* ``transport[(u, v)]`` for u < v maps the stalk at u to the stalk at v;
* (df)(v0..v_{p+1}) = t_{v0 v1}^-1 f(v1..v_{p+1}) + sum_{i>=1} (-1)^i f(..^vi..);
* the cup product uses front and back faces, the back value being carried
  to v0 along the edge (v0, vp).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd
from typing import Callable, Iterable, Mapping, Sequence

from .exactla import (
    Matrix, Subquotient, Subspace, image, kernel,
)
from .repcat import DualityStructure, MatrixGroupRep


class ComplexError(ValueError):
    pass


class FlatnessError(ComplexError):
    pass


class PairingError(ComplexError):
    pass


def epsilon_n(n: int) -> int:
    """[n(n-1)/2] mod 2."""
    return (n * (n - 1) // 2) % 2


def koszul_sign(N: int) -> int:
    """(-1)^(N(N-1)/2)."""
    return -1 if epsilon_n(N) else 1


# -- complexes ---------------------------------------------------------------


class SimplicialComplex:
    """Closure-complete finite simplicial complex on vertices 0..n-1."""

    def __init__(self, vertices: int, simplices: Iterable[Sequence[int]]):
        self.vertices = int(vertices)
        faces: set[tuple[int, ...]] = {(v,) for v in range(self.vertices)}
        for s in simplices:
            s = tuple(sorted(int(v) for v in s))
            if len(set(s)) != len(s):
                raise ComplexError(f"simplex {s} repeats a vertex")
            if s and (s[0] < 0 or s[-1] >= self.vertices):
                raise ComplexError(f"simplex {s} uses an unknown vertex")
            for k in range(1, len(s) + 1):
                faces.update(itertools.combinations(s, k))
        dim = max(len(s) for s in faces) - 1 if faces else -1
        self.simplices: list[list[tuple[int, ...]]] = [[] for _ in range(dim + 1)]
        for s in sorted(faces):
            self.simplices[len(s) - 1].append(s)
        self.index = [{s: i for i, s in enumerate(ss)} for ss in self.simplices]

    @property
    def dim(self) -> int:
        return len(self.simplices) - 1

    def count(self, p: int) -> int:
        return len(self.simplices[p]) if 0 <= p <= self.dim else 0

    def euler_characteristic(self) -> int:
        return sum((-1) ** p * self.count(p) for p in range(self.dim + 1))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return self.simplices[1] if self.dim >= 1 else []

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def components(self) -> list[list[int]]:
        adj = {v: [] for v in range(self.vertices)}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        seen, comps = set(), []
        for s in range(self.vertices):
            if s in seen:
                continue
            comp, todo = [], [s]
            seen.add(s)
            while todo:
                u = todo.pop()
                comp.append(u)
                for w in adj[u]:
                    if w not in seen:
                        seen.add(w)
                        todo.append(w)
            comps.append(sorted(comp))
        return comps

    def boundary_matrix(self, p: int) -> Matrix:
        """Integer boundary C_p -> C_{p-1}."""
        rows, cols = self.count(p - 1), self.count(p)
        m = [[0] * cols for _ in range(rows)]
        for j, s in enumerate(self.simplices[p]):
            for i in range(len(s)):
                m[self.index[p - 1][s[:i] + s[i + 1:]]][j] += (-1) ** i
        return Matrix(m, cols=cols)

    def to_json(self) -> dict:
        return {"vertices": self.vertices, "simplices": [list(s) for s in self.maximal_simplices()]}

    def maximal_simplices(self) -> list[tuple[int, ...]]:
        out = []
        for p in range(self.dim, -1, -1):
            for s in self.simplices[p]:
                if not any(set(s) < set(t) for t in out):
                    out.append(s)
        return sorted(out)

    @classmethod
    def from_json(cls, data: Mapping) -> "SimplicialComplex":
        return cls(data["vertices"], data["simplices"])

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplicialComplex) and self.vertices == other.vertices \
            and self.simplices == other.simplices

    def __hash__(self):
        return hash((self.vertices, tuple(map(tuple, self.simplices))))

    def __repr__(self) -> str:
        return f"SimplicialComplex(vertices={self.vertices}, f={[len(s) for s in self.simplices]})"


@dataclass(frozen=True, eq=False)
class OrientedComplex:
    """Closed oriented pseudo-manifold: a complex with an integral fundamental cycle."""

    base: SimplicialComplex
    cycle: tuple[int, ...]

    def __post_init__(self):
        n = self.base.dim
        cyc = tuple(int(c) for c in self.cycle)
        object.__setattr__(self, "cycle", cyc)
        if len(cyc) != self.base.count(n):
            raise ComplexError("fundamental cycle needs one coefficient per top simplex")
        if n > 0:
            bd = self.base.boundary_matrix(n) @ Matrix.column(cyc)
            if not bd.is_zero():
                raise ComplexError("boundary of the fundamental cycle is not zero")
            count = {}
            for s in self.base.simplices[n]:
                for i in range(len(s)):
                    f = s[:i] + s[i + 1:]
                    count[f] = count.get(f, 0) + 1
            for f in self.base.simplices[n - 1]:
                if count.get(f, 0) != 2:
                    raise ComplexError(f"face {f} lies on {count.get(f, 0)} top simplices, not 2")
        if any(c == 0 for c in cyc):
            raise ComplexError("fundamental cycle vanishes on a top simplex")

    @property
    def dim(self) -> int:
        return self.base.dim

    @classmethod
    def orient(cls, base: SimplicialComplex) -> "OrientedComplex":
        """Orient each component by a primitive integral top cycle."""
        n = base.dim
        if n == 0:
            return cls(base, tuple(1 for _ in range(base.vertices)))
        k = kernel(base.boundary_matrix(n))
        cyc = [0] * base.count(n)
        for j in range(k.dim):
            col = [k.basis[i, j] for i in range(k.basis.rows)]
            den = 1
            for x in col:
                den = den * int(x.q) // gcd(den, int(x.q))
            ints = [int(x * den) for x in col]
            g = 0
            for x in ints:
                g = gcd(g, x)
            first = next(x for x in ints if x)
            s = (1 if first > 0 else -1) * g
            cyc = [c + x // s for c, x in zip(cyc, ints)]
        if k.dim == 0 or any(c == 0 for c in cyc):
            raise ComplexError("complex is not an orientable closed pseudo-manifold")
        return cls(base, tuple(cyc))

    def to_json(self) -> dict:
        return {**self.base.to_json(), "cycle": {str(i): c for i, c in enumerate(self.cycle)}}

    @classmethod
    def from_json(cls, data: Mapping) -> "OrientedComplex":
        base = SimplicialComplex.from_json(data)
        if "cycle" not in data:
            return cls.orient(base)
        cyc = data["cycle"]
        if isinstance(cyc, Mapping):
            vals = [0] * base.count(base.dim)
            for k, v in cyc.items():
                vals[int(k)] = int(v)
            cyc = vals
        return cls(base, tuple(cyc))


# -- local systems -----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class LocalSystem:
    """Flat stalks of dimension ``stalk_dim`` with edge transports (identity when omitted)."""

    stalk_dim: int
    transports: Mapping[tuple[int, int], Matrix] = field(default_factory=dict)

    def __post_init__(self):
        tr = {}
        for (u, v), m in dict(self.transports).items():
            if u == v:
                raise ComplexError("transport on a degenerate edge")
            if u > v:
                u, v, m = v, u, m.inv()
            if m.shape != (self.stalk_dim, self.stalk_dim) or not m.is_invertible():
                raise ComplexError(f"transport on edge {(u, v)} is not an invertible "
                                   f"{self.stalk_dim}x{self.stalk_dim} matrix")
            tr[(u, v)] = m
        object.__setattr__(self, "transports", tr)

    @classmethod
    def trivial(cls, stalk_dim: int) -> "LocalSystem":
        return cls(stalk_dim, {})

    def t(self, u: int, v: int) -> Matrix:
        """Transport stalk(u) -> stalk(v) along the edge {u, v}."""
        if u < v:
            return self.transports.get((u, v), Matrix.identity(self.stalk_dim))
        return self.t(v, u).inv()

    def check_flat(self, X: SimplicialComplex):
        known = X.index[1] if X.dim >= 1 else {}
        for e in self.transports:
            if e not in known:
                raise ComplexError(f"transport given on {e}, which is not an edge")
        if X.dim < 2:
            return
        for (u, v, w) in X.simplices[2]:
            if self.t(v, w) @ self.t(u, v) != self.t(u, w):
                raise FlatnessError(f"local system is not flat on the 2-simplex {(u, v, w)}")

    def direct_sum(self, other: "LocalSystem") -> "LocalSystem":
        from .exactla import block_diag
        edges = set(self.transports) | set(other.transports)
        return LocalSystem(self.stalk_dim + other.stalk_dim,
                           {e: block_diag(self.t(*e), other.t(*e)) for e in edges})

    def tensor(self, other: "LocalSystem") -> "LocalSystem":
        from .exactla import kron
        edges = set(self.transports) | set(other.transports)
        return LocalSystem(self.stalk_dim * other.stalk_dim,
                           {e: kron(self.t(*e), other.t(*e)) for e in edges})

    def check_duality(self, X: SimplicialComplex, dual: DualityStructure):
        if dual.dim != self.stalk_dim:
            raise ComplexError("duality and stalk dimensions differ")
        for (u, v) in X.edges:
            t = self.t(u, v)
            if t.T @ dual.q @ t != dual.q:
                raise ComplexError(f"duality is not preserved by the transport on edge {(u, v)}")

    def to_json(self) -> dict:
        return {"stalk_dim": self.stalk_dim,
                "transports": {f"{u}-{v}": m.to_json() for (u, v), m in sorted(self.transports.items())}}

    @classmethod
    def from_json(cls, data: Mapping) -> "LocalSystem":
        k = int(data["stalk_dim"])
        tr = {}
        for key, m in data.get("transports", {}).items():
            u, v = (int(x) for x in key.split("-"))
            tr[(u, v)] = Matrix(m, cols=k)
        return cls(k, tr)


# -- cochain complexes ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CochainComplex:
    """C^0 -> C^1 -> ... with ``d[p]: C^p -> C^{p+1}``."""

    dims: tuple[int, ...]
    d: tuple[Matrix, ...]

    def __post_init__(self):
        dims = tuple(self.dims)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "d", tuple(self.d))
        if len(self.d) != len(dims):
            raise ComplexError("need one differential per degree (the last one maps to 0)")
        for p, m in enumerate(self.d):
            nxt = dims[p + 1] if p + 1 < len(dims) else 0
            if m.shape != (nxt, dims[p]):
                raise ComplexError(f"d[{p}] has shape {m.shape}, expected {(nxt, dims[p])}")
        for p in range(len(dims) - 1):
            if not (self.d[p + 1] @ self.d[p]).is_zero():
                raise ComplexError(f"d^2 != 0 in degree {p}")

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def cocycles(self, p: int) -> Subspace:
        return kernel(self.d[p])

    def coboundaries(self, p: int) -> Subspace:
        if p == 0:
            return Subspace.zero(self.dims[0])
        return image(self.d[p - 1])

    @cached_property
    def cohomology(self) -> list[Subquotient]:
        return [Subquotient(self.cocycles(p), self.coboundaries(p)) for p in range(len(self.dims))]

    def betti(self) -> list[int]:
        return [h.dim for h in self.cohomology]

    def euler_characteristic(self) -> int:
        return sum((-1) ** p * n for p, n in enumerate(self.dims))


def twisted_coboundary(X: SimplicialComplex, p: int, stalk_dim: int,
                       back_transport: Callable[[int, int], Matrix]) -> Matrix:
    """Block coboundary C^p -> C^{p+1}; ``back_transport(v0, v1)`` carries stalk(v1) to stalk(v0)."""
    k = stalk_dim
    rows, cols = X.count(p + 1) * k, X.count(p) * k
    import flint
    m = flint.fmpq_mat(rows, cols)
    for r, s in enumerate(X.simplices[p + 1] if p + 1 <= X.dim else []):
        for i in range(len(s)):
            c = X.index[p][s[:i] + s[i + 1:]]
            blk = back_transport(s[0], s[1]).flint if i == 0 else None
            sgn = -1 if i % 2 else 1
            for a in range(k):
                if blk is None:
                    m[r * k + a, c * k + a] += sgn
                else:
                    for b in range(k):
                        m[r * k + a, c * k + b] += sgn * blk[a, b]
    return Matrix(m)


def twisted_complex(X: SimplicialComplex, F: LocalSystem) -> CochainComplex:
    F.check_flat(X)
    k = F.stalk_dim
    dims = tuple(X.count(p) * k for p in range(X.dim + 1))
    back = {}

    def back_transport(u, v):
        if (u, v) not in back:
            back[(u, v)] = F.t(u, v).inv()
        return back[(u, v)]

    d = tuple(twisted_coboundary(X, p, k, back_transport) for p in range(X.dim + 1))
    return CochainComplex(dims, d)


@dataclass(frozen=True, eq=False)
class CohomologyResult:
    complex: CochainComplex
    dims: tuple[int, ...]
    representatives: tuple[Matrix, ...]


def cohomology(X: SimplicialComplex, F: LocalSystem) -> CohomologyResult:
    C = twisted_complex(X, F)
    return CohomologyResult(C, tuple(C.betti()), tuple(h.lifts for h in C.cohomology))


# -- holonomy ----------------------------------------------------------------


def spanning_tree(X: SimplicialComplex, basepoint: int = 0) -> tuple[dict[int, int], list[tuple[int, int]]]:
    """BFS parent map and the list of tree edges (sorted pairs)."""
    adj = {v: [] for v in range(X.vertices)}
    for u, v in X.edges:
        adj[u].append(v)
        adj[v].append(u)
    parent, todo, tree = {basepoint: None}, deque([basepoint]), []
    while todo:
        u = todo.popleft()
        for w in sorted(adj[u]):
            if w not in parent:
                parent[w] = u
                tree.append((min(u, w), max(u, w)))
                todo.append(w)
    if len(parent) != X.vertices:
        raise ComplexError("complex is not connected")
    return parent, tree


def edge_name(e: tuple[int, int]) -> str:
    return f"e{e[0]}-{e[1]}"


def tree_transports(X: SimplicialComplex, F: LocalSystem, basepoint: int = 0,
                    tree: Iterable[tuple[int, int]] | None = None) -> tuple[dict[int, Matrix], set]:
    """Transport P_v from the basepoint stalk to every vertex along the spanning tree."""
    if tree is None:
        _, tree = spanning_tree(X, basepoint)
    tree = {tuple(sorted(e)) for e in tree}
    paths = {basepoint: Matrix.identity(F.stalk_dim)}
    todo = deque([basepoint])
    while todo:
        u = todo.popleft()
        for e in tree:
            if u in e:
                w = e[0] + e[1] - u
                if w not in paths:
                    paths[w] = F.t(u, w) @ paths[u]
                    todo.append(w)
    if len(paths) != X.vertices:
        raise ComplexError("complex is not connected (or the tree does not span it)")
    return paths, tree


def holonomy(X: SimplicialComplex, F: LocalSystem, basepoint: int = 0,
             tree: Iterable[tuple[int, int]] | None = None) -> MatrixGroupRep:
    """Holonomy representation on the stalk at ``basepoint``; generators are non-tree edges."""
    F.check_flat(X)
    paths, tree = tree_transports(X, F, basepoint, tree)
    gens = [e for e in X.edges if e not in tree]
    names = tuple(edge_name(e) for e in gens)
    mats = tuple(paths[v].inv() @ F.t(u, v) @ paths[u] for (u, v) in gens)

    def hol(u, v):
        return () if (u, v) in tree else ((edge_name((u, v)), 1),)

    rels = []
    for (a, b, c) in (X.simplices[2] if X.dim >= 2 else []):
        w = hol(b, c) + hol(a, b) + tuple((n, -e) for n, e in reversed(hol(a, c)))
        if w:
            rels.append(w)
    return MatrixGroupRep(names, mats, tuple(rels), F.stalk_dim)


def local_system_from_rep(X: SimplicialComplex, rep: MatrixGroupRep, basepoint: int = 0,
                          tree: Iterable[tuple[int, int]] | None = None) -> LocalSystem:
    """Identity on tree edges, the named generator on every other edge; inverse of holonomy."""
    if tree is None:
        _, tree = spanning_tree(X, basepoint)
    tree = {tuple(sorted(e)) for e in tree}
    tr = {}
    for e in X.edges:
        if e not in tree:
            name = edge_name(e)
            if name not in rep.generator_names:
                raise ComplexError(f"representation has no generator for edge {name}")
            tr[e] = rep.matrix(name)
    F = LocalSystem(rep.dim, tr)
    F.check_flat(X)
    return F


def local_system_from_edges(X: SimplicialComplex, stalk_dim: int,
                            edge_matrices: Mapping[tuple[int, int], Matrix]) -> LocalSystem:
    F = LocalSystem(stalk_dim, dict(edge_matrices))
    F.check_flat(X)
    return F


# -- Poincare duality ----------------------------------------------------------


def cup_pairing_matrix(M: OrientedComplex, F: LocalSystem, q: Matrix, i: int) -> Matrix:
    """Chain-level pairing C^i x C^{n-i} -> Q, <f, g> = sum_s [M]_s f(front)^T q t(v0,vi)^-1 g(back)."""
    return cross_cup_matrix(M, F, F, q, i)


def cross_cup_matrix(M: OrientedComplex, Fx: LocalSystem, Fy: LocalSystem,
                     kappa: Matrix, i: int) -> Matrix:
    """Like cup_pairing_matrix with values in two systems paired by the stalk form ``kappa``."""
    import flint
    X, n = M.base, M.dim
    kx, ky = Fx.stalk_dim, Fy.stalk_dim
    out = flint.fmpq_mat(X.count(i) * kx, X.count(n - i) * ky)
    cache = {}
    for c, s in zip(M.cycle, X.simplices[n]):
        front, back = X.index[i][s[:i + 1]], X.index[n - i][s[i:]]
        key = (s[0], s[i])
        if key not in cache:
            cache[key] = (kappa @ Fy.t(s[0], s[i]).inv()).flint if i > 0 else kappa.flint
        blk = cache[key]
        for a in range(kx):
            for b in range(ky):
                out[front * kx + a, back * ky + b] += c * blk[a, b]
    return Matrix(out)


@dataclass(frozen=True, eq=False)
class PoincareResult:
    dims: tuple[int, ...]
    representatives: tuple[Matrix, ...]
    pairings: tuple[Matrix, ...]   # pairings[i]: H^i x H^{n-i}
    form: Matrix                   # total form on (+)_i H^i with the (-1)^{N(N-1)/2} sign
    epsilon: int                   # form^T = (-1)^epsilon form
    perfect: bool

    @property
    def offsets(self) -> list[int]:
        out, o = [], 0
        for d in self.dims:
            out.append(o)
            o += d
        return out


def poincare_pairing(M: OrientedComplex, F: LocalSystem, dual: DualityStructure,
                     require_perfect: bool = True) -> PoincareResult:
    X, n = M.base, M.dim
    F.check_flat(X)
    F.check_duality(X, dual)
    C = twisted_complex(X, F)
    reps = tuple(h.lifts for h in C.cohomology)
    dims = tuple(r.cols for r in reps)
    pair = tuple(reps[i].T @ cup_pairing_matrix(M, F, dual.q, i) @ reps[n - i] for i in range(n + 1))
    perfect = all(p.is_invertible() for p in pair)
    if require_perfect and not perfect:
        bad = [i for i, p in enumerate(pair) if not p.is_invertible()]
        raise PairingError(f"Poincare pairing is not perfect in degrees {bad}: "
                           "input is not a closed oriented manifold or the orientation is wrong")
    total = sum(dims)
    off = [sum(dims[:i]) for i in range(n + 1)]
    import flint
    form = flint.fmpq_mat(total, total)
    for i in range(n + 1):
        s = koszul_sign(i)
        for a in range(dims[i]):
            for b in range(dims[n - i]):
                form[off[i] + a, off[n - i] + b] = s * pair[i][a, b]
    form = Matrix(form)
    eps = (dual.epsilon + epsilon_n(n)) % 2
    if form.T != form * (-1 if eps else 1):
        raise PairingError(f"total Poincare form is not {eps}-symmetric")
    return PoincareResult(dims, reps, pair, form, eps, perfect)
