"""Spectral sequences of filtered cochain complexes, descended pairings and the forms Q_r.

Filtrations are given by a filtration degree for every basis vector, so
F^p C^n is spanned by unit vectors.  Pages are kept as pairs (Z_r, B_r) of
subspaces of C^n:

    Z_r^{p,n} = {x in F^p C^n : dx in F^{p+r} C^{n+1}}
    B_r^{p,n} = Z_{r-1}^{p+1,n} + d Z_{r-1}^{p-r+1,n-1}

with E_r^{p,n-p} = Z_r / B_r and d_r induced by d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import flint

from .exactla import (
    LinAlgError, Matrix, Subquotient, Subspace, image, intersect, preimage,
    signature, solve, sum_spaces,
)
from .repcat import DualityStructure
from .sheaves import (
    CochainComplex, LocalSystem, OrientedComplex, cross_cup_matrix, epsilon_n, koszul_sign,
    tree_transports, twisted_complex,
)


class SpectralError(ValueError):
    pass


class PairingDescentError(SpectralError):
    """The supplied pairing is incompatible with the differential."""


class AsymmetricFormError(SpectralError):
    pass


# -- filtered complexes ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    complex: CochainComplex
    degrees: tuple[tuple[int, ...], ...]   # filtration degree of each basis vector of C^n

    def __post_init__(self):
        degs = tuple(tuple(x) for x in self.degrees)
        object.__setattr__(self, "degrees", degs)
        C = self.complex
        if len(degs) != len(C.dims) or any(len(d) != n for d, n in zip(degs, C.dims)):
            raise SpectralError("one filtration degree per basis vector required")
        for n, m in enumerate(C.d[:-1]):
            src, dst = degs[n], degs[n + 1]
            for (i, j), _ in _nonzero(m):
                if dst[i] < src[j]:
                    raise SpectralError(f"d does not preserve the filtration in degree {n}: "
                                        f"entry ({i},{j}) lowers filtration {src[j]} -> {dst[i]}")

    @property
    def top(self) -> int:
        return self.complex.top

    @cached_property
    def prange(self) -> tuple[int, int]:
        allp = [p for d in self.degrees for p in d]
        return (min(allp), max(allp)) if allp else (0, 0)

    @property
    def length(self) -> int:
        lo, hi = self.prange
        return hi - lo + 1

    def F(self, p: int, n: int) -> Subspace:
        return self._F(p, n)

    def _F(self, p, n):
        key = (p, n)
        cache = self.__dict__.setdefault("_fcache", {})
        if key not in cache:
            cols = [i for i, x in enumerate(self.degrees[n]) if x >= p]
            dim = self.complex.dims[n]
            m = flint.fmpq_mat(dim, len(cols))
            for c, i in enumerate(cols):
                m[i, c] = 1
            cache[key] = Subspace(dim, Matrix(m))
        return cache[key]

    def d(self, n: int) -> Matrix:
        return self.complex.d[n]


def _nonzero(m: Matrix):
    nc = m.cols
    for k, x in enumerate(m.flint.entries()):
        if x != 0:
            yield divmod(k, nc), x


# -- pages ------------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Cell:
    """E_r^{p,q} = span(top) / span(bottom); ``lifts`` represent a basis of the quotient."""

    lifts: Matrix
    top: Matrix
    bottom: Matrix

    @property
    def dim(self) -> int:
        return self.lifts.cols

    @classmethod
    def of(cls, sq: Subquotient) -> "Cell":
        return cls(sq.lifts, sq.top.basis, sq.bottom.basis)


@dataclass(eq=False)
class Page:
    r: int
    cells: dict[tuple[int, int], Cell]             # (p, n) -> E_r^{p, n-p}
    diffs: dict[tuple[int, int], Matrix]           # (p, n) -> d_r: (p, n) -> (p + r, n + 1)

    def dim(self, p: int, n: int) -> int:
        c = self.cells.get((p, n))
        return c.dim if c is not None else 0

    def bidegree_dims(self) -> dict[tuple[int, int], int]:
        """Nonzero dims keyed by (p, q)."""
        return {(p, n - p): c.dim for (p, n), c in sorted(self.cells.items()) if c.dim}

    def total_dim(self, n: int) -> int:
        return sum(c.dim for (p, m), c in self.cells.items() if m == n)

    def order(self) -> list[tuple[int, int]]:
        return sorted(self.cells, key=lambda k: (k[1], k[0]))


@dataclass(eq=False)
class SpectralSequence:
    fc: FilteredComplex
    pages: list[Page]          # pages[0] is E_1
    infinity: Page
    checks: dict[str, bool] = field(default_factory=dict)

    def page(self, r: int) -> Page:
        if r >= 1 + len(self.pages):
            return self.infinity if r > self.fc.length else self.pages[-1]
        return self.pages[r - 1]


class _Filtration:
    """Z_r / B_r subspaces with memoization."""

    def __init__(self, fc: FilteredComplex):
        self.fc = fc
        self._z = {}
        self._b = {}
        self.lo, self.hi = fc.prange

    def F(self, p, n):
        dim = self.fc.complex.dims[n]
        if p <= self.lo:
            return Subspace.full(dim)
        if p > self.hi:
            return Subspace.zero(dim)
        return self.fc.F(p, n)

    def Z(self, r, p, n):
        key = (r, p, n)
        if key not in self._z:
            Fp = self.F(p, n)
            if r <= 0 or n == self.fc.top or Fp.dim == 0:
                z = Fp
            else:
                target = self.F(p + r, n + 1)
                z = intersect(Fp, preimage(self.fc.d(n), target))
            self._z[key] = z
        return self._z[key]

    def B(self, r, p, n):
        key = (r, p, n)
        if key not in self._b:
            dim = self.fc.complex.dims[n]
            b = self.Z(r - 1, p + 1, n)
            if n > 0:
                src = self.Z(r - 1, p - r + 1, n - 1)
                if src.dim:
                    b = sum_spaces(b, Subspace(dim, self.fc.d(n - 1) @ src.basis))
            self._b[key] = b
        return self._b[key]

    def Zinf(self, p, n):
        return self.Z(self.fc.length + 1, p, n)

    def Binf(self, p, n):
        b = self.Zinf(p + 1, n)
        if n > 0:
            im = image(self.fc.d(n - 1))
            b = sum_spaces(b, intersect(self.F(p, n), im))
        return b


def _induced_diff(fc, src: Subquotient, dst: Subquotient | None, n: int) -> Matrix:
    if dst is None or n == fc.top:
        return Matrix.zeros(dst.dim if dst else 0, src.dim)
    img = fc.d(n) @ src.lifts
    if not dst.top.contains(img):
        raise SpectralError("d_r does not land in Z_r of the target cell")
    return dst.coords(img, check=False)


def _pages_by_subspaces(fc: FilteredComplex, R: int) -> tuple[list[Page], Page]:
    filt = _Filtration(fc)
    lo, hi = filt.lo, filt.hi
    tops = range(fc.top + 1)
    pages = []
    for r in range(1, R + 1):
        sqs = {(p, n): Subquotient(filt.Z(r, p, n), filt.B(r, p, n))
               for p in range(lo, hi + 1) for n in tops}
        diffs = {(p, n): _induced_diff(fc, sqs[(p, n)], sqs.get((p + r, n + 1)), n)
                 for (p, n) in sqs}
        pages.append(Page(r, {k: Cell.of(v) for k, v in sqs.items()}, diffs))
    inf_cells = {(p, n): Cell.of(Subquotient(filt.Zinf(p, n), filt.Binf(p, n)))
                 for p in range(lo, hi + 1) for n in tops}
    infinity = Page(-1, inf_cells, {k: Matrix.zeros(0, c.dim) for k, c in inf_cells.items()})
    return pages, infinity


# -- filtered normal form ------------------------------------------------------------------

ESSENTIAL, DEATH, BIRTH = "essential", "death", "birth"


@dataclass(eq=False)
class FilteredBasis:
    """Filtration-compatible basis e'_x of every C^n in which d is a partial matching.

    A death x in C^n has d e'_x = e'_i for its partner i in C^{n+1}; a birth is
    such an i; essential vectors are cycles that never bound.  ``length`` is the
    filtration jump deg(i) - deg(x), the page on which the pair cancels.
    """

    degrees: tuple[tuple[int, ...], ...]
    sparse: list[dict[int, dict[int, flint.fmpq]]]
    kind: list[list[str]]
    partner: list[list[int]]
    length: list[list[int]]

    def columns(self, n: int, idx: list[int]) -> Matrix:
        m = flint.fmpq_mat(len(self.degrees[n]), len(idx))
        for b, j in enumerate(idx):
            for i, a in self.sparse[n][j].items():
                m[i, b] = a
        return Matrix(m)

    def basis(self, n: int) -> Matrix:
        return self.columns(n, list(range(len(self.degrees[n]))))


def _sparse_columns(m: Matrix) -> list[dict[int, flint.fmpq]]:
    cols = [dict() for _ in range(m.cols)]
    ent = m.flint.entries()
    nc = m.cols
    for k, x in enumerate(ent):
        if x != 0:
            cols[k % nc][k // nc] = x
    return cols


def reduce_filtered(fc: FilteredComplex) -> FilteredBasis:
    """Column reduction of every d_n that only adds columns of higher (or equal) filtration.

    Columns are processed from the deepest filtration level outwards and the
    pivot of a column is its lowest-filtration entry, as in persistence.
    """
    top = fc.top
    dims = fc.complex.dims
    degs = fc.degrees
    kind = [[ESSENTIAL] * dims[n] for n in range(top + 1)]
    partner = [[-1] * dims[n] for n in range(top + 1)]
    length = [[-1] * dims[n] for n in range(top + 1)]
    vecs: list[dict[int, dict[int, flint.fmpq]]] = [dict() for _ in range(top + 1)]
    for n in range(top + 1):
        dc = degs[n]
        if n == top:
            for j in range(dims[n]):
                if kind[n][j] != BIRTH:
                    vecs[n][j] = {j: flint.fmpq(1)}
            break
        dr = degs[n + 1]
        cols = _sparse_columns(fc.d(n))
        key = lambda i: (-dr[i], i)
        pivots: dict[int, int] = {}
        R: dict[int, dict] = {}
        for j in sorted(range(dims[n]), key=lambda j: (-dc[j], j)):
            if kind[n][j] == BIRTH:
                continue
            col = cols[j]
            v = {j: flint.fmpq(1)}
            low = None
            while col:
                low = max(col, key=key)
                k = pivots.get(low)
                if k is None:
                    break
                f = col[low] / R[k][low]
                for i, a in R[k].items():
                    x = col.get(i, 0) - f * a
                    if x == 0:
                        col.pop(i, None)
                    else:
                        col[i] = x
                for i, a in vecs[n][k].items():
                    x = v.get(i, 0) - f * a
                    if x == 0:
                        v.pop(i, None)
                    else:
                        v[i] = x
            vecs[n][j] = v
            if col:
                if dr[low] < dc[j]:
                    raise SpectralError(f"d lowers the filtration in degree {n}")
                pivots[low] = j
                R[j] = col
                kind[n][j], partner[n][j] = DEATH, low
                length[n][j] = dr[low] - dc[j]
                kind[n + 1][low], partner[n + 1][low] = BIRTH, j
                length[n + 1][low] = length[n][j]
                vecs[n + 1][low] = col
    return FilteredBasis(degs, vecs, kind, partner, length)


def _pages_by_reduction(fc: FilteredComplex, R: int) -> tuple[list[Page], Page]:
    fb = reduce_filtered(fc)
    lo, hi = fc.prange
    tops = range(fc.top + 1)
    degs = fb.degrees

    def in_Z(n, x, r, p):
        if degs[n][x] < p:
            return False
        if fb.kind[n][x] != DEATH or r <= 0:
            return True
        return degs[n][x] + fb.length[n][x] >= p + r

    def Zset(r, p, n):
        return [x for x in range(fc.complex.dims[n]) if in_Z(n, x, r, p)]

    def Bset(r, p, n):
        out = set(Zset(r - 1, p + 1, n))
        for i in range(fc.complex.dims[n]):
            if fb.kind[n][i] == BIRTH and degs[n][i] >= p:
                y = fb.partner[n][i]
                if in_Z(n - 1, y, r - 1, p - r + 1):
                    out.add(i)
        return sorted(out)

    def make_cell(n, zs, bs):
        bset = set(bs)
        if not bset <= set(zs):
            raise SpectralError("B_r is not contained in Z_r")
        ev = [x for x in zs if x not in bset]
        return Cell(fb.columns(n, ev), fb.columns(n, zs), fb.columns(n, bs)), ev

    pages = []
    for r in range(1, R + 1):
        cells, elems = {}, {}
        for p in range(lo, hi + 1):
            for n in tops:
                cells[(p, n)], elems[(p, n)] = make_cell(n, Zset(r, p, n), Bset(r, p, n))
        diffs = {}
        for (p, n), ev in elems.items():
            tgt = elems.get((p + r, n + 1), [])
            pos = {x: a for a, x in enumerate(tgt)}
            m = flint.fmpq_mat(len(tgt), len(ev))
            for b, x in enumerate(ev):
                if fb.kind[n][x] == DEATH and fb.length[n][x] == r:
                    i = fb.partner[n][x]
                    if i not in pos:
                        raise SpectralError("d_r target is missing from the next cell")
                    m[pos[i], b] = 1
            diffs[(p, n)] = Matrix(m)
        pages.append(Page(r, cells, diffs))
    inf_cells = {}
    for p in range(lo, hi + 1):
        for n in tops:
            dim = fc.complex.dims[n]
            zs = [x for x in range(dim) if degs[n][x] >= p and fb.kind[n][x] != DEATH]
            bs = [x for x in zs if degs[n][x] >= p + 1 or fb.kind[n][x] == BIRTH]
            inf_cells[(p, n)], _ = make_cell(n, zs, bs)
    infinity = Page(-1, inf_cells, {k: Matrix.zeros(0, c.dim) for k, c in inf_cells.items()})
    return pages, infinity


def compute_pages(fc: FilteredComplex, r_max: int | None = None,
                  method: str = "reduction") -> SpectralSequence:
    """E_1 .. E_R with R = filtration length + 1 (or r_max), E_infinity, and consistency checks.

    ``method`` is "reduction" (filtered normal form, default) or "subspace"
    (Z_r and B_r computed directly as subspaces; slower, kept as a cross-check).
    """
    R = r_max if r_max is not None else fc.length + 1
    if method == "reduction":
        pages, infinity = _pages_by_reduction(fc, R)
    elif method == "subspace":
        pages, infinity = _pages_by_subspaces(fc, R)
    else:
        raise ValueError(f"unknown page method {method!r}")
    ss = SpectralSequence(fc, pages, infinity)
    ss.checks = _check_sequence(ss)
    return ss


def _check_sequence(ss: SpectralSequence) -> dict[str, bool]:
    fc = ss.fc
    for page in ss.pages:
        r = page.r
        for (p, n), dmat in page.diffs.items():
            nxt = page.diffs.get((p + r, n + 1))
            if nxt is not None and nxt.cols and dmat.rows and not (nxt @ dmat).is_zero():
                raise SpectralError(f"d_{r} o d_{r} != 0 at (p, n) = {(p, n)}")
    for page, nxt in zip(ss.pages, ss.pages[1:]):
        r = page.r
        for (p, n), cell in page.cells.items():
            out = page.diffs[(p, n)].rank()
            src = page.diffs.get((p - r, n - 1))
            inc = src.rank() if src is not None else 0
            if cell.dim - out - inc != nxt.dim(p, n):
                raise SpectralError(f"E_{r + 1} at {(p, n)} disagrees with the homology of (E_{r}, d_{r})")
    last = ss.pages[-1]
    for (p, n), cell in ss.infinity.cells.items():
        if cell.dim != last.dim(p, n):
            raise SpectralError(f"E_{last.r} at {(p, n)} is not yet E_infinity")
    C = fc.complex
    ranks = [m.rank() for m in C.d]
    betti = [C.dims[n] - ranks[n] - (ranks[n - 1] if n else 0) for n in range(len(C.dims))]
    for n in range(fc.top + 1):
        if ss.infinity.total_dim(n) != betti[n]:
            raise SpectralError(f"E_infinity does not reassemble H^{n}")
    return {"d_r_squared_zero": True, "homology_of_page": True, "e_infinity_reassembles": True}


# -- pairings on pages ----------------------------------------------------------------------

PairFn = Callable[[int, int, Matrix, int, int, Matrix], Matrix]


@dataclass(frozen=True, eq=False)
class PageDuality:
    """Pairs E_r^{p,n} with E_r^{P-p, T-n}; ``pair`` evaluates on representative columns."""

    shift: tuple[int, int]       # (P, T) in (filtration, total degree)
    pair: PairFn
    r0: int = 1

    @classmethod
    def from_chain_pairing(cls, shift, blocks: dict[int, Matrix], r0: int = 1) -> "PageDuality":
        """Chain-level pairing: blocks[n] is the matrix of C^n x C^{T-n}."""
        def pair(p, n, X, pp, nn, Y):
            return X.T @ blocks[n] @ Y
        return cls(shift, pair, r0)


@dataclass(eq=False)
class DescendedPairing:
    r: int
    matrices: dict[tuple[int, int], Matrix]   # (p, n) -> E_r^{p,n} x E_r^{P-p,T-n}
    perfect: bool


def descend_pairing(ss: SpectralSequence, duality: PageDuality) -> list[DescendedPairing]:
    """Pairing on every page r >= r0, checked to vanish on B_r x Z_r and Z_r x B_r."""
    P, T = duality.shift
    out = []
    for page in ss.pages:
        if page.r < duality.r0:
            continue
        mats, perfect = {}, True
        for (p, n), cell in page.cells.items():
            other = page.cells.get((P - p, T - n))
            if other is None:
                if cell.dim:
                    perfect = False
                continue
            for X, Y, what in ((cell.bottom, other.top, "B x Z"),
                               (cell.top, other.bottom, "Z x B")):
                if X.cols and Y.cols and not duality.pair(p, n, X, P - p, T - n, Y).is_zero():
                    raise PairingDescentError(
                        f"pairing does not descend to E_{page.r}: nonzero on {what} "
                        f"at (p, n) = {(p, n)}")
            m = duality.pair(p, n, cell.lifts, P - p, T - n, other.lifts)
            if m.rows != m.cols or not m.is_invertible():
                perfect = False
            mats[(p, n)] = m
        out.append(DescendedPairing(page.r, mats, perfect))
    return out


@dataclass(frozen=True)
class QForm:
    r: int
    matrix: Matrix
    signature: tuple[int, int, int]

    @property
    def sign(self) -> int:
        return self.signature[0] - self.signature[1]


def q_form(page: Page, pairing: DescendedPairing, shift: tuple[int, int]) -> QForm:
    """Q_r(v, w) = q_{E_r}(s(N) v)(d_r w) on the total page, s(N) = (-1)^{N(N-1)/2}."""
    P, T = shift
    r = page.r
    order = page.order()
    off, o = {}, 0
    for k in order:
        off[k] = o
        o += page.cells[k].dim
    m = flint.fmpq_mat(o, o)
    for (p, n) in order:
        pm = pairing.matrices.get((p, n))
        if pm is None or not page.cells[(p, n)].dim:
            continue
        src = (P - p - r, T - n - 1)
        if src not in page.cells or not page.cells[src].dim:
            continue
        block = pm @ page.diffs[src] * koszul_sign(n)
        for a in range(block.rows):
            for b in range(block.cols):
                m[off[(p, n)] + a, off[src] + b] = block.flint[a, b]
    Q = Matrix(m)
    if Q.T != Q:
        for (p, n) in order:
            for (pp, nn) in order:
                for a in range(page.cells[(p, n)].dim):
                    for b in range(page.cells[(pp, nn)].dim):
                        i, j = off[(p, n)] + a, off[(pp, nn)] + b
                        if Q[i, j] != Q[j, i]:
                            raise AsymmetricFormError(
                                f"Q_{r} is not symmetric between cells (p,n)={(p, n)} and {(pp, nn)}")
    return QForm(r, Q, signature(Q))


# -- tau of a lagrangian ----------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TauResult:
    tau: int
    forms: tuple[QForm, ...]
    sequence: SpectralSequence
    formula: str
    checks: dict


def flat_subsystem(M_base, F: LocalSystem, L: Subspace, basepoint: int = 0):
    """Per-vertex bases of the flat subsystem generated by L at the basepoint, and its transports."""
    paths, _ = tree_transports(M_base, F, basepoint)
    bases = {v: P @ L.basis for v, P in paths.items()}
    tr = {}
    for (u, v) in M_base.edges:
        try:
            a = solve(bases[v], F.t(u, v) @ bases[u])
        except LinAlgError:
            raise SpectralError(f"subspace is not flat: transport along {(u, v)} leaves it") from None
        if a != Matrix.identity(L.dim):
            tr[(u, v)] = a
    return bases, LocalSystem(L.dim, tr)


def _stalk_map_matrix(X, q, per_vertex: dict[int, Matrix]) -> Matrix:
    """Block diagonal over q-simplices of the stalk map at each simplex's minimal vertex."""
    any_m = next(iter(per_vertex.values()))
    rows, cols = any_m.shape
    out = flint.fmpq_mat(X.count(q) * rows, X.count(q) * cols)
    for i, s in enumerate(X.simplices[q]):
        blk = per_vertex[s[0]].flint
        for a in range(rows):
            for b in range(cols):
                out[i * rows + a, i * cols + b] = blk[a, b]
    return Matrix(out)


def _assemble(blocks: dict, row_keys, col_keys, row_dims, col_dims) -> Matrix:
    out = flint.fmpq_mat(sum(row_dims[k] for k in row_keys), sum(col_dims[k] for k in col_keys))
    ro = 0
    for rk in row_keys:
        co = 0
        for ck in col_keys:
            b = blocks.get((rk, ck))
            if b is not None:
                t = b.flint
                for i in range(b.rows):
                    for j in range(b.cols):
                        if t[i, j] != 0:
                            out[ro + i, co + j] = t[i, j]
            co += col_dims[ck]
        ro += row_dims[rk]
    return Matrix(out)


@dataclass(frozen=True, eq=False)
class Bicomplex:
    """A^{p,q} with horizontal h: (p,q) -> (p+1,q) and vertical v: (p,q) -> (p,q+1).

    Total differential D = h + (-1)^p v, filtered by p.
    """

    dims: dict[tuple[int, int], int]
    h: dict[tuple[int, int], Matrix]
    v: dict[tuple[int, int], Matrix]

    @cached_property
    def keys_by_degree(self) -> dict[int, list[tuple[int, int]]]:
        out = {}
        for (p, q) in sorted(self.dims):
            out.setdefault(p + q, []).append((p, q))
        return out

    def total(self) -> FilteredComplex:
        tops = max(self.keys_by_degree)
        dims, ds, degs = [], [], []
        for n in range(tops + 1):
            ks = self.keys_by_degree.get(n, [])
            dims.append(sum(self.dims[k] for k in ks))
            degs.append(tuple(p for (p, q) in ks for _ in range(self.dims[(p, q)])))
        for n in range(tops + 1):
            src = self.keys_by_degree.get(n, [])
            dst = self.keys_by_degree.get(n + 1, [])
            blocks = {}
            for (p, q) in src:
                if (p + 1, q) in self.dims and (p, q) in self.h:
                    blocks[((p + 1, q), (p, q))] = self.h[(p, q)]
                if (p, q + 1) in self.dims and (p, q) in self.v:
                    blocks[((p, q + 1), (p, q))] = self.v[(p, q)] * (-1 if p % 2 else 1)
            ds.append(_assemble(blocks, dst, src, self.dims, self.dims))
        return FilteredComplex(CochainComplex(tuple(dims), tuple(ds)), tuple(degs))

    def total_pairing(self, shift: tuple[int, int],
                      blocks: dict[tuple[tuple[int, int], tuple[int, int]], Matrix]) -> dict[int, Matrix]:
        """Assemble per-bidegree pairing blocks into matrices C^n x C^{T-n}."""
        _, T = shift
        out = {}
        for n, ks in self.keys_by_degree.items():
            other = self.keys_by_degree.get(T - n, [])
            out[n] = _assemble(blocks, ks, other, self.dims, self.dims)
        return out


def _check_chain_exact(fc: FilteredComplex, pairing: dict[int, Matrix], T: int) -> dict[int, int]:
    """Sign s_n with beta(Dx, y) = s_n beta(x, Dy) for x in C^n; raises if none."""
    signs = {}
    for n in range(fc.top):
        m = T - n - 1
        if m < 0 or m > fc.top or n + 1 not in pairing or n not in pairing:
            continue
        lhs = fc.d(n).T @ pairing[n + 1]
        rhs = pairing[n] @ fc.d(m)
        if lhs == rhs:
            signs[n] = 1
        elif lhs == -rhs:
            signs[n] = -1
        else:
            raise PairingDescentError(f"pairing is not compatible with D in degree {n}")
    return signs


TAU_LAGRANGIAN_FORMULA = "tau = 2(sign Q1 + sign Q2) on the spectral sequence of C(M; L -> F -> L*)"


def lagrangian_bicomplex(M: OrientedComplex, F: LocalSystem, dual: DualityStructure,
                         L: Subspace, basepoint: int = 0):
    """Bicomplex C^q(M, K^p) for K = (L -> F -> L*) and its pairing of bidegree (-2, -n)."""
    X, n = M.base, M.dim
    bases, Lsys = flat_subsystem(X, F, L, basepoint)
    Ldual = LocalSystem(L.dim, {e: m.inv().T for e, m in Lsys.transports.items()})
    K = [Lsys, F, Ldual]
    q = dual.q
    maps = [{v: B for v, B in bases.items()}, {v: B.T @ q for v, B in bases.items()}]
    cx = [twisted_complex(X, s) for s in K]
    dims, h, v = {}, {}, {}
    for p in range(3):
        for k in range(n + 1):
            dims[(p, k)] = X.count(k) * K[p].stalk_dim
            v[(p, k)] = cx[p].d[k]
            if p < 2:
                h[(p, k)] = _stalk_map_matrix(X, k, maps[p])
    bic = Bicomplex(dims, h, v)
    ident = Matrix.identity(L.dim)
    kappa = [ident, q, ident]
    cp = [1, -1, -1 if dual.epsilon == 0 else 1]
    blocks = {}
    for p in range(3):
        for k in range(n + 1):
            c = cp[p] * (-1 if (p * k) % 2 else 1)
            blocks[((p, k), (2 - p, n - k))] = cross_cup_matrix(M, K[p], K[2 - p], kappa[p], k) * c
    return bic, blocks


def tau_lagrangian(M: OrientedComplex, F: LocalSystem, dual: DualityStructure, L: Subspace,
                   basepoint: int = 0) -> TauResult:
    n = M.dim
    if n % 2 == 0:
        raise SpectralError("tau of a lagrangian needs an odd-dimensional manifold")
    if dual.epsilon != (1 - epsilon_n(n)) % 2:
        raise SpectralError(f"epsilon must be 1 - eps_n = {(1 - epsilon_n(n)) % 2} in dimension {n}")
    F.check_duality(M.base, dual)
    from .exactla import kernel as _ker
    if not (L.basis.T @ dual.q @ L.basis).is_zero() or _ker(L.basis.T @ dual.q) != L:
        raise SpectralError("L is not lagrangian")
    bic, blocks = lagrangian_bicomplex(M, F, dual, L, basepoint)
    fc = bic.total()
    shift = (2, n + 2)
    chain = bic.total_pairing(shift, blocks)
    _check_chain_exact(fc, chain, shift[1])
    ss = compute_pages(fc)
    duality = PageDuality.from_chain_pairing(shift, chain, r0=1)
    desc = descend_pairing(ss, duality)
    forms = tuple(q_form(ss.page(d.r), d, shift) for d in desc if d.r in (1, 2))
    tau = 2 * sum(f.sign for f in forms)
    checks = dict(ss.checks)
    checks.update({"pairing_chain_compatible": True, "pairing_descends": True,
                   "q_forms_symmetric": True,
                   "e1_pairing_perfect": desc[0].perfect if desc else True,
                   "d_r_zero_beyond_2": all(m.is_zero() for pg in ss.pages if pg.r >= 3
                                            for m in pg.diffs.values())})
    return TauResult(tau, forms, ss, TAU_LAGRANGIAN_FORMULA, checks)
