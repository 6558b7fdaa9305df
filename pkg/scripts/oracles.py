"""Reference computations used to check lflat.

Nothing here calls lflat's algorithms.  Linear algebra is done with Fractions,
numpy or raw python-flint matrices, and each quantity is computed straight from
its definition: spectral pages as Z_r / (Z_{r-1} + dZ_{r-1}), forms by brute
elimination, isotypic parts by character projectors.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

import flint
import numpy as np

# -- small exact helpers -------------------------------------------------------------------


def F(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, flint.fmpq):
        return Fraction(int(x.p), int(x.q))
    return Fraction(x)


def fmat(rows, cols: int | None = None) -> flint.fmpq_mat:
    rows = [list(r) for r in rows]
    n = len(rows)
    m = cols if cols is not None else (len(rows[0]) if rows else 0)
    out = flint.fmpq_mat(n, m)
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            f = F(x)
            out[i, j] = flint.fmpq(f.numerator, f.denominator)
    return out


def frac_rows(m: flint.fmpq_mat) -> list[list[Fraction]]:
    return [[F(m[i, j]) for j in range(m.ncols())] for i in range(m.nrows())]


def rank(m: flint.fmpq_mat) -> int:
    if m.nrows() == 0 or m.ncols() == 0:
        return 0
    return m.rank()


def nullspace(m: flint.fmpq_mat) -> flint.fmpq_mat:
    """Columns spanning {x : m x = 0}, read off the reduced row echelon form."""
    n = m.ncols()
    if m.nrows() == 0:
        return _identity(n)
    r, _ = m.rref()
    pivots, row = [], 0
    for j in range(n):
        if row < r.nrows() and r[row, j] != 0:
            pivots.append(j)
            row += 1
    free = [j for j in range(n) if j not in pivots]
    out = flint.fmpq_mat(n, len(free))
    for c, f in enumerate(free):
        out[f, c] = 1
        for i, p in enumerate(pivots):
            out[p, c] = -r[i, f]
    return out


def _is_zero(m: flint.fmpq_mat) -> bool:
    return all(m[i, j] == 0 for i in range(m.nrows()) for j in range(m.ncols()))


def _identity(n: int) -> flint.fmpq_mat:
    out = flint.fmpq_mat(n, n)
    for i in range(n):
        out[i, i] = 1
    return out


def hcat(*ms: flint.fmpq_mat, rows: int) -> flint.fmpq_mat:
    cols = sum(m.ncols() for m in ms)
    out = flint.fmpq_mat(rows, cols)
    c = 0
    for m in ms:
        for i in range(m.nrows()):
            for j in range(m.ncols()):
                out[i, c + j] = m[i, j]
        c += m.ncols()
    return out


def select_rows(m: flint.fmpq_mat, rows) -> flint.fmpq_mat:
    rows = list(rows)
    out = flint.fmpq_mat(len(rows), m.ncols())
    for a, i in enumerate(rows):
        for j in range(m.ncols()):
            out[a, j] = m[i, j]
    return out


def select_cols(m: flint.fmpq_mat, cols) -> flint.fmpq_mat:
    cols = list(cols)
    out = flint.fmpq_mat(m.nrows(), len(cols))
    for i in range(m.nrows()):
        for b, j in enumerate(cols):
            out[i, b] = m[i, j]
    return out


# -- signatures ----------------------------------------------------------------------------


def congruence_signature(rows) -> tuple[int, int, int]:
    """(n+, n-, n0) of a symmetric matrix by symmetric Gaussian elimination over Q."""
    a = [[F(x) for x in r] for r in rows]
    n = len(a)
    for i in range(n):
        for j in range(n):
            if a[i][j] != a[j][i]:
                raise ValueError("matrix is not symmetric")
    pos = neg = 0
    live = list(range(n))
    while live:
        piv = next((i for i in live if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in live for j in live if i < j and a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # x_i -> x_i + x_j makes the (i, i) entry 2 a_ij
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            piv = i
        p = a[piv][piv]
        if p > 0:
            pos += 1
        else:
            neg += 1
        live.remove(piv)
        for i in live:
            f = a[i][piv] / p
            if f:
                for k in live:
                    a[i][k] -= f * a[piv][k]
        for i in live:
            a[i][piv] = a[piv][i] = Fraction(0)
    return pos, neg, n - pos - neg


def float_signature(rows, tol: float = 1e-9) -> tuple[int, int, int]:
    m = np.array([[float(F(x)) for x in r] for r in rows], dtype=float)
    if m.size == 0:
        return 0, 0, 0
    ev = np.linalg.eigvalsh((m + m.T) / 2)
    scale = max(1.0, float(np.abs(ev).max()))
    return (int((ev > tol * scale).sum()), int((ev < -tol * scale).sum()),
            int((np.abs(ev) <= tol * scale).sum()))


# -- twisted cochains ----------------------------------------------------------------------


def faces(simplices: list[list[int]]) -> dict[int, list[tuple[int, ...]]]:
    out: dict[int, set] = {}
    for s in simplices:
        s = tuple(sorted(s))
        for k in range(1, len(s) + 1):
            for f in itertools.combinations(s, k):
                out.setdefault(k - 1, set()).add(f)
    return {k: sorted(v) for k, v in out.items()}


def twisted_coboundaries(simplices, stalk: int, transport) -> list[flint.fmpq_mat]:
    """delta c(v0..v_{k+1}) = t(v1 -> v0) c(v1..) + sum_{i>=1} (-1)^i c(..^v_i..).

    ``transport(u, v)`` is the matrix carrying the stalk at u to the stalk at v.
    """
    S = faces(simplices)
    top = max(S)
    out = []
    for k in range(top + 1):
        src, dst = S[k], S.get(k + 1, [])
        idx = {s: i for i, s in enumerate(src)}
        m = flint.fmpq_mat(len(dst) * stalk, len(src) * stalk)
        for r, t in enumerate(dst):
            for i in range(len(t)):
                f = t[:i] + t[i + 1:]
                c = idx[f]
                blk = transport(t[1], t[0]) if i == 0 else _identity(stalk)
                sgn = -1 if i % 2 else 1
                for a in range(stalk):
                    for b in range(stalk):
                        if blk[a, b] != 0:
                            m[r * stalk + a, c * stalk + b] += sgn * blk[a, b]
        out.append(m)
    return out


def cohomology_dims(simplices, stalk: int, transport) -> list[int]:
    S = faces(simplices)
    ds = twisted_coboundaries(simplices, stalk, transport)
    dims = [len(S[k]) * stalk for k in range(len(ds))]
    ranks = [rank(d) for d in ds]
    return [dims[k] - ranks[k] - (ranks[k - 1] if k else 0) for k in range(len(ds))]


def circle_cohomology(A) -> tuple[int, int]:
    """H^0 = ker(A - I), H^1 = coker(A - I) for monodromy A on the circle."""
    a = fmat(A)
    k = a.nrows()
    r = rank(a - _identity(k))
    return k - r, k - r


# -- spectral pages of a coordinate-filtered complex ---------------------------------------


@dataclass
class FilteredData:
    """Cochain complex C^0..C^top with a filtration degree per basis vector."""

    dims: list[int]
    d: list[flint.fmpq_mat]          # d[n]: C^n -> C^{n+1}
    degrees: list[list[int]]

    def d_at(self, n: int) -> flint.fmpq_mat:
        if 0 <= n < len(self.d):
            return self.d[n]
        return flint.fmpq_mat(self.dims[n + 1] if n + 1 < len(self.dims) else 0,
                              self.dims[n] if 0 <= n < len(self.dims) else 0)


def _F(fd: FilteredData, p: int, n: int) -> list[int]:
    return [i for i, g in enumerate(fd.degrees[n]) if g >= p]


def _Z(fd: FilteredData, r: int, p: int, n: int) -> flint.fmpq_mat:
    """Z_r^{p,n} = {x in F^p C^n : dx in F^{p+r}} as columns in C^n."""
    cols = _F(fd, p, n)
    N = fd.dims[n]
    if not cols:
        return flint.fmpq_mat(N, 0)
    if n + 1 >= len(fd.dims):
        low = []
    else:
        low = [i for i, g in enumerate(fd.degrees[n + 1]) if g < p + r]
    sub = select_rows(select_cols(fd.d_at(n), cols), low) if low else flint.fmpq_mat(0, len(cols))
    k = nullspace(sub)
    out = flint.fmpq_mat(N, k.ncols())
    for a, i in enumerate(cols):
        for j in range(k.ncols()):
            out[i, j] = k[a, j]
    return out


def _boundary_part(fd: FilteredData, r: int, p: int, n: int) -> flint.fmpq_mat:
    """Z_{r-1}^{p+1} + d Z_{r-1}^{p-r+1} inside C^n."""
    N = fd.dims[n]
    a = _Z(fd, r - 1, p + 1, n)
    if n >= 1:
        z = _Z(fd, r - 1, p - r + 1, n - 1)
        b = fd.d_at(n - 1) * z if z.ncols() else flint.fmpq_mat(N, 0)
    else:
        b = flint.fmpq_mat(N, 0)
    return hcat(a, b, rows=N)


def _column_basis(m: flint.fmpq_mat) -> list[int]:
    """Greedy indices of columns that are independent."""
    keep, cur = [], 0
    for j in range(m.ncols()):
        trial = select_cols(m, keep + [j])
        rk = rank(trial)
        if rk > cur:
            keep.append(j)
            cur = rk
    return keep


def page_cell(fd: FilteredData, r: int, p: int, n: int) -> tuple[flint.fmpq_mat, flint.fmpq_mat]:
    """(representatives of a basis of E_r^{p,n}, spanning set of the denominator)."""
    N = fd.dims[n]
    Z = _Z(fd, r, p, n)
    D = _boundary_part(fd, r, p, n)
    base = rank(D)
    reps, cur = [], base
    for j in range(Z.ncols()):
        col = select_cols(Z, [j])
        trial = hcat(D, *reps, col, rows=N)
        rk = rank(trial)
        if rk > cur:
            reps.append(col)
            cur = rk
    return hcat(*reps, rows=N), D


def page_dims(fd: FilteredData, r: int) -> dict[tuple[int, int], int]:
    """dim E_r^{p, n} keyed by (p, n) with n the total degree."""
    out = {}
    for n in range(len(fd.dims)):
        degs = fd.degrees[n]
        if not degs:
            continue
        for p in range(min(degs), max(degs) + 1):
            Z = _Z(fd, r, p, n)
            D = _boundary_part(fd, r, p, n)
            dim = rank(hcat(Z, D, rows=fd.dims[n])) - rank(D)
            if dim:
                out[(p, n)] = dim
    return out


def d_r_rank(fd: FilteredData, r: int, p: int, n: int) -> int:
    """Rank of d_r : E_r^{p,n} -> E_r^{p+r,n+1}."""
    reps, _ = page_cell(fd, r, p, n)
    if not reps.ncols() or n + 1 >= len(fd.dims):
        return 0
    img = fd.d_at(n) * reps
    D = _boundary_part(fd, r, p + r, n + 1)
    return rank(hcat(D, img, rows=fd.dims[n + 1])) - rank(D)


def cohomology_of(fd: FilteredData) -> list[int]:
    ranks = [rank(fd.d_at(n)) for n in range(len(fd.dims))]
    return [fd.dims[n] - ranks[n] - (ranks[n - 1] if n else 0) for n in range(len(fd.dims))]


def infinite_page_dims(fd: FilteredData) -> dict[tuple[int, int], int]:
    """E_inf^{p,n} = F^p H^n / F^{p+1} H^n."""
    out = {}
    for n in range(len(fd.dims)):
        degs = fd.degrees[n]
        if not degs:
            continue
        N = fd.dims[n]
        bd = fd.d_at(n - 1) if n else flint.fmpq_mat(N, 0)
        rb = rank(bd)

        def filtered_h(p):
            cols = _F(fd, p, n)
            if not cols:
                return 0
            k = nullspace(select_cols(fd.d_at(n), cols)) if n + 1 < len(fd.dims) else _identity(len(cols))
            z = flint.fmpq_mat(N, k.ncols())
            for a, i in enumerate(cols):
                for j in range(k.ncols()):
                    z[i, j] = k[a, j]
            return rank(hcat(z, bd, rows=N)) - rb

        for p in range(min(degs), max(degs) + 1):
            dim = filtered_h(p) - filtered_h(p + 1)
            if dim:
                out[(p, n)] = dim
    return out


def q_form_signature(fd: FilteredData, r: int, pairing: dict[int, flint.fmpq_mat],
                     shift: tuple[int, int]) -> tuple[tuple[int, int, int], bool]:
    """Signature of Q_r(v, w) = s(N) beta(v, d w) on E_r, computed on chain representatives.

    ``pairing[n]`` is the chain-level matrix of C^n x C^{T-n}.  Returns the
    signature and whether the assembled matrix was symmetric.
    """
    P, T = shift
    cells = {}
    for n in range(len(fd.dims)):
        degs = fd.degrees[n]
        if not degs:
            continue
        for p in range(min(degs), max(degs) + 1):
            reps, _ = page_cell(fd, r, p, n)
            if reps.ncols():
                cells[(p, n)] = reps
    order = sorted(cells)
    off, o = {}, 0
    for k in order:
        off[k] = o
        o += cells[k].ncols()
    Q = [[Fraction(0)] * o for _ in range(o)]
    for (p, n) in order:
        src = (P - p - r, T - n - 1)
        if src not in cells or n not in pairing:
            continue
        v, w = cells[(p, n)], cells[src]
        dw = fd.d_at(src[1]) * w
        blk = v.transpose() * pairing[n] * dw
        sgn = -1 if (n * (n - 1) // 2) % 2 else 1
        for a in range(blk.nrows()):
            for b in range(blk.ncols()):
                Q[off[(p, n)] + a][off[src] + b] = sgn * F(blk[a, b])
    symmetric = all(Q[i][j] == Q[j][i] for i in range(o) for j in range(o))
    if not symmetric:
        return (0, 0, 0), False
    return congruence_signature(Q), True


# -- nilpotent Lie-algebra model of a unipotent torus bundle ---------------------------------


_SUBSETS = {n: list(itertools.combinations(range(3), n)) for n in range(4)}


def lie_model(N: list[flint.fmpq_mat]) -> FilteredData:
    """Lambda(Q^3) (x) V with d = sum_i e_i ^ N_i, filtered by the number of base letters e_0, e_1."""
    k = N[0].nrows()
    dims = [len(_SUBSETS[n]) * k for n in range(4)]
    ds = []
    for n in range(3):
        m = flint.fmpq_mat(dims[n + 1], dims[n])
        for ci, S in enumerate(_SUBSETS[n]):
            for i in range(3):
                if i in S:
                    continue
                ri = _SUBSETS[n + 1].index(tuple(sorted(S + (i,))))
                sgn = (-1) ** sum(1 for s in S if s < i)
                for a in range(k):
                    for b in range(k):
                        if N[i][a, b] != 0:
                            m[ri * k + a, ci * k + b] += sgn * N[i][a, b]
        ds.append(m)
    degs = [[sum(1 for s in S if s < 2) for S in _SUBSETS[n] for _ in range(k)] for n in range(4)]
    return FilteredData(dims, ds, degs)


def lie_pairing(q: flint.fmpq_mat) -> dict[int, flint.fmpq_mat]:
    """(x (x) a, y (x) b) -> q(a, b) times the e_012 coefficient of x ^ y."""
    k = q.nrows()
    out = {}
    for n in range(4):
        m = flint.fmpq_mat(len(_SUBSETS[n]) * k, len(_SUBSETS[3 - n]) * k)
        for ci, S in enumerate(_SUBSETS[n]):
            for cj, T in enumerate(_SUBSETS[3 - n]):
                if set(S) & set(T):
                    continue
                perm = list(S) + list(T)
                inv = sum(1 for x in range(3) for y in range(x + 1, 3) if perm[x] > perm[y])
                for a in range(k):
                    for b in range(k):
                        m[ci * k + a, cj * k + b] = (-1) ** inv * q[a, b]
        out[n] = m
    return out


def lie_tau(N, q, r_min: int = 2, r_max: int = 4) -> dict:
    """Pages, d_r ranks and tau = 2 sum_{r >= r_min} sign Q_r of the Lie model."""
    fd = lie_model(N)
    pairing = lie_pairing(q)
    pages, signs, ranks = {}, {}, {}
    for r in range(r_min, r_max + 1):
        pages[r] = page_dims(fd, r)
        ranks[r] = sum(d_r_rank(fd, r, p, n) for (p, n) in pages[r])
        sig, sym = q_form_signature(fd, r, pairing, (2, 3))
        if not sym:
            raise ValueError(f"Q_{r} of the model is not symmetric")
        signs[r] = sig[0] - sig[1]
    return {"pages": pages, "d_ranks": ranks, "signs": signs,
            "tau": 2 * sum(signs.values())}


# -- finite groups and their rational irreducibles -----------------------------------------


Word = tuple


def _key(m: flint.fmpq_mat) -> tuple:
    return tuple(str(m[i, j]) for i in range(m.nrows()) for j in range(m.ncols()))


def bfs_words(names: list[str], mats: list[flint.fmpq_mat], cap: int = 512) -> list[Word]:
    """Elements as words, discovered breadth first from the identity by right multiplication."""
    n = mats[0].nrows() if mats else 1
    ident = _identity(n)
    seen = {_key(ident)}
    order = [((), ident)]
    todo = deque(order)
    while todo:
        w, m = todo.popleft()
        for name, g in zip(names, mats):
            h = m * g
            if _key(h) not in seen:
                if len(seen) >= cap:
                    raise ValueError("group too large")
                seen.add(_key(h))
                order.append((w + (name,), h))
                todo.append((w + (name,), h))
    return [w for w, _ in order]


def evaluate(word: Word, gens: dict[str, flint.fmpq_mat], dim: int) -> flint.fmpq_mat:
    m = _identity(dim)
    for name in word:
        m = m * gens[name]
    return m


@dataclass(frozen=True)
class Irreducible:
    name: str
    kind: str                    # "Real", "Complex", "Quaternionic"
    gens: dict                   # generator name -> rows
    form: list                   # an invariant symmetric positive form

    @property
    def dim(self) -> int:
        return len(self.form)

    def mats(self) -> dict[str, flint.fmpq_mat]:
        return {k: fmat(v) for k, v in self.gens.items()}


_QI = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]     # left mult by i on (1, i, j, k)
_QJ = [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]]     # left mult by j
_RI = [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]     # right mult by i
_RJ = [[0, 0, -1, 0], [0, 0, 0, -1], [1, 0, 0, 0], [0, 1, 0, 0]]     # right mult by j
_RK = [[0, 0, 0, -1], [0, 0, 1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]     # right mult by k
_I1, _I2, _I4 = [[1]], [[1, 0], [0, 1]], [[int(i == j) for j in range(4)] for i in range(4)]


def _one(name, **vals):
    return Irreducible(name, "Real", {g: [[v]] for g, v in vals.items()}, _I1)


CATALOG: dict[str, list[Irreducible]] = {
    "1": [_one("trivial", g=1)],
    "Z2": [_one("trivial", g=1), _one("sign", g=-1)],
    "Z3": [_one("trivial", g=1),
           Irreducible("rotation", "Complex", {"g": [[0, -1], [1, -1]]}, [[2, -1], [-1, 2]])],
    "Z4": [_one("trivial", g=1), _one("sign", g=-1),
           Irreducible("quarter turn", "Complex", {"g": [[0, -1], [1, 0]]}, _I2)],
    "Q8": [_one("trivial", i=1, j=1), _one("chi_i", i=1, j=-1), _one("chi_j", i=-1, j=1),
           _one("chi_k", i=-1, j=-1),
           Irreducible("quaternions", "Quaternionic", {"i": _QI, "j": _QJ}, _I4)],
}

GROUP_GENERATORS = {"1": ["g"], "Z2": ["g"], "Z3": ["g"], "Z4": ["g"], "Q8": ["i", "j"]}


def _antisymmetric_commutant(irr: Irreducible) -> list[list]:
    """Invariant forms form * c for c in the commutant with form * c antisymmetric."""
    if irr.kind == "Real":
        return []
    if irr.kind == "Quaternionic":
        return [_RI, _RJ, _RK]
    (g,) = irr.gens.values()
    gm = fmat(g)
    J = gm - gm.inv()                      # commutes with the cyclic action
    return [frac_rows(fmat(irr.form) * J)]


def _random_square(rng: random.Random, m: int, symmetric: bool) -> list[list[int]]:
    b = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(i, m):
            if i == j:
                b[i][i] = rng.choice([-2, -1, 1, 2]) if symmetric else 0
            else:
                x = rng.randint(-2, 2)
                b[i][j] = x
                b[j][i] = x if symmetric else -x
    return b


def _kron(a, b):
    return [[F(x) * F(y) for x in ra for y in rb] for ra in a for rb in b]


def _add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


@dataclass
class PlainGenerator:
    """A rational representation with an invariant (-1)^eps-symmetric form."""

    epsilon: int
    gens: dict[str, flint.fmpq_mat]
    q: flint.fmpq_mat

    @property
    def dim(self) -> int:
        return self.q.nrows()

    def to_json(self) -> dict:
        return {"duality": {"epsilon": self.epsilon, "q": _json(self.q)},
                "rep": {"generators": {k: _json(v) for k, v in self.gens.items()}, "dim": self.dim}}


def _json(m: flint.fmpq_mat) -> list[list[str]]:
    return [[str(m[i, j]) for j in range(m.ncols())] for i in range(m.nrows())]


def planted_generator(group: str, epsilon: int, rng: random.Random, max_rank: int = 6) -> PlainGenerator:
    """A random sum of isotypic blocks V (x) Q^m with a random invariant nondegenerate form,
    conjugated by a random integer change of basis."""
    names = GROUP_GENERATORS[group]
    while True:
        blocks, total = [], 0
        for irr in rng.sample(CATALOG[group], len(CATALOG[group])):
            if irr.kind == "Real" and epsilon == 1:
                mult = rng.choice([0, 2])
            else:
                mult = rng.choice([0, 1, 1, 2])
            if mult and total + mult * irr.dim <= max_rank:
                blocks.append((irr, mult))
                total += mult * irr.dim
        if not blocks:
            continue
        gens = {n: [] for n in names}
        qs = []
        ok = True
        for irr, m in blocks:
            sym = [irr.form]
            anti = _antisymmetric_commutant(irr)
            # total form must be (-1)^eps symmetric: pair symmetric C with B of the same symmetry
            parts = []
            if m == 2 and rng.random() < 0.4:
                # a hyperbolic multiplicity space: V (x) e_1 is invariant and isotropic
                hyp = [[0, 1], [1, 0]] if epsilon == 0 else [[0, 1], [-1, 0]]
                parts.append(_kron(hyp, sym[0]))
            else:
                for c in sym:
                    parts.append(_kron(_random_square(rng, m, epsilon == 0), c))
                for c in anti:
                    if rng.random() < 0.6:
                        parts.append(_kron(_random_square(rng, m, epsilon == 1), c))
            form = parts[0]
            for p in parts[1:]:
                form = _add(form, p)
            if fmat(form).det() == 0:
                ok = False
                break
            qs.append(form)
            for n in names:
                gens[n].append(_kron(_I_rows(m), irr.gens[n]))
        if not ok:
            continue
        q = _block_diag(qs)
        mats = {n: _block_diag(gens[n]) for n in names}
        P = _random_unimodular(rng, total)
        Pf = fmat(P)
        Pi = Pf.inv()
        return PlainGenerator(epsilon, {n: Pi * fmat(m) * Pf for n, m in mats.items()},
                              Pf.transpose() * fmat(q) * Pf)


def _I_rows(m):
    return [[int(i == j) for j in range(m)] for i in range(m)]


def _block_diag(blocks):
    n = sum(len(b) for b in blocks)
    out = [[Fraction(0)] * n for _ in range(n)]
    o = 0
    for b in blocks:
        for i, r in enumerate(b):
            for j, x in enumerate(r):
                out[o + i][o + j] = F(x)
        o += len(b)
    return out


def _random_unimodular(rng: random.Random, n: int) -> list[list[int]]:
    perm = list(range(n))
    rng.shuffle(perm)
    m = [[int(perm[i] == j) * rng.choice([-1, 1]) for j in range(n)] for i in range(n)]
    for _ in range(n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i != j:
            c = rng.choice([-1, 1])
            m[i] = [a + c * b for a, b in zip(m[i], m[j])]
    return m


def direct_sum(a: PlainGenerator, b: PlainGenerator) -> PlainGenerator:
    gens = {n: fmat(_block_diag([frac_rows(a.gens[n]), frac_rows(b.gens[n])])) for n in a.gens}
    return PlainGenerator(a.epsilon, gens, fmat(_block_diag([frac_rows(a.q), frac_rows(b.q)])))


# -- normal form by character projectors ----------------------------------------------------


@dataclass
class OracleGroup:
    names: list[str]
    words: list[Word]

    @classmethod
    def of(cls, gen: PlainGenerator) -> "OracleGroup":
        names = sorted(gen.gens)
        return cls(names, bfs_words(names, [gen.gens[n] for n in names]))

    def images(self, gens: dict[str, flint.fmpq_mat], dim: int) -> list[flint.fmpq_mat]:
        return [evaluate(w, gens, dim) for w in self.words]

    def inverse_index(self, imgs) -> list[int]:
        keys = {_key(m): i for i, m in enumerate(imgs)}
        return [keys[_key(m.inv())] for m in imgs]

    def classes(self, imgs) -> list[list[int]]:
        keys = {_key(m): i for i, m in enumerate(imgs)}
        seen, out = set(), []
        for i, g in enumerate(imgs):
            if i in seen:
                continue
            c = sorted({keys[_key(h.inv() * g * h)] for h in imgs})
            seen.update(c)
            out.append(c)
        return out


def _trace(m: flint.fmpq_mat):
    return sum((m[i, i] for i in range(m.nrows())), flint.fmpq(0))


def full_group(group_name: str) -> tuple[OracleGroup, dict[str, flint.fmpq_mat]]:
    """The abstract group, through the faithful sum of its catalog irreducibles."""
    names = GROUP_GENERATORS[group_name]
    irrs = CATALOG[group_name]
    gens = {n: fmat(_block_diag([irr.gens[n] for irr in irrs])) for n in names}
    return OracleGroup(names, bfs_words(names, [gens[n] for n in names])), gens


def oracle_normal_form(gen: PlainGenerator, group_name: str,
                       image: OracleGroup | None = None) -> dict[str, int]:
    """identifier -> invariant for every nonzero summand, by isotypic projection.

    Projectors e_V = dim V / (|G| <chi, chi>) sum_g chi_V(g) g run over the whole
    group.  The identifier of V is "d{dim V}[chi_V(g) for g in image]" with the image
    elements in breadth-first order.  The invariant is sig/dim V of q on the
    V-isotypic part (eps = 0), sig/dim V of q(J., .) with J the first class-sum
    difference acting nontrivially (Complex, eps = 1), and the multiplicity mod 2
    (Quaternionic, eps = 1).
    """
    image = image or OracleGroup.of(gen)
    whole, _ = full_group(group_name)
    n = gen.dim
    imgs = image.images(gen.gens, n)
    order = len(whole.words)
    out = {}
    for irr in CATALOG[group_name]:
        if gen.epsilon == 1 and irr.kind == "Real":
            continue
        chi = [_trace(evaluate(w, irr.mats(), irr.dim)) for w in whole.words]
        norm = sum((c * c for c in chi), flint.fmpq(0)) / order     # <chi, chi>; chi is real
        e = flint.fmpq_mat(n, n)
        for w, c in zip(whole.words, chi):
            e += evaluate(w, gen.gens, n) * c                        # chi(g^-1) = chi(g) here
        e = e * (flint.fmpq(irr.dim) / (order * norm))
        cols = _column_basis(e)
        if not cols:
            continue
        B = select_cols(e, cols)
        label = [_trace(evaluate(w, irr.mats(), irr.dim)) for w in image.words]
        ident = f"d{irr.dim}[" + ",".join(str(c) for c in label) + "]"
        if gen.epsilon == 1 and irr.kind == "Quaternionic":
            val = (B.ncols() // irr.dim) % 2
        else:
            if gen.epsilon == 1:
                J = _complex_structure(image, imgs, B)
                form = (J * B).transpose() * gen.q * B
            else:
                form = B.transpose() * gen.q * B
            pos, neg, null = congruence_signature(frac_rows(form))
            if null:
                raise ValueError(f"degenerate form on the {irr.name} component")
            val = (pos - neg) // irr.dim
        if val:
            out[ident] = val
    return out


def _complex_structure(group: OracleGroup, imgs, B: flint.fmpq_mat) -> flint.fmpq_mat:
    inv = group.inverse_index(imgs)
    n = imgs[0].nrows()
    for cls in group.classes(imgs):
        J = flint.fmpq_mat(n, n)
        for i in cls:
            J += imgs[i] - imgs[inv[i]]
        if not _is_zero(J * B):
            return J
    raise ValueError("no class sum acts as a complex structure")


# -- exhaustive reduction ------------------------------------------------------------------


def _orbit_span(imgs: list[np.ndarray], v: np.ndarray) -> np.ndarray:
    return np.stack([g @ v for g in imgs], axis=1)


def find_isotropic_bruteforce(gen: PlainGenerator, group: OracleGroup,
                              entries=(-1, 0, 1)) -> flint.fmpq_mat | None:
    """First v in entries^n (lexicographic) whose G-orbit spans a nonzero isotropic subspace."""
    n = gen.dim
    imgs = group.images(gen.gens, n)
    fimgs = [np.array([[float(F(m[i, j])) for j in range(n)] for i in range(n)]) for m in imgs]
    q = np.array([[float(F(gen.q[i, j])) for j in range(n)] for i in range(n)])
    for v in itertools.product(entries, repeat=n):
        if not any(v):
            continue
        if next(x for x in v if x) < 0:
            continue
        O = _orbit_span(fimgs, np.array(v, dtype=float))
        if np.abs(O.T @ q @ O).max() > 1e-9:
            continue
        orbit = hcat(*[m * fmat([[x] for x in v]) for m in imgs], rows=n)
        if not _is_zero(orbit.transpose() * gen.q * orbit):
            continue
        return select_cols(orbit, _column_basis(orbit))
    return None


def reduce_by(gen: PlainGenerator, W: flint.fmpq_mat) -> PlainGenerator:
    """The induced generator on W^perp / W."""
    n = gen.dim
    perp = nullspace(W.transpose() * gen.q)
    comp = []
    cur = rank(W)
    for j in range(perp.ncols()):
        trial = hcat(W, *comp, select_cols(perp, [j]), rows=n)
        rk = rank(trial)
        if rk > cur:
            comp.append(select_cols(perp, [j]))
            cur = rk
    C = hcat(*comp, rows=n)
    basis = hcat(C, W, rows=n)                  # of W^perp
    k = C.ncols()
    gens = {}
    for name, g in gen.gens.items():
        coords = basis.solve(g * C) if basis.nrows() == basis.ncols() else _solve(basis, g * C)
        gens[name] = select_rows(coords, range(k))
    return PlainGenerator(gen.epsilon, gens, C.transpose() * gen.q * C)


def _solve(a: flint.fmpq_mat, b: flint.fmpq_mat) -> flint.fmpq_mat:
    """Exact solution of a x = b for a with independent columns."""
    at = a.transpose()
    return (at * a).solve(at * b)


def bruteforce_reduce(gen: PlainGenerator, group: OracleGroup | None = None,
                      max_steps: int = 16) -> tuple[PlainGenerator, list[int]]:
    group = group or OracleGroup.of(gen)
    steps = []
    cur = gen
    for _ in range(max_steps):
        if cur.dim == 0:
            break
        W = find_isotropic_bruteforce(cur, group)
        if W is None:
            break
        steps.append(W.ncols())
        cur = reduce_by(cur, W)
    return cur, steps
