"""Exact rational linear algebra.

Matrices are immutable wrappers around ``flint.fmpq_mat``; subspaces are column
spans kept in reduced column echelon form so that equality and hashing do not
depend on the basis a caller happened to supply.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import flint


class LinAlgError(ValueError):
    pass


class NotWellDefined(LinAlgError):
    """A map does not respect the subquotient structure it was asked to induce on."""


def to_fmpq(x) -> flint.fmpq:
    if isinstance(x, flint.fmpq):
        return x
    if isinstance(x, flint.fmpz):
        return flint.fmpq(x)
    if isinstance(x, int):
        return flint.fmpq(x)
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        f = Fraction(x)
        return flint.fmpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def to_fraction(x) -> Fraction:
    x = to_fmpq(x)
    return Fraction(int(x.p), int(x.q))


def fstr(x) -> str:
    """Serialize a rational as ``"p/q"`` (or ``"p"`` for integers)."""
    f = to_fraction(x)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


class Matrix:
    __slots__ = ("_m", "_flat")

    def __init__(self, rows: Sequence[Sequence] | flint.fmpq_mat, cols: int | None = None):
        if isinstance(rows, flint.fmpq_mat):
            object.__setattr__(self, "_m", rows)
            return
        rows = [list(r) for r in rows]
        nr = len(rows)
        nc = len(rows[0]) if nr else (cols or 0)
        if any(len(r) != nc for r in rows):
            raise LinAlgError("ragged matrix rows")
        m = flint.fmpq_mat(nr, nc, [to_fmpq(x) for r in rows for x in r])
        object.__setattr__(self, "_m", m)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(flint.fmpq_mat(rows, cols))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        m = flint.fmpq_mat(n, n)
        for i in range(n):
            m[i, i] = 1
        return cls(m)

    @classmethod
    def diag(cls, entries: Iterable) -> "Matrix":
        entries = list(entries)
        m = flint.fmpq_mat(len(entries), len(entries))
        for i, x in enumerate(entries):
            m[i, i] = to_fmpq(x)
        return cls(m)

    @classmethod
    def column(cls, entries: Iterable) -> "Matrix":
        return cls([[x] for x in entries], cols=1)

    @classmethod
    def unit(cls, n: int, i: int) -> "Matrix":
        m = flint.fmpq_mat(n, 1)
        m[i, 0] = 1
        return cls(m)

    # -- shape and access ---------------------------------------------------

    @property
    def flint(self) -> flint.fmpq_mat:
        return self._m

    @property
    def rows(self) -> int:
        return self._m.nrows()

    @property
    def cols(self) -> int:
        return self._m.ncols()

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self._m[i, j]

    def tolist(self) -> list[list[Fraction]]:
        return [[to_fraction(self._m[i, j]) for j in range(self.cols)] for i in range(self.rows)]

    def to_json(self) -> list[list[str]]:
        return [[fstr(self._m[i, j]) for j in range(self.cols)] for i in range(self.rows)]

    @classmethod
    def from_json(cls, data, cols: int | None = None) -> "Matrix":
        return cls(data, cols=cols)

    def col(self, j: int) -> "Matrix":
        return self.submatrix(range(self.rows), [j])

    def entries(self) -> list:
        """Row-major entries, computed once per matrix."""
        try:
            return self._flat
        except AttributeError:
            flat = self._m.entries() if self.rows and self.cols else []
            object.__setattr__(self, "_flat", flat)
            return flat

    def submatrix(self, rows: Iterable[int], cols: Iterable[int]) -> "Matrix":
        rows, cols = list(rows), list(cols)
        flat, nc = self.entries(), self.cols
        sub = [flat[i * nc + j] for i in rows for j in cols]
        return Matrix(flint.fmpq_mat(len(rows), len(cols), sub))

    def top_rows(self, k: int) -> "Matrix":
        return Matrix(flint.fmpq_mat(k, self.cols, self.entries()[:k * self.cols]))

    def columns(self) -> list["Matrix"]:
        return [self.col(j) for j in range(self.cols)]

    # -- arithmetic ---------------------------------------------------------

    def _check_same(self, other: "Matrix"):
        if self.shape != other.shape:
            raise LinAlgError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix(self._m + other._m)

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same(other)
        return Matrix(self._m - other._m)

    def __neg__(self) -> "Matrix":
        return Matrix(-self._m)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise LinAlgError(f"cannot compose {self.shape} with {other.shape}")
        return Matrix(self._m * other._m)

    def __mul__(self, scalar) -> "Matrix":
        if isinstance(scalar, Matrix):
            raise TypeError("use @ for matrix products")
        return Matrix(self._m * to_fmpq(scalar))

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return isinstance(other, Matrix) and self.shape == other.shape and self._m == other._m

    def __hash__(self) -> int:
        return hash((self.shape, tuple(str(x) for x in self._m.entries())))

    def __repr__(self) -> str:
        return f"Matrix({self.to_json()})"

    @property
    def T(self) -> "Matrix":
        return Matrix(self._m.transpose())

    def is_zero(self) -> bool:
        if not self.rows or not self.cols:
            return True
        return self._m == flint.fmpq_mat(self.rows, self.cols)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        return self._m.rank()

    def det(self):
        if not self.is_square():
            raise LinAlgError("determinant of a non-square matrix")
        return self._m.det()

    def is_invertible(self) -> bool:
        return self.is_square() and (self.rows == 0 or self._m.det() != 0)

    def inv(self) -> "Matrix":
        if not self.is_square():
            raise LinAlgError("inverse of a non-square matrix")
        if self.rows == 0:
            return self
        try:
            return Matrix(self._m.inv())
        except ZeroDivisionError:
            raise LinAlgError("matrix is singular") from None

    def trace(self):
        return sum((self._m[i, i] for i in range(min(self.shape))), flint.fmpq(0))

    def __pow__(self, k: int) -> "Matrix":
        if not self.is_square():
            raise LinAlgError("power of a non-square matrix")
        if k < 0:
            return self.inv() ** (-k)
        out, base = Matrix.identity(self.rows), self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def charpoly(self) -> flint.fmpq_poly:
        return self._m.charpoly()


def hstack(*ms: Matrix, rows: int | None = None) -> Matrix:
    ms = [m for m in ms]
    if not ms:
        return Matrix.zeros(rows or 0, 0)
    nr = ms[0].rows
    if any(m.rows != nr for m in ms):
        raise LinAlgError("hstack: row counts differ")
    parts = [(m.entries(), m.cols) for m in ms if m.cols]
    flat = []
    for i in range(nr):
        for f, c in parts:
            flat.extend(f[i * c:(i + 1) * c])
    return Matrix(flint.fmpq_mat(nr, sum(m.cols for m in ms), flat))


def vstack(*ms: Matrix, cols: int | None = None) -> Matrix:
    if not ms:
        return Matrix.zeros(0, cols or 0)
    nc = ms[0].cols
    if any(m.cols != nc for m in ms):
        raise LinAlgError("vstack: column counts differ")
    flat = [x for m in ms for x in m.entries()]
    return Matrix(flint.fmpq_mat(sum(m.rows for m in ms), nc, flat))


def block_diag(*ms: Matrix) -> Matrix:
    out = flint.fmpq_mat(sum(m.rows for m in ms), sum(m.cols for m in ms))
    r = c = 0
    for m in ms:
        for i in range(m.rows):
            for j in range(m.cols):
                out[r + i, c + j] = m.flint[i, j]
        r += m.rows
        c += m.cols
    return Matrix(out)


def kron(a: Matrix, b: Matrix) -> Matrix:
    fa, fb = a.entries(), b.entries()
    br, bc = b.rows, b.cols
    flat = []
    for i in range(a.rows):
        arow = fa[i * a.cols:(i + 1) * a.cols]
        for k in range(br):
            brow = fb[k * bc:(k + 1) * bc]
            for x in arow:
                flat.extend([x * y for y in brow] if x != 0 else [0] * bc)
    return Matrix(flint.fmpq_mat(a.rows * br, a.cols * bc, flat))


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot column indices."""
    if m.rows == 0 or m.cols == 0:
        return m, []
    r, rank = m.flint.rref()
    pivots = []
    for i in range(rank):
        for j in range(m.cols):
            if r[i, j] != 0:
                pivots.append(j)
                break
    return Matrix(r), pivots


def solve(a: Matrix, b: Matrix) -> Matrix:
    """Some X with a @ X == b; raises LinAlgError when inconsistent."""
    if a.rows != b.rows:
        raise LinAlgError("solve: row mismatch")
    aug = hstack(a, b)
    r, piv = rref(aug)
    if any(p >= a.cols for p in piv):
        raise LinAlgError("linear system is inconsistent")
    x = flint.fmpq_mat(a.cols, b.cols)
    for i, p in enumerate(piv):
        for j in range(b.cols):
            x[p, j] = r.flint[i, a.cols + j]
    return Matrix(x)


# -- subspaces ------------------------------------------------------------


def _column_echelon(basis: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced column echelon form and its pivot rows (where the basis is the identity)."""
    r, piv = rref(basis.T)
    if not piv:
        return Matrix.zeros(basis.rows, 0), piv
    if len(piv) == r.rows:
        return r.T, piv
    return r.top_rows(len(piv)).T, piv


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column span inside Q^ambient_dim, stored in reduced column echelon form."""

    ambient_dim: int
    basis: Matrix

    def __post_init__(self):
        if self.basis.rows != self.ambient_dim:
            raise LinAlgError("basis rows must equal the ambient dimension")
        basis, piv = _column_echelon(self.basis)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_pivots", piv)

    @classmethod
    def span(cls, ambient_dim: int, vectors: Iterable[Matrix | Sequence]) -> "Subspace":
        cols = [v if isinstance(v, Matrix) else Matrix.column(v) for v in vectors]
        return cls(ambient_dim, hstack(*cols) if cols else Matrix.zeros(ambient_dim, 0))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, Matrix.zeros(n, 0))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, Matrix.identity(n))

    @property
    def dim(self) -> int:
        return self.basis.cols

    def __eq__(self, other) -> bool:
        return isinstance(other, Subspace) and self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}/{self.ambient_dim}, basis={self.basis.to_json()})"

    def contains(self, v: Matrix) -> bool:
        if v.rows != self.ambient_dim:
            raise LinAlgError("vector dimension mismatch")
        if v.cols == 0:
            return True
        return hstack(self.basis, v).rank() == self.dim

    def contains_subspace(self, other: "Subspace") -> bool:
        return self.contains(other.basis)

    def pivots(self) -> list[int]:
        """Row of the leading entry of each basis column."""
        return list(self._pivots)

    def complement(self) -> Matrix:
        """Standard basis vectors completing ``basis`` to a basis of the ambient space."""
        piv = set(self.pivots())
        cols = [Matrix.unit(self.ambient_dim, i) for i in range(self.ambient_dim) if i not in piv]
        return hstack(*cols) if cols else Matrix.zeros(self.ambient_dim, 0)

    def image_under(self, f: Matrix) -> "Subspace":
        return Subspace(f.rows, f @ self.basis)


def kernel(m: Matrix) -> Subspace:
    r, piv = rref(m)
    pivset = set(piv)
    free = [j for j in range(m.cols) if j not in pivset]
    if not free:
        return Subspace.zero(m.cols)
    flat = r.entries()
    nc = m.cols
    # row-major n x len(free): identity on the free rows, -R on the pivot rows
    rows = [[flint.fmpq(0)] * len(free) for _ in range(nc)]
    for c, j in enumerate(free):
        rows[j][c] = flint.fmpq(1)
        for i, p in enumerate(piv):
            x = flat[i * nc + j]
            if x != 0:
                rows[p][c] = -x
    return Subspace(nc, Matrix(flint.fmpq_mat(nc, len(free), [x for row in rows for x in row])))


def image(m: Matrix) -> Subspace:
    return Subspace(m.rows, m)


def _check_ambient(a: Subspace, b: Subspace):
    if a.ambient_dim != b.ambient_dim:
        raise LinAlgError(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def sum_spaces(a: Subspace, b: Subspace) -> Subspace:
    _check_ambient(a, b)
    return Subspace(a.ambient_dim, hstack(a.basis, b.basis))


def intersect(a: Subspace, b: Subspace) -> Subspace:
    _check_ambient(a, b)
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient_dim)
    k = kernel(hstack(a.basis, -b.basis))
    return Subspace(a.ambient_dim, a.basis @ k.basis.submatrix(range(a.dim), range(k.dim)))


def preimage(f: Matrix, target: Subspace) -> Subspace:
    """{x : f x in target}."""
    if f.rows != target.ambient_dim:
        raise LinAlgError("preimage: dimension mismatch")
    proj, _ = quotient_map(f.rows, target)
    return kernel(proj @ f)


def quotient_map(ambient: int, sub: Subspace) -> tuple[Matrix, int]:
    """A surjection Q^ambient -> Q^(ambient - dim sub) whose kernel is exactly ``sub``."""
    if sub.ambient_dim != ambient:
        raise LinAlgError("subspace does not live in the given ambient space")
    comp = sub.complement()
    full = hstack(sub.basis, comp)
    inv = full.inv()
    proj = inv.submatrix(range(sub.dim, ambient), range(ambient))
    return proj, ambient - sub.dim


class Subquotient:
    """top / bottom with bottom contained in top, both subspaces of one ambient space.

    ``lifts`` holds representatives of a basis of the quotient; ``coords`` maps a
    vector of ``top`` to its coordinates in that basis.
    """

    def __init__(self, top: Subspace, bottom: Subspace):
        _check_ambient(top, bottom)
        self.top = top
        self.bottom = bottom
        n, k, b = top.ambient_dim, top.dim, bottom.dim
        # top.basis is the identity on its pivot rows, so a vector of top has its
        # top-coordinates on those rows; work in that k-dimensional space
        piv = top.pivots()
        Bc = bottom.basis.submatrix(piv, range(b))
        if b and top.basis @ Bc != bottom.basis:
            raise LinAlgError("subquotient bottom is not contained in top")
        _, p2 = rref(hstack(Bc, Matrix.identity(k)))
        extra = [p - b for p in p2 if p >= b]
        self.lifts = top.basis.submatrix(range(n), extra)
        cur = hstack(Bc, Matrix.identity(k).submatrix(range(k), extra)) if k else Matrix.zeros(0, 0)
        sq = cur.inv() if k else cur
        flat = [[flint.fmpq(0)] * n for _ in range(len(extra))]
        for a in range(len(extra)):
            for c, r in enumerate(piv):
                flat[a][r] = sq[b + a, c]
        self._proj = Matrix(flint.fmpq_mat(len(extra), n, [x for row in flat for x in row]))

    @property
    def dim(self) -> int:
        return self.lifts.cols

    def coords(self, v: Matrix, check: bool = True) -> Matrix:
        if check and not self.top.contains(v):
            raise NotWellDefined("vector does not lie in the subquotient numerator")
        return self._proj @ v

    def is_zero_class(self, v: Matrix) -> bool:
        return self.bottom.contains(v)


def induced_map(f: Matrix, src_sub: Subspace, src_quot: Subspace,
                dst_sub: Subspace, dst_quot: Subspace) -> Matrix:
    """Matrix of f on src_sub/src_quot -> dst_sub/dst_quot in the Subquotient lift bases."""
    if f.cols != src_sub.ambient_dim or f.rows != dst_sub.ambient_dim:
        raise LinAlgError("induced_map: dimension mismatch")
    if not dst_sub.contains(f @ src_sub.basis):
        raise NotWellDefined("map does not send the source numerator into the target numerator")
    if not dst_quot.contains(f @ src_quot.basis):
        raise NotWellDefined("map does not send the source denominator into the target denominator")
    src = Subquotient(src_sub, src_quot)
    dst = Subquotient(dst_sub, dst_quot)
    return dst.coords(f @ src.lifts, check=False)


# -- symmetric forms -------------------------------------------------------


@dataclass(frozen=True)
class SymmetricForm:
    matrix: Matrix

    def __post_init__(self):
        m = self.matrix
        if not m.is_square():
            raise LinAlgError("form matrix must be square")
        for i in range(m.rows):
            for j in range(i + 1, m.cols):
                if m[i, j] != m[j, i]:
                    raise LinAlgError(
                        f"form is not symmetric: entry ({i},{j})={fstr(m[i, j])} "
                        f"but ({j},{i})={fstr(m[j, i])}")

    @property
    def dim(self) -> int:
        return self.matrix.rows


def congruence_diagonal(matrix: Matrix) -> list[flint.fmpq]:
    """Diagonal entries of a form congruent to ``matrix`` (symmetric Gaussian elimination).

    A zero diagonal with a nonzero off-diagonal entry is handled by the 2x2
    hyperbolic pivot e_i +/- e_j.
    """
    n = matrix.rows
    a = [[matrix[i, j] for j in range(n)] for i in range(n)]
    alive = list(range(n))
    diag = []
    while alive:
        piv = next((i for i in alive if a[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in alive for j in alive if j > i and a[i][j] != 0), None)
            if pair is None:
                diag.extend(flint.fmpq(0) for _ in alive)
                break
            i, j = pair
            # replace e_i by e_i + e_j: new a_ii = 2 a_ij != 0
            for k in range(n):
                a[i][k] = a[i][k] + a[j][k]
            for k in range(n):
                a[k][i] = a[k][i] + a[k][j]
            piv = i
        p = a[piv][piv]
        alive.remove(piv)
        for i in alive:
            c = a[i][piv] / p
            if c == 0:
                continue
            for k in alive:
                a[i][k] -= c * a[piv][k]
            a[i][piv] = flint.fmpq(0)
        for i in alive:
            a[piv][i] = flint.fmpq(0)
        diag.append(p)
    return diag


def signature(form: SymmetricForm | Matrix) -> tuple[int, int, int]:
    """(positive, negative, null) inertia counts of a symmetric rational form."""
    if isinstance(form, Matrix):
        form = SymmetricForm(form)
    d = congruence_diagonal(form.matrix)
    pos = sum(1 for x in d if x > 0)
    neg = sum(1 for x in d if x < 0)
    return pos, neg, form.dim - pos - neg


def sign(form: SymmetricForm | Matrix) -> int:
    pos, neg, _ = signature(form)
    return pos - neg
