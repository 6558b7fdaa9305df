"""Hypothesis strategies for small rational matrices and forms."""

from fractions import Fraction

from hypothesis import strategies as st

from lflat.exactla import Matrix

small_ints = st.integers(min_value=-4, max_value=4)
rationals = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def matrices(draw, rows=None, cols=None, max_dim=5, entries=small_ints):
    r = draw(st.integers(0, max_dim)) if rows is None else rows
    c = draw(st.integers(0, max_dim)) if cols is None else cols
    return Matrix([[draw(entries) for _ in range(c)] for _ in range(r)], cols=c)


@st.composite
def symmetric_matrices(draw, max_dim=8, entries=small_ints):
    n = draw(st.integers(0, max_dim))
    a = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i, n):
            a[i][j] = a[j][i] = draw(entries)
    return Matrix(a, cols=n)


@st.composite
def invertible_matrices(draw, n, entries=small_ints):
    """L @ U with unit-free nonzero diagonal, so always invertible."""
    lower = [[draw(entries) if j < i else int(i == j) for j in range(n)] for i in range(n)]
    upper = [[draw(entries) if j > i else 0 for j in range(n)] for i in range(n)]
    for i in range(n):
        upper[i][i] = draw(st.sampled_from([1, -1, 2, -2]))
    return Matrix(lower, cols=n) @ Matrix(upper, cols=n)


@st.composite
def planted_filtered_complexes(draw, top=3, max_p=3, max_items=6):
    """(FilteredComplex, expected page dims) built from known pieces.

    A free class at (p, n) survives to E_infinity.  A pair x -> y with x at
    (p, n) and y at (p + s, n + 1) lives on E_1 .. E_s and is killed by d_s
    (s = 0 means it never reaches E_1).  Each C^n is then scrambled by a
    random filtration-preserving automorphism.  ``expect(r)`` gives
    {(p, n): dim E_r^{p,n}}, with r = None for E_infinity.
    """
    from lflat.sheaves import CochainComplex
    from lflat.specseq import FilteredComplex

    degrees = [[] for _ in range(top + 1)]
    pairs = []                      # (index of x in C^n, index of y in C^{n+1}, n, s)
    free = []
    for _ in range(draw(st.integers(1, max_items))):
        if draw(st.booleans()):
            n, p = draw(st.integers(0, top)), draw(st.integers(0, max_p))
            degrees[n].append(p)
            free.append((p, n))
        else:
            n = draw(st.integers(0, top - 1))
            p = draw(st.integers(0, max_p))
            s = draw(st.integers(0, max_p - p))
            degrees[n].append(p)
            degrees[n + 1].append(p + s)
            pairs.append((len(degrees[n]) - 1, len(degrees[n + 1]) - 1, n, p, s))
    dims = [len(d) for d in degrees]
    raw = []
    for n in range(top + 1):
        nxt = dims[n + 1] if n < top else 0
        m = [[0] * dims[n] for _ in range(nxt)]
        for i, j, k, _, _ in pairs:
            if k == n:
                m[j][i] = draw(st.sampled_from([1, -1, 2, 3]))
        raw.append(Matrix(m, cols=dims[n]))

    def scramble(n):
        # unipotent and triangular for the order (degree, index), so invertible and filtered
        key = [(p, i) for i, p in enumerate(degrees[n])]
        g = [[1 if i == j else draw(st.integers(-2, 2)) if key[i] > key[j] else 0
              for j in range(dims[n])] for i in range(dims[n])]
        return Matrix(g, cols=dims[n])

    gs = [scramble(n) for n in range(top + 1)]
    d = [gs[n + 1] @ raw[n] @ gs[n].inv() if n < top else raw[n] for n in range(top + 1)]
    fc = FilteredComplex(CochainComplex(tuple(dims), tuple(d)), tuple(tuple(x) for x in degrees))

    def expect(r):
        out = {}
        for p, n in free:
            out[(p, n)] = out.get((p, n), 0) + 1
        for _, _, n, p, s in pairs:
            if r is not None and 1 <= r <= s:
                out[(p, n)] = out.get((p, n), 0) + 1
                out[(p + s, n + 1)] = out.get((p + s, n + 1), 0) + 1
        return out

    return fc, expect
