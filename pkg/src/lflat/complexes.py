"""Standard triangulations used by the corpus and the tests."""

from __future__ import annotations

import itertools

from .sheaves import OrientedComplex, SimplicialComplex


def circle(n: int = 3) -> SimplicialComplex:
    return SimplicialComplex(n, [(i, (i + 1) % n) for i in range(n)])


def sphere(dim: int = 2) -> SimplicialComplex:
    """Boundary of the (dim+1)-simplex."""
    verts = range(dim + 2)
    return SimplicialComplex(dim + 2, itertools.combinations(verts, dim + 1))


def points(k: int) -> SimplicialComplex:
    return SimplicialComplex(k, [])


def torus7() -> SimplicialComplex:
    """Moebius' minimal 7-vertex torus."""
    tris = []
    for i in range(7):
        tris.append((i, (i + 1) % 7, (i + 3) % 7))
        tris.append((i, (i + 2) % 7, (i + 3) % 7))
    return SimplicialComplex(7, tris)


def _staircases(p: int, q: int):
    """Monotone lattice paths from (0,0) to (p,q) as vertex lists."""
    for ups in itertools.combinations(range(p + q), q):
        i = j = 0
        path = [(0, 0)]
        for step in range(p + q):
            if step in ups:
                j += 1
            else:
                i += 1
            path.append((i, j))
        yield path


def product(K: SimplicialComplex, L: SimplicialComplex) -> SimplicialComplex:
    """Staircase triangulation of K x L; vertex (a, b) gets index a * |L| + b."""
    nl = L.vertices
    tops = []
    for s in K.maximal_simplices():
        for t in L.maximal_simplices():
            for path in _staircases(len(s) - 1, len(t) - 1):
                tops.append([s[i] * nl + t[j] for i, j in path])
    return SimplicialComplex(K.vertices * nl, tops)


def oriented(K: SimplicialComplex) -> OrientedComplex:
    return OrientedComplex.orient(K)


def torus() -> SimplicialComplex:
    return product(circle(3), circle(3))


def three_torus() -> SimplicialComplex:
    return product(torus(), circle(3))


def sphere_times_circle() -> SimplicialComplex:
    return product(sphere(2), circle(3))
