"""Random flat systems with duality on the standard closed manifolds.

Systems on products of circles (and on S^2 x S^1) are pulled back from the
circle factors, with commuting monodromies A^k for one q-preserving A, so they
are flat by construction.  On S^2 the system is a gauge transform of the trivial
one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from lflat import complexes as cx
from lflat.exactla import Matrix
from lflat.repcat import DualityStructure
from lflat.sheaves import LocalSystem, OrientedComplex

# (epsilon, q, q-preserving matrices)
FORMS = [
    (0, Matrix([[1]]), [Matrix([[1]]), Matrix([[-1]])]),
    (0, Matrix([[-3]]), [Matrix([[-1]])]),
    (0, Matrix.identity(2), [Matrix([[0, -1], [1, 0]]), Matrix([[1, 0], [0, -1]])]),
    (0, Matrix([[1, 0], [0, -1]]), [Matrix([[-1, 0], [0, 1]]), Matrix([["5/4", "3/4"], ["3/4", "5/4"]])]),
    (1, Matrix([[0, 1], [-1, 0]]), [Matrix([[1, 1], [0, 1]]), Matrix([[2, 1], [1, 1]]), Matrix([[0, -1], [1, 0]])]),
]

MANIFOLDS = {
    "circle": (cx.circle, 1),
    "sphere": (cx.sphere, 0),
    "torus": (cx.torus, 2),
    "three_torus": (cx.three_torus, 3),
    "sphere_times_circle": (cx.sphere_times_circle, 1),
}


@dataclass
class DualitySystem:
    manifold: OrientedComplex
    system: LocalSystem
    dual: DualityStructure
    monodromies: list[Matrix]


def _power(a: Matrix, k: int) -> Matrix:
    return a ** k if k >= 0 else a.inv() ** (-k)


def _circle_step(a: int, b: int, A: Matrix) -> Matrix:
    """Transport a -> b along an edge of the 3-vertex circle; the edge 2 -> 0 carries A."""
    if (a, b) == (2, 0):
        return A
    if (a, b) == (0, 2):
        return A.inv()
    return Matrix.identity(A.rows)


def pulled_back_system(name: str, mons: list[Matrix]) -> LocalSystem:
    """System on a product of circle factors, vertex index in mixed radix with base 3 last."""
    X = MANIFOLDS[name][0]()
    k = mons[0].rows if mons else 1
    if name == "sphere_times_circle":
        def coords(v):
            return [v % 3]
    else:
        def coords(v):
            out = []
            for _ in range(len(mons)):
                out.append(v % 3)
                v //= 3
            return out
    tr = {}
    for (u, v) in X.edges:
        m = Matrix.identity(k)
        for A, a, b in zip(mons, coords(u), coords(v)):
            m = _circle_step(a, b, A) @ m
        if m != Matrix.identity(k):
            tr[(u, v)] = m
    return LocalSystem(k, tr)


def random_duality_system(name: str, rng: random.Random) -> DualitySystem:
    make, circles = MANIFOLDS[name]
    eps_q, q, pres = rng.choice(FORMS)
    M = OrientedComplex.orient(make())
    A = rng.choice(pres)
    mons = [_power(A, rng.choice([-1, 0, 1, 2])) for _ in range(circles)]
    if circles:
        F = pulled_back_system(name, mons)
    else:
        gauge = [rng.choice(pres) for _ in range(M.base.vertices)]
        tr = {(u, v): gauge[v] @ gauge[u].inv() for (u, v) in M.base.edges}
        F = LocalSystem(q.rows, {e: m for e, m in tr.items() if m != Matrix.identity(q.rows)})
    F.check_flat(M.base)
    return DualitySystem(M, F, DualityStructure(eps_q, q), mons)


def symplectic_circle_system(S: Matrix, A: Matrix | None = None):
    """(system, duality, lagrangian) on the 3-vertex circle.

    Monodromy [[A, A S], [0, A^-T]] on Q^2k with S symmetric preserves the
    standard symplectic form and the lagrangian L spanned by the first k vectors.
    """
    from lflat.exactla import Subspace, hstack, vstack
    k = S.rows
    A = A if A is not None else Matrix.identity(k)
    mono = vstack(hstack(A, A @ S), hstack(Matrix.zeros(k, k), A.inv().T))
    q = vstack(hstack(Matrix.zeros(k, k), Matrix.identity(k)), hstack(-Matrix.identity(k), Matrix.zeros(k, k)))
    X = cx.circle()
    F = LocalSystem(2 * k, {(1, 2): mono}) if mono != Matrix.identity(2 * k) else LocalSystem.trivial(2 * k)
    L = Subspace(2 * k, vstack(Matrix.identity(k), Matrix.zeros(k, k)))
    F.check_flat(X)
    return F, DualityStructure(1, q), L
