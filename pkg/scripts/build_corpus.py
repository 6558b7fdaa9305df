"""Write the job files in corpus/ (CLI inputs with their oracle values).

    python scripts/build_corpus.py [--out corpus]

Every job carries an "oracle" block: the expected values and the name of the
check in scripts/check_corpus.py that recomputes them independently.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import flint

from lflat import complexes as cx
from lflat.exactla import Matrix
from lflat.pushfwd import BundleMap, FlatFiberBundle, Transition
from lflat.sheaves import LocalSystem

I1, I2 = Matrix.identity(1), Matrix.identity(2)


def mat(m: Matrix) -> list:
    return m.to_json()


def std(name: str, *args) -> dict:
    return {"standard": name, "args": list(args)} if args else {"standard": name}


def expm_nilpotent(N: Matrix) -> Matrix:
    out = term = Matrix.identity(N.rows)
    for k in range(1, N.rows + 1):
        term = term @ N * flint.fmpq(1, k)
        out = out + term
    return out


def circle_system(A: Matrix) -> dict:
    """Rank-k system on the 3-vertex circle with holonomy A at vertex 0."""
    return {"stalk_dim": A.rows, "monodromy": {"e1-2": mat(A)}}


# -- bundles ------------------------------------------------------------------------------------


def torus_base_bundle(fiber_hol: Matrix, B1: Matrix, B2: Matrix) -> FlatFiberBundle:
    """S^1-fibre bundle over the 3x3 torus; base loops act by B1, B2 on every fibre stalk."""
    base = cx.torus()
    k = fiber_hol.rows
    F = LocalSystem(k, {(0, 2): fiber_hol.inv()})

    def wrap(x, y):
        return 1 if (x, y) == (2, 0) else -1 if (x, y) == (0, 2) else 0

    tr = {}
    for (u, v) in base.edges:
        (a, b), (a2, b2) = divmod(u, 3), divmod(v, 3)
        m = (B1 ** wrap(a, a2)) @ (B2 ** wrap(b, b2))
        if m != Matrix.identity(k):
            tr[(u, v)] = Transition((0, 1, 2), (m,) * 3)
    return FlatFiberBundle(base, cx.oriented(cx.circle()), F, tr)


def truncated_polynomial_algebra():
    """A = Q[s,t]/(s^3,t^3) with socle form q(a,b) = (-1)^deg(b) [ab]_{s^2 t^2}; s,t act q-skew."""
    basis = [(i, j) for i in range(3) for j in range(3)]
    idx = {b: n for n, b in enumerate(basis)}

    def mult(di, dj):
        m = flint.fmpq_mat(9, 9)
        for (i, j) in basis:
            if i + di < 3 and j + dj < 3:
                m[idx[(i + di, j + dj)], idx[(i, j)]] = 1
        return Matrix(m)

    q = Matrix([[(-1) ** (b[0] + b[1]) if (a[0] + b[0], a[1] + b[1]) == (2, 2) else 0
                 for b in basis] for a in basis])
    return q, mult(1, 0), mult(0, 1)


def d2_bundle():
    """Nontrivial d_2: unipotent monodromies exp(N) with N in span(s, t, s^2 t, s t^2)."""
    q, S, T = truncated_polynomial_algebra()
    odd = [S, T, S @ S @ T, S @ T @ T]
    coeffs = [(-1, -1, -1, -1), (-1, 0, -1, -1), (0, 0, -1, -1)]
    Na, Nb, Nc = (sum((o * c for c, o in zip(cs, odd)), Matrix.zeros(9, 9)) for cs in coeffs)
    bundle = torus_base_bundle(expm_nilpotent(Nc), expm_nilpotent(Na), expm_nilpotent(Nb))
    return bundle, q, (Na, Nb, Nc)


def sphere_rotation_bundle(k: int, coeff: Matrix) -> FlatFiberBundle:
    rot = (1, 2, 0, 3)
    return FlatFiberBundle.from_monodromy(cx.circle(), cx.oriented(cx.sphere(2)), LocalSystem.trivial(k),
                                          {"e1-2": Transition(rot, (coeff,) * 4)})


SWAP, ID2 = (1, 0), (0, 1)


def _compose(a, b):
    return tuple(a[b[x]] for x in range(2))


def _inverse(a):
    return tuple(sorted(range(2), key=lambda x: a[x]))


def twisted_double_cover(mid, gauge, k: int) -> FlatFiberBundle:
    """Two sheets over ``mid``, relabelled by a per-vertex gauge (a coboundary)."""
    tr = {}
    for (u, v) in mid.edges:
        vm = _compose(gauge[v], _inverse(gauge[u]))
        if vm != ID2:
            tr[(u, v)] = Transition(vm, (Matrix.identity(k),) * 2)
    return FlatFiberBundle(mid, cx.oriented(cx.points(2)), LocalSystem.trivial(k), tr)


def sheet_swap_lift(gauge, rot, sheet0: Matrix, sheet1: Matrix) -> BundleMap:
    lifts = []
    for m in range(len(rot)):
        vm = _compose(gauge[rot[m]], _compose(SWAP, _inverse(gauge[m])))
        glob = _inverse(gauge[m])
        lifts.append(Transition(vm, tuple(sheet0 if glob[x] == 0 else sheet1 for x in range(2))))
    return BundleMap(tuple(rot), tuple(lifts))


# -- the corpus -----------------------------------------------------------------------------------


def jobs() -> dict[str, dict]:
    out = {}
    closed = ["circle", "sphere", "torus", "three_torus", "sphere_times_circle"]

    out["cohomology_circle_trivial"] = {
        "command": "cohomology",
        "job": {"complex": std("circle"), "system": {"stalk_dim": 1}},
        "oracle": {"H": [1, 1], "check": "circle_cohomology"},
    }
    A = Matrix([[2, 1], [1, 1]])
    out["cohomology_circle_hyperbolic_monodromy"] = {
        "command": "cohomology",
        "job": {"complex": std("circle"), "system": circle_system(A)},
        "oracle": {"H": [0, 0], "check": "circle_cohomology"},
    }
    U = Matrix([[1, 1, 0], [0, 1, 0], [0, 0, -1]])
    out["cohomology_circle_unipotent"] = {
        "command": "cohomology",
        "job": {"complex": std("circle"), "system": circle_system(U)},
        "oracle": {"H": [1, 1], "check": "circle_cohomology"},
    }
    out["holonomy_circle"] = {
        "command": "holonomy",
        "job": {"complex": std("circle"), "system": circle_system(A)},
        "oracle": {"generators": {"e1-2": mat(A)}, "check": "circle_cohomology"},
    }
    for name in closed:
        out[f"pairing_{name}"] = {
            "command": "pairing",
            "job": {"manifold": std(name), "system": {"stalk_dim": 1},
                    "duality": {"epsilon": 0, "q": [[1]]}},
            "oracle": {"perfect": True, "check": "poincare"},
        }

    z3 = Matrix([[0, -1], [1, -1]])
    q_z3 = Matrix([[2, -1], [-1, 2]])
    out["classify_z3_rotation"] = {
        "command": "classify",
        "job": {"generator": {"rep": {"generators": {"g": mat(z3)}, "relations": [[["g", 3]]]},
                              "duality": {"epsilon": 0, "q": mat(q_z3)}}},
        "oracle": {"invariants": {"Complex": 1}, "group": "Z3", "check": "classify"},
    }
    out["classify_z3_symplectic"] = {
        "command": "classify",
        "job": {"generator": {"rep": {"generators": {"g": mat(z3)}},
                              "duality": {"epsilon": 1, "q": [[0, 1], [-1, 0]]}}},
        "oracle": {"invariants": {"Complex": -1}, "group": "Z3", "check": "classify"},
    }
    qi = Matrix([[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]])
    qj = Matrix([[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]])
    out["classify_q8_pair"] = {
        "command": "classify",
        "job": {"generators": [
            {"rep": {"generators": {"i": mat(qi), "j": mat(qj)}},
             "duality": {"epsilon": 0, "q": mat(Matrix.identity(4))}},
            {"rep": {"generators": {"i": mat(qi), "j": mat(qj)}},
             "duality": {"epsilon": 0, "q": mat(Matrix.identity(4) * -2)}},
        ]},
        "oracle": {"additive": True, "group": "Q8", "check": "classify"},
    }
    out["classify_diag_trivial_group"] = {
        "command": "classify",
        "job": {"generator": {"rep": {"generators": {}, "dim": 3},
                              "duality": {"epsilon": 0, "q": [[1, 0, 0], [0, 1, 0], [0, 0, -1]]}}},
        "oracle": {"invariants": {"Real": 1}, "group": "1", "check": "classify"},
    }
    out["reduce_hyperbolic_plane_pair"] = {
        "command": "reduce",
        "job": {"generator": {"rep": {"generators": {}, "dim": 4},
                              "duality": {"epsilon": 0, "q": mat(Matrix.diag([1, 1, -1, -1]))}},
                "isotropic": [[1, 0, 1, 0]]},
        "oracle": {"residue_dim": 2, "group": "1", "check": "classify"},
    }
    out["reduce_search_z2"] = {
        "command": "reduce",
        "job": {"generator": {"rep": {"generators": {"g": mat(Matrix.diag([1, -1, 1, -1]))}},
                              "duality": {"epsilon": 0, "q": mat(Matrix.diag([1, 1, -1, 1]))}}},
        "oracle": {"residue_dim": 2, "group": "Z2", "check": "classify"},
    }

    sympl = [[0, 1], [-1, 0]]
    out["tau_lagrangian_circle_trivial"] = {
        "command": "tau-lagrangian",
        "job": {"manifold": std("circle"), "system": {"stalk_dim": 2},
                "duality": {"epsilon": 1, "q": sympl}, "lagrangian": [[1, 0]], "z": 0},
        "oracle": {"tau": 0, "check": "pages"},
    }
    shear = Matrix([[1, 1], [0, 1]])
    out["tau_lagrangian_circle_shear"] = {
        "command": "tau-lagrangian",
        "job": {"manifold": std("circle"), "system": circle_system(shear),
                "duality": {"epsilon": 1, "q": sympl}, "lagrangian": [[1, 0]], "z": 3},
        "oracle": {"tau": -2, "z_after_reduction": 1, "check": "pages"},
    }

    product = FlatFiberBundle.product(cx.circle(), cx.oriented(cx.circle()), LocalSystem.trivial(2))
    out["tau_fibration_product"] = {
        "command": "tau-fibration",
        "job": {"bundle": product.to_json(), "duality": {"epsilon": 1, "q": sympl}},
        "oracle": {"tau": 0, "check": "pages"},
    }
    bundle, q9, logs = d2_bundle()
    out["tau_fibration_nontrivial_d2"] = {
        "command": "pushforward-ex",
        "job": {"bundle": bundle.to_json(), "duality": {"epsilon": 0, "q": mat(q9)}, "z": 7},
        "oracle": {"tau": 0, "d2_rank": 2, "z_out": 7,
                   "e2_dims": {"0,0": 1, "0,1": 2, "1,0": 3, "1,1": 3, "2,0": 2, "2,1": 1},
                   "nilpotent_logs": [mat(N) for N in logs], "check": "lie_model"},
    }

    out["pushforward_sphere_rotation"] = {
        "command": "pushforward",
        "job": {"bundle": sphere_rotation_bundle(1, I1).to_json(), "duality": {"epsilon": 0, "q": [[1]]}},
        "oracle": {"R_dims": [1, 0, 1], "check": "pushforward"},
    }
    circ = FlatFiberBundle.product(cx.circle(), cx.oriented(cx.circle()),
                                   LocalSystem(1, {(0, 2): Matrix([[-1]])}))
    out["pushforward_circle_fibre_sign"] = {
        "command": "pushforward",
        "job": {"bundle": circ.to_json(), "duality": {"epsilon": 0, "q": [[1]]}},
        "oracle": {"R_dims": [0, 0], "check": "pushforward"},
    }
    tor = FlatFiberBundle.product(cx.circle(), cx.oriented(cx.torus()), LocalSystem.trivial(1))
    out["pushforward_torus_fibre"] = {
        "command": "pushforward",
        "job": {"bundle": tor.to_json(), "duality": {"epsilon": 0, "q": [[1]]}},
        "oracle": {"R_dims": [1, 2, 1], "check": "pushforward"},
    }
    hyp = [[0, 1], [1, 0]]
    out["pushforward_lagrangian_product"] = {
        "command": "pushforward",
        "job": {"bundle": FlatFiberBundle.product(cx.circle(), cx.oriented(cx.sphere(2)),
                                                  LocalSystem.trivial(2)).to_json(),
                "duality": {"epsilon": 0, "q": hyp}, "lagrangian": [[1, 0]]},
        "oracle": {"status": "reduced", "check": "pushforward"},
    }
    out["pushforward_lagrangian_rotation"] = {
        "command": "pushforward",
        "job": {"bundle": sphere_rotation_bundle(2, -I2).to_json(),
                "duality": {"epsilon": 0, "q": hyp}, "lagrangian": [[1, 0]]},
        "oracle": {"status": "reduced", "check": "pushforward"},
    }
    tor_mono = FlatFiberBundle.from_monodromy(
        cx.circle(), cx.oriented(cx.torus7()), LocalSystem.trivial(2),
        {"e1-2": Transition(tuple(2 * i % 7 for i in range(7)), (-I2,) * 7)})
    out["pushforward_lagrangian_torus_rotation"] = {
        "command": "pushforward",
        "job": {"bundle": tor_mono.to_json(), "duality": {"epsilon": 1, "q": sympl}, "lagrangian": [[1, 0]]},
        "oracle": {"status": "reduced", "check": "pushforward"},
    }

    gauge7 = [ID2, SWAP, ID2, ID2, SWAP, ID2, SWAP]
    inner7 = twisted_double_cover(cx.torus7(), gauge7, 1)
    rot7 = tuple(2 * i % 7 for i in range(7))
    out["compose_torus7_double_cover"] = {
        "command": "compose-check",
        "job": {"inner": inner7.to_json(), "mid": std("torus7"), "base": std("circle"),
                "maps": {"1-2": sheet_swap_lift(gauge7, rot7, I1, I1).to_json()},
                "duality": {"epsilon": 0, "q": [[1]]}, "z": 5},
        "oracle": {"classify_agree": True, "z_agree": True, "check": "pushforward"},
    }
    gauge4 = [ID2, SWAP, ID2, SWAP]
    inner4 = twisted_double_cover(cx.sphere(2), gauge4, 2)
    out["compose_sphere_double_cover"] = {
        "command": "compose-check",
        "job": {"inner": inner4.to_json(), "mid": std("sphere"), "base": std("circle"),
                "maps": {"1-2": sheet_swap_lift(gauge4, (1, 2, 0, 3), Matrix.diag([1, -1]), I2).to_json()},
                "duality": {"epsilon": 0, "q": mat(I2)}, "z": 5},
        "oracle": {"classify_agree": True, "z_agree": True, "check": "pushforward"},
    }

    out["k0_ranks_signature"] = {
        "command": "k0-ranks",
        "job": {"duality": {"epsilon": 0, "q": mat(Matrix.diag([1, 1, -1]))}},
        "oracle": {"ranks": [2, 1], "check": "k0"},
    }
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "corpus"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, entry in jobs().items():
        (out / f"{name}.json").write_text(json.dumps(entry, indent=1, sort_keys=True) + "\n")
        print(name)


if __name__ == "__main__":
    main()
