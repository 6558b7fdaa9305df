"""The nine acceptance criteria, each under its time budget.

Every criterion prints one PASS/FAIL line (collected in the "acceptance
criteria" section of the pytest summary).  Also runnable directly:

    python tests/test_acceptance.py
"""

import itertools
import json
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "scripts"))

import build_corpus as B  # noqa: E402
import oracles as O  # noqa: E402
from check_corpus import corpus_files, filtered_data  # noqa: E402
from lflat import cli, io  # noqa: E402
from lflat import complexes as cx  # noqa: E402
from lflat.exactla import Matrix, Subspace, block_diag, signature  # noqa: E402
from lflat.lgroups import classify, classify_many, direct_sum, reduce_fully  # noqa: E402
from lflat.pushfwd import (FlatFiberBundle, compose_bundles, pi_L_well_defined_check,  # noqa: E402
                           tau_fibration)
from lflat.repcat import DualityStructure, MatrixGroupRep  # noqa: E402
from lflat.sheaves import OrientedComplex, cohomology, local_system_from_rep, poincare_pairing  # noqa: E402
from lflat.specseq import compute_pages, lagrangian_bicomplex, tau_lagrangian  # noqa: E402
from systems import MANIFOLDS, random_duality_system, symplectic_circle_system  # noqa: E402

GROUPS = sorted(O.CATALOG)
CIRCLE = OrientedComplex.orient(cx.circle())


def corpus_entries(*commands):
    out = []
    for path in corpus_files():
        entry = json.loads(path.read_text())
        if not commands or entry["command"] in commands:
            out.append((path.stem, entry))
    return out


def random_invertible(rng, k, spread=3):
    lower = [[rng.randint(-spread, spread) if j < i else int(i == j) for j in range(k)] for i in range(k)]
    upper = [[rng.randint(-spread, spread) if j > i else rng.choice([1, -1, 2]) * (i == j)
              for j in range(k)] for i in range(k)]
    return Matrix(lower) @ Matrix(upper)


# -- the criteria; each returns a short detail string and raises AssertionError on failure ---------


def signatures():
    rng = random.Random(1)
    for _ in range(200):
        n = rng.randint(0, 8)
        rows = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                rows[i][j] = rows[j][i] = rng.randint(-4, 4)
        got = signature(Matrix(rows, cols=n))
        want = O.congruence_signature(rows)
        assert got == want, f"{rows}: {got} != {want}"
    return "200 symmetric matrices"


def circle_cohomology():
    rng = random.Random(2)
    X = cx.circle()
    nontrivial = 0
    for _ in range(50):
        k = rng.randint(1, 4)
        # blocks with eigenvalue 1 (identity, Jordan) mixed with others, then conjugated
        blocks, size = [], 0
        while size < k:
            kind = rng.choice(["one", "jordan", "minus", "two"]) if k - size >= 2 else rng.choice(["one", "minus"])
            blk = {"one": [[1]], "minus": [[-1]], "two": [[2, 1], [0, 3]], "jordan": [[1, 1], [0, 1]]}[kind]
            blocks.append(Matrix(blk))
            size += len(blk)
        P = random_invertible(rng, k)
        A = P @ block_diag(*blocks) @ P.inv()
        res = cohomology(X, local_system_from_rep(X, MatrixGroupRep(("e1-2",), (A,), dim=k)))
        h0, h1 = O.circle_cohomology(A.tolist())
        assert res.dims == (h0, h1), f"{A.tolist()}: {res.dims} != {(h0, h1)}"
        if h0:
            at_base = Subspace(k, res.representatives[0].submatrix(range(k), range(h0)))
            fixed = Subspace(k, Matrix(O.nullspace(A.flint - O._identity(k))))
            assert at_base == fixed, "H^0 is not ker(A - I)"
        nontrivial += h0 > 0
    return f"50 monodromies, {nontrivial} with H^0 != 0"


def pairing_perfectness():
    counts = {}
    for name in sorted(MANIFOLDS):
        rng = random.Random("acceptance " + name)
        for _ in range(20):
            ds = random_duality_system(name, rng)
            res = poincare_pairing(ds.manifold, ds.system, ds.dual, require_perfect=False)
            n = ds.manifold.dim
            for i, p in enumerate(res.pairings):
                assert p.rows == p.cols == res.dims[n - i], f"{name}: H^{i} x H^{n - i} is not square"
                assert p.rows == 0 or p.flint.det() != 0, f"{name}: pairing on H^{i} is singular"
            counts[name] = counts.get(name, 0) + 1
    return ", ".join(f"{k} {v}" for k, v in counts.items())


def classification():
    rng = random.Random(4)
    cohorts = {}
    reductions = 0
    for k in range(100):
        group, eps = GROUPS[k % 5], (k // 5) % 2
        g = O.planted_generator(group, eps, rng, 6)
        gen = io.generator(g.to_json())
        nf = classify(gen).invariants()
        image = O.OracleGroup.of(g)
        residue, steps = O.bruteforce_reduce(g, image)
        brute = O.oracle_normal_form(residue, group, image) if residue.dim else {}
        assert nf == brute == O.oracle_normal_form(g, group, image), \
            f"{group} eps={eps}: classify {nf}, brute-force residue {brute}"
        assert reduce_fully(gen)[0].dim == residue.dim, f"{group} eps={eps}: residue dims differ"
        reductions += bool(steps)
        cohorts.setdefault((group, eps), []).append(gen)
    pairs = 0
    for gens in cohorts.values():
        for a, b in itertools.combinations(gens, 2):
            na, nb, nab = classify_many([a, b, direct_sum(a, b)])
            assert na + nb == nab, f"additivity fails: {na} + {nb} != {nab}"
            pairs += 1
    return f"100 generators ({reductions} reducible), {pairs} pairs additive"


def _corpus_filtered_complexes():
    """(label, filtered complex, q-forms or None) for every filtered complex the corpus builds."""
    out = []
    for name, e in corpus_entries("tau-lagrangian"):
        j = e["job"]
        M = io.oriented(j["manifold"])
        F = io.system(j["system"], M.base)
        dual = io.duality(j["duality"])
        L = io.subspace(j["lagrangian"], dual.dim, "lagrangian")
        bic, blocks = lagrangian_bicomplex(M, F, dual, L)
        out.append((name, bic.total(), tau_lagrangian(M, F, dual, L)))
    for name, e in corpus_entries("tau-fibration", "pushforward-ex"):
        b = io.bundle(e["job"]["bundle"])
        base = io.oriented(e["job"]["bundle"]["base"])
        out.append((name, b.leray_serre().total(), tau_fibration(b, base, io.duality(e["job"]["duality"]))))
    for name, e in corpus_entries("compose-check"):
        j = e["job"]
        mid = io.oriented(j["mid"])
        cb = compose_bundles(io.bundle(j["inner"]), mid, io.complex_(j["base"]), io.bundle_maps(j["maps"]))
        for part in ("inner", "outer", "composite"):
            out.append((f"{name}:{part}", getattr(cb, part).leray_serre().total(), None))
    return out


def spectral_sequences():
    n = 0
    for label, fc, tau in _corpus_filtered_complexes():
        ss = compute_pages(fc)
        fd = filtered_data(fc)
        H = O.cohomology_of(fd)
        assert [ss.infinity.total_dim(k) for k in range(fc.top + 1)] == H, f"{label}: E_inf does not give H"
        for page in ss.pages:
            for (p, k), d in page.diffs.items():
                nxt = page.diffs.get((p + page.r, k + 1))
                if nxt is not None and nxt.cols and d.rows:
                    assert (nxt @ d).is_zero(), f"{label}: d_{page.r}^2 != 0 at {(p, k)}"
        if tau is not None:
            for form in tau.forms:
                assert form.matrix.T == form.matrix, f"{label}: Q_{form.r} is not symmetric"
        n += 1
    return f"{n} filtered complexes"


def tau_properties():
    rng = random.Random(6)
    trivial = tau_lagrangian(CIRCLE, *symplectic_circle_system(Matrix.zeros(1, 1)))
    assert trivial.tau == 0, f"trivial circle has tau {trivial.tau}"
    samples = []
    for _ in range(12):
        k = rng.randint(1, 2)
        S = [[0] * k for _ in range(k)]
        for i in range(k):
            for j in range(i, k):
                S[i][j] = S[j][i] = rng.randint(-2, 2)
        A = random_invertible(rng, k, 1) if rng.random() < 0.5 else None
        samples.append((Matrix(S), A))
    taus = []
    for S, A in samples:
        F, dual, L = symplectic_circle_system(S, A)
        t = tau_lagrangian(CIRCLE, F, dual, L).tau
        assert tau_lagrangian(CIRCLE, F, dual.negate(), L).tau == -t, "tau(-q) != -tau"
        taus.append((F, dual, L, t))
    for (Fa, da, La, ta), (Fb, db, Lb, tb) in zip(taus, taus[1:]):
        dual = DualityStructure(1, block_diag(da.q, db.q))
        L = Subspace(da.dim + db.dim, block_diag(La.basis, Lb.basis))
        t = tau_lagrangian(CIRCLE, Fa.direct_sum(Fb), dual, L).tau
        assert t == ta + tb, f"tau of a sum {t} != {ta} + {tb}"
    return f"taus {[t for *_, t in taus]}"


def fibrations():
    rng = random.Random(7)
    shapes = [("circle", "circle", 1), ("circle", "sphere", 0), ("circle", "torus", 0), ("torus", "circle", 0)]
    count = 0
    for base_name, fibre, eps in shapes:
        X = {"circle": cx.circle, "torus": cx.torus}[base_name]()
        for _ in range(3):
            ds = random_duality_system(fibre, rng)
            while ds.dual.epsilon != eps:
                ds = random_duality_system(fibre, rng)
            bundle = FlatFiberBundle.product(X, ds.manifold, ds.system)
            t = tau_fibration(bundle, cx.oriented(X), ds.dual).tau
            assert t == 0, f"product {base_name} x {fibre} has tau {t}"
            count += 1
    bundle, q, logs = B.d2_bundle()
    res = tau_fibration(bundle, cx.oriented(cx.torus()), DualityStructure(0, q))
    model = O.lie_tau([n.flint for n in logs], q.flint)
    e2 = {(p, k): c.dim for (p, k), c in res.sequence.page(2).cells.items() if c.dim}
    want = {k: v for k, v in model["pages"][2].items() if v}
    assert e2 == want, f"E_2 {e2} != brute force {want}"
    rank = sum(m.rank() for m in res.sequence.page(2).diffs.values())
    assert rank == model["d_ranks"][2] > 0, f"d_2 rank {rank} != brute force {model['d_ranks'][2]}"
    assert res.tau == model["tau"], f"tau {res.tau} != brute force {model['tau']}"
    return f"{count} products with tau 0; d_2 rank {rank}, tau {res.tau} on the nontrivial bundle"


def functoriality():
    pairs = corpus_entries("compose-check")
    assert pairs, "no composable pairs in the corpus"
    for name, e in pairs:
        code, report = cli.run(e["command"], e["job"], cli.Options(0, 32))
        assert code == cli.EXIT_OK, f"{name}: exit {code}"
        res = report["result"]
        if not (res["checks"]["classify_agree"] and res["checks"]["z_agree"]):
            j = e["job"]
            mid = io.oriented(j["mid"])
            cb = compose_bundles(io.bundle(j["inner"]), mid, io.complex_(j["base"]), io.bundle_maps(j["maps"]))
            pages = {part: cli.page_data(compute_pages(getattr(cb, part).leray_serre().total()))
                     for part in ("inner", "outer", "composite")}
            print(json.dumps({"job": name, "result": res, "pages": pages}, indent=1))
            raise AssertionError(f"{name}: iterated and composed pushforwards disagree")
    return f"{len(pairs)} composable pairs"


def well_definedness():
    n = 0
    for name, e in corpus_entries():
        j = e["job"]
        if "lagrangian" not in j:
            continue
        dual = io.duality(j["duality"])
        L = io.subspace(j["lagrangian"], dual.dim, "lagrangian")
        if "bundle" in j:
            bundle = io.bundle(j["bundle"])
        else:
            # a local system on M is the pushforward along M -> point
            M = io.oriented(j["manifold"])
            bundle = FlatFiberBundle.product(cx.points(1), M, io.system(j["system"], M.base))
        rep = pi_L_well_defined_check(bundle, dual, L)
        assert rep.status == "reduced", f"{name}: {rep.status} with residue of dim {rep.residue_dim}"
        n += 1
    return f"{n} corpus generators with a lagrangian"


CRITERIA = [
    (1, "signature vs congruence", 1, signatures),
    (2, "circle H^0/H^1 = ker/coker(A - I)", 5, circle_cohomology),
    (3, "pairing perfectness", 30, pairing_perfectness),
    (4, "classify vs brute force, additivity", 120, classification),
    (5, "spectral sequences on corpus complexes", 60, spectral_sequences),
    (6, "tau additive, odd, zero on trivial circle", 30, tau_properties),
    (7, "fibration tau: products and nontrivial d_2", 60, fibrations),
    (8, "functoriality on composable pairs", 120, functoriality),
    (9, "pi_L well-defined on corpus lagrangians", 120, well_definedness),
]


def evaluate(number, title, budget, body):
    t0 = time.perf_counter()
    try:
        detail, err = body(), None
    except AssertionError as exc:
        detail, err = None, str(exc) or "assertion failed"
    dt = time.perf_counter() - t0
    ok = err is None and dt < budget
    why = err or (detail if dt < budget else f"over budget: {detail}")
    return ok, f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}  ({dt:.2f}s / {budget}s)  {why}"


@pytest.mark.parametrize("number, title, budget, body", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_criterion(number, title, budget, body, acceptance_log):
    ok, line = evaluate(number, title, budget, body)
    acceptance_log.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(*c) for c in CRITERIA]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
