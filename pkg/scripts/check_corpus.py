"""Run every corpus job through the CLI and compare with independent recomputation.

    python scripts/check_corpus.py [--corpus corpus] [--only NAME ...]

lflat is used to parse inputs and to assemble chain complexes; everything that
is compared (dimensions, signatures, pages, normal forms) is recomputed by
scripts/oracles.py.  Prints one line per job and exits 1 on any failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import oracles as O  # noqa: E402

from lflat import cli, io  # noqa: E402
from lflat.specseq import lagrangian_bicomplex  # noqa: E402

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def filtered_data(fc) -> O.FilteredData:
    n = len(fc.complex.dims)
    return O.FilteredData(list(fc.complex.dims), [fc.d(k).flint for k in range(n)],
                          [list(fc.degrees[k]) for k in range(n)])


def _system_cohomology(X, F) -> list[int]:
    return O.cohomology_dims(X.maximal_simplices(), F.stalk_dim, lambda u, v: F.t(u, v).flint)


def _plain(gen_json) -> O.PlainGenerator:
    rep = gen_json["rep"]
    gens = {k: O.fmat(v) for k, v in rep.get("generators", {}).items()}
    return O.PlainGenerator(gen_json["duality"]["epsilon"], gens, O.fmat(gen_json["duality"]["q"]))


def _invariants(nf: dict) -> dict[str, int]:
    return {s["irrep"]: s["invariant"] for s in nf["summands"]}


def _by_kind(nf: dict) -> dict[str, int]:
    out = {}
    for s in nf["summands"]:
        out[s["type"]] = out.get(s["type"], 0) + s["invariant"]
    return out


def _page_dims(report_pages, r) -> dict[str, int]:
    for pg in report_pages:
        if pg.get("r") == r:
            return pg["dims"]
    return {}


# -- checks: each returns a list of failure messages ----------------------------------------


def check_circle_cohomology(job, oracle, result):
    fails = []
    X = io.complex_(job["complex"])
    F = io.system(job["system"], X)
    if "H" in oracle:
        expect = _system_cohomology(X, F)
        if result["H"] != oracle["H"] or expect != oracle["H"]:
            fails.append(f"H: cli {result['H']}, oracle {expect}, stored {oracle['H']}")
        mono = job["system"].get("monodromy")
        if mono:
            (A,) = mono.values()
            if list(O.circle_cohomology(A)) != oracle["H"]:
                fails.append("ker/coker of A - I disagrees with the stored value")
    if "generators" in oracle and result["generators"] != oracle["generators"]:
        fails.append(f"holonomy: {result['generators']} != {oracle['generators']}")
    return fails


def check_poincare(job, oracle, result):
    fails = []
    M = io.oriented(job["manifold"])
    F = io.system(job["system"], M.base)
    dims = _system_cohomology(M.base, F)
    if result["dims"] != dims:
        fails.append(f"cohomology dims {result['dims']} != oracle {dims}")
    n = len(dims) - 1
    for i, m in enumerate(result["pairings"]):
        if dims[i] != dims[n - i]:
            fails.append(f"H^{i} and H^{n - i} differ in dimension")
        if dims[i] and O.fmat(m).det() == 0:
            fails.append(f"pairing on H^{i} is singular")
    if result["checks"]["perfect"] != oracle["perfect"]:
        fails.append("perfectness flag disagrees")
    return fails


def check_classify(job, oracle, result):
    fails = []
    group = oracle.get("group")
    if "generators" in job:
        gens = [_plain(g) for g in job["generators"]]
        total = gens[0]
        for g in gens[1:]:
            total = O.direct_sum(total, g)
        image = O.OracleGroup.of(total)
        for k, (g, nf) in enumerate(zip(gens, result["normal_forms"])):
            expect = O.oracle_normal_form(g, group, image)
            if _invariants(nf) != expect:
                fails.append(f"generator {k}: {_invariants(nf)} != oracle {expect}")
        expect_sum = O.oracle_normal_form(total, group, image)
        if _invariants(result["direct_sum"]) != expect_sum:
            fails.append(f"direct sum: {_invariants(result['direct_sum'])} != oracle {expect_sum}")
        if result["checks"]["additive"] != oracle["additive"]:
            fails.append("additivity flag disagrees")
        return fails
    g = _plain(job["generator"])
    expect = O.oracle_normal_form(g, group)
    got = _invariants(result["normal_form"])
    if got != expect:
        fails.append(f"normal form {got} != oracle {expect}")
    if "invariants" in oracle and _by_kind(result["normal_form"]) != oracle["invariants"]:
        fails.append(f"invariants by type {_by_kind(result['normal_form'])} != {oracle['invariants']}")
    if "residue_dim" in oracle:
        if result["residue_dim"] != oracle["residue_dim"]:
            fails.append(f"residue dim {result['residue_dim']} != {oracle['residue_dim']}")
        residue, _ = O.bruteforce_reduce(g)
        image = O.OracleGroup.of(g)
        if residue.dim and O.oracle_normal_form(residue, group, image) != expect:
            fails.append("brute-force residue has a different normal form")
    return fails


def check_k0(job, oracle, result):
    pos, neg, _ = O.congruence_signature(job["duality"]["q"])
    fails = []
    if result["ranks"] != [pos, neg] or oracle["ranks"] != [pos, neg]:
        fails.append(f"ranks {result['ranks']} != oracle {[pos, neg]}")
    return fails


def check_pages(job, oracle, result):
    fails = []
    tau = int(result["tau"])
    if tau != oracle["tau"]:
        fails.append(f"tau {tau} != stored {oracle['tau']}")
    if "manifold" in job:
        M = io.oriented(job["manifold"])
        F = io.system(job["system"], M.base)
        dual = io.duality(job["duality"])
        L = io.subspace(job["lagrangian"], F.stalk_dim, "lagrangian")
        bic, blocks = lagrangian_bicomplex(M, F, dual, L)
        shift = (2, M.dim + 2)
        chain = {k: v.flint for k, v in bic.total_pairing(shift, blocks).items()}
        fd = filtered_data(bic.total())
        signs = []
        for r in (1, 2):
            (pos, neg, _), sym = O.q_form_signature(fd, r, chain, shift)
            if not sym:
                fails.append(f"brute-force Q_{r} is not symmetric")
            signs.append(pos - neg)
        if 2 * sum(signs) != tau:
            fails.append(f"brute-force tau {2 * sum(signs)} != cli {tau}")
        for r in (1, 2):
            brute = {f"{p},{n - p}": d for (p, n), d in O.page_dims(fd, r).items()}
            if brute != _page_dims(result["pages"], r):
                fails.append(f"E_{r} dims {_page_dims(result['pages'], r)} != brute force {brute}")
        if "z_after_reduction" in oracle:
            if int(result["extended"]["z_after_reduction"]) != oracle["z_after_reduction"]:
                fails.append("extended z after reduction disagrees")
    return fails


def check_lie_model(job, oracle, result):
    fails = []
    logs = [O.fmat(N) for N in oracle["nilpotent_logs"]]
    model = O.lie_tau(logs, O.fmat(job["duality"]["q"]))
    tau = result["tau"]
    if int(tau["tau"]) != model["tau"] or model["tau"] != oracle["tau"]:
        fails.append(f"tau: cli {tau['tau']}, model {model['tau']}, stored {oracle['tau']}")
    e2 = {f"{p},{n - p}": d for (p, n), d in model["pages"][2].items()}
    if e2 != _page_dims(tau["pages"], 2) or e2 != oracle["e2_dims"]:
        fails.append(f"E_2: cli {_page_dims(tau['pages'], 2)}, model {e2}")
    cli_rank = sum(next(pg for pg in tau["pages"] if pg["r"] == 2)["d_ranks"].values())
    if cli_rank != model["d_ranks"][2] or cli_rank != oracle["d2_rank"]:
        fails.append(f"d_2 rank: cli {cli_rank}, model {model['d_ranks'][2]}")
    if int(result["z"]) != job["z"] - model["tau"] or int(result["z"]) != oracle["z_out"]:
        fails.append(f"z out {result['z']} != {job['z'] - model['tau']}")
    return fails


def check_pushforward(job, oracle, result):
    fails = []
    if "R_dims" in oracle:
        b = io.bundle(job["bundle"])
        fib = _system_cohomology(b.fiber.base, b.system)
        if result["R_dims"] != oracle["R_dims"] or fib != oracle["R_dims"]:
            fails.append(f"R dims: cli {result['R_dims']}, fibre cohomology {fib}")
    if "status" in oracle and result["well_defined"]["status"] != oracle["status"]:
        fails.append(f"status {result['well_defined']['status']} != {oracle['status']}")
    for key in ("classify_agree", "z_agree"):
        if key in oracle and result["checks"][key] != oracle[key]:
            fails.append(f"{key} is {result['checks'][key]}")
    if "classify_agree" in oracle:
        if result["classify_composed"] != result["classify_iterated"]:
            fails.append("composed and iterated normal forms differ")
    return fails


CHECKS = {
    "circle_cohomology": check_circle_cohomology,
    "poincare": check_poincare,
    "classify": check_classify,
    "k0": check_k0,
    "pages": check_pages,
    "lie_model": check_lie_model,
    "pushforward": check_pushforward,
}


def check_entry(entry: dict, seed: int = 0) -> tuple[int, dict, list[str]]:
    code, report = cli.run(entry["command"], entry["job"], cli.Options(seed, 32))
    if code != cli.EXIT_OK:
        return code, report, [f"exit code {code}: {report.get('error')}"]
    oracle = entry["oracle"]
    return code, report, CHECKS[oracle["check"]](entry["job"], oracle, report["result"])


def corpus_files(root: Path = CORPUS) -> list[Path]:
    return sorted(root.glob("*.json"))


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", default=str(CORPUS))
    ap.add_argument("--only", nargs="*")
    args = ap.parse_args()
    bad = 0
    for path in corpus_files(Path(args.corpus)):
        if args.only and path.stem not in args.only:
            continue
        t0 = time.perf_counter()
        _, _, fails = check_entry(json.loads(path.read_text()))
        dt = time.perf_counter() - t0
        print(f"{'PASS' if not fails else 'FAIL'} {path.stem} ({dt:.1f}s)")
        for f in fails:
            print(f"    {f}")
        bad += bool(fails)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
