"""lflat <command> --input job.json [--seed N] [--budget N] --output report.json"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Callable, Mapping
from dataclasses import dataclass

from . import io
from .exactla import LinAlgError, Matrix
from .lgroups import (LGenerator, LGroupError, classify, classify_many, direct_sum, find_invariant_isotropic,
                      lagrangian_verify, sublagrangian_reduce)
from .pushfwd import (BundleError, PI_LEX_FORMULA, compose_bundles,
                      compose_check, pi_L, pi_L_well_defined_check, pushforward_duality,
                      tau_fibration)
from .repcat import FiniteGroup, InfiniteGroupError, RepError, k0_grading_ranks
from .sheaves import (ComplexError, FlatnessError, PairingError, cohomology, epsilon_n, holonomy,
                      poincare_pairing)
from .specseq import SpectralError, SpectralSequence, TauResult, tau_lagrangian

EXIT_OK, EXIT_VALIDATION, EXIT_COMPUTATION, EXIT_INCONCLUSIVE = 0, 2, 3, 4

CLASSIFY_FORMULA = ("L_eps(G) tensor R = sum over irreducibles of A(F, rho): "
                    "signature / dim V on each isotypic component")
POINCARE_FORMULA = "H^i(M; F) x H^{n-i}(M; F) -> Q via cup product, q and [M]; total form (eps + eps_n)-symmetric"
PUSHFORWARD_FORMULA = "pi_*^L[F, q] = [H R pi_* F, pi_*(q)], pi_*(q) (eps + eps_n)-symmetric"
REDUCE_FORMULA = "[F, q] = [W^perp / W, q induced] for an invariant isotropic W"
EX_REDUCE_FORMULA = "(F, q, z) ~ (0, 0, z + tau) for a lagrangian L"
K0_FORMULA = "ranks of the +/- eigenbundles of the grading determined by q"


class Inconclusive(Exception):
    pass


@dataclass(frozen=True)
class Options:
    seed: int = 0
    budget: int = 32


def _matrix(m: Matrix) -> list[list[str]]:
    return m.to_json()


def _bidegrees(d: Mapping[tuple[int, int], int]) -> dict[str, int]:
    return {f"{p},{q}": v for (p, q), v in sorted(d.items())}


def page_data(ss: SpectralSequence) -> list[dict]:
    """Per page: nonzero E_r^{p,q} dims and the rank of each nonzero d_r."""
    out = []
    for page in ss.pages:
        ranks = {}
        for (p, n), m in sorted(page.diffs.items()):
            rk = m.rank()
            if rk:
                ranks[f"{p},{n - p}"] = rk
        out.append({"r": page.r, "dims": _bidegrees(page.bidegree_dims()), "d_ranks": ranks})
    out.append({"r": "infinity", "dims": _bidegrees(ss.infinity.bidegree_dims())})
    return out


def tau_report(t: TauResult) -> dict:
    return {
        "tau": t.tau,
        "formula": t.formula,
        "q_forms": [{"r": f.r, "signature": list(f.signature), "sign": f.sign} for f in t.forms],
        "pages": page_data(t.sequence),
        "checks": dict(sorted(t.checks.items())),
    }


# -- commands ---------------------------------------------------------------------------------


def cmd_cohomology(job, opt):
    X = io.complex_(io.require(job, "complex", "job"))
    F = io.system(io.require(job, "system", "job"), X, basepoint=int(job.get("basepoint", 0)))
    res = cohomology(X, F)
    C = res.complex
    dd = all((C.d[n + 1] @ C.d[n]).is_zero() for n in range(len(C.dims) - 1))
    return {"H": list(res.dims), "formula": "H^i = ker d_i / im d_{i-1} on twisted cochains",
            "checks": {"d_squared_zero": dd}}


def cmd_holonomy(job, opt):
    X = io.complex_(io.require(job, "complex", "job"))
    bp = int(job.get("basepoint", 0))
    F = io.system(io.require(job, "system", "job"), X, basepoint=bp)
    rep = holonomy(X, F, bp)
    try:
        order = FiniteGroup.image_of(rep).order
    except InfiniteGroupError:
        order = None
    return {"basepoint": bp,
            "generators": {n: _matrix(m) for n, m in zip(rep.generator_names, rep.generator_matrices)},
            "relations": [[[n, e] for n, e in w] for w in rep.relations],
            "image_order": order,
            "formula": "holonomy along spanning-tree loops, one generator per non-tree edge",
            "checks": {"flat": True, "relations_hold": True}}


def cmd_pairing(job, opt):
    M = io.oriented(io.require(job, "manifold", "job"))
    F = io.system(io.require(job, "system", "job"), M.base, basepoint=int(job.get("basepoint", 0)))
    dual = io.duality(io.require(job, "duality", "job"))
    pr = poincare_pairing(M, F, dual, require_perfect=False)
    return {"dims": list(pr.dims), "pairings": [_matrix(p) for p in pr.pairings],
            "form": _matrix(pr.form), "epsilon": pr.epsilon, "formula": POINCARE_FORMULA,
            "checks": {"perfect": pr.perfect, "symmetry_type": True}}


def _generators(job) -> list:
    if "generators" in job:
        return [io.generator(g, f"generators[{i}]") for i, g in enumerate(job["generators"])]
    return [io.generator(io.require(job, "generator", "job"))]


def cmd_classify(job, opt):
    gens = _generators(job)
    if len(gens) == 1:
        nf = classify(gens[0], seed=opt.seed)
        return {"normal_form": nf.to_json(), "formula": CLASSIFY_FORMULA,
                "checks": {"certified": nf.certified}}
    total = gens[0]
    for g in gens[1:]:
        total = direct_sum(total, g)
    forms = classify_many(gens + [total], seed=opt.seed)
    parts, whole = forms[:-1], forms[-1]
    acc = parts[0]
    for f in parts[1:]:
        acc = acc + f
    return {"normal_forms": [f.to_json() for f in parts], "direct_sum": whole.to_json(),
            "formula": CLASSIFY_FORMULA,
            "checks": {"certified": all(f.certified for f in forms), "additive": acc == whole}}


def cmd_reduce(job, opt):
    """Peel the given isotropic subspace, or search for invariant ones within the budget."""
    gen = io.generator(io.require(job, "generator", "job"))
    group = FiniteGroup.image_of(gen.representation())
    steps = []
    if "isotropic" in job:
        W = io.subspace(job["isotropic"], gen.dim, "isotropic")
        cur = sublagrangian_reduce(gen, W)
        steps.append(W.dim)
        exhausted = False
    else:
        cur = gen
        for _ in range(opt.budget):
            W = find_invariant_isotropic(cur, seed=opt.seed) if cur.dim else None
            if W is None:
                break
            steps.append(W.dim)
            cur = sublagrangian_reduce(cur, W)
        exhausted = cur.dim > 0 and find_invariant_isotropic(cur, seed=opt.seed) is not None
    before = classify(gen, seed=opt.seed, group=group)
    after = classify(cur, seed=opt.seed, group=group)
    report = {"steps": steps, "residue_dim": cur.dim, "residue_q": _matrix(cur.dual.q),
              "normal_form": after.to_json(), "formula": REDUCE_FORMULA,
              "checks": {"class_unchanged": before == after, "certified": after.certified}}
    if exhausted:
        raise Inconclusive(report)
    return report


def cmd_tau_lagrangian(job, opt):
    M = io.oriented(io.require(job, "manifold", "job"))
    bp = int(job.get("basepoint", 0))
    F = io.system(io.require(job, "system", "job"), M.base, basepoint=bp)
    dual = io.duality(io.require(job, "duality", "job"))
    n = M.dim
    if n % 2 == 0 or dual.epsilon != (1 - epsilon_n(n)) % 2:
        raise io.SchemaError(f"needs odd dimension and epsilon = 1 - eps_n; got n={n}, epsilon={dual.epsilon}")
    L = io.subspace(io.require(job, "lagrangian", "job"), dual.dim, "lagrangian")
    if not lagrangian_verify(LGenerator(dual, complex=M.base, local=F, basepoint=bp), L):
        raise io.SchemaError("lagrangian is not flat, isotropic and of half rank")
    t = tau_lagrangian(M, F, dual, L, basepoint=bp)
    out = tau_report(t)
    z = int(job.get("z", 0))
    out["extended"] = {"z": z, "z_after_reduction": z + t.tau, "formula": EX_REDUCE_FORMULA}
    return out


def _fibration_inputs(job):
    b = io.bundle(io.require(job, "bundle", "job"))
    base_data = job["bundle"]["base"]
    base = io.oriented(base_data, "bundle.base")
    dual = io.duality(io.require(job, "duality", "job"))
    return b, base, dual


def _check_fibration_parity(b, base, dual):
    want = (1 - epsilon_n(b.fiber_dim) - epsilon_n(base.dim)) % 2
    if dual.epsilon != want:
        raise io.SchemaError(f"epsilon must be 1 - eps_n - eps_m = {want} "
                             f"(fibre dim {b.fiber_dim}, base dim {base.dim})")


def cmd_tau_fibration(job, opt):
    b, base, dual = _fibration_inputs(job)
    _check_fibration_parity(b, base, dual)
    return tau_report(tau_fibration(b, base, dual))


def _pushforward_report(b, dual, opt):
    res = pushforward_duality(b, dual)
    gen = pi_L(b, dual)
    try:
        nf = classify(gen, seed=opt.seed)
    except InfiniteGroupError:
        nf = None
    sym = res.dual.q.T == res.dual.q * (-1 if res.epsilon else 1)
    return {
        "R_dims": list(res.dims),
        "R_transports": [{f"{u}-{v}": _matrix(m) for (u, v), m in sorted(s.transports.items())}
                         for s in res.systems],
        "pushforward_q": _matrix(res.dual.q),
        "epsilon": res.epsilon,
        "normal_form": nf.to_json() if nf else None,
        "formula": PUSHFORWARD_FORMULA,
        "checks": {"symmetry_type": sym, "flat": True, "certified": nf.certified if nf else False},
    }


def cmd_pushforward(job, opt):
    b = io.bundle(io.require(job, "bundle", "job"))
    dual = io.duality(io.require(job, "duality", "job"))
    out = _pushforward_report(b, dual, opt)
    if "lagrangian" in job:
        L = io.subspace(job["lagrangian"], dual.dim, "lagrangian")
        rep = pi_L_well_defined_check(b, dual, L, budget=opt.budget, seed=opt.seed)
        out["well_defined"] = {"status": rep.status, "steps": list(rep.steps),
                               "residue_dim": rep.residue_dim}
        out["checks"]["reduction_found"] = rep.status == "reduced"
        if rep.status != "reduced":
            raise Inconclusive(out)
    return out


def cmd_pushforward_ex(job, opt):
    b, base, dual = _fibration_inputs(job)
    _check_fibration_parity(b, base, dual)
    z = int(job.get("z", 0))
    out = _pushforward_report(b, dual, opt)
    t = tau_fibration(b, base, dual)
    out["tau"] = tau_report(t)
    out["z"] = z
    out["z_out"] = z - t.tau
    out["formula"] = PI_LEX_FORMULA
    out["checks"].update(t.checks)
    return out


def cmd_compose_check(job, opt):
    mid = io.oriented(io.require(job, "mid", "job"), "mid")
    inner = io.bundle(io.require(job, "inner", "job"), "inner")
    base_data = io.require(job, "base", "job")
    dual = io.duality(io.require(job, "duality", "job"))
    maps = io.bundle_maps(io.require(job, "maps", "job"))
    with_z = bool(job.get("check_z", True))
    base = io.oriented(base_data, "base") if with_z else None
    cb = compose_bundles(inner, mid, io.complex_(base_data, "base"), maps)
    rep = compose_check(cb, mid, base, dual, z=int(job.get("z", 0)))
    out = {"classify_iterated": rep.classify_iterated.to_json(),
           "classify_composed": rep.classify_composed.to_json(),
           "z_iterated": rep.z_iterated, "z_composed": rep.z_composed, "tau": rep.tau,
           "formula": "pi_* of a composite = iterated pi_*, on L and on the z-part of L^ex",
           "checks": {"classify_agree": rep.classify_agree,
                      "z_agree": rep.z_agree if rep.z_agree is not None else True}}
    return out


def cmd_k0_ranks(job, opt):
    dual = io.duality(io.require(job, "duality", "job"))
    pos, neg = k0_grading_ranks(dual)
    return {"ranks": [pos, neg], "formula": K0_FORMULA, "checks": {}}


COMMANDS: dict[str, Callable] = {
    "cohomology": cmd_cohomology,
    "holonomy": cmd_holonomy,
    "pairing": cmd_pairing,
    "classify": cmd_classify,
    "reduce": cmd_reduce,
    "tau-lagrangian": cmd_tau_lagrangian,
    "tau-fibration": cmd_tau_fibration,
    "pushforward": cmd_pushforward,
    "pushforward-ex": cmd_pushforward_ex,
    "compose-check": cmd_compose_check,
    "k0-ranks": cmd_k0_ranks,
}

VALIDATION_ERRORS = (io.SchemaError, FlatnessError, RepError, LGroupError, BundleError,
                     KeyError, json.JSONDecodeError)
COMPUTATION_ERRORS = (InfiniteGroupError, PairingError, SpectralError, LinAlgError)


def _error(command: str, exc: Exception) -> dict:
    return {"error": {"module": type(exc).__module__.rsplit(".", 1)[-1], "operation": command,
                      "type": type(exc).__name__, "diagnostic": str(exc)}}


def run(command: str, job: Mapping, opt: Options) -> tuple[int, dict]:
    """Run one job; returns (exit code, report)."""
    head = {"command": command, "seed": opt.seed, "budget": opt.budget}
    try:
        result = COMMANDS[command](job, opt)
        return EXIT_OK, {**head, "status": "ok", "result": result}
    except Inconclusive as exc:
        return EXIT_INCONCLUSIVE, {**head, "status": "inconclusive", "result": exc.args[0]}
    except COMPUTATION_ERRORS as exc:
        return EXIT_COMPUTATION, {**head, "status": "computation_error", **_error(command, exc)}
    except (*VALIDATION_ERRORS, ComplexError) as exc:
        return EXIT_VALIDATION, {**head, "status": "validation_error", **_error(command, exc)}
    except ValueError as exc:
        return EXIT_COMPUTATION, {**head, "status": "computation_error", **_error(command, exc)}


def dumps(report: Mapping) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="lflat", description="L-theory invariants of flat bundles with duality")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--input", required=True)
    ap.add_argument("--output", required=True)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--budget", type=int, default=32)
    args = ap.parse_args(argv)
    opt = Options(args.seed, args.budget)
    try:
        with open(args.input) as fh:
            job = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        code, report = EXIT_VALIDATION, {"command": args.command, "seed": opt.seed, "budget": opt.budget,
                                         "status": "validation_error", **_error(args.command, exc)}
    else:
        if isinstance(job, dict) and "job" in job and "command" in job:
            job = job["job"]
        code, report = run(args.command, job, opt)
    text = dumps(report)
    with open(args.output, "w") as fh:
        fh.write(text)
    if code:
        sys.stderr.write(f"lflat {args.command}: {report['status']}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
