"""JSON schemas shared by the command line and the corpus.

Matrices are lists of rows; entries are integers or strings "p/q".  Vectors
(subspace bases) are lists of rows, one row per basis vector.
"""

from __future__ import annotations

from collections.abc import Mapping

from . import complexes
from .exactla import LinAlgError, Matrix, Subspace
from .lgroups import LGenerator
from .pushfwd import BundleMap, FlatFiberBundle
from .repcat import DualityStructure, MatrixGroupRep
from .sheaves import LocalSystem, OrientedComplex, SimplicialComplex, local_system_from_rep


class SchemaError(ValueError):
    pass


STANDARD_COMPLEXES = {
    "circle": complexes.circle,
    "sphere": complexes.sphere,
    "points": complexes.points,
    "torus": complexes.torus,
    "torus7": complexes.torus7,
    "three_torus": complexes.three_torus,
    "sphere_times_circle": complexes.sphere_times_circle,
}


def require(data: Mapping, key: str, where: str):
    if not isinstance(data, Mapping):
        raise SchemaError(f"{where}: expected an object")
    if key not in data:
        raise SchemaError(f"{where}: missing field {key!r}")
    return data[key]


def matrix(data, where: str, cols: int | None = None) -> Matrix:
    if not isinstance(data, list) or any(not isinstance(r, list) for r in data):
        raise SchemaError(f"{where}: a matrix is a list of rows")
    for row in data:
        for x in row:
            if isinstance(x, (bool, float)) or not isinstance(x, (int, str)):
                raise SchemaError(f"{where}: entries must be integers or 'p/q' strings, got {x!r}")
    try:
        return Matrix(data, cols=cols)
    except (ValueError, ZeroDivisionError, LinAlgError) as exc:
        raise SchemaError(f"{where}: {exc}") from None


def subspace(data, ambient: int, where: str) -> Subspace:
    """A list of vectors, each of length ``ambient``."""
    m = matrix(data, where, cols=ambient)
    if m.cols != ambient:
        raise SchemaError(f"{where}: vectors must have length {ambient}")
    return Subspace(ambient, m.T)


def complex_(data, where: str = "complex") -> SimplicialComplex:
    if isinstance(data, Mapping) and "standard" in data:
        name = data["standard"]
        if name not in STANDARD_COMPLEXES:
            raise SchemaError(f"{where}: unknown standard complex {name!r}")
        return STANDARD_COMPLEXES[name](*data.get("args", []))
    require(data, "vertices", where)
    require(data, "simplices", where)
    return SimplicialComplex.from_json(data)


def oriented(data, where: str = "manifold") -> OrientedComplex:
    base = complex_(data, where)
    if isinstance(data, Mapping) and "cycle" in data:
        return OrientedComplex.from_json({**base.to_json(), "cycle": data["cycle"]})
    return OrientedComplex.orient(base)


def _edge_key(key: str, where: str) -> tuple[int, int]:
    try:
        u, v = (int(x) for x in key.split("-"))
    except ValueError:
        raise SchemaError(f"{where}: edge keys look like 'u-v', got {key!r}") from None
    return u, v


def system(data, X: SimplicialComplex, where: str = "system", basepoint: int = 0) -> LocalSystem:
    """Edge transports {"u-v": M}, or holonomy {"monodromy": {"e{u}-{v}": M}} on non-tree edges."""
    k = require(data, "stalk_dim", where)
    if not isinstance(k, int) or k < 0:
        raise SchemaError(f"{where}: stalk_dim must be a non-negative integer")
    if "monodromy" in data:
        mono = data["monodromy"]
        names = tuple(sorted(mono))
        rep = MatrixGroupRep(names, tuple(matrix(mono[n], f"{where}.monodromy.{n}", k) for n in names),
                             dim=k)
        return local_system_from_rep(X, rep, basepoint)
    tr = {_edge_key(key, where): matrix(m, f"{where}.transports.{key}", k)
          for key, m in data.get("transports", {}).items()}
    F = LocalSystem(k, tr)
    F.check_flat(X)
    return F


def duality(data, where: str = "duality") -> DualityStructure:
    eps = require(data, "epsilon", where)
    if eps not in (0, 1):
        raise SchemaError(f"{where}: epsilon must be 0 or 1")
    return DualityStructure(eps, matrix(require(data, "q", where), f"{where}.q"))


def representation(data, where: str = "rep") -> MatrixGroupRep:
    gens = require(data, "generators", where)
    names = tuple(sorted(gens))
    mats = tuple(matrix(gens[n], f"{where}.generators.{n}") for n in names)
    rels = [[(str(n), int(e)) for n, e in w] for w in data.get("relations", [])]
    dim = data.get("dim", -1)
    return MatrixGroupRep(names, mats, tuple(tuple(w) for w in rels), dim)


def generator(data, where: str = "generator") -> LGenerator:
    dual = duality(require(data, "duality", where), f"{where}.duality")
    if "rep" in data:
        return LGenerator(dual, rep=representation(data["rep"], f"{where}.rep"))
    X = complex_(require(data, "complex", where), f"{where}.complex")
    bp = int(data.get("basepoint", 0))
    F = system(require(data, "system", where), X, f"{where}.system", bp)
    return LGenerator(dual, complex=X, local=F, basepoint=bp)


def bundle(data, where: str = "bundle") -> FlatFiberBundle:
    for key in ("base", "fiber", "system"):
        require(data, key, where)
    base = complex_(data["base"], f"{where}.base")
    fiber = oriented(data["fiber"], f"{where}.fiber")
    payload = {**data, "base": base.to_json(), "fiber": fiber.to_json()}
    return FlatFiberBundle.from_json(payload)


def bundle_maps(data, where: str = "maps") -> dict[tuple[int, int], BundleMap]:
    return {_edge_key(k, where): BundleMap.from_json(v) for k, v in data.items()}
