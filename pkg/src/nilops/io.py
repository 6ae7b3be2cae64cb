"""Reading and writing modules, algebras and functors as JSON documents.

Matrices use bitstrings: character ``c`` of row ``r`` is the coefficient of
target basis vector ``c`` in the image of source basis vector ``r``.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .gf2 import Mat
from .gmod import GradedModule, ModuleMap
from .functors import UnstableAlgebra


class InputError(ValueError):
    """A malformed input document; ``where`` locates the problem."""

    def __init__(self, message: str, where: str = "$"):
        super().__init__(f"{where}: {message}")
        self.where = where


def read_json(path: str | Path) -> Any:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from None


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _need(doc: dict, key: str, where: str, kind=None):
    if not isinstance(doc, dict):
        raise InputError("expected an object", where)
    if key not in doc:
        raise InputError(f"missing field {key!r}", where)
    val = doc[key]
    if kind is not None and not isinstance(val, kind) or isinstance(val, bool) and kind is int:
        raise InputError(f"field {key!r} has the wrong type", f"{where}.{key}")
    return val


def _int(x, where: str) -> int:
    if isinstance(x, bool):
        raise InputError("expected an integer", where)
    if isinstance(x, int):
        return x
    if isinstance(x, str):
        try:
            return int(x)
        except ValueError:
            pass
    raise InputError("expected an integer", where)


def _matrix(rows, nrows: int, ncols: int, where: str) -> Mat:
    if not isinstance(rows, list):
        raise InputError("expected a list of bitstrings", where)
    if len(rows) != nrows:
        raise InputError(f"expected {nrows} rows, got {len(rows)}", where)
    out = []
    for r, s in enumerate(rows):
        if not isinstance(s, str) or len(s) != ncols or set(s) - {"0", "1"}:
            raise InputError(f"expected a bitstring of length {ncols}", f"{where}[{r}]")
        out.append(sum(1 << c for c, ch in enumerate(s) if ch == "1"))
    return Mat(tuple(out), ncols)


# -- modules -------------------------------------------------------------------

def module_from_dict(doc: dict, where: str = "$") -> GradedModule:
    window = _need(doc, "window", where, list)
    if len(window) != 2:
        raise InputError("window must be [dmin, dmax]", f"{where}.window")
    dmin, dmax = _int(window[0], f"{where}.window[0]"), _int(window[1], f"{where}.window[1]")
    if dmin > dmax:
        raise InputError("dmin exceeds dmax", f"{where}.window")
    complete = doc.get("complete", False)
    if not isinstance(complete, bool):
        raise InputError("expected true or false", f"{where}.complete")
    raw_dims = _need(doc, "dims", where, dict)
    dims = {}
    for key, val in raw_dims.items():
        d = _int(key, f"{where}.dims")
        n = _int(val, f"{where}.dims.{key}")
        if n < 0:
            raise InputError("negative dimension", f"{where}.dims.{key}")
        if n and not dmin <= d <= dmax:
            raise InputError(f"degree {d} outside the window", f"{where}.dims.{key}")
        if n:
            dims[d] = n
    action = {}
    for t, entry in enumerate(doc.get("sq", [])):
        w = f"{where}.sq[{t}]"
        i = _int(_need(entry, "i", w), f"{w}.i")
        d = _int(_need(entry, "from_degree", w), f"{w}.from_degree")
        if i < 1:
            raise InputError("i must be at least 1", f"{w}.i")
        if (i, d) in action:
            raise InputError(f"second entry for Sq^{i} on degree {d}", w)
        action[(i, d)] = _matrix(_need(entry, "rows", w), dims.get(d, 0), dims.get(d + i, 0), f"{w}.rows")
    trust = doc.get("trust")
    if trust is not None:
        trust = _int(trust, f"{where}.trust")
    unstable = doc.get("unstable")
    if unstable is not None and not isinstance(unstable, bool):
        raise InputError("expected true, false or null", f"{where}.unstable")
    return GradedModule(dmin, dmax, dims, action, complete=complete, trust=trust, unstable=unstable)


def module_to_dict(m: GradedModule) -> dict:
    sq = []
    for (i, d), mat in sorted(m.action.items(), key=lambda kv: (kv[0][1], kv[0][0])):
        sq.append({"i": i, "from_degree": d, "rows": mat.to_bitstrings()})
    out = {"window": [m.dmin, m.dmax], "complete": m.complete,
           "dims": {str(d): n for d, n in sorted(m.dims.items())}, "sq": sq}
    if not m.complete:
        out["trust"] = m.trust
    return out


def map_to_dict(f: ModuleMap) -> dict:
    return {"shift": f.shift,
            "matrices": {str(d): mat.to_bitstrings() for d, mat in sorted(f.mats.items()) if mat.nrows}}


def load_module(path: str | Path) -> GradedModule:
    return module_from_dict(read_json(path), str(path))


# -- algebras --------------------------------------------------------------------

def algebra_from_dict(doc: dict, where: str = "$") -> UnstableAlgebra:
    """{"module": <module>, "product": [{"degrees": [a, b], "rows": [...]}]};
    row r * dim(b) + c is the product of basis vectors r (degree a) and c (degree b)."""
    carrier = module_from_dict(_need(doc, "module", where, dict), f"{where}.module")
    prod = {}
    for t, entry in enumerate(doc.get("product", [])):
        w = f"{where}.product[{t}]"
        degs = _need(entry, "degrees", w, list)
        if len(degs) != 2:
            raise InputError("degrees must be [a, b]", f"{w}.degrees")
        a, b = _int(degs[0], f"{w}.degrees[0]"), _int(degs[1], f"{w}.degrees[1]")
        prod[(a, b)] = _matrix(_need(entry, "rows", w), carrier.dim(a) * carrier.dim(b), carrier.dim(a + b),
                               f"{w}.rows")
    return UnstableAlgebra(carrier, prod)


def algebra_to_dict(k: UnstableAlgebra) -> dict:
    return {"module": module_to_dict(k.carrier),
            "product": [{"degrees": [a, b], "rows": m.to_bitstrings()}
                        for (a, b), m in sorted(k.product.items()) if m.nrows]}


# -- functors -------------------------------------------------------------------

def functor_from_dict(doc: dict, where: str = "$"):
    """Either {"standard": name, "kmax": k} or {"kmax", "dims", "generators": [
    {"from": j, "to": k, "map": [bitstrings], "matrix": [bitstrings]}]}."""
    from .polyfunc import from_generators, generators, standard
    kmax = _int(doc.get("kmax", 3), f"{where}.kmax")
    if not 0 <= kmax <= 4:
        raise InputError("kmax must be between 0 and 4", f"{where}.kmax")
    if "standard" in doc:
        try:
            return standard(doc["standard"], kmax)
        except ValueError as exc:
            raise InputError(str(exc), f"{where}.standard") from None
    dims = [_int(x, f"{where}.dims[{i}]") for i, x in enumerate(_need(doc, "dims", where, list))]
    if len(dims) != kmax + 1:
        raise InputError(f"need {kmax + 1} dimensions", f"{where}.dims")
    action = {}
    for t, entry in enumerate(_need(doc, "generators", where, list)):
        w = f"{where}.generators[{t}]"
        j, k = _int(_need(entry, "from", w), f"{w}.from"), _int(_need(entry, "to", w), f"{w}.to")
        if not (0 <= j <= kmax and 0 <= k <= kmax):
            raise InputError("dimension outside 0..kmax", w)
        g = _matrix(_need(entry, "map", w), j, k, f"{w}.map")
        action[(j, k, g.rows)] = _matrix(_need(entry, "matrix", w), dims[j], dims[k], f"{w}.matrix")
    for g in generators(kmax):
        if g not in action:
            raise InputError(f"missing generator from {g[0]} to {g[1]} with rows "
                             f"{Mat(g[2], g[1]).to_bitstrings()}", f"{where}.generators")
    from .polyfunc import NotFunctorial
    try:
        return from_generators(kmax, dims, {g: action[g] for g in generators(kmax)}, doc.get("name", "F"))
    except NotFunctorial as exc:
        raise InputError(str(exc), f"{where}.generators") from None


def functor_to_dict(f) -> dict:
    from .polyfunc import generators
    gens = []
    for g in generators(f.kmax):
        gens.append({"from": g[0], "to": g[1], "map": Mat(g[2], g[1]).to_bitstrings(),
                     "matrix": f.table[g].to_bitstrings()})
    return {"name": f.name, "kmax": f.kmax, "dims": list(f.dims), "generators": gens}


def load_functor(path: str | Path):
    return functor_from_dict(read_json(path), str(path))
