"""l(M)(V) = Hom_U(M, H*(BV))^*, for modules generated in low degrees.

Homs are computed in a window of the source and restricted to degrees at most
``restrict_to``; the functor value is the dual of the span of the restricted
maps. For a finitely generated module, restricting to the generator degrees
loses nothing, and the span stops changing once the window sees every
relation. A linear map A: V -> W acts through the algebra map H*(BW) ->
H*(BV) sending u_l to sum_i A[i][l] t_i.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from ..catalog import polynomial
from ..gf2 import Mat, Span
from ..gmod import GradedModule, ModuleMap, hom, is_unstable
from ..functors import indecomposables
from ..parallel import pmap
from .core import DEFAULT_KMAX, Morphism, NatTrans, PolyFunctor, from_generators, generators

DEFAULT_WINDOW_CAP = 16


class LocalizationError(ValueError):
    pass


@lru_cache(maxsize=None)
def _poly(k: int, dmax: int):
    return polynomial(k, dmax)


def _mul(a: frozenset, b: frozenset) -> frozenset:
    out: set = set()
    for x in a:
        for y in b:
            out ^= {tuple(p + q for p, q in zip(x, y))}
    return frozenset(out)


def _substitute(f: Morphism, e: tuple[int, ...]) -> frozenset:
    """u^e in F[u_1..u_k] pulled back to F[t_1..t_j] along f: F^j -> F^k."""
    j, k, rows = f
    lin = []
    for l in range(k):
        lin.append(frozenset(tuple(int(t == i) for t in range(j)) for i in range(j) if (rows[i] >> l) & 1))
    acc = frozenset([tuple(0 for _ in range(j))])
    for l, a in enumerate(e):
        for _ in range(a):
            acc = _mul(acc, lin[l])
            if not acc:
                return acc
    return acc


def substitution_matrix(f: Morphism, d: int, dmax: int) -> Mat:
    """Degree-d part of H*(BW) -> H*(BV) in the monomial bases."""
    j, k, _ = f
    _, bk = _poly(k, dmax)
    _, bj = _poly(j, dmax)
    src = bk.get(d, [])
    tgt = bj.get(d, [])
    idx = {e: r for r, e in enumerate(tgt)}
    rows = []
    for e in src:
        v = 0
        for m in _substitute(f, e):
            v ^= 1 << idx[m]
        rows.append(v)
    return Mat(tuple(rows), len(tgt))


@dataclass
class Localization:
    module: GradedModule
    functor: PolyFunctor
    restrict_to: int
    window: int
    exact: bool
    stable: bool
    note: str = ""
    bases: list[list[int]] = field(default_factory=list, repr=False)
    layouts: list[dict[int, int]] = field(default_factory=list, repr=False)

    def as_dict(self) -> dict:
        return {"dims": list(self.functor.dims), "kmax": self.functor.kmax,
                "restrict_to": self.restrict_to, "window": self.window,
                "exact": self.exact, "stable": self.stable, "note": self.note}


def _layout(m: GradedModule, k: int, top: int, dmax: int) -> tuple[dict[int, int], int]:
    p, _ = _poly(k, dmax)
    offs, total = {}, 0
    for d in m.degrees():
        if d <= top and p.dim(d):
            offs[d] = total
            total += m.dim(d) * p.dim(d)
    return offs, total


def _flatten(mats: dict[int, Mat], offs: dict[int, int]) -> int:
    v = 0
    for d, off in offs.items():
        mat = mats.get(d)
        if mat is None:
            continue
        for r, row in enumerate(mat.rows):
            v |= row << (off + r * mat.ncols)
    return v


def _unflatten(v: int, m: GradedModule, offs: dict[int, int], k: int, dmax: int) -> dict[int, Mat]:
    p, _ = _poly(k, dmax)
    out = {}
    for d, off in offs.items():
        w = p.dim(d)
        out[d] = Mat(tuple((v >> (off + r * w)) & ((1 << w) - 1) for r in range(m.dim(d))), w)
    return out


def _restricted_homs(m: GradedModule, k: int, top: int, window: int) -> list[int]:
    p, _ = _poly(k, window)
    src = m.with_window(dmax=window) if (m.complete or m.dmax >= window) else m
    hs = hom(src, p)
    offs, _ = _layout(m, k, top, window)
    return Span(_flatten(f.mats, offs) for f in hs.maps).basis


def _choose(m: GradedModule, restrict_to: int | None, window: int | None) -> tuple[int, int, bool, str]:
    if m.is_zero():
        return 0, 0, True, ""
    if m.complete:
        top = m.top()
        return (top if restrict_to is None else restrict_to), (2 * top if window is None else window), True, ""
    reach = m.trust if m.trust is not None else m.dmax
    w = min(reach, DEFAULT_WINDOW_CAP) if window is None else window
    if w > reach:
        raise LocalizationError(f"window {w} exceeds the trusted range {reach}")
    if restrict_to is None:
        gens = [d for d, vs in indecomposables(m.with_window(dmax=w)).items() if vs and d <= w // 2]
        if not gens:
            # an empty restriction would silently localize to zero
            raise LocalizationError(f"no generator in degrees <= {w // 2}; widen the window")
        restrict_to = max(gens)
    note = "incomplete source: value = span of Hom restricted to degrees <= " f"{restrict_to}"
    return restrict_to, w, False, note


def localize(m: GradedModule, kmax: int = DEFAULT_KMAX, restrict_to: int | None = None,
             window: int | None = None, check_stability: bool = True) -> Localization:
    if not is_unstable(m):
        raise LocalizationError("localization needs an unstable module")
    top, w, exact, note = _choose(m, restrict_to, window)
    ks = list(range(kmax + 1))
    bases = pmap(_restricted_homs, [m] * len(ks), ks, [top] * len(ks), [w] * len(ks))
    layouts = [_layout(m, k, top, w)[0] for k in ks]
    stable = True
    if not exact and check_stability and w - 2 > 2 * top:
        smaller = pmap(_restricted_homs, [m] * len(ks), ks, [top] * len(ks), [w - 2] * len(ks))
        stable = [len(b) for b in smaller] == [len(b) for b in bases]
        if not stable:
            note += f"; span still shrinking between windows {w - 2} and {w}"
    spans = []
    for b in bases:
        sp = Span(track=True)
        for v in b:
            sp.add(v)
        spans.append(sp)
    action = {}
    for g in generators(kmax):
        j, k, _ = g
        rows = []
        for v in bases[k]:
            mats = _unflatten(v, m, layouts[k], k, w)
            moved = {d: mat @ substitution_matrix(g, d, w) for d, mat in mats.items()}
            try:
                rows.append(spans[j].coords(_flatten(moved, layouts[j])))
            except ValueError:
                raise LocalizationError("precomposition left the restricted Hom span") from None
        # R_g: R_k -> R_j; l(M)(g) is its transpose
        action[g] = Mat(tuple(rows), len(bases[j])).transpose() if bases[k] else Mat.zero(len(bases[j]), 0)
    dims = [len(b) for b in bases]
    functor = from_generators(kmax, dims, action, name=f"l({_name(m)})")
    return Localization(m, functor, top, w, exact, stable, note, bases, layouts)


def _name(m: GradedModule) -> str:
    return m.summary() if len(m.summary()) < 40 else "M"


def localize_map(f: ModuleMap, src: Localization, tgt: Localization) -> NatTrans:
    """l(f): l(M) -> l(N) for f: M -> N, as the dual of precomposition with f."""
    if f.shift:
        raise LocalizationError("l is defined on degree-preserving maps")
    if src.restrict_to > tgt.restrict_to:
        raise LocalizationError("target localization must see the source generators")
    comps = []
    for k in range(src.functor.kmax + 1):
        sp = Span(track=True)
        for v in src.bases[k]:
            sp.add(v)
        rows = []
        for v in tgt.bases[k]:
            mats = _unflatten(v, tgt.module, tgt.layouts[k], k, tgt.window)
            pulled = {d: f.at(d) @ mats[d] for d in src.layouts[k] if d in mats}
            try:
                rows.append(sp.coords(_flatten(pulled, src.layouts[k])))
            except ValueError:
                raise LocalizationError("precomposition with f left the source Hom span") from None
        pre = Mat(tuple(rows), len(src.bases[k]))
        comps.append(pre.transpose() if tgt.bases[k] else Mat.zero(len(src.bases[k]), 0))
    return NatTrans(src.functor, tgt.functor, tuple(comps))
