"""Hom, splitting and Ext^2 over the truncated linear category.

Ext is computed with the representable projectives P_j = F_2[Hom(F^j, -)]:
Hom(P_j, F) = F(F^j), so a cochain on a free resolution is a list of vectors,
one per generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

from ..gf2 import Mat, Span, annihilator, bits, nullspace, solve, solve_affine
from .core import (Morphism, NatTrans, PolyFunctor, compose, generators, hom_set, identity,
                   is_exact_at, mor_index, nat_from_vector)


# -- Hom ------------------------------------------------------------------------

def _offsets(a: PolyFunctor, b: PolyFunctor) -> tuple[list[int], int]:
    offs, total = [], 0
    for x, y in zip(a.dims, b.dims):
        offs.append(total)
        total += x * y
    return offs, total


def _naturality_equations(a: PolyFunctor, b: PolyFunctor) -> tuple[list[int], list[tuple], int]:
    """Equations F(g) eta_k = eta_j G(g) for every generator g: j -> k."""
    offs, total = _offsets(a, b)
    eqs, labels = [], []
    for g in generators(a.kmax):
        j, k, _ = g
        fa, gb = a.table[g], b.table[g]
        bj, bk = b.dims[j], b.dims[k]
        for r in range(a.dims[j]):
            for c in range(bk):
                eq = 0
                for s in bits(fa.rows[r]):
                    eq ^= 1 << (offs[k] + s * bk + c)
                for s in range(bj):
                    if (gb.rows[s] >> c) & 1:
                        eq ^= 1 << (offs[j] + r * bj + s)
                if eq:
                    eqs.append(eq)
                    labels.append(("natural", g, r, c))
    return eqs, labels, total


def hom_space(a: PolyFunctor, b: PolyFunctor) -> list[NatTrans]:
    """A basis of the natural transformations A -> B."""
    eqs, _, total = _naturality_equations(a, b)
    return [nat_from_vector(a, b, v) for v in nullspace(eqs, total)]


# -- splitting ----------------------------------------------------------------

@dataclass
class FunctorSES:
    inc: NatTrans
    proj: NatTrans
    name: str = ""

    @property
    def left(self) -> PolyFunctor:
        return self.inc.source

    @property
    def middle(self) -> PolyFunctor:
        return self.inc.target

    @property
    def right(self) -> PolyFunctor:
        return self.proj.target

    def is_exact(self) -> bool:
        return (self.inc.is_natural() and self.proj.is_natural() and self.inc.is_injective()
                and self.proj.is_surjective() and is_exact_at(self.inc, self.proj))


@dataclass
class SplitReport:
    splits: bool
    retraction: NatTrans | None
    certificate: list[tuple] = field(default_factory=list)

    def as_dict(self) -> dict:
        out = {"splits": self.splits}
        if self.retraction is not None:
            out["retraction"] = [c.to_bitstrings() for c in self.retraction.comps]
        if self.certificate:
            out["certificate"] = [_label_json(x) for x in self.certificate]
        return out


def _label_json(label: tuple) -> list:
    out = []
    for x in label:
        if isinstance(x, tuple) and len(x) == 3 and isinstance(x[2], tuple):
            out.append({"from": x[0], "to": x[1], "rows": list(x[2])})
        else:
            out.append(x)
    return out


def ses_splits(ses: FunctorSES) -> SplitReport:
    """Look for a natural retraction r of the inclusion (inc then r = id).

    When none exists the certificate lists equations (naturality along a
    generator, or an entry of inc r = id) whose sum reads 0 = 1.
    """
    if not ses.is_exact():
        raise ValueError("sequence is not short exact")
    b, a = ses.middle, ses.left
    eqs, labels, total = _naturality_equations(b, a)
    system = [(e, 0) for e in eqs]
    offs, _ = _offsets(b, a)
    for k in range(a.kmax + 1):
        inc = ses.inc.comps[k]
        ak = a.dims[k]
        for r in range(ak):
            for c in range(ak):
                eq = 0
                for s in bits(inc.rows[r]):
                    eq ^= 1 << (offs[k] + s * ak + c)
                system.append((eq, int(r == c)))
                labels.append(("identity", k, r, c))
    x, combo = solve_affine(system, total)
    if x is not None:
        ret = nat_from_vector(b, a, x)
        assert ret.is_natural() and ses.inc.then(ret).comps == tuple(Mat.identity(d) for d in a.dims)
        return SplitReport(True, ret)
    cert = [labels[t] for t in bits(combo)]
    return SplitReport(False, None, cert)


def check_split_certificate(ses: FunctorSES, cert: Sequence[tuple]) -> bool:
    """Recompute the listed equations and confirm they add up to 0 = 1."""
    b, a = ses.middle, ses.left
    eqs, labels, total = _naturality_equations(b, a)
    lookup = dict(zip(labels, eqs))
    offs, _ = _offsets(b, a)
    acc, rhs = 0, 0
    for lab in cert:
        if lab[0] == "natural":
            acc ^= lookup[lab]
        else:
            _, k, r, c = lab
            ak = a.dims[k]
            for s in bits(ses.inc.comps[k].rows[r]):
                acc ^= 1 << (offs[k] + s * ak + c)
            rhs ^= int(r == c)
    return acc == 0 and rhs == 1


# -- projectives and resolutions ----------------------------------------------

@lru_cache(maxsize=None)
def _homs(j: int, k: int) -> tuple[Morphism, ...]:
    return tuple(hom_set(j, k))


class Projective:
    """A finite sum of representables P_{j_1} + ... + P_{j_r}."""

    def __init__(self, levels: Sequence[int], kmax: int):
        self.levels = list(levels)
        self.kmax = kmax
        self.offsets = []
        self.dims = []
        for k in range(kmax + 1):
            row, off = [], 0
            for j in self.levels:
                row.append(off)
                off += 1 << (j * k)
            self.offsets.append(row)
            self.dims.append(off)

    def decode(self, k: int, c: int) -> tuple[int, Morphism]:
        row = self.offsets[k]
        i = max(t for t in range(len(row)) if row[t] <= c)
        return i, _homs(self.levels[i], k)[c - row[i]]

    def generator(self, i: int) -> int:
        j = self.levels[i]
        return 1 << (self.offsets[j][i] + mor_index(identity(j)))

    def act(self, v: int, k: int, g: Morphism) -> int:
        out = 0
        l = g[1]
        for c in bits(v):
            i, f = self.decode(k, c)
            out ^= 1 << (self.offsets[l][i] + mor_index(compose(f, g)))
        return out


def _act(obj, v: int, k: int, g: Morphism) -> int:
    if isinstance(obj, Projective):
        return obj.act(v, k, g)
    return obj.table[g].apply(v)


def _dims(obj) -> list[int]:
    return list(obj.dims)


def subfunctor_generators(obj, spaces: Sequence[Sequence[int]]) -> list[tuple[int, int]]:
    """(level, vector) pairs generating the given subfunctor of ``obj``."""
    kmax = obj.kmax
    gens: list[tuple[int, int]] = []
    for k in range(kmax + 1):
        span = Span()
        for (j, v) in gens:
            for g in _homs(j, k):
                span.add(_act(obj, v, j, g))
        for v in spaces[k]:
            if span.contains(v):
                continue
            gens.append((k, v))
            for g in _homs(k, k):
                span.add(_act(obj, v, k, g))
    return gens


def _cover_matrix(p: Projective, target, images: Sequence[int], k: int) -> Mat:
    """Rows: images of the basis of P(k) under the map sending generator i to images[i]."""
    rows = []
    ncols = _dims(target)[k]
    for i, j in enumerate(p.levels):
        for f in _homs(j, k):
            rows.append(_act(target, images[i], j, f))
    return Mat(tuple(rows), ncols)


@dataclass
class Stage:
    """P_s with d(generator i) = images[i] in the previous object at level levels[i]."""
    proj: Projective
    images: list[int]


def resolve(x: PolyFunctor, length: int) -> list[Stage]:
    """P_length -> ... -> P_0 -> X, each P_s covering the previous kernel."""
    kmax = x.kmax
    stages: list[Stage] = []
    target = x
    spaces = [[1 << r for r in range(x.dims[k])] for k in range(kmax + 1)]
    for _ in range(length + 1):
        gens = subfunctor_generators(target, spaces)
        p = Projective([j for j, _ in gens], kmax)
        images = [v for _, v in gens]
        stages.append(Stage(p, images))
        spaces = [_cover_matrix(p, target, images, k).kernel() for k in range(kmax + 1)]
        target = p
    return stages


def _coboundary(stage_next: Stage, prev: Projective, y: PolyFunctor, src_levels: Sequence[int]):
    """Matrix of C^s -> C^(s+1), C^s = sum over generators of P_s of Y(level)."""
    offs_in, total_in = [], 0
    for j in src_levels:
        offs_in.append(total_in)
        total_in += y.dims[j]
    offs_out, total_out = [], 0
    for j in stage_next.proj.levels:
        offs_out.append(total_out)
        total_out += y.dims[j]
    rows = []
    for h, jh in enumerate(src_levels):
        for s in range(y.dims[jh]):
            out = 0
            for q, jq in enumerate(stage_next.proj.levels):
                val = 0
                for c in bits(stage_next.images[q]):
                    i, f = prev.decode(jq, c)
                    if i == h:
                        val ^= y.table[f].apply(1 << s)
                out |= val << offs_out[q]
            rows.append(out)
    return Mat(tuple(rows), total_out), offs_in, offs_out


def ext_dims(x: PolyFunctor, y: PolyFunctor, upto: int = 2) -> list[int]:
    """dim Ext^s(X, Y) for s <= upto, in the truncated category."""
    stages = resolve(x, upto + 1)
    deltas = []
    for s in range(upto + 1):
        m, _, _ = _coboundary(stages[s + 1], stages[s].proj, y, stages[s].proj.levels)
        deltas.append(m)
    dims = []
    for s in range(upto + 1):
        cs = deltas[s].nrows
        z = cs - deltas[s].rank()
        b = deltas[s - 1].rank() if s > 0 else 0
        dims.append(z - b)
    return dims


# -- Yoneda 2-extensions ------------------------------------------------------

@dataclass
class YonedaTwoExt:
    """0 -> Y --a--> E1 --b--> E0 --c--> X -> 0."""
    a: NatTrans
    b: NatTrans
    c: NatTrans
    name: str = ""

    @property
    def left(self) -> PolyFunctor:
        return self.a.source

    @property
    def right(self) -> PolyFunctor:
        return self.c.target

    def is_exact(self) -> bool:
        return (all(t.is_natural() for t in (self.a, self.b, self.c)) and self.a.is_injective()
                and self.c.is_surjective() and is_exact_at(self.a, self.b) and is_exact_at(self.b, self.c))


@dataclass
class ExtClass:
    nonzero: bool
    cocycle: int
    witness: int | None
    generators: list[int]
    note: str = ""

    def as_dict(self) -> dict:
        return {"nonzero": self.nonzero, "resolution_generator_levels": self.generators,
                "cocycle": format(self.cocycle, "b"),
                "dual_witness": None if self.witness is None else format(self.witness, "b"),
                "note": self.note}


def _preimage(m: Mat, w: int, what: str) -> int:
    x = solve(m.rows, w)
    if x is None:
        raise ValueError(f"lifting failed at {what}: sequence not exact")
    return x


def yoneda_class(ext: YonedaTwoExt, along: NatTrans | None = None) -> ExtClass:
    """Whether the class of ``ext`` (pulled back along ``along``: X' -> X) vanishes.

    The identity of X' is lifted to a chain map from a free resolution into
    the extension; its last component is a 2-cocycle with values in Y, and the
    class is zero exactly when that cocycle is a coboundary. A nonzero class
    comes with a functional on cochains that kills every coboundary but not
    the cocycle.
    """
    if not ext.is_exact():
        raise ValueError("not an exact 4-term sequence")
    x_prime = along.source if along is not None else ext.right
    stages = resolve(x_prime, 2)
    p0, p1, p2 = (st.proj for st in stages)
    e0, e1, y = ext.b.target, ext.a.target, ext.left

    def to_x(j, v):
        return along.comps[j].apply(v) if along is not None else v

    alpha0 = [_preimage(ext.c.comps[j], to_x(j, v), "E0") for j, v in zip(p0.levels, stages[0].images)]

    def chain0(j, vec):
        out = 0
        for c in bits(vec):
            i, f = p0.decode(j, c)
            out ^= e0.table[f].apply(alpha0[i])
        return out

    alpha1 = [_preimage(ext.b.comps[j], chain0(j, v), "E1") for j, v in zip(p1.levels, stages[1].images)]

    def chain1(j, vec):
        out = 0
        for c in bits(vec):
            i, f = p1.decode(j, c)
            out ^= e1.table[f].apply(alpha1[i])
        return out

    alpha2 = [_preimage(ext.a.comps[j], chain1(j, v), "Y") for j, v in zip(p2.levels, stages[2].images)]
    cob, _, offs = _coboundary(stages[2], p1, y, p1.levels)
    cocycle = 0
    for q, val in enumerate(alpha2):
        cocycle |= val << offs[q]
    span = Span(cob.rows)
    levels = [len(st.proj.levels) for st in stages]
    if span.contains(cocycle):
        return ExtClass(False, cocycle, None, levels, "cocycle is a coboundary")
    ann = annihilator(list(cob.rows), cob.ncols)
    witness = next(z for z in ann if bin(z & cocycle).count("1") % 2)
    return ExtClass(True, cocycle, witness, levels, "functional vanishing on coboundaries, 1 on the cocycle")


def check_witness(ext: YonedaTwoExt, cls: ExtClass, along: NatTrans | None = None) -> bool:
    """Independent re-check of a nonzero certificate against a fresh resolution."""
    x_prime = along.source if along is not None else ext.right
    stages = resolve(x_prime, 2)
    cob, _, _ = _coboundary(stages[2], stages[1].proj, ext.left, stages[1].proj.levels)
    if any(bin(r & cls.witness).count("1") % 2 for r in cob.rows):
        return False
    return bin(cls.witness & cls.cocycle).count("1") % 2 == 1


def ext2_nonzero(ext: YonedaTwoExt, along: NatTrans | None = None) -> ExtClass:
    return yoneda_class(ext, along)
