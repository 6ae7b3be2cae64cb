"""Functors on small F_2-vector spaces, stored as representations of the
truncated linear category.

Objects are F_2^k for 0 <= k <= kmax. A morphism F_2^j -> F_2^k is the key
``(j, k, rows)`` where ``rows[i]`` is the image of ``e_i`` as a k-bit int, the
same row convention as :class:`~nilops.gf2.Mat`. A functor stores a matrix for
every morphism (689 of them at kmax = 3); tables built from a generating set
are filled by breadth-first composition, which checks every relation on the
way.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Sequence

from ..gf2 import Mat, Quotient, Span, bits, restrict

Morphism = tuple[int, int, tuple[int, ...]]

DEFAULT_KMAX = 3


class NotFunctorial(ValueError):
    """A relation among generators is violated."""


class NotNatural(ValueError):
    pass


class HeadroomError(ValueError):
    """The construction needs objects beyond kmax."""


# -- the truncated linear category --------------------------------------------

def hom_set(j: int, k: int) -> list[Morphism]:
    return [(j, k, rows) for rows in product(range(1 << k), repeat=j)]


def all_morphisms(kmax: int) -> list[Morphism]:
    return [f for j in range(kmax + 1) for k in range(kmax + 1) for f in hom_set(j, k)]


def mor_index(f: Morphism) -> int:
    """Position of ``f`` inside ``hom_set(j, k)``."""
    j, k, rows = f
    idx = 0
    for r in rows:
        idx = (idx << k) | r
    return idx


def identity(k: int) -> Morphism:
    return (k, k, tuple(1 << i for i in range(k)))


def compose(f: Morphism, g: Morphism) -> Morphism:
    """First ``f`` then ``g``."""
    j, k, a = f
    k2, l, b = g
    if k != k2:
        raise ValueError("morphisms not composable")
    return (j, l, tuple(_apply_rows(b, r) for r in a))


def _apply_rows(rows: Sequence[int], v: int) -> int:
    out = 0
    for i in bits(v):
        out ^= rows[i]
    return out


def as_mat(f: Morphism) -> Mat:
    return Mat(f[2], f[1])


def from_mat(m: Mat) -> Morphism:
    return (m.nrows, m.ncols, m.rows)


def plus_one(f: Morphism) -> Morphism:
    """f (+) id_F on the last coordinate."""
    j, k, rows = f
    return (j + 1, k + 1, tuple(rows) + (1 << k,))


def inclusion(k: int) -> Morphism:
    """F^k -> F^(k+1) onto the first k coordinates."""
    return (k, k + 1, tuple(1 << i for i in range(k)))


def projection(k: int) -> Morphism:
    """F^(k+1) -> F^k forgetting the last coordinate."""
    return (k + 1, k, tuple(1 << i for i in range(k)) + (0,))


def generators(kmax: int) -> list[Morphism]:
    """Transvections, adjacent transpositions, one corank-1 idempotent per
    dimension, and the maps between neighbouring dimensions."""
    gens: list[Morphism] = []
    for k in range(1, kmax + 1):
        base = [1 << i for i in range(k)]
        for a in range(k):
            for b in range(k):
                if a != b:
                    rows = list(base)
                    rows[a] ^= 1 << b
                    gens.append((k, k, tuple(rows)))
        for a in range(k - 1):
            rows = list(base)
            rows[a], rows[a + 1] = rows[a + 1], rows[a]
            gens.append((k, k, tuple(rows)))
        rows = list(base)
        rows[k - 1] = 0
        gens.append((k, k, tuple(rows)))
    for k in range(kmax):
        gens.append(inclusion(k))
        gens.append(projection(k))
    return gens


# -- functors -------------------------------------------------------------

class Rule:
    """A functor given by formulas valid in every dimension."""

    name = "F"
    degree: int | None = None

    def dim(self, n: int) -> int:
        raise NotImplementedError

    def on(self, f: Morphism) -> Mat:
        raise NotImplementedError


@dataclass
class PolyFunctor:
    kmax: int
    dims: tuple[int, ...]
    table: dict[Morphism, Mat] = field(repr=False)
    name: str = "F"
    rule: Rule | None = field(default=None, repr=False)

    def dim(self, k: int) -> int:
        return self.dims[k]

    def at(self, f: Morphism) -> Mat:
        """F(f); beyond kmax only functors with a rule can answer."""
        hit = self.table.get(f)
        if hit is not None:
            return hit
        if self.rule is not None:
            return self.rule.on(f)
        raise HeadroomError(f"{self.name} is only known up to dimension {self.kmax}")

    def on_matrix(self, m: Mat) -> Mat:
        return self.at(from_mat(m))

    def dim_any(self, n: int) -> int:
        if n <= self.kmax:
            return self.dims[n]
        if self.rule is not None:
            return self.rule.dim(n)
        raise HeadroomError(f"{self.name} is only known up to dimension {self.kmax}")

    def is_zero(self) -> bool:
        return not any(self.dims)

    def total_dim(self) -> int:
        return sum(self.dims)

    def relation_failures(self, limit: int | None = None) -> list[tuple[Morphism, Morphism]]:
        """Pairs (f, g) with g a generator and F(f then g) != F(f) F(g)."""
        bad = []
        gens = generators(self.kmax)
        for k in range(self.kmax + 1):
            if self.table[identity(k)] != Mat.identity(self.dims[k]):
                bad.append((identity(k), identity(k)))
        for f in self.table:
            for g in gens:
                if g[0] != f[1]:
                    continue
                if self.table[compose(f, g)] != self.table[f] @ self.table[g]:
                    bad.append((f, g))
                    if limit is not None and len(bad) >= limit:
                        return bad
        return bad

    def is_functorial(self) -> bool:
        return not self.relation_failures(limit=1)

    def restrict_kmax(self, kmax: int) -> "PolyFunctor":
        if kmax > self.kmax:
            raise HeadroomError("cannot extend a stored functor")
        table = {f: m for f, m in self.table.items() if f[0] <= kmax and f[1] <= kmax}
        return PolyFunctor(kmax, self.dims[:kmax + 1], table, self.name, self.rule)

    def __repr__(self) -> str:
        return f"PolyFunctor({self.name}, kmax={self.kmax}, dims={list(self.dims)})"


def from_rule(rule: Rule, kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    table = {f: rule.on(f) for f in all_morphisms(kmax)}
    dims = tuple(rule.dim(k) for k in range(kmax + 1))
    return PolyFunctor(kmax, dims, table, rule.name, rule)


def from_generators(kmax: int, dims: Sequence[int], action: Mapping[Morphism, Mat],
                    name: str = "F") -> PolyFunctor:
    """Fill the table by composing generators; every relation is checked.

    ``action`` must cover ``generators(kmax)``.
    """
    dims = tuple(dims)
    if len(dims) != kmax + 1:
        raise ValueError(f"need {kmax + 1} dimensions, got {len(dims)}")
    gens = generators(kmax)
    for g in gens:
        m = action.get(g)
        if m is None:
            raise ValueError(f"missing action of generator {g}")
        if m.shape != (dims[g[0]], dims[g[1]]):
            raise ValueError(f"generator {g}: shape {m.shape}, expected {(dims[g[0]], dims[g[1]])}")
    by_source: dict[int, list[Morphism]] = {}
    for g in gens:
        by_source.setdefault(g[0], []).append(g)
    table: dict[Morphism, Mat] = {}
    queue: deque[Morphism] = deque()
    for k in range(kmax + 1):
        table[identity(k)] = Mat.identity(dims[k])
        queue.append(identity(k))
    while queue:
        f = queue.popleft()
        for g in by_source.get(f[1], []):
            h = compose(f, g)
            m = table[f] @ action[g]
            old = table.get(h)
            if old is None:
                table[h] = m
                queue.append(h)
            elif old != m:
                raise NotFunctorial(f"relation fails: {f} then {g} gives a second value on {h}")
    missing = len(all_morphisms(kmax)) - len(table)
    if missing:
        raise NotFunctorial(f"{missing} morphisms not reached from the generators")
    return PolyFunctor(kmax, dims, table, name)


def constant(kmax: int = DEFAULT_KMAX, dim: int = 1, name: str | None = None) -> PolyFunctor:
    table = {f: Mat.identity(dim) for f in all_morphisms(kmax)}
    return PolyFunctor(kmax, (dim,) * (kmax + 1), table, name or ("F2" if dim == 1 else f"F2^{dim}"))


def zero_functor(kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    return constant(kmax, 0, "0")


def same_functor(a: PolyFunctor, b: PolyFunctor) -> bool:
    return a.kmax == b.kmax and a.dims == b.dims and all(a.table[f] == b.table[f] for f in a.table)


# -- natural transformations ----------------------------------------------

@dataclass
class NatTrans:
    source: PolyFunctor
    target: PolyFunctor
    comps: tuple[Mat, ...]

    def __post_init__(self):
        if self.source.kmax != self.target.kmax:
            raise ValueError("functors live on different truncations")
        self.comps = tuple(self.comps)
        for k, c in enumerate(self.comps):
            if c.shape != (self.source.dims[k], self.target.dims[k]):
                raise ValueError(f"component {k} has shape {c.shape}")

    @property
    def kmax(self) -> int:
        return self.source.kmax

    def violations(self) -> list[Morphism]:
        out = []
        for g in generators(self.kmax):
            j, k, _ = g
            if self.source.table[g] @ self.comps[k] != self.comps[j] @ self.target.table[g]:
                out.append(g)
        return out

    def is_natural(self) -> bool:
        return not self.violations()

    def check(self) -> "NatTrans":
        bad = self.violations()
        if bad:
            raise NotNatural(f"not natural along {bad[0]}")
        return self

    def then(self, other: "NatTrans") -> "NatTrans":
        return NatTrans(self.source, other.target, tuple(a @ b for a, b in zip(self.comps, other.comps)))

    def __add__(self, other: "NatTrans") -> "NatTrans":
        return NatTrans(self.source, self.target, tuple(a + b for a, b in zip(self.comps, other.comps)))

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.comps)

    def ranks(self) -> list[int]:
        return [c.rank() for c in self.comps]

    def is_injective(self) -> bool:
        return all(c.rank() == c.nrows for c in self.comps)

    def is_surjective(self) -> bool:
        return all(c.rank() == c.ncols for c in self.comps)

    def is_iso(self) -> bool:
        return self.is_injective() and self.is_surjective()

    def as_vector(self) -> int:
        """All matrix entries packed into one int (for linear algebra on Hom)."""
        out, off = 0, 0
        for c in self.comps:
            for r in c.rows:
                out |= r << off
                off += c.ncols
        return out


def identity_nat(f: PolyFunctor) -> NatTrans:
    return NatTrans(f, f, tuple(Mat.identity(d) for d in f.dims))


def zero_nat(a: PolyFunctor, b: PolyFunctor) -> NatTrans:
    return NatTrans(a, b, tuple(Mat.zero(x, y) for x, y in zip(a.dims, b.dims)))


def nat_from_vector(a: PolyFunctor, b: PolyFunctor, v: int) -> NatTrans:
    comps, off = [], 0
    for x, y in zip(a.dims, b.dims):
        mask = (1 << y) - 1
        rows = []
        for _ in range(x):
            rows.append((v >> off) & mask)
            off += y
        comps.append(Mat(tuple(rows), y))
    return NatTrans(a, b, tuple(comps))


# -- sub, quotient, kernel, image, sums ------------------------------------

def subfunctor(f: PolyFunctor, spaces: Sequence[Iterable[int]], name: str | None = None) -> tuple[PolyFunctor, NatTrans]:
    """The subfunctor spanned by ``spaces[k]`` in F(k); raises if not stable."""
    bases = [Span(sp).basis for sp in spaces]
    table = {}
    for g, m in f.table.items():
        j, k, _ = g
        try:
            table[g] = restrict(m, bases[j], bases[k])
        except ValueError:
            raise NotFunctorial(f"subspaces not stable under {g}") from None
    sub = PolyFunctor(f.kmax, tuple(len(b) for b in bases), table, name or f"sub({f.name})")
    incl = NatTrans(sub, f, tuple(Mat(tuple(b), f.dims[k]) for k, b in enumerate(bases)))
    return sub, incl


def quotient(f: PolyFunctor, spaces: Sequence[Iterable[int]], name: str | None = None) -> tuple[PolyFunctor, NatTrans]:
    qs = [Quotient(f.dims[k], Span(sp)) for k, sp in enumerate(spaces)]
    table = {}
    for g, m in f.table.items():
        j, k, _ = g
        rows = []
        for c in qs[j].free:
            img = m.apply(1 << c)
            rows.append(qs[k].project(img))
        for v in qs[j].sub.basis:
            if qs[k].project(m.apply(v)):
                raise NotFunctorial(f"subspaces not stable under {g}")
        table[g] = Mat(tuple(rows), qs[k].dim)
    q = PolyFunctor(f.kmax, tuple(x.dim for x in qs), table, name or f"quot({f.name})")
    proj = NatTrans(f, q, tuple(x.projection() for x in qs))
    return q, proj


def kernel(eta: NatTrans, name: str | None = None) -> tuple[PolyFunctor, NatTrans]:
    return subfunctor(eta.source, [c.kernel() for c in eta.comps], name)


def image(eta: NatTrans, name: str | None = None) -> tuple[PolyFunctor, NatTrans]:
    return subfunctor(eta.target, [c.image() for c in eta.comps], name)


def cokernel(eta: NatTrans, name: str | None = None) -> tuple[PolyFunctor, NatTrans]:
    return quotient(eta.target, [c.image() for c in eta.comps], name)


def factor_through_injection(eta: NatTrans, inc: NatTrans) -> NatTrans:
    """The unique lift of eta along an injective ``inc``."""
    comps = [restrict(e, [1 << r for r in range(e.nrows)], list(i.rows))
             for e, i in zip(eta.comps, inc.comps)]
    return NatTrans(eta.source, inc.source, tuple(comps))


def direct_sum(*fs: PolyFunctor) -> tuple[PolyFunctor, list[NatTrans], list[NatTrans]]:
    kmax = fs[0].kmax
    dims = tuple(sum(f.dims[k] for f in fs) for k in range(kmax + 1))
    offs = [[0] * (kmax + 1)]
    for f in fs[:-1]:
        offs.append([o + f.dims[k] for k, o in enumerate(offs[-1])])
    table = {}
    for g in fs[0].table:
        j, k, _ = g
        rows = []
        for i, f in enumerate(fs):
            for r in f.table[g].rows:
                rows.append(r << offs[i][k])
        table[g] = Mat(tuple(rows), dims[k])
    s = PolyFunctor(kmax, dims, table, " + ".join(f.name for f in fs))
    incls, projs = [], []
    for i, f in enumerate(fs):
        incls.append(NatTrans(f, s, tuple(Mat(tuple(1 << (offs[i][k] + r) for r in range(f.dims[k])), dims[k])
                                          for k in range(kmax + 1))))
        projs.append(NatTrans(s, f, tuple(
            Mat(tuple((1 << (c - offs[i][k])) if offs[i][k] <= c < offs[i][k] + f.dims[k] else 0
                      for c in range(dims[k])), f.dims[k]) for k in range(kmax + 1))))
    return s, incls, projs


def is_exact_at(f: NatTrans, g: NatTrans) -> bool:
    for k in range(f.kmax + 1):
        a, b = f.comps[k], g.comps[k]
        if not (a @ b).is_zero():
            return False
        if a.rank() != b.nrows - b.rank():
            return False
    return True


def is_short_exact(i: NatTrans, p: NatTrans) -> bool:
    return i.is_injective() and p.is_surjective() and is_exact_at(i, p)


# -- composition ------------------------------------------------------------

class _ComposedRule(Rule):
    def __init__(self, g: Rule, f: Rule):
        self.g, self.f = g, f
        self.name = f"{g.name}o{f.name}"

    def dim(self, n: int) -> int:
        return self.g.dim(self.f.dim(n))

    def on(self, mor: Morphism) -> Mat:
        return self.g.on(from_mat(self.f.on(mor)))


def compose_functors(g: PolyFunctor, f: PolyFunctor, name: str | None = None) -> PolyFunctor:
    """G o F: V -> G(F(V)). G must know dimensions up to max dim F(k)."""
    need = max(f.dims)
    if need > g.kmax and g.rule is None:
        raise HeadroomError(f"{g.name} needed up to dimension {need}, stored only to {g.kmax}")
    table = {mor: g.on_matrix(m) for mor, m in f.table.items()}
    dims = tuple(g.dim_any(d) for d in f.dims)
    rule = _ComposedRule(g.rule, f.rule) if (g.rule is not None and f.rule is not None) else None
    return PolyFunctor(f.kmax, dims, table, name or f"{g.name}o{f.name}", rule)


def apply_to_nat(g: PolyFunctor, eta: NatTrans, src: PolyFunctor | None = None,
                 tgt: PolyFunctor | None = None) -> NatTrans:
    """G(eta): G o F -> G o F'."""
    src = src or compose_functors(g, eta.source)
    tgt = tgt or compose_functors(g, eta.target)
    return NatTrans(src, tgt, tuple(g.on_matrix(c) for c in eta.comps))


class NatRule:
    """A natural transformation between rules, valid in every dimension."""

    def component(self, n: int) -> Mat:
        raise NotImplementedError


def whisker(eta: NatRule, f: PolyFunctor, src: PolyFunctor, tgt: PolyFunctor) -> NatTrans:
    """eta o F: G o F -> H o F, for src = G o F and tgt = H o F."""
    return NatTrans(src, tgt, tuple(eta.component(d) for d in f.dims))


def nat_from_rule(eta: NatRule, src: PolyFunctor, tgt: PolyFunctor) -> NatTrans:
    return NatTrans(src, tgt, tuple(eta.component(k) for k in range(src.kmax + 1)))


# -- difference functor and degree -------------------------------------------

def delta_functor(f: PolyFunctor) -> PolyFunctor:
    """Delta F(V) = F(V + F) / F(V), defined up to kmax - 1."""
    if f.kmax < 1:
        raise HeadroomError("Delta needs one spare dimension")
    kmax = f.kmax - 1
    qs = [Quotient(f.dims[k + 1], f.table[inclusion(k)].image()) for k in range(kmax + 1)]
    table = {}
    for g in all_morphisms(kmax):
        j, k, _ = g
        m = f.table[plus_one(g)]
        table[g] = Mat(tuple(qs[k].project(m.apply(1 << c)) for c in qs[j].free), qs[k].dim)
    return PolyFunctor(kmax, tuple(q.dim for q in qs), table, f"D{f.name}")


@dataclass
class Degree:
    """Polynomial degree on the truncation: ``value`` is None when the
    Delta-tower runs out of room before vanishing (then degree >= lower)."""
    value: int | None
    lower: int
    kmax: int
    tower_dims: list[list[int]]

    @property
    def certified(self) -> bool:
        return self.value is not None

    @property
    def finite_positive(self) -> bool:
        return self.value is not None and self.value > 0

    def describe(self) -> str:
        if self.value is None:
            return f"exceeds kmax (degree >= {self.lower} at kmax={self.kmax})"
        if self.value < 0:
            return "zero functor"
        return str(self.value)

    def as_dict(self) -> dict:
        return {"degree": self.value, "lower_bound": self.lower, "kmax": self.kmax,
                "certified": self.certified, "delta_dims": self.tower_dims}


def poly_degree(f: PolyFunctor) -> Degree:
    """Least d with Delta^(d+1) F = 0 on every object still available.

    The zero functor gets -1. Certifying degree d needs kmax >= d + 1.
    """
    g = f
    tower = [list(g.dims)]
    j = 0
    while True:
        if g.is_zero():
            return Degree(j - 1, max(j - 1, -1), f.kmax, tower)
        if g.kmax == 0:
            return Degree(None, j, f.kmax, tower)
        g = delta_functor(g)
        tower.append(list(g.dims))
        j += 1


def iterated_delta(f: PolyFunctor, times: int) -> PolyFunctor:
    for _ in range(times):
        f = delta_functor(f)
    return f
