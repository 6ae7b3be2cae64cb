"""The Singer functor R_1, its truncations R_{1/n} and the residue differential.

Everything lives inside the Laurent ambient F_2[u^{+-1}] (x) M. In total degree
``D`` the ambient has one basis vector u^{D-d} (x) x for each basis vector ``x``
of M (degree ``d``), so an ambient vector is a bitmask over a global
enumeration of the basis of M, whatever its degree. Multiplication by ``u``
keeps the bitmask and raises the degree.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gf2 import Mat, Span, bits
from .gmod import GradedModule, ModuleMap, build_module, is_unstable, suspend, tmin
from .functors import phi
from .steenrod import binom2


class LaurentAmbient:
    """F_2[u^{+-1}] (x) M with Sq^k(u^e (x) m) = sum_j C(e, j) u^{e+j} (x) Sq^{k-j} m."""

    def __init__(self, m: GradedModule):
        self.base = m
        self.keys: list[tuple[int, int]] = [(d, r) for d in m.degrees() for r in range(m.dim(d))]
        self.index = {k: g for g, k in enumerate(self.keys)}
        self._offset = {}
        for g, (d, r) in enumerate(self.keys):
            self._offset.setdefault(d, g)

    def lift(self, d: int, v: int) -> int:
        """The bitmask of a degree-``d`` vector of M."""
        return v << self._offset[d] if v else 0

    def component(self, w: int, d: int) -> int:
        """The M^d part of an ambient bitmask, as a vector of M^d."""
        off = self._offset.get(d)
        if off is None:
            return 0
        return (w >> off) & ((1 << self.base.dim(d)) - 1)

    def sq(self, k: int, total: int, w: int) -> int:
        """Sq^k on an ambient vector of total degree ``total``."""
        m = self.base
        out = 0
        for g in bits(w):
            d, r = self.keys[g]
            e = total - d
            for j in range(0, k + 1):
                if not binom2(e, j):
                    continue
                img = m.apply(k - j, d, 1 << r)
                if img:
                    out ^= self.lift(d + k - j, img)
        return out

    def st1(self, d: int, r: int) -> int:
        """St_1(x) = sum_i u^{|x|-i} (x) Sq^i x, living in total degree 2|x|."""
        m = self.base
        out = self.lift(d, 1 << r)
        for i in range(1, m.dmax - d + 1):
            img = m.apply(i, d, 1 << r)
            if img:
                out ^= self.lift(d + i, img)
        return out

    def residue(self, total: int, w: int) -> int:
        """The u^{-1} coefficient, a vector of M in degree ``total + 1``."""
        return self.component(w, total + 1)


@dataclass
class SingerModule:
    """R_1 M or R_{1/n} M with its u-action and generator labels.

    ``generators[D]`` lists (a, d, r), meaning u^a St_1(x) for the r-th basis
    vector x of M in degree d; these form the basis of ``carrier`` in degree D.
    """
    carrier: GradedModule
    u_action: dict[int, Mat]
    generators: dict[int, list[tuple[int, int, int]]]
    ambient: LaurentAmbient
    truncation: int | None = None
    floor: int = 0
    _pos: dict = field(default_factory=dict, repr=False)

    @property
    def base(self) -> GradedModule:
        return self.ambient.base

    def position(self, a: int, d: int, r: int) -> int:
        return self._pos[(a, d, r)]

    def embedding(self, total: int) -> list[int]:
        """Ambient bitmasks of the basis vectors in degree ``total``."""
        return [self.ambient.st1(d, r) for (a, d, r) in self.generators.get(total, [])]

    def filtration_basis(self, total: int, i: int) -> list[int]:
        """Basis vectors of u^i R in degree ``total`` (as coordinate bitmasks)."""
        return [1 << k for k, (a, d, r) in enumerate(self.generators.get(total, [])) if a >= i]


def exponent_floor(m: GradedModule) -> int:
    """Smallest t >= 0 with Sigma^t M unstable inside the window."""
    t = max(0, -(m.bottom() if m.dims else 0))
    while not is_unstable(suspend(m, t)):
        t += 1
    return t


def _singer(m: GradedModule, n: int | None, dmax: int | None) -> SingerModule:
    amb = LaurentAmbient(m)
    t = exponent_floor(m)
    bottom = m.bottom() if m.dims else 0
    if dmax is None:
        dmax = 2 * m.top() + n - 1 if (n is not None and m.dims) else m.dmax
    lo = 2 * bottom if m.dims else 0
    gens: dict[int, list[tuple[int, int, int]]] = {}
    for total in range(lo, dmax + 1):
        row = []
        for d in m.degrees():
            a = total - 2 * d
            if a < 0 or (n is not None and a >= n):
                continue
            row.extend((a, d, r) for r in range(m.dim(d)))
        if row:
            gens[total] = row
    pos = {key: k for total, row in gens.items() for k, key in enumerate(row)}
    spans: dict[int, Span] = {}
    for total, row in gens.items():
        sp = Span(track=True)
        for (a, d, r) in row:
            if not sp.add(amb.st1(d, r)):
                raise ArithmeticError("u^a St_1(x) classes are dependent")
        spans[total] = sp

    # Sq^k on u^a St_1(x) for the full R_1: coordinates in the R_1 spanning set, then truncated
    full_cache: dict[int, tuple[Span, list]] = {}

    def full_span(total):
        hit = full_cache.get(total)
        if hit is None:
            sp = Span(track=True)
            keys = []
            for d in m.degrees():
                a = total - 2 * d
                if a >= 0:
                    for r in range(m.dim(d)):
                        sp.add(amb.st1(d, r))
                        keys.append((a, d, r))
            hit = full_cache[total] = (sp, keys)
        return hit

    def op(k, total, idx):
        a, d, r = gens[total][idx]
        w = amb.sq(k, total, amb.st1(d, r))
        if not w:
            return 0
        sp, keys = full_span(total + k)
        try:
            coords = sp.coords(w)
        except ValueError:
            raise ArithmeticError(f"R_1 not closed under Sq^{k} in degree {total}") from None
        out = 0
        for c in bits(coords):
            key = keys[c]
            if key in pos and (n is None or key[0] < n):
                out |= 1 << pos[key]
        return out

    dims = {total: len(row) for total, row in gens.items()}
    complete = n is not None and m.complete and dmax >= 2 * (m.top() or 0) + n - 1
    if m.complete:
        trust = None if complete else dmax
    else:
        trust = tmin(m.trust - t if m.trust is not None else None, dmax)
    carrier = build_module(dims, op, min(lo, m.dmin), dmax, complete=complete, trust=trust)
    from .gmod import mark_unstable
    carrier = mark_unstable(carrier)
    u = {}
    for total, row in gens.items():
        nxt = gens.get(total + 1)
        if not nxt:
            continue
        rows = []
        for (a, d, r) in row:
            key = (a + 1, d, r)
            rows.append(1 << pos[key] if key in pos else 0)
        u[total] = Mat(tuple(rows), len(nxt))
    labels = {total: [f"u{a}St({m.label(d, r)})" for (a, d, r) in row] for total, row in gens.items()}
    carrier = GradedModule(carrier.dmin, carrier.dmax, carrier.dims, carrier.action, carrier.complete,
                           carrier.trust, carrier.unstable, labels)
    return SingerModule(carrier, u, gens, amb, n, t, pos)


def r1(m: GradedModule, dmax: int | None = None) -> SingerModule:
    """R_1 M: the F_2[u]-span of the total squares St_1(x)."""
    return _singer(m, None, dmax)


def r1_truncated(m: GradedModule, n: int, dmax: int | None = None) -> SingerModule:
    """R_{1/n} M = R_1 M / u^n R_1 M."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return _singer(m, n, dmax)


def to_phi(s: SingerModule, target: GradedModule | None = None) -> ModuleMap:
    """R ->> Phi M, keeping the u^0 St_1(x) coordinates."""
    ph = target or phi(s.base)
    mats = {}
    for total, row in s.generators.items():
        if not ph.dim(total):
            continue
        mats[total] = Mat(tuple((1 << r) if a == 0 else 0 for (a, d, r) in row), ph.dim(total))
    return ModuleMap(s.carrier, ph, mats)


def u_multiple_inclusion(s: SingerModule, i: int = 1):
    """u^i R as a submodule of R, with its inclusion."""
    from .gmod import subspace_module
    basis = {total: s.filtration_basis(total, i) for total in s.generators}
    return subspace_module(s.carrier, basis)


def filtration_quotient(s: SingerModule, i: int, target: GradedModule | None = None) -> ModuleMap:
    """Sigma^i Phi M -> R, Phi x -> u^i St_1(x); injective onto the i-th u-adic layer.

    Only Steenrod-linear when u^{i+1} R is zero, i.e. for the top layer of R_{1/(i+1)}.
    """
    ph = target or suspend(phi(s.base), i)
    mats = {}
    for total in ph.degrees():
        d = (total - i) // 2
        rows = []
        for r in range(ph.dim(total)):
            key = (i, d, r)
            rows.append(1 << s.position(*key) if key in s._pos else 0)
        if total in s.generators:
            mats[total] = Mat(tuple(rows), s.carrier.dim(total))
    return ModuleMap(ph, s.carrier, mats)


def truncation_map(big: SingerModule, small: SingerModule) -> ModuleMap:
    """R_{1/n} ->> R_{1/m} for m <= n (drop u^a with a >= m)."""
    mats = {}
    for total, row in big.generators.items():
        if total not in small.generators:
            continue
        mats[total] = Mat(tuple(1 << small._pos[key] if key in small._pos else 0 for key in row),
                          small.carrier.dim(total))
    return ModuleMap(big.carrier, small.carrier, mats)


def singer_on_map(f: ModuleMap, src: SingerModule, tgt: SingerModule) -> ModuleMap:
    """R f: u^a St_1(x) -> u^a St_1(f x)."""
    mats = {}
    for total, row in src.generators.items():
        if total not in tgt.generators:
            continue
        out = []
        for (a, d, r) in row:
            v = f.apply(d, 1 << r)
            w = 0
            for c in bits(v):
                key = (a, d + f.shift, c)
                if key in tgt._pos:
                    w |= 1 << tgt._pos[key]
            out.append(w)
        mats[total] = Mat(tuple(out), tgt.carrier.dim(total))
    return ModuleMap(src.carrier, tgt.carrier, mats)


def residue_differential(n_mod: GradedModule, n: int, dmax: int | None = None):
    """d_{1/n}: R_{1/n}(Sigma^{-n} N) -> Sigma^{-n-1} N, u^a St_1(x) -> Sq^{|x|+a+1} x.

    Returns (R_{1/n}(Sigma^{-n} N), d, Sigma^{-n-1} N).
    """
    if not is_unstable(n_mod):
        raise ValueError("residue differential needs an unstable module")
    m = suspend(n_mod, -n)
    s = r1_truncated(m, n, dmax)
    tgt = suspend(n_mod, -n - 1)
    mats = {}
    for total, row in s.generators.items():
        if not tgt.dim(total):
            continue
        rows = [m.apply(d + a + 1, d, 1 << r) if d + a + 1 >= 0 else 0 for (a, d, r) in row]
        mats[total] = Mat(tuple(rows), tgt.dim(total))
    dmap = ModuleMap(s.carrier, tgt, mats)
    return s, dmap, tgt


def residue_via_ambient(s: SingerModule, tgt: GradedModule) -> ModuleMap:
    """The same differential read off as the u^{-1} coefficient inside the ambient."""
    mats = {}
    for total, row in s.generators.items():
        if not tgt.dim(total):
            continue
        mats[total] = Mat(tuple(s.ambient.residue(total, s.ambient.st1(d, r)) for (a, d, r) in row), tgt.dim(total))
    return ModuleMap(s.carrier, tgt, mats)
