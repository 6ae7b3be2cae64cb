"""Frobenius, quadratic functors, loops and destabilization on graded modules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .gf2 import Mat, Span, bits
from .gmod import (GradedModule, ModuleMap, Pushout, cokernel, direct_sum,
                   factor_through_injection, factor_through_surjection, free_unstable, generated_subspaces,
                   identity_map, induced_on_quotients, is_unstable, kernel, mark_unstable, pushout, quotient,
                   subspace_module, suspend, tensor_with_index, tmin)


class NotUnstable(ValueError):
    pass


def require_unstable(m: GradedModule, what: str = "input"):
    if not is_unstable(m):
        raise NotUnstable(f"{what} is not an unstable module")


# -- Frobenius and lambda -------------------------------------------------

def phi(m: GradedModule) -> GradedModule:
    """Phi M: degree doubled, Sq^{2i} acting as Sq^i, odd squares zero."""
    dims = {2 * d: n for d, n in m.dims.items()}
    action = {(2 * i, 2 * d): mat for (i, d), mat in m.action.items()}
    labels = {2 * d: [f"F({x})" for x in v] for d, v in m.labels.items()} if m.labels else None
    trust = None if m.trust is None else 2 * m.trust + 1
    out = GradedModule(2 * m.dmin, 2 * m.dmax + 1, dims, action, complete=m.complete, trust=trust, labels=labels)
    return mark_unstable(out)


def phi_map(f: ModuleMap, source: GradedModule | None = None, target: GradedModule | None = None) -> ModuleMap:
    src = source or phi(f.source)
    tgt = target or phi(f.target)
    return ModuleMap(src, tgt, {2 * d: m for d, m in f.mats.items()}, 2 * f.shift)


def lambda_map(m: GradedModule, source: GradedModule | None = None) -> ModuleMap:
    """lambda: Phi M -> M, Phi x -> Sq^{|x|} x."""
    src = source or phi(m)
    mats = {}
    for d in m.degrees():
        if d < 0 or not m.dim(2 * d):
            continue
        mats[2 * d] = m.sq(d, d)
    return ModuleMap(src, m, mats)


# -- quadratic functors ------------------------------------------------------

@dataclass
class SquareFunctors:
    """T^2, S^2, Lambda^2, Gamma^2 and Phi of one module with the natural maps.

    Sequences available: 0 -> L2 -> G2 -> Phi -> 0, 0 -> Phi -> S2 -> L2 -> 0,
    0 -> L2 -> T2 -> S2 -> 0 and 0 -> G2 -> T2 -> L2 -> 0.
    """
    base: GradedModule
    t2: GradedModule
    s2: GradedModule
    l2: GradedModule
    g2: GradedModule
    phi: GradedModule
    index: dict
    pos: dict
    t2_to_s2: ModuleMap
    t2_to_l2: ModuleMap
    g2_to_t2: ModuleMap
    l2_to_g2: ModuleMap
    l2_to_t2: ModuleMap
    g2_to_phi: ModuleMap
    phi_to_s2: ModuleMap
    s2_to_l2: ModuleMap
    norm: ModuleMap

    def vec(self, a: int, r: int, b: int, c: int) -> int:
        """The T^2 vector x_r (x) x_c (degrees a, b) as a bitmask in degree a + b."""
        return 1 << self.pos[(a, r, b, c)]

    def trust(self) -> int | None:
        return tmin(self.t2.trust, self.phi.trust)


def square_functors(m: GradedModule, dmax: int | None = None) -> SquareFunctors:
    t2, index, pos = tensor_with_index(m, m, dmax)
    swap = {}
    for d, keys in index.items():
        rows = []
        for k, (a, r, b, c) in enumerate(keys):
            rows.append((1 << k) ^ (1 << pos[(b, c, a, r)]))
        swap[d] = Mat(tuple(rows), len(keys))
    one_plus_tau = ModuleMap(t2, t2, swap)
    norms: dict[int, list[int]] = {}
    diag: dict[int, list[int]] = {}
    invariant: dict[int, list[int]] = {}
    for d, keys in index.items():
        for k, (a, r, b, c) in enumerate(keys):
            j = pos[(b, c, a, r)]
            if j == k:
                diag.setdefault(d, []).append(1 << k)
                invariant.setdefault(d, []).append(1 << k)
            elif k < j:
                norms.setdefault(d, []).append((1 << k) | (1 << j))
                invariant.setdefault(d, []).append((1 << k) | (1 << j))
    s2, t2_to_s2 = quotient(t2, norms)
    l2, t2_to_l2 = quotient(t2, {d: norms.get(d, []) + diag.get(d, []) for d in index})
    g2, g2_to_t2 = subspace_module(t2, invariant)
    g2 = _inherit(g2, t2)
    g2_to_t2 = ModuleMap(g2, t2, g2_to_t2.mats)
    norm = factor_through_injection(one_plus_tau, g2_to_t2)
    l2_to_g2 = factor_through_surjection(norm, t2_to_l2)
    l2_to_t2 = l2_to_g2.then(g2_to_t2)
    ph = phi(m)
    if not ph.complete and ph.dmax > t2.dmax:
        ph = ph.with_window(dmax=t2.dmax)
    g2p = {}
    for d in g2.degrees():
        rows = []
        for v in g2_to_t2.at(d).rows:
            out = 0
            for k in bits(v):
                a, r, b, c = index[d][k]
                if (a, r) == (b, c):
                    out |= 1 << r
            rows.append(out)
        g2p[d] = Mat(tuple(rows), ph.dim(d))
    g2_to_phi = ModuleMap(g2, ph, g2p)
    ps = {}
    for d in ph.degrees():
        if d > t2.dmax:
            continue
        a = d // 2
        ps[d] = Mat(tuple(t2_to_s2.apply(d, 1 << pos[(a, r, a, r)]) for r in range(ph.dim(d))), s2.dim(d))
    phi_to_s2 = ModuleMap(ph, s2, ps)
    s2_to_l2 = factor_through_surjection(t2_to_l2, t2_to_s2)
    return SquareFunctors(m, t2, s2, l2, g2, ph, index, pos, t2_to_s2, t2_to_l2, g2_to_t2, l2_to_g2,
                          l2_to_t2, g2_to_phi, phi_to_s2, s2_to_l2, norm)


@dataclass
class SquareMaps:
    """The maps induced by one module map on T^2, S^2, Lambda^2, Gamma^2 and Phi."""
    t2: ModuleMap
    s2: ModuleMap
    l2: ModuleMap
    g2: ModuleMap
    phi: ModuleMap


def square_on_map(f: ModuleMap, a: SquareFunctors, b: SquareFunctors) -> SquareMaps:
    """T^2 f (x (x) y -> f x (x) f y) and what it induces on the other four functors."""
    if f.shift:
        raise ValueError("square functors need a degree-zero map")
    mats = {}
    for d, keys in a.index.items():
        if not b.t2.dim(d):
            continue
        rows = []
        for (p, r, q, c) in keys:
            out = 0
            for x in bits(f.apply(p, 1 << r)):
                for y in bits(f.apply(q, 1 << c)):
                    out ^= 1 << b.pos[(p, x, q, y)]
            rows.append(out)
        mats[d] = Mat(tuple(rows), b.t2.dim(d))
    tf = ModuleMap(a.t2, b.t2, mats)
    s2 = factor_through_surjection(tf.then(b.t2_to_s2), a.t2_to_s2)
    l2 = factor_through_surjection(tf.then(b.t2_to_l2), a.t2_to_l2)
    g2 = factor_through_injection(a.g2_to_t2.then(tf), b.g2_to_t2)
    ph = phi_map(f, a.phi, b.phi)
    return SquareMaps(tf, s2, l2, g2, ph)


def _inherit(sub: GradedModule, parent: GradedModule) -> GradedModule:
    return GradedModule(parent.dmin, parent.dmax, sub.dims, sub.action, complete=parent.complete,
                        trust=parent.trust, unstable=sub.unstable)


def t2(m: GradedModule) -> GradedModule:
    return square_functors(m).t2


def sym2(m: GradedModule) -> GradedModule:
    return square_functors(m).s2


def ext2(m: GradedModule) -> GradedModule:
    return square_functors(m).l2


def gamma2(m: GradedModule) -> GradedModule:
    return square_functors(m).g2


# -- loops ------------------------------------------------------------------

@dataclass
class Loops:
    """Omega M with the projection Sigma^{-1} M ->> Omega M, and Omega_1 M inside Sigma^{-1} Phi M."""
    omega: GradedModule
    proj: ModuleMap
    omega1: GradedModule
    incl: ModuleMap


def loops(m: GradedModule) -> Loops:
    """From 0 -> Sigma Omega_1 M -> Phi M -lambda-> M -> Sigma Omega M -> 0."""
    require_unstable(m)
    lam = lambda_map(m)
    c, p = cokernel(lam)
    k, i = kernel(lam)
    omega = mark_unstable(suspend(c, -1))
    omega1 = mark_unstable(suspend(k, -1))
    return Loops(omega, ModuleMap(suspend(m, -1), omega, {d - 1: mat for d, mat in p.mats.items()}),
                 omega1, ModuleMap(omega1, suspend(lam.source, -1), {d - 1: mat for d, mat in i.mats.items()}))


def loops_n(m: GradedModule, n: int) -> tuple[GradedModule, ModuleMap]:
    """Omega^n M and the projection Sigma^{-n} M ->> Omega^n M."""
    cur, proj = m, identity_map(m)
    for _ in range(n):
        lp = loops(cur)
        shifted = ModuleMap(suspend(proj.source, -1), suspend(cur, -1),
                            {d - 1: mat for d, mat in proj.mats.items()})
        proj = shifted.then(lp.proj)
        cur = lp.omega
    return cur, proj


def loops_on_map(f: ModuleMap, pm: ModuleMap | None = None, pn: ModuleMap | None = None, n: int = 1) -> ModuleMap:
    """Omega^n f, induced on the quotients of Sigma^{-n} M and Sigma^{-n} N."""
    if pm is None:
        pm = loops_n(f.source, n)[1]
    if pn is None:
        pn = loops_n(f.target, n)[1]
    sf = ModuleMap(pm.source, pn.source, {d - n: mat for d, mat in f.mats.items()})
    return induced_on_quotients(sf, pm, pn)


def indecomposables(m: GradedModule) -> dict[int, list[int]]:
    """A minimal generating set: per degree, standard basis vectors spanning a complement of the decomposables."""
    gens: dict[int, list[int]] = {}
    for d in m.degrees():
        dec = Span()
        for e in range(m.dmin, d):
            for v in range(m.dim(e)):
                w = m.apply(d - e, e, 1 << v)
                if w:
                    dec.add(w)
        for r in range(m.dim(d)):
            if dec.add(1 << r):
                gens.setdefault(d, []).append(1 << r)
    return gens


@dataclass
class FreeCover:
    free: GradedModule
    cover: ModuleMap
    generators: list[tuple[int, int]]


def free_cover(m: GradedModule, top: int | None = None) -> FreeCover:
    """Sum of F(|g|) over a minimal generating set, mapping onto M (exact through ``top``)."""
    require_unstable(m)
    top = m.dmax if top is None else top
    if m.trust is not None:
        top = min(top, m.trust)
    gens = [(d, v) for d, vs in sorted(indecomposables(m).items()) if d <= top for v in vs]
    parts = [free_unstable(d, top) for d, _ in gens]
    if not parts:
        from .gmod import zero_module
        z = zero_module(m.dmin, top)
        return FreeCover(z, ModuleMap(z, m, {}), [])
    f, incls, _ = direct_sum(*parts)
    mats: dict[int, list[int]] = {}
    for (d, g), part, inc in zip(gens, parts, incls):
        for e in part.degrees():
            basis = free_basis(d, e)
            for r, mono in enumerate(basis):
                img = m.apply_monomial(mono, d, g) if e <= m.dmax else 0
                row = inc.apply(e, 1 << r)
                mats.setdefault(e, [0] * f.dim(e))
                mats[e][row.bit_length() - 1] = img
    cover = ModuleMap(f, m, {e: Mat(tuple(rows), m.dim(e)) for e, rows in mats.items()})
    return FreeCover(f, cover.check(), gens)


def free_basis(n: int, e: int):
    from .steenrod import admissible_basis
    return admissible_basis(e - n, n)


def omega1_by_resolution(m: GradedModule, n: int = 1, top: int | None = None) -> GradedModule:
    """First derived functor of Omega^n from 0 -> K -> F -> M -> 0: ker(Omega^n K -> Omega^n F)."""
    fc = free_cover(m, top)
    k, inc = kernel(fc.cover)
    ok, pk = loops_n(k, n)
    of, pf = loops_n(fc.free, n)
    g = loops_on_map(inc, pk, pf, n)
    out, _ = kernel(g)
    return mark_unstable(out)


def derived_loops_n(m: GradedModule, n: int) -> GradedModule:
    """Omega^n_1 M: the lambda kernel for n = 1, the resolution route otherwise."""
    if n == 1:
        return loops(m).omega1
    return omega1_by_resolution(m, n)


def derived_loops_dims(m: GradedModule, n: int) -> dict[int, int]:
    """dims of Omega^n_1 M from 0 -> Omega Omega^{n-1}_1 M -> Omega^n_1 M -> Omega_1 Omega^{n-1} M -> 0."""
    if n == 1:
        return dict(loops(m).omega1.dims)
    prev1 = derived_loops_n(m, n - 1)
    left = loops(prev1).omega
    right = loops(loops_n(m, n - 1)[0]).omega1
    degs = set(left.dims) | set(right.dims)
    return {d: left.dim(d) + right.dim(d) for d in degs if left.dim(d) + right.dim(d)}


def destabilize(n_mod: GradedModule, t: int) -> GradedModule:
    """Omega^infinity Sigma^{-t} N for N unstable, which is Omega^t N."""
    require_unstable(n_mod)
    if t < 0:
        raise ValueError("t must be non-negative")
    return loops_n(n_mod, t)[0]


def omega_infinity(e: GradedModule) -> tuple[GradedModule, ModuleMap]:
    """Largest unstable quotient of a windowed module, with the projection.

    Kills the submodule generated by every Sq^i x with i > |x| (including
    x itself in negative degrees).
    """
    gens: dict[int, list[int]] = {}
    for d in e.degrees():
        for r in range(e.dim(d)):
            x = 1 << r
            if d < 0:
                gens.setdefault(d, []).append(x)
                continue
            for i in range(d + 1, e.dmax - d + 1):
                w = e.apply(i, d, x)
                if w:
                    gens.setdefault(d + i, []).append(w)
    q, p = quotient(e, generated_subspaces(e, gens))
    q = mark_unstable(q)
    return q, ModuleMap(e, q, p.mats)


# -- F_2 U-bar -----------------------------------------------------------------

@dataclass
class EnvelopingStage:
    """F_2 U-bar M with 0 -> M -> F_2 U-bar M -> Lambda^2 M -> 0."""
    module: GradedModule
    incl: ModuleMap
    proj: ModuleMap
    pushout: Pushout
    squares: SquareFunctors


def f2bar_um(m: GradedModule) -> EnvelopingStage:
    """Pushout of Phi M -> S^2 M along lambda: Phi M -> M."""
    require_unstable(m)
    sf = square_functors(m)
    lam = lambda_map(m, sf.phi)
    po = pushout(sf.phi_to_s2, lam)
    proj = po.induce(sf.s2_to_l2, ModuleMap(m, sf.l2, {}))
    return EnvelopingStage(po.module, po.right, proj, po, sf)


# -- unstable algebras -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnstableAlgebra:
    """Augmentation ideal K-bar with a product; (a, b) -> matrix whose row r * dim(b) + c
    is the product of basis r in degree a with basis c in degree b."""
    carrier: GradedModule
    product: Mapping[tuple[int, int], Mat]

    def mul(self, a: int, x: int, b: int, y: int) -> int:
        m = self.product.get((a, b))
        if m is None or not x or not y:
            return 0
        nb = self.carrier.dim(b)
        out = 0
        for r in bits(x):
            for c in bits(y):
                out ^= m.rows[r * nb + c]
        return out

    def on_tensor(self, sf: SquareFunctors) -> ModuleMap:
        """The product T^2 K-bar -> K-bar."""
        mats = {}
        for d, keys in sf.index.items():
            if d > self.carrier.dmax:
                continue
            mats[d] = Mat(tuple(self.mul(a, 1 << r, b, 1 << c) for (a, r, b, c) in keys), self.carrier.dim(d))
        return ModuleMap(sf.t2, self.carrier, mats)

    def on_sym2(self, sf: SquareFunctors) -> ModuleMap:
        return factor_through_surjection(self.on_tensor(sf), sf.t2_to_s2)

    def violations(self) -> list[str]:
        k = self.carrier
        out = []
        for (a, b), m in self.product.items():
            if m.shape != (k.dim(a) * k.dim(b), k.dim(a + b)):
                out.append(f"product block ({a},{b}) has shape {m.shape}")
        if out:
            return out
        if not is_unstable(k):
            out.append("carrier not unstable")
        degs = k.degrees()
        for a in degs:
            for b in degs:
                for r in range(k.dim(a)):
                    for c in range(k.dim(b)):
                        if self.mul(a, 1 << r, b, 1 << c) != self.mul(b, 1 << c, a, 1 << r):
                            out.append(f"not commutative at ({a},{r})*({b},{c})")
        for a in degs:
            if 2 * a <= k.dmax:
                for r in range(k.dim(a)):
                    if self.mul(a, 1 << r, a, 1 << r) != k.apply(a, a, 1 << r):
                        out.append(f"x*x != Sq_0 x at ({a},{r})")
        for a in degs:
            for b in degs:
                for c in degs:
                    if a + b + c > k.dmax:
                        continue
                    for x in range(k.dim(a)):
                        for y in range(k.dim(b)):
                            for z in range(k.dim(c)):
                                left = self.mul(a + b, self.mul(a, 1 << x, b, 1 << y), c, 1 << z)
                                right = self.mul(a, 1 << x, b + c, self.mul(b, 1 << y, c, 1 << z))
                                if left != right:
                                    out.append(f"not associative at degrees ({a},{b},{c})")
        sf = square_functors(k)
        bad = self.on_tensor(sf).violations()
        if bad:
            out.append(f"Cartan formula fails at (degree, i) = {bad[:3]}")
        return out


def algebra_from_rule(carrier: GradedModule, rule) -> UnstableAlgebra:
    """Product from ``rule(a, r, b, c) -> vector`` on basis elements."""
    prod = {}
    for a in carrier.degrees():
        for b in carrier.degrees():
            if not carrier.dim(a + b):
                continue
            rows = [rule(a, r, b, c) for r in range(carrier.dim(a)) for c in range(carrier.dim(b))]
            if any(rows):
                prod[(a, b)] = Mat(tuple(rows), carrier.dim(a + b))
    return UnstableAlgebra(carrier, prod)


def zero_algebra(carrier: GradedModule) -> UnstableAlgebra:
    return UnstableAlgebra(carrier, {})


def truncated_polynomial_algebra(n: int) -> UnstableAlgebra:
    """Reduced cohomology of RP^n, u^a u^b = u^{a+b}."""
    from .catalog import projective_range
    k = mark_unstable(projective_range(1, n))
    return algebra_from_rule(k, lambda a, r, b, c: 1 if a + b <= n else 0)


def hp2_algebra() -> UnstableAlgebra:
    from .catalog import hp2
    k = hp2()
    return algebra_from_rule(k, lambda a, r, b, c: 1 if (a, b) == (4, 4) else 0)


__all__ = [
    "NotUnstable", "phi", "phi_map", "lambda_map", "SquareFunctors", "square_functors", "t2", "sym2", "ext2",
    "gamma2", "SquareMaps", "square_on_map", "Loops", "loops", "loops_n", "loops_on_map", "indecomposables", "FreeCover", "free_cover",
    "omega1_by_resolution", "derived_loops_n", "derived_loops_dims", "destabilize", "omega_infinity",
    "EnvelopingStage", "f2bar_um", "UnstableAlgebra", "algebra_from_rule", "zero_algebra",
    "truncated_polynomial_algebra", "hp2_algebra",
]
