"""The extensions phi, e_1 and e~_1, optionally precomposed with a functor."""

from __future__ import annotations

from ..gf2 import Mat
from .core import (DEFAULT_KMAX, NatTrans, PolyFunctor, direct_sum, factor_through_injection,
                   identity_nat, subfunctor, zero_nat)
from .homalg import FunctorSES, YonedaTwoExt
from .standard import (FROBENIUS, G2_TO_ID, NORM_S2_G2, NORM_S2_T2, S2_TO_L2, T2_TO_S2, Id,
                       precompose_map)


def phi_ses(f: PolyFunctor | None = None, kmax: int = DEFAULT_KMAX) -> FunctorSES:
    """0 -> F -> S^2 o F -> Lambda^2 o F -> 0 (Frobenius, then the quotient)."""
    f = f if f is not None else Id(kmax)
    cache: dict = {}
    inc = precompose_map(FROBENIUS, "Id", "S2", f, cache)
    proj = precompose_map(S2_TO_L2, "S2", "L2", f, cache)
    return FunctorSES(inc, proj, f"phi o {f.name}")


def e1_row(f: PolyFunctor | None = None, kmax: int = DEFAULT_KMAX) -> YonedaTwoExt:
    """0 -> F -> S^2 o F -> Gamma^2 o F -> F -> 0 with the norm in the middle."""
    f = f if f is not None else Id(kmax)
    cache: dict = {}
    a = precompose_map(FROBENIUS, "Id", "S2", f, cache)
    b = precompose_map(NORM_S2_G2, "S2", "G2", f, cache)
    c = precompose_map(G2_TO_ID, "G2", "Id", f, cache)
    return YonedaTwoExt(a, b, c, f"e1 o {f.name}")


def e1_tilde_row(f: PolyFunctor | None = None, kmax: int = DEFAULT_KMAX) -> YonedaTwoExt:
    """0 -> F -> S^2 o F -> T^2 o F -> S^2 o F -> 0."""
    f = f if f is not None else Id(kmax)
    cache: dict = {}
    a = precompose_map(FROBENIUS, "Id", "S2", f, cache)
    b = precompose_map(NORM_S2_T2, "S2", "T2", f, cache)
    c = precompose_map(T2_TO_S2, "T2", "S2", f, cache)
    return YonedaTwoExt(a, b, c, f"e1~ o {f.name}")


def split_two_extension(a: PolyFunctor, b: PolyFunctor) -> YonedaTwoExt:
    """0 -> A = A -0-> B = B -> 0: two short exact sequences spliced by zero."""
    return YonedaTwoExt(identity_nat(a), zero_nat(a, b), identity_nat(b), f"split({a.name},{b.name})")


def split_ses(a: PolyFunctor, b: PolyFunctor) -> FunctorSES:
    s, incl, proj = direct_sum(a, b)
    return FunctorSES(incl[0], proj[1], f"{a.name} -> {a.name}+{b.name} -> {b.name}")


def pullback_ses(ses: FunctorSES, along: NatTrans) -> FunctorSES:
    """The pullback of 0 -> A -> B -> C -> 0 along ``along``: C' -> C."""
    b = ses.middle
    s, incl, proj = direct_sum(b, along.source)
    spaces = []
    for k in range(b.kmax + 1):
        rows = [ses.proj.comps[k].apply(proj[0].comps[k].apply(1 << r))
                ^ along.comps[k].apply(proj[1].comps[k].apply(1 << r)) for r in range(s.dims[k])]
        spaces.append(Mat(tuple(rows), ses.right.dims[k]).kernel())
    p, inc_p = subfunctor(s, spaces, f"{along.source.name}*({ses.name})")
    left_map = factor_through_injection(ses.inc.then(incl[0]), inc_p)
    return FunctorSES(left_map, inc_p.then(proj[1]), p.name)
