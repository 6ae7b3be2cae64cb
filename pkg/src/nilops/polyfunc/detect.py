"""Detecting the identity functor inside F o E for a shift functor E."""

from __future__ import annotations

from dataclasses import dataclass

from ..gf2 import Mat
from .core import (Degree, HeadroomError, NatTrans, PolyFunctor, all_morphisms, identity_nat, image,
                   plus_one, poly_degree)
from .homalg import hom_space
from .standard import Id


class DegreeHypothesis(ValueError):
    pass


def _shift_mor(f, times):
    for _ in range(times):
        f = plus_one(f)
    return f


def shifted(f: PolyFunctor, t: int) -> PolyFunctor:
    """V -> F(V + F^t), defined up to kmax - t."""
    kmax = f.kmax - t
    if kmax < 1:
        raise HeadroomError(f"shifting {f.name} by {t} leaves no room at kmax={f.kmax}")
    table = {g: f.table[_shift_mor(g, t)] for g in all_morphisms(kmax)}
    dims = tuple(f.dims[k + t] for k in range(kmax + 1))
    return PolyFunctor(kmax, dims, table, f"{f.name}(-+F^{t})")


def shifted_nat(eta: NatTrans, src: PolyFunctor, tgt: PolyFunctor, t: int) -> NatTrans:
    return NatTrans(src, tgt, tuple(eta.comps[k + t] for k in range(src.kmax + 1)))


@dataclass
class DetectionChain:
    """Id -> F1 o E -> F2 o E -> Id composing to the identity, E(V) = V + F^(d-1)."""
    d: int
    shift: int
    f1e: PolyFunctor
    f2e: PolyFunctor
    iota: NatTrans
    fe: NatTrans
    pi: NatTrans
    degrees: dict

    @property
    def composite(self) -> NatTrans:
        return self.iota.then(self.fe).then(self.pi)

    def verify(self) -> bool:
        ident = identity_nat(self.iota.source)
        return (self.iota.is_natural() and self.fe.is_natural() and self.pi.is_natural()
                and self.composite.comps == ident.comps)

    def as_dict(self) -> dict:
        return {"d": self.d, "shift": f"V + F^{self.shift}", "kmax": self.iota.kmax,
                "iota": [c.to_bitstrings() for c in self.iota.comps],
                "pi": [c.to_bitstrings() for c in self.pi.comps],
                "composite_is_identity": self.verify(), "degrees": self.degrees}


def exact_degree(f: PolyFunctor) -> Degree:
    return poly_degree(f)


def detection_functor(f: NatTrans, d: int | None = None) -> DetectionChain:
    """Build E and the split chain for f: F1 -> F2 of exact degree d > 0.

    Rejects inputs whose functors or image are not of exact degree d.
    """
    d1, d2 = poly_degree(f.source), poly_degree(f.target)
    im, _ = image(f)
    di = poly_degree(im)
    degrees = {"source": d1.value, "target": d2.value, "image": di.value}
    if d is None:
        d = d1.value
    if d is None or d <= 0:
        raise DegreeHypothesis(f"need a certified positive degree, got {d1.describe()}")
    for name, deg in (("source", d1), ("target", d2), ("image", di)):
        if deg.value != d:
            raise DegreeHypothesis(f"{name} has degree {deg.describe()}, expected exactly {d}")
    t = d - 1
    f1e = shifted(f.source, t)
    f2e = shifted(f.target, t)
    fe = shifted_nat(f, f1e, f2e, t)
    ident = Id(f1e.kmax)
    ins = hom_space(ident, f1e)
    outs = hom_space(f2e, ident)
    for a in ins:
        mid = a.then(fe)
        for b in outs:
            comp = mid.then(b)
            # Hom(Id, Id) is one-dimensional; read the scalar in dimension 1
            if comp.comps[1] == Mat.identity(1):
                chain = DetectionChain(d, t, f1e, f2e, a, fe, b, degrees)
                if chain.verify():
                    return chain
    raise DegreeHypothesis("no splitting chain found; the identity is not detected")
