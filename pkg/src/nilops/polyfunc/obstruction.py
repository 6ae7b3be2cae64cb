"""The realizability obstruction omega in Ext^2(K, F_1) and the module pipeline
that produces F_1 and K from a nilpotent unstable module.

For a space, omega vanishes. When K (or, for n = 1, the test subfunctor
K n F_1) has the full degree d of F_1, omega is a pullback of e_1 o F_1 (or of
e~_1 o F_1) along an inclusion of exact degree d, and that pullback is
nonzero: the verdict "fires" is then a non-realizability certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..gf2 import Mat, Quotient, Span
from ..gmod import GradedModule, image as module_image, kernel as module_kernel, is_unstable
from ..functors import lambda_map
from ..nilfilt import MEMBER, NOT_MEMBER, delta_n, in_nil_s
from .classes import e1_row, e1_tilde_row
from .core import (DEFAULT_KMAX, Degree, NatTrans, PolyFunctor, apply_to_nat, compose_functors,
                   image, poly_degree, subfunctor)
from .detect import DegreeHypothesis, DetectionChain, detection_functor
from .homalg import ExtClass, yoneda_class
from .localize import LocalizationError, localize, localize_map
from .standard import FROBENIUS, S, whisker

FIRES = "fires"
CONSISTENT = "consistent"
NOT_MET = "hypothesis-not-met"


class MalformedInclusion(ValueError):
    pass


@dataclass
class ObstructionReport:
    n: int
    mode: str
    f1: PolyFunctor
    k: PolyFunctor
    degree_f1: Degree
    degree_k: Degree | None
    verdict: str
    omega: str
    ext: dict[str, ExtClass] = field(default_factory=dict)
    chain: DetectionChain | None = None
    reasons: list[str] = field(default_factory=list)

    @property
    def fires(self) -> bool:
        return self.verdict == FIRES

    def as_dict(self) -> dict:
        return {
            "n": self.n, "mode": self.mode, "verdict": self.verdict,
            "F1": {"name": self.f1.name, "dims": list(self.f1.dims)},
            "K": {"name": self.k.name, "dims": list(self.k.dims)},
            "degree_F1": self.degree_f1.as_dict(),
            "degree_K": self.degree_k.as_dict() if self.degree_k else None,
            "omega": self.omega,
            "ext_certificates": {name: c.as_dict() for name, c in sorted(self.ext.items())},
            "detection_chain": self.chain.as_dict() if self.chain else None,
            "reasons": list(self.reasons),
        }


def _check_inclusion(inc: NatTrans, target: PolyFunctor, what: str):
    if inc.target.dims != target.dims or inc.kmax != target.kmax:
        raise MalformedInclusion(f"{what} does not land in the expected functor")
    if any(inc.target.table[g] != target.table[g] for g in target.table):
        raise MalformedInclusion(f"{what} lands in a different functor structure")
    if not inc.is_natural():
        raise MalformedInclusion(f"{what} is not natural")
    if not inc.is_injective():
        raise MalformedInclusion(f"{what} is not injective")


def _contains(space, vectors) -> bool:
    sp = Span(space)
    return all(sp.contains(v) for v in vectors)


def _frobenius_preimage(f1: PolyFunctor, s2f1: PolyFunctor, k_incl: NatTrans):
    frob = whisker(FROBENIUS, f1, f1, s2f1)
    spaces = []
    for k in range(f1.kmax + 1):
        ksp = list(k_incl.comps[k].rows)
        fr = frob.comps[k]
        # x with frob(x) in K: kernel of F1(k) -> S2F1(k) / K(k)
        q = Quotient(s2f1.dims[k], Span(ksp))
        rows = [q.project(fr.apply(1 << r)) for r in range(f1.dims[k])]
        spaces.append(Mat(tuple(rows), q.dim).kernel())
    return subfunctor(f1, spaces, f"K n {f1.name}")


def obstruction(n: int, f1: PolyFunctor, k_incl: NatTrans, mode: str = "kernel") -> ObstructionReport:
    """Decide the fate of omega for F_1 and K.

    n >= 2: ``k_incl`` is K -> F_1. n = 1: ``k_incl`` is K -> S^2 o F_1 (mode
    "kernel"), or directly a test subfunctor of F_1 (mode "test-subfunctor").
    """
    if n < 1:
        raise ValueError("n must be positive")
    s2f1 = None
    if n >= 2 or mode == "test-subfunctor":
        _check_inclusion(k_incl, f1, "K")
    else:
        s2f1 = compose_functors(S(2, f1.kmax), f1, name=f"S2o{f1.name}")
        _check_inclusion(k_incl, s2f1, "K")
    omega = (f"omega = i*(e1 o {f1.name}) in Ext^2(K, {f1.name})" if n >= 2 else
             f"omega = j*(e1~ o {f1.name}) in Ext^2(K, {f1.name})")
    d = poly_degree(f1)
    rep = ObstructionReport(n, mode, f1, k_incl.source, d, None, NOT_MET, omega)
    if d.value is None:
        rep.reasons.append(f"F1 has {d.describe()}: not of finite degree on this truncation")
        return rep
    if d.value <= 0:
        rep.reasons.append(f"F1 has degree {d.describe()}; the argument needs d > 0")
        return rep
    if n >= 2 or mode == "test-subfunctor":
        test, test_incl = k_incl.source, k_incl
    else:
        test, test_incl = _frobenius_preimage(f1, s2f1, k_incl)
    dk = poly_degree(test)
    rep.degree_k = dk
    if dk.value is None or dk.value < d.value:
        rep.verdict = CONSISTENT
        rep.reasons.append(f"test subfunctor has degree {dk.describe()} < {d.value}")
        return rep
    # exact degree d: omega restricts to a nonzero class
    try:
        rep.chain = detection_functor(test_incl, d.value)
    except (DegreeHypothesis, ValueError) as exc:
        rep.reasons.append(f"no detection chain: {exc}")
        return rep
    cls = yoneda_class(e1_row(f1), along=test_incl)
    rep.ext["i*(e1 o F1)"] = cls
    if n == 1 and mode == "kernel":
        s2_test = compose_functors(S(2, f1.kmax), test)
        s2i = apply_to_nat(S(2, f1.kmax), test_incl, src=s2_test, tgt=s2f1)
        inside = all(_contains(kc.rows, c.rows) for c, kc in zip(s2i.comps, k_incl.comps))
        if inside:
            row = e1_tilde_row(f1)
            along = NatTrans(s2_test, row.right, s2i.comps)
            rep.ext["i*(e1~ o F1)"] = yoneda_class(row, along=along)
    ok_numeric = all(c.nonzero for c in rep.ext.values())
    if ok_numeric and rep.chain.verify():
        rep.verdict = FIRES
        rep.reasons.append(f"test subfunctor has exact degree {d.value}; omega restricts to a nonzero class")
    else:
        rep.reasons.append("truncated Ext^2 did not confirm the class; raise kmax")
    return rep


# -- from modules -----------------------------------------------------------------

@dataclass
class PipelineReport:
    n: int
    kmax: int
    membership: str
    rho_n: GradedModule | None
    rho_n1: GradedModule | None
    delta_nonzero: bool | None
    localization: dict
    obstruction: ObstructionReport | None
    reasons: list[str] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return self.obstruction.verdict if self.obstruction else NOT_MET

    def as_dict(self) -> dict:
        return {
            "n": self.n, "kmax": self.kmax, "membership": self.membership,
            "rho_n": _dims(self.rho_n), "rho_n+1": _dims(self.rho_n1),
            "delta_nonzero": self.delta_nonzero, "localization": self.localization,
            "verdict": self.verdict,
            "obstruction": self.obstruction.as_dict() if self.obstruction else None,
            "reasons": list(self.reasons),
        }


def _dims(m: GradedModule | None):
    return None if m is None else {str(d): c for d, c in sorted(m.dims.items())}


def _kernel_subfunctor(dr, kmax: int):
    """F_1 = l(rho_n) and K = image of l(ker delta_n) under l(lambda)."""
    rho = dr.rho_n
    ker_mod, ker_inc = module_kernel(dr.delta)
    lam = lambda_map(rho, source=dr.delta.source)
    comp = ker_inc.then(lam)
    lk = localize(ker_mod, kmax)
    top = max(lk.restrict_to, 0)
    lf = localize(rho, kmax)
    if lf.restrict_to < top:
        lf = localize(rho, kmax, restrict_to=top, window=lf.window)
    lk = localize(ker_mod, kmax, restrict_to=lk.restrict_to, window=min(lk.window, lf.window))
    eta = localize_map(comp, lk, lf)
    k_func, k_incl = image(eta, name=f"l(ker d{dr.n})")
    return lf, lk, k_incl


def module_obstruction(m: GradedModule, n: int, kmax: int = DEFAULT_KMAX) -> PipelineReport:
    """Run the obstruction on M: F_1 = l(rho_n M), K = l(ker delta_n).

    For n = 1 only the module is known, so the test subfunctor K n F_1 is
    taken to be l(ker delta_1); the cup-square identification of delta_1
    makes this the same subfunctor.
    """
    if not is_unstable(m):
        raise ValueError("module is not unstable")
    verdict = in_nil_s(m, n)
    rep = PipelineReport(n, kmax, verdict.status, None, None, None, {}, None)
    if verdict.status == NOT_MEMBER:
        rep.reasons.append(f"not in Nil_{n}: {verdict.reason}")
        return rep
    if verdict.status != MEMBER:
        rep.reasons.append(f"Nil_{n} membership checked inside the window only ({verdict.reason})")
    dr = delta_n(m, n)
    rep.rho_n, rep.rho_n1, rep.delta_nonzero = dr.rho_n, dr.rho_n1, dr.nonzero
    try:
        lf, lk, k_incl = _kernel_subfunctor(dr, kmax)
    except LocalizationError as exc:
        rep.reasons.append(f"localization failed: {exc}")
        return rep
    rep.localization = {"F1": lf.as_dict(), "ker_delta": lk.as_dict()}
    if not (lf.stable and lk.stable):
        rep.reasons.append("localization not stable in the window")
        return rep
    mode = "kernel" if n >= 2 else "test-subfunctor"
    rep.obstruction = obstruction(n, lf.functor, k_incl, mode)
    return rep


@dataclass
class RealizabilityReport:
    n: int
    conditions: dict[str, bool | None]
    pipeline: PipelineReport | None
    verdict: str
    reasons: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"n": self.n, "conditions": self.conditions, "verdict": self.verdict,
                "pipeline": self.pipeline.as_dict() if self.pipeline else None,
                "reasons": list(self.reasons)}


NOT_REALIZABLE = "not-realizable"
UNDECIDED = "undecided"


def realizability(m: GradedModule, n: int, kmax: int = DEFAULT_KMAX) -> RealizabilityReport:
    """The gate: n-connected, in Nil_n, l(rho_n) of exact degree d > 0, and the
    image of the Sq_{n-1} map (identified with the image of delta_n) of degree
    < d. When all hold, the obstruction must fire, certifying that M is not the
    reduced cohomology of an n-connected space."""
    cond: dict[str, bool | None] = {}
    rep = RealizabilityReport(n, cond, None, NOT_MET)
    cond["unstable"] = is_unstable(m)
    if not cond["unstable"]:
        rep.reasons.append("module is not unstable")
        return rep
    conn = n + 1 if n >= 2 else 2
    cond["connected"] = m.is_zero() or m.bottom() >= conn
    verdict = in_nil_s(m, n)
    cond["in_nil_n"] = None if verdict.status not in (MEMBER, NOT_MEMBER) else verdict.status == MEMBER
    if not cond["connected"] or cond["in_nil_n"] is False:
        rep.reasons.append("connectivity or Nil_n membership fails")
        return rep
    dr = delta_n(m, n)
    f1 = localize(dr.rho_n, kmax)
    d = poly_degree(f1.functor)
    cond["rho_n_degree_positive"] = d.finite_positive
    if not d.finite_positive:
        rep.reasons.append(f"l(rho_n) has {d.describe()}")
        return rep
    im_mod, _ = module_image(dr.delta)
    di = poly_degree(localize(im_mod, kmax).functor)
    cond["image_below_d"] = di.value is not None and di.value < d.value
    if not cond["image_below_d"]:
        rep.verdict = UNDECIDED
        rep.reasons.append(f"image of delta_{n} has degree {di.describe()}, not below {d.value}")
        return rep
    rep.pipeline = module_obstruction(m, n, kmax)
    if rep.pipeline.verdict == FIRES:
        rep.verdict = NOT_REALIZABLE
        rep.reasons.append("obstruction fires")
    else:
        rep.verdict = UNDECIDED
        rep.reasons.append(f"obstruction verdict {rep.pipeline.verdict}")
    return rep
