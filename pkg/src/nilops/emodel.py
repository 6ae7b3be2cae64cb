"""The quadratic model E_n M, its algebraic differential and the two-column spectral data.

For n >= 2, E_n M is the pullback of Gamma^2 M ->> Phi M <<- R_{1/n} M
followed by the pushout along Sigma^{n-1} Phi M -> Sigma^{n-1} S^2 M (the
top u-adic layer of R_{1/n} M on one side, the Frobenius inclusion on the
other). For n = 1 both rows collapse and the model is M (x) M, with
Gamma^2 M inside it and S^2 M as its quotient.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .functors import SquareFunctors, require_unstable, square_functors, square_on_map, UnstableAlgebra
from .gf2 import Mat, Span
from .gmod import (GradedModule, ModuleMap, Pullback, Pushout, cokernel, direct_sum, factor_through_surjection,
                   identity_map, is_short_exact, kernel, pullback, pushout, same_module, suspend, tmin, zero_map)
from .nilfilt import (MEMBER, NOT_MEMBER, NilFiltrationReport, delta_n, in_nil_s, layer_class, nil_filtration, rho0)
from .singer import (SingerModule, filtration_quotient, r1_truncated, residue_via_ambient, singer_on_map, to_phi,
                     truncation_map)


class HypothesisError(ValueError):
    """An input does not satisfy the hypotheses of the construction."""


class IncompatibleLegs(ValueError):
    """The residue and product legs of d_1 disagree on Sigma^{n-1} Phi."""


class CertificateMissing(ValueError):
    pass


def maps_equal(f: ModuleMap, g: ModuleMap) -> bool:
    return (f + g).is_zero()


@dataclass
class EModel:
    base: GradedModule
    n: int
    module: GradedModule
    squares: SquareFunctors
    singer: SingerModule | None
    incl_l2: ModuleMap
    incl_s2: ModuleMap | None
    proj: ModuleMap | None
    to_gamma: ModuleMap | None
    pb: Pullback | None = None
    po: Pushout | None = None
    top_layer: ModuleMap | None = None
    frobenius: ModuleMap | None = None
    quotient_singer: SingerModule | None = None

    def sequence(self):
        """(Lambda^2 (+) Sigma^{n-1} S^2, inclusion, projection) of the defining extension.

        For n = 1 this is 0 -> Lambda^2 -> M (x) M -> S^2 -> 0 instead.
        """
        sf = self.squares
        if self.n == 1:
            return sf.l2, self.incl_l2, sf.t2_to_s2
        ss2 = self.incl_s2.source
        s, incls, projs = direct_sum(sf.l2, ss2)
        mats = {d: (projs[0].at(d) @ self.incl_l2.at(d)) + (projs[1].at(d) @ self.incl_s2.at(d))
                for d in s.degrees()}
        return s, ModuleMap(s, self.module, mats), self.proj

    def trust(self) -> int | None:
        """Degree through which the model and its defining sequence are exact."""
        s, _, p = self.sequence()
        rest = self.quotient_singer.carrier.trust if self.quotient_singer is not None else None
        return tmin(s.trust, self.module.trust, p.target.trust, rest)

    def is_exact(self) -> bool:
        _, i, p = self.sequence()
        return is_short_exact(i, p, self.trust())

    def dims_identity(self) -> bool:
        """dim E_n = dim Lambda^2 + dim Sigma^{n-1} S^2 + dim R_{1/(n-1)}, degreewise."""
        sf = self.squares
        ss2 = suspend(sf.s2, self.n - 1)
        rest = self.quotient_singer.carrier if self.quotient_singer is not None else None
        degs = set(self.module.dims) | set(sf.l2.dims) | set(ss2.dims) | (set(rest.dims) if rest else set())
        top = self.trust()
        for d in degs:
            if top is not None and d > top:
                continue
            want = sf.l2.dim(d) + ss2.dim(d) + (rest.dim(d) if rest else 0)
            if want != self.module.dim(d):
                return False
        return True


def e_model(m: GradedModule, n: int) -> EModel:
    if n < 1:
        raise ValueError("n must be at least 1")
    sf = square_functors(m)
    if n == 1:
        return EModel(m, 1, sf.t2, sf, None, sf.l2_to_t2, None, None, None)
    s = r1_truncated(m, n)
    small = r1_truncated(m, n - 1)
    ph = sf.phi
    rphi = to_phi(s, ph)
    pb = pullback(sf.g2_to_phi, rphi)
    sphi = suspend(ph, n - 1)
    top = filtration_quotient(s, n - 1, sphi)
    frob = sf.phi_to_s2.suspend(n - 1)
    ss2 = frob.target
    into_p = pb.induce(zero_map(sphi, sf.g2), top)
    po = pushout(into_p, frob)
    e = po.module
    incl_l2 = pb.induce(sf.l2_to_g2, zero_map(sf.l2, s.carrier)).then(po.left)
    trunc = truncation_map(s, small)
    proj = _induce_checked(po, pb.right.then(trunc), zero_map(ss2, small.carrier))
    to_gamma = _induce_checked(po, pb.left, zero_map(ss2, sf.g2))
    return EModel(m, n, e, sf, s, incl_l2, po.right, proj, to_gamma, pb, po, top, frob, small)


def _induce_checked(po: Pushout, a: ModuleMap, b: ModuleMap) -> ModuleMap:
    f = po.induce(a, b)
    if not (maps_equal(po.left.then(f), a) and maps_equal(po.right.then(f), b)):
        raise IncompatibleLegs("the two legs do not agree on the common source")
    return f


def e_model_other_order(em: EModel) -> tuple[GradedModule, ModuleMap]:
    """Pushout first, then pullback; returns the module and the comparison map from ``em``."""
    if em.n == 1:
        return em.module, identity_map(em.module)
    sf, s = em.squares, em.singer
    q = pushout(em.top_layer, em.frobenius)
    to_ph = _induce_checked(q, to_phi(s, sf.phi), zero_map(em.frobenius.target, sf.phi))
    pb2 = pullback(sf.g2_to_phi, to_ph)
    a = pb2.induce(em.pb.left, em.pb.right.then(q.left))
    b = pb2.induce(zero_map(em.frobenius.target, sf.g2), q.right)
    return pb2.module, _induce_checked(em.po, a, b)


def e_model_map(f: ModuleMap, src: EModel, tgt: EModel) -> ModuleMap:
    """E_n f, built leg by leg from the functoriality of Gamma^2, R_{1/n} and S^2."""
    sq = square_on_map(f, src.squares, tgt.squares)
    if src.n == 1:
        return sq.t2
    rf = singer_on_map(f, src.singer, tgt.singer)
    pmap = tgt.pb.induce(src.pb.left.then(sq.g2), src.pb.right.then(rf))
    s2f = sq.s2.suspend(src.n - 1)
    s2f = ModuleMap(src.po.right.source, tgt.po.right.source, s2f.mats)
    return _induce_checked(src.po, pmap.then(tgt.po.left), s2f.then(tgt.po.right))


def tensor_square_iso(em: EModel) -> ModuleMap:
    """E_1 M -> M (x) M; the model is built on the tensor square, so this is the identity."""
    if em.n != 1:
        raise ValueError("only E_1 is a tensor square")
    return identity_map(em.module)


def bicartesian_square_check(em: EModel) -> dict[str, bool]:
    """For n = 1: Gamma^2 -> T^2 over Phi -> S^2 commutes and is a pullback and a pushout."""
    sf = em.squares
    left = sf.g2_to_t2.then(sf.t2_to_s2)
    right = sf.g2_to_phi.then(sf.phi_to_s2)
    degs = set(sf.t2.dims) | set(sf.phi.dims)
    counts = all(sf.g2.dim(d) == sf.t2.dim(d) - sf.s2.dim(d) + sf.phi.dim(d) for d in degs)
    return {"commutes": maps_equal(left, right), "dims": counts,
            "gamma_injective": sf.g2_to_t2.is_injective(), "onto_s2": sf.t2_to_s2.is_surjective()}


# -- the algebraic differential ------------------------------------------------------

@dataclass
class D1:
    algebra: UnstableAlgebra
    n: int
    model: EModel
    d1: ModuleMap
    residue_leg: ModuleMap
    product_leg: ModuleMap
    checks: dict[str, bool]


def _product_on_t2(k: UnstableAlgebra, sf: SquareFunctors, n: int, tgt: GradedModule) -> ModuleMap:
    """x (x) y -> xy on T^2(Sigma^{-n} K-bar), as a degree-zero map into ``tgt`` = Sigma^{-2n} K-bar."""
    mats = {}
    for d, keys in sf.index.items():
        if tgt.dim(d):
            mats[d] = Mat(tuple(k.mul(a + n, 1 << r, b + n, 1 << c) for (a, r, b, c) in keys), tgt.dim(d))
    return ModuleMap(sf.t2, tgt, mats)


def algebraic_d1(k: UnstableAlgebra, n: int) -> D1:
    """d_1: E_n(Sigma^{-n} K-bar) -> Sigma^{-n-1} K-bar from the residue and the product."""
    bad = k.violations()
    if bad:
        raise HypothesisError(f"not an unstable algebra: {bad[0]}")
    kbar = k.carrier
    m = suspend(kbar, -n)
    em = e_model(m, n)
    tgt = suspend(kbar, -n - 1)
    sf = em.squares
    if n == 1:
        prod = _product_on_t2(k, sf, 1, tgt)
        # the Gamma^2 part of T^2 must agree with the residue on R_{1/1} = Phi
        s = r1_truncated(m, 1)
        res = residue_via_ambient(s, tgt)
        res_on_g2 = sf.g2_to_phi.then(_phi_to_r11(sf.phi, s)).then(res)
        agree = maps_equal(sf.g2_to_t2.then(prod), res_on_g2)
        checks = {"legs_agree": agree, "steenrod_linear": prod.is_linear(),
                  "kills_lambda2": sf.l2_to_t2.then(prod).is_zero()}
        if not agree:
            raise IncompatibleLegs("product and residue disagree on Phi")
        return D1(k, n, em, prod, res, prod, checks)
    res = residue_via_ambient(em.singer, tgt)
    prod_t2 = _product_on_t2(k, sf, n, suspend(kbar, -2 * n))
    prod_s2 = factor_through_surjection(prod_t2, sf.t2_to_s2)
    if not maps_equal(sf.t2_to_s2.then(prod_s2), prod_t2):
        raise HypothesisError("product is not commutative")
    ss2 = em.incl_s2.source
    prod_leg = ModuleMap(ss2, tgt, {d + n - 1: mat for d, mat in prod_s2.mats.items()})
    res_leg = em.pb.right.then(res)
    try:
        d1 = _induce_checked(em.po, res_leg, prod_leg)
    except IncompatibleLegs:
        raise IncompatibleLegs("residue and product legs disagree on Sigma^{n-1} Phi") from None
    checks = {"legs_agree": True, "steenrod_linear": d1.is_linear(),
              "kills_lambda2": em.incl_l2.then(d1).is_zero()}
    return D1(k, n, em, d1, res, prod_leg, checks)


def _phi_to_r11(ph: GradedModule, s: SingerModule) -> ModuleMap:
    """Phi M -> R_{1/1} M, Phi x -> St_1 x."""
    mats = {}
    for total, row in s.generators.items():
        if ph.dim(total):
            mats[total] = Mat(tuple(1 << s.position(0, d, r) for (a, d, r) in row), s.carrier.dim(total))
    return ModuleMap(ph, s.carrier, mats)


# -- two columns -----------------------------------------------------------------

@dataclass
class TwoColumnResult:
    n: int
    d1: D1
    filtration: NilFiltrationReport
    rho_n: GradedModule
    rho_n1: GradedModule
    layer_source: GradedModule
    layer_map: ModuleMap
    phi_factor: ModuleMap | None
    f1_layer: GradedModule
    e_inf_rho0: GradedModule
    columns: dict[int, dict[int, GradedModule]]
    differential: ModuleMap
    checks: dict[str, bool]
    hypotheses: dict[str, bool]

    def as_dict(self) -> dict:
        def dims(m):
            return {str(d): c for d, c in sorted(m.dims.items())}
        out = {
            "n": self.n,
            "hypotheses": self.hypotheses,
            "checks": self.checks,
            "rho_n": dims(self.rho_n),
            "rho_n1": dims(self.rho_n1),
            "layer_source": dims(self.layer_source),
            "layer_map_rank": {str(d): self.layer_map.rank(d) for d in sorted(self.layer_map.mats)},
            "f1_layer": dims(self.f1_layer),
            "rho0_e_inf_minus2": dims(self.e_inf_rho0),
        }
        return out


def two_column_page(k: UnstableAlgebra, n: int) -> TwoColumnResult:
    kbar = k.carrier
    require_unstable(kbar)
    verdict = in_nil_s(kbar, n)
    hyp = {"nil_n": verdict.status == MEMBER, "connected": (kbar.bottom() or 0) >= n if kbar.dims else True}
    if verdict.status == NOT_MEMBER or not hyp["connected"]:
        raise HypothesisError(f"K-bar is not in Nil_{n}: {verdict.reason}")
    dd = algebraic_d1(k, n)
    em = dd.model
    rep = nil_filtration(kbar, n + 1)
    rho_n, rho_n1 = rep.layers[n], rep.layers[n + 1]
    nil1 = {d: Span(inc.rows) for d, inc in rep.nil[n + 1][1].mats.items()}
    factors = all(not v or nil1.get(e + n + 1, Span()).contains(v)
                  for e, mat in dd.d1.mats.items() for v in mat.rows)
    if not factors:
        raise HypothesisError("d_1 does not land in nil_{n+1}")
    lmats = {}
    for e, mat in dd.d1.mats.items():
        if rho_n1.dim(e):
            lmats[e] = Mat(tuple(layer_class(rep, n + 1, e + n + 1, v) for v in mat.rows), rho_n1.dim(e))
    big_layer = ModuleMap(em.module, rho_n1, lmats)
    # Sigma^{-n} K-bar ->> rho_n
    m = em.base
    pmats = {}
    for e in m.degrees():
        if rho_n.dim(e):
            pmats[e] = Mat(tuple(layer_class(rep, n, e + n, 1 << r) for r in range(m.dim(e))), rho_n.dim(e))
    pi = ModuleMap(m, rho_n, pmats)
    sf_rho = square_functors(rho_n)
    sq = square_on_map(pi, em.squares, sf_rho)
    if n == 1:
        onto = sq.t2
        layer_src = sf_rho.t2
    else:
        onto = em.to_gamma.then(sq.g2)
        layer_src = sf_rho.g2
    layer = factor_through_surjection(big_layer, onto)
    well_defined = maps_equal(onto.then(layer), big_layer)
    phi_factor = None
    checks = {"factors_through_nil": factors, "layer_well_defined": well_defined,
              "layer_linear": layer.is_linear(), "onto_layer_source": onto.is_surjective()}
    if n >= 2:
        dres = delta_n(kbar, n)
        delta = ModuleMap(sf_rho.phi, rho_n1, dres.delta.mats)
        phi_factor = delta
        checks["factors_through_phi"] = maps_equal(sf_rho.g2_to_phi.then(delta), layer)
    # columns, stored desuspended: Sigma^{-1} E^{-1} = Sigma^{-n} K-bar, Sigma^{-2} E^{-2} = E_n(Sigma^{-n} K-bar)
    sd1 = ModuleMap(suspend(em.module, 1), m, {d + 1: mat for d, mat in dd.d1.mats.items()})
    ker, _ = kernel(dd.d1)
    cok, _ = cokernel(sd1)
    f1, _ = rho0(cok, presentation=n)
    lk, _ = kernel(layer)
    checks["f1_layer_is_rho_n"] = same_module(f1, rho_n, upto=tmin(f1.trust, rho_n.trust))
    try:
        direct, _ = rho0(ker)
        top = tmin(direct.trust, lk.trust)
        checks["rho0_kernel_matches"] = ({d: c for d, c in direct.dims.items() if top is None or d <= top}
                                         == {d: c for d, c in lk.dims.items() if top is None or d <= top})
    except ValueError:
        checks["rho0_kernel_matches"] = False
    columns = {1: {1: m, 2: cok}, 2: {1: em.module, 2: ker}}
    return TwoColumnResult(n, dd, rep, rho_n, rho_n1, layer_src, layer, phi_factor, f1, lk, columns, sd1,
                           checks, hyp)


# -- spectral sequence hypotheses -------------------------------------------------

@dataclass
class SpectralData:
    """pages[r][k] = Sigma^{-k} E_r^{-k,*}; diffs[r][k]: Sigma pages[r][k] -> pages[r][k - r].

    ``settled`` lists the columns whose last page is E_infinity; in truncated
    data the leftmost columns may still receive differentials from columns
    that are not stored.
    """
    pages: dict[int, dict[int, GradedModule]]
    diffs: dict[int, dict[int, ModuleMap]] = field(default_factory=dict)
    certificates: dict[int, object] = field(default_factory=dict)
    settled: set[int] | None = None


@dataclass
class SpectralReport:
    items: dict[str, bool]
    detail: list[str]

    @property
    def ok(self) -> bool:
        return all(self.items.values())

    def as_dict(self) -> dict:
        return {"ok": self.ok, "items": self.items, "detail": self.detail}


def spectral_from_two_column(res: TwoColumnResult) -> SpectralData:
    from .nilfilt import good_decomposition
    e1 = {1: res.columns[1][1], 2: res.columns[2][1]}
    e2 = {1: res.columns[1][2], 2: res.columns[2][2]}
    n = res.n
    certs = {1: good_decomposition(e1[1], presentation=n), 2: good_decomposition(e1[2])}
    return SpectralData({1: e1, 2: e2, 3: dict(e2)}, {1: {2: res.differential}}, certs, settled={1})


def _homology(pages: dict[int, GradedModule], diffs: dict[int, ModuleMap], r: int, k: int):
    """ker(d_r out of column k) / im(d_r into column k), with the kernel inclusion and quotient map."""
    col = pages[k]
    out = diffs.get(k)
    if out is not None:
        # d_r: Sigma col -> other; desuspend to a map out of col
        base = ModuleMap(col, suspend(out.target, -1), {d - 1: mat for d, mat in out.mats.items()})
        ker, kinc = kernel(base)
    else:
        ker, kinc = col, identity_map(col)
    inc = diffs.get(k + r)
    if inc is not None:
        img = {}
        for d, mat in inc.mats.items():
            sp = Span(kinc.at(d).rows, track=True)
            img[d] = [sp.coords(v) for v in mat.rows if v]
        from .gmod import quotient
        hom, q = quotient(ker, img)
    else:
        hom, q = ker, identity_map(ker)
    return ker, kinc, hom, q


def spectral_hypothesis_check(sd: SpectralData, require_certificates: bool = True) -> SpectralReport:
    items: dict[str, bool] = {}
    detail: list[str] = []
    pages = sd.pages
    if require_certificates:
        first = pages.get(1, {})
        missing = [k for k, col in first.items() if col.dims and k not in sd.certificates]
        if missing:
            raise CertificateMissing(f"no good almost-unstable certificate for column(s) {missing}")
    quad = True
    for r, cols in pages.items():
        for k, col in cols.items():
            if k < 1 and col.dims:
                quad = False
                detail.append(f"page {r}: column {-k} is outside the second quadrant")
            if col.dims and col.bottom() < -k:
                quad = False
                detail.append(f"page {r}: column {-k} has negative t")
    items["second_quadrant"] = quad
    items["column_zero_vanishes"] = not any(cols.get(0) is not None and cols[0].dims for cols in pages.values())
    linear = True
    shapes = True
    squares_zero = True
    for r, ds in sd.diffs.items():
        for k, d in ds.items():
            if not d.is_linear():
                linear = False
                detail.append(f"d_{r} out of column {-k} is not Steenrod-linear")
            if not same_module(d.source, suspend(pages[r][k], 1)) or not same_module(d.target, pages[r].get(k - r)
                                                                                   or GradedModule(0, 0, {}, {})):
                shapes = False
                detail.append(f"d_{r} out of column {-k} has the wrong source or target")
            nxt = ds.get(k - r)
            if nxt is not None:
                comp = ModuleMap(suspend(d.source, 1), suspend(d.target, 1), {e + 1: m for e, m in d.mats.items()})
                comp = comp.then(nxt)
                if not comp.is_zero():
                    squares_zero = False
                    detail.append(f"d_{r} d_{r} is nonzero at column {-k}")
    items["steenrod_linear"] = linear
    items["shapes"] = shapes
    items["d_squared_zero"] = squares_zero
    consistent = True
    for r in sorted(pages):
        if r + 1 not in pages:
            continue
        for k, col in pages[r].items():
            _, _, hom, _ = _homology(pages[r], sd.diffs.get(r, {}), r, k)
            nxt = pages[r + 1].get(k)
            if nxt is None or hom.dims != nxt.dims:
                consistent = False
                detail.append(f"page {r + 1} column {-k} is not the homology of page {r}")
    items["pages_are_homology"] = consistent
    last = pages[max(pages)] if pages else {}
    from .gmod import is_unstable
    settled = set(last) if sd.settled is None else sd.settled
    items["e_infinity_unstable"] = all(is_unstable(col) for k, col in last.items() if k in settled)
    return SpectralReport(items, detail)


def spectral_rho0_stability(sd: SpectralData) -> SpectralReport:
    """rho_0 of each column can only shrink from page r to r + 1, and is stable once r > k."""
    items: dict[str, bool] = {}
    detail: list[str] = []
    for r in sorted(sd.pages):
        if r + 1 not in sd.pages:
            continue
        for k, col in sd.pages[r].items():
            ker, kinc, hom, q = _homology(sd.pages[r], sd.diffs.get(r, {}), r, k)
            r_col, p_col = rho0(col)
            r_ker, p_ker = rho0(ker)
            r_hom, p_hom = rho0(hom)
            into = factor_through_surjection(kinc.then(p_col), p_ker)
            onto = factor_through_surjection(q.then(p_hom), p_ker)
            sub = into.is_injective() and maps_equal(p_ker.then(into), kinc.then(p_col))
            iso = onto.is_iso()
            key = f"r{r}_k{k}"
            items[key + "_contained"] = sub and iso
            if r > k:
                items[key + "_equal"] = into.is_iso()
            if not (sub and iso):
                detail.append(f"page {r} column {-k}: rho_0 does not embed")
    return SpectralReport(items, detail)
