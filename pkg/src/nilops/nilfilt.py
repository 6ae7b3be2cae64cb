"""Nilpotent filtration, reducedness, the comparison map delta_n and almost-unstable certificates."""

from __future__ import annotations

from dataclasses import dataclass, field

from .gf2 import Mat, Quotient, Span, bits, left_kernel
from .gmod import (GradedModule, ModuleMap, NotSteenrodLinear, generated_subspaces, is_exact_at, kernel, mark_unstable, quotient, retrust, subspace_module, suspend, tmin)
from .functors import lambda_map, loops_n, loops_on_map, omega_infinity, phi, require_unstable

MEMBER = "member"
NOT_MEMBER = "not-member"
INCONCLUSIVE = "inconclusive"


def _half(t: int | None) -> int | None:
    return None if t is None else t // 2


# -- sigma socle -------------------------------------------------------------

def socle_condition(m: GradedModule, s: int) -> dict[int, list[int]]:
    """Per degree d, a basis of {x : Sq^i x = 0 for d - s < i <= d} (zero below degree s)."""
    out = {}
    for d in m.degrees():
        if d < s:
            continue
        rows = []
        cols = 0
        # stack the matrices Sq^i for the relevant i side by side
        for i in range(max(d - s + 1, 1), d + 1):
            mat = m.sq(i, d)
            rows = [r | (x << cols) for r, x in zip(rows or [0] * m.dim(d), mat.rows)]
            cols += mat.ncols
        ker = left_kernel(rows) if rows else [1 << r for r in range(m.dim(d))]
        if ker:
            out[d] = ker
    return out


def largest_stable_subspaces(m: GradedModule, family: dict[int, list[int]]) -> dict[int, list[int]]:
    """Largest A-stable family of subspaces inside ``family`` (greatest fixed point)."""
    cur = {d: Span(vs).basis for d, vs in family.items()}
    changed = True
    while changed:
        changed = False
        spans = {d: Span(vs) for d, vs in cur.items()}
        nxt = {}
        for d, vs in cur.items():
            # constraints: Sq^{2^j} x must land in cur(d + 2^j)
            keep = vs
            j = 1
            while d + j <= m.dmax:
                if keep:
                    tgt = spans.get(d + j)
                    q = Quotient(m.dim(d + j), tgt if tgt is not None else [])
                    rows = [q.project(m.apply(j, d, v)) for v in keep]
                    combos = left_kernel(rows)
                    new = []
                    for c in combos:
                        v = 0
                        for b in bits(c):
                            v ^= keep[b]
                        new.append(v)
                    keep = Span(new).basis
                j <<= 1
            if len(keep) != len(vs):
                changed = True
            if keep:
                nxt[d] = keep
        cur = nxt
    return cur


def sigma_socle(m: GradedModule, s: int) -> tuple[GradedModule, ModuleMap]:
    """Largest submodule S with Sigma^{-s} S unstable, and its inclusion.

    For unstable M this is {x : Sq^i x = 0 for |x| - s < i <= |x|}, which is
    already a submodule; the fixed-point pass confirms it. The condition on a
    class of degree d only consults degrees up to 2d, so for an incomplete
    module the answer is exact through floor(trust / 2) and is cut there.
    """
    require_unstable(m)
    basis = largest_stable_subspaces(m, socle_condition(m, s))
    trust = None if m.complete else _half(m.trust)
    if trust is not None:
        m = m.with_window(dmax=max(trust, m.dmin))
        basis = {d: vs for d, vs in basis.items() if d <= trust}
    return subspace_module(m, basis)


def socle_basis(m: GradedModule, s: int) -> dict[int, list[int]]:
    return largest_stable_subspaces(m, socle_condition(m, s))


# -- membership in Nil_s -------------------------------------------------------

@dataclass
class NilVerdict:
    status: str
    s: int
    series: list[dict[int, list[int]]]
    trust: int | None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.status == MEMBER


def _preimage(m: GradedModule, current: dict[int, list[int]], q_basis: dict[int, list[int]],
              qs: dict[int, Quotient]) -> dict[int, list[int]]:
    out = {}
    for d in set(current) | set(q_basis):
        vs = list(current.get(d, []))
        for w in q_basis.get(d, []):
            vs.append(qs[d].lift(w))
        b = Span(vs).basis
        if b:
            out[d] = b
    return out


def socle_series(m: GradedModule, s: int) -> tuple[list[dict[int, list[int]]], int | None]:
    """N_0 = 0, N_{k+1} = preimage of sigma_s(M / N_k), until stationary.

    Returns the series and the degree through which its limit is exact. For an
    incomplete module each step keeps only the socle classes in degrees known
    exactly (half the current trust) and closes them under the action, so every
    N_k is a genuine submodule of the untruncated module.
    """
    series = [{}]
    cur: dict[int, list[int]] = {}
    trust = None if m.complete else m.trust
    while True:
        bound = _half(trust)
        qs = {d: Quotient(m.dim(d), cur.get(d, [])) for d in m.degrees()}
        qmod, _ = quotient(m, cur)
        add = socle_basis(mark_unstable(qmod), s)
        if bound is not None:
            add = {d: vs for d, vs in add.items() if d <= bound}
        nxt = _preimage(m, cur, add, qs)
        if bound is not None:
            nxt = generated_subspaces(m, nxt)
        if sum(len(v) for v in nxt.values()) == sum(len(v) for v in cur.values()):
            return series, bound
        cur = nxt
        series.append(cur)
        trust = bound


def in_nil_s(n_mod: GradedModule, s: int) -> NilVerdict:
    """Decide N in Nil_s via the greedy socle series (certificate = the series)."""
    require_unstable(n_mod)
    low = [d for d in n_mod.degrees() if d < s]
    series, trust = socle_series(n_mod, s)
    top = series[-1]
    total = sum(len(v) for v in top.values())
    if low:
        return NilVerdict(NOT_MEMBER, s, series, trust, f"nonzero class in degree {low[0]} < {s}")
    if n_mod.complete:
        if total == n_mod.total_dim():
            return NilVerdict(MEMBER, s, series, None)
        return NilVerdict(NOT_MEMBER, s, series, None, "socle series stalls")
    exhausted = all(len(top.get(d, [])) == n_mod.dim(d) for d in n_mod.degrees() if d <= trust)
    if exhausted:
        return NilVerdict(INCONCLUSIVE, s, series, trust, f"exhausted through degree {trust} only")
    return NilVerdict(INCONCLUSIVE, s, series, trust, "series stalls inside an incomplete window")


# -- the nilpotent filtration ------------------------------------------------------

@dataclass
class NilFiltrationReport:
    module: GradedModule
    nil: dict[int, tuple[GradedModule, ModuleMap]]
    layers: dict[int, GradedModule]
    layer_proj: dict[int, ModuleMap]
    trust: int | None
    smax: int

    def nil_dims(self, s: int) -> dict[int, int]:
        return dict(self.nil[s][0].dims)

    def as_dict(self) -> dict:
        return {
            "trust": self.trust,
            "nil": {str(s): {str(d): n for d, n in sorted(self.nil[s][0].dims.items())} for s in sorted(self.nil)},
            "rho": {str(s): {str(d): n for d, n in sorted(self.layers[s].dims.items())} for s in sorted(self.layers)},
        }


def nil_subspaces(m: GradedModule, s: int) -> dict[int, list[int]]:
    """Basis of nil_s M: the limit of the socle series."""
    return socle_series(m, s)[0][-1]


def nil_filtration(m: GradedModule, smax: int) -> NilFiltrationReport:
    """nil_s M for 0 <= s <= smax + 1 and the layers rho_s = Sigma^{-s} nil_s / nil_{s+1}.

    For an incomplete module everything is cut at the smallest degree that all
    socle series still determine exactly (``report.module`` is the cut module).
    """
    require_unstable(m)
    bases = {0: {d: [1 << r for r in range(m.dim(d))] for d in m.degrees()}}
    trust = None
    for s in range(1, smax + 2):
        series, t = socle_series(m, s)
        bases[s] = series[-1]
        trust = tmin(trust, t)
    if trust is not None:
        m = m.with_window(dmax=max(trust, m.dmin))
        bases = {s: {d: vs for d, vs in b.items() if d <= trust} for s, b in bases.items()}
    nil = {s: subspace_module(m, b) for s, b in bases.items()}
    layers, projs = {}, {}
    for s in range(0, smax + 1):
        layer, proj = layer_module(nil[s], nil[s + 1], s)
        layers[s] = layer
        projs[s] = proj
    return NilFiltrationReport(m, nil, layers, projs, trust, smax)


def layer_module(upper: tuple[GradedModule, ModuleMap], lower: tuple[GradedModule, ModuleMap], s: int):
    """Sigma^{-s}(upper / lower) with the projection from Sigma^{-s} upper."""
    up, up_inc = upper
    lo, lo_inc = lower
    sub = {}
    for d in lo.degrees():
        sp = Span(up_inc.at(d).rows, track=True)
        sub[d] = [_coords_vec(sp, v) for v in lo_inc.at(d).rows]
    q, p = quotient(up, sub)
    layer = mark_unstable(suspend(q, -s))
    proj = ModuleMap(suspend(up, -s), layer, {d - s: mat for d, mat in p.mats.items()})
    return layer, proj


def _coords_vec(sp: Span, v: int) -> int:
    return sp.coords(v)


def is_reduced(m: GradedModule) -> bool:
    """No nonzero suspension submodule; cross-checked against injectivity of lambda."""
    require_unstable(m)
    soc = socle_basis(m, 1)
    trust = None if m.complete else _half(m.trust)
    by_socle = not any(d <= trust for d in soc) if trust is not None else not soc
    lam = lambda_map(m)
    by_lambda = all(lam.rank(2 * d) == m.dim(d) for d in m.degrees()
                    if trust is None or d <= trust)
    if by_socle != by_lambda:
        raise ArithmeticError("sigma_1 and lambda disagree on reducedness")
    return by_socle


# -- delta_n ----------------------------------------------------------------------

@dataclass
class DeltaResult:
    n: int
    delta: ModuleMap
    rho_n: GradedModule
    rho_n1: GradedModule
    filtration: NilFiltrationReport
    checks: dict[str, bool]

    @property
    def nonzero(self) -> bool:
        return not self.delta.is_zero()


def layer_class(rep: NilFiltrationReport, s: int, d: int, v: int) -> int:
    """Class in rho_s (degree d - s) of a vector v of nil_s M (M coordinates, degree d)."""
    if not v:
        return 0
    sp = Span(rep.nil[s][1].at(d).rows, track=True)
    return rep.layer_proj[s].apply(d - s, sp.coords(v))


def layer_lift(rep: NilFiltrationReport, s: int, e: int, w: int) -> int:
    """A representative in nil_s M (M coordinates, degree e + s) of a class of rho_s in degree e."""
    from .gmod import lift_through
    if not w:
        return 0
    coords = lift_through(rep.layer_proj[s], e, w)
    return rep.nil[s][1].apply(e + s, coords)


def delta_n(n_mod: GradedModule, n: int) -> DeltaResult:
    """delta_n: Phi rho_n N -> rho_{n+1} N, induced by x -> Sq^{|x|+1} x on Sigma^{-n} N."""
    require_unstable(n_mod)
    verdict = in_nil_s(n_mod, n)
    if verdict.status == NOT_MEMBER:
        raise ValueError(f"module is not in Nil_{n}: {verdict.reason}")
    rep = nil_filtration(n_mod, n + 1)
    inc_n1 = rep.nil[n + 1][1]
    inc_n2 = rep.nil[n + 2][1]
    rho_n, rho_n1 = rep.layers[n], rep.layers[n + 1]
    ph = phi(rho_n)
    span1 = {d: Span(inc_n1.at(d).rows) for d in n_mod.degrees()}
    span2 = {d: Span(inc_n2.at(d).rows) for d in n_mod.degrees()}
    factors = True
    well_defined = True
    mats = {}
    for e in rho_n.degrees():
        d = e + n
        rows = []
        for r in range(rho_n.dim(e)):
            y = layer_lift(rep, n, e, 1 << r)
            z = n_mod.apply(e + 1, d, y)
            if z and not span1.get(d + e + 1, Span()).contains(z):
                factors = False
                rows.append(0)
                continue
            rows.append(layer_class(rep, n + 1, d + e + 1, z))
        mats[2 * e] = Mat(tuple(rows), rho_n1.dim(2 * e))
    # representatives in nil_{n+1} must go into nil_{n+2}
    for d in n_mod.degrees():
        e = d - n
        if e < 0:
            continue
        for v in inc_n1.at(d).rows:
            z = n_mod.apply(e + 1, d, v)
            if z and not span2.get(d + e + 1, Span()).contains(z):
                well_defined = False
    delta = ModuleMap(ph, rho_n1, mats)
    checks = {"factors_through_nil": factors, "well_defined": well_defined, "steenrod_linear": delta.is_linear()}
    return DeltaResult(n, delta, rho_n, rho_n1, rep, checks)


def residue_factorization(n_mod: GradedModule, n: int) -> bool:
    """d_{1/n} lands in Sigma^{-n-1} nil_{n+1} N."""
    from .singer import residue_differential
    _, d, _ = residue_differential(n_mod, n)
    span1 = {e: Span(inc.rows) for e, inc in _nil_inclusion(n_mod, n + 1).mats.items()}
    for total, mat in d.mats.items():
        for row in mat.rows:
            if row and not span1.get(total + n + 1, Span()).contains(row):
                return False
    return True


def _nil_inclusion(m: GradedModule, s: int) -> ModuleMap:
    sub, inc = subspace_module(m, nil_subspaces(m, s))
    return inc


# -- the four-term sequence --------------------------------------------------------

@dataclass
class SequenceCheck:
    terms: list[GradedModule]
    maps: list[ModuleMap]
    exact: dict[str, bool]

    @property
    def ok(self) -> bool:
        return all(self.exact.values())


def les_omegan_check(m: GradedModule, n: int) -> SequenceCheck:
    """Sigma Phi rho_n -> Sigma rho_{n+1} -> Omega^n(M / nil_{n+2}) -> rho_n -> 0, checked for exactness."""
    dres = delta_n(m, n)
    rep = dres.filtration
    nil2_basis = {d: list(inc.rows) for d, inc in rep.nil[n + 2][1].mats.items()}
    nil1_basis = {d: list(inc.rows) for d, inc in rep.nil[n + 1][1].mats.items()}
    q2, p2 = quotient(m, nil2_basis)
    q1, p1 = quotient(m, nil1_basis)
    q2, q1 = mark_unstable(q2), mark_unstable(q1)
    quot2 = {d: Quotient(m.dim(d), nil2_basis.get(d, [])) for d in m.degrees()}
    quot1 = {d: Quotient(m.dim(d), nil1_basis.get(d, [])) for d in m.degrees()}
    qmap = ModuleMap(q2, q1, {d: Mat(tuple(p1.apply(d, quot2[d].lift(1 << r)) for r in range(q2.dim(d))),
                                     q1.dim(d)) for d in q2.degrees()})
    om2, pr2 = loops_n(q2, n)
    om1, pr1 = loops_n(q1, n)
    rho_n, rho1 = dres.rho_n, dres.rho_n1
    # M / nil_{n+1} is Sigma^n rho_n, so Omega^n of it is rho_n
    ident = ModuleMap(pr1.source, rho_n, {
        e: Mat(tuple(layer_class(rep, n, e + n, quot1[e + n].lift(1 << r)) for r in range(q1.dim(e + n))),
               rho_n.dim(e)) for e in pr1.source.degrees()})
    from .gmod import factor_through_surjection
    third = loops_on_map(qmap, pr2, pr1, n).then(factor_through_surjection(ident, pr1))
    srho1 = suspend(rho1, 1)
    second = {}
    for e in srho1.degrees():
        rows = [pr2.apply(e, p2.apply(e + n, layer_lift(rep, n + 1, e - 1, 1 << r))) for r in range(srho1.dim(e))]
        second[e] = Mat(tuple(rows), om2.dim(e))
    second_map = ModuleMap(srho1, om2, second)
    first = ModuleMap(suspend(dres.delta.source, 1), srho1, {d + 1: mat for d, mat in dres.delta.mats.items()})
    top = m.trust
    exact = {
        "at_sigma_rho_n1": is_exact_at(first, second_map, top),
        "at_omega_n": is_exact_at(second_map, third, top),
        "onto_rho_n": third.is_surjective(),
        "maps_linear": all(f.is_linear() for f in (first, second_map, third)),
    }
    return SequenceCheck([first.source, srho1, om2, rho_n], [first, second_map, third], exact)


# -- almost unstable modules ---------------------------------------------------------

@dataclass
class AlmostUnstableWitness:
    """f_0 = 0 < f_1 < ... < f_k = M; step i has subquotient Sigma^{-t_i} N_i with N_i in Nil_{t_i + offset}."""
    steps: list[dict[int, list[int]]]
    shifts: list[int]
    offset: int = 0
    status: str = MEMBER
    reason: str = ""
    checked: list[bool] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.status == MEMBER


def unstable_part(m: GradedModule, t: int) -> dict[int, list[int]]:
    """Largest submodule S with Sigma^t S unstable."""
    fam = {}
    for d in m.degrees():
        if d + t < 0:
            continue
        rows = [0] * m.dim(d)
        cols = 0
        for i in range(d + t + 1, m.dmax - d + 1):
            mat = m.sq(i, d)
            rows = [r | (x << cols) for r, x in zip(rows, mat.rows)]
            cols += mat.ncols
        ker = left_kernel(rows) if cols else [1 << r for r in range(m.dim(d))]
        if ker:
            fam[d] = ker
    return largest_stable_subspaces(m, fam)


def check_witness(m: GradedModule, w: AlmostUnstableWitness) -> list[bool]:
    out = []
    prev: dict[int, list[int]] = {}
    for step, t in zip(w.steps, w.shifts):
        ok = True
        for d, vs in prev.items():
            sp = Span(step.get(d, []))
            ok &= all(sp.contains(v) for v in vs)
        try:
            sub, _ = subspace_module(m, step)
            inner = {}
            for d in sub.degrees():
                sp = Span(step[d], track=True)
                inner[d] = [sp.coords(v) for v in prev.get(d, [])]
            q, _ = quotient(sub, inner)
        except (NotSteenrodLinear, ValueError):
            out.append(False)
            prev = step
            continue
        lifted = mark_unstable(suspend(q, t))
        if not lifted.unstable:
            ok = False
        else:
            ok &= in_nil_s(lifted, t + w.offset).status == MEMBER
        out.append(bool(ok))
        prev = step
    final = {d: Span(vs) for d, vs in (w.steps[-1] if w.steps else {}).items()}
    if any(len(final.get(d, Span())) != m.dim(d) for d in m.degrees()):
        out.append(False)
    return out


def certify_almost_unstable(m: GradedModule, witness: AlmostUnstableWitness | None = None,
                            tmax: int = 8, offset: int = 0) -> AlmostUnstableWitness:
    """Check a supplied witness, or search for one by peeling Sigma^{-t}-socles."""
    if witness is not None:
        witness.offset = offset if witness.offset == 0 else witness.offset
        witness.checked = check_witness(m, witness)
        if all(witness.checked):
            witness.status = MEMBER
        else:
            witness.status = INCONCLUSIVE
            witness.reason = "supplied witness fails verification"
        return witness
    neg = [d for d in m.degrees() if d < 0]
    if neg:
        return AlmostUnstableWitness([], [], offset, NOT_MEMBER,
                                     f"nonzero in negative degree {neg[0]}")
    if m.complete and offset == 0:
        # bounded above: the degree filtration has unstable one-degree layers
        steps, acc = [], {}
        for d in sorted(m.degrees(), reverse=True):
            acc = dict(acc)
            acc[d] = [1 << r for r in range(m.dim(d))]
            steps.append(acc)
        w = AlmostUnstableWitness(steps, [0] * len(steps), 0)
        w.checked = check_witness(m, w)
        return w
    steps, shifts = [], []
    cur: dict[int, list[int]] = {}
    while sum(len(v) for v in cur.values()) < m.total_dim():
        qs = {d: Quotient(m.dim(d), cur.get(d, [])) for d in m.degrees()}
        q, _ = quotient(m, cur)
        found = None
        for t in range(0, tmax + 1):
            part = unstable_part(q, t)
            if not part:
                continue
            sub, _ = subspace_module(q, part)
            lifted = mark_unstable(suspend(sub, t))
            nil = nil_subspaces(lifted, t + offset)
            nil = {d - t: vs for d, vs in nil.items()}
            if nil:
                found = (t, nil)
                break
        if found is None:
            return AlmostUnstableWitness(steps, shifts, offset, INCONCLUSIVE,
                                         f"no Sigma^-t socle found for t <= {tmax}")
        t, add = found
        # the Sigma^{-t} socle of the quotient, expressed in the submodule's coordinates, lifted to M
        part = unstable_part(q, t)
        sub, inc = subspace_module(q, part)
        lifted = {}
        for d, vs in add.items():
            lifted[d] = [inc.apply(d, v) for v in vs]
        cur = _preimage(m, cur, lifted, qs)
        steps.append(cur)
        shifts.append(t)
    w = AlmostUnstableWitness(steps, shifts, offset)
    w.checked = check_witness(m, w)
    if not all(w.checked):
        w.status = INCONCLUSIVE
        w.reason = "greedy filtration failed verification"
    return w


# -- good decompositions --------------------------------------------------------------

@dataclass
class GoodDecomposition:
    rho0: GradedModule
    proj: ModuleMap
    kernel: GradedModule
    incl: ModuleMap
    kernel_witness: AlmostUnstableWitness | None


def rho0(m: GradedModule, presentation: int | None = None) -> tuple[GradedModule, ModuleMap]:
    """rho_0 M = (Omega^infinity M) / nil_1, with the projection from M.

    With ``presentation = t`` the module is read as Sigma^{-t} N and
    Omega^infinity is computed as Omega^t N.
    """
    if presentation is not None:
        n_mod = suspend(m, presentation)
        require_unstable(n_mod, "Sigma^t of the input")
        om, pr = loops_n(n_mod, presentation)
        # pr: Sigma^{-t} N = M ->> Omega^t N
        pr = ModuleMap(m, om, pr.mats)
    else:
        om, pr = omega_infinity(m)
    series, bound = socle_series(om, 1)
    q, p = quotient(om, series[-1])
    # nil_1 is only known through the socle series' trust degree
    q = mark_unstable(retrust(q, bound))
    return q, pr.then(ModuleMap(om, q, p.mats))


def good_decomposition(m: GradedModule, presentation: int | None = None) -> GoodDecomposition:
    r0, proj = rho0(m, presentation)
    k, inc = kernel(proj)
    w = certify_almost_unstable(k, offset=1) if k.dims else AlmostUnstableWitness([], [], 1)
    return GoodDecomposition(r0, proj, k, inc, w)
