"""Acceptance checks, one test per criterion; the summary prints a PASS/FAIL line for each."""

import json
import time
from itertools import product

import pytest

from oracles import apply_word, brute_force_nil, enumerate_modules, steenrod_dims

from nilops.catalog import n_module, point, rp2, rp_infinity
from nilops.emodel import e_model, e_model_map, tensor_square_iso, two_column_page
from nilops.functors import (hp2_algebra, loops, loops_n, omega1_by_resolution, square_functors,
                             square_on_map, zero_algebra)
from nilops.gf2 import Mat, Span
from nilops.gmod import (GradedModule, cokernel, free_unstable, hom, is_short_exact,
                         same_module, suspend, tmin, validate)
from nilops.nilfilt import delta_n, les_omegan_check, nil_filtration, nil_subspaces
from nilops.singer import (filtration_quotient, r1, r1_truncated, residue_differential, to_phi,
                           truncation_map, u_multiple_inclusion)
from nilops.steenrod import adem_normalize, admissible_basis
from nilops import polyfunc as pf


def _trust(*mods):
    return tmin(*(m.trust for m in mods))


# -- 1 -------------------------------------------------------------------------------

TEST_POLYS = [frozenset([e]) for e in [(1, 1, 1, 1), (1, 2, 3, 4), (3, 5, 6, 7), (7, 0, 2, 9), (15, 1, 0, 0)]]


@pytest.mark.criterion(1, "Adem normal forms agree with the action on F2[x1..x4]")
def test_criterion_1_adem_oracle():
    start = time.time()
    words = []
    for length in (1, 2, 3):
        for w in product(range(1, 25), repeat=length):
            if sum(w) <= 24:
                words.append(w)
    bad = 0
    for w in words:
        normal = adem_normalize(w)
        for p in TEST_POLYS:
            lhs = apply_word(w, p)
            rhs = frozenset()
            for term in normal.terms:
                rhs = rhs.symmetric_difference(apply_word(term, p))
            bad += lhs != rhs
    # normal forms are admissible and the admissible basis has the right size
    assert all(all(a >= 2 * b for a, b in zip(t, t[1:])) for w in words for t in adem_normalize(w).terms)
    assert [len(admissible_basis(d)) for d in range(25)] == steenrod_dims(24)
    assert bad == 0
    assert time.time() - start < 10


# -- 2 -------------------------------------------------------------------------------

@pytest.mark.criterion(2, "both Frobenius/square-functor sequences exact degreewise")
def test_criterion_2_square_sequences(modules):
    start = time.time()
    for name, m in modules:
        assert not validate(m), name
        sf = square_functors(m)
        top = sf.trust()
        assert is_short_exact(sf.l2_to_g2, sf.g2_to_phi, top), name
        assert is_short_exact(sf.phi_to_s2, sf.s2_to_l2, top), name
        for f in (sf.l2_to_g2, sf.g2_to_phi, sf.phi_to_s2, sf.s2_to_l2):
            assert f.is_linear(), name
    assert time.time() - start < 30


# -- 3 -------------------------------------------------------------------------------

def _layer_dims(s, i):
    hi, _ = u_multiple_inclusion(s, i)
    lo, _ = u_multiple_inclusion(s, i + 1)
    return {d: hi.dim(d) - lo.dim(d) for d in set(hi.dims) | set(lo.dims) if hi.dim(d) - lo.dim(d)}


@pytest.mark.criterion(3, "Singer sequence, u-adic layers and R_{1/1} = Phi")
def test_criterion_3_singer(modules):
    start = time.time()
    for name, m in modules:
        s = r1(m)
        top = s.carrier.trust
        p = to_phi(s)
        u, inc = u_multiple_inclusion(s)
        assert is_short_exact(inc, p, top), name
        # u-multiplication is injective, so u R is a copy of Sigma R
        for d, mat in s.u_action.items():
            if top is None or d + 1 <= top:
                assert mat.rank() == s.carrier.dim(d), (name, d)
        for n in range(1, 5):
            t = r1_truncated(m, n)
            ttop = t.carrier.trust
            for i in range(n):
                want = suspend(square_functors(m).phi, i)
                got = _layer_dims(t, i)
                for d in set(got) | set(want.dims):
                    if ttop is None or d <= ttop:
                        assert got.get(d, 0) == want.dim(d), (name, n, i, d)
            if n >= 2:
                small = r1_truncated(m, n - 1)
                q = truncation_map(t, small)
                layer = filtration_quotient(t, n - 1)
                assert layer.is_linear() and q.is_linear(), (name, n)
                assert is_short_exact(layer, q, _trust(t.carrier, small.carrier)), (name, n)
        iso = to_phi(r1_truncated(m, 1))
        assert iso.is_linear() and iso.is_iso(), name
    assert time.time() - start < 60


# -- 4 -------------------------------------------------------------------------------

def _kernel_spaces(proj):
    return {d: Span(proj.at(d).kernel()).basis for d in proj.source.degrees()}


@pytest.mark.criterion(4, "coker of the Singer residue equals iterated loops; two routes to Omega_1 agree")
def test_criterion_4_loops():
    start = time.time()
    inputs = [("Sigma F(0)", suspend(point(0), 1)), ("F(1)", free_unstable(1, 32)), ("RP2", rp2()),
              ("Sigma N(2)", suspend(n_module(2), 1))]
    mismatches = []
    for name, nmod in inputs:
        for n in (1, 2, 3):
            _, d, tgt = residue_differential(nmod, n)
            sd = d.suspend(1)
            c, cproj = cokernel(sd)
            om, oproj = loops_n(nmod, n)
            top = _trust(c, om)
            # both are quotients of Sigma^{-n} N: compare the kernels of the projections
            kc, ko = _kernel_spaces(cproj), _kernel_spaces(oproj)
            for deg in set(kc) | set(ko):
                if top is not None and deg > top:
                    continue
                if sorted(Span(kc.get(deg, [])).basis) != sorted(Span(ko.get(deg, [])).basis):
                    mismatches.append((name, n, deg))
        lam_route = loops(nmod).omega1
        res_route = omega1_by_resolution(nmod)
        top = _trust(lam_route, res_route)
        for deg in set(lam_route.dims) | set(res_route.dims):
            if (top is None or deg <= top) and lam_route.dim(deg) != res_route.dim(deg):
                mismatches.append((name, "Omega_1", deg))
    assert mismatches == []
    assert time.time() - start < 60


# -- 5 -------------------------------------------------------------------------------

@pytest.mark.criterion(5, "greedy nil_s equals the submodule-lattice maximum on all small modules")
def test_criterion_5_nil_lattice():
    start = time.time()
    count, bad = 0, []
    for dims, act in enumerate_modules(4, 16):
        m = GradedModule(0, 16, dims, {k: Mat(tuple(v), dims[k[0] + k[1]]) for k, v in act.items()},
                         complete=True, unstable=True)
        oracle = brute_force_nil(dims, act, 6)
        for s in range(7):
            got = nil_subspaces(m, s)
            for d in dims:
                sp = Span(got.get(d, []))
                members = {v for v in range(1, 1 << dims[d]) if sp.contains(v)}
                if members != set(oracle[s].get(d, ())):
                    bad.append((dims, act, s))
        count += 1
    assert count == 20208
    assert bad == []
    assert time.time() - start < 300


# -- 6 -------------------------------------------------------------------------------

@pytest.mark.criterion(6, "delta_n nonzero on RP2 and Sigma RP2, four-term sequence exact, zero on suspended reduced modules")
def test_criterion_6_delta():
    start = time.time()
    for m, n in ((rp2(), 1), (suspend(rp2(), 1), 2)):
        dr = delta_n(m, n)
        assert dr.nonzero and all(dr.checks.values())
        seq = les_omegan_check(m, n)
        assert all(seq.exact.values()), seq.exact
    for r in (point(0), free_unstable(1, 32), free_unstable(2, 32), rp_infinity(32)):
        for n in (1, 2, 3):
            dr = delta_n(suspend(r, n), n)
            assert not dr.nonzero
    assert time.time() - start < 30


# -- 7 -------------------------------------------------------------------------------

@pytest.mark.criterion(7, "E_n sequence exact, E_1 = tensor square naturally, layer map = delta_n through Phi rho_n")
def test_criterion_7_emodel(modules):
    start = time.time()
    for name, m in modules:
        for n in (1, 2, 3):
            em = e_model(m, n)
            assert em.is_exact(), (name, n)
            if n >= 2:
                assert em.dims_identity(), (name, n)
        # E_1 is naturally the tensor square: compare matrices along every basis map
    pairs = [(rp2(), rp2()), (n_module(2), rp2()), (rp2(), suspend(rp2(), 1))]
    pairs += [(modules[4][1], modules[5][1]), (modules[6][1], modules[7][1])]
    for a, b in pairs:
        ea, eb = e_model(a, 1), e_model(b, 1)
        for f in hom(a, b).maps:
            lhs = e_model_map(f, ea, eb).then(tensor_square_iso(eb))
            rhs = tensor_square_iso(ea).then(square_on_map(f, ea.squares, eb.squares).t2)
            assert lhs.mats == rhs.mats
    for name, m in modules[:8]:
        for n in (2, 3):
            res = two_column_page(zero_algebra(suspend(m, n)), n)
            assert res.checks["factors_through_phi"], (name, n)
            assert all(res.checks.values()), (name, n, res.checks)
    res = two_column_page(hp2_algebra(), 2)
    assert res.checks["factors_through_phi"] and all(res.checks.values())
    assert time.time() - start < 60


# -- 8 -------------------------------------------------------------------------------

@pytest.mark.criterion(8, "degrees, Frobenius non-split, detection for Lambda2 -> T2, e1 nonzero with both certificates")
def test_criterion_8_functors():
    start = time.time()
    assert pf.poly_degree(pf.Id(3)).value == 1
    for name in ("S2", "L2", "G2"):
        assert pf.poly_degree(pf.standard(name, 3)).value == 2
    ses = pf.phi_ses()
    rep = pf.ses_splits(ses)
    assert not rep.splits and pf.check_split_certificate(ses, rep.certificate)
    chain = pf.detection_functor(pf.quadratic_map("l2_to_t2", 3))
    assert chain.verify() and chain.composite.comps == pf.identity_nat(chain.iota.source).comps
    ext = pf.e1_row()
    cls = pf.yoneda_class(ext)
    assert cls.nonzero and pf.check_witness(ext, cls)
    split_mono = pf.detection_functor(pf.identity_nat(pf.Id(3)))
    assert split_mono.verify()
    assert time.time() - start < 120


# -- 9 -------------------------------------------------------------------------------

def _run_obstructions():
    ident = pf.Id(3)
    a = pf.obstruction(2, ident, pf.identity_nat(ident))
    zero, zero_incl = pf.subfunctor(ident, [[] for _ in range(4)], "0")
    b = pf.obstruction(2, ident, zero_incl)
    lrp = pf.localize(rp_infinity(16)).functor
    c = pf.obstruction(2, lrp, pf.identity_nat(lrp))
    return a, b, c


@pytest.mark.criterion(9, "obstruction verdicts fires / consistent / hypothesis-not-met, deterministic JSON")
def test_criterion_9_obstruction():
    start = time.time()
    a, b, c = _run_obstructions()
    assert a.verdict == pf.FIRES and a.chain is not None and a.chain.verify()
    assert all(x.nonzero for x in a.ext.values())
    assert b.verdict == pf.CONSISTENT
    assert c.verdict == pf.NOT_MET
    first = [json.dumps(r.as_dict(), sort_keys=True) for r in (a, b, c)]
    second = [json.dumps(r.as_dict(), sort_keys=True) for r in _run_obstructions()]
    assert first == second
    assert time.time() - start < 120


# -- 10 ------------------------------------------------------------------------------

def _windowed_values(window: int) -> dict:
    """Results of the windowed computations behind criteria 2-7, keyed by a description."""
    out = {}
    for k in (1, 2):
        m = free_unstable(k, window)
        tag = f"F({k})"
        sf = square_functors(m)
        for part in ("t2", "s2", "l2", "g2", "phi"):
            out[f"{tag} {part}"] = getattr(sf, part)
        out[f"{tag} R1"] = r1(m).carrier
        for n in range(1, 5):
            out[f"{tag} R1/{n}"] = r1_truncated(m, n).carrier
        for n in range(1, 4):
            out[f"{tag} Omega^{n}"] = loops_n(m, n)[0]
            _, d, _ = residue_differential(m, n)
            out[f"{tag} coker d1/{n}"] = cokernel(d.suspend(1))[0]
        out[f"{tag} Omega_1"] = loops(m).omega1
        out[f"{tag} Omega_1 resolution"] = omega1_by_resolution(m)
        rep = nil_filtration(m, 4)
        for s, (mod, _) in rep.nil.items():
            out[f"{tag} nil_{s}"] = mod
        for s, mod in rep.layers.items():
            out[f"{tag} rho_{s}"] = mod
        for n in (1, 2):
            dr = delta_n(suspend(m, n), n)
            out[f"{tag} delta_{n} rho_n"] = dr.rho_n
            out[f"{tag} delta_{n} image"] = cokernel(dr.delta)[0]
        for n in (1, 2, 3):
            em = e_model(m, n)
            out[f"{tag} E_{n}"] = em.module
    return out


@pytest.mark.criterion(10, "window 48 agrees with window 32 below every reported trust degree")
def test_criterion_10_trust_soundness():
    small, big = _windowed_values(32), _windowed_values(48)
    violations = []
    for key, a in small.items():
        b = big[key]
        upto = a.trust
        if not same_module(a, b, upto=upto):
            violations.append((key, upto))
    assert violations == []
