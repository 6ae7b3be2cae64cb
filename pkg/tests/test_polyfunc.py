import json

import pytest

from nilops import polyfunc as pf
from nilops.catalog import rp2, rp_infinity, sphere
from nilops.gf2 import Mat
from nilops.gmod import free_unstable, suspend
from nilops.polyfunc.core import all_morphisms


def dual(f):
    """V -> F(V*)*, built straight from the stored table."""
    def tr(m):
        j, k, rows = m
        return (k, j, Mat(rows, k).transpose().rows if j else (0,) * k)
    table = {m: f.table[tr(m)].transpose() for m in all_morphisms(f.kmax)}
    return pf.PolyFunctor(f.kmax, f.dims, table, f.name + "#")


def F(name):
    return pf.standard(name, 3)


def test_degrees():
    assert pf.poly_degree(pf.zero_functor()).value == -1
    assert pf.poly_degree(pf.const()).value == 0
    assert pf.poly_degree(F("Id")).value == 1
    for name in ("S2", "L2", "G2", "T2"):
        assert pf.poly_degree(F(name)).value == 2
    assert pf.poly_degree(pf.standard("L3", 4)).value == 3


def test_degree_three_needs_headroom():
    d = pf.poly_degree(F("T3"))
    assert not d.certified and d.lower == 3
    assert "exceeds kmax" in d.describe()


def test_standard_functors_are_functorial():
    for name in ("Id", "S2", "L2", "G2", "T2", "S3", "L3"):
        assert F(name).is_functorial()


@pytest.mark.parametrize("a,b,dim", [("Id", "Id", 1), ("Id", "S2", 1), ("T2", "T2", 2), ("S2", "G2", 1),
                                     ("G2", "S2", 1), ("L2", "T2", 1), ("S2", "Id", 0), ("Id", "G2", 0)])
def test_hom_dimensions(a, b, dim):
    homs = pf.hom_space(F(a), F(b))
    assert len(homs) == dim
    for eta in homs:
        eta.check()


def test_ext_of_identity():
    assert pf.ext_dims(F("Id"), F("Id"), 2) == [1, 0, 1]


def test_ext_zero_is_hom():
    for a in ("Id", "S2", "G2", "L2"):
        for b in ("Id", "S2", "G2", "L2"):
            assert pf.ext_dims(F(a), F(b), 0)[0] == len(pf.hom_space(F(a), F(b)))


def test_duality_swaps_symmetric_and_divided_powers():
    assert pf.same_functor(dual(F("S2")), F("G2"))
    assert pf.same_functor(dual(F("G2")), F("S2"))
    assert dual(F("L2")).is_functorial()


@pytest.mark.parametrize("a,b", [("Id", "S2"), ("S2", "G2"), ("Id", "L2"), ("L2", "G2"), ("Id", "Id")])
def test_ext_respects_duality(a, b):
    fa, fb = F(a), F(b)
    assert pf.ext_dims(fa, fb, 2) == pf.ext_dims(dual(fb), dual(fa), 2)


def test_generators_reject_broken_relations():
    f = F("S2")
    gens = {g: f.table[g] for g in pf.generators(3)}
    # make the last idempotent on dimension 1 act as the identity
    gens[(1, 1, (0,))] = Mat.identity(f.dims[1])
    with pytest.raises(pf.NotFunctorial):
        pf.from_generators(3, f.dims, gens)
    ok = pf.from_generators(3, f.dims, {g: f.table[g] for g in pf.generators(3)})
    assert pf.same_functor(ok, f)


def test_frobenius_sequence_does_not_split():
    ses = pf.phi_ses()
    assert ses.is_exact()
    rep = pf.ses_splits(ses)
    assert not rep.splits and pf.check_split_certificate(ses, rep.certificate)
    split = pf.split_ses(F("Id"), F("L2"))
    assert pf.ses_splits(split).splits


def test_pullback_of_frobenius_along_zero_splits():
    ses = pf.phi_ses()
    along = pf.zero_nat(F("Id"), ses.right)
    assert pf.ses_splits(pf.pullback_ses(ses, along)).splits


def test_two_extension_classes():
    ext = pf.e1_row()
    cls = pf.yoneda_class(ext)
    assert cls.nonzero and pf.check_witness(ext, cls)
    triv = pf.yoneda_class(pf.split_two_extension(F("Id"), F("Id")))
    assert not triv.nonzero


def test_detection_chain_and_its_hypothesis():
    chain = pf.detection_functor(pf.quadratic_map("l2_to_t2", 3))
    assert chain.verify()
    json.dumps(chain.as_dict())
    with pytest.raises(pf.DegreeHypothesis):
        pf.detection_functor(pf.quadratic_map("g2_to_id", 3))


def test_shift_of_identity_is_identity_plus_constant():
    sh = pf.shifted(F("Id"), 1)
    assert list(sh.dims) == [1, 2, 3][: len(sh.dims)] or sh.dims[0] == 1
    assert pf.poly_degree(sh).value == 1


@pytest.mark.parametrize("m,dims", [(free_unstable(1, 16), (0, 1, 2, 3)), (rp2(), (0, 0, 0, 0)),
                                    (rp_infinity(16), (0, 1, 3, 7))])
def test_localization_dimensions(m, dims):
    loc = pf.localize(m)
    assert loc.functor.dims == dims
    assert loc.functor.is_functorial()


def test_localization_of_a_finite_module_is_exact():
    loc = pf.localize(sphere(2))
    assert loc.exact and loc.functor.is_zero()


def test_obstruction_verdicts_for_n_one():
    ident = F("Id")
    s2_id = pf.compose_functors(pf.S(2, 3), ident)
    r = pf.obstruction(1, ident, pf.identity_nat(s2_id))
    assert r.verdict == pf.FIRES and set(r.ext) == {"i*(e1 o F1)", "i*(e1~ o F1)"}
    r = pf.obstruction(1, ident, pf.identity_nat(ident), mode="test-subfunctor")
    assert r.verdict == pf.FIRES
    _, none = pf.subfunctor(s2_id, [[] for _ in range(4)])
    assert pf.obstruction(1, ident, none).verdict == pf.CONSISTENT
    # K must sit inside S^2 o F1 when n = 1
    with pytest.raises(pf.MalformedInclusion):
        pf.obstruction(1, ident, pf.identity_nat(ident))


def test_obstruction_rejects_non_injective_inclusion():
    ident = F("Id")
    with pytest.raises(pf.MalformedInclusion):
        pf.obstruction(2, ident, pf.zero_nat(ident, ident))


def test_module_pipeline_on_suspended_free_module():
    rep = pf.module_obstruction(suspend(free_unstable(1, 40), 2), 2)
    assert rep.verdict == pf.FIRES
    again = pf.module_obstruction(suspend(free_unstable(1, 40), 2), 2)
    assert json.dumps(rep.as_dict(), sort_keys=True) == json.dumps(again.as_dict(), sort_keys=True)


def test_module_pipeline_refuses_a_window_too_small_to_localize():
    # the kernel of delta_2 is trusted only to degree 3, too low to localize from its generator
    rep = pf.module_obstruction(suspend(free_unstable(1, 24), 2), 2)
    assert rep.verdict == pf.NOT_MET
    assert any("localization failed" in r for r in rep.reasons)
