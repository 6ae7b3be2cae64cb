import pytest

from nilops.catalog import n_module, point, rp2, rp_infinity, sphere
from nilops.gmod import free_unstable, is_short_exact, suspend
from nilops.nilfilt import (INCONCLUSIVE, MEMBER, NOT_MEMBER, AlmostUnstableWitness, certify_almost_unstable,
                            delta_n, good_decomposition, in_nil_s, is_reduced, nil_filtration, rho0)


def test_rp2_filtration():
    rep = nil_filtration(rp2(), 4)
    assert rep.nil_dims(0) == {1: 1, 2: 1}
    assert rep.nil_dims(1) == {1: 1, 2: 1}
    assert rep.nil_dims(2) == {2: 1}
    assert rep.nil_dims(3) == {}
    assert rep.layers[1].dims == {0: 1} and rep.layers[2].dims == {0: 1}
    assert rep.as_dict()["rho"]["0"] == {}


def test_spheres_sit_in_their_own_nil():
    for k in range(4):
        assert in_nil_s(sphere(k), k).status == MEMBER
        assert in_nil_s(sphere(k), k + 1).status == NOT_MEMBER


def test_windowed_membership_is_inconclusive():
    v = in_nil_s(free_unstable(1, 16), 1)
    assert v.status == INCONCLUSIVE and not v
    assert v.trust is not None


def test_reducedness():
    assert is_reduced(free_unstable(1, 32))
    assert is_reduced(rp_infinity(16))
    assert is_reduced(point(0))
    assert not is_reduced(rp2())
    assert not is_reduced(sphere(2))


def test_delta_on_rp2():
    dr = delta_n(rp2(), 1)
    assert dr.nonzero and all(dr.checks.values())
    assert dr.rho_n.dims == {0: 1} and dr.rho_n1.dims == {0: 1}


def test_delta_vanishes_on_n_module_suspension():
    dr = delta_n(suspend(n_module(2), 1), 1)
    assert not dr.nonzero


def test_delta_needs_membership():
    with pytest.raises(ValueError, match="not in Nil_2"):
        delta_n(rp2(), 2)


def test_almost_unstable_search_and_witness():
    m = suspend(rp2(), -1)
    w = certify_almost_unstable(m)
    assert w.status == MEMBER and all(w.checked or [True])
    neg = certify_almost_unstable(suspend(rp2(), -2))
    assert neg.status == NOT_MEMBER
    bogus = AlmostUnstableWitness([{0: [1]}], [0])
    assert certify_almost_unstable(m, bogus).status == INCONCLUSIVE


def test_rho0_of_reduced_and_nil_modules():
    q, p = rho0(rp_infinity(16))
    assert p.is_surjective()
    assert q.dim(1) == 1
    q, _ = rho0(sphere(3))
    assert q.dims == {}


def test_good_decomposition():
    gd = good_decomposition(suspend(rp2(), -1))
    assert gd.rho0.dims == {0: 1} and gd.kernel.dims == {1: 1}
    assert gd.kernel_witness.status == MEMBER
    assert is_short_exact(gd.incl, gd.proj)
    gd = good_decomposition(rp2())
    assert gd.rho0.dims == {} and gd.kernel.dims == {1: 1, 2: 1}


def test_good_decomposition_in_a_window_is_not_refuted():
    from nilops.gmod import direct_sum
    gd = good_decomposition(direct_sum(rp_infinity(12), sphere(2))[0])
    assert gd.kernel.dims == {2: 1}
    # RP-infinity survives, the sphere is nil_1
    assert gd.rho0.dim(1) == 1 and gd.rho0.dim(2) == 1
    # a windowed kernel can only be certified inside the window
    assert gd.kernel_witness.status in (MEMBER, INCONCLUSIVE)
