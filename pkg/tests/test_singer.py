import random

import pytest

from oracles import c2

from nilops.catalog import n_module, random_module, rp2, sphere
from nilops.functors import phi
from nilops.gmod import free_unstable, is_short_exact, is_unstable, same_module, validate
from nilops.singer import (exponent_floor, filtration_quotient, r1, r1_truncated, residue_differential,
                           residue_via_ambient, to_phi, truncation_map, u_multiple_inclusion)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_sphere_action_is_binomial_in_u(k):
    # u^a St_1(x) is u^(a+k) x in degree 2k + a, and x itself carries no squares
    s = r1(sphere(k), dmax=20).carrier
    assert s.dims == {d: 1 for d in range(2 * k, 21)}
    for d in range(2 * k, 21):
        for i in range(1, 21 - d):
            assert s.sq(i, d).rows == (c2(d - k, i),), (d, i)


def test_carrier_is_unstable_and_valid():
    for m in (rp2(), n_module(2), free_unstable(1, 16)):
        s = r1(m, dmax=24)
        assert not validate(s.carrier) and is_unstable(s.carrier)


def test_truncations_are_finite_for_finite_inputs():
    t = r1_truncated(rp2(), 2)
    assert t.carrier.complete and t.carrier.dims == {2: 1, 3: 1, 4: 1, 5: 1}
    one = r1_truncated(rp2(), 1)
    assert to_phi(one).is_iso()
    assert same_module(one.carrier, phi(rp2()))


def test_u_adic_layers():
    rng = random.Random(5)
    for m in [rp2(), sphere(2)] + [random_module(rng, 5) for _ in range(3)]:
        s = r1_truncated(m, 3)
        for i in range(3):
            f = filtration_quotient(s, i)
            assert f.is_injective()
        sub, inc = u_multiple_inclusion(s, 1)
        assert is_short_exact(inc, to_phi(s))


def test_truncation_maps_compose():
    m = rp2()
    a, b, c = r1_truncated(m, 3), r1_truncated(m, 2), r1_truncated(m, 1)
    ab, bc, ac = truncation_map(a, b), truncation_map(b, c), truncation_map(a, c)
    assert ab.then(bc).mats == ac.mats
    assert ab.is_surjective()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_residue_two_ways(n):
    rng = random.Random(n)
    for nmod in [rp2(), n_module(2)] + [random_module(rng, 5) for _ in range(3)]:
        s, d, tgt = residue_differential(nmod, n)
        assert d.is_linear()
        assert residue_via_ambient(s, tgt).mats == d.mats


def test_exponent_floor():
    assert exponent_floor(rp2()) == 0
    from nilops.gmod import suspend
    assert exponent_floor(suspend(rp2(), -1)) == 1
    assert exponent_floor(suspend(sphere(0), -3)) == 3
