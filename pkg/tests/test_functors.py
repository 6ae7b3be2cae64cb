import random

import pytest

from nilops.catalog import n_module, random_module, rp2, rp_infinity, sphere
from nilops.functors import (NotUnstable, UnstableAlgebra, destabilize, ext2, f2bar_um, gamma2, hp2_algebra,
                             lambda_map, loops, loops_n, omega_infinity, phi, square_functors, sym2, t2,
                             truncated_polynomial_algebra)
from nilops.gf2 import Mat
from nilops.gmod import (GradedModule, free_unstable, is_short_exact, is_unstable, same_module, suspend,
                         validate)


def test_phi_doubles_degrees_and_keeps_even_squares():
    p = phi(rp2())
    assert p.dims == {2: 1, 4: 1}
    assert p.sq(2, 2).rows == (1,) and p.sq(1, 2).rows == (0,)
    assert is_unstable(p) and not validate(p)


def test_lambda_is_top_square():
    lam = lambda_map(rp2())
    assert lam.at(2).rows == (1,)
    assert lam.at(4).nrows == 1 and lam.at(4).rows == (0,)


def test_quadratic_dimensions_on_rp2():
    m = rp2()
    assert t2(m).dims == {2: 1, 3: 2, 4: 1}
    assert sym2(m).dims == {2: 1, 3: 1, 4: 1}
    assert ext2(m).dims == {3: 1}
    assert gamma2(m).dims == {2: 1, 3: 1, 4: 1}


def test_all_four_quadratic_sequences_exact():
    rng = random.Random(11)
    for m in [rp2(), n_module(2), suspend(rp2(), 2)] + [random_module(rng, 5) for _ in range(5)]:
        sf = square_functors(m)
        top = sf.trust()
        for i, p in ((sf.l2_to_g2, sf.g2_to_phi), (sf.phi_to_s2, sf.s2_to_l2),
                     (sf.l2_to_t2, sf.t2_to_s2), (sf.g2_to_t2, sf.t2_to_l2)):
            assert is_short_exact(i, p, top)


def test_loops_of_rp2():
    lp = loops(rp2())
    assert lp.omega.dims == {0: 1}
    assert lp.omega1.dims == {3: 1}


@pytest.mark.parametrize("k", [1, 2])
def test_loops_undoes_suspension(k):
    m = free_unstable(k, 24)
    lp = loops(suspend(m, 1))
    assert same_module(lp.omega, m, upto=lp.omega.trust)
    # Sq_0 vanishes on a suspension, so Omega_1 Sigma M is all of Sigma Phi M
    assert same_module(lp.omega1, suspend(phi(m), 1), upto=lp.omega1.trust)


def test_loops_n_composes():
    m = suspend(rp2(), 2)
    two, _ = loops_n(m, 2)
    assert same_module(two, rp2())
    assert same_module(destabilize(m, 2), two)
    assert same_module(destabilize(m, 0), m)


def test_loops_rejects_unstable_violations():
    bad = GradedModule(0, 3, {1: 1, 3: 1}, {(2, 1): Mat((1,), 1)}, complete=True)
    with pytest.raises(NotUnstable):
        loops(bad)


def test_omega_infinity_kills_unstable_excess():
    e = suspend(rp2(), -1)
    q, p = omega_infinity(e)
    # Sigma^-1 RP2: x in degree 0 has Sq^1 x != 0, so degree 1 dies and then so does nothing else
    assert q.dims == {0: 1}
    assert is_unstable(q)


def test_enveloping_stage_sequence():
    for m in (rp2(), n_module(2), sphere(3)):
        st = f2bar_um(m)
        assert is_short_exact(st.incl, st.proj)
        assert not validate(st.module)


def test_algebra_checks():
    assert truncated_polynomial_algebra(4).violations() == []
    assert hp2_algebra().violations() == []
    k = truncated_polynomial_algebra(3)
    broken = UnstableAlgebra(k.carrier, {key: m for key, m in k.product.items() if key != (1, 1)})
    assert any("Sq_0" in v for v in broken.violations())
    lopsided = UnstableAlgebra(k.carrier, {**k.product, (1, 2): Mat((0,), 1)})
    assert any("commutative" in v for v in lopsided.violations())


def test_square_functor_trust_uses_connectivity():
    # the bottom class sits in degree 1, so T^2 is exact one degree past the input window
    sf = square_functors(rp_infinity(16))
    assert sf.t2.trust == 17
    assert sf.t2.dim(17) == 16 and sf.t2.dim(18) == 0


def test_omega1_of_rp2_both_routes_and_its_layer():
    # RP2 is F(1) modulo the submodule generated by x^4
    from nilops.functors import omega1_by_resolution
    from nilops.nilfilt import nil_filtration
    n = rp2()
    by_lambda = loops(n).omega1
    assert by_lambda.dims == {3: 1}
    assert same_module(omega1_by_resolution(n), by_lambda)
    # rho_1 of Sigma^3 F_2 vanishes while Phi rho_1 RP2 does not
    assert nil_filtration(by_lambda, 2).layers[1].dims == {}
    assert phi(nil_filtration(n, 2).layers[1]).dims == {0: 1}
