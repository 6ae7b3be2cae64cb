import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import sq_mono

from nilops import io
from nilops.catalog import n_module, polynomial, random_module, rp2, rp_infinity, sphere
from nilops.gf2 import Mat
from nilops.gmod import (GradedModule, ModuleMap, WindowError, cokernel, direct_sum, free_unstable, hom,
                         image, is_short_exact, is_unstable, kernel, same_module, suspend, tensor, validate)


def test_free_one_is_powers_of_x():
    f = free_unstable(1, 40)
    assert f.dims == {1: 1, 2: 1, 4: 1, 8: 1, 16: 1, 32: 1}
    for (i, d), mat in f.action.items():
        assert i == d and mat.rows == (1,)
    assert f.trust == 40 and not f.complete


def test_free_two_dimensions():
    # admissible monomials of excess <= 2
    f = free_unstable(2, 24)
    assert f.dims == {2: 1, 3: 1, 4: 1, 5: 1, 6: 1, 8: 1, 9: 1, 10: 1, 12: 1, 16: 1, 17: 1, 18: 1,
                      20: 1, 24: 1}


@pytest.mark.parametrize("k", [1, 2, 3])
def test_polynomial_module_matches_cartan_oracle(k):
    m, basis = polynomial(k, 10)
    for d, monos in basis.items():
        for r, e in enumerate(monos):
            for i in range(1, 11 - d):
                want = sq_mono(i, e)
                got = {basis[d + i][c] for c in range(m.dim(d + i)) if (m.apply(i, d, 1 << r) >> c) & 1}
                assert got == set(want), (e, i)


def test_tensor_square_of_free_one_inside_two_variables():
    t = tensor(free_unstable(1, 20), free_unstable(1, 20))
    # x^(2^a) y^(2^b): dims are the number of ways to write d as 2^a + 2^b
    for d in range(2, 21):
        want = sum(1 for a in range(5) for b in range(5) if 2 ** a + 2 ** b == d)
        assert t.dim(d) == want
    assert not validate(t)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_hom_out_of_free_module_is_degree_n_part(n):
    for m in (rp2(), n_module(2), suspend(rp2(), 2), rp_infinity(16), free_unstable(2, 16)):
        f = free_unstable(n, 2 * 16 + 2) if n else free_unstable(0)
        h = hom(f.with_window(dmax=16) if n else f, m)
        assert h.dim == m.dim(n)
        for g in h.maps:
            assert g.is_linear()


def test_validate_reports_broken_adem():
    dims = {1: 1, 2: 1, 3: 1}
    act = {(1, 1): Mat((1,), 1), (1, 2): Mat((1,), 1)}
    m = GradedModule(0, 3, dims, act, complete=True)
    bad = validate(m)
    assert bad and bad[0].kind == "adem" and bad[0].degree == 1 and bad[0].op == (1, 1)


def test_instability_is_checked_on_request():
    dims = {1: 1, 3: 1}
    m = GradedModule(0, 3, dims, {(2, 1): Mat((1,), 1)}, complete=True)
    assert not is_unstable(m)
    assert any(v.kind == "instability" for v in validate(m, check_unstable=True))


def test_window_rules():
    m = rp_infinity(16)
    with pytest.raises(WindowError):
        m.with_window(dmax=20)
    assert rp2().with_window(dmax=40).complete
    with pytest.raises(WindowError):
        GradedModule(0, 3, {5: 1}, {})


def test_exact_sequences_of_kernel_image_cokernel():
    rng = random.Random(7)
    for _ in range(6):
        m = random_module(rng, 6)
        maps = hom(m, m).maps
        for f in maps[:3]:
            k, ki = kernel(f)
            c, cp = cokernel(f)
            i, ii = image(f)
            assert is_short_exact(ki, ModuleMap(m, i, {d: f.at(d) @ _coords(ii, d) for d in m.degrees()}))
            assert all(m.dim(d) == k.dim(d) + i.dim(d) for d in m.degrees())
            assert all(m.dim(d) == c.dim(d) + i.dim(d) for d in m.degrees())


def _coords(inc, d):
    from nilops.gf2 import Span
    sp = Span(inc.at(d).rows, track=True)
    n = inc.target.dim(d)
    return Mat(tuple(sp.coords(1 << r) if sp.contains(1 << r) else 0 for r in range(n)), inc.source.dim(d))


def test_direct_sum_projections_split():
    s, incls, projs = direct_sum(rp2(), n_module(2))
    assert s.dims == {1: 1, 2: 1, 4: 1, 8: 1}
    for a, p in zip(incls, projs):
        assert a.then(p).is_iso()


def test_suspension_round_trip():
    m = rp2()
    assert same_module(suspend(suspend(m, 3), -3), m)
    assert suspend(m, 1).unstable
    assert suspend(m, 1).sq(1, 2).rows == (1,)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_json_round_trip(seed):
    m = random_module(random.Random(seed), 5)
    doc = io.module_to_dict(m)
    back = io.module_from_dict(json.loads(json.dumps(doc)))
    assert same_module(m, back) and back.complete == m.complete
    assert io.dumps(io.module_to_dict(back)) == io.dumps(doc)


def test_json_errors_carry_positions(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"window": [0, 4],\n "dims": {"1": 1 "2": 1}}')
    with pytest.raises(io.InputError) as e:
        io.load_module(p)
    assert e.value.where.endswith(":2:19") or ":2:" in e.value.where
    p.write_text(json.dumps({"window": [0, 4], "dims": {"1": 1, "2": 1},
                             "sq": [{"i": 1, "from_degree": 1, "rows": ["11"]}]}))
    with pytest.raises(io.InputError) as e:
        io.load_module(p)
    assert e.value.where.endswith(".sq[0].rows[0]")
    p.write_text(json.dumps({"window": [0, 4], "dims": {"9": 1}}))
    with pytest.raises(io.InputError) as e:
        io.load_module(p)
    assert e.value.where.endswith(".dims.9")
    p.write_text(json.dumps({"dims": {}}))
    with pytest.raises(io.InputError, match="missing field 'window'"):
        io.load_module(p)


def test_sphere_and_trust_flags():
    s = sphere(3)
    assert s.complete and s.trust is None and s.dims == {3: 1}
    assert rp_infinity(20).trust == 20
