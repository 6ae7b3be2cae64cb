from hypothesis import given, settings, strategies as st

from oracles import rank_dense, to_dense

from nilops.gf2 import Mat, Quotient, Span, annihilator, intersect, nullspace, solve, solve_affine


def mats(max_rows=7, max_cols=7):
    return st.integers(0, max_rows).flatmap(lambda r: st.integers(1, max_cols).flatmap(
        lambda c: st.lists(st.integers(0, (1 << c) - 1), min_size=r, max_size=r).map(
            lambda rows: Mat(tuple(rows), c))))


@given(mats())
def test_rank_matches_dense_elimination(m):
    assert m.rank() == rank_dense([to_dense(r, m.ncols) for r in m.rows])


@given(mats())
def test_rank_nullity(m):
    ker = m.kernel()
    assert len(ker) + m.rank() == m.nrows
    for v in ker:
        assert m.apply(v) == 0


@given(mats(), mats())
def test_composition_is_first_then_second(a, b):
    b = Mat(tuple(b.rows[:a.ncols]) + (0,) * max(0, a.ncols - b.nrows), b.ncols)
    ab = a @ b
    for r in range(a.nrows):
        assert ab.apply(1 << r) == b.apply(a.apply(1 << r))


@given(mats())
def test_transpose_twice(m):
    assert m.transpose().transpose() == m


def test_bitstring_convention():
    m = Mat.from_bitstrings(["100", "011"])
    assert m.rows == (0b001, 0b110)
    assert m.to_bitstrings() == ["100", "011"]
    assert m.entry(1, 2) == 1


@given(st.lists(st.integers(0, 63), max_size=8), st.integers(0, 63))
def test_span_coords_reconstruct(vectors, v):
    sp = Span(vectors, track=True)
    if sp.contains(v):
        c = sp.coords(v)
        acc = 0
        for k, b in enumerate(sp.basis):
            if (c >> k) & 1:
                acc ^= b
        assert acc == v
    assert len(sp) == rank_dense([to_dense(x, 6) for x in vectors]) if vectors else len(sp) == 0


@given(st.lists(st.integers(0, 31), max_size=6), st.integers(0, 31))
def test_solve(rows, target):
    x = solve(rows, target)
    reachable = Span(rows).contains(target)
    assert (x is not None) == reachable
    if x is not None:
        acc = 0
        for k, r in enumerate(rows):
            if (x >> k) & 1:
                acc ^= r
        assert acc == target


@given(st.lists(st.integers(0, 31), max_size=6), st.lists(st.integers(0, 31), max_size=6))
def test_intersection_dimension(a, b):
    i = intersect(a, b)
    assert len(Span(i)) == len(Span(a)) + len(Span(b)) - len(Span(list(a) + list(b)))
    assert all(Span(a).contains(v) and Span(b).contains(v) for v in i)


@given(st.lists(st.integers(0, 63), max_size=6))
def test_nullspace_solutions(eqs):
    sols = nullspace(eqs, 6)
    for x in sols:
        assert all(bin(e & x).count("1") % 2 == 0 for e in eqs)
    assert len(sols) == 6 - len(Span(eqs))


@settings(max_examples=200)
@given(st.lists(st.tuples(st.integers(0, 31), st.integers(0, 1)), max_size=7))
def test_affine_solution_or_certificate(system):
    x, combo = solve_affine(system, 5)
    if x is not None:
        assert all(bin(e & x).count("1") % 2 == r for e, r in system)
    else:
        # the listed equations add up to 0 = 1
        lhs, rhs = 0, 0
        for k, (e, r) in enumerate(system):
            if (combo >> k) & 1:
                lhs ^= e
                rhs ^= r
        assert lhs == 0 and rhs == 1


@given(st.lists(st.integers(0, 31), max_size=5))
def test_annihilator(vectors):
    ann = annihilator(vectors, 5)
    assert len(ann) == 5 - len(Span(vectors))
    assert all(bin(a & v).count("1") % 2 == 0 for a in ann for v in vectors)


@given(st.lists(st.integers(0, 31), max_size=4), st.integers(0, 31))
def test_quotient_lift_projects_back(sub, v):
    q = Quotient(5, sub)
    w = q.project(v)
    assert q.project(q.lift(w)) == w
    assert q.dim == 5 - len(Span(sub))
