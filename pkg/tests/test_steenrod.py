from hypothesis import given, strategies as st

from oracles import adem_terms, apply_word, steenrod_dims

from nilops.steenrod import (OperationSum, adem, adem_normalize, admissible_basis, excess, format_monomial,
                             is_admissible)


def terms(word):
    return set(adem_normalize(word).terms)


def test_small_relations():
    assert terms((1, 1)) == set()
    assert terms((1, 2)) == {(3,)}
    assert terms((2, 2)) == {(3, 1)}
    assert terms((2, 3)) == {(5,), (4, 1)}
    assert terms((3, 2)) == set()
    assert terms((4, 2)) == {(4, 2)}
    assert terms((1, 2, 1)) == {(3, 1)}


def test_adem_agrees_with_binomial_formula():
    for b in range(1, 12):
        for a in range(1, 2 * b):
            want = {(p, q) if q else (p,) for p, q in adem_terms(a, b)}
            assert set(adem(a, b)) == want


def test_admissible_basis_counts_match_partitions():
    assert [len(admissible_basis(d)) for d in range(40)] == steenrod_dims(39)


def test_excess_bound_filters():
    for d in range(20):
        for n in range(5):
            got = admissible_basis(d, n)
            assert all(excess(t) <= n for t in got)
            assert set(got) == {t for t in admissible_basis(d) if excess(t) <= n}


def test_format():
    assert format_monomial((4, 2, 1)) == "Sq4Sq2Sq1"
    assert repr(adem_normalize((2, 2))) == "Sq3Sq1"
    assert repr(adem_normalize((1, 1))) == "0"


words = st.lists(st.integers(1, 9), min_size=1, max_size=4)


@given(words)
def test_normal_form_is_admissible_and_homogeneous(w):
    out = adem_normalize(w)
    assert all(is_admissible(t) for t in out.terms)
    assert all(sum(t) == sum(w) for t in out.terms)


@given(words, words)
def test_product_is_associative_with_concatenation(a, b):
    assert adem_normalize(a) * adem_normalize(b) == adem_normalize(tuple(a) + tuple(b))


@given(words)
def test_action_on_polynomials_matches(w):
    poly = frozenset([(1, 2, 3, 1)])
    rhs = frozenset()
    for t in adem_normalize(w).terms:
        rhs = rhs.symmetric_difference(apply_word(t, poly))
    assert apply_word(w, poly) == rhs


def test_sum_rejects_non_admissible():
    import pytest
    with pytest.raises(ValueError):
        OperationSum([(1, 1)])
    with pytest.raises(ValueError):
        OperationSum([(2,), (3,)])
