"""The mod 2 Steenrod algebra in the admissible (Serre-Cartan) basis."""

from __future__ import annotations

import threading
from functools import lru_cache
from typing import Iterable

Monomial = tuple[int, ...]
"""Exponent sequence (i1, ..., ik) of Sq^i1 ... Sq^ik, all entries positive."""


def binom2(n: int, k: int) -> int:
    """Binomial coefficient C(n, k) mod 2, for any integer ``n``.

    Lucas' theorem is a bitwise test; for negative ``n`` the two's-complement
    bits of Python ints are the 2-adic digits of ``n``, which is the
    coefficient of t^k in the formal series (1 + t)^n.
    """
    if k < 0:
        return 0
    return 1 if (n & k) == k else 0


def degree(mono: Monomial) -> int:
    return sum(mono)


def excess(mono: Monomial) -> int:
    if not mono:
        return 0
    return 2 * mono[0] - sum(mono)


def is_admissible(mono: Monomial) -> bool:
    return all(a >= 2 * b for a, b in zip(mono, mono[1:]))


def _clean(word: Iterable[int]) -> Monomial:
    word = tuple(word)
    if any(i < 0 for i in word):
        raise ValueError(f"negative Steenrod square in {word}")
    return tuple(i for i in word if i)


def adem(a: int, b: int) -> frozenset[Monomial]:
    """Sq^a Sq^b for 0 < a < 2b as a sum of products Sq^(a+b-j) Sq^j."""
    terms: set[Monomial] = set()
    for j in range(a // 2 + 1):
        if binom2(b - 1 - j, a - 2 * j):
            terms ^= {_clean((a + b - j, j))}
    return frozenset(terms)


_lock = threading.Lock()
_memo: dict[Monomial, frozenset[Monomial]] = {}


def _normalize(word: Monomial) -> frozenset[Monomial]:
    cached = _memo.get(word)
    if cached is not None:
        return cached
    # leftmost inadmissible pair
    for k in range(len(word) - 1):
        a, b = word[k], word[k + 1]
        if a < 2 * b:
            break
    else:
        result = frozenset({word})
        with _lock:
            _memo[word] = result
        return result
    prefix, suffix = word[:k], word[k + 2:]
    acc: set[Monomial] = set()
    for mid in adem(a, b):
        for t in _normalize(_clean(prefix + mid + suffix)):
            acc ^= {t}
    result = frozenset(acc)
    with _lock:
        _memo[word] = result
    return result


def _sort_key(mono: Monomial):
    return (len(mono), tuple(-i for i in mono))


class OperationSum:
    """An element of the Steenrod algebra in admissible normal form."""

    __slots__ = ("degree", "terms")

    def __init__(self, terms: Iterable[Monomial] = (), degree: int | None = None):
        acc: set[Monomial] = set()
        for t in terms:
            acc ^= {_clean(t)}
        degs = {sum(t) for t in acc}
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous sum {sorted(acc)}")
        if degs:
            d = degs.pop()
            if degree is not None and degree != d:
                raise ValueError("degree mismatch")
            degree = d
        if not all(is_admissible(t) for t in acc):
            raise ValueError("OperationSum terms must be admissible; use adem_normalize")
        self.degree = 0 if degree is None else degree
        self.terms = frozenset(acc)

    def sorted_terms(self) -> list[Monomial]:
        return sorted(self.terms, key=_sort_key)

    def __eq__(self, other) -> bool:
        if isinstance(other, OperationSum):
            return self.terms == other.terms and (self.degree == other.degree or not self.terms)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "OperationSum") -> "OperationSum":
        return OperationSum(self.terms ^ other.terms)

    def __mul__(self, other: "OperationSum") -> "OperationSum":
        acc: set[Monomial] = set()
        for a in self.terms:
            for b in other.terms:
                acc ^= set(_normalize(a + b))
        return OperationSum(acc, self.degree + other.degree)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(format_monomial(t) for t in self.sorted_terms())


def format_monomial(mono: Monomial) -> str:
    if not mono:
        return "1"
    return "".join(f"Sq{i}" for i in mono)


def adem_normalize(word: Iterable[int]) -> OperationSum:
    """Rewrite Sq^w1 ... Sq^wk into admissible normal form."""
    word = tuple(word)
    return OperationSum(_normalize(_clean(word)), degree=sum(word))


def normalize_terms(word: Iterable[int]) -> frozenset[Monomial]:
    return _normalize(_clean(word))


@lru_cache(maxsize=None)
def _admissible(deg: int, max_first: int) -> tuple[Monomial, ...]:
    # admissible sequences of total degree ``deg`` whose first entry <= max_first
    if deg == 0:
        return ((),)
    out = []
    for first in range(min(deg, max_first), 0, -1):
        for rest in _admissible(deg - first, first // 2):
            out.append((first,) + rest)
    return tuple(out)


def admissible_basis(deg: int, excess_bound: int | None = None) -> list[Monomial]:
    """Admissible monomials of the given degree with excess <= ``excess_bound``.

    Order: decreasing first exponent, then recursively (deterministic).
    """
    if deg < 0:
        return []
    monos = _admissible(deg, deg)
    if excess_bound is None:
        return list(monos)
    return [m for m in monos if excess(m) <= excess_bound]
