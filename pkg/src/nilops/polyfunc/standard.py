"""Tensor, symmetric, exterior and divided powers, and the maps between them."""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations, combinations_with_replacement, product
from math import comb

from ..gf2 import Mat, bits
from .core import (DEFAULT_KMAX, Morphism, NatRule, NatTrans, PolyFunctor, Rule, compose_functors,
                   from_rule, nat_from_rule, whisker)


@lru_cache(maxsize=None)
def tensor_basis(n: int, m: int) -> tuple[tuple[int, ...], ...]:
    return tuple(product(range(n), repeat=m))


@lru_cache(maxsize=None)
def multiset_basis(n: int, m: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations_with_replacement(range(n), m))


@lru_cache(maxsize=None)
def subset_basis(n: int, m: int) -> tuple[tuple[int, ...], ...]:
    return tuple(combinations(range(n), m))


@lru_cache(maxsize=None)
def _index(kind: str, n: int, m: int) -> dict[tuple[int, ...], int]:
    basis = {"T": tensor_basis, "S": multiset_basis, "L": subset_basis}[kind](n, m)
    return {b: i for i, b in enumerate(basis)}


def _expand(f: Morphism, word: tuple[int, ...]):
    """Every tuple (l_1..l_m) with l_t a coordinate of f(e_{word_t})."""
    rows = f[2]
    return product(*(list(bits(rows[i])) for i in word))


class Identity(Rule):
    name = "Id"
    degree = 1

    def dim(self, n):
        return n

    def on(self, f):
        return Mat(f[2], f[1])


class Constant(Rule):
    name = "F2"
    degree = 0

    def dim(self, n):
        return 1

    def on(self, f):
        return Mat.identity(1)


class TensorPower(Rule):
    def __init__(self, m: int):
        self.m = m
        self.name = f"T{m}"
        self.degree = m

    def dim(self, n):
        return n ** self.m

    def on(self, f):
        j, k, _ = f
        idx = _index("T", k, self.m)
        rows = []
        for w in tensor_basis(j, self.m):
            v = 0
            for l in _expand(f, w):
                v ^= 1 << idx[l]
            rows.append(v)
        return Mat(tuple(rows), self.dim(k))


class SymmetricPower(Rule):
    def __init__(self, m: int):
        self.m = m
        self.name = f"S{m}"
        self.degree = m

    def dim(self, n):
        return comb(n + self.m - 1, self.m)

    def on(self, f):
        j, k, _ = f
        idx = _index("S", k, self.m)
        rows = []
        for w in multiset_basis(j, self.m):
            v = 0
            for l in _expand(f, w):
                v ^= 1 << idx[tuple(sorted(l))]
            rows.append(v)
        return Mat(tuple(rows), self.dim(k))


class ExteriorPower(Rule):
    def __init__(self, m: int):
        self.m = m
        self.name = f"L{m}"
        self.degree = m

    def dim(self, n):
        return comb(n, self.m)

    def on(self, f):
        j, k, _ = f
        idx = _index("L", k, self.m)
        rows = []
        for w in subset_basis(j, self.m):
            v = 0
            for l in _expand(f, w):
                if len(set(l)) == self.m:
                    v ^= 1 << idx[tuple(sorted(l))]
            rows.append(v)
        return Mat(tuple(rows), self.dim(k))


class DividedPower(Rule):
    """Symmetric tensors; basis element for a multiset = sum over its orbit."""

    def __init__(self, m: int):
        self.m = m
        self.name = f"G{m}"
        self.degree = m

    def dim(self, n):
        return comb(n + self.m - 1, self.m)

    def on(self, f):
        j, k, _ = f
        idx = _index("S", k, self.m)
        rows = []
        for w in multiset_basis(j, self.m):
            v = 0
            for tau in set(_orbit(w)):
                for l in _expand(f, tau):
                    if all(l[t] <= l[t + 1] for t in range(len(l) - 1)):
                        v ^= 1 << idx[l]
            rows.append(v)
        return Mat(tuple(rows), self.dim(k))


@lru_cache(maxsize=None)
def _orbit(w: tuple[int, ...]) -> tuple[tuple[int, ...], ...]:
    from itertools import permutations
    return tuple(sorted(set(permutations(w))))


def Id(kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    return from_rule(Identity(), kmax)


def const(kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    return from_rule(Constant(), kmax)


def T(m: int, kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    return from_rule(TensorPower(m), kmax)


def S(m: int, kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    return from_rule(SymmetricPower(m), kmax)


def L(m: int, kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    return from_rule(ExteriorPower(m), kmax)


def G(m: int, kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    return from_rule(DividedPower(m), kmax)


STANDARD = {
    "Id": Id, "F2": const,
    "S2": lambda kmax=DEFAULT_KMAX: S(2, kmax), "S3": lambda kmax=DEFAULT_KMAX: S(3, kmax),
    "S4": lambda kmax=DEFAULT_KMAX: S(4, kmax),
    "L2": lambda kmax=DEFAULT_KMAX: L(2, kmax), "L3": lambda kmax=DEFAULT_KMAX: L(3, kmax),
    "G2": lambda kmax=DEFAULT_KMAX: G(2, kmax), "G3": lambda kmax=DEFAULT_KMAX: G(3, kmax),
    "T2": lambda kmax=DEFAULT_KMAX: T(2, kmax), "T3": lambda kmax=DEFAULT_KMAX: T(3, kmax),
}


def standard(name: str, kmax: int = DEFAULT_KMAX) -> PolyFunctor:
    try:
        return STANDARD[name](kmax)
    except KeyError:
        raise ValueError(f"unknown functor {name!r}; known: {', '.join(sorted(STANDARD))}") from None


# -- maps among the quadratic functors -----------------------------------------

class _Table(NatRule):
    def __init__(self, src: str, tgt: str, fn):
        self.src, self.tgt, self.fn = src, tgt, fn

    def component(self, n):
        sb = _basis(self.src, n)
        tb = _basis(self.tgt, n)
        idx = {b: i for i, b in enumerate(tb)}
        rows = []
        for b in sb:
            v = 0
            for img in self.fn(b):
                v ^= 1 << idx[img]
            rows.append(v)
        return Mat(tuple(rows), len(tb))


def _basis(kind: str, n: int):
    return {"Id": [(i,) for i in range(n)], "S2": multiset_basis(n, 2), "G2": multiset_basis(n, 2),
            "L2": subset_basis(n, 2), "T2": tensor_basis(n, 2)}[kind]


def _swap_pair(b):
    i, j = b
    return [(i, j)] if i == j else [(i, j), (j, i)]


FROBENIUS = _Table("Id", "S2", lambda b: [(b[0], b[0])])                       # v -> v^2
S2_TO_L2 = _Table("S2", "L2", lambda b: [] if b[0] == b[1] else [b])
L2_TO_G2 = _Table("L2", "G2", lambda b: [b])
G2_TO_ID = _Table("G2", "Id", lambda b: [(b[0],)] if b[0] == b[1] else [])      # onto the Frobenius twist
NORM_S2_G2 = _Table("S2", "G2", lambda b: [] if b[0] == b[1] else [b])
T2_TO_S2 = _Table("T2", "S2", lambda b: [tuple(sorted(b))])
T2_TO_L2 = _Table("T2", "L2", lambda b: [] if b[0] == b[1] else [tuple(sorted(b))])
G2_TO_T2 = _Table("G2", "T2", _swap_pair)
L2_TO_T2 = _Table("L2", "T2", _swap_pair)
NORM_S2_T2 = _Table("S2", "T2", lambda b: [] if b[0] == b[1] else _swap_pair(b))


def quadratic_map(name: str, kmax: int = DEFAULT_KMAX) -> NatTrans:
    rules = {"frobenius": (FROBENIUS, "Id", "S2"), "s2_to_l2": (S2_TO_L2, "S2", "L2"),
             "l2_to_g2": (L2_TO_G2, "L2", "G2"), "g2_to_id": (G2_TO_ID, "G2", "Id"),
             "norm": (NORM_S2_G2, "S2", "G2"), "t2_to_s2": (T2_TO_S2, "T2", "S2"),
             "t2_to_l2": (T2_TO_L2, "T2", "L2"), "g2_to_t2": (G2_TO_T2, "G2", "T2"),
             "l2_to_t2": (L2_TO_T2, "L2", "T2"), "norm_t2": (NORM_S2_T2, "S2", "T2")}
    rule, a, b = rules[name]
    return nat_from_rule(rule, standard(a, kmax), standard(b, kmax))


def precompose_map(rule: NatRule, a: str, b: str, f: PolyFunctor,
                   cache: dict | None = None) -> NatTrans:
    """The map ``rule o F`` between the composites A o F -> B o F."""
    cache = {} if cache is None else cache

    def comp(name):
        if name not in cache:
            cache[name] = f if name == "Id" else compose_functors(standard(name, f.kmax), f,
                                                                 name=f"{name}o{f.name}")
        return cache[name]

    return whisker(rule, f, comp(a), comp(b))
