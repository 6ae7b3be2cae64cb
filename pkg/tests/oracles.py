"""Independent reference implementations used to check the library.

None of these import the code under test beyond plain data containers.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations_with_replacement, product
from math import comb


def c2(n: int, k: int) -> int:
    return comb(n, k) & 1 if 0 <= k <= n else 0


# -- Steenrod squares on F_2[x_1..x_k] through the Cartan formula ----------------

@lru_cache(maxsize=None)
def sq_mono(i: int, mono: tuple) -> frozenset:
    """Sq^i of one monomial: Sq^i(x^a y) = sum_j C(a, j) x^(a + j) Sq^(i - j)(y)."""
    if not mono:
        return frozenset([()]) if i == 0 else frozenset()
    a, rest = mono[0], mono[1:]
    out: set = set()
    for j in range(min(i, a) + 1):
        if c2(a, j):
            for tail in sq_mono(i - j, rest):
                out ^= {(a + j,) + tail}
    return frozenset(out)


def sq_poly(i: int, poly: frozenset) -> frozenset:
    """Sq^i of a polynomial given as a set of exponent tuples."""
    out: set = set()
    for mono in poly:
        out ^= sq_mono(i, mono)
    return frozenset(out)


def apply_word(word, poly: frozenset) -> frozenset:
    for i in reversed(word):
        poly = sq_poly(i, poly)
        if not poly:
            break
    return poly


def adem_terms(a: int, b: int) -> list[tuple[int, int]]:
    """Sq^a Sq^b for 0 < a < 2b as a list of (Sq^p, Sq^q) words (q may be 0)."""
    return [(a + b - j, j) for j in range(a // 2 + 1) if c2(b - 1 - j, a - 2 * j)]


# -- partitions: dimension of the Steenrod algebra in each degree ------------------

def steenrod_dims(top: int) -> list[int]:
    """Coefficients of prod_i 1 / (1 - t^(2^i - 1))."""
    parts = [2 ** i - 1 for i in range(1, 8) if 2 ** i - 1 <= top]
    dims = [1] + [0] * top
    for p in parts:
        for d in range(p, top + 1):
            dims[d] += dims[d - p]
    return dims


# -- dense GF(2) linear algebra -------------------------------------------------------

def rank_dense(rows: list[list[int]]) -> int:
    m = [r[:] for r in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((r for r in range(rank, len(m)) if m[r][c]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c]:
                m[r] = [x ^ y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def to_dense(vec: int, n: int) -> list[int]:
    return [(vec >> c) & 1 for c in range(n)]


# -- small modules as plain dictionaries ------------------------------------------------
# A "plain module" is (dims, act) with act[(i, d)] a list of row bitmasks.

def plain_apply(act, i: int, d: int, v: int) -> int:
    rows = act.get((i, d))
    if rows is None or not v:
        return 0
    out = 0
    r = 0
    while v:
        if v & 1:
            out ^= rows[r]
        v >>= 1
        r += 1
    return out


def plain_is_valid(dims: dict, act: dict) -> bool:
    """Unstable (Sq^i = 0 above the degree) and every Adem relation holds."""
    for (i, d), rows in act.items():
        if i > d and any(rows):
            return False
    for d, n in dims.items():
        top = max(dims)
        for b in range(1, top - d + 1):
            for a in range(1, 2 * b):
                if d + a + b > top:
                    break
                for r in range(n):
                    x = 1 << r
                    lhs = plain_apply(act, a, d + b, plain_apply(act, b, d, x))
                    rhs = 0
                    for p, q in adem_terms(a, b):
                        y = x if q == 0 else plain_apply(act, q, d, x)
                        rhs ^= plain_apply(act, p, d + q, y)
                    if lhs != rhs:
                        return False
    return True


def enumerate_modules(max_total: int, top: int):
    """Every valid unstable module with total dimension <= max_total in degrees 0..top.

    Yields (dims, act). Matrices are enumerated entry by entry; modules that
    differ by a change of basis are all produced.
    """
    for total in range(1, max_total + 1):
        for degs in combinations_with_replacement(range(top + 1), total):
            dims: dict[int, int] = {}
            for d in degs:
                dims[d] = dims.get(d, 0) + 1
            slots = [(e - d, d) for d in dims for e in dims if 0 < e - d <= d]
            sizes = [dims[d] * dims[d + i] for (i, d) in slots]
            for choice in product(*(range(1 << s) for s in sizes)):
                act = {}
                for (i, d), bitsval in zip(slots, choice):
                    w = dims[d + i]
                    act[(i, d)] = [(bitsval >> (r * w)) & ((1 << w) - 1) for r in range(dims[d])]
                if plain_is_valid(dims, act):
                    yield dims, act


def subspaces(n: int) -> list[tuple[int, ...]]:
    """All subspaces of F_2^n, each as a sorted tuple of its nonzero vectors."""
    seen = set()
    out = []
    for gens in product(range(1 << n), repeat=min(n, 4)):
        span = {0}
        for g in gens:
            span |= {s ^ g for s in span}
        key = tuple(sorted(span - {0}))
        if key not in seen:
            seen.add(key)
            out.append(key)
    return out


def submodule_lattice(dims: dict, act: dict):
    """Every submodule, as {degree: frozenset of nonzero vectors}."""
    degs = sorted(dims)
    choices = [subspaces(dims[d]) for d in degs]
    for pick in product(*choices):
        sub = {d: set(s) for d, s in zip(degs, pick)}
        ok = True
        for (i, d), rows in act.items():
            tgt = sub.get(d + i, set())
            for v in sub.get(d, ()):
                w = plain_apply(act, i, d, v)
                if w and w not in tgt:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            yield {d: frozenset(s) for d, s in sub.items()}


def brute_force_nil(dims: dict, act: dict, smax: int) -> dict[int, dict]:
    """For each s <= smax, the largest submodule lying in Nil_s, by scanning the lattice.

    A finite unstable module lies in Nil_s exactly when it vanishes below
    degree s (its degree filtration has layers Sigma^s of unstable modules).
    The maximum is checked to contain every other candidate.
    """
    lattice = list(submodule_lattice(dims, act))
    out = {}
    for s in range(smax + 1):
        cands = [sub for sub in lattice if not any(vs for d, vs in sub.items() if d < s)]
        best = max(cands, key=lambda sub: sum(map(len, sub.values())))
        assert all(sub[d] <= best[d] for sub in cands for d in sub)
        out[s] = best
    return out
