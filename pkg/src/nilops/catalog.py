"""Small library of named modules used by the tests and the CLI."""

from __future__ import annotations

import random
from itertools import combinations_with_replacement

from .gmod import (DEFAULT_WINDOW, GradedModule, build_module, direct_sum, free_unstable,
                   generated_subspaces, point, quotient, suspend)
from .steenrod import binom2


def sphere(n: int, window: tuple[int, int] | None = None) -> GradedModule:
    """Sigma^n F_2."""
    return point(n, 1, window)


def truncate(m: GradedModule, top: int) -> GradedModule:
    """M / M^{>top}: a complete module, exact when ``m`` is exact through ``top``."""
    if not m.exact_through(top):
        raise ValueError(f"module only trusted through degree {m.trust}")
    dims = {d: n for d, n in m.dims.items() if d <= top}
    action = {(i, d): mat for (i, d), mat in m.action.items() if d + i <= top}
    labels = {d: v for d, v in m.labels.items() if d <= top} if m.labels else None
    return GradedModule(min(m.dmin, top), max(top, m.dmin), dims, action, complete=True,
                        unstable=m.unstable, labels=labels)


def projective_range(lo: int, hi: int, window: tuple[int, int] | None = None,
                     complete: bool = True) -> GradedModule:
    """The subquotient u^lo .. u^hi of F_2[u^{+-1}], Sq^i u^k = C(k, i) u^{k+i}.

    ``projective_range(1, n)`` is the reduced cohomology of RP^n.
    """
    dims = {k: 1 for k in range(lo, hi + 1)}
    w_lo, w_hi = window or (min(DEFAULT_WINDOW[0], lo), max(DEFAULT_WINDOW[1], hi))
    labels = {k: [f"u{k}"] for k in dims}
    return build_module(dims, lambda i, d, r: binom2(d, i), w_lo, w_hi if complete else hi,
                        complete=complete, labels=labels)


def rp2() -> GradedModule:
    """Reduced cohomology of RP^2, also F(1)/Phi^2 F(1)."""
    return _mark(projective_range(1, 2))


def rp_infinity(dmax: int = DEFAULT_WINDOW[1]) -> GradedModule:
    return _mark(projective_range(1, dmax, window=(0, dmax), complete=False))


def laurent(lo: int, dmax: int = DEFAULT_WINDOW[1]) -> GradedModule:
    """F_2[u^{+-1}] in degrees >= lo, windowed (not complete)."""
    return projective_range(lo, dmax, window=(min(lo, DEFAULT_WINDOW[0]), dmax), complete=False)


def n_module(t: int) -> GradedModule:
    """N(t) = Phi^t F(1) / Phi^{2t} F(1): classes in degrees 2^i, t <= i < 2t, linked by Sq_0."""
    degs = [2 ** i for i in range(t, 2 * t)]
    dims = {d: 1 for d in degs}

    def op(i, d, r):
        return 1 if i == d and 2 * d in dims else 0

    return build_module(dims, op, 0, max(DEFAULT_WINDOW[1], degs[-1]), complete=True, unstable=True,
                        labels={d: [f"x{d}"] for d in degs})


def hp2() -> GradedModule:
    return n_module(2)


def _mark(m: GradedModule) -> GradedModule:
    from .gmod import mark_unstable
    return mark_unstable(m)


def polynomial(k: int, dmax: int, reduced: bool = False) -> tuple[GradedModule, list[dict[int, tuple]]]:
    """H*(BV) = F_2[u_1..u_k] through ``dmax`` with its monomial bases.

    Returns the module and, per degree, the ordered exponent vectors.
    """
    basis: dict[int, list[tuple[int, ...]]] = {}
    lo = 1 if reduced else 0
    for d in range(lo, dmax + 1):
        monos = sorted(_exponents(k, d), reverse=True)
        if monos:
            basis[d] = monos
    index = {d: {e: r for r, e in enumerate(b)} for d, b in basis.items()}

    def op(i, d, r):
        out = 0
        for e in sq_monomial(basis[d][r], i):
            out ^= 1 << index[d + i][e]
        return out

    dims = {d: len(b) for d, b in basis.items()}
    m = build_module(dims, op, 0, dmax, complete=(k == 0), unstable=True,
                     labels={d: [_poly_label(e) for e in b] for d, b in basis.items()})
    return m, basis


def _exponents(k: int, d: int):
    if k == 0:
        if d == 0:
            yield ()
        return
    for combo in combinations_with_replacement(range(k), d):
        e = [0] * k
        for c in combo:
            e[c] += 1
        yield tuple(e)


def _poly_label(e: tuple[int, ...]) -> str:
    parts = [f"u{j + 1}^{a}" if a > 1 else f"u{j + 1}" for j, a in enumerate(e) if a]
    return "*".join(parts) or "1"


def sq_monomial(e: tuple[int, ...], i: int) -> set[tuple[int, ...]]:
    """Sq^i of u^e in F_2[u_1..u_k] by the Cartan formula (set = F_2-sum)."""
    acc: dict[tuple[int, ...], int] = {tuple(0 for _ in e): 1}
    for j, a in enumerate(e):
        nxt: dict[tuple[int, ...], int] = {}
        for part, c in acc.items():
            used = sum(part)
            for t in range(0, min(a, i - used) + 1):
                if binom2(a, t):
                    key = part[:j] + (t,) + part[j + 1:]
                    nxt[key] = nxt.get(key, 0) ^ c
        acc = {p: c for p, c in nxt.items() if c}
    out = set()
    for part, c in acc.items():
        if c and sum(part) == i:
            out ^= {tuple(a + t for a, t in zip(e, part))}
    return out


def free_truncated(n: int, top: int) -> GradedModule:
    return truncate(free_unstable(n, top), top)


def random_module(rng: random.Random, total: int, top: int = 16, max_tries: int = 200) -> GradedModule:
    """A random complete unstable module of the given total dimension.

    Built as a quotient of a sum of suspended truncated free modules by a
    randomly generated submodule, so it is a valid module by construction.
    """
    for _ in range(max_tries):
        parts = []
        size = 0
        while size < total + rng.randint(0, 3):
            n = rng.randint(0, 4)
            s = rng.randint(0, 3)
            f = suspend(free_truncated(n, top - s), s)
            parts.append(f)
            size += f.total_dim()
        m, _, _ = direct_sum(*parts)
        while m.total_dim() > total:
            degs = m.degrees()
            d = rng.choice(degs)
            v = rng.randrange(1, 1 << m.dim(d))
            sub = generated_subspaces(m, {d: [v]})
            if m.total_dim() - sum(len(b) for b in sub.values()) < total:
                # try to kill something smaller: a top-degree vector
                d = degs[-1]
                v = rng.randrange(1, 1 << m.dim(d))
                sub = {d: [v]}
            m, _ = quotient(m, sub)
        if m.total_dim() == total:
            return _mark(GradedModule(m.dmin, m.dmax, m.dims, m.action, complete=True))
    raise RuntimeError("could not hit the requested dimension")
