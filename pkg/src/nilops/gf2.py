"""Bit-packed linear algebra over GF(2).

Vectors are Python ints (bit ``c`` is the coefficient of basis vector ``c``).
A :class:`Mat` stores one int per row; row ``r`` is the image of source basis
vector ``r``, so maps act on row vectors: ``v -> v @ A``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


def bits(v: int) -> Iterable[int]:
    """Indices of the set bits of ``v`` in increasing order."""
    while v:
        low = v & -v
        yield low.bit_length() - 1
        v ^= low


def popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class Mat:
    rows: tuple[int, ...]
    ncols: int

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.ncols)

    @staticmethod
    def zero(nrows: int, ncols: int) -> "Mat":
        return Mat((0,) * nrows, ncols)

    @staticmethod
    def identity(n: int) -> "Mat":
        return Mat(tuple(1 << i for i in range(n)), n)

    @staticmethod
    def from_rows(rows: Iterable[int], ncols: int) -> "Mat":
        rows = tuple(rows)
        mask = (1 << ncols) - 1
        for r in rows:
            if r & ~mask:
                raise ValueError("row exceeds column count")
        return Mat(rows, ncols)

    @staticmethod
    def from_bitstrings(strings: Sequence[str], ncols: int | None = None) -> "Mat":
        if ncols is None:
            ncols = len(strings[0]) if strings else 0
        rows = []
        for s in strings:
            if len(s) != ncols or set(s) - {"0", "1"}:
                raise ValueError(f"bad bitstring row {s!r} for {ncols} columns")
            rows.append(sum(1 << c for c, ch in enumerate(s) if ch == "1"))
        return Mat(tuple(rows), ncols)

    def to_bitstrings(self) -> list[str]:
        return ["".join("1" if (r >> c) & 1 else "0" for c in range(self.ncols)) for r in self.rows]

    def apply(self, v: int) -> int:
        acc = 0
        rows = self.rows
        while v:
            low = v & -v
            acc ^= rows[low.bit_length() - 1]
            v ^= low
        return acc

    def __matmul__(self, other: "Mat") -> "Mat":
        """Composite "first self, then other"."""
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return Mat(tuple(other.apply(r) for r in self.rows), other.ncols)

    def __add__(self, other: "Mat") -> "Mat":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return Mat(tuple(a ^ b for a, b in zip(self.rows, other.rows)), self.ncols)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def entry(self, r: int, c: int) -> int:
        return (self.rows[r] >> c) & 1

    def transpose(self) -> "Mat":
        out = [0] * self.ncols
        for r, row in enumerate(self.rows):
            for c in bits(row):
                out[c] |= 1 << r
        return Mat(tuple(out), self.nrows)

    def rank(self) -> int:
        return rank(self.rows)

    def image(self) -> list[int]:
        """A basis of the row space (the image of the map)."""
        return Span(self.rows).basis

    def kernel(self) -> list[int]:
        """A basis of ``{v : v @ self == 0}`` as vectors in the source."""
        return left_kernel(self.rows)

    def select_rows(self, vectors: Sequence[int]) -> "Mat":
        """Matrix whose rows are the images of the given source vectors."""
        return Mat(tuple(self.apply(v) for v in vectors), self.ncols)


def rank(rows: Iterable[int]) -> int:
    return len(Span(rows).basis)


class Span:
    """A subspace kept in echelon form, pivots on the highest set bit.

    ``reduce`` clears every pivot bit, so the residue's non-pivot bits are the
    coordinates of the class of a vector in the quotient by this subspace.
    """

    __slots__ = ("_rows", "_order", "basis", "_combo", "track")

    def __init__(self, vectors: Iterable[int] = (), track: bool = False):
        self._rows: dict[int, int] = {}
        self._combo: dict[int, int] = {}
        self._order: list[int] = []
        self.basis: list[int] = []
        self.track = track
        for v in vectors:
            self.add(v)

    def __len__(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> list[int]:
        return sorted(self._rows)

    def _reduce(self, v: int, combo: int = 0) -> tuple[int, int]:
        rows = self._rows
        if not rows:
            return v, combo
        for p in self._order:
            if (v >> p) & 1:
                v ^= rows[p]
                if self.track:
                    combo ^= self._combo[p]
        return v, combo

    def reduce(self, v: int) -> int:
        return self._reduce(v)[0]

    def contains(self, v: int) -> bool:
        return self._reduce(v)[0] == 0

    def add(self, v: int) -> bool:
        """Add ``v``; return True if it enlarged the span."""
        idx = len(self.basis)
        r, combo = self._reduce(v, (1 << idx) if self.track else 0)
        if r == 0:
            return False
        p = r.bit_length() - 1
        self._rows[p] = r
        if self.track:
            self._combo[p] = combo
        self._order.append(p)
        self._order.sort(reverse=True)
        self.basis.append(v)
        return True

    def coords(self, v: int) -> int:
        """Coordinates of ``v`` with respect to ``basis`` (requires ``track``)."""
        if not self.track:
            raise RuntimeError("Span built without coordinate tracking")
        r, combo = self._reduce(v, 0)
        if r:
            raise ValueError("vector not in span")
        return combo


class Quotient:
    """The quotient ``F^n / U`` with complement spanned by non-pivot basis vectors."""

    def __init__(self, n: int, sub: Iterable[int]):
        self.n = n
        self.sub = sub if isinstance(sub, Span) else Span(sub)
        piv = set(self.sub.pivots)
        self.free = [c for c in range(n) if c not in piv]
        self._pos = {c: i for i, c in enumerate(self.free)}

    @property
    def dim(self) -> int:
        return len(self.free)

    def project(self, v: int) -> int:
        r = self.sub.reduce(v)
        out = 0
        for c in bits(r):
            out |= 1 << self._pos[c]
        return out

    def lift(self, w: int) -> int:
        """Canonical representative: the complement vector with coordinates ``w``."""
        out = 0
        for i in bits(w):
            out |= 1 << self.free[i]
        return out

    def projection(self) -> Mat:
        return Mat(tuple(self.project(1 << c) for c in range(self.n)), self.dim)


def left_kernel(rows: Sequence[int]) -> list[int]:
    """Basis of ``{x : sum_r x_r rows[r] == 0}``."""
    span: dict[int, tuple[int, int]] = {}
    order: list[int] = []
    out = []
    for i, row in enumerate(rows):
        v, combo = row, 1 << i
        for p in order:
            if (v >> p) & 1:
                rv, rc = span[p]
                v ^= rv
                combo ^= rc
        if v == 0:
            out.append(combo)
        else:
            p = v.bit_length() - 1
            span[p] = (v, combo)
            order.append(p)
            order.sort(reverse=True)
    return out


def solve(rows: Sequence[int], target: int) -> int | None:
    """Some ``x`` with ``x @ rows == target``, or None."""
    span = Span(track=True)
    used = [i for i, r in enumerate(rows) if span.add(r)]
    try:
        combo = span.coords(target)
    except ValueError:
        return None
    return vec_from_coords(combo, [1 << i for i in used])


def intersect(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Basis of the intersection of two subspaces given by spanning sets."""
    a = Span(a).basis
    b = Span(b).basis
    ker = left_kernel(list(a) + list(b))
    out = Span()
    na = len(a)
    for combo in ker:
        v = 0
        for i in bits(combo & ((1 << na) - 1)):
            v ^= a[i]
        out.add(v)
    return out.basis


def restrict(m: Mat, src_basis: Sequence[int], tgt_basis: Sequence[int]) -> Mat:
    """Matrix of ``m`` restricted to ``span(src_basis) -> span(tgt_basis)``.

    Raises ValueError if some image leaves the target span.
    """
    tgt = Span(tgt_basis, track=True)
    return Mat(tuple(tgt.coords(m.apply(v)) for v in src_basis), len(tgt_basis))


def vec_from_coords(coords: int, basis: Sequence[int]) -> int:
    v = 0
    for i in bits(coords):
        v ^= basis[i]
    return v


def nullspace(equations: Sequence[int], nvars: int) -> list[int]:
    """Basis of {x in F^nvars : <eq, x> = 0 for every equation}."""
    rows: dict[int, int] = {}
    order: list[int] = []
    for eq in equations:
        v = eq
        for p in order:
            if (v >> p) & 1:
                v ^= rows[p]
        if v:
            p = v.bit_length() - 1
            # keep rows fully reduced at pivots
            for q in order:
                if (rows[q] >> p) & 1:
                    rows[q] ^= v
            rows[p] = v
            order.append(p)
            order.sort(reverse=True)
    pivots = set(rows)
    out = []
    for free in range(nvars):
        if free in pivots:
            continue
        x = 1 << free
        for p, row in rows.items():
            if (row >> free) & 1:
                x |= 1 << p
        out.append(x)
    return out


def solve_affine(equations: Sequence[tuple[int, int]], nvars: int) -> tuple[int | None, int]:
    """Solve <eq_t, x> = rhs_t for all t.

    Returns ``(x, 0)`` for some solution, or ``(None, combo)`` where the
    equations indexed by the bits of ``combo`` sum to 0 = 1.
    """
    aug = 1 << nvars
    rows: dict[int, tuple[int, int]] = {}
    order: list[int] = []
    for t, (eq, rhs) in enumerate(equations):
        v = eq | (aug if rhs else 0)
        combo = 1 << t
        for p in order:
            if (v >> p) & 1:
                rv, rc = rows[p]
                v ^= rv
                combo ^= rc
        if v == aug:
            return None, combo
        if v:
            p = (v & (aug - 1)).bit_length() - 1
            rows[p] = (v, combo)
            order.append(p)
            order.sort(reverse=True)
    # back-substitute with free variables = 0, lowest pivots first
    x = 0
    for p in sorted(rows):
        v, _ = rows[p]
        rest = v & (aug - 1) & ~(1 << p)
        val = (v >> nvars) & 1
        for q in bits(rest):
            val ^= (x >> q) & 1
        if val:
            x |= 1 << p
    return x, 0


def annihilator(vectors: Sequence[int], n: int) -> list[int]:
    """Basis of the functionals z on F^n with <z, v> = 0 for every v."""
    return nullspace(list(vectors), n)
