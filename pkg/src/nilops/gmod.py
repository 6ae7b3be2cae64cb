"""Degree-windowed graded modules over the mod 2 Steenrod algebra.

A :class:`GradedModule` lists, for each degree ``d`` in its window, the
dimension of the degree-``d`` piece and, for each ``i >= 1``, the matrix of
``Sq^i`` from degree ``d`` to ``d + i`` (row ``r`` = image of basis vector
``r``). Modules are zero below ``dmin``. Above ``dmax`` nothing is known
unless ``complete`` is set, in which case the module is zero there.

``trust`` is the largest degree through which dimensions and action matrices
are guaranteed to agree with the untruncated object; ``None`` means exact in
every degree (only for complete modules).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .gf2 import Mat, Quotient, Span, bits, left_kernel, nullspace, solve
from .steenrod import Monomial, OperationSum, admissible_basis, excess, normalize_terms

DEFAULT_WINDOW = (-8, 32)

TrustDegree = int
"""Largest degree unaffected by window truncation (``None`` = unbounded)."""


def tmin(*values: int | None) -> int | None:
    finite = [v for v in values if v is not None]
    return min(finite) if finite else None


class WindowError(ValueError):
    pass


class NotSteenrodLinear(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GradedModule:
    dmin: int
    dmax: int
    dims: Mapping[int, int]
    action: Mapping[tuple[int, int], Mat]
    complete: bool = False
    trust: int | None = None
    unstable: bool | None = None
    labels: Mapping[int, Sequence[str]] | None = field(default=None, compare=False)

    def __post_init__(self):
        dims = {d: n for d, n in self.dims.items() if n}
        for d in dims:
            if not self.dmin <= d <= self.dmax:
                raise WindowError(f"degree {d} outside window [{self.dmin}, {self.dmax}]")
        action = {}
        for (i, d), m in self.action.items():
            if i < 1:
                raise ValueError("action keys need i >= 1")
            if m.shape != (dims.get(d, 0), dims.get(d + i, 0)):
                raise ValueError(f"Sq^{i} on degree {d}: shape {m.shape} does not match dims")
            if not m.is_zero():
                action[(i, d)] = m
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "action", action)
        if self.complete:
            object.__setattr__(self, "trust", None)
        elif self.trust is None or self.trust > self.dmax:
            object.__setattr__(self, "trust", self.dmax)

    # -- basic queries -------------------------------------------------
    def dim(self, d: int) -> int:
        return self.dims.get(d, 0)

    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def is_zero(self) -> bool:
        return not self.dims

    def sq(self, i: int, d: int) -> Mat:
        if i == 0:
            return Mat.identity(self.dim(d))
        m = self.action.get((i, d))
        if m is None:
            return Mat.zero(self.dim(d), self.dim(d + i))
        return m

    def apply(self, i: int, d: int, v: int) -> int:
        if i == 0:
            return v
        m = self.action.get((i, d))
        return m.apply(v) if m is not None else 0

    def apply_monomial(self, mono: Monomial, d: int, v: int) -> int:
        """Sq^i1 ... Sq^ik applied to ``v`` (rightmost square first)."""
        for i in reversed(mono):
            if not v:
                return 0
            v = self.apply(i, d, v)
            d += i
        return v

    def apply_sum(self, op: OperationSum, d: int, v: int) -> int:
        out = 0
        for t in op.terms:
            out ^= self.apply_monomial(t, d, v)
        return out

    def exact_through(self, d: int) -> bool:
        return self.trust is None or d <= self.trust

    def bottom(self) -> int | None:
        return min(self.dims) if self.dims else None

    def top(self) -> int | None:
        return max(self.dims) if self.dims else None

    def label(self, d: int, r: int) -> str:
        if self.labels and d in self.labels:
            return self.labels[d][r]
        return f"b{d}_{r}"

    def with_window(self, dmin: int | None = None, dmax: int | None = None) -> "GradedModule":
        """Restrict (or widen, for complete modules) the window."""
        lo = self.dmin if dmin is None else dmin
        hi = self.dmax if dmax is None else dmax
        if lo > (self.bottom() if self.dims else lo):
            raise WindowError("cannot raise dmin above nonzero degrees")
        if hi > self.dmax and not self.complete:
            raise WindowError("cannot widen the window of an incomplete module")
        dims = {d: n for d, n in self.dims.items() if d <= hi}
        action = {(i, d): m for (i, d), m in self.action.items() if d + i <= hi}
        complete = self.complete and (self.top() is None or self.top() <= hi)
        return GradedModule(lo, hi, dims, action, complete=complete, trust=tmin(self.trust, hi),
                            unstable=self.unstable, labels=self.labels)

    def summary(self) -> str:
        body = ", ".join(f"{d}:{n}" for d, n in sorted(self.dims.items()))
        return f"GradedModule[{self.dmin},{self.dmax}]{{{body}}}"

    def __repr__(self) -> str:
        return self.summary()


def zero_module(dmin: int = DEFAULT_WINDOW[0], dmax: int = DEFAULT_WINDOW[1]) -> GradedModule:
    return GradedModule(dmin, dmax, {}, {}, complete=True, unstable=True)


def point(d: int, dim: int = 1, window: tuple[int, int] | None = None) -> GradedModule:
    """F_2^dim concentrated in degree ``d`` (trivial action)."""
    lo, hi = window or (min(DEFAULT_WINDOW[0], d), max(DEFAULT_WINDOW[1], d))
    return GradedModule(lo, hi, {d: dim}, {}, complete=True, unstable=d >= 0)


# -- module maps -------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ModuleMap:
    source: GradedModule
    target: GradedModule
    mats: Mapping[int, Mat]
    shift: int = 0

    def __post_init__(self):
        mats = {}
        src, tgt = self.source, self.target
        for d, m in self.mats.items():
            # components beyond an incomplete window are unknown; drop them
            if (not src.complete and d > src.dmax) or (not tgt.complete and d + self.shift > tgt.dmax):
                continue
            want = (self.source.dim(d), self.target.dim(d + self.shift))
            if m.shape != want:
                raise ValueError(f"map at degree {d}: shape {m.shape}, expected {want}")
            if not m.is_zero():
                mats[d] = m
        object.__setattr__(self, "mats", mats)

    def at(self, d: int) -> Mat:
        m = self.mats.get(d)
        if m is None:
            return Mat.zero(self.source.dim(d), self.target.dim(d + self.shift))
        return m

    def apply(self, d: int, v: int) -> int:
        m = self.mats.get(d)
        return m.apply(v) if m is not None else 0

    def then(self, other: "ModuleMap") -> "ModuleMap":
        """Composite ``other o self``."""
        if other.source is not self.target and not same_module(other.source, self.target):
            raise ValueError("composable maps need matching modules")
        mats = {d: m @ other.at(d + self.shift) for d, m in self.mats.items()}
        return ModuleMap(self.source, other.target, mats, self.shift + other.shift)

    def __add__(self, other: "ModuleMap") -> "ModuleMap":
        degs = set(self.mats) | set(other.mats)
        return ModuleMap(self.source, self.target, {d: self.at(d) + other.at(d) for d in degs}, self.shift)

    def is_zero(self) -> bool:
        return not self.mats

    def rank(self, d: int) -> int:
        return self.at(d).rank()

    def violations(self) -> list[tuple[int, int]]:
        """(degree, i) pairs where ``f Sq^i != Sq^i f`` inside both windows."""
        out = []
        src, tgt, s = self.source, self.target, self.shift
        for d in src.degrees():
            for i in range(1, src.dmax - d + 1):
                if d + s + i > tgt.dmax:
                    break
                lhs = src.sq(i, d) @ self.at(d + i)
                rhs = self.at(d) @ tgt.sq(i, d + s)
                if lhs != rhs:
                    out.append((d, i))
        return out

    def is_linear(self) -> bool:
        return not self.violations()

    def check(self) -> "ModuleMap":
        bad = self.violations()
        if bad:
            raise NotSteenrodLinear(f"map does not commute with Sq^i at (degree, i) = {bad[:5]}")
        return self

    def suspend(self, t: int) -> "ModuleMap":
        return ModuleMap(suspend(self.source, t), suspend(self.target, t),
                         {d + t: m for d, m in self.mats.items()}, self.shift)

    def is_injective(self) -> bool:
        return all(self.rank(d) == self.source.dim(d) for d in self.source.degrees())

    def is_surjective(self) -> bool:
        return all(self.rank(d - self.shift) == self.target.dim(d) for d in self.target.degrees())

    def is_iso(self) -> bool:
        return self.is_injective() and self.is_surjective()


def identity_map(m: GradedModule) -> ModuleMap:
    return ModuleMap(m, m, {d: Mat.identity(n) for d, n in m.dims.items()})


def zero_map(a: GradedModule, b: GradedModule) -> ModuleMap:
    return ModuleMap(a, b, {})


def same_module(a: GradedModule, b: GradedModule, upto: int | None = None) -> bool:
    """Equal dims and action matrices (in degrees <= ``upto`` if given)."""
    if a is b:
        return True

    def ok(d):
        return upto is None or d <= upto

    if {d: n for d, n in a.dims.items() if ok(d)} != {d: n for d, n in b.dims.items() if ok(d)}:
        return False
    ka = {k: m for k, m in a.action.items() if ok(k[0] + k[1])}
    kb = {k: m for k, m in b.action.items() if ok(k[0] + k[1])}
    return ka == kb


# -- validation ----------------------------------------------------------

@dataclass
class Violation:
    kind: str
    degree: int
    op: tuple[int, ...]
    row: int
    col: int

    def as_dict(self) -> dict:
        return {"kind": self.kind, "degree": self.degree, "op": list(self.op), "row": self.row, "col": self.col}


def _first_diff(a: Mat, b: Mat) -> tuple[int, int]:
    for r, (x, y) in enumerate(zip(a.rows, b.rows)):
        if x != y:
            return r, ((x ^ y) & -(x ^ y)).bit_length() - 1
    return -1, -1


def validate(m: GradedModule, check_unstable: bool | None = None, limit: int | None = None) -> list[Violation]:
    """Every violated Adem (and, if requested, instability) constraint.

    Adem relations are checked for all words ``(a, b)`` with ``a < 2b`` whose
    source and target degrees lie in the window.
    """
    out: list[Violation] = []
    if check_unstable is None:
        check_unstable = bool(m.unstable)
    if check_unstable:
        for d in m.degrees():
            if d < 0:
                out.append(Violation("instability", d, (0,), 0, 0))
        for (i, d), mat in sorted(m.action.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            if i > d:
                r, c = _first_diff(mat, Mat.zero(*mat.shape))
                out.append(Violation("instability", d, (i,), r, c))
    for d in m.degrees():
        for b in range(1, m.dmax - d + 1):
            for a in range(1, 2 * b):
                if d + a + b > m.dmax:
                    break
                if not m.dim(d + a + b):
                    continue
                lhs = m.sq(b, d) @ m.sq(a, d + b)
                rhs = Mat.zero(m.dim(d), m.dim(d + a + b))
                for term in normalize_terms((a, b)):
                    rhs = rhs + _word_matrix(m, term, d)
                if lhs != rhs:
                    r, c = _first_diff(lhs, rhs)
                    out.append(Violation("adem", d, (a, b), r, c))
                    if limit is not None and len(out) >= limit:
                        return out
    return out


def _word_matrix(m: GradedModule, mono: Monomial, d: int) -> Mat:
    acc = Mat.identity(m.dim(d))
    for i in reversed(mono):
        acc = acc @ m.sq(i, d)
        d += i
    return acc


def is_unstable(m: GradedModule) -> bool:
    if any(d < 0 for d in m.dims):
        return False
    return not any(i > d for (i, d) in m.action)


def mark_unstable(m: GradedModule) -> GradedModule:
    return GradedModule(m.dmin, m.dmax, m.dims, m.action, m.complete, m.trust, is_unstable(m), m.labels)


# -- constructions -------------------------------------------------------

def build_module(dims: Mapping[int, int], op: Callable[[int, int, int], int], dmin: int, dmax: int,
                 complete: bool = False, trust: int | None = None, unstable: bool | None = None,
                 labels=None, max_i: int | None = None) -> GradedModule:
    """Module whose Sq^i on basis vector ``r`` of degree ``d`` is ``op(i, d, r)``."""
    action = {}
    for d, n in dims.items():
        if not n:
            continue
        top = dmax - d if max_i is None else min(max_i, dmax - d)
        for i in range(1, top + 1):
            if not dims.get(d + i):
                continue
            rows = tuple(op(i, d, r) for r in range(n))
            if any(rows):
                action[(i, d)] = Mat(rows, dims[d + i])
    return GradedModule(dmin, dmax, dims, action, complete=complete, trust=trust,
                        unstable=unstable, labels=labels)


def free_unstable(n: int, dmax: int = DEFAULT_WINDOW[1], dmin: int | None = None) -> GradedModule:
    """The free unstable module F(n) on a generator of degree ``n``, through ``dmax``.

    Degree ``n + d`` has basis the admissible monomials of degree ``d`` and
    excess at most ``n`` applied to the generator.
    """
    if n < 0:
        raise ValueError("F(n) needs n >= 0")
    basis: dict[int, list[Monomial]] = {}
    index: dict[Monomial, int] = {}
    for d in range(0, dmax - n + 1):
        monos = admissible_basis(d, n)
        if monos:
            basis[n + d] = monos
            for k, mono in enumerate(monos):
                index[mono] = k

    def op(i, deg, r):
        v = 0
        for t in normalize_terms((i,) + basis[deg][r]):
            if excess(t) <= n:
                v ^= 1 << index[t]
        return v

    dims = {d: len(b) for d, b in basis.items()}
    labels = {d: [_mono_label(t, n) for t in b] for d, b in basis.items()}
    complete = n == 0
    lo = n if dmin is None else dmin
    return build_module(dims, op, lo, dmax, complete=complete, unstable=True, labels=labels)


def _mono_label(mono: Monomial, n: int) -> str:
    ops = "".join(f"Sq{i}" for i in mono)
    return f"{ops}i{n}" if ops else f"i{n}"


def suspend(m: GradedModule, t: int) -> GradedModule:
    """Sigma^t M: same action matrices, degrees shifted by ``t``."""
    if t == 0:
        return m
    dims = {d + t: n for d, n in m.dims.items()}
    action = {(i, d + t): mat for (i, d), mat in m.action.items()}
    labels = {d + t: v for d, v in m.labels.items()} if m.labels else None
    trust = None if m.trust is None else m.trust + t
    out = GradedModule(m.dmin + t, m.dmax + t, dims, action, complete=m.complete, trust=trust, labels=labels)
    return mark_unstable(out)


def direct_sum(*mods: GradedModule) -> tuple[GradedModule, list[ModuleMap], list[ModuleMap]]:
    """Direct sum with its inclusions and projections (blocks in argument order)."""
    if not mods:
        z = zero_module()
        return z, [], []
    lo = min(m.dmin for m in mods)
    partial = [m.dmax for m in mods if not m.complete]
    hi = min(partial) if partial else max(m.dmax for m in mods)
    degs = sorted({d for m in mods for d in m.dims if d <= hi})
    offsets: dict[int, list[int]] = {}
    dims = {}
    for d in degs:
        off, acc = [], 0
        for m in mods:
            off.append(acc)
            acc += m.dim(d)
        offsets[d] = off
        dims[d] = acc
    action = {}
    for d in degs:
        for i in range(1, hi - d + 1):
            if not dims.get(d + i):
                continue
            rows = []
            for k, m in enumerate(mods):
                mat = m.sq(i, d)
                for row in mat.rows:
                    rows.append(row << offsets[d + i][k])
            if any(rows):
                action[(i, d)] = Mat(tuple(rows), dims[d + i])
    complete = all(m.complete for m in mods) and all((m.top() or lo) <= hi for m in mods)
    trust = tmin(*(m.trust for m in mods), None if complete else hi)
    unstable = all(m.unstable for m in mods) if all(m.unstable is not None for m in mods) else None
    total = GradedModule(lo, hi, dims, action, complete=complete, trust=trust, unstable=unstable)
    incls, projs = [], []
    for k, m in enumerate(mods):
        inc, prj = {}, {}
        for d in degs:
            n = m.dim(d)
            if not n:
                continue
            o = offsets[d][k]
            inc[d] = Mat(tuple(1 << (o + r) for r in range(n)), dims[d])
            prj[d] = Mat(tuple(((1 << r) >> o) if o <= r < o + n else 0 for r in range(dims[d])), n)
        incls.append(ModuleMap(m, total, inc))
        projs.append(ModuleMap(total, m, prj))
    return total, incls, projs


def tensor(m: GradedModule, n: GradedModule, dmax: int | None = None) -> GradedModule:
    """M (x) N with the Cartan formula; basis (x_r (x) y_c) ordered by degree of x."""
    return tensor_with_index(m, n, dmax)[0]


def tensor_with_index(m: GradedModule, n: GradedModule, dmax: int | None = None):
    lo = m.dmin + n.dmin
    natural_hi = (m.top() if m.complete and m.dims else m.dmax) + (n.top() if n.complete and n.dims else n.dmax)
    if not m.dims or not n.dims:
        natural_hi = lo
    hi = natural_hi if dmax is None else min(dmax, natural_hi)
    if not m.complete:
        hi = min(hi, m.dmax + (n.bottom() if n.dims else 0))
    if not n.complete:
        hi = min(hi, n.dmax + (m.bottom() if m.dims else 0))
    hi = max(hi, lo)
    # index[(d)] -> list of (a, r, b, c); pos[(a, r, b, c)] -> index in degree a + b
    index: dict[int, list[tuple[int, int, int, int]]] = {}
    for a in m.degrees():
        for b in n.degrees():
            if a + b > hi:
                continue
            for r in range(m.dim(a)):
                for c in range(n.dim(b)):
                    index.setdefault(a + b, []).append((a, r, b, c))
    pos = {key: k for d, keys in index.items() for k, key in enumerate(keys)}
    dims = {d: len(v) for d, v in index.items()}

    def op(k, d, idx):
        a, r, b, c = index[d][idx]
        out = 0
        for i in range(0, k + 1):
            x = m.apply(i, a, 1 << r)
            if not x:
                continue
            y = n.apply(k - i, b, 1 << c)
            if not y:
                continue
            for rr in bits(x):
                for cc in bits(y):
                    out ^= 1 << pos[(a + i, rr, b + k - i, cc)]
        return out

    complete = m.complete and n.complete and hi >= natural_hi
    mb = m.bottom() if m.dims else 0
    nb = n.bottom() if n.dims else 0
    trust = tmin(None if m.trust is None else m.trust + nb, None if n.trust is None else n.trust + mb,
                 None if complete else hi)
    unstable = (m.unstable and n.unstable) if (m.unstable is not None and n.unstable is not None) else None
    out = build_module(dims, op, lo, hi, complete=complete, trust=trust, unstable=unstable)
    return out, index, pos


# -- sub, quotient, kernel, image -----------------------------------------

def _derived_flags(*mods: GradedModule) -> tuple[bool, int | None]:
    return all(m.complete for m in mods), tmin(*(m.trust for m in mods))


def subspace_module(m: GradedModule, basis: Mapping[int, Sequence[int]]) -> tuple[GradedModule, ModuleMap]:
    """The submodule with the given (A-stable) basis, and its inclusion."""
    basis = {d: list(Span(vs).basis) for d, vs in basis.items()}
    basis = {d: vs for d, vs in basis.items() if vs}
    spans = {d: Span(vs, track=True) for d, vs in basis.items()}
    action = {}
    for d, vs in basis.items():
        for i in range(1, m.dmax - d + 1):
            tgt = spans.get(d + i)
            imgs = [m.apply(i, d, v) for v in vs]
            if not any(imgs):
                continue
            if tgt is None:
                raise NotSteenrodLinear(f"subspace not closed under Sq^{i} at degree {d}")
            try:
                rows = tuple(tgt.coords(w) for w in imgs)
            except ValueError:
                raise NotSteenrodLinear(f"subspace not closed under Sq^{i} at degree {d}") from None
            action[(i, d)] = Mat(rows, len(basis[d + i]))
    dims = {d: len(vs) for d, vs in basis.items()}
    sub = GradedModule(m.dmin, m.dmax, dims, action, complete=m.complete, trust=m.trust,
                       unstable=m.unstable if m.unstable else None)
    if sub.unstable is None:
        sub = mark_unstable(sub)
    incl = ModuleMap(sub, m, {d: Mat(tuple(vs), m.dim(d)) for d, vs in basis.items()})
    return sub, incl


def generated_subspaces(m: GradedModule, gens: Mapping[int, Iterable[int]]) -> dict[int, list[int]]:
    """Basis, per degree, of the A-submodule generated by ``gens``."""
    spans: dict[int, Span] = {}
    for d, vs in gens.items():
        for v in vs:
            if v:
                spans.setdefault(d, Span()).add(v)
    for d in range(m.dmin, m.dmax + 1):
        sp = spans.get(d)
        if sp is None:
            continue
        i = 1
        while d + i <= m.dmax:
            for v in sp.basis:
                w = m.apply(i, d, v)
                if w:
                    spans.setdefault(d + i, Span()).add(w)
            i <<= 1
    return {d: sp.basis for d, sp in spans.items() if sp.basis}


def submodule(m: GradedModule, gens: Mapping[int, Iterable[int]]) -> tuple[GradedModule, ModuleMap]:
    return subspace_module(m, generated_subspaces(m, gens))


def quotient(m: GradedModule, sub: Mapping[int, Sequence[int]]) -> tuple[GradedModule, ModuleMap]:
    """M / U for an A-stable family of subspaces U, with the projection."""
    qs = {d: Quotient(n, sub.get(d, ())) for d, n in m.dims.items()}
    dims = {d: q.dim for d, q in qs.items()}

    def op(i, d, r):
        v = m.apply(i, d, qs[d].lift(1 << r))
        return qs[d + i].project(v) if v else 0

    for d, vs in sub.items():
        for v in vs:
            for i in range(1, m.dmax - d + 1):
                w = m.apply(i, d, v)
                if w and not qs[d + i].sub.contains(w):
                    raise NotSteenrodLinear(f"quotient by a non-submodule (Sq^{i} at degree {d})")
    q = build_module(dims, op, m.dmin, m.dmax, complete=m.complete, trust=m.trust)
    q = mark_unstable(q)
    proj = ModuleMap(m, q, {d: qs[d].projection() for d in m.dims})
    return q, proj


def kernel(f: ModuleMap) -> tuple[GradedModule, ModuleMap]:
    _require_degree_zero(f)
    basis = {d: left_kernel(f.at(d).rows) for d in f.source.degrees()}
    k, incl = subspace_module(f.source, basis)
    complete, trust = _derived_flags(f.source, f.target)
    k = _retrust(k, complete, trust, _cut(f.source, f.target))
    return k, ModuleMap(k, f.source, _keep(incl.mats, k))


def image(f: ModuleMap) -> tuple[GradedModule, ModuleMap]:
    _require_degree_zero(f)
    basis = {d: f.at(d).image() for d in f.source.degrees()}
    im, incl = subspace_module(f.target, basis)
    complete, trust = _derived_flags(f.source, f.target)
    im = _retrust(im, complete, trust, _cut(f.source, f.target))
    return im, ModuleMap(im, f.target, _keep(incl.mats, im))


def cokernel(f: ModuleMap) -> tuple[GradedModule, ModuleMap]:
    _require_degree_zero(f)
    basis = {d: f.at(d).image() for d in f.source.degrees()}
    q, proj = quotient(f.target, basis)
    complete, trust = _derived_flags(f.source, f.target)
    q = _retrust(q, complete, trust, _cut(f.source, f.target))
    return q, ModuleMap(f.target, q, _keep(proj.mats, q))


def _cut(*mods: GradedModule) -> int | None:
    # derived objects are unknown above the smallest window of an incomplete input
    return tmin(*(m.dmax for m in mods if not m.complete))


def _keep(mats: Mapping[int, Mat], m: GradedModule) -> dict[int, Mat]:
    return {d: mat for d, mat in mats.items() if d <= m.dmax}


def _retrust(m: GradedModule, complete: bool, trust: int | None, hi: int | None = None) -> GradedModule:
    complete = complete and m.complete
    if not complete and hi is not None and hi < m.dmax:
        m = m.with_window(dmax=max(hi, m.dmin))
    if complete == m.complete and trust == m.trust:
        return m
    return GradedModule(m.dmin, m.dmax, m.dims, m.action, complete=complete,
                        trust=None if complete else tmin(trust, m.dmax), unstable=m.unstable, labels=m.labels)


def retrust(m: GradedModule, trust: int | None) -> GradedModule:
    """Copy of ``m`` with its trust lowered to ``trust`` (never raised)."""
    if trust is None:
        return m
    t = tmin(m.trust, trust)
    return GradedModule(m.dmin, m.dmax, m.dims, m.action, complete=False, trust=t,
                        unstable=m.unstable, labels=m.labels)


def _require_degree_zero(f: ModuleMap):
    if f.shift:
        raise ValueError("abelian constructions need degree-zero maps; suspend the source first")


@dataclass
class Pullback:
    """P = A x_C B with legs to A and B and the inclusion into A (+) B."""
    module: GradedModule
    left: ModuleMap
    right: ModuleMap
    incl: ModuleMap

    def induce(self, a: ModuleMap, b: ModuleMap) -> ModuleMap:
        """The map X -> P determined by compatible maps X -> A, X -> B."""
        s = self.incl.target
        mats = {}
        for d in a.source.degrees():
            if d > s.dmax and not s.complete:
                continue  # P is unknown there
            mats[d] = Mat(tuple(x | (y << self.left.target.dim(d)) for x, y in zip(a.at(d).rows, b.at(d).rows)),
                          s.dim(d))
        return factor_through_injection(ModuleMap(a.source, s, mats), self.incl)


@dataclass
class Pushout:
    """Q = A +_C B with legs from A and B and the projection from A (+) B."""
    module: GradedModule
    left: ModuleMap
    right: ModuleMap
    proj: ModuleMap

    def induce(self, a: ModuleMap, b: ModuleMap) -> ModuleMap:
        """The map Q -> X determined by compatible maps A -> X, B -> X."""
        s = self.proj.source
        mats = {}
        for d in s.degrees():
            rows = list(a.at(d).rows) + list(b.at(d).rows)
            mats[d] = Mat(tuple(rows), a.target.dim(d))
        return factor_through_surjection(ModuleMap(s, a.target, mats), self.proj)


def pullback(f: ModuleMap, g: ModuleMap) -> Pullback:
    """Pullback of A -f-> C <-g- B."""
    if not same_module(f.target, g.target):
        raise ValueError("pullback needs a common target")
    s, incls, projs = direct_sum(f.source, g.source)
    h = ModuleMap(s, f.target, {d: (projs[0].at(d) @ f.at(d)) + (projs[1].at(d) @ g.at(d)) for d in s.degrees()})
    p, inc = kernel(h)
    return Pullback(p, inc.then(projs[0]), inc.then(projs[1]), inc)


def pushout(f: ModuleMap, g: ModuleMap) -> Pushout:
    """Pushout of A <-f- C -g-> B."""
    if not same_module(f.source, g.source):
        raise ValueError("pushout needs a common source")
    s, incls, projs = direct_sum(f.target, g.target)
    h = ModuleMap(f.source, s, {d: (f.at(d) @ incls[0].at(d)) + (g.at(d) @ incls[1].at(d)) for d in f.source.degrees()})
    q, proj = cokernel(h)
    return Pushout(q, incls[0].then(proj), incls[1].then(proj), proj)


def induced_on_quotients(f: ModuleMap, p_src: ModuleMap, p_tgt: ModuleMap) -> ModuleMap:
    """The map Q_src -> Q_tgt induced by ``f`` along two surjections."""
    mats = {}
    for d in p_src.target.degrees():
        rows = []
        for r in range(p_src.target.dim(d)):
            v = lift_through(p_src, d, 1 << r)
            rows.append(p_tgt.apply(d, f.apply(d, v)))
        mats[d] = Mat(tuple(rows), p_tgt.target.dim(d))
    return ModuleMap(p_src.target, p_tgt.target, mats)


def lift_through(p: ModuleMap, d: int, w: int) -> int:
    """Some ``v`` in degree ``d`` of p.source with ``p(v) = w``."""
    v = solve(p.at(d).rows, w)
    if v is None:
        raise ValueError("vector not in the image")
    return v


def factor_through_injection(f: ModuleMap, inc: ModuleMap) -> ModuleMap:
    """Given ``inc`` injective and im f inside im inc, the map g with f = inc o g."""
    mats = {}
    for d in f.source.degrees():
        if d > inc.source.dmax and not inc.source.complete:
            continue
        sp = Span(inc.at(d).rows, track=True)
        try:
            mats[d] = Mat(tuple(sp.coords(v) for v in f.at(d).rows), inc.source.dim(d))
        except ValueError:
            raise ValueError(f"map does not factor through the injection at degree {d}") from None
    return ModuleMap(f.source, inc.source, mats)


def factor_through_surjection(f: ModuleMap, p: ModuleMap) -> ModuleMap:
    """Given ``p`` surjective with ker p inside ker f, the map g with f = g o p."""
    return induced_on_quotients(f, p, identity_map(f.target))


def is_exact_at(f: ModuleMap, g: ModuleMap, upto: int | None = None) -> bool:
    """im f == ker g degreewise (through ``upto``)."""
    for d in g.source.degrees():
        if upto is not None and d > upto:
            continue
        if not (f.at(d) @ g.at(d)).is_zero():
            return False
        if f.rank(d) + g.rank(d) != g.source.dim(d):
            return False
    return True


def is_short_exact(i: ModuleMap, p: ModuleMap, upto: int | None = None) -> bool:
    degs = set(i.source.degrees()) | set(p.source.degrees()) | set(p.target.degrees())
    for d in degs:
        if upto is not None and d > upto:
            continue
        if i.rank(d) != i.source.dim(d) or p.rank(d) != p.target.dim(d):
            return False
        if i.source.dim(d) + p.target.dim(d) != p.source.dim(d):
            return False
        if not (i.at(d) @ p.at(d)).is_zero():
            return False
    return True


# -- hom -----------------------------------------------------------------

@dataclass
class HomSpace:
    maps: list[ModuleMap]
    exact: bool
    note: str = ""

    @property
    def dim(self) -> int:
        return len(self.maps)


def hom(m: GradedModule, n: GradedModule, powers_of_two: bool = True) -> HomSpace:
    """Basis of degree-zero Steenrod-linear maps M -> N within the windows.

    Solves the commutation equations ``f_{d+i} Sq^i = Sq^i f_d`` as one linear
    system in the matrix entries. When M is unstable and complete, the result
    is exact provided N is exact through twice the top degree of M.
    """
    degs = [d for d in m.degrees() if n.dim(d)]
    offs, total = {}, 0
    for d in degs:
        offs[d] = total
        total += m.dim(d) * n.dim(d)
    # unknown (d, r, c) -> bit offs[d] + r * n.dim(d) + c
    equations: list[int] = []
    for d in m.degrees():
        i = 1
        while d + i <= min(m.dmax, n.dmax):
            e = d + i
            if n.dim(e):
                sm, sn = m.sq(i, d), n.sq(i, d)
                for r in range(m.dim(d)):
                    for c in range(n.dim(e)):
                        eq = 0
                        # (Sq^i_M f)_(r,c) = sum_k Sq_M[r,k] f_e[k,c]
                        if e in offs:
                            for k in bits(sm.rows[r]):
                                eq ^= 1 << (offs[e] + k * n.dim(e) + c)
                        # (f Sq^i_N)_(r,c) = sum_k f_d[r,k] Sq_N[k,c]
                        if d in offs:
                            for k in range(n.dim(d)):
                                if (sn.rows[k] >> c) & 1:
                                    eq ^= 1 << (offs[d] + r * n.dim(d) + k)
                        if eq:
                            equations.append(eq)
            i = i << 1 if powers_of_two else i + 1
    # solutions = null space of the equation matrix (columns = unknowns)
    sols = nullspace(equations, total)
    maps = []
    for s in sols:
        mats = {}
        for d in degs:
            nd = n.dim(d)
            rows = []
            for r in range(m.dim(d)):
                rows.append((s >> (offs[d] + r * nd)) & ((1 << nd) - 1))
            mats[d] = Mat(tuple(rows), nd)
        maps.append(ModuleMap(m, n, mats))
    exact = True
    note = ""
    if not m.complete:
        exact = False
        note = "source not complete: maps are only constrained inside the window"
    elif m.dims:
        top = m.top()
        need = 2 * top if m.unstable else top + (n.dmax - m.bottom())
        if not n.exact_through(min(need, n.dmax)) or (not n.complete and n.dmax < need):
            exact = False
            note = f"target window/trust below degree {need}"
    return HomSpace(maps, exact, note)
