"""Bounded chain complexes over an exact field.

Conventions: differentials lower degree by one, ``diff(d)`` is the matrix of
``C_d -> C_{d-1}`` (shape ``dim(d-1) x dim(d)``).  The cone of ``f: A -> B``
is ``B_d + A_{d-1}`` with differential ``[[d_B, f], [0, -d_A]]`` and the
fiber is the cone shifted down once.  Tensor products use the Koszul sign
``(-1)^i`` on the second factor's differential.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .exactalg import Field, Matrix, block, direct_sum as mat_direct_sum, hstack, kernel_basis, rank, rref, solve


class ChainComplexError(ValueError):
    pass


class ChainComplex:
    """Finite-dimensional bounded complex.  Immutable."""

    __slots__ = ("field", "_dims", "_diffs", "_rank_cache", "_hash")

    def __init__(self, field: Field, dims: Mapping[int, int], diffs: Mapping[int, Matrix] | None = None,
                 check: bool = True):
        self.field = field
        self._dims = {int(d): int(n) for d, n in sorted(dims.items()) if n}
        if any(n < 0 for n in self._dims.values()):
            raise ChainComplexError("negative dimension")
        self._diffs: dict[int, Matrix] = {}
        for d, m in (diffs or {}).items():
            d = int(d)
            shape = (self.dim(d - 1), self.dim(d))
            if m.shape != shape:
                raise ChainComplexError(f"differential in degree {d} has shape {m.shape}, expected {shape}")
            if m.field != field:
                raise ChainComplexError("field mismatch in differential")
            if shape[0] and shape[1] and not m.is_zero():
                self._diffs[d] = m
        self._rank_cache: dict[int, int] = {}
        self._hash = None
        if check:
            for d in self._diffs:
                if d - 1 in self._diffs and not (self._diffs[d - 1] @ self._diffs[d]).is_zero():
                    raise ChainComplexError(f"d∘d != 0 at degree {d}")

    # structure

    def dim(self, d: int) -> int:
        return self._dims.get(d, 0)

    def diff(self, d: int) -> Matrix:
        m = self._diffs.get(d)
        if m is None:
            return Matrix.zero(self.field, self.dim(d - 1), self.dim(d))
        return m

    @property
    def dims(self) -> dict[int, int]:
        return dict(self._dims)

    @property
    def degrees(self) -> list[int]:
        return list(self._dims)

    @property
    def lo(self) -> int | None:
        return min(self._dims) if self._dims else None

    @property
    def hi(self) -> int | None:
        return max(self._dims) if self._dims else None

    @property
    def total_dim(self) -> int:
        return sum(self._dims.values())

    def is_zero(self) -> bool:
        return not self._dims

    # homology

    def _rank(self, d: int) -> int:
        r = self._rank_cache.get(d)
        if r is None:
            m = self._diffs.get(d)
            r = 0 if m is None else rank(m)
            self._rank_cache[d] = r
        return r

    def homology_dim(self, d: int) -> int:
        return self.dim(d) - self._rank(d) - self._rank(d + 1)

    def homology(self, d: int) -> tuple[int, Matrix]:
        """Dimension of H_d and cycle representatives of a basis (as columns).

        Representatives are the kernel-basis columns of ``diff(d)`` that are
        pivots after the boundary columns in ``[B | Z]``.
        """
        Z = kernel_basis(self.diff(d))
        B = self.diff(d + 1)
        if Z.cols == 0:
            return 0, Z
        _, piv = rref(hstack(self.field, [B, Z]))
        reps = [p - B.cols for p in piv if p >= B.cols]
        return len(reps), Z.select_cols(reps)

    def betti(self) -> dict[int, int]:
        out = {}
        for d in self._dims:
            h = self.homology_dim(d)
            if h:
                out[d] = h
        return out

    def is_acyclic(self) -> bool:
        return all(self.homology_dim(d) == 0 for d in self._dims)

    # comparison

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainComplex):
            return NotImplemented
        if self.field != other.field or self._dims != other._dims:
            return False
        keys = set(self._diffs) | set(other._diffs)
        return all(self.diff(d) == other.diff(d) for d in keys)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.field, tuple(self._dims.items()),
                               tuple((d, hash(m)) for d, m in sorted(self._diffs.items()))))
        return self._hash

    def __repr__(self) -> str:
        dims = ", ".join(f"{d}:{n}" for d, n in self._dims.items())
        return f"ChainComplex<{self.field!r}>({{{dims}}})"

    # constructors

    @classmethod
    def zero(cls, field: Field) -> "ChainComplex":
        return cls(field, {})

    @classmethod
    def point(cls, field: Field, degree: int = 0, dim: int = 1) -> "ChainComplex":
        """``k^dim`` concentrated in one degree."""
        return cls(field, {degree: dim})

    @classmethod
    def from_differentials(cls, field: Field, diffs: Mapping[int, Sequence[Sequence]],
                           dims: Mapping[int, int] | None = None) -> "ChainComplex":
        """Build from plain nested lists; ``dims`` may be omitted when shapes determine them."""
        dims = dict(dims or {})
        for d, rows in diffs.items():
            rows = list(rows)
            if rows:
                dims.setdefault(d, len(rows[0]))
                dims.setdefault(d - 1, len(rows))
        mats = {}
        for d, rows in diffs.items():
            rows = list(rows)
            shape = (dims.get(d - 1, 0), dims.get(d, 0))
            mats[d] = Matrix.from_rows(field, rows, shape[1]) if rows else Matrix.zero(field, *shape)
        return cls(field, dims, mats)


class ChainMapError(ValueError):
    pass


class ChainMap:
    """Degree-zero chain map ``source -> target``."""

    __slots__ = ("source", "target", "_blocks")

    def __init__(self, source: ChainComplex, target: ChainComplex, blocks: Mapping[int, Matrix] | None = None,
                 check: bool = True):
        if source.field != target.field:
            raise ChainMapError("field mismatch")
        self.source = source
        self.target = target
        self._blocks: dict[int, Matrix] = {}
        for d, m in (blocks or {}).items():
            shape = (target.dim(d), source.dim(d))
            if m.shape != shape:
                raise ChainMapError(f"block in degree {d} has shape {m.shape}, expected {shape}")
            if shape[0] and shape[1] and not m.is_zero():
                self._blocks[int(d)] = m
        if check:
            bad = self.failing_degree()
            if bad is not None:
                raise ChainMapError(f"not a chain map: square at degree {bad} does not commute")

    @property
    def field(self) -> Field:
        return self.source.field

    def block(self, d: int) -> Matrix:
        m = self._blocks.get(d)
        if m is None:
            return Matrix.zero(self.field, self.target.dim(d), self.source.dim(d))
        return m

    @property
    def blocks(self) -> dict[int, Matrix]:
        return dict(self._blocks)

    def failing_degree(self) -> int | None:
        degs = sorted(set(self.source.degrees) | {d + 1 for d in self.target.degrees})
        for d in degs:
            lhs = self.target.diff(d) @ self.block(d)
            rhs = self.block(d - 1) @ self.source.diff(d)
            if lhs != rhs:
                return d
        return None

    def is_zero(self) -> bool:
        return not self._blocks

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChainMap):
            return NotImplemented
        if self.source != other.source or self.target != other.target:
            return False
        keys = set(self._blocks) | set(other._blocks)
        return all(self.block(d) == other.block(d) for d in keys)

    __hash__ = None

    def __repr__(self) -> str:
        return f"ChainMap({self.source!r} -> {self.target!r})"

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        """Composition ``self ∘ other``."""
        if other.target != self.source:
            raise ChainMapError("composition endpoints do not match")
        blocks = {d: self.block(d) @ other.block(d) for d in other._blocks if d in self._blocks}
        return ChainMap(other.source, self.target, blocks, check=False)

    def _same_ends(self, other: "ChainMap"):
        if self.source != other.source or self.target != other.target:
            raise ChainMapError("maps have different endpoints")

    def __add__(self, other: "ChainMap") -> "ChainMap":
        self._same_ends(other)
        keys = set(self._blocks) | set(other._blocks)
        return ChainMap(self.source, self.target, {d: self.block(d) + other.block(d) for d in keys}, check=False)

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        self._same_ends(other)
        keys = set(self._blocks) | set(other._blocks)
        return ChainMap(self.source, self.target, {d: self.block(d) - other.block(d) for d in keys}, check=False)

    def __neg__(self) -> "ChainMap":
        return ChainMap(self.source, self.target, {d: -m for d, m in self._blocks.items()}, check=False)

    def scale(self, c) -> "ChainMap":
        return ChainMap(self.source, self.target, {d: m.scale(c) for d, m in self._blocks.items()}, check=False)

    @classmethod
    def identity(cls, c: ChainComplex) -> "ChainMap":
        return cls(c, c, {d: Matrix.identity(c.field, n) for d, n in c.dims.items()}, check=False)

    @classmethod
    def zero(cls, source: ChainComplex, target: ChainComplex) -> "ChainMap":
        return cls(source, target, {}, check=False)

    # homology

    def homology_rank(self, d: int) -> int:
        """Rank of the induced map ``H_d(source) -> H_d(target)``."""
        h, reps = self.source.homology(d)
        if h == 0:
            return 0
        B = self.target.diff(d + 1)
        img = self.block(d) @ reps
        return rank(hstack(self.field, [B, img])) - rank(B)


@dataclass(frozen=True)
class Homotopy:
    """A chain homotopy ``h`` with ``d h + h d = f - g``; ``h[d]: S_d -> T_{d+1}``."""

    f: ChainMap
    g: ChainMap
    h: dict

    def component(self, d: int) -> Matrix:
        m = self.h.get(d)
        if m is None:
            return Matrix.zero(self.f.field, self.f.target.dim(d + 1), self.f.source.dim(d))
        return m

    def check(self) -> bool:
        S, T = self.f.source, self.f.target
        degs = sorted(set(S.degrees) | set(T.degrees))
        for d in degs:
            lhs = T.diff(d + 1) @ self.component(d) + self.component(d - 1) @ S.diff(d)
            if lhs != self.f.block(d) - self.g.block(d):
                return False
        return True

    def is_zero(self) -> bool:
        return all(m.is_zero() for m in self.h.values())


# homotopy-theoretic constructions


def shift(c: ChainComplex, n: int) -> ChainComplex:
    """``Σ^n c``: degree ``d`` holds ``c_{d-n}``; differential scaled by ``(-1)^n``."""
    sign = -1 if n % 2 else 1
    dims = {d + n: k for d, k in c.dims.items()}
    diffs = {d + n: (c.diff(d) if sign == 1 else -c.diff(d)) for d in c._diffs}
    return ChainComplex(c.field, dims, diffs, check=False)


def shift_map(f: ChainMap, n: int) -> ChainMap:
    return ChainMap(shift(f.source, n), shift(f.target, n), {d + n: m for d, m in f._blocks.items()}, check=False)


def cone(f: ChainMap) -> ChainComplex:
    """Mapping cone: ``cone_d = target_d + source_{d-1}``."""
    S, T = f.source, f.target
    F = S.field
    degs = sorted(set(T.degrees) | {d + 1 for d in S.degrees})
    dims = {d: T.dim(d) + S.dim(d - 1) for d in degs}
    diffs = {}
    for d in degs:
        rows = [T.dim(d - 1), S.dim(d - 2)]
        cols = [T.dim(d), S.dim(d - 1)]
        if sum(rows) == 0:
            continue
        diffs[d] = block(F, rows, cols, {(0, 0): T.diff(d), (0, 1): f.block(d - 1), (1, 1): -S.diff(d - 1)})
    return ChainComplex(F, dims, diffs, check=False)


def cone_inclusion(f: ChainMap) -> ChainMap:
    """``target -> cone(f)``."""
    C = cone(f)
    T, S = f.target, f.source
    blocks = {d: block(f.field, [T.dim(d), S.dim(d - 1)], [T.dim(d)], {(0, 0): Matrix.identity(f.field, T.dim(d))})
              for d in T.degrees}
    return ChainMap(T, C, blocks, check=False)


def cone_projection(f: ChainMap) -> ChainMap:
    """``cone(f) -> Σ source``."""
    C = cone(f)
    T, S = f.target, f.source
    blocks = {d: block(f.field, [S.dim(d - 1)], [T.dim(d), S.dim(d - 1)],
                       {(0, 1): Matrix.identity(f.field, S.dim(d - 1))})
              for d in (e + 1 for e in S.degrees)}
    return ChainMap(C, shift(S, 1), blocks, check=False)


def cone_map(f: ChainMap, g: ChainMap, a: ChainMap, b: ChainMap, check: bool = True) -> ChainMap:
    """Map ``cone(f) -> cone(g)`` induced by a commuting square ``b∘f = g∘a``."""
    if check and (b @ f) != (g @ a):
        raise ChainMapError("square does not commute")
    Cf, Cg = cone(f), cone(g)
    F = f.field
    blocks = {}
    for d in Cf.degrees:
        blocks[d] = block(F, [g.target.dim(d), g.source.dim(d - 1)], [f.target.dim(d), f.source.dim(d - 1)],
                          {(0, 0): b.block(d), (1, 1): a.block(d - 1)})
    return ChainMap(Cf, Cg, blocks, check=False)


def fiber(f: ChainMap) -> ChainComplex:
    """Homotopy fiber ``Σ^{-1} cone(f)``: degree d is ``target_{d+1} + source_d``."""
    return shift(cone(f), -1)


def fiber_projection(f: ChainMap) -> ChainMap:
    """``fiber(f) -> source``."""
    Fb = fiber(f)
    T, S = f.target, f.source
    blocks = {d: block(f.field, [S.dim(d)], [T.dim(d + 1), S.dim(d)], {(0, 1): Matrix.identity(f.field, S.dim(d))})
              for d in S.degrees}
    return ChainMap(Fb, S, blocks, check=False)


def fiber_map(f: ChainMap, g: ChainMap, a: ChainMap, b: ChainMap, check: bool = True) -> ChainMap:
    return shift_map(cone_map(f, g, a, b, check=check), -1)


def direct_sum(cs: Sequence[ChainComplex], field: Field | None = None) -> ChainComplex:
    cs = list(cs)
    if not cs:
        if field is None:
            raise ValueError("empty direct sum needs a field")
        return ChainComplex.zero(field)
    F = cs[0].field
    if any(c.field != F for c in cs):
        raise ChainComplexError("field mismatch")
    degs = sorted(set().union(*[c.degrees for c in cs]))
    dims = {d: sum(c.dim(d) for c in cs) for d in degs}
    diffs = {d: mat_direct_sum(F, [c.diff(d) for c in cs]) for d in degs}
    return ChainComplex(F, dims, diffs, check=False)


def direct_sum_map(fs: Sequence[ChainMap]) -> ChainMap:
    S = direct_sum([f.source for f in fs])
    T = direct_sum([f.target for f in fs])
    F = S.field
    return ChainMap(S, T, {d: mat_direct_sum(F, [f.block(d) for f in fs]) for d in S.degrees}, check=False)


def sum_inclusion(cs: Sequence[ChainComplex], i: int) -> ChainMap:
    total = direct_sum(cs)
    F = total.field
    blocks = {}
    for d in cs[i].degrees:
        sizes = [c.dim(d) for c in cs]
        blocks[d] = block(F, sizes, [sizes[i]], {(i, 0): Matrix.identity(F, sizes[i])})
    return ChainMap(cs[i], total, blocks, check=False)


def sum_projection(cs: Sequence[ChainComplex], i: int) -> ChainMap:
    total = direct_sum(cs)
    F = total.field
    blocks = {}
    for d in cs[i].degrees:
        sizes = [c.dim(d) for c in cs]
        blocks[d] = block(F, [sizes[i]], sizes, {(0, i): Matrix.identity(F, sizes[i])})
    return ChainMap(total, cs[i], blocks, check=False)


def _tensor_layout(a: ChainComplex, b: ChainComplex) -> dict[int, list[tuple[int, int, int]]]:
    """For each total degree: list of (i, j, offset) for summands a_i ⊗ b_j."""
    layout: dict[int, list[tuple[int, int, int]]] = {}
    for i in a.degrees:
        for j in b.degrees:
            layout.setdefault(i + j, []).append((i, j, 0))
    out = {}
    for d, parts in layout.items():
        parts.sort()
        off = 0
        fixed = []
        for i, j, _ in parts:
            fixed.append((i, j, off))
            off += a.dim(i) * b.dim(j)
        out[d] = fixed
    return out


def tensor(a: ChainComplex, b: ChainComplex) -> ChainComplex:
    if a.field != b.field:
        raise ChainComplexError("field mismatch")
    F = a.field
    lay = _tensor_layout(a, b)
    dims = {d: sum(a.dim(i) * b.dim(j) for i, j, _ in parts) for d, parts in lay.items()}
    diffs = {}
    for d, parts in lay.items():
        if d - 1 not in lay:
            continue
        out = F.zeros(dims[d - 1], dims[d])
        tgt = {(i, j): off for i, j, off in lay[d - 1]}
        for i, j, off in parts:
            n_ij = a.dim(i) * b.dim(j)
            if (i - 1, j) in tgt and i in a._diffs:
                t = tgt[(i - 1, j)]
                m = a.diff(i).kron(Matrix.identity(F, b.dim(j)))
                out[t:t + m.rows, off:off + n_ij] = m.a
            if (i, j - 1) in tgt and j in b._diffs:
                t = tgt[(i, j - 1)]
                m = Matrix.identity(F, a.dim(i)).kron(b.diff(j))
                if i % 2:
                    m = -m
                out[t:t + m.rows, off:off + n_ij] = m.a
        diffs[d] = Matrix(F, out)
    return ChainComplex(F, dims, diffs, check=False)


def tensor_map(f: ChainMap, g: ChainMap) -> ChainMap:
    S = tensor(f.source, g.source)
    T = tensor(f.target, g.target)
    F = f.field
    ls = _tensor_layout(f.source, g.source)
    lt = _tensor_layout(f.target, g.target)
    blocks = {}
    for d, parts in ls.items():
        if d not in lt:
            continue
        out = F.zeros(T.dim(d), S.dim(d))
        tgt = {(i, j): off for i, j, off in lt[d]}
        for i, j, off in parts:
            if (i, j) not in tgt:
                continue
            m = f.block(i).kron(g.block(j))
            t = tgt[(i, j)]
            out[t:t + m.rows, off:off + m.cols] = m.a
        blocks[d] = Matrix(F, out)
    return ChainMap(S, T, blocks, check=False)


def tensor_power(c: ChainComplex, k: int) -> ChainComplex:
    out = c
    for _ in range(k - 1):
        out = tensor(out, c)
    return out


def tensor_power_map(f: ChainMap, k: int) -> ChainMap:
    out = f
    for _ in range(k - 1):
        out = tensor_map(out, f)
    return out


# quasi-isomorphisms


def is_quasi_iso(f: ChainMap) -> bool:
    return cone(f).is_acyclic()


def induces_homology_iso(f: ChainMap, degrees: Iterable[int] | None = None) -> bool:
    """Rank-based check that ``H_d(f)`` is bijective for the given degrees (all by default)."""
    if degrees is None:
        degrees = sorted(set(f.source.degrees) | set(f.target.degrees))
    for d in degrees:
        hs, ht = f.source.homology_dim(d), f.target.homology_dim(d)
        if hs != ht:
            return False
        if hs and f.homology_rank(d) != hs:
            return False
    return True


def is_quasi_iso_in_window(f: ChainMap, lo: int, hi: int) -> bool:
    return induces_homology_iso(f, range(lo, hi + 1))


# nullhomotopies


def _vec_left(A: Matrix, ncols: int) -> np.ndarray:
    """Matrix of X -> A X acting on column-major vec(X)."""
    return Matrix.identity(A.field, ncols).kron(A).a


def _vec_right(B: Matrix, nrows: int) -> np.ndarray:
    """Matrix of X -> X B acting on column-major vec(X)."""
    return B.T.kron(Matrix.identity(B.field, nrows)).a


def nullhomotopy_system(f: ChainMap) -> tuple[Matrix, Matrix, list[tuple[int, int, int, int]]]:
    """The linear system ``M vec(h) = vec(f)`` for ``d h + h d = f``.

    Returns ``(M, b, unknowns)`` where ``unknowns`` lists ``(degree, rows, cols, offset)``.
    """
    S, T = f.source, f.target
    F = f.field
    unknowns = []
    off = 0
    for d in S.degrees:
        r, c = T.dim(d + 1), S.dim(d)
        if r and c:
            unknowns.append((d, r, c, off))
            off += r * c
    index = {u[0]: u for u in unknowns}
    eqs = []
    for d in S.degrees:
        if T.dim(d):
            eqs.append((d, T.dim(d) * S.dim(d)))
    nrows = sum(n for _, n in eqs)
    M = F.zeros(nrows, off)
    b = F.zeros(nrows, 1)
    row = 0
    for d, n in eqs:
        fd = f.block(d)
        b[row:row + n, 0] = fd.a.T.reshape(-1)
        if d in index:
            _, r, c, o = index[d]
            M[row:row + n, o:o + r * c] = _vec_left(T.diff(d + 1), c)
        if d - 1 in index:
            _, r, c, o = index[d - 1]
            blk = _vec_right(S.diff(d), r)
            M[row:row + n, o:o + r * c] = F.reduce(M[row:row + n, o:o + r * c] + blk)
        row += n
    return Matrix(F, M), Matrix(F, b), unknowns


def find_nullhomotopy(f: ChainMap) -> Homotopy | None:
    """A homotopy from ``f`` to zero, or None when none exists."""
    M, b, unknowns = nullhomotopy_system(f)
    zero = ChainMap.zero(f.source, f.target)
    if M.cols == 0:
        return Homotopy(f, zero, {}) if b.is_zero() else None
    x = solve(M, b)
    if x is None:
        return None
    h = {}
    for d, r, c, o in unknowns:
        h[d] = Matrix(f.field, x.a[o:o + r * c, 0].reshape(c, r).T.copy())
    return Homotopy(f, zero, h)


def find_homotopy(f: ChainMap, g: ChainMap) -> Homotopy | None:
    h = find_nullhomotopy(f - g)
    if h is None:
        return None
    return Homotopy(f, g, h.h)
