"""Augmented and nonunital DG algebras, bar constructions and cotangent complexes.

Algebras are finite-dimensional chain complexes with a multiplication chain map
``A ⊗ A -> A`` in the tensor layout of :func:`gwcalc.chain.tensor`. Suspension in
augmented algebras is the normalized two-sided bar complex; loops are the strict
fiber over the augmentation.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product as iproduct
from typing import Callable, Mapping, Sequence

import numpy as np

from .chain import (ChainComplex, ChainMap, Homotopy, find_nullhomotopy, is_quasi_iso_in_window,
                    shift, tensor, _tensor_layout)
from .exactalg import Field, Matrix, kernel_basis, rank, solve
from . import groebner as gb


class AlgebraError(ValueError):
    pass


# products on basis elements


def _layout_offsets(a: ChainComplex) -> dict[tuple[int, int], int]:
    return {(i, j): off for parts in _tensor_layout(a, a).values() for i, j, off in parts}


class _Products:
    """Basis-level access to a multiplication ``A ⊗ A -> A``."""

    def __init__(self, a: ChainComplex, mult: ChainMap):
        self.a = a
        self.mult = mult
        self.off = _layout_offsets(a)

    def block(self, i: int, j: int) -> np.ndarray:
        """Matrix ``A_i ⊗ A_j -> A_{i+j}``; column ``x * dim(j) + y``."""
        F = self.a.field
        n = self.a.dim(i) * self.a.dim(j)
        if (i, j) not in self.off or not self.a.dim(i + j):
            return F.zeros(self.a.dim(i + j), n)
        o = self.off[(i, j)]
        return self.mult.block(i + j).a[:, o:o + n]

    def vec(self, i: int, x: np.ndarray, j: int, y: np.ndarray) -> np.ndarray:
        F = self.a.field
        b = self.block(i, j)
        m, di, dj = b.shape[0], self.a.dim(i), self.a.dim(j)
        if m == 0:
            return F.zeros(0, 1)[:, 0]
        if di == 0 or dj == 0:
            return F.zeros(m, 1)[:, 0]
        r = F.matmul(b.reshape(m * di, dj), np.asarray(y, dtype=F.dtype).reshape(dj, 1)).reshape(m, di)
        return F.matmul(r, np.asarray(x, dtype=F.dtype).reshape(di, 1))[:, 0]

    def left(self, i: int, x: int, j: int) -> np.ndarray:
        """Matrix of ``e_x · -: A_j -> A_{i+j}`` for basis vector ``x`` of degree ``i``."""
        dj = self.a.dim(j)
        b = self.block(i, j)
        return b[:, x * dj:(x + 1) * dj]


def _mult_from_table(a: ChainComplex, table: Callable[[int, int, int, int], np.ndarray | None]) -> ChainMap:
    """Multiplication chain map from ``table(i, x, j, y)`` giving the product of basis vectors."""
    F = a.field
    T = tensor(a, a)
    lay = _tensor_layout(a, a)
    blocks = {}
    for d, parts in lay.items():
        if not a.dim(d):
            continue
        out = F.zeros(a.dim(d), T.dim(d))
        for i, j, off in parts:
            for x in range(a.dim(i)):
                for y in range(a.dim(j)):
                    v = table(i, x, j, y)
                    if v is not None:
                        out[:, off + x * a.dim(j) + y] = v
        blocks[d] = Matrix(F, out)
    return ChainMap(T, a, blocks)


def _basis(F: Field, n: int, k: int) -> np.ndarray:
    v = F.zeros(n, 1)[:, 0]
    v[k] = F.coerce(1)
    return v


def _check_associative(a: ChainComplex, P: _Products, what: str):
    """``L_{xy} = L_x L_y`` on every degree, for basis vectors ``x`` and ``y``."""
    F = a.field
    degs = a.degrees
    for i, j, k in iproduct(degs, degs, degs):
        if not a.dim(i + j + k):
            continue
        for x, y in iproduct(range(a.dim(i)), range(a.dim(j))):
            lhs = F.matmul(P.left(i, x, j + k), P.left(j, y, k)) if a.dim(j + k) \
                else F.zeros(a.dim(i + j + k), a.dim(k))
            rhs = F.zeros(a.dim(i + j + k), a.dim(k))
            if a.dim(i + j):
                xy = P.block(i, j)[:, x * a.dim(j) + y]
                for w, c in enumerate(xy):
                    if c != 0:
                        rhs = F.reduce(rhs + c * P.left(i + j, w, k))
            if not np.array_equal(lhs, rhs):
                raise AlgebraError(f"{what}: associativity fails on degrees ({i},{j},{k})")


def _check_commutative(a: ChainComplex, P: _Products, what: str):
    F = a.field
    for i, j in iproduct(a.degrees, a.degrees):
        m = a.dim(i + j)
        if not m:
            continue
        di, dj = a.dim(i), a.dim(j)
        l = P.block(i, j).reshape(m, di, dj)
        r = P.block(j, i).reshape(m, dj, di).transpose(0, 2, 1)
        s = -1 if (i * j) % 2 else 1
        if not np.array_equal(l, F.reduce(r * s)):
            raise AlgebraError(f"{what}: graded commutativity fails on degrees ({i},{j})")


# algebra types


@dataclass(frozen=True, eq=False)
class NonunitalAlgebra:
    """A DG algebra without unit: ``I`` with ``μ: I ⊗ I -> I``."""

    underlying: ChainComplex
    multiplication: ChainMap
    commutative: bool = True

    def __post_init__(self):
        self.validate()

    @property
    def field(self) -> Field:
        return self.underlying.field

    def products(self) -> _Products:
        return _Products(self.underlying, self.multiplication)

    def validate(self):
        a = self.underlying
        m = self.multiplication
        if m.source != tensor(a, a) or m.target != a:
            raise AlgebraError("multiplication must be a chain map I ⊗ I -> I")
        P = self.products()
        _check_associative(a, P, "nonunital algebra")
        if self.commutative:
            _check_commutative(a, P, "nonunital algebra")

    def structure_equal(self, other: "NonunitalAlgebra") -> bool:
        return self.underlying == other.underlying and self.multiplication == other.multiplication


@dataclass(frozen=True, eq=False)
class AugmentedAlgebra:
    """A unital DG algebra with augmentation ``ε: A -> k[0]``."""

    underlying: ChainComplex
    unit: ChainMap
    multiplication: ChainMap
    augmentation: ChainMap
    commutative: bool = True
    weights: dict | None = None  # optional: degree -> list of basis weights (multiplicative)

    def __post_init__(self):
        self.validate()

    @property
    def field(self) -> Field:
        return self.underlying.field

    def products(self) -> _Products:
        return _Products(self.underlying, self.multiplication)

    def unit_vector(self) -> np.ndarray:
        return self.unit.block(0).a[:, 0]

    def validate(self):
        a = self.underlying
        F = a.field
        k = ChainComplex.point(F, 0)
        if self.unit.source != k or self.unit.target != a:
            raise AlgebraError("unit must be a chain map k[0] -> A")
        if self.augmentation.source != a or self.augmentation.target != k:
            raise AlgebraError("augmentation must be a chain map A -> k[0]")
        if self.multiplication.source != tensor(a, a) or self.multiplication.target != a:
            raise AlgebraError("multiplication must be a chain map A ⊗ A -> A")
        if (self.augmentation @ self.unit) != ChainMap.identity(k):
            raise AlgebraError("ε∘η must be the identity")
        P = self.products()
        u = self.unit_vector()
        for d in a.degrees:
            for x in range(a.dim(d)):
                e = _basis(F, a.dim(d), x)
                if any(p != q for p, q in zip(P.vec(0, u, d, e), e)) or \
                        any(p != q for p, q in zip(P.vec(d, e, 0, u), e)):
                    raise AlgebraError(f"unit law fails on degree {d}")
        _check_associative(a, P, "augmented algebra")
        if self.commutative:
            _check_commutative(a, P, "augmented algebra")
        eps = self.augmentation.block(0).a[0] if a.dim(0) else None
        if eps is not None:
            for x, y in iproduct(range(a.dim(0)), range(a.dim(0))):
                v = P.vec(0, _basis(F, a.dim(0), x), 0, _basis(F, a.dim(0), y))
                if F.coerce(sum(eps * v)) != F.coerce(eps[x] * eps[y]):
                    raise AlgebraError("augmentation is not multiplicative")
        if self.weights is not None:
            for i, j in iproduct(a.degrees, a.degrees):
                blk = P.block(i, j)
                for x, y in iproduct(range(a.dim(i)), range(a.dim(j))):
                    w = self.weights[i][x] + self.weights[j][y]
                    col = blk[:, x * a.dim(j) + y]
                    if any(c != 0 and self.weights[i + j][z] != w for z, c in enumerate(col)):
                        raise AlgebraError("weights are not multiplicative")


def _point_maps(a: ChainComplex, unit: np.ndarray, eps: np.ndarray) -> tuple[ChainMap, ChainMap]:
    F = a.field
    k = ChainComplex.point(F, 0)
    n = a.dim(0)
    U = Matrix(F, unit.reshape(n, 1).copy())
    E = Matrix(F, eps.reshape(1, n).copy())
    return ChainMap(k, a, {0: U}), ChainMap(a, k, {0: E})


def make_augmented(a: ChainComplex, table, unit: Sequence, eps: Sequence, commutative: bool = True,
                   weights: dict | None = None) -> AugmentedAlgebra:
    F = a.field
    u = np.array([F.coerce(x) for x in unit], dtype=F.dtype)
    e = np.array([F.coerce(x) for x in eps], dtype=F.dtype)
    U, E = _point_maps(a, u, e)
    return AugmentedAlgebra(a, U, _mult_from_table(a, table), E, commutative, weights)


def make_nonunital(a: ChainComplex, table, commutative: bool = True) -> NonunitalAlgebra:
    return NonunitalAlgebra(a, _mult_from_table(a, table), commutative)


def ground(F: Field) -> AugmentedAlgebra:
    k = ChainComplex.point(F, 0)
    return make_augmented(k, lambda i, x, j, y: _basis(F, 1, 0), [1], [1], weights={0: [0]})


def truncated_polynomial(F: Field, m: int) -> AugmentedAlgebra:
    """``k[x]/x^m`` augmented at ``x = 0``, basis ``1, x, ..., x^{m-1}`` weighted by exponent."""
    if m < 1:
        raise ValueError("m >= 1")
    a = ChainComplex(F, {0: m})

    def table(i, x, j, y):
        v = F.zeros(m, 1)[:, 0]
        if x + y < m:
            v[x + y] = F.coerce(1)
        return v

    return make_augmented(a, table, [1] + [0] * (m - 1), [1] + [0] * (m - 1), weights={0: list(range(m))})


def zero_nonunital(F: Field) -> NonunitalAlgebra:
    return make_nonunital(ChainComplex.zero(F), lambda *a: None)


def square_zero_nonunital(F: Field, dims: Mapping[int, int], diffs: Mapping | None = None) -> NonunitalAlgebra:
    a = ChainComplex(F, dims, diffs or {})
    return make_nonunital(a, lambda i, x, j, y: F.zeros(a.dim(i + j), 1)[:, 0])


# ker / cok


def ker_cok(a: AugmentedAlgebra) -> NonunitalAlgebra:
    """The augmentation ideal with the restricted multiplication."""
    A = a.underlying
    F = A.field
    K0 = kernel_basis(a.augmentation.block(0)) if A.dim(0) else Matrix.zero(F, 0, 0)
    bases = {d: (K0 if d == 0 else Matrix.identity(F, A.dim(d))) for d in A.degrees}
    dims = {d: b.cols for d, b in bases.items()}

    def coords(d: int, v: np.ndarray) -> np.ndarray:
        if d != 0:
            return v
        x = solve(bases[0], Matrix(F, v.reshape(-1, 1).copy()))
        if x is None:
            raise AlgebraError("product left the augmentation ideal")
        return x.a[:, 0]

    diffs = {}
    for d in A.degrees:
        if d - 1 in bases and dims.get(d) and dims.get(d - 1):
            img = A.diff(d) @ bases[d]
            cols = [coords(d - 1, img.a[:, c]) for c in range(img.cols)]
            diffs[d] = Matrix(F, np.stack(cols, axis=1))
    I = ChainComplex(F, dims, diffs)
    P = a.products()

    def table(i, x, j, y):
        v = P.vec(i, bases[i].a[:, x], j, bases[j].a[:, y])
        return coords(i + j, v) if I.dim(i + j) else None

    return make_nonunital(I, table, a.commutative)


def unitalize(i: NonunitalAlgebra) -> AugmentedAlgebra:
    """``k ⊕ I`` with the unit adjoined as the first basis vector in degree 0."""
    I = i.underlying
    F = I.field
    dims = dict(I.dims)
    dims[0] = dims.get(0, 0) + 1
    diffs = {}
    for d in I.degrees + [1]:
        if d == 1 and I.dim(0) and I.dim(1):
            diffs[1] = Matrix(F, np.vstack([F.zeros(1, I.dim(1)), I.diff(1).a]))
        elif d == 1 and I.dim(1):
            diffs[1] = Matrix(F, F.zeros(1, I.dim(1)))
        elif d not in (0, 1) and I.dim(d) and I.dim(d - 1):
            diffs[d] = I.diff(d)
    A = ChainComplex(F, dims, diffs)
    P = i.products()

    def lift(d, x):
        return x - 1 if d == 0 else x

    def table(p, x, q, y):
        n = A.dim(p + q)
        if not n:
            return None
        v = F.zeros(n, 1)[:, 0]
        if p == 0 and x == 0:
            v[y] = F.coerce(1)
            return v
        if q == 0 and y == 0:
            v[x] = F.coerce(1)
            return v
        w = P.vec(p, _basis(F, I.dim(p), lift(p, x)), q, _basis(F, I.dim(q), lift(q, y))) \
            if I.dim(p + q) else F.zeros(0, 1)[:, 0]
        if p + q == 0:
            v[1:] = w
        else:
            v[:] = w
        return v

    e = [1] + [0] * (dims[0] - 1)
    return make_augmented(A, table, e, e, i.commutative)


def is_isomorphic_unitalization(a: AugmentedAlgebra) -> bool:
    """``unitalize(ker_cok(a)) ≅ a`` via the basis ``[η(1), ker ε]`` in degree 0."""
    b = unitalize(ker_cok(a))
    A = a.underlying
    F = A.field
    if b.underlying.dims != A.dims:
        return False
    K0 = kernel_basis(a.augmentation.block(0)) if A.dim(0) else Matrix.zero(F, 0, 0)
    phi = {d: (Matrix(F, np.hstack([a.unit.block(0).a, K0.a])) if d == 0 else Matrix.identity(F, A.dim(d)))
           for d in A.degrees}
    try:
        f = ChainMap(b.underlying, A, phi)
    except Exception:
        return False
    from .chain import tensor_map
    return (f @ b.multiplication) == (a.multiplication @ tensor_map(f, f)) and (f @ b.unit) == a.unit \
        and (a.augmentation @ f) == b.augmentation


# square-zero


@dataclass(frozen=True)
class SquareZeroVerdict:
    square_zero: bool
    witness: Homotopy | None


def is_square_zero(i: NonunitalAlgebra) -> SquareZeroVerdict:
    h = find_nullhomotopy(i.multiplication)
    if h is not None and not h.check():
        raise AlgebraError("solver returned an invalid homotopy")
    return SquareZeroVerdict(h is not None, h)


# normalized algebra frames


@dataclass
class _Frame:
    """A unital algebra in a basis whose degree-0 vector 0 is the unit."""

    field: Field
    dims: dict
    diffs: dict           # d -> ndarray (dim(d-1), dim(d)), already in the frame basis
    mult: Callable        # (i, x, j, y) -> ndarray in degree i + j
    weights: dict | None
    basis: Callable       # (d, x) -> frame vector in original coordinates

    def bar_letters(self) -> list[tuple[int, int]]:
        """Basis of ``A / k·1`` as (degree, index)."""
        return [(d, x) for d in sorted(self.dims) for x in range(self.dims[d]) if not (d == 0 and x == 0)]

    def weight(self, d: int, x: int) -> int:
        return 0 if self.weights is None else self.weights[d][x]


def _frame(a: AugmentedAlgebra) -> _Frame:
    """Change basis in degree 0 to ``[η(1), ker ε]``."""
    A = a.underlying
    F = A.field
    change = {d: None for d in A.degrees}
    if A.dim(0):
        K0 = kernel_basis(a.augmentation.block(0))
        Pm = Matrix(F, np.hstack([a.unit.block(0).a, K0.a]))
        change[0] = Pm
        inv = solve(Pm, Matrix.identity(F, A.dim(0)))
    Pr = a.products()

    def to_frame(d, v):
        if d != 0:
            return v
        return F.reduce(inv.a.dot(v)) if F.p is None else F.matmul(inv.a, v.reshape(-1, 1))[:, 0]

    def basis(d, x):
        if d != 0:
            return _basis(F, A.dim(d), x)
        return change[0].a[:, x]

    cache: dict = {}

    def mult(i, x, j, y):
        key = (i, x, j, y)
        if key not in cache:
            if not A.dim(i + j):
                cache[key] = F.zeros(0, 1)[:, 0]
            else:
                cache[key] = to_frame(i + j, Pr.vec(i, basis(i, x), j, basis(j, y)))
        return cache[key]

    diffs = {}
    for d in A.degrees:
        if A.dim(d - 1):
            m = A.diff(d).a
            if d == 1:
                m = F.reduce(inv.a.dot(m)) if F.p is None else F.matmul(inv.a, m)
            if d == 0:
                m = F.reduce(m.dot(change[0].a)) if F.p is None else F.matmul(m, change[0].a)
            diffs[d] = m
    weights = None
    if a.weights is not None:
        weights = dict(a.weights)
        if A.dim(0):
            # frame vectors in degree 0 need homogeneous weights
            w0 = []
            for x in range(A.dim(0)):
                col = change[0].a[:, x]
                ws = {a.weights[0][z] for z, c in enumerate(col) if c != 0}
                w0.append(ws.pop() if len(ws) == 1 else None)
            if None in w0:
                weights = None
            else:
                weights[0] = w0
    return _Frame(F, dict(A.dims), diffs, mult, weights, basis)


# two-sided bar complexes


@dataclass
class _Side:
    """A module over the frame algebra: basis dims and an action ``(r_deg, r, a_deg, a) -> vector``."""

    dims: dict
    diffs: dict
    act: Callable


def _augmentation_side(F: Field) -> _Side:
    # k as a module through ε: every bar letter acts by zero
    return _Side({0: 1}, {}, lambda rd, r, ad, x: None)


def _sparse_add(out: dict, key, c, F: Field):
    v = F.coerce(out.get(key, 0) + c)
    if v == 0:
        out.pop(key, None)
    else:
        out[key] = v


@dataclass
class BarComplex:
    """A truncated two-sided normalized bar complex with its basis."""

    complex: ChainComplex
    basis: dict        # degree -> list of keys (r, letters, l)
    index: dict        # key -> (degree, position)
    max_degree: int
    N: int


def two_sided_bar(fr: _Frame, R: _Side, L: _Side, N: int, max_degree: int,
                  max_weight: int | None = None, min_length: int = 0, check: bool = False) -> BarComplex:
    """Elements ``r[a_1|...|a_p]l`` with ``min_length <= p <= N`` and total degree ``<= max_degree``.

    The degree is ``|r| + Σ(|a_i| + 1) + |l|``. Differentials follow the Koszul rule with
    suspended letters ``s a`` and ``d(s a) = -s(d a)``.
    """
    F = fr.field
    letters = [(d, x) for d, x in fr.bar_letters()
               if max_weight is None or fr.weight(d, x) <= max_weight]
    rb = [(d, x) for d in sorted(R.dims) for x in range(R.dims[d])]
    lb = [(d, x) for d in sorted(L.dims) for x in range(L.dims[d])]
    basis: dict[int, list] = {}
    lo_r = min((d for d, _ in rb), default=0)
    lo_l = min((d for d, _ in lb), default=0)
    monotone = all(d + 1 >= 0 for d, _ in letters)

    def extend(prefix, deg, wt, p):
        if p >= min_length:
            for r in rb:
                for l in lb:
                    t = r[0] + deg + l[0]
                    if t <= max_degree:
                        basis.setdefault(t, []).append((r, prefix, l))
        if p == N:
            return
        for d, x in letters:
            nd = deg + d + 1
            nw = wt + fr.weight(d, x)
            if max_weight is not None and nw > max_weight:
                continue
            if monotone and nd + lo_r + lo_l > max_degree:
                continue
            extend(prefix + ((d, x),), nd, nw, p + 1)

    extend((), 0, 0, 0)
    for t in basis:
        basis[t].sort()
    index = {key: (t, n) for t, keys in basis.items() for n, key in enumerate(keys)}

    def boundary(key) -> dict:
        r, word, l = key
        out: dict = {}
        # internal differential
        sign_pre = r[0]
        if r[0] in R.diffs:
            col = R.diffs[r[0]][:, r[1]]
            for z, c in enumerate(col):
                if c != 0:
                    _sparse_add(out, ((r[0] - 1, z), word, l), c, F)
        for k, (d, x) in enumerate(word):
            if d in fr.diffs:
                col = fr.diffs[d][:, x]
                s = -1 if sign_pre % 2 else 1
                for z, c in enumerate(col):
                    if c != 0 and not (d - 1 == 0 and z == 0):
                        nw = word[:k] + ((d - 1, z),) + word[k + 1:]
                        _sparse_add(out, (r, nw, l), -s * c, F)
            sign_pre += d + 1
        if l[0] in L.diffs:
            s = -1 if sign_pre % 2 else 1
            col = L.diffs[l[0]][:, l[1]]
            for z, c in enumerate(col):
                if c != 0:
                    _sparse_add(out, (r, word, (l[0] - 1, z)), s * c, F)
        if not word:
            return out
        # merging differential
        d0, x0 = word[0]
        v = R.act(r[0], r[1], d0, x0)
        if v is not None:
            s = -1 if r[0] % 2 else 1
            for z, c in enumerate(v):
                if c != 0:
                    _sparse_add(out, ((r[0] + d0, z), word[1:], l), s * c, F)
        pre = r[0]
        for k in range(len(word) - 1):
            (d1, x1), (d2, x2) = word[k], word[k + 1]
            v = fr.mult(d1, x1, d2, x2)
            s = -1 if (pre + d1 + 1) % 2 else 1
            for z, c in enumerate(v):
                if c != 0 and not (d1 + d2 == 0 and z == 0):
                    nw = word[:k] + ((d1 + d2, z),) + word[k + 2:]
                    _sparse_add(out, (r, nw, l), s * c, F)
            pre += d1 + 1
        d1, x1 = word[-1]
        v = L.act(l[0], l[1], d1, x1)
        if v is not None:
            s = -1 if (pre + d1 + 1) % 2 else 1
            for z, c in enumerate(v):
                if c != 0:
                    _sparse_add(out, (r, word[:-1], (l[0] + d1, z)), s * c, F)
        return out

    dims = {t: len(keys) for t, keys in basis.items()}
    diffs = {}
    for t, keys in basis.items():
        if t - 1 not in basis:
            continue
        m = F.zeros(dims[t - 1], dims[t])
        for n, key in enumerate(keys):
            for tk, c in boundary(key).items():
                pos = index.get(tk)
                if pos is None:
                    if len(tk[1]) < min_length:
                        continue  # lands in the dropped short words
                    raise AlgebraError("bar differential left the truncation; weights not homogeneous?")
                m[pos[1], n] = c
        diffs[t] = Matrix(F, m)
    return BarComplex(ChainComplex(F, dims, diffs, check=check), basis, index, max_degree, N)


def bar_suspension(a: AugmentedAlgebra, N: int, reduced: bool = False,
                   max_weight: int | None = None) -> ChainComplex:
    """``k ⊗^L_A k`` via the normalized bar complex, words of length ``<= N``.

    Homology is exact in degrees ``< N`` when ``A`` is connective. ``reduced`` drops the
    length-zero word (the augmentation-ideal part).
    """
    return bar_suspension_data(a, N, reduced, max_weight).complex


def bar_suspension_data(a: AugmentedAlgebra, N: int, reduced: bool = False,
                        max_weight: int | None = None, max_degree: int | None = None) -> BarComplex:
    if N < 1:
        raise ValueError("N >= 1")
    fr = _frame(a)
    if max_weight is not None and fr.weights is None:
        raise AlgebraError("weight truncation needs a homogeneous weight grading")
    k = _augmentation_side(a.field)
    top = N if max_degree is None else min(N, max_degree)
    return two_sided_bar(fr, k, k, N, top, max_weight, 1 if reduced else 0)


def is_connective(c: ChainComplex) -> bool:
    return c.lo is None or c.lo >= 0


def tensor_algebra(a: AugmentedAlgebra, b: AugmentedAlgebra) -> AugmentedAlgebra:
    """``A ⊗ B`` with ``(x⊗y)(x'⊗y') = (-1)^{|y||x'|} xx' ⊗ yy'``."""
    A, B = a.underlying, b.underlying
    F = A.field
    T = tensor(A, B)
    lay = _tensor_layout(A, B)
    where = {}
    for d, parts in lay.items():
        for i, j, off in parts:
            for x in range(A.dim(i)):
                for y in range(B.dim(j)):
                    where[(d, off + x * B.dim(j) + y)] = (i, x, j, y)
    Pa, Pb = a.products(), b.products()

    def table(d1, u, d2, v):
        i, x, j, y = where[(d1, u)]
        i2, x2, j2, y2 = where[(d2, v)]
        n = T.dim(d1 + d2)
        if not n:
            return None
        out = F.zeros(n, 1)[:, 0]
        if not A.dim(i + i2) or not B.dim(j + j2):
            return out
        xa = Pa.vec(i, _basis(F, A.dim(i), x), i2, _basis(F, A.dim(i2), x2))
        yb = Pb.vec(j, _basis(F, B.dim(j), y), j2, _basis(F, B.dim(j2), y2))
        s = -1 if (j * i2) % 2 else 1
        off = {(p, q): o for p, q, o in lay[d1 + d2]}[(i + i2, j + j2)]
        out[off:off + len(xa) * len(yb)] = F.reduce(np.outer(xa, yb).reshape(-1) * s)
        return out

    unit = F.reduce(np.outer(a.unit_vector(), b.unit_vector()).reshape(-1))
    eps = F.reduce(np.outer(a.augmentation.block(0).a[0], b.augmentation.block(0).a[0]).reshape(-1))
    u = F.zeros(T.dim(0), 1)[:, 0]
    e = F.zeros(T.dim(0), 1)[:, 0]
    o = {(p, q): o for p, q, o in lay[0]}[(0, 0)]
    u[o:o + len(unit)] = unit
    e[o:o + len(eps)] = eps
    weights = None
    if a.weights is not None and b.weights is not None:
        weights = {d: [0] * T.dim(d) for d in T.degrees}
        for (d, pos), (i, x, j, y) in where.items():
            weights[d][pos] = a.weights[i][x] + b.weights[j][y]
    return make_augmented(T, table, u, e, a.commutative and b.commutative, weights)


def exterior(F: Field, degree: int = 1) -> AugmentedAlgebra:
    """``Λ(e)`` with ``|e| = degree`` odd; ``k[e]/e²`` for even degree."""
    c = ChainComplex(F, {0: 1, degree: 1}) if degree else ChainComplex(F, {0: 2})
    if degree == 0:
        return truncated_polynomial(F, 2)

    def table(i, x, j, y):
        if i + j > degree:
            return None
        return _basis(F, 1, 0)

    return make_augmented(c, table, [1], [1], weights={0: [0], degree: [1]})


# excisiveness of the identity at an object


def homology_support(c: ChainComplex) -> tuple[int, int] | None:
    degs = [d for d, b in c.betti().items() if b]
    return (min(degs), max(degs)) if degs else None


@dataclass(frozen=True)
class ExcisiveObjectReport:
    excisive: bool
    square_zero: bool
    agree: bool
    window: tuple[int, int] | None
    N: int
    truncation_ok: bool
    unit: ChainMap | None


def suspension_loop_unit(i: NonunitalAlgebra, N: int, max_degree: int | None = None) -> ChainMap:
    """``I -> Ω Σ I`` on augmentation ideals: ``a ↦ [a]`` into the desuspended reduced bar complex.

    Bar degrees above ``max_degree`` are dropped; homology is exact below it.
    """
    a = unitalize(i)
    bar = bar_suspension_data(a, N, reduced=True, max_degree=max_degree)
    F = i.field
    I = i.underlying
    target = shift(bar.complex, -1)
    blocks = {}
    for d in I.degrees:
        if not target.dim(d):
            continue
        m = F.zeros(target.dim(d), I.dim(d))
        for x in range(I.dim(d)):
            key = ((0, 0), ((d, x + 1 if d == 0 else x),), (0, 0))
            pos = bar.index.get(key)
            if pos is not None:
                m[pos[1], x] = F.coerce(1)
        blocks[d] = Matrix(F, m)
    return ChainMap(I, target, blocks)


def excisive_object_test(i: NonunitalAlgebra, window: tuple[int, int] | None = None,
                         N: int | None = None) -> ExcisiveObjectReport:
    """Whether ``I -> Ω Σ I`` is a quasi-isomorphism in ``window``.

    The default window is the homological support of ``I`` (the whole support of ``I``
    when it is acyclic). Longer bar words contribute ``I^{⊗p}[p-1]`` above that range.
    """
    I = i.underlying
    if window is None:
        window = homology_support(I)
        if window is None and I.lo is not None:
            window = (I.lo, I.hi)
    verdict = is_square_zero(i)
    if window is None:
        return ExcisiveObjectReport(True, verdict.square_zero, verdict.square_zero, None, N or 2, True, None)
    lo, hi = window
    if N is None:
        N = max(hi - lo + 1 + 2, hi + 2, 1)
    ok = is_connective(I) and hi + 1 < N
    unit = suspension_loop_unit(i, N, max_degree=hi + 2)
    exc = is_quasi_iso_in_window(unit, lo, hi)
    return ExcisiveObjectReport(exc, verdict.square_zero, exc == verdict.square_zero, window, N, ok, unit)


# cotangent complexes


def _shuffles(u: tuple, v: tuple):
    """Shuffles of two bar words with the Koszul sign of the suspended letters."""
    p, q = len(u), len(v)
    from itertools import combinations
    for pos in combinations(range(p + q), p):
        word = [None] * (p + q)
        ps = set(pos)
        iu = iv = 0
        sign = 0
        seen_v = 0  # suspended degree of v-letters already placed
        for k in range(p + q):
            if k in ps:
                word[k] = u[iu]
                sign += (u[iu][0] + 1) * seen_v
                iu += 1
            else:
                word[k] = v[iv]
                seen_v += v[iv][0] + 1
                iv += 1
        yield tuple(word), -1 if sign % 2 else 1


def harrison_data(a: AugmentedAlgebra, N: int, max_weight: int | None = None,
                  max_degree: int | None = None) -> tuple[ChainComplex, dict]:
    """The reduced bar complex and, per degree, the span of shuffle products of nonempty words."""
    bar = bar_suspension_data(a, N, reduced=True, max_weight=max_weight, max_degree=max_degree)
    F = a.field
    C = bar.complex
    rel = {}
    words = {t: [k[1] for k in keys] for t, keys in bar.basis.items()}
    for t in C.degrees:
        cols = []
        for t1 in words:
            t2 = t - t1
            if t2 not in words or t1 > t2:
                continue
            for u in words[t1]:
                for v in words[t2]:
                    if t1 == t2 and v < u:
                        continue
                    col = F.zeros(C.dim(t), 1)[:, 0]
                    for w, s in _shuffles(u, v):
                        pos = bar.index.get(((0, 0), w, (0, 0)))
                        if pos is None:
                            break
                        col[pos[1]] = F.coerce(col[pos[1]] + s)
                    else:
                        cols.append(col)
        if cols:
            rel[t] = Matrix(F, np.stack(cols, axis=1))
    return C, rel


def quotient_homology(V: ChainComplex, rel: Mapping[int, Matrix], d: int) -> int:
    """``dim H_d(V/R)`` from ranks alone."""
    F = V.field

    def rk(m):
        return rank(m) if m is not None and m.rows and m.cols else 0

    def r(e):
        return rel.get(e)

    def induced(e):
        if not V.dim(e) or not V.dim(e - 1):
            return 0
        R = r(e - 1)
        D = V.diff(e)
        both = Matrix(F, np.hstack([D.a, R.a])) if R is not None else D
        return rk(both) - rk(R)

    return V.dim(d) - rk(r(d)) - induced(d) - induced(d + 1)


def harrison_complex(a: AugmentedAlgebra, N: int, max_weight: int | None = None) -> ChainComplex:
    """Reduced bar complex modulo shuffle products of nonempty words."""
    from .cube import quotient_complex
    C, rel = harrison_data(a, N, max_weight)
    return quotient_complex(C, rel)[0]


@dataclass
class CotangentReport:
    """``L ⊗_A k`` in ``window``; degree ``d`` of ``L`` is degree ``d + 1`` of the Harrison complex."""

    bar: ChainComplex
    shuffles: dict
    window: tuple[int, int]
    N: int
    truncation_ok: bool

    def homology(self) -> dict[int, int]:
        lo, hi = self.window
        return {d: quotient_homology(self.bar, self.shuffles, d + 1) for d in range(lo, hi + 1)}

    @property
    def complex(self) -> ChainComplex:
        from .cube import quotient_complex
        return shift(quotient_complex(self.bar, self.shuffles)[0], -1)


def cotangent_via_p1(a: AugmentedAlgebra, window: tuple[int, int] = (0, 1), N: int | None = None,
                     max_weight: int | None = None) -> CotangentReport:
    """Cotangent complex at the augmentation, ``L ⊗_A k``, from the bar construction.

    ``Σ_A A`` is the reduced bar complex; its linear part (indecomposables for the shuffle
    product) desuspended once is ``L``. ``H_0`` is ``m/m²`` and ``H_1`` counts minimal
    relations. ``max_weight`` restricts to a weight range, which computes a polynomial
    ring through a truncation ``k[x]/m^{W+1}`` exactly in weights ``<= W``.
    """
    lo, hi = window
    if N is None:
        N = max(hi - lo + 1 + 2, hi + 2)
    C, rel = harrison_data(a, N, max_weight, max_degree=hi + 2)
    return CotangentReport(C, rel, window, N, is_connective(a.underlying) and hi + 1 < N)


# finite quotients of polynomial rings


@dataclass
class FiniteQuotient:
    """``k[vars]/I`` with ``I`` zero-dimensional: standard-monomial basis and multiplication."""

    field: Field
    nvars: int
    gb: list
    monomials: list
    position: dict

    def coords(self, p: dict) -> np.ndarray:
        F = self.field
        v = F.zeros(len(self.monomials), 1)[:, 0]
        for m, c in gb.reduce(F, p, self.gb).items():
            v[self.position[m]] = c
        return v

    def poly(self, v) -> dict:
        return {m: c for m, c in zip(self.monomials, v) if c != 0}

    def left(self, p: dict) -> np.ndarray:
        """Matrix of multiplication by ``p``."""
        F = self.field
        cols = [self.coords(gb.mul(F, p, {m: F.coerce(1)})) for m in self.monomials]
        return np.stack(cols, axis=1) if cols else F.zeros(0, 0)

    @property
    def dim(self) -> int:
        return len(self.monomials)


def finite_quotient(F: Field, nvars: int, polys: Sequence[dict]) -> FiniteQuotient:
    G = gb.groebner(F, polys)
    mons = gb.standard_monomials(G, nvars)
    return FiniteQuotient(F, nvars, G, mons, {m: i for i, m in enumerate(mons)})


def _var(F: Field, n: int, i: int) -> dict:
    m = [0] * n
    m[i] = 1
    return {tuple(m): F.coerce(1)}


def algebra_from_presentation(p: gb.Presentation) -> AugmentedAlgebra:
    """The finite algebra ``k[vars]/I`` augmented at the origin."""
    F = p.field
    if not p.is_zero_dimensional():
        raise AlgebraError("presentation is not zero-dimensional")
    if any(dict(r).get(tuple([0] * p.nvars), 0) != 0 for r in p.relations):
        raise AlgebraError("origin is not a point of the presentation")
    Q = finite_quotient(F, p.nvars, p.polys())
    n = Q.dim
    a = ChainComplex(F, {0: n})

    def table(i, x, j, y):
        return Q.coords(gb.mul(F, {Q.monomials[x]: F.coerce(1)}, {Q.monomials[y]: F.coerce(1)}))

    e = [1] + [0] * (n - 1)
    weights = {0: [sum(m) for m in Q.monomials]} if p.is_homogeneous() else None
    return make_augmented(a, table, e, e, weights=weights)


# naive cotangent complex


@dataclass(frozen=True)
class ModuleSummary:
    """A B-module up to the invariants we compare: k-dimension, rank data, action ranks."""

    kind: str                      # "finite", "free" or "projective"
    dim: int | None = None         # dimension over k when finite
    rank: int | None = None        # rank over B when free or projective
    action_ranks: tuple | None = None  # rank of each standard monomial's action


@dataclass(frozen=True)
class TwoTermComplex:
    """``I/I² -> ⊕ B dt_i`` in degrees -1, 0 with ``d(r) = Σ ∂r/∂t_i dt_i``."""

    presentation: gb.Presentation
    jacobian: tuple                # entries [relation][variable] reduced mod I
    quotient: FiniteQuotient | None
    m1_dim: int | None             # dim_k I/I² when finite
    d: Matrix | None               # k-linear matrix of d when finite
    h0: ModuleSummary
    hm1: ModuleSummary
    at_origin: tuple | None        # (dim coker, dim ker) of the Jacobian at 0 on I/mI


def _span_dim(F: Field, vecs: list) -> int:
    if not vecs:
        return 0
    return rank(Matrix(F, np.stack(vecs, axis=1)))


def _action_ranks(F: Field, Q: FiniteQuotient, ambient_dim: int, sub: Matrix,
                  act: Callable[[dict], np.ndarray]) -> tuple:
    """Rank of ``b`` acting on ``ambient/sub`` for each standard monomial ``b``."""
    base = rank(sub) if sub.cols else 0
    out = []
    for m in Q.monomials:
        L = act({m: F.coerce(1)})
        both = np.hstack([L, sub.a]) if sub.cols else L
        out.append(rank(Matrix(F, both)) - base)
    return tuple(out)


def _at_origin(p: gb.Presentation) -> tuple | None:
    F = p.field
    n = p.nvars
    zero = tuple([0] * n)
    if any(dict(r).get(zero, 0) != 0 for r in p.relations) or not p.is_zero_dimensional():
        return None
    I = p.polys()
    mI = gb.products(F, [_var(F, n, i) for i in range(n)], I)
    Qm = finite_quotient(F, n, mI)
    Q = finite_quotient(F, n, I)
    proj = np.stack([Q.coords({m: F.coerce(1)}) for m in Qm.monomials], axis=1)
    K = kernel_basis(Matrix(F, proj))
    lin = [tuple(1 if k == i else 0 for k in range(n)) for i in range(n)]
    rows = []
    for t in lin:
        rows.append([K.a[Qm.position[t], c] if t in Qm.position else F.coerce(0) for c in range(K.cols)])
    J0 = Matrix.from_rows(F, rows, K.cols) if K.cols else Matrix.zero(F, n, 0)
    r = rank(J0)
    return (n - r, K.cols - r)


def naive_cotangent(p: gb.Presentation) -> TwoTermComplex:
    F = p.field
    n = p.nvars
    rels = p.polys()
    G = p.basis()
    jac = tuple(tuple(gb.reduce(F, gb.derivative(F, r, i), G) for i in range(n)) for r in rels)
    if not rels:
        s = ModuleSummary("free", rank=n)
        return TwoTermComplex(p, jac, None, 0, None, s, ModuleSummary("free", dim=0, rank=0), None)
    if any(gb.leading(g) == tuple([0] * n) for g in G):
        z = ModuleSummary("finite", dim=0, rank=0)
        return TwoTermComplex(p, jac, None, 0, None, z, z, None)
    if not p.is_zero_dimensional():
        return _naive_smooth(p, jac, G)
    Q = finite_quotient(F, n, rels)
    Q2 = finite_quotient(F, n, gb.products(F, rels, rels))
    proj = np.stack([Q.coords({m: F.coerce(1)}) for m in Q2.monomials], axis=1)
    K = kernel_basis(Matrix(F, proj))     # I/I² inside k[x]/I²
    cols = []
    for c in range(K.cols):
        f = Q2.poly(K.a[:, c])
        cols.append(np.concatenate([Q.coords(gb.derivative(F, f, i)) for i in range(n)]))
    d = Matrix(F, np.stack(cols, axis=1)) if cols else Matrix.zero(F, n * Q.dim, 0)
    rd = rank(d) if d.cols else 0
    im = Matrix(F, d.a) if d.cols else Matrix.zero(F, n * Q.dim, 0)

    def act0(b):
        L = Q.left(b)
        return np.kron(np.eye(n, dtype=int).astype(F.dtype), L) if F.p is None else \
            F.reduce(np.kron(np.eye(n, dtype=np.int64), L))

    h0 = ModuleSummary("finite", dim=n * Q.dim - rd,
                       action_ranks=_action_ranks(F, Q, n * Q.dim, _basis_of_image(im), act0))
    hm1 = ModuleSummary("finite", dim=K.cols - rd)
    return TwoTermComplex(p, jac, Q, K.cols, d, h0, hm1, _at_origin(p))


def _basis_of_image(m: Matrix) -> Matrix:
    from .exactalg import image_basis
    return image_basis(m) if m.cols else m


def _naive_smooth(p: gb.Presentation, jac, G) -> TwoTermComplex:
    """Positive-dimensional case: decide via unimodularity of the Jacobian."""
    F = p.field
    n = p.nvars
    r = len(jac)
    if r > n:
        raise AlgebraError("positive-dimensional presentation with more relations than variables")
    minors = []
    for cols in _subsets(n, r):
        minors.append(_det(F, [[jac[i][j] for j in cols] for i in range(r)]))
    ideal = gb.groebner(F, p.polys() + [m for m in minors if m])
    if not any(gb.leading(g) == tuple([0] * n) for g in ideal):
        raise AlgebraError("Jacobian is not unimodular; positive-dimensional case unsupported")
    return TwoTermComplex(p, jac, None, None, None, ModuleSummary("projective", rank=n - r),
                          ModuleSummary("free", dim=0, rank=0), None)


def _subsets(n: int, r: int):
    from itertools import combinations
    return combinations(range(n), r)


def _det(F: Field, m: list) -> dict:
    if not m:
        return {}
    if len(m) == 1:
        return dict(m[0][0])
    out: dict = {}
    for j in range(len(m)):
        sub = [row[:j] + row[j + 1:] for row in m[1:]]
        out = gb.add(F, out, gb.mul(F, m[0][j], _det(F, sub)), -1 if j % 2 else 1)
    return out


def kahler_jacobian(p: gb.Presentation) -> ModuleSummary:
    """``Ω_B`` as the cokernel of the Jacobian of the reduced Gröbner basis."""
    F = p.field
    n = p.nvars
    Q = finite_quotient(F, n, p.polys())
    cols = []
    for g in Q.gb:
        for b in Q.monomials:
            f = gb.mul(F, g, {b: F.coerce(1)})
            cols.append(np.concatenate([Q.coords(gb.derivative(F, f, i)) for i in range(n)]))
    sub = _basis_of_image(Matrix(F, np.stack(cols, axis=1))) if cols else Matrix.zero(F, n * Q.dim, 0)

    def act(b):
        L = Q.left(b)
        return F.reduce(np.kron(np.eye(n, dtype=np.int64 if F.p else int).astype(F.dtype), L))

    return ModuleSummary("finite", dim=n * Q.dim - (sub.cols), action_ranks=_action_ranks(F, Q, n * Q.dim, sub, act))


def kahler_diagonal(p: gb.Presentation) -> ModuleSummary:
    """``Ω_B = J/J²`` for ``J`` the kernel of ``B ⊗ B -> B``."""
    F = p.field
    n = p.nvars
    Q = finite_quotient(F, n, p.polys())
    N = Q.dim
    Ls = [Q.left({m: F.coerce(1)}) for m in Q.monomials]
    mult = np.stack([np.stack([L[:, y] for y in range(N)], axis=1) for L in Ls], axis=1)  # [z, x, y]
    m = F.zeros(N, N * N)
    for x in range(N):
        for y in range(N):
            m[:, x * N + y] = mult[:, x, y]
    J = kernel_basis(Matrix(F, m))

    def kron_apply(a: int, v: np.ndarray) -> np.ndarray:
        """``(L_x ⊗ L_y) v`` for ``a = x N + y``, as ``L_x V L_y^T``."""
        V = v.reshape(N, N)
        return F.matmul(F.matmul(Ls[a // N], V), Ls[a % N].T.copy()).reshape(-1)

    def times(u, v):
        out = F.zeros(N * N, 1)[:, 0]
        for a in range(N * N):
            if u[a] == 0:
                continue
            out = F.reduce(out + u[a] * kron_apply(a, v))
        return out

    one = Q.coords({tuple([0] * n): F.coerce(1)})
    deltas = []
    for i in range(n):
        xi = Q.coords(_var(F, n, i))
        deltas.append(F.reduce(np.kron(one, xi) - np.kron(xi, one)))
    gens = [times(u, v) for u in deltas for v in deltas]
    J2 = []
    for g in gens:
        for a in range(N * N):
            J2.append(kron_apply(a, g))
    sub = _basis_of_image(Matrix(F, np.stack(J2, axis=1))) if J2 else Matrix.zero(F, N * N, 0)

    def act(b):
        L = Q.left(b)
        return np.vstack([F.reduce(sum((L[r, c] * J.a[c * N:(c + 1) * N] for c in range(N) if L[r, c] != 0),
                                       F.zeros(N, J.cols))) for r in range(N)])

    base = sub.cols
    ranks = []
    for mnm in Q.monomials:
        L = act({mnm: F.coerce(1)})
        both = np.hstack([L, sub.a]) if base else L
        ranks.append(rank(Matrix(F, both)) - base)
    return ModuleSummary("finite", dim=J.cols - base, action_ranks=tuple(ranks))


# square-zero lifting


@dataclass(frozen=True, eq=False)
class AlgebraModule:
    """A module over a discrete algebra: ``action[i]`` is the matrix of basis element ``i``."""

    algebra: AugmentedAlgebra
    dim: int
    action: tuple

    def __post_init__(self):
        a = self.algebra
        F = a.field
        A = a.underlying
        if A.degrees not in ([0], []):
            raise AlgebraError("modules are over discrete algebras")
        n = A.dim(0)
        if len(self.action) != n or any(m.shape != (self.dim, self.dim) for m in self.action):
            raise AlgebraError("one square action matrix per basis element")
        if self.act(a.unit_vector()) != Matrix.identity(F, self.dim):
            raise AlgebraError("unit must act as the identity")
        P = a.products()
        for x, y in iproduct(range(n), range(n)):
            xy = P.vec(0, _basis(F, n, x), 0, _basis(F, n, y))
            if self.action[x] @ self.action[y] != self.act(xy):
                raise AlgebraError("action is not multiplicative")

    def act(self, v: np.ndarray) -> Matrix:
        F = self.algebra.field
        out = Matrix.zero(F, self.dim, self.dim)
        for c, m in zip(v, self.action):
            if c != 0:
                out = out + m.scale(c)
        return out


def module_from_generators(a: AugmentedAlgebra, Q: FiniteQuotient, generators: Sequence[Matrix]) -> AlgebraModule:
    """The module where variable ``i`` of the presentation acts by ``generators[i]``."""
    F = a.field
    n = generators[0].rows if generators else 0
    acts = []
    for m in Q.monomials:
        out = Matrix.identity(F, n)
        for g, e in zip(generators, m):
            for _ in range(e):
                out = out @ g
        acts.append(out)
    return AlgebraModule(a, n, tuple(acts))


def quotient_algebra(p: gb.Presentation) -> tuple[AugmentedAlgebra, FiniteQuotient]:
    return algebra_from_presentation(p), finite_quotient(p.field, p.nvars, p.polys())


def induced_map(QA: FiniteQuotient, QB: FiniteQuotient, images: Sequence[dict]) -> Matrix:
    """Matrix of the algebra map sending variable ``i`` of A to ``images[i]`` in B."""
    F = QA.field
    cols = []
    for m in QA.monomials:
        f = {tuple([0] * QB.nvars): F.coerce(1)}
        for g, e in zip(images, m):
            for _ in range(e):
                f = gb.mul(F, f, g)
        cols.append(QB.coords(f))
    return Matrix(F, np.stack(cols, axis=1))


def _check_algebra_map(a: AugmentedAlgebra, b: AugmentedAlgebra, phi: Matrix):
    F = a.field
    n = a.underlying.dim(0)
    if phi.shape != (b.underlying.dim(0), n):
        raise AlgebraError("structure map has the wrong shape")
    Pa, Pb = a.products(), b.products()
    if any(x != y for x, y in zip(phi.a.dot(a.unit_vector()), b.unit_vector())):
        raise AlgebraError("structure map is not unital")
    for x, y in iproduct(range(n), range(n)):
        l = phi.a.dot(Pa.vec(0, _basis(F, n, x), 0, _basis(F, n, y)))
        r = Pb.vec(0, phi.a[:, x], 0, phi.a[:, y])
        if any(F.coerce(u) != F.coerce(v) for u, v in zip(l, r)):
            raise AlgebraError("structure map is not multiplicative")


def _mat_vec(F: Field, m: np.ndarray, v: np.ndarray) -> np.ndarray:
    if m.shape[0] == 0:
        return F.zeros(0, 1)[:, 0]
    return F.matmul(m, v.reshape(-1, 1))[:, 0]


def base_change(b: AugmentedAlgebra, phi: Matrix, M: AlgebraModule) -> tuple[Matrix, Matrix]:
    """``B ⊗_A M`` as a quotient of ``B ⊗_k M``: returns (projection, section columns)."""
    F = b.field
    nb, nm, na = b.underlying.dim(0), M.dim, M.algebra.underlying.dim(0)
    Pb = b.products()
    rel = []
    for bi, ai in iproduct(range(nb), range(na)):
        bphi = Pb.vec(0, _basis(F, nb, bi), 0, phi.a[:, ai])
        for mi in range(nm):
            left = np.outer(bphi, _basis(F, nm, mi)).reshape(-1)
            right = np.outer(_basis(F, nb, bi), M.action[ai].a[:, mi]).reshape(-1)
            rel.append(F.reduce(left - right))
    n = nb * nm
    if not rel or n == 0:
        return Matrix.identity(F, n), Matrix.identity(F, n)
    from .cube import quotient_complex
    V = ChainComplex(F, {0: n})
    _, proj, keep = quotient_complex(V, {0: Matrix(F, np.stack(rel, axis=1))})
    pm = proj.block(0)
    sec = Matrix(F, F.eye(n)[:, keep[0]]) if keep.get(0) else Matrix.zero(F, n, 0)
    return pm, sec


@dataclass
class LiftReport:
    lifted: AugmentedAlgebra          # B̃ = B ⊕ (B ⊗_A M)[1]
    extension: AugmentedAlgebra       # Ã = A ⊕ M[1]
    degree_dims: dict
    derived: ChainComplex             # B̃ ⊗^L_Ã A, truncated
    comparison: ChainMap              # derived -> B[0]
    window: tuple[int, int]
    N: int
    verified: bool
    truncation_ok: bool


def square_zero_extension(a: AugmentedAlgebra, M: AlgebraModule) -> AugmentedAlgebra:
    """``A ⊕ M[1]`` with ``M·M = 0``."""
    F = a.field
    na, nm = a.underlying.dim(0), M.dim
    C = ChainComplex(F, {0: na, 1: nm})
    Pa = a.products()

    def table(i, x, j, y):
        if i + j > 1:
            return None
        if i == 0 and j == 0:
            return Pa.vec(0, _basis(F, na, x), 0, _basis(F, na, y))
        if i == 0:
            return M.action[x].a[:, y].copy()
        return M.action[y].a[:, x].copy()

    eps = list(a.augmentation.block(0).a[0])
    return make_augmented(C, table, list(a.unit_vector()), eps)


def square_zero_lift(a: AugmentedAlgebra, b: AugmentedAlgebra, phi: Matrix, M: AlgebraModule,
                     window: tuple[int, int] = (0, 2), N: int | None = None) -> LiftReport:
    """``B̃ = B ⊕ (B ⊗_A M)[1]`` and the check ``B̃ ⊗^L_{A ⊕ M[1]} A ≃ B`` in ``window``."""
    F = a.field
    for x in (a, b):
        if x.underlying.degrees != [0]:
            raise AlgebraError("A and B must be discrete")
    _check_algebra_map(a, b, phi)
    if M.algebra is not a:
        raise AlgebraError("M must be a module over A")
    nb, nm = b.underlying.dim(0), M.dim
    proj, sec = base_change(b, phi, M)
    q = proj.rows
    Pb = b.products()

    def bm_class(bv: np.ndarray, mi: int) -> np.ndarray:
        return _mat_vec(F, proj.a, np.outer(bv, _basis(F, nm, mi)).reshape(-1))

    def bm_times(bv: np.ndarray, k: int) -> np.ndarray:
        """``bv · [section k]``."""
        raw = sec.a[:, k]
        out = F.zeros(q, 1)[:, 0]
        for idx, c in enumerate(raw):
            if c != 0:
                bi, mi = divmod(idx, nm)
                out = F.reduce(out + c * bm_class(Pb.vec(0, bv, 0, _basis(F, nb, bi)), mi))
        return out

    Cb = ChainComplex(F, {0: nb, 1: q})

    def table(i, x, j, y):
        if i + j > 1:
            return None
        if i == 0 and j == 0:
            return Pb.vec(0, _basis(F, nb, x), 0, _basis(F, nb, y))
        if i == 0:
            return bm_times(_basis(F, nb, x), y)
        return bm_times(_basis(F, nb, y), x)

    lifted = make_augmented(Cb, table, list(b.unit_vector()), list(b.augmentation.block(0).a[0]))
    ext = square_zero_extension(a, M)
    lo, hi = window
    if N is None:
        N = hi + 2
    max_degree = hi + 1
    fr = _frame(ext)
    na = a.underlying.dim(0)

    def act_R(rd, r, ad, x):
        v = fr.basis(ad, x)
        if ad == 0:
            w = phi.a.dot(v)
            if rd == 0:
                return Pb.vec(0, _basis(F, nb, r), 0, F.reduce(w))
            return bm_times(F.reduce(w), r)
        if rd == 0:
            out = F.zeros(q, 1)[:, 0]
            for mi, c in enumerate(v):
                if c != 0:
                    out = F.reduce(out + c * bm_class(_basis(F, nb, r), mi))
            return out
        return None

    Pa = a.products()

    def act_L(ld, l, ad, x):
        if ad != 0:
            return None
        return Pa.vec(0, fr.basis(0, x), 0, _basis(F, na, l))

    R = _Side({0: nb, 1: q} if q else {0: nb}, {}, act_R)
    L = _Side({0: na}, {}, act_L)
    bar = two_sided_bar(fr, R, L, N, max_degree)
    C = bar.complex
    target = ChainComplex(F, {0: nb})
    m = F.zeros(nb, C.dim(0))
    for (r, word, l), (t, pos) in bar.index.items():
        if t == 0 and r[0] == 0 and not word:
            m[:, pos] = Pb.vec(0, _basis(F, nb, r[1]), 0, phi.a[:, l[1]])
    comp = ChainMap(C, target, {0: Matrix(F, m)} if C.dim(0) else {})
    ok = is_quasi_iso_in_window(comp, lo, hi)
    return LiftReport(lifted, ext, {0: nb, 1: q}, C, comp, window, N, ok, hi + 1 < N)


# JSON


def presentation_to_json(p: gb.Presentation) -> dict:
    from .io import field_to_json
    return {"field": field_to_json(p.field), "vars": list(p.vars),
            "relations": [{"terms": [{"coef": p.field.format(c), "exps": list(m)} for m, c in r]}
                          for r in p.relations]}


def presentation_from_json(v, path: str = "presentation") -> gb.Presentation:
    from .io import SchemaError, field_from_json
    if not isinstance(v, dict):
        raise SchemaError(path, "expected an object")
    F = field_from_json(v.get("field"), f"{path}.field")
    names = v.get("vars")
    if not isinstance(names, list) or any(not isinstance(x, str) for x in names) or len(set(names)) != len(names):
        raise SchemaError(f"{path}.vars", "expected a list of distinct names")
    if len(names) > 6:
        raise SchemaError(f"{path}.vars", "at most 6 variables")
    rels = v.get("relations", [])
    if not isinstance(rels, list) or len(rels) > 12:
        raise SchemaError(f"{path}.relations", "expected a list of at most 12 relations")
    out = []
    for i, r in enumerate(rels):
        rp = f"{path}.relations[{i}]"
        terms = r.get("terms") if isinstance(r, dict) else None
        if not isinstance(terms, list):
            raise SchemaError(rp, "expected {terms: [...]}")
        poly: dict = {}
        for j, t in enumerate(terms):
            tp = f"{rp}.terms[{j}]"
            if not isinstance(t, dict) or not isinstance(t.get("exps"), list) \
                    or len(t["exps"]) != len(names) or any(not isinstance(e, int) or e < 0 for e in t["exps"]):
                raise SchemaError(tp, f"expected {{coef, exps}} with {len(names)} nonnegative exponents")
            try:
                c = F.parse(t.get("coef", "1"))
            except (ValueError, ZeroDivisionError, TypeError) as e:
                raise SchemaError(f"{tp}.coef", str(e)) from None
            m = tuple(t["exps"])
            poly[m] = F.coerce(poly.get(m, 0) + c)
        poly = {m: c for m, c in poly.items() if c != 0}
        if not poly:
            raise SchemaError(rp, "relation is zero")
        out.append(poly)
    return gb.Presentation.make(F, names, out)


def algebra_to_json(a: AugmentedAlgebra | NonunitalAlgebra) -> dict:
    from .io import blocks_to_json, complex_to_json
    out = complex_to_json(a.underlying)
    out["mult"] = blocks_to_json(a.multiplication)
    if isinstance(a, AugmentedAlgebra):
        out["unit"] = blocks_to_json(a.unit)
        out["aug"] = blocks_to_json(a.augmentation)
    return out


def algebra_from_json(v, path: str = "algebra", augmented: bool | None = None):
    """An augmented algebra when ``aug`` is present, otherwise a nonunital one."""
    from .io import SchemaError, complex_from_json, map_from_json
    C = complex_from_json(v, path)
    F = C.field
    if "mult" not in v:
        raise SchemaError(f"{path}.mult", "missing multiplication")
    mult = map_from_json(v["mult"], tensor(C, C), C, f"{path}.mult")
    is_aug = "aug" in v if augmented is None else augmented
    try:
        if not is_aug:
            return NonunitalAlgebra(C, mult)
        k = ChainComplex.point(F, 0)
        if "aug" not in v:
            raise SchemaError(f"{path}.aug", "missing augmentation")
        aug = map_from_json(v["aug"], C, k, f"{path}.aug")
        if "unit" in v:
            unit = map_from_json(v["unit"], k, C, f"{path}.unit")
        else:
            if not C.dim(0):
                raise SchemaError(path, "no degree-0 part for the unit")
            unit = ChainMap(k, C, {0: Matrix(F, F.eye(C.dim(0))[:, :1])})
        return AugmentedAlgebra(C, unit, mult, aug)
    except AlgebraError as e:
        raise SchemaError(path, str(e)) from None


def module_from_json(v, a: AugmentedAlgebra, path: str = "module") -> AlgebraModule:
    """``{"dim": n, "action": [matrix per basis element of A]}``."""
    from .io import SchemaError, matrix_from_json
    if not isinstance(v, dict) or not isinstance(v.get("dim"), int) or v["dim"] < 0:
        raise SchemaError(path, "expected {dim, action}")
    n = v["dim"]
    acts = v.get("action")
    if not isinstance(acts, list) or len(acts) != a.underlying.dim(0):
        raise SchemaError(f"{path}.action", f"expected {a.underlying.dim(0)} matrices")
    mats = tuple(matrix_from_json(a.field, m, (n, n), f"{path}.action[{i}]") for i, m in enumerate(acts))
    try:
        return AlgebraModule(a, n, mats)
    except AlgebraError as e:
        raise SchemaError(path, str(e)) from None


# examples and random generators


def acyclic_idempotent(F: Field) -> NonunitalAlgebra:
    """``du = v`` with ``v² = v`` and ``uv = vu = u``: acyclic, product not zero."""
    c = ChainComplex(F, {0: 1, 1: 1}, {1: Matrix.from_rows(F, [[1]])})

    def table(i, x, j, y):
        if i + j > 1:
            return None
        return _basis(F, 1, 0)

    return make_nonunital(c, table)


def homotopy_square_zero(F: Field) -> NonunitalAlgebra:
    """``I_0 = <x, v>``, ``I_1 = <u>``, ``du = v``, ``x² = v``: nonzero product, nullhomotopic."""
    c = ChainComplex(F, {0: 2, 1: 1}, {1: Matrix.from_rows(F, [[0], [1]])})

    def table(i, x, j, y):
        if i + j > 1:
            return None
        v = F.zeros(c.dim(i + j), 1)[:, 0]
        if i == 0 and j == 0 and x == 0 and y == 0:
            v[1] = F.coerce(1)
        return v

    return make_nonunital(c, table)


def graded_negative(F: Field) -> NonunitalAlgebra:
    """Augmentation ideal of ``k[x]/x³ ⊗ Λ(e)``: ``x²`` survives in homology."""
    return ker_cok(tensor_algebra(truncated_polynomial(F, 3), exterior(F, 1)))


def random_square_zero(F: Field, rng: np.random.Generator, max_dim: int = 4) -> NonunitalAlgebra:
    return square_zero_nonunital(F, {0: int(rng.integers(1, max_dim + 1))})


def random_presentation(F: Field, rng: np.random.Generator, nvars: int | None = None,
                        max_power: int = 3, at_origin: bool = False) -> gb.Presentation:
    """Zero-dimensional: ``x_i^{a_i}`` plus random lower-degree terms, and maybe one extra relation."""
    n = int(nvars or rng.integers(1, 3))
    rels = []
    for i in range(n):
        a = int(rng.integers(2, max_power + 1))
        lead = tuple(a if k == i else 0 for k in range(n))
        p = {lead: F.coerce(1)}
        for _ in range(int(rng.integers(0, 3))):
            m = tuple(int(x) for x in rng.integers(0, a, size=n))
            if 0 < sum(m) < a or (sum(m) == 0 and not at_origin):
                c = F.coerce(int(rng.integers(-2, 3)))
                if c != 0:
                    p[m] = F.coerce(p.get(m, 0) + c)
        rels.append({m: c for m, c in p.items() if c != 0})
    if n > 1 and rng.random() < 0.5:
        m = tuple(int(x) for x in rng.integers(0, 2, size=n))
        if sum(m) >= 2:
            rels.append({m: F.coerce(1)})
    names = [f"x{i}" for i in range(n)]
    return gb.Presentation.make(F, names, rels)


def random_local_ideal(F: Field, rng: np.random.Generator) -> NonunitalAlgebra:
    """The maximal ideal at the origin of a random local zero-dimensional presentation."""
    n = int(rng.integers(1, 3))
    rels = []
    for i in range(n):
        a = int(rng.integers(2, 4))
        p = {tuple(a if k == i else 0 for k in range(n)): F.coerce(1)}
        if n > 1 and rng.random() < 0.5:
            p[tuple(1 for _ in range(n))] = F.coerce(int(rng.integers(1, 3)))
        rels.append(p)
    return ker_cok(algebra_from_presentation(gb.Presentation.make(F, [f"x{i}" for i in range(n)], rels)))


def random_lift_triple(F: Field, rng: np.random.Generator):
    """``(A, B, φ, M)``: A local, B free of rank 2 over A, M a sum of cyclic A-modules."""
    a = int(rng.integers(1, 4))
    PA = gb.Presentation.make(F, ["t"], [{(a,): 1}])
    A, QA = quotient_algebra(PA)
    # B = A[x]/(x² + c1 x + c0) with c0, c1 in the maximal ideal
    c0 = {(int(rng.integers(1, a)) if a > 1 else 0, 0): F.coerce(int(rng.integers(-2, 3)))} if a > 1 else {}
    c1 = {(1, 0): F.coerce(int(rng.integers(-2, 3)))} if a > 1 else {}
    rel = {(0, 2): F.coerce(1)}
    for m, c in c0.items():
        if c != 0:
            rel[m] = c
    for m, c in c1.items():
        if c != 0:
            rel[(m[0], 1)] = c
    PB = gb.Presentation.make(F, ["t", "x"], [{(a, 0): 1}, rel])
    B, QB = quotient_algebra(PB)
    phi = induced_map(QA, QB, [{(1, 0): F.coerce(1)}])
    sizes = [int(rng.integers(1, a + 1)) for _ in range(int(rng.integers(1, 3)))]
    n = sum(sizes)
    J = F.zeros(n, n)
    off = 0
    for s in sizes:
        for k in range(s - 1):
            J[off + k + 1, off + k] = F.coerce(1)
        off += s
    # conjugate by a random unipotent matrix to hide the block structure
    U = F.eye(n)
    for r in range(n):
        for c in range(r + 1, n):
            U[r, c] = F.coerce(int(rng.integers(-1, 2)))
    Uinv = solve(Matrix(F, U), Matrix.identity(F, n))
    T = Matrix(F, U) @ Matrix(F, J) @ Uinv
    M = module_from_generators(A, QA, [T])
    return A, B, phi, M
