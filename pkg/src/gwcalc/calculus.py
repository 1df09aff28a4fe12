"""Cone functors, the operator T_n, excisive towers, refuters and layers.

Two evaluation routes are provided.  :class:`TnFunctor` and ``engine="direct"``
use the literal construction (punctured limit of F on the cone cube).  The
default engine rewrites F in a tensor-polynomial normal form
``⊕_j C_j ⊗ X^{⊗j}`` and applies T_n to the coefficients, so stage k of the
tower is again a normal form and comparison maps compose exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import chain
from .chain import ChainComplex, ChainMap
from .cube import (Cube, bits_of, popcount, punctured_holim,
                   punctured_holim_map, random_strongly_cocartesian, total_fiber)
from .exactalg import Field, Matrix, block, hstack, kernel_basis, rref, solve
from .functors import ConeOf, Functor, NatTrans

# cone functors


def cone_value(S, X: ChainComplex) -> ChainComplex:
    """``C_S(X)``: ``|S|`` cones on X glued along X.

    Degree d is ``X_d ⊕ X_{d-1}^{|S|}`` with differential
    ``[[d, 1, …, 1], [0, -d, 0…], …]``.
    """
    k = S if isinstance(S, int) else len(S)
    if k == 0:
        return X
    F = X.field
    degs = set(X.degrees) | {d + 1 for d in X.degrees}
    dims = {d: X.dim(d) + k * X.dim(d - 1) for d in sorted(degs)}
    diffs = {}
    for d in dims:
        if d - 1 not in dims or not dims[d] or not dims[d - 1]:
            continue
        a, b = X.dim(d), X.dim(d - 1)
        c = X.dim(d - 2)
        rs = [b] + [c] * k
        cs = [a] + [b] * k
        blocks = {(0, 0): X.diff(d)}
        for j in range(1, k + 1):
            blocks[(0, j)] = Matrix.identity(F, b)
            blocks[(j, j)] = -X.diff(d - 1)
        diffs[d] = block(F, rs, cs, blocks)
    return ChainComplex(F, dims, diffs, check=False)


def cone_value_map(S, f: ChainMap, source: ChainComplex | None = None,
                   target: ChainComplex | None = None) -> ChainMap:
    """``C_S(f)``: f on the base and on every cone coordinate."""
    k = S if isinstance(S, int) else len(S)
    if k == 0:
        return f
    A = source if source is not None else cone_value(k, f.source)
    B = target if target is not None else cone_value(k, f.target)
    F = f.field
    blocks = {}
    for d in A.degrees:
        rs = [f.target.dim(d)] + [f.target.dim(d - 1)] * k
        cs = [f.source.dim(d)] + [f.source.dim(d - 1)] * k
        bl = {(0, 0): f.block(d)}
        for j in range(1, k + 1):
            bl[(j, j)] = f.block(d - 1)
        blocks[d] = block(F, rs, cs, bl)
    return ChainMap(A, B, blocks, check=False)


def _cone_inclusion(X: ChainComplex, m: int, i: int, A: ChainComplex, B: ChainComplex) -> ChainMap:
    """``C_S(X) -> C_{S ∪ {i}}(X)`` for the bitmask ``m`` of S."""
    F = X.field
    bs, bs2 = bits_of(m), bits_of(m | 1 << i)
    blocks = {}
    for d in A.degrees:
        rs = [X.dim(d)] + [X.dim(d - 1)] * len(bs2)
        cs = [X.dim(d)] + [X.dim(d - 1)] * len(bs)
        bl = {(0, 0): Matrix.identity(F, X.dim(d))}
        for k, s in enumerate(bs):
            bl[(1 + bs2.index(s), 1 + k)] = Matrix.identity(F, X.dim(d - 1))
        blocks[d] = block(F, rs, cs, bl)
    return ChainMap(A, B, blocks, check=False)


def cone_cube(X: ChainComplex, n: int, labels: Sequence | None = None) -> Cube:
    """The strongly coCartesian cube ``S -> C_S(X)`` over ``[n] = {0, …, n}``."""
    labels = list(labels) if labels is not None else list(range(n + 1))
    N = len(labels)
    verts = [cone_value(popcount(m), X) for m in range(1 << N)]
    edges = {}
    for m in range(1 << N):
        for i in range(N):
            if not m >> i & 1:
                edges[(m, i)] = _cone_inclusion(X, m, i, verts[m], verts[m | 1 << i])
    return Cube(labels, verts, edges, check=False)


def cone_cube_map(f: ChainMap, n: int, c1: Cube, c2: Cube) -> list[ChainMap]:
    return [cone_value_map(popcount(m), f, c1.vertices[m], c2.vertices[m]) for m in range(1 << c1.dim)]


# the literal operator T_n


class TnFunctor(Functor):
    """``T_n(F)(X)``: the punctured limit of F on the cone cube of X over ``[n]``."""

    def __init__(self, F: Functor, n: int):
        if n < 0:
            raise ValueError("n must be >= 0")
        self.F = F
        self.n = n
        self._cubes: dict = {}

    def __eq__(self, other):
        return isinstance(other, TnFunctor) and other.F == self.F and other.n == self.n

    def __hash__(self):
        return hash(("Tn", self.F, self.n))

    def _fcube(self, X: ChainComplex) -> Cube:
        hit = self._cubes.get(id(X))
        if hit is not None and hit[0] is X:
            return hit[1]
        c = self.F.on_cube(cone_cube(X, self.n))
        if len(self._cubes) > 2000:
            self._cubes.clear()
        self._cubes[id(X)] = (X, c)
        return c

    def _obj(self, X):
        return punctured_holim(self._fcube(X))[0]

    def _map(self, f):
        c1, c2 = self._fcube(f.source), self._fcube(f.target)
        cc1, cc2 = cone_cube(f.source, self.n), cone_cube(f.target, self.n)
        comps = [self.F.map(ChainMap(cc1.vertices[m], cc2.vertices[m], g.blocks, check=False))
                 for m, g in enumerate(cone_cube_map(f, self.n, cc1, cc2))]
        comps = [ChainMap(c1.vertices[m], c2.vertices[m], g.blocks, check=False) for m, g in enumerate(comps)]
        return punctured_holim_map(c1, c2, comps, self.obj(f.source), self.obj(f.target))

    def theta(self, X: ChainComplex) -> ChainMap:
        """The unit ``F(X) -> T_n(F)(X)``."""
        c = self._fcube(X)
        th = punctured_holim(c)[1]
        return ChainMap(c.vertices[0], self.obj(X), th.blocks, check=False)

    @property
    def pointed(self) -> bool:
        return self.F.pointed


def t_n(F: Functor, n: int, X: ChainComplex) -> tuple[ChainComplex, ChainMap]:
    """``T_n(F)(X)`` with the unit ``θ: F(X) -> T_n(F)(X)``."""
    T = TnFunctor(F, n)
    return T.obj(X), T.theta(X)


# compression of cubes


def _colspace(M: Matrix) -> tuple[Matrix, list[int]]:
    """Canonical column basis of the span of M and its pivot rows."""
    if M.cols == 0 or M.rows == 0:
        return Matrix.zero(M.field, M.rows, 0), []
    R, piv = rref(M.T)
    return R.select_rows(range(len(piv))).T, list(piv)


def _cat(F: Field, n: int, mats: Sequence[Matrix]) -> Matrix:
    mats = [m for m in mats if m.cols]
    return hstack(F, mats, n) if mats else Matrix.zero(F, n, 0)


def _minimal_extension(V: ChainComplex, U: dict[int, Matrix]) -> dict[int, Matrix]:
    """Smallest-ish subcomplex containing the subcomplex U whose inclusion is a quasi-iso.

    Classes of U that die in V get a bounding chain; classes of V missing
    from U get a cycle representative.
    """
    F = V.field
    degs = V.degrees
    Ub = {d: _colspace(U[d])[0] if d in U else Matrix.zero(F, V.dim(d), 0) for d in degs}
    extra: dict[int, list[Matrix]] = {d: [] for d in degs}
    for d in degs:
        n = V.dim(d)
        if n == 0:
            continue
        dd = V.diff(d)
        up = V.diff(d + 1)
        Zu = Ub[d] @ kernel_basis(dd @ Ub[d]) if Ub[d].cols and dd.rows else Ub[d]
        Bu = up @ Ub[d + 1] if d + 1 in Ub and Ub[d + 1].cols else Matrix.zero(F, n, 0)
        BE = up if up.cols else Matrix.zero(F, n, 0)
        if Zu.cols and BE.cols and not BE.is_zero():
            K = kernel_basis(hstack(F, [Zu, -BE]))
            if K.cols:
                W = Zu @ K.select_rows(range(Zu.cols))
                _, piv = rref(_cat(F, n, [Bu, W]))
                pick = [p - Bu.cols for p in piv if p >= Bu.cols]
                if pick:
                    z = W.select_cols(pick)
                    c = solve(up, z)
                    extra[d + 1].append(c)
        ZE = kernel_basis(dd) if dd.rows else Matrix.identity(F, n)
        if ZE.cols:
            base = _cat(F, n, [BE, Zu])
            _, piv = rref(_cat(F, n, [base, ZE]))
            pick = [p - base.cols for p in piv if p >= base.cols]
            if pick:
                extra[d].append(ZE.select_cols(pick))
    return {d: _cat(F, V.dim(d), [Ub[d]] + extra[d]) for d in degs}


def subcompress(c: Cube, keep: Callable[[int], bool] = lambda m: False) -> tuple[Cube, list[ChainMap]]:
    """Quasi-isomorphic subcube of near-minimal size, with its inclusion.

    Vertices are processed bottom-up; each keeps the images of its
    predecessors and is then completed by :func:`_minimal_extension`.
    Vertices with ``keep(mask)`` are left whole.
    """
    F = c.field
    N = 1 << c.dim
    bases: list[dict] = [None] * N
    pivs: list[dict] = [None] * N
    verts: list[ChainComplex] = [None] * N
    for m in range(N):
        V = c.vertices[m]
        if keep(m):
            bases[m] = None
            verts[m] = V
            continue
        U = {}
        for i in bits_of(m):
            p = m ^ (1 << i)
            e = c.edges[(p, i)]
            for d in V.degrees:
                img = e.block(d) if bases[p] is None else e.block(d) @ bases[p].get(d, Matrix.zero(F, c.vertices[p].dim(d), 0))
                U.setdefault(d, []).append(img)
        U = {d: _cat(F, V.dim(d), ms) for d, ms in U.items()}
        D = _minimal_extension(V, U)
        B, P = {}, {}
        for d, M in D.items():
            B[d], P[d] = _colspace(M)
        bases[m], pivs[m] = B, P
        dims = {d: b.cols for d, b in B.items() if b.cols}
        diffs = {}
        for d in dims:
            if d - 1 in dims:
                diffs[d] = (V.diff(d) @ B[d]).select_rows(P[d - 1])
        verts[m] = ChainComplex(F, dims, diffs, check=False)
    edges = {}
    for (m, i), e in c.edges.items():
        m2 = m | 1 << i
        src, tgt = verts[m], verts[m2]
        blocks = {}
        for d in src.degrees:
            b = e.block(d)
            if bases[m] is not None:
                b = b @ bases[m][d]
            if bases[m2] is not None:
                b = b.select_rows(pivs[m2][d]) if d in pivs[m2] else Matrix.zero(F, 0, b.cols)
            blocks[d] = b
        edges[(m, i)] = ChainMap(src, tgt, blocks, check=False)
    incl = []
    for m in range(N):
        if bases[m] is None:
            incl.append(ChainMap.identity(verts[m]))
        else:
            incl.append(ChainMap(verts[m], c.vertices[m], bases[m], check=False))
    return Cube(c.index, verts, edges, check=False), incl


def dual_complex(X: ChainComplex) -> ChainComplex:
    """Linear dual, regraded as a chain complex: degree d holds ``(X_{-d})^*``."""
    dims = {-d: n for d, n in X.dims.items()}
    diffs = {}
    for e in dims:
        if e - 1 in dims:
            diffs[e] = X.diff(1 - e).T
    return ChainComplex(X.field, dims, diffs, check=False)


def dual_map(f: ChainMap, source: ChainComplex | None = None, target: ChainComplex | None = None) -> ChainMap:
    """``f^*: B^* -> A^*`` for ``f: A -> B``."""
    A = source if source is not None else dual_complex(f.target)
    B = target if target is not None else dual_complex(f.source)
    return ChainMap(A, B, {-d: m.T for d, m in f.blocks.items()}, check=False)


def dual_cube(c: Cube) -> Cube:
    """The dual cube over the opposite poset (vertex T goes to the complement of T)."""
    N = 1 << c.dim
    full = N - 1
    verts = [dual_complex(c.vertices[full ^ u]) for u in range(N)]
    edges = {}
    for u in range(N):
        for i in range(c.dim):
            if u >> i & 1:
                continue
            w = full ^ u
            v = w ^ (1 << i)
            edges[(u, i)] = dual_map(c.edges[(v, i)], verts[u], verts[u | 1 << i])
    return Cube(c.index, verts, edges, check=False)


def quotient_compress(c: Cube, keep: Callable[[int], bool] = lambda m: False) -> tuple[Cube, list[ChainMap]]:
    """Quasi-isomorphic quotient cube of near-minimal size, with the projection."""
    N = 1 << c.dim
    full = N - 1
    dc = dual_cube(c)
    sub, incl = subcompress(dc, lambda u: keep(full ^ u))
    q = dual_cube(sub)
    proj = []
    for m in range(N):
        i = incl[full ^ m]
        proj.append(ChainMap(c.vertices[m], q.vertices[m], {-d: b.T for d, b in i.blocks.items()}, check=False))
    # keep identical objects on the kept vertices
    for m in range(N):
        if keep(m):
            q.vertices[m] = c.vertices[m]
    edges = {k: ChainMap(q.vertices[k[0]], q.vertices[k[0] | 1 << k[1]], e.blocks, check=False)
             for k, e in q.edges.items()}
    q = Cube(c.index, q.vertices, edges, check=False)
    proj = [ChainMap(c.vertices[m], q.vertices[m], p.blocks, check=False) for m, p in enumerate(proj)]
    return q, proj


# the compressed tower engine


def _cone_extend(c: Cube, n: int) -> Cube:
    """The cube ``(T, S) -> C_S(c[T])`` over ``c.index + [n]``; S occupies the high bits."""
    m = c.dim
    k = n + 1
    base = len(c.index)
    index = list(c.index) + [("cone", base + j) for j in range(k)]
    verts: list = [None] * (1 << (m + k))
    for T in range(1 << m):
        for S in range(1 << k):
            verts[T | S << m] = cone_value(popcount(S), c.vertices[T])
    edges = {}
    for T in range(1 << m):
        for S in range(1 << k):
            v = T | S << m
            A = verts[v]
            for i in range(m):
                if not T >> i & 1:
                    w = v | 1 << i
                    edges[(v, i)] = cone_value_map(popcount(S), c.edges[(T, i)], A, verts[w])
            for j in range(k):
                if not S >> j & 1:
                    w = v | 1 << (m + j)
                    edges[(v, m + j)] = _cone_inclusion(c.vertices[T], S, j, A, verts[w])
    return Cube(index, verts, edges, check=False)


def holim_last(Q: Cube, k: int) -> tuple[Cube, list[ChainMap]]:
    """Blockwise punctured limit over the last k directions, with the comparison maps."""
    m = Q.dim - k
    free = list(range(m, m + k))
    faces = [Q.subcube(T, free) for T in range(1 << m)]
    hl = [punctured_holim(f) for f in faces]
    verts = [p for p, _ in hl]
    edges = {}
    for T in range(1 << m):
        for i in range(m):
            if T >> i & 1:
                continue
            T2 = T | 1 << i
            comps = [Q.edges[(T | r << m, i)] for r in range(1 << k)]
            edges[(T, i)] = punctured_holim_map(faces[T], faces[T2], comps, verts[T], verts[T2])
    thetas = [ChainMap(Q.vertices[T], verts[T], hl[T][1].blocks, check=False) for T in range(1 << m)]
    return Cube(Q.index[:m], verts, edges, check=False), thetas


def _restrict_low(c: Cube, m0: int) -> Cube:
    return c.subcube(0, list(range(m0)))


@dataclass
class EngineRun:
    """All stages of one direct run over a cube ``c``.

    ``stages[j]`` is a cube of models of ``T_n^j(F)`` on c and ``maps[j]``
    (for j >= 1) the comparison cube map from stage j-1.  Stage 0 is F(c)
    exactly.
    """

    stages: list[Cube]
    maps: list


def run_engine(F: Functor, n: int, c: Cube, depth: int, compress: bool = True) -> EngineRun:
    """Literal nested evaluation of ``T_n^j(F)`` on the cube c for ``j = 0..depth``.

    Cone extensions are strict (their size grows geometrically); limit outputs
    are replaced by compressed quotients, which keeps the comparison maps exact.
    Suitable for any :class:`Functor`, at small depth.
    """
    m0 = c.dim
    low = 1 << m0
    E = c
    for _ in range(depth):
        E = _cone_extend(E, n)
    Q = F.on_cube(E)
    stages = [_restrict_low(Q, m0)]
    maps: list = [None]
    for _ in range(depth):
        R, thetas = holim_last(Q, n + 1)
        if compress:
            R, proj = quotient_compress(R)
            thetas = [p @ t for p, t in zip(proj, thetas)]
        prev = stages[-1]
        maps.append([ChainMap(prev.vertices[T], R.vertices[T], thetas[T].blocks, check=False)
                     for T in range(low)])
        stages.append(_restrict_low(R, m0))
        Q = R
    return EngineRun(stages, maps)


# tensor-polynomial normal forms
#
# Every term is naturally isomorphic to X -> ⊕_j M_j ⊗ X^{⊗j}.  Since
# C_S(X) = C_S(k) ⊗ X, iterating T_n only changes coefficients:
# T_n^s(F)(X) ≃ ⊕_j L_j^{⊗s} ⊗ M_j ⊗ X^{⊗j} with L_j = T_n(X^{⊗j})(k).


@dataclass(frozen=True)
class PolyForm:
    """Coefficients ``M_j`` of a tensor polynomial functor."""

    field: Field
    coeffs: tuple  # sorted (j, ChainComplex)

    @property
    def parts(self) -> dict[int, ChainComplex]:
        return dict(self.coeffs)

    def coeff(self, j: int) -> ChainComplex:
        return self.parts.get(j) or ChainComplex.zero(self.field)

    @property
    def degrees(self) -> list[int]:
        return [j for j, _ in self.coeffs]

    def obj(self, X: ChainComplex) -> ChainComplex:
        return chain.direct_sum([_mono(M, X, j) for j, M in self.coeffs], field=self.field)

    def map(self, f: ChainMap, source: ChainComplex | None = None, target: ChainComplex | None = None) -> ChainMap:
        parts = [_mono_map(ChainMap.identity(M), f, j) for j, M in self.coeffs]
        return _sum_maps(parts, source or self.obj(f.source), target or self.obj(f.target))

    def on_cube(self, c: Cube) -> Cube:
        verts = [self.obj(v) for v in c.vertices]
        edges = {(m, i): self.map(e, verts[m], verts[m | 1 << i]) for (m, i), e in c.edges.items()}
        return Cube(c.index, verts, edges, check=False)


@dataclass(frozen=True)
class PolyTrans:
    """Coefficient maps ``M_j -> M'_j`` of a natural transformation of tensor polynomials."""

    source: PolyForm
    target: PolyForm
    maps: tuple  # sorted (j, ChainMap)

    def coeff(self, j: int) -> ChainMap:
        for k, f in self.maps:
            if k == j:
                return f
        return ChainMap.zero(self.source.coeff(j), self.target.coeff(j))

    def component(self, X: ChainComplex, source: ChainComplex | None = None,
                  target: ChainComplex | None = None) -> ChainMap:
        S = source or self.source.obj(X)
        T = target or self.target.obj(X)
        F = X.field
        ident = {j: ChainMap.identity(_power(X, j)) for j in set(self.source.degrees) | set(self.target.degrees)}
        blocks = {}
        sj, tj = self.source.degrees, self.target.degrees
        for d in S.degrees:
            rows = [_mono(self.target.coeff(j), X, j).dim(d) for j in tj]
            cols = [_mono(self.source.coeff(j), X, j).dim(d) for j in sj]
            bl = {}
            for a, j in enumerate(sj):
                if j in tj:
                    g = chain.tensor_map(self.coeff(j), ident[j]) if j else self.coeff(j)
                    bl[(tj.index(j), a)] = g.block(d)
            blocks[d] = block(F, rows, cols, bl)
        return ChainMap(S, T, blocks, check=False)


def _power(X: ChainComplex, j: int) -> ChainComplex:
    return ChainComplex.point(X.field, 0) if j == 0 else chain.tensor_power(X, j)


def _mono(M: ChainComplex, X: ChainComplex, j: int) -> ChainComplex:
    return M if j == 0 else chain.tensor(M, chain.tensor_power(X, j))


def _mono_map(g: ChainMap, f: ChainMap, j: int) -> ChainMap:
    return g if j == 0 else chain.tensor_map(g, chain.tensor_power_map(f, j))


def _sum_maps(parts: Sequence[ChainMap], S: ChainComplex, T: ChainComplex) -> ChainMap:
    if not parts:
        return ChainMap.zero(S, T)
    return ChainMap(S, T, chain.direct_sum_map(parts).blocks, check=False)


def _poly(field: Field, parts: dict) -> PolyForm:
    return PolyForm(field, tuple(sorted(parts.items(), key=lambda kv: kv[0])))


def _zero_poly_keys(field: Field, keys) -> dict:
    return {j: ChainComplex.zero(field) for j in keys}


def normal_form(F: Functor, field: Field) -> PolyForm:
    """Tensor-polynomial coefficients of a term functor."""
    from . import functors as fn

    k = ChainComplex.point(field, 0)
    if isinstance(F, fn.Identity):
        return _poly(field, {1: k})
    if isinstance(F, fn.Constant):
        return _poly(field, {0: F.value})
    if isinstance(F, fn.TensorPower):
        return _poly(field, {F.k: k})
    if isinstance(F, fn.Shift):
        raise fn.FunctorError("a bare Shift term needs an argument; use Compose(Shift, G)")
    if isinstance(F, fn.TensorWith):
        return _poly(field, {1: F.value})
    if isinstance(F, fn.DirectSum):
        forms = [normal_form(t, field) for t in F.terms]
        keys = sorted({j for f in forms for j in f.degrees})
        return _poly(field, {j: chain.direct_sum([f.coeff(j) for f in forms], field=field) for j in keys})
    if isinstance(F, fn.Compose):
        if isinstance(F.outer, fn.Shift):
            inner = normal_form(F.inner, field)
            return _poly(field, {j: chain.shift(M, F.outer.n) for j, M in inner.coeffs})
        return _compose_forms(normal_form(F.outer, field), normal_form(F.inner, field))
    if isinstance(F, (fn.FiberOf, fn.ConeOf)):
        b = normal_transform(F.transform, field)
        keys = sorted(set(b.source.degrees) | set(b.target.degrees))
        op = chain.fiber if isinstance(F, fn.FiberOf) else chain.cone
        return _poly(field, {j: op(b.coeff(j)) for j in keys})
    raise fn.FunctorError(f"{type(F).__name__} has no tensor-polynomial normal form")


def _compose_forms(outer: PolyForm, inner: PolyForm) -> PolyForm:
    from itertools import product

    field = outer.field
    parts: dict[int, list[ChainComplex]] = {}
    for j, M in outer.coeffs:
        if j == 0:
            parts.setdefault(0, []).append(M)
            continue
        for word in product(inner.coeffs, repeat=j):
            C = M
            for _, N in word:
                C = chain.tensor(C, N)
            parts.setdefault(sum(i for i, _ in word), []).append(C)
    return _poly(field, {J: chain.direct_sum(cs, field=field) for J, cs in parts.items()})


def normal_transform(a: NatTrans, field: Field) -> PolyTrans:
    """Coefficient maps of a library natural transformation."""
    S, T = normal_form(a.source, field), normal_form(a.target, field)
    keys = sorted(set(S.degrees) | set(T.degrees))
    r = a.rule
    maps = {}
    for j in keys:
        A, B = S.coeff(j), T.coeff(j)
        if r == "zero":
            f = ChainMap.zero(A, B)
        elif r == "identity":
            f = ChainMap.identity(A)
        elif r == "scalar":
            f = ChainMap.identity(A).scale(field.parse(str(a.scalar)))
        elif r in ("inclusion", "diagonal"):
            parts = [normal_form(t, field).coeff(j) for t in a.target.terms]
            idx = [a.index] if r == "inclusion" else range(len(parts))
            f = ChainMap.zero(A, B)
            for i in idx:
                f = f + ChainMap(A, B, chain.sum_inclusion(parts, i).blocks, check=False)
        elif r in ("projection", "fold"):
            parts = [normal_form(t, field).coeff(j) for t in a.source.terms]
            idx = [a.index] if r == "projection" else range(len(parts))
            f = ChainMap.zero(A, B)
            for i in idx:
                f = f + ChainMap(A, B, chain.sum_projection(parts, i).blocks, check=False)
        elif r == "fiber_projection":
            b = normal_transform(a.source.transform, field).coeff(j)
            f = ChainMap(A, B, chain.fiber_projection(b).blocks, check=False)
        elif r == "cone_inclusion":
            b = normal_transform(a.target.transform, field).coeff(j)
            f = ChainMap(A, B, chain.cone_inclusion(b).blocks, check=False)
        else:
            raise ValueError(r)
        maps[j] = f
    return PolyTrans(S, T, tuple(sorted(maps.items(), key=lambda kv: kv[0])))


# minimal models


def minimal_model(L: ChainComplex) -> tuple[ChainComplex, ChainMap, ChainMap]:
    """``(H, π, ι)``: H has zero differential, ``π: L -> H`` and ``ι: H -> L`` are
    quasi-isomorphisms with ``π ∘ ι = id``."""
    F = L.field
    dims, pi, io = {}, {}, {}
    for d in L.degrees:
        n = L.dim(d)
        Z = kernel_basis(L.diff(d)) if L.dim(d - 1) else Matrix.identity(F, n)
        B = L.diff(d + 1) if L.dim(d + 1) else Matrix.zero(F, n, 0)
        Bb = _colspace(B)[0]
        _, piv = rref(_cat(F, n, [Bb, Z]))
        R = Z.select_cols([p - Bb.cols for p in piv if p >= Bb.cols])
        _, piv2 = rref(_cat(F, n, [Bb, R, Matrix.identity(F, n)]))
        C = Matrix.identity(F, n).select_cols([p - Bb.cols - R.cols for p in piv2 if p >= Bb.cols + R.cols])
        basis = _cat(F, n, [Bb, R, C])
        inv = solve(basis, Matrix.identity(F, n))
        dims[d] = R.cols
        pi[d] = inv.select_rows(range(Bb.cols, Bb.cols + R.cols))
        io[d] = R
    H = ChainComplex(F, dims, {}, check=False)
    return H, ChainMap(L, H, pi, check=False), ChainMap(H, L, io, check=False)


# stages via normal forms


@dataclass
class _Unit:
    """Minimal model of ``L_j = T_n(X^{⊗j})(k)`` with the unit ``k -> L_j``."""

    H: ChainComplex
    theta: ChainMap
    pi: ChainMap
    iota: ChainMap


_UNITS: dict = {}


def unit_model(field: Field, n: int, j: int) -> _Unit:
    key = (field, n, j)
    if key not in _UNITS:
        from .functors import Constant, TensorPower

        k = ChainComplex.point(field, 0)
        G = Constant(k) if j == 0 else TensorPower(j)
        L, th = t_n(G, n, k)
        H, pi, io = minimal_model(L)
        _UNITS[key] = _Unit(H, ChainMap(k, H, (pi @ th).blocks, check=False), pi, io)
    return _UNITS[key]


def _lpow(u: _Unit, s: int) -> ChainComplex:
    return ChainComplex.point(u.H.field, 0) if s == 0 else chain.tensor_power(u.H, s)


def stage_form(P: PolyForm, n: int, s: int) -> PolyForm:
    """Coefficients of ``T_n^s`` applied to P."""
    if s == 0:
        return P
    parts = {}
    for j, M in P.coeffs:
        parts[j] = chain.tensor(_lpow(unit_model(P.field, n, j), s), M)
    return _poly(P.field, parts)


def stage_comparison(P: PolyForm, n: int, s: int) -> PolyTrans:
    """``θ: T_n^{s-1}(P) -> T_n^s(P)`` on coefficients (new factor on the right of L^{⊗(s-1)})."""
    A, B = stage_form(P, n, s - 1), stage_form(P, n, s)
    maps = {}
    for j, M in P.coeffs:
        u = unit_model(P.field, n, j)
        prev = _lpow(u, s - 1)
        t = chain.tensor_map(ChainMap.identity(prev), u.theta) if s > 1 else u.theta
        g = t if s > 1 else ChainMap(ChainComplex.point(P.field, 0), u.H, t.blocks, check=False)
        f = chain.tensor_map(g, ChainMap.identity(M))
        maps[j] = ChainMap(A.coeff(j), B.coeff(j), f.blocks, check=False)
    return PolyTrans(A, B, tuple(sorted(maps.items(), key=lambda kv: kv[0])))


def composite_unit(P: PolyForm, n: int, s: int) -> PolyTrans:
    """``P -> T_n^s(P)``: the composite of the comparisons, as one coefficient map."""
    A, B = P, stage_form(P, n, s)
    maps = {}
    for j, M in P.coeffs:
        if s == 0:
            maps[j] = ChainMap.identity(M)
            continue
        u = unit_model(P.field, n, j)
        t = chain.tensor_power_map(u.theta, s)
        f = chain.tensor_map(t, ChainMap.identity(M))
        maps[j] = ChainMap(A.coeff(j), B.coeff(j), f.blocks, check=False)
    return PolyTrans(A, B, tuple(sorted(maps.items(), key=lambda kv: kv[0])))


def restriction_comparison(P: PolyForm, n: int, s: int) -> PolyTrans:
    """``T_n^s(P) -> T_{n-1}^s(P)`` induced by restricting punctured limits along [n-1] ⊂ [n]."""
    A, B = stage_form(P, n, s), stage_form(P, n - 1, s)
    maps = {}
    for j, M in P.coeffs:
        if s == 0:
            maps[j] = ChainMap.identity(M)
            continue
        r = _unit_restriction(P.field, n, j)
        f = chain.tensor_map(chain.tensor_power_map(r, s), ChainMap.identity(M))
        maps[j] = ChainMap(A.coeff(j), B.coeff(j), f.blocks, check=False)
    return PolyTrans(A, B, tuple(sorted(maps.items(), key=lambda kv: kv[0])))


def _unit_restriction(field: Field, n: int, j: int) -> ChainMap:
    """Minimal-model map ``L_j^{(n)} -> L_j^{(n-1)}`` from projecting onto the summands over [n-1]."""
    from .functors import Constant, TensorPower

    k = ChainComplex.point(field, 0)
    G = Constant(k) if j == 0 else TensorPower(j)
    big = G.on_cube(cone_cube(k, n))
    small = G.on_cube(cone_cube(k, n - 1))
    Pb, _ = punctured_holim(big)
    Ps, _ = punctured_holim(small)
    # the smaller limit's summands are the vertices of the face over [n-1]
    r = _restrict_punctured(big, small, Pb, Ps)
    ub, us = unit_model(field, n, j), unit_model(field, n - 1, j)
    return ChainMap(ub.H, us.H, (us.pi @ ChainMap(Pb, Ps, r.blocks, check=False)
                                 @ ChainMap(ub.H, Pb, ub.iota.blocks, check=False)).blocks, check=False)


def _restrict_punctured(big: Cube, small: Cube, Pb: ChainComplex, Ps: ChainComplex) -> ChainMap:
    """Projection of the punctured limit of ``big`` onto the down-closed face ``small``."""
    from .cube import _fiber_layout

    F = big.field
    lb = _fiber_layout(big, range(1, 1 << big.dim))
    ls = _fiber_layout(small, range(1, 1 << small.dim))
    blocks = {}
    for d, parts in lb.items():
        out = F.zeros(Ps.dim(d + 1), Pb.dim(d + 1))
        for m, (o1, n1) in parts.items():
            if m < (1 << small.dim) and d in ls and m in ls[d]:
                o2, _ = ls[d][m]
                out[o2:o2 + n1, o1:o1 + n1] = F.eye(n1)
        blocks[d + 1] = Matrix(F, out)
    return ChainMap(Pb, Ps, blocks, check=False)


# towers


@dataclass
class Stage:
    k: int
    value: ChainComplex
    comparison: ChainMap | None


@dataclass
class TowerReport:
    """Stages ``T_n^k(F)(X)`` with comparison maps from stage k-1.

    ``stage`` is the first k such that the comparisons into stages k and
    k+1 are quasi-isomorphisms in the window; the approximation is stage k.
    """

    n: int
    stages: list[Stage]
    window: tuple[int, int]
    stabilized: bool
    stage: int | None
    form: PolyForm | None = field(default=None, repr=False)

    @property
    def value(self) -> ChainComplex:
        k = self.stage if self.stage is not None else len(self.stages) - 1
        return self.stages[k].value

    def homology_table(self, k: int) -> dict[int, int]:
        V = self.stages[k].value
        lo, hi = self.window
        return {d: V.homology_dim(d) for d in range(lo, hi + 1)}


def default_window(X: ChainComplex, n: int) -> tuple[int, int]:
    lo = X.lo if X.lo is not None else 0
    hi = X.hi if X.hi is not None else 0
    return lo - (n + 2), hi + (n + 2)


def _stabilization(qis: list[bool]) -> int | None:
    """``qis[k]`` says whether the comparison into stage k is a window quasi-iso (k >= 1)."""
    for k in range(1, len(qis) - 1):
        if qis[k] and qis[k + 1]:
            return k
    return None


def tower(F: Functor, n: int, X: ChainComplex, window: tuple[int, int] | None = None,
          max_stages: int = 32, min_stages: int = 0, engine: str = "auto") -> TowerReport:
    """Iterate T_n on F at X until two consecutive comparisons are window quasi-isos.

    ``engine`` is ``"poly"`` (tensor-polynomial normal form), ``"direct"``
    (literal nested cones, any Functor, small depth) or ``"auto"``.
    """
    if max_stages < 1:
        raise ValueError("max_stages must be >= 1")
    window = tuple(window) if window is not None else default_window(X, n)
    lo, hi = window
    if engine == "auto":
        try:
            P = normal_form(F, X.field)
            engine = "poly"
        except Exception:
            engine = "direct"
    if engine == "poly":
        P = normal_form(F, X.field)
        stages = [Stage(0, P.obj(X), None)]
        qis = [False]
        stab = None
        for k in range(1, max_stages + 1):
            V = stage_form(P, n, k).obj(X)
            th = stage_comparison(P, n, k).component(X, stages[-1].value, V)
            stages.append(Stage(k, V, th))
            qis.append(chain.is_quasi_iso_in_window(th, lo, hi))
            stab = _stabilization(qis)
            if stab is not None and k >= min_stages:
                break
        return TowerReport(n, stages, window, stab is not None, stab, P)
    if engine != "direct":
        raise ValueError(f"unknown engine {engine!r}")
    c0 = Cube([], [X], {}, check=False)
    stab = None
    for depth in range(1, max_stages + 1):
        run = run_engine(F, n, c0, depth)
        stages = [Stage(0, run.stages[0].vertices[0], None)]
        qis = [False]
        for k in range(1, depth + 1):
            th = run.maps[k][0]
            stages.append(Stage(k, run.stages[k].vertices[0], th))
            qis.append(chain.is_quasi_iso_in_window(th, lo, hi))
        stab = _stabilization(qis)
        if stab is not None and depth >= min_stages:
            break
    return TowerReport(n, stages, window, stab is not None, stab)


def approximation_form(F: Functor, n: int, objects: Sequence[ChainComplex],
                       window: tuple[int, int] | None = None, max_stages: int = 32) -> tuple[PolyForm, int, bool]:
    """Normal form of the stabilized stage shared by all ``objects``.

    Returns ``(P^n form, stage, stabilized)``.  The shared stage is the
    largest stabilization stage over the objects.
    """
    P = normal_form(F, objects[0].field)
    s, ok = 0, True
    for X in objects:
        rep = tower(F, n, X, window, max_stages, engine="poly")
        ok = ok and rep.stabilized
        s = max(s, rep.stage if rep.stage is not None else len(rep.stages) - 1)
    return stage_form(P, n, s), s, ok


def tower_on_cube(F: Functor, n: int, c: Cube, window: tuple[int, int] | None = None,
                  max_stages: int = 32) -> tuple[Cube, int, bool]:
    """The stabilized approximation evaluated on a cube, with one shared stage."""
    if window is None:
        window = _cube_window(c, n)
    Pn, s, ok = approximation_form(F, n, c.vertices, window, max_stages)
    return Pn.on_cube(c), s, ok


def _cube_window(c: Cube, n: int) -> tuple[int, int]:
    los = [v.lo for v in c.vertices if v.lo is not None]
    his = [v.hi for v in c.vertices if v.hi is not None]
    return (min(los, default=0) - (n + 2), max(his, default=0) + (n + 2))


def idempotence_check(F: Functor, n: int, X: ChainComplex, window: tuple[int, int] | None = None,
                      max_stages: int = 32) -> tuple[bool, dict, dict]:
    """Compare ``P^n(F)(X)`` with ``P^n(P^n(F))(X)`` degreewise in the window.

    The second tower is run on the normal form of the stabilized stage.
    Returns ``(equal, table1, table2)``.
    """
    rep = tower(F, n, X, window, max_stages)
    lo, hi = rep.window
    Pn = stage_form(rep.form, n, rep.stage if rep.stage is not None else len(rep.stages) - 1)
    rep2 = _poly_tower(Pn, n, X, rep.window, max_stages)
    t1 = {d: rep.value.homology_dim(d) for d in range(lo, hi + 1)}
    t2 = {d: rep2.value.homology_dim(d) for d in range(lo, hi + 1)}
    return t1 == t2 and rep.stabilized and rep2.stabilized, t1, t2


def _poly_tower(P: PolyForm, n: int, X: ChainComplex, window, max_stages) -> TowerReport:
    lo, hi = window
    stages = [Stage(0, P.obj(X), None)]
    qis = [False]
    stab = None
    for k in range(1, max_stages + 1):
        V = stage_form(P, n, k).obj(X)
        th = stage_comparison(P, n, k).component(X, stages[-1].value, V)
        stages.append(Stage(k, V, th))
        qis.append(chain.is_quasi_iso_in_window(th, lo, hi))
        stab = _stabilization(qis)
        if stab is not None:
            break
    return TowerReport(n, stages, tuple(window), stab is not None, stab, P)


# excisiveness


def is_cartesian_in_window(c: Cube, window: tuple[int, int] | None) -> bool:
    """Total fiber acyclic (in degrees ``lo .. hi - dim`` when a window is given)."""
    tf = total_fiber(c)
    if window is None:
        return tf.is_acyclic()
    lo, hi = window
    return all(tf.homology_dim(d) == 0 for d in range(lo, hi - c.dim + 1))


@dataclass
class ExcisiveVerdict:
    passed: bool
    trials: int
    failures: int
    witness: Cube | None
    witness_image: Cube | None
    witness_seed: int | None


def is_n_excisive(F: Functor | Callable[[Cube], Cube], n: int, trials: int = 50, seed: int = 0,
                  budget: int = 2, field: Field | None = None, window: tuple[int, int] | None = None,
                  stop_at_first: bool = True) -> ExcisiveVerdict:
    """Randomized refuter: apply F to random strongly coCartesian (n+1)-cubes and test Cartesianness.

    A pass is evidence, not proof.  ``F`` may be a functor or any cube
    evaluator.  The cube for trial t is generated from seed ``seed + t``.
    """
    from .exactalg import GF

    field = field or GF(5)
    apply = F.on_cube if isinstance(F, Functor) else F
    failures = 0
    witness = image = wseed = None
    for t in range(trials):
        c = random_strongly_cocartesian(seed + t, n + 1, budget, field)
        out = apply(c)
        if not is_cartesian_in_window(out, window):
            failures += 1
            if witness is None:
                witness, image, wseed = c, out, seed + t
            if stop_at_first:
                return ExcisiveVerdict(False, t + 1, failures, witness, image, wseed)
    return ExcisiveVerdict(failures == 0, trials, failures, witness, image, wseed)


# relative approximation


@dataclass
class RelativeReport:
    """``P^n_G(F)(X)``: the fiber of ``G(X) -> P^n(cok α)(X)``, with its map to G(X)."""

    value: ChainComplex
    to_target: ChainMap
    cokernel_tower: TowerReport
    stage: int
    stabilized: bool


def _relative_data(a: NatTrans, n: int, field: Field, s: int) -> PolyTrans:
    """Coefficients of ``G -> cok α -> T_n^s(cok α)``."""
    C = ConeOf(a)
    inc = normal_transform(NatTrans(a.target, C, "cone_inclusion"), field)
    P = normal_form(C, field)
    u = composite_unit(P, n, s)
    maps = {}
    for j, _ in inc.source.coeffs:
        g = u.coeff(j) @ ChainMap(inc.source.coeff(j), P.coeff(j), inc.coeff(j).blocks, check=False)
        maps[j] = g
    return PolyTrans(inc.source, u.target, tuple(sorted(maps.items(), key=lambda kv: kv[0])))


def relative_tower(a: NatTrans, n: int, X: ChainComplex, window: tuple[int, int] | None = None,
                   max_stages: int = 32) -> RelativeReport:
    """``P^n_G(F)(X)`` for ``α: F -> G``, with cok α computed pointwise as the cone."""
    C = ConeOf(a)
    rep = tower(C, n, X, window, max_stages, engine="poly")
    s = rep.stage if rep.stage is not None else len(rep.stages) - 1
    g = _relative_data(a, n, X.field, s).component(X)
    return RelativeReport(chain.fiber(g), chain.fiber_projection(g), rep, s, rep.stabilized)


def relative_on_cube(a: NatTrans, n: int, c: Cube, window: tuple[int, int] | None = None,
                     max_stages: int = 32) -> tuple[Cube, int]:
    """``P^n_G(F)`` evaluated on a cube with a shared stage."""
    if window is None:
        window = _cube_window(c, n)
    _, s, _ = approximation_form(ConeOf(a), n, c.vertices, window, max_stages)
    data = _relative_data(a, n, c.field, s)
    G, T = data.source, data.target
    gs = [data.component(v) for v in c.vertices]
    verts = [chain.fiber(g) for g in gs]
    edges = {}
    for (m, i), e in c.edges.items():
        m2 = m | 1 << i
        a_ = G.map(e, gs[m].source, gs[m2].source)
        b_ = T.map(e, gs[m].target, gs[m2].target)
        f = chain.fiber_map(gs[m], gs[m2], a_, b_, check=False)
        edges[(m, i)] = ChainMap(verts[m], verts[m2], f.blocks, check=False)
    return Cube(c.index, verts, edges, check=False), s


# layers


@dataclass
class LayerReport:
    value: ChainComplex
    comparison: ChainMap
    stage: int
    stabilized: bool


def layer(F: Functor, n: int, X: ChainComplex, window: tuple[int, int] | None = None,
          max_stages: int = 32) -> LayerReport:
    """``R^n(F)(X)``: fiber of the stabilized restriction ``P^n(F)(X) -> P^{n-1}(F)(X)``."""
    if n < 1:
        raise ValueError("layers need n >= 1")
    window = tuple(window) if window is not None else default_window(X, n)
    r1 = tower(F, n, X, window, max_stages, engine="poly")
    r0 = tower(F, n - 1, X, window, max_stages, engine="poly")
    last = lambda r: r.stage if r.stage is not None else len(r.stages) - 1  # noqa: E731
    s = max(last(r1), last(r0))
    P = r1.form
    g = restriction_comparison(P, n, s).component(X)
    return LayerReport(chain.fiber(g), g, s, r1.stabilized and r0.stabilized)
