"""Strict cubical diagrams of chain complexes.

A cube over an ordered index set ``S`` stores one complex per subset and one
chain map per covering inclusion ``T -> T ∪ {s}``.  Subsets are bitmasks
internally (bit ``i`` is ``index[i]``); public entry points also accept
iterables of labels.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .chain import (
    ChainComplex,
    ChainMap,
    ChainMapError,
    cone,
    cone_inclusion,
    cone_map,
    direct_sum,
    fiber,
    fiber_map,
    fiber_projection,
    shift,
)
from .exactalg import Field, Matrix, block, hstack, kernel_basis, rank, row_space_basis, solve, vstack


class CubeError(ValueError):
    pass


def popcount(m: int) -> int:
    return bin(m).count("1")


def bits_of(m: int) -> list[int]:
    out = []
    i = 0
    while m:
        if m & 1:
            out.append(i)
        m >>= 1
        i += 1
    return out


class Cube:
    """A strictly commuting ``S``-cube of chain complexes."""

    def __init__(self, index: Sequence[Hashable], vertices: Sequence[ChainComplex],
                 edges: Mapping[tuple[int, int], ChainMap], check: bool = True):
        self.index = tuple(index)
        if len(set(self.index)) != len(self.index):
            raise CubeError("repeated index label")
        n = len(self.index)
        if len(vertices) != 1 << n:
            raise CubeError(f"expected {1 << n} vertices, got {len(vertices)}")
        self.vertices = list(vertices)
        self.edges = dict(edges)
        fields = {v.field for v in self.vertices}
        if len(fields) != 1:
            raise CubeError("vertices over different fields")
        self.field: Field = fields.pop()
        if check:
            self.validate()

    @property
    def dim(self) -> int:
        return len(self.index)

    def mask(self, labels: int | Iterable[Hashable]) -> int:
        if isinstance(labels, int):
            return labels
        m = 0
        for s in labels:
            try:
                m |= 1 << self.index.index(s)
            except ValueError:
                raise CubeError(f"unknown label {s!r}") from None
        return m

    def labels(self, m: int) -> frozenset:
        return frozenset(self.index[i] for i in bits_of(m))

    def vertex(self, T) -> ChainComplex:
        return self.vertices[self.mask(T)]

    def edge(self, T, s) -> ChainMap:
        m = self.mask(T)
        i = s if isinstance(s, int) and not isinstance(s, bool) and s not in self.index else self.index.index(s)
        return self.edges[(m, i)]

    def validate(self):
        n = self.dim
        for m in range(1 << n):
            for i in range(n):
                if m >> i & 1:
                    continue
                e = self.edges.get((m, i))
                where = f"{self._fmt(m)} -> {self._fmt(m | 1 << i)}"
                if e is None:
                    raise CubeError(f"missing edge {where}")
                if e.source is not self.vertices[m] and e.source != self.vertices[m]:
                    raise CubeError(f"edge {where} has wrong source")
                if e.target is not self.vertices[m | 1 << i] and e.target != self.vertices[m | 1 << i]:
                    raise CubeError(f"edge {where} has wrong target")
        bad = self.noncommuting_face()
        if bad is not None:
            m, i, j = bad
            raise CubeError(f"face at {self._fmt(m)} in directions {self.index[i]!r},{self.index[j]!r} does not commute")

    def noncommuting_face(self) -> tuple[int, int, int] | None:
        n = self.dim
        for m in range(1 << n):
            free = [i for i in range(n) if not m >> i & 1]
            for i, j in combinations(free, 2):
                a = self.edges[(m | 1 << i, j)] @ self.edges[(m, i)]
                b = self.edges[(m | 1 << j, i)] @ self.edges[(m, j)]
                if a != b:
                    return m, i, j
        return None

    def _fmt(self, m: int) -> str:
        return subset_key(self.labels(m), self.index)

    def map_between(self, src: int, tgt: int) -> ChainMap:
        """Composite along the inclusion ``src ⊆ tgt`` (bitmasks)."""
        if src & ~tgt:
            raise CubeError("not an inclusion")
        f = ChainMap.identity(self.vertices[src])
        cur = src
        for i in bits_of(tgt & ~src):
            f = self.edges[(cur, i)] @ f
            cur |= 1 << i
        return f

    def subcube(self, fixed: int, free: Sequence[int]) -> "Cube":
        """Restriction to ``{fixed ∪ U : U ⊆ free}``; ``free`` are bit positions."""
        free = list(free)
        verts = []
        for r in range(1 << len(free)):
            verts.append(self.vertices[fixed | _embed(r, free)])
        edges = {}
        for r in range(1 << len(free)):
            base = fixed | _embed(r, free)
            for k, i in enumerate(free):
                if not r >> k & 1:
                    edges[(r, k)] = self.edges[(base, i)]
        return Cube([self.index[i] for i in free], verts, edges, check=False)

    def faces(self, k: int = 2):
        """Yield ``(fixed, free_bits)`` for every k-dimensional face."""
        n = self.dim
        for free in combinations(range(n), k):
            fm = sum(1 << i for i in free)
            rest = [i for i in range(n) if not fm >> i & 1]
            for r in range(1 << len(rest)):
                yield _embed(r, rest), list(free)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Cube):
            return NotImplemented
        return (self.index == other.index and self.vertices == other.vertices
                and all(self.edges[k] == other.edges[k] for k in self.edges))

    __hash__ = None

    def __repr__(self) -> str:
        return f"Cube({list(self.index)}, total_dim={sum(v.total_dim for v in self.vertices)})"


def _embed(r: int, positions: Sequence[int]) -> int:
    m = 0
    for k, i in enumerate(positions):
        if r >> k & 1:
            m |= 1 << i
    return m


def subset_key(labels: Iterable[Hashable], order: Sequence[Hashable] | None = None) -> str:
    labels = list(labels)
    if order is not None:
        labels.sort(key=list(order).index)
    else:
        labels.sort()
    return "{" + ",".join(str(s) for s in labels) + "}"


def constant_cube(c: ChainComplex, index: Sequence[Hashable]) -> Cube:
    n = len(index)
    ident = ChainMap.identity(c)
    edges = {(m, i): ident for m in range(1 << n) for i in range(n) if not m >> i & 1}
    return Cube(index, [c] * (1 << n), edges, check=False)


def from_map(f: ChainMap, label: Hashable = "0") -> Cube:
    return Cube([label], [f.source, f.target], {(0, 0): f}, check=False)


# total fibers and cofibers


def _total_fiber_over(c: Cube, masks: Sequence[int]) -> tuple[ChainComplex, dict[int, dict[int, int]]]:
    """Total fiber built from the vertices in ``masks`` (closed under the edges used).

    Degree d is the sum over T of ``X(T)_{d+|T|}``; the differential is
    ``(-1)^{|T|} d`` on each summand plus ``(-1)^{#{t in T : t < s}}`` times
    the edge ``T -> T ∪ {s}``.
    """
    F = c.field
    mset = set(masks)
    layout: dict[int, list[tuple[int, int]]] = {}
    for m in sorted(masks):
        k = popcount(m)
        for e in c.vertices[m].degrees:
            layout.setdefault(e - k, []).append((m, c.vertices[m].dim(e)))
    offsets: dict[int, dict[int, int]] = {}
    dims = {}
    for d, parts in layout.items():
        off = 0
        offsets[d] = {}
        for m, n in parts:
            offsets[d][m] = off
            off += n
        dims[d] = off
    diffs = {}
    for d in layout:
        if d - 1 not in layout:
            continue
        out = F.zeros(dims[d - 1], dims[d])
        tgt = offsets[d - 1]
        nonzero = False
        for m, n in layout[d]:
            k = popcount(m)
            X = c.vertices[m]
            o = offsets[d][m]
            if m in tgt:
                dm = X.diff(d + k)
                if not dm.is_zero():
                    blk = dm if k % 2 == 0 else -dm
                    t = tgt[m]
                    out[t:t + blk.rows, o:o + n] = blk.a
                    nonzero = True
            for i in range(c.dim):
                if m >> i & 1:
                    continue
                m2 = m | 1 << i
                if m2 not in mset or m2 not in tgt:
                    continue
                e = c.edges[(m, i)].block(d + k)
                if e.is_zero():
                    continue
                if popcount(m & ((1 << i) - 1)) % 2:
                    e = -e
                t = tgt[m2]
                out[t:t + e.rows, o:o + n] = e.a
                nonzero = True
        if nonzero:
            diffs[d] = Matrix(F, out)
    return ChainComplex(F, dims, diffs, check=False), offsets


def total_fiber(c: Cube) -> ChainComplex:
    """Total homotopy fiber; for a 0-cube this is the vertex itself."""
    return _total_fiber_over(c, range(1 << c.dim))[0]


def _reduce_direction(c: Cube, i: int, op: str) -> Cube:
    """The (n-1)-cube of fibers/cones of the edges in direction i."""
    rest = [j for j in range(c.dim) if j != i]
    verts = []
    maps = {}
    for r in range(1 << len(rest)):
        m = _embed(r, rest)
        e = c.edges[(m, i)]
        maps[r] = e
        verts.append(fiber(e) if op == "fiber" else cone(e))
    edges = {}
    for r in range(1 << len(rest)):
        m = _embed(r, rest)
        for k, j in enumerate(rest):
            if r >> k & 1:
                continue
            r2 = r | 1 << k
            a = c.edges[(m, j)]
            b = c.edges[(m | 1 << i, j)]
            f, g = maps[r], maps[r2]
            mk = fiber_map if op == "fiber" else cone_map
            edges[(r, k)] = _retarget(mk(f, g, a, b, check=False), verts[r], verts[r2])
    return Cube([c.index[j] for j in rest], verts, edges, check=False)


def _retarget(f: ChainMap, src: ChainComplex, tgt: ChainComplex) -> ChainMap:
    return ChainMap(src, tgt, f.blocks, check=False)


def total_fiber_iterated(c: Cube, order: Sequence[Hashable] | None = None) -> ChainComplex:
    """Total fiber as iterated fibers along directions in ``order``."""
    order = list(order) if order is not None else list(c.index)
    cur = c
    for s in order:
        cur = _reduce_direction(cur, cur.index.index(s), "fiber")
    return cur.vertices[0]


def total_cofiber(c: Cube, order: Sequence[Hashable] | None = None) -> ChainComplex:
    """Total homotopy cofiber as iterated cones along ``order`` (index order by default)."""
    order = list(order) if order is not None else list(c.index)
    cur = c
    for s in order:
        cur = _reduce_direction(cur, cur.index.index(s), "cone")
    return cur.vertices[0]


def is_cartesian(c: Cube) -> bool:
    if c.dim == 0:
        raise CubeError("0-cubes are weak equivalences; use is_quasi_iso")
    return total_fiber(c).is_acyclic()


def is_cocartesian(c: Cube) -> bool:
    if c.dim == 0:
        raise CubeError("0-cubes are weak equivalences; use is_quasi_iso")
    return total_cofiber(c).is_acyclic()


def is_strongly_cocartesian(c: Cube) -> bool:
    """Every 2-dimensional face is coCartesian (vacuous below dimension 2)."""
    return all(is_cocartesian(c.subcube(fixed, free)) for fixed, free in c.faces(2))


def is_strongly_cartesian(c: Cube) -> bool:
    return all(is_cartesian(c.subcube(fixed, free)) for fixed, free in c.faces(2))


def first_noncocartesian_face(c: Cube) -> tuple[int, list[int]] | None:
    for fixed, free in c.faces(2):
        if not is_cocartesian(c.subcube(fixed, free)):
            return fixed, free
    return None


# punctured homotopy limits


def punctured_holim(c: Cube) -> tuple[ChainComplex, ChainMap]:
    """Homotopy limit of the cube minus its initial vertex, with the comparison
    map from the initial vertex.

    Modeled as ``Σ`` of the total fiber of the nonempty part; the comparison
    sends ``x`` to ``(e_s(x))_s`` in the singleton summands.
    """
    if c.dim == 0:
        raise CubeError("punctured limit needs dimension >= 1")
    masks = list(range(1, 1 << c.dim))
    tf, offsets = _total_fiber_over(c, masks)
    P = shift(tf, 1)
    X0 = c.vertices[0]
    F = c.field
    blocks = {}
    for d in X0.degrees:
        if d - 1 not in offsets:
            continue
        out = F.zeros(P.dim(d), X0.dim(d))
        for i in range(c.dim):
            m = 1 << i
            if m in offsets[d - 1]:
                e = c.edges[(0, i)].block(d)
                o = offsets[d - 1][m]
                out[o:o + e.rows, :] = e.a
        blocks[d] = Matrix(F, out)
    return P, ChainMap(X0, P, blocks, check=False)


def punctured_holim_map(c1: Cube, c2: Cube, comps: Sequence[ChainMap],
                        P1: ChainComplex | None = None, P2: ChainComplex | None = None) -> ChainMap:
    """Map of punctured limits induced by a cube map ``comps[m]: c1[m] -> c2[m]``."""
    masks = list(range(1, 1 << c1.dim))
    if P1 is None:
        P1 = punctured_holim(c1)[0]
    if P2 is None:
        P2 = punctured_holim(c2)[0]
    F = c1.field
    lay1 = _fiber_layout(c1, masks)
    lay2 = _fiber_layout(c2, masks)
    blocks = {}
    for d, parts in lay1.items():
        if d not in lay2:
            continue
        out = F.zeros(P2.dim(d + 1), P1.dim(d + 1))
        for m, (o1, n1) in parts.items():
            if m not in lay2[d]:
                continue
            o2, n2 = lay2[d][m]
            blk = comps[m].block(d + popcount(m))
            out[o2:o2 + n2, o1:o1 + n1] = blk.a
        blocks[d + 1] = Matrix(F, out)
    return ChainMap(P1, P2, blocks, check=False)


def _fiber_layout(c: Cube, masks: Sequence[int]) -> dict[int, dict[int, tuple[int, int]]]:
    layout: dict[int, dict[int, tuple[int, int]]] = {}
    for m in sorted(masks):
        k = popcount(m)
        for e in c.vertices[m].degrees:
            d = e - k
            part = layout.setdefault(d, {})
            off = sum(n for _, n in part.values())
            part[m] = (off, c.vertices[m].dim(e))
    return layout


def total_fiber_map(c1: Cube, c2: Cube, comps: Sequence[ChainMap]) -> ChainMap:
    """Map of total fibers induced by a cube map."""
    T1, T2 = total_fiber(c1), total_fiber(c2)
    masks = list(range(1 << c1.dim))
    lay1, lay2 = _fiber_layout(c1, masks), _fiber_layout(c2, masks)
    F = c1.field
    blocks = {}
    for d, parts in lay1.items():
        if d not in lay2:
            continue
        out = F.zeros(T2.dim(d), T1.dim(d))
        for m, (o1, n1) in parts.items():
            if m in lay2[d]:
                o2, n2 = lay2[d][m]
                out[o2:o2 + n2, o1:o1 + n1] = comps[m].block(d + popcount(m)).a
        blocks[d] = Matrix(F, out)
    return ChainMap(T1, T2, blocks, check=False)


def translate(c: Cube, I) -> Cube:
    """The cube ``S' -> X(I ∪ S')`` (identity edges in the directions of I)."""
    Im = c.mask(I)
    verts = [c.vertices[Im | m] for m in range(1 << c.dim)]
    edges = {}
    for m in range(1 << c.dim):
        for i in range(c.dim):
            if m >> i & 1:
                continue
            if Im >> i & 1:
                edges[(m, i)] = ChainMap.identity(verts[m])
            else:
                edges[(m, i)] = c.edges[(Im | m, i)]
    return Cube(c.index, verts, edges, check=False)


class PuncturedCone:
    """The family ``I -> X_I`` with ``X_I(S') = X(I ∪ S')``."""

    def __init__(self, c: Cube):
        self.base = c
        self.cubes = {I: translate(c, I) for I in range(1 << c.dim)}

    def __getitem__(self, I) -> Cube:
        return self.cubes[self.base.mask(I)]

    def fixed_cube(self, S_prime) -> Cube:
        """The cube ``I -> X_I(S')`` for fixed ``S'``."""
        return translate(self.base, S_prime)

    def limit_cube(self, apply: Callable[[Cube], Cube] | None = None) -> Cube:
        """``I -> holim_{S' ≠ ∅} F(X_I(S'))`` with edges induced by ``X_I -> X_{I ∪ t}``.

        ``apply`` evaluates a functor on a cube (identity when omitted).
        """
        c = self.base
        n = c.dim
        F_cubes = {I: (apply(cb) if apply else cb) for I, cb in self.cubes.items()}
        holims = {I: punctured_holim(cb)[0] for I, cb in F_cubes.items()}
        edges = {}
        for I in range(1 << n):
            for t in range(n):
                if I >> t & 1:
                    continue
                J = I | 1 << t
                src, tgt = F_cubes[I], F_cubes[J]
                comps = [_translate_component(c, I, t, m, apply, src, tgt) for m in range(1 << n)]
                edges[(I, t)] = punctured_holim_map(src, tgt, comps, holims[I], holims[J])
        return Cube(c.index, [holims[I] for I in range(1 << n)], edges, check=False)


def _translate_component(c: Cube, I: int, t: int, m: int, apply, src: Cube, tgt: Cube) -> ChainMap:
    """Component at vertex m of the cube map ``X_I -> X_{I ∪ {t}}``."""
    if (I | m) >> t & 1:
        f = ChainMap.identity(c.vertices[I | m])
    else:
        f = c.edges[(I | m, t)]
    if apply is None:
        return f
    return apply(from_map(f)).edges[(0, 0)]


# strict completions


def quotient_complex(V: ChainComplex, rel: Mapping[int, Matrix]) -> tuple[ChainComplex, ChainMap, dict[int, list[int]]]:
    """``V / R`` for the subcomplex spanned by the columns ``rel[d]``.

    Returns the quotient, the projection and, per degree, the coordinates of
    V kept as the quotient basis.
    """
    F = V.field
    proj = {}
    keep = {}
    dims = {}
    for d in V.degrees:
        n = V.dim(d)
        R = rel.get(d)
        if R is None or R.cols == 0 or R.is_zero():
            proj[d] = Matrix.identity(F, n)
            keep[d] = list(range(n))
            dims[d] = n
            continue
        B = row_space_basis(R.T)
        piv = []
        for row in range(B.rows):
            nz = np.nonzero(B.a[row])[0]
            piv.append(int(nz[0]))
        nonp = [j for j in range(n) if j not in set(piv)]
        P = F.zeros(len(nonp), n)
        for k, j in enumerate(nonp):
            P[k, j] = F.coerce(1)
        for r, p in enumerate(piv):
            col = B.a[r, nonp]
            P[:, p] = F.reduce(-col) if F.p else -col
        proj[d] = Matrix(F, P)
        keep[d] = nonp
        dims[d] = len(nonp)
    diffs = {}
    for d in V.degrees:
        if d - 1 not in proj or not dims.get(d) or not dims.get(d - 1):
            continue
        sec = V.diff(d).select_cols(keep[d])
        diffs[d] = proj[d - 1] @ sec
    Q = ChainComplex(F, dims, diffs, check=False)
    return Q, ChainMap(V, Q, proj, check=False), keep


def section(V: ChainComplex, Q: ChainComplex, keep: Mapping[int, list[int]]) -> dict[int, Matrix]:
    """Coordinate section ``Q_d -> V_d`` (not a chain map in general)."""
    F = V.field
    out = {}
    for d, cols in keep.items():
        S = F.zeros(V.dim(d), len(cols))
        for k, j in enumerate(cols):
            S[j, k] = F.coerce(1)
        out[d] = Matrix(F, S)
    return out


def kernel_complex(g: ChainMap) -> tuple[ChainComplex, ChainMap]:
    """Strict kernel of ``g`` with its inclusion."""
    V = g.source
    F = V.field
    Z = {d: kernel_basis(g.block(d)) for d in V.degrees}
    dims = {d: z.cols for d, z in Z.items()}
    diffs = {}
    for d in V.degrees:
        if d - 1 not in Z or not dims[d] or not dims[d - 1]:
            continue
        img = V.diff(d) @ Z[d]
        x = solve(Z[d - 1], img)
        if x is None:
            raise ChainMapError("kernel is not a subcomplex")
        diffs[d] = x
    K = ChainComplex(F, dims, diffs, check=False)
    return K, ChainMap(K, V, Z, check=False)


def is_injective(f: ChainMap) -> bool:
    return all(rank(f.block(d)) == f.source.dim(d) for d in f.source.degrees)


def is_surjective(f: ChainMap) -> bool:
    return all(rank(f.block(d)) == f.target.dim(d) for d in f.target.degrees)


def cylinder_replace(f: ChainMap) -> ChainMap:
    """``X -> A ⊕ cone(id_X)``: injective, and quasi-isomorphic to f over A."""
    X = f.source
    Cx = cone(ChainMap.identity(X))
    inc = cone_inclusion(ChainMap.identity(X))
    T = direct_sum([f.target, Cx])
    F = X.field
    blocks = {d: vstack(F, [f.block(d), inc.block(d)]) for d in X.degrees}
    return ChainMap(X, T, blocks, check=False)


def path_replace(g: ChainMap) -> ChainMap:
    """``B ⊕ fiber(id_Z) -> Z``: surjective, quasi-isomorphic to g."""
    Z = g.target
    ident = ChainMap.identity(Z)
    Pz = fiber(ident)
    pr = fiber_projection(ident)
    S = direct_sum([g.source, Pz])
    F = Z.field
    blocks = {d: hstack(F, [g.block(d), pr.block(d)]) for d in Z.degrees}
    return ChainMap(S, Z, blocks, check=False)


def left_kan_complete(initial: ChainComplex, maps: Mapping[Hashable, ChainMap]) -> Cube:
    """Strongly coCartesian cube from the initial vertex and the maps out of it.

    ``X(T)`` is the strict colimit of the restriction to subsets of size <= 1,
    i.e. ``(⊕_{s∈T} A_s)`` modulo ``f_s(x) - f_t(x)``.  Non-injective maps are
    first replaced through the mapping cylinder.
    """
    index = list(maps)
    fs = []
    for s in index:
        f = maps[s]
        if f.source != initial:
            raise CubeError(f"map for {s!r} does not start at the initial vertex")
        fs.append(f if is_injective(f) else cylinder_replace(f))
    n = len(index)
    F = initial.field
    verts: list[ChainComplex] = [None] * (1 << n)
    projs: dict[int, ChainMap] = {}
    sums: dict[int, ChainComplex] = {}
    keeps: dict[int, dict] = {}
    verts[0] = initial
    for m in range(1, 1 << n):
        bs = bits_of(m)
        if len(bs) == 1:
            verts[m] = fs[bs[0]].target
            continue
        parts = [fs[i].target for i in bs]
        V = direct_sum(parts)
        rel = {}
        for d in initial.degrees:
            sizes = [p.dim(d) for p in parts]
            cols = []
            for k in range(1, len(bs)):
                blocks_ = {(0, 0): fs[bs[0]].block(d), (k, 0): -fs[bs[k]].block(d)}
                cols.append(block(F, sizes, [initial.dim(d)], blocks_))
            if cols and sum(sizes):
                rel[d] = hstack(F, cols)
        Q, pr, keep = quotient_complex(V, rel)
        verts[m], projs[m], sums[m], keeps[m] = Q, pr, V, keep
    edges = {}
    for m in range(1 << n):
        for i in range(n):
            if m >> i & 1:
                continue
            m2 = m | 1 << i
            if m == 0:
                edges[(m, i)] = ChainMap(initial, verts[m2], fs[i].blocks, check=False)
                continue
            edges[(m, i)] = _induced_sum_map(m, m2, fs, verts, projs, keeps, sums, F)
    return Cube(index, verts, edges, check=False)


def _induced_sum_map(m, m2, fs, verts, projs, keeps, sums, F) -> ChainMap:
    """Edge ``X(T) -> X(T ∪ {u})`` induced by the summand inclusion."""
    bs, bs2 = bits_of(m), bits_of(m2)
    src, tgt = verts[m], verts[m2]
    blocks = {}
    for d in src.degrees:
        sizes = [fs[i].target.dim(d) for i in bs]
        sizes2 = [fs[i].target.dim(d) for i in bs2]
        inc = block(F, sizes2, sizes, {(bs2.index(i), k): Matrix.identity(F, sizes[k]) for k, i in enumerate(bs)})
        if m in keeps:
            sec = section(sums[m], src, {d: keeps[m][d]})[d]
            inc = inc @ sec
        blocks[d] = projs[m2].block(d) @ inc
    return ChainMap(src, tgt, blocks, check=False)


def right_kan_complete(terminal: ChainComplex, maps: Mapping[Hashable, ChainMap]) -> Cube:
    """Strongly Cartesian cube from the terminal vertex and the maps into it.

    ``maps[s]`` is the edge from the vertex ``S \\ {s}`` to the terminal vertex.
    ``X(T)`` is the strict limit of the vertices containing T of size >= n-1.
    """
    index = list(maps)
    gs = []
    for s in index:
        g = maps[s]
        if g.target != terminal:
            raise CubeError(f"map for {s!r} does not end at the terminal vertex")
        gs.append(g if is_surjective(g) else path_replace(g))
    n = len(index)
    F = terminal.field
    full = (1 << n) - 1
    verts: list[ChainComplex] = [None] * (1 << n)
    incs: dict[int, ChainMap] = {}
    verts[full] = terminal
    for m in range(full):
        out = [i for i in range(n) if not m >> i & 1]
        if len(out) == 1:
            verts[m] = gs[out[0]].source
            continue
        parts = [gs[i].source for i in out]
        V = direct_sum(parts)
        W = direct_sum([terminal] * (len(out) - 1))
        blocks = {}
        for d in V.degrees:
            sizes = [p.dim(d) for p in parts]
            tz = [terminal.dim(d)] * (len(out) - 1)
            bl = {}
            for k in range(1, len(out)):
                bl[(k - 1, 0)] = gs[out[0]].block(d)
                bl[(k - 1, k)] = -gs[out[k]].block(d)
            blocks[d] = block(F, tz, sizes, bl)
        K, inc = kernel_complex(ChainMap(V, W, blocks, check=False))
        verts[m], incs[m] = K, inc
    edges = {}
    for m in range(1 << n):
        for i in range(n):
            if m >> i & 1:
                continue
            m2 = m | 1 << i
            src, tgt = verts[m], verts[m2]
            out = [j for j in range(n) if not m >> j & 1]
            out2 = [j for j in range(n) if not m2 >> j & 1]
            bl = {}
            for d in src.degrees:
                sizes = [gs[j].source.dim(d) for j in out]
                if m in incs:
                    vec = incs[m].block(d)
                else:
                    vec = Matrix.identity(F, src.dim(d))
                if m2 == full:
                    pr = block(F, [sizes[out.index(i)]], sizes, {(0, out.index(i)): Matrix.identity(F, sizes[out.index(i)])})
                    bl[d] = gs[i].block(d) @ pr @ vec
                    continue
                sizes2 = [gs[j].source.dim(d) for j in out2]
                pr = block(F, sizes2, sizes, {(k2, out.index(j)): Matrix.identity(F, sizes2[k2]) for k2, j in enumerate(out2)})
                v = pr @ vec
                if m2 in incs:
                    x = solve(incs[m2].block(d), v)
                    if x is None:
                        raise CubeError("projection leaves the pullback")
                    v = x
                bl[d] = v
            edges[(m, i)] = ChainMap(src, tgt, bl, check=False)
    return Cube(index, verts, edges, check=False)


# random inputs


def random_complex(rng: np.random.Generator, field: Field, lo: int = 0, hi: int = 2, max_dim: int = 2,
                   density: float = 1.0) -> ChainComplex:
    """Random complex with d∘d = 0, each differential a random map into ker of the next."""
    dims = {d: int(rng.integers(0, max_dim + 1)) for d in range(lo, hi + 1)}
    diffs = {}
    prev = None
    for d in range(lo, hi + 1):
        if d == lo:
            prev = Matrix.zero(field, 0, dims[d])
            continue
        K = kernel_basis(prev) if dims[d - 1] else Matrix.zero(field, 0, 0)
        if dims[d - 1] == 0 or K.cols == 0 or dims[d] == 0:
            m = Matrix.zero(field, dims[d - 1], dims[d])
        else:
            m = K @ Matrix.random(field, rng, K.cols, dims[d], density=density)
        diffs[d] = m
        prev = m
    return ChainComplex(field, dims, diffs)


def random_chain_map(rng: np.random.Generator, A: ChainComplex, B: ChainComplex) -> ChainMap:
    """Uniform-ish random element of the space of chain maps ``A -> B``."""
    F = A.field
    unknowns = []
    off = 0
    for d in A.degrees:
        if B.dim(d):
            unknowns.append((d, B.dim(d), A.dim(d), off))
            off += B.dim(d) * A.dim(d)
    if off == 0:
        return ChainMap.zero(A, B)
    idx = {u[0]: u for u in unknowns}
    rows = []
    for d in sorted(set(A.degrees) | {e + 1 for e in B.degrees}):
        n = B.dim(d - 1) * A.dim(d)
        if n == 0:
            continue
        R = F.zeros(n, off)
        if d in idx:
            _, r, c, o = idx[d]
            R[:, o:o + r * c] = Matrix.identity(F, c).kron(B.diff(d)).a
        if d - 1 in idx:
            _, r, c, o = idx[d - 1]
            R[:, o:o + r * c] = F.reduce(R[:, o:o + r * c] - A.diff(d).T.kron(Matrix.identity(F, r)).a)
        rows.append(Matrix(F, R))
    M = vstack(F, rows, off)
    K = kernel_basis(M) if M.rows else Matrix.identity(F, off)
    x = K @ Matrix.random(F, rng, K.cols, 1)
    blocks = {d: Matrix(F, x.a[o:o + r * c, 0].reshape(c, r).T.copy()) for d, r, c, o in unknowns}
    return ChainMap(A, B, blocks)


def default_labels(n: int) -> list[str]:
    return [chr(ord("a") + i) for i in range(n)]


def random_strongly_cocartesian(seed: int, n: int, budget: int = 2, field: Field | None = None,
                                lo: int = 0, hi: int = 1) -> Cube:
    """Random initial vertex and random maps out of it, completed by pushouts."""
    from .exactalg import GF

    field = field or GF(5)
    rng = np.random.default_rng(seed)
    X = random_complex(rng, field, lo, hi, budget)
    maps = {}
    for s in default_labels(n):
        A = random_complex(rng, field, lo, hi, budget)
        maps[s] = random_chain_map(rng, X, A)
    return left_kan_complete(X, maps)


def random_strongly_cartesian(seed: int, n: int, budget: int = 2, field: Field | None = None,
                              lo: int = 0, hi: int = 1) -> Cube:
    from .exactalg import GF

    field = field or GF(5)
    rng = np.random.default_rng(seed)
    Z = random_complex(rng, field, lo, hi, budget)
    maps = {}
    for s in default_labels(n):
        B = random_complex(rng, field, lo, hi, budget)
        maps[s] = random_chain_map(rng, B, Z)
    return right_kan_complete(Z, maps)
