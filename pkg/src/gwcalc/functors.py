"""Strict endofunctors of chain complexes as a small term language.

Every constructor is strictly functorial, so evaluating a term on a strict
cube gives a strict cube.  Natural transformations are drawn from a fixed
library of rules (see :class:`NatTrans`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from . import chain
from .chain import ChainComplex, ChainMap
from .cube import Cube


class FunctorError(ValueError):
    pass


class Functor:
    """Anything with strict ``obj`` and ``map``.

    Subclasses implement ``_obj`` and ``_map``; results are memoized per input
    object so that repeated evaluation returns the identical complex.
    """

    _CACHE_LIMIT = 20000

    def _cache(self) -> dict:
        c = self.__dict__.get("_memo")
        if c is None:
            c = {}
            object.__setattr__(self, "_memo", c)
        if len(c) > self._CACHE_LIMIT:
            c.clear()
        return c

    def obj(self, X: ChainComplex) -> ChainComplex:
        memo = self._cache()
        hit = memo.get(id(X))
        if hit is not None and hit[0] is X:
            return hit[1]
        out = self._obj(X)
        memo[id(X)] = (X, out)
        return out

    def map(self, f: ChainMap) -> ChainMap:
        g = self._map(f)
        src, tgt = self.obj(f.source), self.obj(f.target)
        if g.source is not src or g.target is not tgt:
            g = ChainMap(src, tgt, g.blocks, check=False)
        return g

    def on_cube(self, c: Cube) -> Cube:
        verts = [self.obj(v) for v in c.vertices]
        edges = {k: self.map(e) for k, e in c.edges.items()}
        return Cube(c.index, verts, edges, check=False)

    def _obj(self, X):
        raise NotImplementedError

    def _map(self, f):
        raise NotImplementedError

    @property
    def pointed(self) -> bool:
        return True


class FunctorTerm(Functor):
    pass


@dataclass(frozen=True, eq=True)
class Identity(FunctorTerm):
    def _obj(self, X):
        return X

    def _map(self, f):
        return f


@dataclass(frozen=True, eq=True)
class Constant(FunctorTerm):
    value: ChainComplex

    def _obj(self, X):
        if X.field != self.value.field:
            raise FunctorError("field mismatch")
        return self.value

    def _map(self, f):
        return ChainMap.identity(self.value)

    @property
    def pointed(self) -> bool:
        return self.value.is_zero()


@dataclass(frozen=True, eq=True)
class TensorPower(FunctorTerm):
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise FunctorError("tensor power needs k >= 1")

    def _obj(self, X):
        return chain.tensor_power(X, self.k)

    def _map(self, f):
        return chain.tensor_power_map(f, self.k)


@dataclass(frozen=True, eq=True)
class DirectSum(FunctorTerm):
    terms: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def _obj(self, X):
        return chain.direct_sum([t.obj(X) for t in self.terms], field=X.field)

    def _map(self, f):
        if not self.terms:
            return ChainMap.zero(self.obj(f.source), self.obj(f.target))
        return chain.direct_sum_map([t.map(f) for t in self.terms])

    @property
    def pointed(self) -> bool:
        return all(t.pointed for t in self.terms)


@dataclass(frozen=True, eq=True)
class Shift(FunctorTerm):
    n: int

    def _obj(self, X):
        return chain.shift(X, self.n)

    def _map(self, f):
        return chain.shift_map(f, self.n)


@dataclass(frozen=True, eq=True)
class Compose(FunctorTerm):
    """``outer ∘ inner``."""

    outer: Functor
    inner: Functor

    def _obj(self, X):
        return self.outer.obj(self.inner.obj(X))

    def _map(self, f):
        return self.outer.map(self.inner.map(f))

    @property
    def pointed(self) -> bool:
        return self.outer.pointed and self.inner.pointed


@dataclass(frozen=True, eq=True)
class TensorWith(FunctorTerm):
    """``X -> X ⊗ C``."""

    value: ChainComplex

    def _obj(self, X):
        return chain.tensor(X, self.value)

    def _map(self, f):
        return chain.tensor_map(f, ChainMap.identity(self.value))


@dataclass(frozen=True, eq=True)
class FiberOf(FunctorTerm):
    transform: "NatTrans"

    def _obj(self, X):
        return chain.fiber(self.transform.component(X))

    def _map(self, f):
        a = self.transform
        return chain.fiber_map(a.component(f.source), a.component(f.target), a.source.map(f), a.target.map(f),
                               check=False)

    @property
    def pointed(self) -> bool:
        return self.transform.source.pointed and self.transform.target.pointed


@dataclass(frozen=True, eq=True)
class ConeOf(FunctorTerm):
    transform: "NatTrans"

    def _obj(self, X):
        return chain.cone(self.transform.component(X))

    def _map(self, f):
        a = self.transform
        return chain.cone_map(a.component(f.source), a.component(f.target), a.source.map(f), a.target.map(f),
                              check=False)

    @property
    def pointed(self) -> bool:
        return self.transform.source.pointed and self.transform.target.pointed


RULES = ("zero", "identity", "scalar", "inclusion", "projection", "diagonal", "fold",
         "fiber_projection", "cone_inclusion")


@dataclass(frozen=True, eq=True)
class NatTrans:
    """A library natural transformation ``source -> target``.

    Rules: ``zero``; ``identity`` and ``scalar`` (c·id) when source equals
    target; ``inclusion``/``projection`` of summand ``index`` of a DirectSum;
    ``diagonal`` F -> F⊕…⊕F and ``fold`` G⊕…⊕G -> G; ``fiber_projection``
    FiberOf(β) -> β.source and ``cone_inclusion`` β.target -> ConeOf(β).
    """

    source: Functor
    target: Functor
    rule: str
    index: int | None = None
    scalar: Any = None

    def __post_init__(self):
        if self.rule not in RULES:
            raise FunctorError(f"unknown rule {self.rule!r}")
        s, t = self.source, self.target
        ok = True
        if self.rule in ("identity", "scalar"):
            ok = s == t
        elif self.rule == "inclusion":
            ok = isinstance(t, DirectSum) and self.index is not None and t.terms[self.index] == s
        elif self.rule == "projection":
            ok = isinstance(s, DirectSum) and self.index is not None and s.terms[self.index] == t
        elif self.rule == "diagonal":
            ok = isinstance(t, DirectSum) and all(x == s for x in t.terms)
        elif self.rule == "fold":
            ok = isinstance(s, DirectSum) and all(x == t for x in s.terms)
        elif self.rule == "fiber_projection":
            ok = isinstance(s, FiberOf) and s.transform.source == t
        elif self.rule == "cone_inclusion":
            ok = isinstance(t, ConeOf) and t.transform.target == s
        if not ok:
            raise FunctorError(f"rule {self.rule!r} does not apply to these functors")

    def component(self, X: ChainComplex) -> ChainMap:
        S, T = self.source.obj(X), self.target.obj(X)
        r = self.rule
        if r == "zero":
            return ChainMap.zero(S, T)
        if r == "identity":
            return ChainMap.identity(S)
        if r == "scalar":
            return ChainMap.identity(S).scale(X.field.parse(str(self.scalar)))
        if r == "inclusion":
            parts = [t.obj(X) for t in self.target.terms]
            return _retarget(chain.sum_inclusion(parts, self.index), S, T)
        if r == "projection":
            parts = [t.obj(X) for t in self.source.terms]
            return _retarget(chain.sum_projection(parts, self.index), S, T)
        if r == "diagonal":
            parts = [t.obj(X) for t in self.target.terms]
            out = None
            for i in range(len(parts)):
                inc = chain.sum_inclusion(parts, i)
                out = inc if out is None else out + inc
            return _retarget(out, S, T) if out is not None else ChainMap.zero(S, T)
        if r == "fold":
            parts = [t.obj(X) for t in self.source.terms]
            out = None
            for i in range(len(parts)):
                pr = chain.sum_projection(parts, i)
                out = pr if out is None else out + pr
            return _retarget(out, S, T) if out is not None else ChainMap.zero(S, T)
        if r == "fiber_projection":
            return _retarget(chain.fiber_projection(self.source.transform.component(X)), S, T)
        if r == "cone_inclusion":
            return _retarget(chain.cone_inclusion(self.target.transform.component(X)), S, T)
        raise FunctorError(r)


def _retarget(f: ChainMap, S: ChainComplex, T: ChainComplex) -> ChainMap:
    return ChainMap(S, T, f.blocks, check=False)


def eval_obj(F: Functor, X: ChainComplex) -> ChainComplex:
    return F.obj(X)


def eval_map(F: Functor, f: ChainMap) -> ChainMap:
    return F.map(f)


def eval_on_cube(F: Functor, c: Cube) -> Cube:
    return F.on_cube(c)


def is_pointed(F: Functor) -> bool:
    return F.pointed


# JSON


def term_to_json(F: Functor) -> dict:
    from .io import complex_to_json

    if isinstance(F, Identity):
        return {"op": "identity"}
    if isinstance(F, Constant):
        return {"op": "constant", "complex": complex_to_json(F.value)}
    if isinstance(F, TensorPower):
        return {"op": "tensor_power", "k": F.k}
    if isinstance(F, DirectSum):
        return {"op": "direct_sum", "terms": [term_to_json(t) for t in F.terms]}
    if isinstance(F, Shift):
        return {"op": "shift", "n": F.n}
    if isinstance(F, Compose):
        return {"op": "compose", "outer": term_to_json(F.outer), "inner": term_to_json(F.inner)}
    if isinstance(F, TensorWith):
        return {"op": "tensor_with", "complex": complex_to_json(F.value)}
    if isinstance(F, FiberOf):
        return {"op": "fiber", "transform": transform_to_json(F.transform)}
    if isinstance(F, ConeOf):
        return {"op": "cone", "transform": transform_to_json(F.transform)}
    raise FunctorError(f"{type(F).__name__} is not a serializable term")


def transform_to_json(a: NatTrans) -> dict:
    out = {"rule": a.rule, "source": term_to_json(a.source), "target": term_to_json(a.target)}
    if a.index is not None:
        out["index"] = a.index
    if a.scalar is not None:
        out["scalar"] = str(a.scalar)
    return out


def term_from_json(d: dict, field=None, path: str = "functor") -> FunctorTerm:
    from .io import SchemaError, complex_from_json

    if not isinstance(d, dict) or "op" not in d:
        raise SchemaError(path, "expected an object with an 'op' field")
    op = d["op"]
    if op == "identity":
        return Identity()
    if op == "constant":
        return Constant(complex_from_json(d.get("complex"), f"{path}.complex"))
    if op == "tensor_power":
        k = d.get("k")
        if not isinstance(k, int) or k < 1:
            raise SchemaError(f"{path}.k", "expected a positive integer")
        return TensorPower(k)
    if op == "direct_sum":
        terms = d.get("terms")
        if not isinstance(terms, list):
            raise SchemaError(f"{path}.terms", "expected a list")
        return DirectSum(tuple(term_from_json(t, field, f"{path}.terms[{i}]") for i, t in enumerate(terms)))
    if op == "shift":
        n = d.get("n")
        if not isinstance(n, int):
            raise SchemaError(f"{path}.n", "expected an integer")
        return Shift(n)
    if op == "compose":
        return Compose(term_from_json(d.get("outer"), field, f"{path}.outer"),
                       term_from_json(d.get("inner"), field, f"{path}.inner"))
    if op == "tensor_with":
        return TensorWith(complex_from_json(d.get("complex"), f"{path}.complex"))
    if op == "fiber":
        return FiberOf(transform_from_json(d.get("transform"), field, f"{path}.transform"))
    if op == "cone":
        return ConeOf(transform_from_json(d.get("transform"), field, f"{path}.transform"))
    raise SchemaError(f"{path}.op", f"unknown functor op {op!r}")


def transform_from_json(d: dict, field=None, path: str = "transform") -> NatTrans:
    from .io import SchemaError

    if not isinstance(d, dict):
        raise SchemaError(path, "expected an object")
    try:
        return NatTrans(term_from_json(d.get("source"), field, f"{path}.source"),
                        term_from_json(d.get("target"), field, f"{path}.target"),
                        d.get("rule"), d.get("index"), d.get("scalar"))
    except FunctorError as e:
        raise SchemaError(path, str(e)) from None
