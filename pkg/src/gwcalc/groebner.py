"""Sparse polynomials, graded-lex Gröbner bases and finite presentations."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .exactalg import Field

Monomial = tuple
Poly = dict  # Monomial -> nonzero scalar


def _key(m: Monomial):
    return (sum(m), m)


def leading(p: Poly) -> Monomial:
    return max(p, key=_key)


def _clean(F: Field, p: Mapping) -> Poly:
    out = {}
    for m, c in p.items():
        c = F.coerce(c)
        if c != 0:
            out[tuple(m)] = c
    return out


def add(F: Field, p: Poly, q: Poly, scale=1) -> Poly:
    out = dict(p)
    s = F.coerce(scale)
    for m, c in q.items():
        v = F.coerce(out.get(m, 0) + s * c)
        if v == 0:
            out.pop(m, None)
        else:
            out[m] = v
    return out


def mul_term(F: Field, p: Poly, mono: Monomial, c) -> Poly:
    c = F.coerce(c)
    if c == 0:
        return {}
    return {tuple(a + b for a, b in zip(m, mono)): F.coerce(v * c) for m, v in p.items()}


def mul(F: Field, p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m, c in q.items():
        out = add(F, out, mul_term(F, p, m, c))
    return out


def divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def reduce(F: Field, p: Poly, G: Sequence[Poly]) -> Poly:
    """Full normal form of p modulo the (monic) list G."""
    p = dict(p)
    rem: Poly = {}
    lms = [leading(g) for g in G]
    while p:
        m = leading(p)
        c = p[m]
        for g, lm in zip(G, lms):
            if divides(lm, m):
                q = tuple(x - y for x, y in zip(m, lm))
                p = add(F, p, mul_term(F, g, q, c), -1)
                break
        else:
            rem[m] = c
            del p[m]
    return rem


def _monic(F: Field, p: Poly) -> Poly:
    c = F.inv(p[leading(p)])
    return {m: F.coerce(v * c) for m, v in p.items()}


def groebner(F: Field, polys: Iterable[Poly]) -> list[Poly]:
    """Reduced Gröbner basis for graded lex order (Buchberger)."""
    G = [_monic(F, p) for p in (_clean(F, q) for q in polys) if p]
    pairs = list(combinations(range(len(G)), 2))
    while pairs:
        i, j = pairs.pop(0)
        a, b = G[i], G[j]
        la, lb = leading(a), leading(b)
        lcm = tuple(max(x, y) for x, y in zip(la, lb))
        if all(x + y == z for x, y, z in zip(la, lb, lcm)):
            continue  # coprime leading terms
        s = add(F, mul_term(F, a, tuple(x - y for x, y in zip(lcm, la)), 1),
                mul_term(F, b, tuple(x - y for x, y in zip(lcm, lb)), 1), -1)
        r = reduce(F, s, G)
        if r:
            G.append(_monic(F, r))
            pairs.extend((k, len(G) - 1) for k in range(len(G) - 1))
    # minimize and interreduce
    G = [g for i, g in enumerate(G)
         if not any(divides(leading(h), leading(g)) and (leading(h) != leading(g) or k < i)
                    for k, h in enumerate(G) if k != i)]
    out = []
    for i, g in enumerate(G):
        out.append(_monic(F, reduce(F, g, G[:i] + G[i + 1:]) or g))
    return sorted(out, key=lambda g: _key(leading(g)))


def derivative(F: Field, p: Poly, i: int) -> Poly:
    out = {}
    for m, c in p.items():
        if m[i]:
            q = list(m)
            q[i] -= 1
            v = F.coerce(c * m[i])
            if v != 0:
                out[tuple(q)] = v
    return out


@dataclass(frozen=True)
class Presentation:
    """``k[vars] / (relations)`` with relations as sparse exponent dictionaries."""

    field: Field
    vars: tuple
    relations: tuple  # of tuple(sorted (monomial, coef))

    @classmethod
    def make(cls, field: Field, vars: Sequence[str], relations: Sequence[Mapping]) -> "Presentation":
        n = len(vars)
        rels = []
        for r in relations:
            p = _clean(field, r)
            if not p:
                raise ValueError("relations must be nonzero")
            if any(len(m) != n for m in p):
                raise ValueError("exponent vector length does not match the variables")
            rels.append(tuple(sorted(p.items())))
        return cls(field, tuple(vars), tuple(rels))

    @property
    def nvars(self) -> int:
        return len(self.vars)

    def polys(self) -> list[Poly]:
        return [dict(r) for r in self.relations]

    def basis(self) -> list[Poly]:
        return groebner(self.field, self.polys())

    def is_zero_dimensional(self) -> bool:
        G = self.basis()
        lms = [leading(g) for g in G]
        for i in range(self.nvars):
            if not any(m[i] > 0 and sum(m) == m[i] for m in lms):
                return False
        return True

    def is_homogeneous(self) -> bool:
        return all(len({sum(m) for m, _ in r}) == 1 for r in self.relations)


def standard_monomials(G: Sequence[Poly], nvars: int, limit: int = 5000) -> list[Monomial]:
    """Monomials outside the leading ideal, in increasing graded-lex order."""
    lms = [leading(g) for g in G]
    if any(sum(m) == 0 for m in lms):
        return []
    seen = {tuple([0] * nvars)}
    frontier = [tuple([0] * nvars)]
    out = []
    while frontier:
        m = frontier.pop()
        out.append(m)
        for i in range(nvars):
            q = list(m)
            q[i] += 1
            q = tuple(q)
            if q in seen or any(divides(l, q) for l in lms):
                continue
            seen.add(q)
            frontier.append(q)
            if len(seen) > limit:
                raise ValueError("quotient is not finite-dimensional within the size limit")
    return sorted(out, key=_key)


def products(F: Field, a: Sequence[Poly], b: Sequence[Poly]) -> list[Poly]:
    """Generators of the product ideal ``(a)(b)``."""
    return [p for p in (mul(F, x, y) for x in a for y in b) if p]
