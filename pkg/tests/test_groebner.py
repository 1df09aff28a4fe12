"""Gröbner bases against sympy's grlex implementation."""

import numpy as np
import pytest
import sympy

from gwcalc import QQ
from gwcalc import groebner as gb
from gwcalc.dgalg import random_presentation

X = sympy.symbols("x0:3")


def to_sympy(p, n):
    return sum(sympy.Rational(c.numerator, c.denominator) * sympy.prod(x ** e for x, e in zip(X[:n], m))
               for m, c in p.items())


@pytest.mark.parametrize("seed", range(15))
def test_reduced_basis_matches_sympy(seed):
    rng = np.random.default_rng(seed)
    P = random_presentation(QQ, rng)
    n = P.nvars
    ours = {sympy.expand(to_sympy(g, n)) for g in P.basis()}
    theirs = sympy.groebner([to_sympy(r, n) for r in P.polys()], *X[:n], order="grlex")
    assert ours == {sympy.expand(g) for g in theirs.exprs}


def test_standard_monomials_count_matches_quotient_dimension():
    P = gb.Presentation.make(QQ, ["x", "y"], [{(2, 0): 1}, {(0, 3): 1}, {(1, 1): 1}])
    mons = gb.standard_monomials(P.basis(), 2)
    assert sorted(mons) == [(0, 0), (0, 1), (0, 2), (1, 0)]


def test_unit_ideal_has_no_standard_monomials():
    P = gb.Presentation.make(QQ, ["x"], [{(1,): 1}, {(1,): 1, (0,): 1}])
    assert P.basis() == [{(0,): 1}]
    assert gb.standard_monomials(P.basis(), 1) == []


def test_positive_dimensional_detected():
    P = gb.Presentation.make(QQ, ["x", "y"], [{(1, 1): 1, (0, 0): -1}])
    assert not P.is_zero_dimensional()
    with pytest.raises(ValueError):
        gb.standard_monomials(P.basis(), 2, limit=50)
