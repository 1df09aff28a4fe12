"""Exact linear algebra over Q and GF(p) against sympy."""

from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st
from sympy.polys.matrices import DomainMatrix

from gwcalc.exactalg import GF, Field, Matrix, kernel_basis, rank, rref, solve

QQ = Field()

entries = st.integers(-4, 4)


@st.composite
def int_matrix(draw, max_side=6):
    m = draw(st.integers(1, max_side))
    n = draw(st.integers(1, max_side))
    return [[draw(entries) for _ in range(n)] for _ in range(m)]


@st.composite
def rational_matrix(draw, max_side=5):
    m = draw(st.integers(1, max_side))
    n = draw(st.integers(1, max_side))
    q = st.builds(Fraction, st.integers(-5, 5), st.integers(1, 4))
    return [[draw(q) for _ in range(n)] for _ in range(m)]


@settings(max_examples=80, deadline=None)
@given(rational_matrix())
def test_rank_over_q_matches_sympy(rows):
    assert rank(Matrix.from_rows(QQ, rows)) == sympy.Matrix(rows).rank()


@settings(max_examples=60, deadline=None)
@given(int_matrix(), st.sampled_from([2, 3, 5, 7]))
def test_rank_over_gf_matches_sympy(rows, p):
    dm = DomainMatrix([[sympy.GF(p)(x) for x in r] for r in rows], (len(rows), len(rows[0])), sympy.GF(p))
    assert rank(Matrix.from_rows(GF(p), rows)) == dm.rank()


@settings(max_examples=60, deadline=None)
@given(rational_matrix(), rational_matrix())
def test_rational_matmul_matches_sympy(a, b):
    b = [r[:] for r in b]
    k = len(a[0])
    b = (b * k)[:k]
    got = Matrix.from_rows(QQ, a) @ Matrix.from_rows(QQ, b, cols=len(b[0]))
    want = sympy.Matrix(a) * sympy.Matrix(b)
    assert got.tolist() == [[Fraction(int(x.p), int(x.q)) for x in want.row(i)] for i in range(want.rows)]


@settings(max_examples=60, deadline=None)
@given(int_matrix(), st.sampled_from([None, 3, 5]))
def test_kernel_and_rref(rows, p):
    F = Field(p)
    m = Matrix.from_rows(F, rows)
    K = kernel_basis(m)
    assert (m @ K).is_zero()
    assert K.cols + rank(m) == m.cols
    R, piv = rref(m)
    assert len(piv) == rank(m)
    assert rank(R) == rank(m)


@settings(max_examples=60, deadline=None)
@given(int_matrix(), st.sampled_from([None, 7]))
def test_solve_consistent_systems(rows, p):
    F = Field(p)
    m = Matrix.from_rows(F, rows)
    rng = np.random.default_rng(len(rows))
    x = Matrix.random(F, rng, m.cols, 2)
    b = m @ x
    y = solve(m, b)
    assert y is not None and m @ y == b


def test_solve_inconsistent():
    m = Matrix.from_rows(QQ, [[1, 0], [0, 0]])
    assert solve(m, Matrix.from_rows(QQ, [[0], [1]])) is None


def test_large_entries_use_exact_integers():
    big = 10 ** 30
    m = Matrix.from_rows(QQ, [[big, 1], [big + 1, 1]])
    assert rank(m) == 2
    assert rank(Matrix.from_rows(QQ, [[big, 2 * big], [1, 2]])) == 1


def test_gf_requires_prime():
    with pytest.raises(ValueError):
        GF(6)
