"""DG algebras: bar constructions, the square-zero criterion, cotangent complexes and lifting."""

import numpy as np
import pytest

from gwcalc import GF, QQ, ChainComplex
from gwcalc import dgalg as dg
from gwcalc import groebner as gb
from gwcalc.exactalg import Matrix
from gwcalc.io import SchemaError


def pres(vars, rels, F=QQ):
    return gb.Presentation.make(F, vars, rels)


# structure and validation


def test_associativity_failure_detected():
    c = ChainComplex(QQ, {0: 2})

    def table(i, x, j, y):  # e0·e0 = e1 and e0·e1 = e1·e0 = e0: (e0 e0) e0 = e0 but e0 (e0 e1) = e1
        v = QQ.zeros(2, 1)[:, 0]
        if (x, y) == (0, 0):
            v[1] = 1
        if (x, y) in ((0, 1), (1, 0)):
            v[0] = 1
        return v

    with pytest.raises(dg.AlgebraError, match="associativity"):
        dg.make_nonunital(c, table)


def test_noncommutative_rejected_when_commutative_requested():
    c = ChainComplex(QQ, {0: 2})

    def table(i, x, j, y):  # e0 = E11, e1 = E12 in 2x2 matrices
        v = QQ.zeros(2, 1)[:, 0]
        if x == 0:
            v[y] = 1
        return v

    with pytest.raises(dg.AlgebraError):
        dg.make_nonunital(c, table)
    dg.make_nonunital(c, table, commutative=False)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_unitalization_roundtrip(m):
    A = dg.truncated_polynomial(QQ, m)
    I = dg.ker_cok(A)
    assert dg.ker_cok(dg.unitalize(I)).structure_equal(I)
    assert dg.is_isomorphic_unitalization(A)


# bar constructions


def _d_squared_zero(c: ChainComplex) -> bool:
    return all((c.diff(d - 1) @ c.diff(d)).is_zero() for d in c.degrees if c.dim(d - 2))


@pytest.mark.parametrize("A", [dg.truncated_polynomial(QQ, 3), dg.exterior(QQ, 1),
                               dg.tensor_algebra(dg.truncated_polynomial(QQ, 2), dg.exterior(QQ, 1)),
                               dg.unitalize(dg.homotopy_square_zero(QQ))],
                         ids=["poly3", "ext", "tensor", "dg"])
def test_bar_differential_squares_to_zero(A):
    assert _d_squared_zero(dg.bar_suspension(A, 5))


@pytest.mark.parametrize("F", [QQ, GF(2), GF(3)])
@pytest.mark.parametrize("m", [2, 3])
def test_tor_of_truncated_polynomial(F, m):
    # minimal resolution ... -> A -x^{m-1}-> A -x-> A -> k: one copy of k per degree
    B = dg.bar_suspension(dg.truncated_polynomial(F, m), 7)
    assert [B.homology_dim(d) for d in range(7)] == [1] * 7


def test_tor_of_ground_and_exterior():
    assert dg.bar_suspension(dg.ground(QQ), 5).betti() == {0: 1}
    E = dg.bar_suspension(dg.exterior(QQ, 1), 7)
    assert [E.homology_dim(d) for d in range(7)] == [1, 0, 1, 0, 1, 0, 1]


def test_tor_kunneth_for_tensor_algebra():
    A, E = dg.truncated_polynomial(QQ, 2), dg.exterior(QQ, 3)
    TA = dg.bar_suspension(A, 8)
    TE = dg.bar_suspension(E, 8)
    T = dg.bar_suspension(dg.tensor_algebra(A, E), 8)
    for n in range(7):
        assert T.homology_dim(n) == sum(TA.homology_dim(i) * TE.homology_dim(n - i) for i in range(n + 1))


# square-zero criterion


def test_square_zero_examples():
    cases = [(dg.ker_cok(dg.truncated_polynomial(QQ, 2)), True),
             (dg.ker_cok(dg.truncated_polynomial(QQ, 3)), False),
             (dg.zero_nonunital(QQ), True),
             (dg.acyclic_idempotent(QQ), True),
             (dg.homotopy_square_zero(QQ), True),
             (dg.graded_negative(QQ), False)]
    for I, want in cases:
        r = dg.excisive_object_test(I)
        assert r.square_zero == want and r.excisive == want and r.agree


def test_homotopy_square_zero_witness():
    v = dg.is_square_zero(dg.homotopy_square_zero(QQ))
    assert v.square_zero and v.witness is not None and v.witness.check()


def test_wide_window_is_not_excisive_for_square_zero():
    # Tor over k[x]/x² is k in every degree, so the unit is an iso only on the support of I
    I = dg.ker_cok(dg.truncated_polynomial(QQ, 2))
    assert dg.excisive_object_test(I).excisive
    assert not dg.excisive_object_test(I, window=(0, 2)).excisive


# cotangent complexes


def test_cotangent_via_bar_complete_intersection():
    A = dg.algebra_from_presentation(pres(["x", "y"], [{(2, 0): 1}, {(0, 2): 1}]))
    assert dg.cotangent_via_p1(A, window=(0, 2)).homology() == {0: 2, 1: 2, 2: 0}


def test_cotangent_via_bar_non_lci():
    A = dg.algebra_from_presentation(pres(["x", "y"], [{(2, 0): 1}, {(1, 1): 1}, {(0, 2): 1}]))
    h = dg.cotangent_via_p1(A, window=(0, 2)).homology()
    assert h[0] == 2 and h[1] == 3 and h[2] > 0


def test_cotangent_of_polynomial_ring_by_weight_truncation():
    A = dg.truncated_polynomial(QQ, 6)
    assert dg.cotangent_via_p1(A, window=(0, 2), max_weight=5).homology() == {0: 1, 1: 0, 2: 0}


@pytest.mark.parametrize("seed", range(6))
def test_bar_cotangent_matches_naive_at_origin(seed):
    rng = np.random.default_rng(seed)
    P = dg.random_presentation(QQ, rng, at_origin=True)
    A = dg.algebra_from_presentation(P)
    h = dg.cotangent_via_p1(A).homology()
    coker, ker = dg.naive_cotangent(P).at_origin
    assert (h[0], h[1]) == (coker, ker)


def test_naive_worked_examples():
    free = dg.naive_cotangent(pres(["x"], []))
    assert free.h0.kind == "free" and free.h0.rank == 1 and free.hm1.rank == 0
    dual = dg.naive_cotangent(pres(["x"], [{(2,): 1}]))
    assert dual.h0.dim == 1 and dual.hm1.dim == 1
    unit = dg.naive_cotangent(pres(["x", "y"], [{(1, 1): 1, (0, 0): -1}]))
    assert unit.h0.kind == "projective" and unit.h0.rank == 1 and unit.hm1.rank == 0


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("F", [QQ, GF(5)])
def test_naive_h0_matches_kahler_oracles(seed, F):
    P = dg.random_presentation(F, np.random.default_rng(seed))
    h0 = dg.naive_cotangent(P).h0
    for oracle in (dg.kahler_jacobian(P), dg.kahler_diagonal(P)):
        assert (oracle.dim, oracle.action_ranks) == (h0.dim, h0.action_ranks)


# lifting


def test_lift_worked_example():
    PA = pres(["t"], [{(2,): 1}])
    PB = pres(["t", "x"], [{(2, 0): 1}, {(0, 2): 1, (1, 0): -1}])
    A, QA = dg.quotient_algebra(PA)
    B, QB = dg.quotient_algebra(PB)
    phi = dg.induced_map(QA, QB, [{(1, 0): QQ.coerce(1)}])
    M = dg.module_from_generators(A, QA, [Matrix.from_rows(QQ, [[0]])])
    r = dg.square_zero_lift(A, B, phi, M)
    assert r.verified and r.degree_dims == {0: 4, 1: 2}


@pytest.mark.parametrize("seed", range(3))
def test_random_lifts(seed):
    A, B, phi, M = dg.random_lift_triple(QQ, np.random.default_rng(seed))
    r = dg.square_zero_lift(A, B, phi, M)
    assert r.verified and r.truncation_ok


def test_lift_rejects_non_module():
    A, QA = dg.quotient_algebra(pres(["t"], [{(2,): 1}]))
    with pytest.raises(dg.AlgebraError):
        dg.module_from_generators(A, QA, [Matrix.identity(QQ, 1)])


# JSON


def test_json_roundtrips():
    P = pres(["x", "y"], [{(2, 0): 1, (0, 1): "1/2"}, {(0, 3): 1}])
    assert dg.presentation_from_json(dg.presentation_to_json(P)) == P
    for a in (dg.truncated_polynomial(QQ, 3), dg.homotopy_square_zero(QQ)):
        d = dg.algebra_to_json(a)
        assert dg.algebra_to_json(dg.algebra_from_json(d)) == d


def test_presentation_schema_errors():
    with pytest.raises(SchemaError, match=r"relations\[0\].terms\[0\]"):
        dg.presentation_from_json({"field": "Q", "vars": ["x"], "relations": [{"terms": [{"exps": [1, 2]}]}]})
    with pytest.raises(SchemaError, match="vars"):
        dg.presentation_from_json({"field": "Q", "vars": list("abcdefg"), "relations": []})


@pytest.mark.parametrize("A", [dg.truncated_polynomial(QQ, 3), dg.exterior(QQ, 2)], ids=["poly3", "ext2"])
def test_bar_truncation_soundness(A):
    small, big = dg.bar_suspension(A, 4), dg.bar_suspension(A, 7)
    assert all(small.homology_dim(i) == big.homology_dim(i) for i in range(4))


@pytest.mark.parametrize("seed", range(8))
def test_square_zero_agreement_on_random_local_ideals(seed):
    r = dg.excisive_object_test(dg.random_local_ideal(QQ, np.random.default_rng(seed)))
    assert r.agree
