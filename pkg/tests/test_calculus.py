"""Cone functors, towers, the excisive refuter, relative towers and layers."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwcalc import GF, QQ, ChainComplex, chain
from gwcalc.calculus import (cone_cube, cone_value, idempotence_check, is_n_excisive, layer, relative_tower,
                             t_n, tower)
from gwcalc.cube import is_strongly_cocartesian, random_complex
from gwcalc.functors import Constant, DirectSum, Identity, NatTrans, TensorPower

seeds = st.integers(0, 10 ** 6)


@settings(max_examples=15, deadline=None)
@given(seeds, st.integers(2, 4))
def test_cone_value_homology(seed, s):
    X = random_complex(np.random.default_rng(seed), GF(5), 0, 2, 2)
    C = cone_value(range(s), X)
    for d in range(0, 4):
        assert C.homology_dim(d) == (s - 1) * X.homology_dim(d - 1)


def test_cone_cube_is_strongly_cocartesian():
    X = random_complex(np.random.default_rng(3), QQ, 0, 1, 2)
    assert is_strongly_cocartesian(cone_cube(X, 3))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_identity_tower_stabilizes_at_stage_one(seed):
    X = random_complex(np.random.default_rng(seed), GF(5), 0, 2, 2)
    rep = tower(Identity(), 1, X)
    assert rep.stabilized and rep.stage == 1
    assert all(rep.value.homology_dim(d) == X.homology_dim(d) for d in range(-3, 5))


def test_t1_on_identity_is_quasi_iso():
    X = random_complex(np.random.default_rng(0), QQ, 0, 2, 2)
    _, theta = t_n(Identity(), 1, X)
    assert chain.is_quasi_iso(theta)


def test_tensor_square_tower_shifts():
    X = ChainComplex.point(QQ, 0)
    rep = tower(TensorPower(2), 1, X, window=(0, 4), max_stages=4, min_stages=4)
    for k in range(0, 5):
        assert rep.stages[k].value.homology_dim(k) == 1
        assert sum(rep.stages[k].value.betti().values()) == 1


def test_direct_and_poly_engines_agree():
    X = ChainComplex.point(GF(5), 0)
    a = tower(TensorPower(2), 1, X, window=(0, 1), engine="direct", max_stages=2, min_stages=2)
    b = tower(TensorPower(2), 1, X, window=(0, 1), engine="poly", max_stages=2, min_stages=2)
    assert [s.value.betti() for s in a.stages[:3]] == [s.value.betti() for s in b.stages[:3]]


def test_refuter():
    assert is_n_excisive(Identity(), 1, trials=15).passed
    v = is_n_excisive(TensorPower(2), 1, trials=15)
    assert not v.passed and v.witness is not None and is_strongly_cocartesian(v.witness)
    assert is_n_excisive(TensorPower(2), 2, trials=5).passed
    assert is_n_excisive(Constant(ChainComplex.point(GF(5), 0)), 0, trials=5).passed


@pytest.mark.parametrize("F", [Identity(), TensorPower(2), DirectSum((Identity(), TensorPower(2)))],
                         ids=["id", "tp2", "sum"])
def test_idempotence(F):
    X = random_complex(np.random.default_rng(7), GF(5), 0, 1, 2)
    ok, t1, t2 = idempotence_check(F, 1, X)
    assert ok and t1 == t2


def test_layers():
    X = random_complex(np.random.default_rng(2), GF(5), 0, 1, 2)
    assert layer(Identity(), 2, X).value.is_acyclic()
    L = layer(TensorPower(2), 2, X)
    T = chain.tensor(X, X)
    assert all(L.value.homology_dim(d) == T.homology_dim(d) for d in range(-2, 5))


def test_relative_tower_at_zero_is_target():
    X = random_complex(np.random.default_rng(5), GF(5), 0, 1, 2)
    G = DirectSum((Identity(), TensorPower(2)))
    a = NatTrans(Identity(), G, "inclusion", index=0)
    rep = relative_tower(a, 0, X)
    assert chain.is_quasi_iso(rep.to_target)
