"""Functor terms: functoriality, dimensions and JSON."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwcalc import GF, QQ, ChainComplex
from gwcalc.cube import random_chain_map, random_complex, random_strongly_cocartesian
from gwcalc.functors import (Compose, ConeOf, Constant, DirectSum, FiberOf, Identity, NatTrans, Shift,
                             TensorPower, TensorWith, term_from_json, term_to_json, transform_from_json,
                             transform_to_json)
from gwcalc.io import SchemaError

seeds = st.integers(0, 10 ** 6)
K = ChainComplex.point(GF(5), 1)
TERMS = [Identity(), Constant(K), TensorPower(2), TensorPower(3), DirectSum((Identity(), TensorPower(2))),
         Shift(-1), Compose(TensorPower(2), Shift(1)), TensorWith(K),
         FiberOf(NatTrans(Identity(), DirectSum((Identity(), Identity())), "diagonal")),
         ConeOf(NatTrans(DirectSum((Identity(), TensorPower(2))), Identity(), "projection", index=0))]


@pytest.mark.parametrize("F", TERMS, ids=lambda t: type(t).__name__)
def test_functoriality(F):
    rng = np.random.default_rng(1)
    GF5 = GF(5)
    a, b, c = (random_complex(rng, GF5, 0, 1, 2) for _ in range(3))
    f, g = random_chain_map(rng, a, b), random_chain_map(rng, b, c)
    assert F.map(g @ f) == F.map(g) @ F.map(f)


@pytest.mark.parametrize("F", TERMS, ids=lambda t: type(t).__name__)
def test_json_roundtrip(F):
    d = term_to_json(F)
    assert term_to_json(term_from_json(d)) == d


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3))
def test_tensor_power_dimension(seed, k):
    X = random_complex(np.random.default_rng(seed), QQ, 0, 1, 2)
    assert TensorPower(k).obj(X).total_dim == X.total_dim ** k


def test_on_cube_preserves_commutativity():
    c = random_strongly_cocartesian(2, 2)
    out = TensorPower(2).on_cube(c)
    out.validate()


def test_bad_rule_is_schema_error():
    d = {"rule": "diagonal", "source": {"op": "identity"}, "target": {"op": "tensor_power", "k": 2}}
    with pytest.raises(SchemaError):
        transform_from_json(d)
    with pytest.raises(SchemaError, match="functor.op"):
        term_from_json({"op": "nope"})


def test_transform_roundtrip():
    a = NatTrans(DirectSum((Identity(), Identity())), Identity(), "fold")
    assert transform_to_json(transform_from_json(transform_to_json(a))) == transform_to_json(a)
