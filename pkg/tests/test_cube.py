"""Cubes: total fibers, Kan completions, validation and JSON."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwcalc import GF, QQ
from gwcalc.cube import (Cube, CubeError, is_cartesian, is_cocartesian, is_strongly_cartesian,
                         is_strongly_cocartesian, left_kan_complete, punctured_holim, random_chain_map,
                         random_complex, random_strongly_cartesian, random_strongly_cocartesian, right_kan_complete,
                         total_cofiber, total_fiber, total_fiber_iterated)
from gwcalc.chain import is_quasi_iso
from gwcalc.io import SchemaError, cube_from_json, cube_to_json

seeds = st.integers(0, 10 ** 6)


def random_cube(seed: int, n: int, F):
    """Random strict cube: every vertex and edge generated, then made commutative by completion."""
    rng = np.random.default_rng(seed)
    X = random_complex(rng, F, 0, 2, 2)
    maps = {s: random_chain_map(rng, X, random_complex(rng, F, 0, 2, 2)) for s in "abc"[:n]}
    c = left_kan_complete(X, maps)
    return c


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([2, 3]), st.sampled_from([QQ, GF(5)]))
def test_total_fiber_and_cofiber_differ_by_shift(seed, n, F):
    c = random_cube(seed, n, F)
    tf, tc = total_fiber(c), total_cofiber(c)
    for d in range(-n - 1, 4):
        assert tf.homology_dim(d) == tc.homology_dim(d + n)


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_iterated_total_fiber_agrees(seed):
    c = random_strongly_cocartesian(seed, 3)
    a, b = total_fiber(c), total_fiber_iterated(c, ["c", "a", "b"])
    assert a.betti() == b.betti()


@settings(max_examples=15, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_kan_completions(seed, n):
    lc = random_strongly_cocartesian(seed, n)
    assert is_strongly_cocartesian(lc) and is_cocartesian(lc)
    rc = random_strongly_cartesian(seed, n)
    assert is_strongly_cartesian(rc) and is_cartesian(rc)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_cartesian_cube_maps_to_punctured_limit(seed):
    c = random_strongly_cartesian(seed, 2)
    _, comp = punctured_holim(c)
    assert is_quasi_iso(comp)


def _square(entry):
    k = {"field": "Q", "degrees": [{"d": 0, "dim": 1}]}
    one = [{"d": 0, "matrix": [["1"]]}]
    return {"index_set": ["a", "b"], "vertices": {"{}": k, "{a}": k, "{b}": k, "{a,b}": k},
            "edges": [{"from": "{}", "to": "{a}", "map": one}, {"from": "{}", "to": "{b}", "map": one},
                      {"from": "{a}", "to": "{a,b}", "map": one},
                      {"from": "{b}", "to": "{a,b}", "map": [{"d": 0, "matrix": [[entry]]}]}]}


def test_noncommuting_face_is_named():
    with pytest.raises(SchemaError) as e:
        cube_from_json(_square("2"))
    assert "face at {}" in str(e.value) and "'a','b'" in str(e.value)
    c = cube_from_json(_square("1"))
    assert is_cartesian(c) and is_cocartesian(c)


def test_missing_vertex_rejected():
    v = _square("1")
    del v["vertices"]["{a,b}"]
    with pytest.raises(SchemaError, match="missing vertex"):
        cube_from_json(v)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_json_roundtrip(seed):
    c = random_strongly_cocartesian(seed, 2, field=QQ)
    d = cube_to_json(c)
    c2 = cube_from_json(d)
    assert cube_to_json(c2) == d


def test_right_kan_rejects_wrong_target():
    from gwcalc import ChainComplex, ChainMap
    Z, W = ChainComplex.point(QQ, 0), ChainComplex.point(QQ, 0, 2)
    with pytest.raises(CubeError):
        right_kan_complete(Z, {"a": ChainMap.zero(Z, W)})


def test_zero_cube_predicates_raise():
    c = Cube([], [random_complex(np.random.default_rng(0), QQ)], {})
    with pytest.raises(CubeError):
        is_cartesian(c)
