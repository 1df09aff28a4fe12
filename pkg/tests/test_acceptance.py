"""Acceptance suite: eleven criteria, one PASS/FAIL line each.

Run with ``pytest -s tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import time

import numpy as np

from gwcalc import GF, QQ, ChainComplex, ChainMap, chain
from gwcalc import dgalg as dg
from gwcalc import groebner as gb
from gwcalc.calculus import (cone_value, idempotence_check, is_n_excisive,
                             relative_on_cube, relative_tower, t_n, tower)
from gwcalc.cube import (Cube, is_cartesian, random_chain_map, random_complex,
                         random_strongly_cartesian, random_strongly_cocartesian, total_cofiber, total_fiber)
from gwcalc.exactalg import Matrix, block, kernel_basis, rank
from gwcalc.functors import Constant, DirectSum, Identity, NatTrans, TensorPower

RESULTS: dict[int, tuple[bool, str]] = {}


def report(n: int, ok: bool, detail: str):
    RESULTS[n] = (ok, detail)
    print(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# generators


def summand_cube(seed: int, n: int, F) -> Cube:
    """``X(T) = ⊕_{S ⊆ T} A_S``; edges include summands and add a random ``A_∅ -> A_{i}`` component."""
    rng = np.random.default_rng(seed)
    A = [random_complex(rng, F, 0, 2, 2) for _ in range(1 << n)]
    phi = [random_chain_map(rng, A[0], A[1 << i]) for i in range(n)]
    subsets = [[S for S in range(1 << n) if S & ~T == 0] for T in range(1 << n)]
    verts = [chain.direct_sum([A[S] for S in subsets[T]], F) for T in range(1 << n)]
    edges = {}
    for T in range(1 << n):
        for i in range(n):
            if T >> i & 1:
                continue
            U = T | 1 << i
            blocks = {}
            for d in verts[T].degrees:
                src = [A[S].dim(d) for S in subsets[T]]
                tgt = [A[S].dim(d) for S in subsets[U]]
                bl = {(subsets[U].index(S), k): Matrix.identity(F, A[S].dim(d)) for k, S in enumerate(subsets[T])}
                bl[(subsets[U].index(1 << i), 0)] = phi[i].block(d)
                blocks[d] = block(F, tgt, src, bl)
            edges[(T, i)] = ChainMap(verts[T], verts[U], blocks)
    return Cube([chr(97 + i) for i in range(n)], verts, edges)


def strict_cube(seed: int, n: int, F) -> Cube:
    """Rotate through four families of strict cubes."""
    kind = seed % 4
    if kind == 0:
        return summand_cube(seed, n, F)
    if kind == 1:
        return random_strongly_cocartesian(seed, n, field=F)
    if kind == 2:
        return random_strongly_cartesian(seed, n, field=F)
    return TensorPower(2).on_cube(random_strongly_cocartesian(seed, n, budget=1, field=F))


# criteria


def test_criterion_01_stability():
    t0 = time.perf_counter()
    bad = 0
    count = 0
    for F in (GF(5), QQ):
        for n in (2, 3):
            for s in range(50):
                c = strict_cube(1000 * n + s, n, F)
                tf, tc = total_fiber(c), total_cofiber(c)
                degs = set(tf.degrees) | {d - n for d in tc.degrees}
                bad += any(tf.homology_dim(d) != tc.homology_dim(d + n) for d in degs)
                count += 1
    dt = time.perf_counter() - t0
    report(1, bad == 0 and count == 200 and dt < 60, f"{count} cubes, {bad} mismatches, {dt:.1f}s")


def test_criterion_02_excisive_identity():
    t0 = time.perf_counter()
    cart = sum(is_cartesian(random_strongly_cocartesian(s, 2)) for s in range(200))
    v = is_n_excisive(Identity(), 1, trials=200, seed=0, stop_at_first=False)
    dt = time.perf_counter() - t0
    ok = cart == 200 and v.passed and v.failures == 0 and v.witness is None and dt < 60
    report(2, ok, f"{cart}/200 Cartesian, refuter failures {v.failures}, {dt:.1f}s")


def test_criterion_03_identity_fixed_point():
    bad = 0
    for s in range(50):
        X = random_complex(np.random.default_rng(s), GF(5) if s % 2 else QQ, -1, 2, 2)
        _, theta = t_n(Identity(), 1, X)
        bad += not chain.is_quasi_iso(theta)
    report(3, bad == 0, f"50 complexes, {bad} non-quasi-isos")


def test_criterion_04_idempotence():
    rng = np.random.default_rng(4)
    bad = []
    for s in range(20):
        X = random_complex(rng, GF(5), 0, 1, 2)
        n = 1 + s % 2
        pick = s % 4
        F = [Identity(), Constant(random_complex(rng, GF(5), 0, 1, 2)), TensorPower(2),
             DirectSum((Identity(), TensorPower(2)))][pick]
        ok, _, _ = idempotence_check(F, n, X)
        if not ok:
            bad.append(s)
    report(4, not bad, f"20 pairs, changed: {bad}")


def test_criterion_05_tensor_square_tower():
    bad = 0
    for s in range(10):
        X = random_complex(np.random.default_rng(50 + s), GF(5), 0, 1, 2)
        T = chain.tensor(X, X)
        rep = tower(TensorPower(2), 1, X, window=(-1, 9), max_stages=6, min_stages=6)
        for k in range(7):
            oracle = chain.shift(T, k)
            got = rep.stages[k].value
            bad += any(got.homology_dim(d) != oracle.homology_dim(d) for d in range(-1, 10))
    report(5, bad == 0, f"10 complexes x stages 0..6, {bad} mismatches")


def test_criterion_06_cone_functor():
    bad = 0
    for s in range(10):
        X = random_complex(np.random.default_rng(60 + s), QQ if s % 2 else GF(5), 0, 2, 2)
        for size in (2, 3, 4):
            C = cone_value(range(size), X)
            bad += any(C.homology_dim(d) != (size - 1) * X.homology_dim(d - 1) for d in range(-1, 5))
    report(6, bad == 0, f"10 complexes x |S| in 2,3,4, {bad} mismatches")


def test_criterion_07_square_zero_biconditional():
    rng = np.random.default_rng(7)
    suite = [("k[x]/x^2", dg.ker_cok(dg.truncated_polynomial(QQ, 2)), True),
             ("k[x]/x^3", dg.ker_cok(dg.truncated_polynomial(QQ, 3)), False),
             ("zero", dg.zero_nonunital(QQ), True)]
    suite += [(f"random{s}", dg.random_square_zero(QQ, rng), True) for s in range(10)]
    suite += [("acyclic_idempotent", dg.acyclic_idempotent(QQ), True),
              ("homotopy_square_zero", dg.homotopy_square_zero(QQ), True),
              ("graded_negative", dg.graded_negative(QQ), False)]
    bad = []
    for name, I, want in suite:
        r = dg.excisive_object_test(I)
        if not (r.agree and r.square_zero == want):
            bad.append(name)
    report(7, not bad, f"{len(suite)} cases, disagreements: {bad}")


def test_criterion_08_naive_cotangent():
    pres = lambda v, r: gb.Presentation.make(QQ, v, r)  # noqa: E731
    free = dg.naive_cotangent(pres(["x"], []))
    dual = dg.naive_cotangent(pres(["x"], [{(2,): 1}]))
    unit = dg.naive_cotangent(pres(["x", "y"], [{(1, 1): 1, (0, 0): -1}]))
    worked = (free.h0.kind == "free" and free.h0.rank == 1 and free.hm1.rank == 0
              and dual.h0.dim == 1 and dual.hm1.dim == 1
              and unit.h0.kind == "projective" and unit.h0.rank == 1 and unit.hm1.rank == 0)
    rng = np.random.default_rng(8)
    bad = 0
    for s in range(20):
        P = dg.random_presentation(QQ if s % 2 else GF(5), rng)
        h0, o = dg.naive_cotangent(P).h0, dg.kahler_jacobian(P)
        bad += (h0.dim, h0.action_ranks) != (o.dim, o.action_ranks)
    report(8, worked and bad == 0, f"worked examples {'ok' if worked else 'wrong'}, {bad}/20 oracle mismatches")


def _lift_cases():
    k = dg.ground(QQ)
    one = Matrix.identity(QQ, 1)
    cases = [("M=0", k, k, one, dg.AlgebraModule(k, 0, (Matrix.zero(QQ, 0, 0),)), 1, 0),
             ("k,k,k", k, k, one, dg.AlgebraModule(k, 1, (one,)), 1, 1)]
    PA = gb.Presentation.make(QQ, ["t"], [{(2,): 1}])
    PB = gb.Presentation.make(QQ, ["t", "x"], [{(2, 0): 1}, {(0, 2): 1, (1, 0): -1}])
    A, QA = dg.quotient_algebra(PA)
    B, QB = dg.quotient_algebra(PB)
    phi = dg.induced_map(QA, QB, [{(1, 0): QQ.coerce(1)}])
    M = dg.module_from_generators(A, QA, [Matrix.from_rows(QQ, [[0]])])
    # B ⊗_A (t) = B ⊗_A k = B/tB
    t_on_B = Matrix(QQ, QB.left({(1, 0): QQ.coerce(1)}))
    cases.append(("x^2-t", A, B, phi, M, QB.dim, QB.dim - rank(t_on_B)))
    rng = np.random.default_rng(9)
    while len(cases) < 8:
        A, B, phi, M = dg.random_lift_triple(QQ, rng)
        if A.underlying.total_dim + B.underlying.total_dim + M.dim <= 40:
            cases.append((f"random{len(cases) - 3}", A, B, phi, M, None, None))
    return cases


def test_criterion_09_square_zero_lift():
    t0 = time.perf_counter()
    bad = []
    for name, A, B, phi, M, d0, d1 in _lift_cases():
        r = dg.square_zero_lift(A, B, phi, M, window=(0, 2))
        dims_ok = d0 is None or (r.degree_dims.get(0, 0), r.degree_dims.get(1, 0)) == (d0, d1)
        if not (r.verified and r.truncation_ok and r.N == 4 and dims_ok):
            bad.append(name)
    dt = time.perf_counter() - t0
    report(9, not bad and dt < 120, f"8 triples, failures: {bad}, {dt:.1f}s")


def test_criterion_10_relative():
    rng = np.random.default_rng(10)
    ID, TP = Identity(), TensorPower(2)
    pool = [NatTrans(ID, DirectSum((ID, TP)), "inclusion", index=0),
            NatTrans(DirectSum((ID, TP)), ID, "projection", index=0),
            NatTrans(ID, DirectSum((ID, ID)), "diagonal"),
            NatTrans(DirectSum((ID, ID)), ID, "fold"),
            NatTrans(TP, ID, "zero"),
            NatTrans(ID, ID, "scalar", scalar=2)]
    bad = 0
    for s in range(20):
        a = pool[s % len(pool)]
        X = random_complex(rng, GF(5), 0, 1, 2)
        bad += not chain.is_quasi_iso(relative_tower(a, 0, X).to_target)
    a = NatTrans(DirectSum((ID, TP)), ID, "projection", index=0)
    # the evaluation and the Cartesian check share one window; outside it the tower has not converged
    W = (-3, 5)
    v = is_n_excisive(lambda c: relative_on_cube(a, 1, c, window=W)[0], 1, trials=50, window=W)
    report(10, bad == 0 and v.passed, f"P0 mismatches {bad}/20, P1 refuter {'pass' if v.passed else 'fail'} "
                                      f"({v.trials} trials)")


def _minimal_resolution_tor(top: int) -> list[int]:
    """Tor over A = k[x]/x² from ``... -> A -x-> A -x-> A -> k``, tensored with k."""
    F = QQ
    x = Matrix.from_rows(F, [[0, 0], [1, 0]])          # multiplication by x on basis 1, x
    # exactness of the resolution in positive degrees: ker x = im x
    assert kernel_basis(x).cols == rank(x) == 1
    # ⊗_A k sends A to k and x to 0
    eps = Matrix.from_rows(F, [[1, 0]])
    induced = [eps @ x @ Matrix.from_rows(F, [[1], [0]])] * top
    C = ChainComplex(F, {i: 1 for i in range(top + 1)}, {i: induced[i - 1] for i in range(1, top + 1)})
    return [C.homology_dim(i) for i in range(top + 1)]


def test_criterion_11_bar_suspension():
    oracle = _minimal_resolution_tor(7)
    B = dg.bar_suspension(dg.truncated_polynomial(QQ, 2), 9)
    got = [B.homology_dim(i) for i in range(8)]
    report(11, got == oracle == [1] * 8, f"Tor 0..7 = {got}")


CRITERIA = [test_criterion_01_stability, test_criterion_02_excisive_identity, test_criterion_03_identity_fixed_point,
            test_criterion_04_idempotence, test_criterion_05_tensor_square_tower, test_criterion_06_cone_functor,
            test_criterion_07_square_zero_biconditional, test_criterion_08_naive_cotangent,
            test_criterion_09_square_zero_lift, test_criterion_10_relative, test_criterion_11_bar_suspension]


if __name__ == "__main__":
    failed = 0
    for f in CRITERIA:
        try:
            f()
        except AssertionError:
            failed += 1
    print(f"{len(CRITERIA) - failed}/{len(CRITERIA)} criteria pass")
