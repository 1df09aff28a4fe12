"""Batch front end: ``gwcalc run job.json`` parses a job, dispatches it and writes a JSON report.

Exit codes: 0 success, 1 property failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Any, Callable

from . import calculus, dgalg
from .chain import ChainComplex, is_quasi_iso_in_window
from .cube import (CubeError, is_cartesian, is_cocartesian, is_strongly_cartesian,
                   is_strongly_cocartesian, left_kan_complete, right_kan_complete,
                   total_cofiber, total_fiber)
from .exactalg import GF
from .functors import FunctorError, term_from_json, transform_from_json
from .io import SchemaError, complex_from_json, cube_from_json, cube_to_json, field_from_json, map_from_json

SCHEMA = "gwcalc/1"
COMMANDS = ("CheckCube", "CompleteCube", "Tower", "RelativeTower", "Excisive", "SquareZero",
            "Cotangent", "NaiveCotangent", "Lift")
DEFAULTS = {"seed": 0, "window": None, "max_stages": 32, "trials": 50, "truncation": None}
PREDICATES = {"cartesian": is_cartesian, "cocartesian": is_cocartesian,
              "strongly_cartesian": is_strongly_cartesian, "strongly_cocartesian": is_strongly_cocartesian}


class Outcome:
    def __init__(self, result: dict, ok: bool = True):
        self.result = result
        self.ok = ok


# job parsing


def _int(job: dict, key: str, lo: int | None = None) -> int:
    v = job[key]
    if not isinstance(v, int) or isinstance(v, bool) or (lo is not None and v < lo):
        raise SchemaError(key, "expected an integer" + (f" >= {lo}" if lo is not None else ""))
    return v


def normalize_job(raw: Any, seed: int | None = None) -> dict:
    """Validate the envelope and fill defaults."""
    if not isinstance(raw, dict):
        raise SchemaError("$", "expected a job object")
    unknown = sorted(set(raw) - set(DEFAULTS) - {"command", "inputs"})
    if unknown:
        raise SchemaError(unknown[0], "unknown field")
    if raw.get("command") not in COMMANDS:
        raise SchemaError("command", f"expected one of {', '.join(COMMANDS)}")
    job = {"command": raw["command"]}
    for k, v in DEFAULTS.items():
        job[k] = raw.get(k, v)
    if seed is not None:
        job["seed"] = seed
    job["inputs"] = raw.get("inputs", {})
    if not isinstance(job["inputs"], dict):
        raise SchemaError("inputs", "expected an object")
    _int(job, "seed")
    _int(job, "max_stages", 1)
    _int(job, "trials", 1)
    if job["truncation"] is not None:
        _int(job, "truncation", 1)
    w = job["window"]
    if w is not None and not (isinstance(w, list) and len(w) == 2 and all(isinstance(x, int) for x in w)
                              and w[0] <= w[1]):
        raise SchemaError("window", "expected [lo, hi] with lo <= hi")
    return job


def _need(inputs: dict, key: str) -> Any:
    if key not in inputs:
        raise SchemaError(f"inputs.{key}", "missing")
    return inputs[key]


def _window(job: dict):
    return tuple(job["window"]) if job["window"] is not None else None


def _table(c: ChainComplex, window=None) -> dict[str, int]:
    if window is None:
        return {str(d): b for d, b in sorted(c.betti().items())}
    lo, hi = window
    return {str(d): c.homology_dim(d) for d in range(lo, hi + 1)}


def _poly_from_json(F, v, nvars: int, path: str) -> dict:
    terms = v.get("terms") if isinstance(v, dict) else None
    if not isinstance(terms, list):
        raise SchemaError(path, "expected {terms: [...]}")
    out: dict = {}
    for j, t in enumerate(terms):
        tp = f"{path}.terms[{j}]"
        if not isinstance(t, dict) or not isinstance(t.get("exps"), list) or len(t["exps"]) != nvars \
                or any(not isinstance(e, int) or e < 0 for e in t["exps"]):
            raise SchemaError(tp, f"expected {{coef, exps}} with {nvars} nonnegative exponents")
        try:
            c = F.parse(t.get("coef", "1"))
        except (ValueError, ZeroDivisionError, TypeError) as e:
            raise SchemaError(f"{tp}.coef", str(e)) from None
        m = tuple(t["exps"])
        out[m] = F.coerce(out.get(m, 0) + c)
    return {m: c for m, c in out.items() if c != 0}


# commands


def check_cube(job: dict) -> Outcome:
    inputs = job["inputs"]
    c = cube_from_json(_need(inputs, "cube"), "inputs.cube")
    pred = inputs.get("predicate")
    if pred is not None and pred not in PREDICATES:
        raise SchemaError("inputs.predicate", f"expected one of {', '.join(PREDICATES)}")
    res: dict = {"dim": c.dim, "valid": True}
    if c.dim:
        res["verdicts"] = {k: f(c) for k, f in PREDICATES.items()}
        res["total_fiber"] = _table(total_fiber(c))
        res["total_cofiber"] = _table(total_cofiber(c))
    ok = True
    if pred is not None:
        ok = bool(c.dim) and res["verdicts"][pred]
        res["predicate"] = {"name": pred, "holds": ok}
    return Outcome(res, ok)


def complete_cube(job: dict) -> Outcome:
    inputs = job["inputs"]
    kind = inputs.get("kind", "left")
    if kind not in ("left", "right"):
        raise SchemaError("inputs.kind", 'expected "left" or "right"')
    V = complex_from_json(_need(inputs, "vertex"), "inputs.vertex")
    entries = _need(inputs, "maps")
    if not isinstance(entries, list) or not entries:
        raise SchemaError("inputs.maps", "expected a nonempty list")
    maps = {}
    for i, e in enumerate(entries):
        p = f"inputs.maps[{i}]"
        if not isinstance(e, dict) or not isinstance(e.get("label"), str) or e["label"] in maps:
            raise SchemaError(f"{p}.label", "expected a distinct string label")
        W = complex_from_json(e.get("complex"), f"{p}.complex")
        src, tgt = (V, W) if kind == "left" else (W, V)
        maps[e["label"]] = map_from_json(e.get("map"), src, tgt, f"{p}.map")
    try:
        c = (left_kan_complete if kind == "left" else right_kan_complete)(V, maps)
    except CubeError as e:
        raise SchemaError("inputs.maps", str(e)) from None
    c.validate()
    prop = "strongly_cocartesian" if kind == "left" else "strongly_cartesian"
    holds = PREDICATES[prop](c)
    return Outcome({"cube": cube_to_json(c), "verdicts": {prop: holds}}, holds)


def _functor(inputs: dict, key: str = "functor"):
    return term_from_json(_need(inputs, key), None, f"inputs.{key}")


def _n(inputs: dict) -> int:
    n = _need(inputs, "n")
    if not isinstance(n, int) or n < 0:
        raise SchemaError("inputs.n", "expected an integer >= 0")
    return n


def tower(job: dict) -> Outcome:
    inputs = job["inputs"]
    F, n = _functor(inputs), _n(inputs)
    X = complex_from_json(_need(inputs, "complex"), "inputs.complex")
    rep = calculus.tower(F, n, X, _window(job), job["max_stages"])
    stages = []
    for s in rep.stages:
        e = {"k": s.k, "homology": rep.homology_table(s.k)}
        if s.comparison is not None:
            e["comparison_quasi_iso"] = is_quasi_iso_in_window(s.comparison, *rep.window)
        stages.append(e)
    res = {"n": n, "window": list(rep.window), "stabilized": rep.stabilized, "stage": rep.stage,
           "stages": [{**e, "homology": {str(d): v for d, v in e["homology"].items()}} for e in stages]}
    return Outcome(res, rep.stabilized)


def relative_tower(job: dict) -> Outcome:
    inputs = job["inputs"]
    a = transform_from_json(_need(inputs, "transform"), None, "inputs.transform")
    n = _n(inputs)
    X = complex_from_json(_need(inputs, "complex"), "inputs.complex")
    window = _window(job) or calculus.default_window(X, n)
    rep = calculus.relative_tower(a, n, X, window, job["max_stages"])
    res = {"n": n, "window": list(window), "stabilized": rep.stabilized, "stage": rep.stage,
           "value": _table(rep.value, window),
           "target": _table(rep.to_target.target, window),
           "to_target_quasi_iso": is_quasi_iso_in_window(rep.to_target, *window)}
    return Outcome(res, rep.stabilized)


def excisive(job: dict) -> Outcome:
    inputs = job["inputs"]
    F, n = _functor(inputs), _n(inputs)
    field = field_from_json(inputs["field"], "inputs.field") if "field" in inputs else GF(5)
    budget = inputs.get("budget", 2)
    if not isinstance(budget, int) or budget < 1:
        raise SchemaError("inputs.budget", "expected a positive integer")
    v = calculus.is_n_excisive(F, n, job["trials"], job["seed"], budget, field, _window(job))
    res: dict = {"n": n, "passed": v.passed, "trials": v.trials, "failures": v.failures}
    if v.witness is not None:
        res["witness"] = {"seed": v.witness_seed, "cube": cube_to_json(v.witness),
                          "image": cube_to_json(v.witness_image),
                          "image_total_fiber": _table(total_fiber(v.witness_image))}
    return Outcome(res, v.passed)


def square_zero(job: dict) -> Outcome:
    inputs = job["inputs"]
    i = dgalg.algebra_from_json(_need(inputs, "algebra"), "inputs.algebra", augmented=False)
    rep = dgalg.excisive_object_test(i, _window(job), job["truncation"])
    res = {"square_zero": rep.square_zero, "excisive": rep.excisive, "agree": rep.agree,
           "window": list(rep.window) if rep.window else None, "N": rep.N, "truncation_ok": rep.truncation_ok}
    return Outcome(res, rep.agree)


def cotangent(job: dict) -> Outcome:
    inputs = job["inputs"]
    if "presentation" in inputs:
        p = dgalg.presentation_from_json(inputs["presentation"], "inputs.presentation")
        try:
            a = dgalg.algebra_from_presentation(p)
        except (dgalg.AlgebraError, ValueError) as e:
            raise SchemaError("inputs.presentation", str(e)) from None
    else:
        a = dgalg.algebra_from_json(_need(inputs, "algebra"), "inputs.algebra", augmented=True)
    mw = inputs.get("max_weight")
    if mw is not None and (not isinstance(mw, int) or mw < 0):
        raise SchemaError("inputs.max_weight", "expected an integer >= 0")
    window = _window(job) or (0, 1)
    rep = dgalg.cotangent_via_p1(a, window, job["truncation"], mw)
    res = {"window": list(window), "N": rep.N, "truncation_ok": rep.truncation_ok,
           "homology": {str(d): v for d, v in rep.homology().items()}}
    return Outcome(res, rep.truncation_ok)


def _summary(s: dgalg.ModuleSummary) -> dict:
    out = {"kind": s.kind, "dim": s.dim, "rank": s.rank}
    if s.action_ranks is not None:
        out["action_ranks"] = list(s.action_ranks)
    return out


def naive(job: dict) -> Outcome:
    p = dgalg.presentation_from_json(_need(job["inputs"], "presentation"), "inputs.presentation")
    try:
        t = dgalg.naive_cotangent(p)
    except (dgalg.AlgebraError, ValueError) as e:
        raise SchemaError("inputs.presentation", str(e)) from None
    res: dict = {"H0": _summary(t.h0), "H-1": _summary(t.hm1)}
    ok = True
    if t.h0.kind == "finite" and t.quotient is not None:
        oracle = dgalg.kahler_jacobian(p)
        res["jacobian_oracle"] = _summary(oracle)
        ok = oracle.dim == t.h0.dim and oracle.action_ranks == t.h0.action_ranks
    if t.at_origin is not None:
        res["at_origin"] = {"coker": t.at_origin[0], "ker": t.at_origin[1]}
    return Outcome(res, ok)


def lift(job: dict) -> Outcome:
    inputs = job["inputs"]
    PA = dgalg.presentation_from_json(_need(inputs, "A"), "inputs.A")
    PB = dgalg.presentation_from_json(_need(inputs, "B"), "inputs.B")
    if PA.field != PB.field:
        raise SchemaError("inputs.B.field", "A and B must share a field")
    F = PA.field
    imgs = _need(inputs, "phi")
    if not isinstance(imgs, list) or len(imgs) != PA.nvars:
        raise SchemaError("inputs.phi", f"expected {PA.nvars} images")
    images = [_poly_from_json(F, v, PB.nvars, f"inputs.phi[{i}]") for i, v in enumerate(imgs)]
    try:
        A, QA = dgalg.quotient_algebra(PA)
        B, QB = dgalg.quotient_algebra(PB)
    except (dgalg.AlgebraError, ValueError) as e:
        raise SchemaError("inputs", str(e)) from None
    phi = dgalg.induced_map(QA, QB, images)
    gens = _need(inputs, "generators")
    n = inputs.get("module_dim")
    if not isinstance(n, int) or n < 0:
        raise SchemaError("inputs.module_dim", "expected an integer >= 0")
    if not isinstance(gens, list) or len(gens) != PA.nvars:
        raise SchemaError("inputs.generators", f"expected {PA.nvars} matrices")
    from .io import matrix_from_json
    mats = [matrix_from_json(F, g, (n, n), f"inputs.generators[{i}]") for i, g in enumerate(gens)]
    try:
        M = dgalg.module_from_generators(A, QA, mats)
        rep = dgalg.square_zero_lift(A, B, phi, M, _window(job) or (0, 2), job["truncation"])
    except dgalg.AlgebraError as e:
        raise SchemaError("inputs", str(e)) from None
    res = {"degree_dims": {str(d): v for d, v in sorted(rep.degree_dims.items())},
           "window": list(rep.window), "N": rep.N, "truncation_ok": rep.truncation_ok,
           "derived": _table(rep.derived, rep.window), "verified": rep.verified}
    return Outcome(res, rep.verified)


DISPATCH: dict[str, Callable[[dict], Outcome]] = {
    "CheckCube": check_cube, "CompleteCube": complete_cube, "Tower": tower,
    "RelativeTower": relative_tower, "Excisive": excisive, "SquareZero": square_zero,
    "Cotangent": cotangent, "NaiveCotangent": naive, "Lift": lift,
}


def run_job(raw: Any, seed: int | None = None, timing: bool = False) -> tuple[int, dict]:
    """Run a parsed job; returns ``(exit code, report)``."""
    t0 = time.perf_counter()
    try:
        job = normalize_job(raw, seed)
        out = DISPATCH[job["command"]](job)
    except SchemaError as e:
        return 2, {"schema": SCHEMA, "error": {"path": e.path, "message": e.message}}
    except (FunctorError, dgalg.AlgebraError, CubeError) as e:
        return 2, {"schema": SCHEMA, "error": {"path": "inputs", "message": str(e)}}
    report = {"schema": SCHEMA, "job": job, "status": "ok" if out.ok else "property_failure",
              "result": out.result}
    if timing:
        report["wall_time_s"] = round(time.perf_counter() - t0, 3)
    return (0 if out.ok else 1), report


def render_text(report: dict) -> str:
    """Human-readable summary; the JSON report is authoritative."""
    if "error" in report:
        return f"error at {report['error']['path']}: {report['error']['message']}"
    lines = [f"{report['job']['command']}: {report['status']}"]

    def walk(prefix: str, v):
        if isinstance(v, dict) and all(k.lstrip("-").isdigit() for k in v) and v:
            tag = "deg" if prefix.endswith("degree_dims") else "H"
            lines.append(f"  {prefix}: " + "  ".join(f"{tag}{k}={n}" for k, n in v.items()))
        elif isinstance(v, dict) and prefix.split(".")[-1] not in ("cube", "image"):
            for k, x in v.items():
                walk(f"{prefix}.{k}" if prefix else k, x)
        elif isinstance(v, list) and v and isinstance(v[0], dict) and "k" in v[0]:
            for e in v:
                walk(f"{prefix}[{e['k']}]", {k: x for k, x in e.items() if k != "k"})
        elif not isinstance(v, (dict, list)) or prefix.endswith("window"):
            lines.append(f"  {prefix}: {v}")

    walk("", report["result"])
    return "\n".join(lines)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gwcalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="cmd", required=True)
    run = sub.add_parser("run", help="run a job file")
    run.add_argument("job", help="path to a job JSON file")
    run.add_argument("--out", help="write the JSON report here and print a text summary")
    run.add_argument("--seed", type=int, default=None, help="override the job seed")
    run.add_argument("--threads", type=int, default=1, help="worker threads (results never depend on it)")
    run.add_argument("--timing", action="store_true", help="include wall time in the report")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.job) as fh:
            raw = json.load(fh)
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as e:
        print(f"error at $: invalid JSON ({e})", file=sys.stderr)
        return 2
    code, report = run_job(raw, args.seed, args.timing)
    if code == 2:
        print(render_text(report), file=sys.stderr)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps(report))
        if code != 2:
            print(render_text(report))
    else:
        sys.stdout.write(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
