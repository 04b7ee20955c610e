"""Batch front end: one JSON job in, one JSON report out.

Commands: analyze (monodromy, tree, subspace, divisor data), verify (run the
vanishing checks on Q), decompose (split a solution into reducible
summands), generate (emit a random reducible problem), selftest (run a fixed
miniature corpus).  Exit codes: 0 success / verdict true / nonempty
decomposition, 2 verdict false or not a solution, 1 internal error, 64
malformed input.
"""

from __future__ import annotations

import argparse
import importlib
import json
import sys

from . import __version__

# attribute access on the package would hit the re-exported functions
# (e.g. polymoment.monodromy is a function); resolve the modules directly
_monodromy_mod = importlib.import_module("polymoment.monodromy")
_poly_mod = importlib.import_module("polymoment.poly")
_series_mod = importlib.import_module("polymoment.series")
_solver_mod = importlib.import_module("polymoment.solver")
from .errors import MalformedInput, MomentProblemError, NotASolution
from .permgroup import lattice_to_json, perm_to_json
from .poly import ComplexPoly, chebyshev, poly_from_json, poly_to_json
from .rational import vector_to_json
from .solver import (
    build_instance,
    decompose_M,
    decompose_solution,
    double_decompositions,
    exists_nonzero_solution,
    random_reducible_problem,
    reducible_generators,
)

# --tol-* flag -> (module, attribute); overrides are process-local, which is
# sound here: the CLI runs exactly one job per process
_TOL_TARGETS = {
    "tol-root": (_poly_mod, "TOL_ROOT"),
    "tol-cluster": (_poly_mod, "TOL_CLUSTER"),
    "tol-decomp": (_poly_mod, "TOL_DECOMP"),
    "tol-track": (_monodromy_mod, "TOL_TRACK"),
    "tol-moment": (_series_mod, "TOL_MOMENT"),
    "tol-phi": (_series_mod, "TOL_PHI"),
    "tol-support": (_series_mod, "TOL_SUPPORT"),
    "tol-orth": (_series_mod, "TOL_ORTH"),
    "tol-recover": (_series_mod, "TOL_RECOVER"),
    "tol-point": (_solver_mod, "TOL_POINT_FACTOR"),
    "tol-block": (_solver_mod, "TOL_BLOCK"),
}


def _parse_complex(obj, name: str) -> complex:
    try:
        re, im = obj
        return complex(float(re), float(im))
    except Exception as exc:
        raise MalformedInput(f"field {name!r} must be a [re, im] pair") from exc


def _parse_poly(obj, name: str) -> ComplexPoly:
    try:
        return poly_from_json(obj)
    except Exception as exc:
        raise MalformedInput(f"field {name!r} is not a polynomial object") from exc


def _require(job: dict, field: str):
    if field not in job:
        raise MalformedInput(f"command needs field {field!r}")
    return job[field]


def _instance_from_job(job, seed: int):
    P = _parse_poly(_require(job, "P"), "P")
    a = _parse_complex(_require(job, "a"), "a")
    b = _parse_complex(_require(job, "b"), "b")
    return build_instance(P, a, b, seed=seed)


def run_analyze(job: dict, opts: dict) -> tuple[dict, int]:
    inst = _instance_from_job(job, opts["seed"])
    md, cac = inst.md, inst.cactus
    gens = reducible_generators(inst)
    report = {
        "n": inst.n,
        "base_point": [md.base_point.real, md.base_point.imag],
        "critical_values": [[v.real, v.imag] for v in md.critical_values],
        "supplemented": list(md.supplemented),
        "generators": [perm_to_json(g) for g in md.generators],
        "g_inf": perm_to_json(md.g_inf),
        "tree": {"vertices": cac.vertex_count(), "edges": cac.edge_count()},
        "V_a": list(cac.V_a),
        "V_b": list(cac.V_b),
        "f_vectors": [list(v) for v in inst.fv],
        "lattice": lattice_to_json(inst.D),
        "D": list(inst.D.divisors),
        "S": sorted(decompose_M(inst)),
        "i_P": inst.imprimitivity_count,
        "M_dim": inst.M.dim,
        "M_basis": [vector_to_json(row) for row in inst.M.basis],
        "existence": exists_nonzero_solution(inst),
        "reducible_generators": [
            {
                "d": g.d,
                "W": poly_to_json(g.W),
                "A": poly_to_json(g.A),
                "gap": g.gap,
            }
            for g in gens
        ],
        "double_decompositions": len(double_decompositions(inst)),
    }
    return report, 0


def run_verify(job: dict, opts: dict) -> tuple[dict, int]:
    inst = _instance_from_job(job, opts["seed"])
    Q = _parse_poly(_require(job, "Q"), "Q")
    rep = inst.verify(Q, I=opts["moments"], N=opts["truncation"])
    return rep.to_json(), 0 if rep.verdict else 2


def run_decompose(job: dict, opts: dict) -> tuple[dict, int]:
    from .poly import compose

    inst = _instance_from_job(job, opts["seed"])
    Q = _parse_poly(_require(job, "Q"), "Q")
    try:
        summands = decompose_solution(inst, Q, I=opts["moments"], N=opts["truncation"])
    except NotASolution as exc:
        return {"error": "NotASolution", "detail": str(exc)}, 2
    body = []
    for s in summands:
        item = s.to_json()
        r_factor = (inst.P - compose(s.A_tilde, s.W)).coeffs
        r_solution = (s.Q - compose(s.Q_tilde, s.W)).coeffs
        item["residuals"] = {
            "factor": max((abs(c) for c in r_factor), default=0.0),
            "solution": max((abs(c) for c in r_solution), default=0.0),
        }
        body.append(item)
    return {"count": len(summands), "summands": body}, 0


def run_generate(job: dict, opts: dict) -> tuple[dict, int]:
    prob = random_reducible_problem(opts["seed"])
    return {
        "P": poly_to_json(prob.P),
        "a": [prob.a.real, prob.a.imag],
        "b": [prob.b.real, prob.b.imag],
        "Q": poly_to_json(prob.Q),
        "inner": poly_to_json(prob.inner),
        "seed": prob.seed,
    }, 0


def run_selftest(job: dict, opts: dict) -> tuple[dict, int]:
    """A fixed miniature corpus touching every layer; seconds, not minutes."""
    results = {}

    t6 = chebyshev(6)
    results["chebyshev_composition"] = (
        _poly_mod.compose(chebyshev(3), chebyshev(2)).coeffs == t6.coeffs
    )

    import math

    a, b = -math.sqrt(3) / 2, math.sqrt(3) / 2
    inst = build_instance(t6, a, b, seed=opts["seed"])
    results["t6_divisors"] = inst.D.divisors == (1, 2, 3, 6)
    Q = 2 * chebyshev(2) + 5 * chebyshev(3)
    summands = decompose_solution(inst, Q, I=opts["moments"])
    results["t6_two_summands"] = len(summands) == 2

    z2 = ComplexPoly([0, 0, 1])
    inst2 = build_instance(z2, -1, 1, seed=opts["seed"])
    results["z2_subspace_dim"] = inst2.M.dim == 1
    try:
        decompose_solution(inst2, ComplexPoly([0, 1]))
        results["z2_negative_control"] = False
    except NotASolution:
        results["z2_negative_control"] = True

    inst3 = build_instance(z2, 0, 1, seed=opts["seed"])
    results["existence_gate"] = (not exists_nonzero_solution(inst3)) and not reducible_generators(inst3)

    ok = all(results.values())
    return {"results": results, "ok": ok}, 0 if ok else 1


_COMMANDS = {
    "analyze": run_analyze,
    "verify": run_verify,
    "decompose": run_decompose,
    "generate": run_generate,
    "selftest": run_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="polymoment",
        description="moment vanishing for complex polynomials on a segment",
    )
    ap.add_argument("--command", choices=sorted(_COMMANDS), help="overrides the job's command field")
    ap.add_argument("--input", "-i", help="job JSON file (default: stdin)")
    ap.add_argument("--output", "-o", help="report file (default: stdout)")
    ap.add_argument("--moments", type=int, default=25, help="number of moments I")
    ap.add_argument("--truncation", type=int, default=None, help="series truncation N")
    ap.add_argument("--seed", type=int, default=0)
    for flag in sorted(_TOL_TARGETS):
        ap.add_argument(f"--{flag}", type=float, default=None)
    return ap


def run_job(job: dict, args) -> tuple[dict, int]:
    command = args.command or job.get("command")
    if command not in _COMMANDS:
        raise MalformedInput(f"unknown or missing command: {command!r}")
    job_opts = job.get("options", {})
    if not isinstance(job_opts, dict):
        raise MalformedInput("options must be an object")
    opts = {
        "moments": int(job_opts.get("moments", args.moments)),
        "truncation": job_opts.get("truncation", args.truncation),
        "seed": int(job_opts.get("seed", args.seed)),
    }
    if opts["truncation"] is not None:
        opts["truncation"] = int(opts["truncation"])
    applied_tols = {}
    for flag, (mod, attr) in _TOL_TARGETS.items():
        key = flag.replace("-", "_")
        val = getattr(args, key, None)
        if val is None:
            val = job_opts.get(flag)
        if val is not None:
            setattr(mod, attr, float(val))
        applied_tols[flag] = getattr(mod, attr)
    body, code = _COMMANDS[command](job, opts)
    report = {
        "version": __version__,
        "command": command,
        "options": {**opts, "tolerances": applied_tols},
        "report": body,
    }
    return report, code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.input:
            with open(args.input) as fh:
                text = fh.read()
        elif not sys.stdin.isatty():
            text = sys.stdin.read()
        else:
            text = "{}"
        job = json.loads(text) if text.strip() else {}
        if not isinstance(job, dict):
            raise MalformedInput("job must be a JSON object")
    except MalformedInput:
        raise SystemExit(64)
    except (OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": "MalformedInput", "detail": str(exc)}), file=sys.stderr)
        return 64

    try:
        report, code = run_job(job, args)
    except MalformedInput as exc:
        print(json.dumps({"error": "MalformedInput", "detail": str(exc)}), file=sys.stderr)
        return 64
    except MomentProblemError as exc:
        print(
            json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
            file=sys.stderr,
        )
        return 1

    text = json.dumps(report, sort_keys=True, indent=2)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
