"""Command-line driver.  Every command writes one JSON report.

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 a search or dimension bound was exhausted.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Sequence

from .fincat import NotFunctorial, category_connectivity, functor_from_json, is_n_initial
from .operads import (
    ArityCapExceeded,
    OperadAxiomError,
    OperatorMorphism,
    fact_lt_category,
    load_operad,
    maximally_active_representatives,
    orbit_representatives,
    pi_homology,
    sigma,
    verify_part_vs_qpart,
    verify_qpart_reduction,
)
from .fin_pointed import PointedMap
from .patterns import (
    BoundExceeded,
    PatternError,
    check_unique_extension,
    enumerate_segal,
    functor_from_structure,
    is_segal,
    pattern_assoc,
    pattern_fin,
    right_kan_extend,
    segal_functor_from_json,
)

SCHEMA_VERSION = "1"
EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_BOUND = 0, 1, 2, 3
JOBS_ENV = "ARITYCHECK_JOBS"

log = logging.getLogger("aritycheck")


class InvalidInput(ValueError):
    pass


def _mu(O, k: int, index: int) -> OperatorMorphism:
    reps = orbit_representatives(O, k)
    if not 0 <= index < len(reps):
        raise InvalidInput(f"operation index {index} out of range (arity {k} has {len(reps)} orbits)")
    ins, c, op = reps[index]
    return OperatorMorphism(ins, (c,), PointedMap(k, 1, (1,) * k), (op,))


def cmd_pi(args) -> tuple[dict, int]:
    O = load_operad(args.operad, max(args.arity, 2))
    mu = _mu(O, args.arity, args.op)
    F = fact_lt_category(O, mu, args.which)
    profile = pi_homology(O, mu, args.which)
    cert = category_connectivity(F.category, args.cap)
    return {
        "command": "pi", "operad": O.name, "which": args.which, "arity": args.arity,
        "mu": mu.to_json(), "objects": F.category.n_objects,
        "homology": profile.to_json(), "connectivity": cert.to_json(),
    }, EXIT_OK


def _window_end(text: str) -> int:
    if text.lower() in ("inf", "infinity", "oo"):
        raise InvalidInput("the arity window must be finite")
    return int(text)


def cmd_sigma(args) -> tuple[dict, int]:
    k1 = _window_end(args.to)
    if not 1 <= args.k0 <= k1:
        raise InvalidInput(f"need 1 <= from <= to, got {args.k0}, {k1}")
    if args.cap < 1:
        raise InvalidInput("cap must be positive")
    O = load_operad(args.operad, max(k1, 2))
    res = sigma(O, args.k0, k1, args.which, args.cap, args.zmax, not args.fixed_cap)
    report = {"command": "sigma", "operad": O.name, **res.to_json()}
    if res.value is None:
        return report, EXIT_BOUND
    return report, EXIT_OK


def _verify_part_vs_qpart(O, arities) -> list[dict]:
    rows = []
    for k in arities:
        for i in range(len(orbit_representatives(O, k))):
            rows.append(verify_part_vs_qpart(O, _mu(O, k, i)))
    return rows


def _verify_reduction(O, arities, targets) -> list[dict]:
    rows = []
    for k in arities:
        for mu in maximally_active_representatives(O, k, max(targets)):
            if len(mu.dst) in targets:
                rows.append(verify_qpart_reduction(O, mu))
    return rows


def cmd_verify(args) -> tuple[dict, int]:
    if args.suite == "quillen-a":
        if not args.functor:
            raise InvalidInput("quillen-a needs --functor")
        with open(args.functor) as fh:
            F = functor_from_json(json.load(fh))
        rep = is_n_initial(F, args.n)
        rows = [{"check": "quillen_a", "pass": rep.verdict == "yes", **rep.to_json()}]
        exit_code = EXIT_OK if rep.verdict == "yes" else (EXIT_BOUND if rep.verdict == "unknown" else EXIT_FAIL)
        return {"command": "verify", "suite": args.suite, "instances": rows}, exit_code
    if args.k0 > args.k1:
        raise InvalidInput("need from <= to")
    O = load_operad(args.operad, max(args.k1, 2))
    arities = range(args.k0, args.k1 + 1)
    if args.suite == "part-vs-qpart":
        rows = _verify_part_vs_qpart(O, arities)
    else:
        rows = _verify_reduction(O, arities, set(args.targets))
    ok = all(r["pass"] for r in rows)
    return {"command": "verify", "suite": args.suite, "operad": O.name,
            "all_pass": ok, "instances": rows}, EXIT_OK if ok else EXIT_FAIL


def _pattern(name: str, k: int):
    if k < 0:
        raise InvalidInput("k must be non-negative")
    return pattern_fin(k) if name == "fin" else pattern_assoc(k)


_worker_patterns: dict = {}


def _init_worker(name: str, k: int, to: int) -> None:
    _worker_patterns["src"] = _pattern(name, k)
    _worker_patterns["tgt"] = _pattern(name, to)


def _check_one(job: tuple[int, dict, int]) -> dict:
    n, structure, bound = job
    F = functor_from_structure(_worker_patterns["src"], n, structure)
    return _verdict_row(F, _worker_patterns["tgt"], bound)


def _verdict_row(F, target, bound: int) -> dict:
    try:
        rep = check_unique_extension(F, target, bound)
    except BoundExceeded as exc:
        rep = {"verdict": "unknown", "reason": str(exc)}
    rep["structure"] = F.structure
    return rep


def _run_checks(args, source, target, functors) -> list[dict]:
    if args.jobs <= 1 or args.functor or len(functors) < 2:
        rows = []
        for i, F in enumerate(functors):
            log.info("checking functor %d of %d", i + 1, len(functors))
            rows.append(_verdict_row(F, target, args.bound))
        return rows
    jobs = [(args.base, F.structure, args.bound) for F in functors]
    with ProcessPoolExecutor(args.jobs, initializer=_init_worker,
                             initargs=(args.pattern, args.k, args.to)) as pool:
        # map keeps input order, so the merged report is deterministic
        return list(pool.map(_check_one, jobs))


def _functors(args, source):
    if args.functor:
        with open(args.functor) as fh:
            F = segal_functor_from_json(json.load(fh))
        if F.pattern.ref != source.ref:
            raise InvalidInput("supplied functor lives on a different pattern")
        return [F]
    if args.base is None:
        raise InvalidInput("need --base or --functor")
    return enumerate_segal(source, args.base, args.bound).functors


def cmd_segal(args) -> tuple[dict, int]:
    source = _pattern(args.pattern, args.k)
    report = {"command": "segal", "action": args.action, "pattern": source.ref, "base": args.base}
    if args.action == "enumerate":
        if args.base is None:
            raise InvalidInput("enumerate needs --base")
        E = enumerate_segal(source, args.base, args.bound)
        report.update(E.to_json())
        report["structures"] = [F.structure for F in E.functors] if args.list else None
        return report, EXIT_OK
    if args.to is None or args.to < args.k:
        raise InvalidInput("--to must be at least --k")
    target = _pattern(args.pattern, args.to)
    report["target"] = target.ref
    functors = _functors(args, source)
    if args.action == "extend":
        rows = []
        for F in functors:
            K = right_kan_extend(F, target, args.bound)
            G = K.functor
            rows.append({"structure": F.structure, "sizes": G.sizes,
                         "functorial": G.check_functorial() is None,
                         "segal": is_segal(G)[0], "diagnostics": K.diagnostics})
        report["extensions"] = rows
        ok = all(r["functorial"] and r["segal"] for r in rows)
        return report, EXIT_OK if ok else EXIT_FAIL
    rows = _run_checks(args, source, target, functors)
    counts: dict = {}
    for r in rows:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    report["verdicts"] = counts
    report["results"] = rows
    if counts.get("counterexample"):
        return report, EXIT_FAIL
    if counts.get("unknown"):
        return report, EXIT_BOUND
    return report, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="aritycheck", description="Arity approximation checks for discrete operads.")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")
    p.add_argument("--verbose", "-v", action="store_true", help="progress on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("pi", help="homology and connectivity of a partition complex")
    pi.add_argument("--operad", required=True)
    pi.add_argument("--arity", type=int, required=True)
    pi.add_argument("--which", choices=["part", "qpart"], default="part")
    pi.add_argument("--op", type=int, default=0, help="index of the operation orbit")
    pi.add_argument("--cap", type=int, default=8)
    pi.set_defaults(run=cmd_pi)

    sg = sub.add_parser("sigma", help="minimum connectivity over a finite arity window")
    sg.add_argument("--operad", required=True)
    sg.add_argument("--from", dest="k0", type=int, required=True)
    sg.add_argument("--to", required=True)
    sg.add_argument("--which", choices=["sigma", "qsigma"], default="sigma")
    sg.add_argument("--cap", type=int, default=4)
    sg.add_argument("--zmax", type=int, default=2)
    sg.add_argument("--fixed-cap", action="store_true", help="do not lower the cap as minima are found")
    sg.set_defaults(run=cmd_sigma)

    vf = sub.add_parser("verify", help="reduction propositions and Quillen A")
    vf.add_argument("suite", choices=["part-vs-qpart", "qpart-reduction", "quillen-a"])
    vf.add_argument("--operad", default="e_infinity")
    vf.add_argument("--from", dest="k0", type=int, default=3)
    vf.add_argument("--to", dest="k1", type=int, default=5)
    vf.add_argument("--targets", type=int, nargs="+", default=[1, 2, 3])
    vf.add_argument("--functor", help="functor JSON for quillen-a")
    vf.add_argument("--n", type=int, default=0)
    vf.set_defaults(run=cmd_verify)

    se = sub.add_parser("segal", help="Segal functors on truncated patterns")
    se.add_argument("action", choices=["enumerate", "extend", "check-unique"])
    se.add_argument("--pattern", choices=["fin", "assoc"], required=True)
    se.add_argument("--k", type=int, required=True)
    se.add_argument("--to", type=int)
    se.add_argument("--base", type=int)
    se.add_argument("--functor", help="Segal functor JSON instead of enumerating")
    se.add_argument("--bound", type=int, default=1_000_000)
    se.add_argument("--list", action="store_true", help="include the enumerated structures")
    se.add_argument("--jobs", type=int, default=int(os.environ.get(JOBS_ENV, "1")))
    se.set_defaults(run=cmd_segal)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        report, code = args.run(args)
    except (BoundExceeded, ArityCapExceeded) as exc:
        report, code = {"command": args.command, "error": "bound", "message": str(exc)}, EXIT_BOUND
    except (InvalidInput, PatternError, OperadAxiomError, NotFunctorial, ValueError,
            KeyError, OSError, json.JSONDecodeError) as exc:
        report, code = {"command": args.command, "error": "invalid_input", "message": str(exc)}, EXIT_INVALID
    report = {"schema_version": SCHEMA_VERSION, "exit_code": code, **report}
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
