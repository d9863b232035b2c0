"""Command-line front end.

Exit codes: 0 success, 1 mathematical validation failure, 2 input error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

from . import io
from .bimod import certify_invariance, verify_chain_map
from .coeff import INF, BaseField, parse_rational
from .cubical import DayTensor, check_eilenberg_zilber, cub_chains, cub_validate
from .floer import build_cf, cf_homology, check_d_squared
from .flowcat import validate_flow_category
from .homalg import GradedComplex, cc_validate, homology
from .morse import (
    alexander_whitney_cup,
    continuation_from_matchings,
    cup_product_multimodule,
    find_matching,
    flow_category_from_morse,
    simplicial_homology,
    validate_matching,
)
from .stratcx import SignError, build_stratum_complex, with_solved_signs
from .stratmodel import (
    PartitionedModel,
    Refinement,
    validate_model,
    validate_partitioned,
    validate_refinement,
)
from .trees import induced_product_rank, validate_multicategory

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _nonzero(betti: dict) -> dict:
    return {str(k): v for k, v in sorted(betti.items()) if v}


def _field(text: str) -> BaseField:
    try:
        return BaseField.parse(text)
    except (ValueError, TypeError) as exc:
        raise io.InputError(f"unknown field {text!r}") from exc


def _cutoff(text):
    if text is None or str(text).lower() == "inf":
        return INF
    E = parse_rational(text)
    if E <= 0:
        raise io.InputError("cutoff must be positive")
    return E


def _require_field(fld: BaseField):
    if not fld.is_field:
        raise io.InputError("this command needs field coefficients (q, f2 or fp:N)")


# ---------------------------------------------------------------------------
# commands


def cmd_validate_model(args) -> dict:
    obj = io.load_model(args.path)
    kind = io.model_kind(obj)
    if isinstance(obj, Refinement):
        rep = validate_refinement(obj)
    elif isinstance(obj, PartitionedModel):
        rep = validate_partitioned(obj, without_boundary=args.without_boundary)
    elif kind == "stratum-data":
        rep = validate_model(obj.model)
        rep.merge(obj.check_signs(), "signs: ")
    else:
        rep = validate_partitioned(obj, True) if args.without_boundary else validate_model(obj)
    return {"ok": rep.ok, "kind": kind, "messages": rep.messages,
            "violations": rep.data.get("violations", [])}


def cmd_stratum_complex(args) -> dict:
    obj = io.load_model(args.path)
    fld = _field(args.field)
    if io.model_kind(obj) == "stratum-data":
        S = obj
    elif io.model_kind(obj) == "model":
        rep = validate_model(obj)
        if not rep.ok:
            return {"ok": False, "messages": rep.messages,
                    "violations": rep.data.get("violations", [])}
        dim = args.dim if args.dim is not None else obj.max_codim()
        try:
            S = with_solved_signs(obj, dim)
        except SignError as exc:
            return {"ok": False, "messages": [f"no consistent signs: {exc}"]}
    else:
        raise io.InputError("stratum-complex needs a model or stratum data")
    try:
        C = build_stratum_complex(S, fld)
    except SignError as exc:
        return {"ok": False, "messages": exc.args[0].messages if exc.args else ["bad signs"]}
    rep = cc_validate(C)
    H = homology(C)
    return {"ok": rep.ok, "generators": {str(k): len(C.in_degree(k)) for k in C.degrees()},
            "betti": _nonzero(H.betti), "torsion": {str(k): v for k, v in H.torsion.items()},
            "messages": rep.messages, "complex": C.to_json() if args.emit else None}


def _floer_instance(payload) -> dict:
    K, M, fld, grading, cutoff = payload
    rep = validate_matching(K, M)
    if not rep.ok:
        return {"ok": False, "messages": rep.messages}
    X = flow_category_from_morse(K, M, fld, grading, cutoff)
    C = build_cf(X)
    d2 = check_d_squared(C)
    H = cf_homology(C)
    oracle = simplicial_homology(K, fld)
    match = _nonzero(H.betti) == _nonzero(oracle.betti)
    return {"ok": d2.ok and match, "critical_cells": len(M.critical),
            "d_squared_residual_terms": d2.data.get("residual_terms", 0),
            "betti": _nonzero(H.betti), "oracle_betti": _nonzero(oracle.betti),
            "oracle_match": match, "messages": d2.messages}


def cmd_floer(args) -> dict:
    fld = _field(args.field)
    _require_field(fld)
    cutoff = _cutoff(args.cutoff)
    if args.category:
        X = io.load_flow_category(args.category)
        rep = validate_flow_category(X, check_strata=args.check)
        C = build_cf(X)
        d2 = check_d_squared(C)
        H = cf_homology(C)
        return {"ok": rep.ok and d2.ok, "validation": rep.messages,
                "d_squared_residual_terms": d2.data.get("residual_terms", 0),
                "residuals": d2.data.get("violations", []), "betti": _nonzero(H.betti)}
    if not args.complex:
        raise io.InputError("floer needs a complex file or --category")
    K = io.load_simplicial(args.complex)
    if args.matching:
        jobs = [io.load_matching(K, args.matching)]
    else:
        jobs = [find_matching(K, args.seed + i) for i in range(args.instances)]
    payloads = [(K, M, fld, args.grading, cutoff) for M in jobs]
    if args.jobs > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_floer_instance, payloads))
    else:
        results = [_floer_instance(p) for p in payloads]
    out = {"ok": all(r["ok"] for r in results), "complex": K.name, "field": fld.name(),
           "f_vector": list(K.f_vector())}
    if len(results) == 1:
        out.update(results[0])
        out["ok"] = results[0]["ok"]
    else:
        out["instances"] = results
    return out


def cmd_continuation(args) -> dict:
    fld = _field(args.field)
    _require_field(fld)
    K = io.load_simplicial(args.complex)
    if bool(args.matching_a) != bool(args.matching_b):
        raise io.InputError("give both matchings or neither")
    if args.matching_a:
        M1, M2 = io.load_matching(K, args.matching_a), io.load_matching(K, args.matching_b)
    else:
        M1, M2 = find_matching(K, args.seed), find_matching(K, args.seed + 1)
    for M in (M1, M2):
        rep = validate_matching(K, M)
        if not rep.ok:
            return {"ok": False, "messages": rep.messages}
    E = _cutoff(args.cutoff if args.cutoff is not None else "10")
    if E == INF:
        raise io.InputError("continuation needs a finite cutoff")
    fx = continuation_from_matchings(K, M1, M2, fld, args.grading)
    cert = certify_invariance(fx.f, fx.g, fx.h1, fx.h2, E)
    return {"ok": cert.ok, "complex": K.name, "cutoff": str(E),
            "critical_cells": [len(M1.critical), len(M2.critical)],
            "betti": [{str(k): v for k, v in sorted(b.items())} for b in cert.betti],
            "messages": cert.report.messages, "violations": cert.report.data.get("violations", [])}


def cmd_multimodule(args) -> dict:
    fld = _field(args.field)
    _require_field(fld)
    K = io.load_simplicial(args.complex)
    Ms = [find_matching(K, args.seed + i) for i in range(3)]
    cube, (X1, X2, X3) = cup_product_multimodule(K, *Ms, field=fld)
    rep = verify_chain_map(cube)
    rep.merge(validate_multicategory([cube]), "multicategory: ")

    def scalar(X):
        C = build_cf(X)
        return GradedComplex(fld, [(l, C.degree(l)) for l in C.labels],
                             {st: x.terms.get((), 0) for st, x in C.entries.items()})

    C1, C2, C3 = scalar(X1), scalar(X2), scalar(X3)
    table = cube.counts("")

    def morse_product(x, y):
        out = {}
        for ((p1, p2), q, _), c in table.items():
            v = x.get(p1, 0) * y.get(p2, 0) * c
            if v:
                out[q] = out.get(q, 0) + v
        return out

    S = K.chain_complex(fld)
    ranks = {}
    for a in range(K.dimension + 1):
        for b in range(K.dimension + 1 - a):
            r1 = induced_product_rank(C1, C2, C3, morse_product, a, b)
            r2 = induced_product_rank(S, S, S, lambda x, y: alexander_whitney_cup(K, x, y), a, b)
            ranks[f"{a},{b}"] = [r1, r2]
            if r1 != r2:
                rep.fail(f"product rank in degrees ({a}, {b}) is {r1}, oracle {r2}")
    return {"ok": rep.ok, "complex": K.name, "product_ranks": ranks, "messages": rep.messages}


def cmd_cubical_check(args) -> dict:
    fld = _field(args.field)
    _require_field(fld)
    A = io.load_cubical(args.set)
    target = A
    if args.tensor:
        target = DayTensor(A, io.load_cubical(args.tensor))
    rep = cub_validate(target, args.max_dim)
    if not rep.ok:
        return {"ok": False, "set": target.name, "messages": rep.messages[:20]}
    C = cub_chains(target, fld, args.max_dim)
    cc = cc_validate(C)
    rep.merge(cc, "chains: ")
    out = {"ok": rep.ok, "set": target.name,
           "classes": {str(k): len(C.in_degree(k)) for k in C.degrees()},
           "betti": _nonzero(homology(C).betti), "messages": rep.messages[:20],
           "relations_checked": rep.data.get("relations", 0)}
    if args.tensor:
        B = io.load_cubical(args.tensor)
        ez = check_eilenberg_zilber(A, B, B, fld)
        out["eilenberg_zilber"] = {"leibniz": ez.leibniz.ok, "associativity": ez.associativity.ok,
                                   "commutativity": ez.commutativity.ok}
        out["ok"] = out["ok"] and ez.ok
    return out


def cmd_homology(args) -> dict:
    fld = _field(args.field)
    K = io.load_simplicial(args.complex)
    H = simplicial_homology(K, fld)
    return {"ok": True, "complex": K.name, "field": fld.name(), "f_vector": list(K.f_vector()),
            "betti": {str(k): v for k, v in sorted(H.betti.items())},
            "torsion": {str(k): v for k, v in sorted(H.torsion.items())}}


# ---------------------------------------------------------------------------
# plumbing


def _render_text(command: str, result: dict) -> str:
    lines = [f"{command}: {'PASS' if result.get('ok') else 'FAIL'}"]
    for key in sorted(result):
        if key == "ok":
            continue
        val = result[key]
        if key == "messages":
            lines += [f"  {m}" for m in val]
            continue
        if isinstance(val, (dict, list)) and len(io.dumps(val)) > 200:
            val = io.dumps(val).replace("\n", " ")
            val = " ".join(val.split())
        lines.append(f"{key}: {val}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", default="q", help="q, z, f2 or fp:N (default q)")
    common.add_argument("--cutoff", default=None, help="energy cutoff E (positive rational)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--format", choices=("text", "structured"), default="text")

    p = argparse.ArgumentParser(prog="vfchain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate-model", parents=[common], help="validate a model file")
    s.add_argument("path")
    s.add_argument("--without-boundary", action="store_true")
    s.set_defaults(run=cmd_validate_model)

    s = sub.add_parser("stratum-complex", parents=[common], help="build a stratum complex")
    s.add_argument("path")
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--emit", action="store_true", help="include the complex in the output")
    s.set_defaults(run=cmd_stratum_complex)

    s = sub.add_parser("floer", parents=[common], help="Floer complex of a Morse matching")
    s.add_argument("complex", nargs="?")
    s.add_argument("--matching")
    s.add_argument("--random", action="store_true", help="use a random matching (default)")
    s.add_argument("--category", help="flow category JSON instead of a complex")
    s.add_argument("--grading", choices=("trivial", "dim"), default="trivial")
    s.add_argument("--instances", type=int, default=1)
    s.add_argument("--check", action="store_true", help="also validate strata posets")
    s.set_defaults(run=cmd_floer)

    s = sub.add_parser("continuation", parents=[common], help="certify invariance")
    s.add_argument("complex")
    s.add_argument("matching_a", nargs="?")
    s.add_argument("matching_b", nargs="?")
    s.add_argument("--grading", choices=("trivial", "dim"), default="trivial")
    s.set_defaults(run=cmd_continuation)

    s = sub.add_parser("multimodule", parents=[common], help="cup-product multimodule check")
    s.add_argument("complex")
    s.set_defaults(run=cmd_multimodule)

    s = sub.add_parser("cubical-check", parents=[common], help="validate a cubical set")
    s.add_argument("set", help="builtin name (point, interval, square, cubeN, "
                               "symmetric-square, circle) or JSON file")
    s.add_argument("--tensor", help="second factor for the Day tensor")
    s.add_argument("--max-dim", type=int, default=None)
    s.set_defaults(run=cmd_cubical_check)

    s = sub.add_parser("homology", parents=[common], help="simplicial homology oracle")
    s.add_argument("complex")
    s.set_defaults(run=cmd_homology)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        result = args.run(args)
    except io.InputError as exc:
        result = {"ok": False, "input_error": str(exc)}
        code = EXIT_INPUT
    else:
        code = EXIT_OK if result.get("ok") else EXIT_FAIL
    result = {k: v for k, v in result.items() if v is not None}
    if args.format == "structured":
        print(io.dumps({"command": args.command, "exit_code": code, **result}))
    else:
        print(_render_text(args.command, result))
    return code


if __name__ == "__main__":
    sys.exit(main())
