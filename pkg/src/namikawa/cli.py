"""Command line driver: ``namikawa <command> PROBLEM [flags]``.

PROBLEM is a JSON problem file or ``fixture:<name>`` for a bundled fixture.
Results go to stdout (or ``--out``) as JSON; diagnostics go to stderr.

Exit codes: 0 ok, 2 validation failure, 3 input error, 4 cap exceeded.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from .breakdiv import complement_graph, is_break_divisor_ineq, is_break_divisor_tree
from .graph import CapExceeded, GraphError
from .io import (
    FIXTURES,
    InputError,
    decomposition_to_json,
    divisor_from_json,
    divisor_to_json,
    dumps,
    load_json_text,
    parse_problem,
    type_from_json,
)
from .jacobian import DecompositionError, locate, namikawa_decomposition, refinement_map
from .reduction import is_equivalent
from .stability import (
    MODES,
    StabilityError,
    classify,
    enumerate_types,
    grade,
    os_is_semistable,
    os_is_stable,
    os_parameter,
    os_parameter_v,
    slope,
    twist,
)
from .svg import write_svg
from .verify import check_os_translation, run_verify

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT, EXIT_CAP = 0, 2, 3, 4
COMMANDS = ("classify", "grade", "enumerate", "os-translate", "decompose", "locate", "refine", "breakdiv", "verify")


class _Validation(Exception):
    """Raised after output is written when a validation check failed."""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="namikawa",
        description="Stability types and periodic cell decompositions of tropical Jacobians.",
        epilog=f"Bundled fixtures: {', '.join('fixture:' + f for f in FIXTURES)}",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("problem", help="problem JSON file or fixture:<name>")
    common.add_argument("--mode", choices=("ps", "qs"), default="ps", help="polystable or section-quasistable cells")
    common.add_argument("--degree", type=int, help="override the degree in the problem file")
    common.add_argument("--basepoint", help="override the basepoint vertex")
    common.add_argument("--section", help="override the section vertex used by qs mode")
    common.add_argument("--out", type=Path, help="write JSON here instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    common.add_argument("--force", action="store_true", help="lift the size caps")
    helps = {
        "classify": "stability report of one type",
        "grade": "associated polystable type of a semistable type",
        "enumerate": "all types of the problem degree in a stability class",
        "os-translate": "Oda-Seshadri parameters for a type, or an exhaustive comparison",
        "decompose": "cells of the decomposition with validation",
        "locate": "cell and witness divisor for a divisor class",
        "refine": "map from qs cells to the ps cells containing them",
        "breakdiv": "break-divisor test for a vertex divisor",
        "verify": "run the full invariant suite",
    }
    cmds = {name: sub.add_parser(name, parents=[common], help=h, description=h) for name, h in helps.items()}
    for name in ("classify", "grade", "os-translate", "breakdiv"):
        cmds[name].add_argument("--type", dest="type_json", help='type as JSON, e.g. {"S":[],"d":{"v1":0}}')
    cmds["enumerate"].add_argument(
        "--stability", choices=MODES, help="stability class (default: polystable for ps, quasistable for qs)"
    )
    cmds["decompose"].add_argument(
        "--svg", nargs="?", const="", metavar="PATH", help="also draw an SVG (first Betti number 1 or 2)"
    )
    cmds["decompose"].add_argument("--samples", type=int, default=32, help="random cover samples")
    for name in ("locate", "breakdiv"):
        cmds[name].add_argument("--divisor", help='divisor as JSON, e.g. [["v2",3]] or [[{"edge":"e1","offset":"1/3"},1]]')
    cmds["os-translate"].add_argument("--margin", type=int, default=2, help="box widening for the exhaustive check")
    cmds["verify"].add_argument("--divisors", type=int, default=50, help="random divisors per location check")
    cmds["verify"].add_argument("--timings", action="store_true", help="include per-check timings in the output")
    return p


def _spec(args):
    spec = parse_problem(args.problem)
    return spec.with_overrides(args.degree, args.basepoint, args.section)


def _type(args, G, required=True):
    if args.type_json is None:
        if required:
            raise InputError("E_TYPE", "this command needs --type")
        return None
    return type_from_json(G, load_json_text(args.type_json, "--type"))


def _divisor(args, G):
    if args.divisor is None:
        raise InputError("E_DIVISOR", "this command needs --divisor")
    return divisor_from_json(G, load_json_text(args.divisor, "--divisor"))


def _decompose(spec, mode, args, validate="full", samples=32):
    section = spec.section_vertex if mode == "qs" else None
    return namikawa_decomposition(
        spec.graph,
        spec.H,
        spec.degree,
        spec.basepoint,
        mode,
        section,
        validate=validate,
        samples=samples,
        seed=args.seed,
        strict=False,
        force=args.force,
    )


def cmd_classify(args, spec):
    G = spec.graph
    T = _type(args, G)
    return {"type": T.to_json(G), **classify(G, spec.H, T).to_json(G), "slope": str(slope(G, spec.H, T))}


def cmd_grade(args, spec):
    G = spec.graph
    T = _type(args, G)
    rng = None if args.seed == 0 else random.Random(args.seed)
    P = grade(G, spec.H, T, rng=rng)
    return {"type": T.to_json(G), "graded": P.to_json(G)}


def cmd_enumerate(args, spec):
    G = spec.graph
    kind = args.stability or ("polystable" if args.mode == "ps" else "quasistable")
    v = spec.section_vertex if kind == "quasistable" else None
    types = enumerate_types(G, spec.H, spec.degree, kind, v, force=args.force)
    out = {"degree": spec.degree, "stability": kind}
    if v is not None:
        out["vertex"] = v
    out["count"] = len(types)
    out["types"] = [T.to_json(G) for T in types]
    return out


def cmd_os_translate(args, spec):
    G, H, deg, bp = spec.graph, spec.H, spec.degree, spec.basepoint
    T = _type(args, G, required=False)
    if T is None:
        ok, detail = check_os_translation(G, H, deg, bp, args.margin)
        detail = {"passed": ok, **detail}
        if not ok:
            raise _Validation(detail)
        return detail
    deg = T.degree  # the type fixes its own degree
    r = classify(G, H, T)
    T0 = twist(T, bp, -deg)
    q = os_parameter(G, H, deg, bp, T)
    qv = os_parameter_v(G, H, deg, bp, spec.section_vertex, T)
    return {
        "type": T.to_json(G),
        "twisted": T0.to_json(G),
        "q": q.to_json()["q"],
        "q_section": qv.to_json(),
        "section": spec.section_vertex,
        "os_semistable": os_is_semistable(G, q, T0),
        "os_stable": os_is_stable(G, q, T0),
        "os_section_stable": os_is_stable(G, qv, T0),
        "semistable": r.semistable,
        "stable": r.stable,
        "quasistable": spec.section_vertex in r.quasistable_for,
    }


def cmd_decompose(args, spec):
    dec = _decompose(spec, args.mode, args, samples=args.samples)
    out = decomposition_to_json(dec, poset=dec.report.passed)
    if args.svg is not None:
        if dec.n in (1, 2):
            path = Path(args.svg) if args.svg else (args.out.with_suffix(".svg") if args.out else Path("decomposition.svg"))
            write_svg(dec, path)
            print(f"wrote {path}", file=sys.stderr)
        else:
            print(f"no SVG: first Betti number is {dec.n}", file=sys.stderr)
    status = "PASS" if dec.report.passed else "FAIL"
    print(f"{status}: {len(dec.cells)} cells, {dec.report.maximal_cells} maximal", file=sys.stderr)
    if not dec.report.passed:
        raise _Validation(out)
    return out


def cmd_locate(args, spec):
    G = spec.graph
    D = _divisor(args, G)
    if D.degree != spec.degree:
        raise InputError("E_DEGREE", f"divisor has degree {D.degree}, the problem degree is {spec.degree}")
    dec = _decompose(spec, args.mode, args, validate="none")
    loc = locate(dec, D)
    out = {"divisor": divisor_to_json(D), "mode": args.mode, **loc.to_json(G)}
    out["certified"] = is_equivalent(G, loc.witness, D, spec.basepoint)
    if not out["certified"]:
        raise _Validation(out)
    return out


def cmd_refine(args, spec):
    ps = _decompose(spec, "ps", args, validate="none")
    qs = _decompose(spec, "qs", args, validate="none")
    rep = refinement_map(qs, ps)
    return {"section": qs.section, **rep.to_json(qs, ps)}


def cmd_breakdiv(args, spec):
    G = spec.graph
    T = _type(args, G, required=False)
    if T is not None:
        C = complement_graph(G, T.S)
        tree = is_break_divisor_tree(C, T.d) if C.is_connected() else None
        try:
            ineq = is_break_divisor_ineq(G, T.S, T.d)
        except ValueError as exc:
            raise InputError("E_DEGREE", str(exc)) from None
        out = {"type": T.to_json(G), "break_divisor": ineq}
        if tree is not None:
            out["tree_test"] = tree.to_json()
        return out
    D = _divisor(args, G)
    if not D.is_vertex_supported():
        raise InputError("E_DIVISOR", "break-divisor tests need a divisor supported on vertices")
    d = D.vertex_part()
    w = is_break_divisor_tree(G, d)
    out = {"divisor": d.to_dict(G), **w.to_json()}
    if d.degree == G.genus:
        out["inequalities"] = is_break_divisor_ineq(G, frozenset(), d)
    return out


def cmd_verify(args, spec):
    rep = run_verify(spec, seed=args.seed, divisors=args.divisors, force=args.force)
    for c in rep.checks:
        tag = "PASS" if c.passed else ("INFO" if c.info else "FAIL")
        print(f"{tag} {c.name}", file=sys.stderr)
    out = rep.to_json(timings=args.timings)
    if not rep.passed:
        raise _Validation(out)
    return out


HANDLERS = {
    "classify": cmd_classify,
    "grade": cmd_grade,
    "enumerate": cmd_enumerate,
    "os-translate": cmd_os_translate,
    "decompose": cmd_decompose,
    "locate": cmd_locate,
    "refine": cmd_refine,
    "breakdiv": cmd_breakdiv,
    "verify": cmd_verify,
}


def _emit(args, obj) -> None:
    text = dumps(obj)
    if args.out is not None:
        args.out.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _error(code: str, message: str) -> None:
    sys.stderr.write(dumps({"error": code, "message": message}))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = _spec(args)
        out = HANDLERS[args.command](args, spec)
    except _Validation as exc:
        _emit(args, exc.args[0])
        return EXIT_VALIDATION
    except InputError as exc:
        _error(exc.code, exc.message)
        return EXIT_INPUT
    except CapExceeded as exc:
        _error("E_CAP", f"{exc}; pass --force to lift the cap")
        return EXIT_CAP
    except DecompositionError as exc:
        _error(f"E_{exc.clause.upper()}", str(exc))
        return EXIT_VALIDATION
    except (StabilityError, GraphError) as exc:
        _error("E_INPUT", str(exc))
        return EXIT_INPUT
    _emit(args, out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
