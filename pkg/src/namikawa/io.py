"""JSON formats: problem files, types, divisors and decomposition exports.

Rationals are written as strings ``"p/q"`` (or ``"n"``) and read from strings
or integers.  Floats are rejected everywhere: they are not exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .graph import (
    Chain,
    Divisor,
    Edge,
    EdgePoint,
    GraphError,
    MetricGraph,
    TropicalDivisor,
    Vertex,
    VertexPoint,
)
from .jacobian import Cell, Decomposition, LatticeData, ValidationReport, face_poset
from .stability import Polarization, SheafType

FIXTURES = ("l2", "triangle", "dumbbell")


class InputError(ValueError):
    """Rejected input; ``code`` is a stable machine-readable identifier."""

    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


def _rational(x, code: str, what: str) -> Fraction:
    if isinstance(x, bool) or isinstance(x, float):
        raise InputError(code, f"{what} must be an integer or a rational string, got {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(code, f"{what} is not a rational number: {x!r}") from None
    raise InputError(code, f"{what} must be an integer or a rational string, got {x!r}")


def _integer(x, code: str, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise InputError(code, f"{what} must be an integer, got {x!r}")
    return x


def _require(obj: Mapping, key: str, kind, what: str):
    if key not in obj:
        raise InputError("E_JSON", f"missing {what} ({key!r})")
    value = obj[key]
    if not isinstance(value, kind):
        raise InputError("E_JSON", f"{what} has the wrong JSON type")
    return value


def rational_str(x: Fraction) -> str:
    return str(Fraction(x))


# ---------------------------------------------------------------------------
# graphs


def graph_from_json(obj: Mapping) -> MetricGraph:
    if not isinstance(obj, Mapping):
        raise InputError("E_JSON", "graph spec must be a JSON object")
    verts = []
    for v in _require(obj, "vertices", list, "vertex list"):
        if not isinstance(v, Mapping) or not isinstance(v.get("id"), str):
            raise InputError("E_JSON", f"bad vertex entry {v!r}")
        w = v.get("weight", 0)
        if isinstance(w, bool) or not isinstance(w, int) or w < 0:
            raise InputError("E_WEIGHT", f"vertex {v['id']!r}: weight must be a nonnegative integer")
        verts.append(Vertex(v["id"], w))
    ids = [v.id for v in verts]
    if len(set(ids)) != len(ids):
        raise InputError("E_ID", "duplicate vertex id")
    known = set(ids)
    edges = []
    for e in obj.get("edges", []):
        if not isinstance(e, Mapping) or not all(isinstance(e.get(k), str) for k in ("id", "tail", "head")):
            raise InputError("E_JSON", f"bad edge entry {e!r}")
        for end in ("tail", "head"):
            if e[end] not in known:
                raise InputError("E_ID", f"edge {e['id']!r}: unknown {end} {e[end]!r}")
        length = _rational(e.get("length", 1), "E_LENGTH", f"length of edge {e['id']!r}")
        if length <= 0:
            raise InputError("E_LENGTH", f"edge {e['id']!r}: length must be positive")
        edges.append(Edge(e["id"], e["tail"], e["head"], length))
    eids = [e.id for e in edges]
    if len(set(eids)) != len(eids) or set(eids) & known:
        raise InputError("E_ID", "duplicate edge id")
    try:
        return MetricGraph(tuple(verts), tuple(edges))
    except GraphError as exc:
        raise InputError("E_JSON", str(exc)) from None


def graph_to_json(G: MetricGraph) -> dict:
    return {
        "vertices": [{"id": v.id, "weight": v.weight} for v in G.vertices],
        "edges": [{"id": e.id, "tail": e.tail, "head": e.head, "length": rational_str(e.length)} for e in G.edges],
    }


# ---------------------------------------------------------------------------
# problems


@dataclass(frozen=True)
class ProblemSpec:
    graph: MetricGraph
    polarization: Divisor
    degree: int
    basepoint: str
    section: str | None = None

    @property
    def H(self) -> Polarization:
        return Polarization(self.polarization)

    @property
    def section_vertex(self) -> str:
        return self.section if self.section is not None else self.basepoint

    def with_overrides(self, degree=None, basepoint=None, section=None) -> "ProblemSpec":
        spec = ProblemSpec(
            self.graph,
            self.polarization,
            self.degree if degree is None else degree,
            self.basepoint if basepoint is None else basepoint,
            self.section if section is None else section,
        )
        spec.validate()
        return spec

    def validate(self) -> "ProblemSpec":
        G = self.graph
        for v in self.polarization:
            if v not in G.vindex:
                raise InputError("E_ID", f"polarization names unknown vertex {v!r}")
        for v in G.vertex_ids:
            if self.polarization[v] < 1:
                raise InputError("E_POLARIZATION", f"polarization must be positive at every vertex (vertex {v!r})")
        if self.basepoint not in G.vindex:
            raise InputError("E_ID", f"unknown basepoint {self.basepoint!r}")
        if self.section is not None and self.section not in G.vindex:
            raise InputError("E_ID", f"unknown section vertex {self.section!r}")
        return self

    def to_json(self) -> dict:
        out = graph_to_json(self.graph)
        out["polarization"] = self.polarization.to_dict(self.graph)
        out["degree"] = self.degree
        out["basepoint"] = self.basepoint
        if self.section is not None:
            out["section"] = self.section
        return out


def problem_from_json(obj: Any) -> ProblemSpec:
    if not isinstance(obj, Mapping):
        raise InputError("E_JSON", "problem file must hold a JSON object")
    G = graph_from_json(obj)
    raw = _require(obj, "polarization", dict, "polarization")
    pol = {}
    for v, x in raw.items():
        if isinstance(x, bool) or not isinstance(x, int):
            raise InputError("E_POLARIZATION", f"polarization at {v!r} must be an integer")
        pol[v] = x
    degree = _integer(obj.get("degree", G.genus), "E_JSON", "degree")
    basepoint = obj.get("basepoint", G.vertex_ids[0] if G.vertex_ids else None)
    section = obj.get("section")
    if not isinstance(basepoint, str) or (section is not None and not isinstance(section, str)):
        raise InputError("E_JSON", "basepoint and section must be vertex ids")
    for v in G.vertex_ids:
        if pol.get(v, 0) < 1:
            raise InputError("E_POLARIZATION", f"polarization must be positive at every vertex (vertex {v!r})")
    spec = ProblemSpec(G, Divisor({k: v for k, v in pol.items()}), degree, basepoint, section)
    return spec.validate()


def load_json_text(text: str, what: str = "input") -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError("E_JSON", f"{what} is not valid JSON: {exc.msg} at line {exc.lineno}") from None


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise InputError("E_FILE", f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return resources.files("namikawa").joinpath("data").joinpath(f"{name}.json").read_text(encoding="utf-8")


def parse_problem(path: str | Path) -> ProblemSpec:
    """Read a problem file; ``fixture:<name>`` loads a bundled fixture."""
    path = str(path)
    if path.startswith("fixture:"):
        text = fixture_text(path.split(":", 1)[1])
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError("E_FILE", f"cannot read {path}: {exc.strerror}") from None
    return problem_from_json(load_json_text(text, path))


def load_fixture(name: str) -> ProblemSpec:
    return problem_from_json(json.loads(fixture_text(name)))


# ---------------------------------------------------------------------------
# types and divisors


def type_from_json(G: MetricGraph, obj: Any) -> SheafType:
    if not isinstance(obj, Mapping):
        raise InputError("E_JSON", "a type is a JSON object with keys S and d")
    S = obj.get("S", [])
    d = obj.get("d", {})
    if not isinstance(S, list) or not all(isinstance(e, str) for e in S) or not isinstance(d, Mapping):
        raise InputError("E_JSON", "type needs S as a list of edge ids and d as an object")
    for e in S:
        if e not in G.eindex:
            raise InputError("E_ID", f"unknown edge {e!r} in S")
    vals = {}
    for v, k in d.items():
        if v not in G.vindex:
            raise InputError("E_ID", f"unknown vertex {v!r} in d")
        vals[v] = _integer(k, "E_JSON", f"d at {v!r}")
    if len(set(S)) != len(S):
        raise InputError("E_ID", "repeated edge in S")
    return SheafType(frozenset(S), Divisor(vals))


def _location_from_json(G: MetricGraph, loc: Any):
    if isinstance(loc, str):
        if loc not in G.vindex:
            raise InputError("E_ID", f"unknown vertex {loc!r}")
        return VertexPoint(loc)
    if isinstance(loc, Mapping) and isinstance(loc.get("edge"), str):
        if loc["edge"] not in G.eindex:
            raise InputError("E_ID", f"unknown edge {loc['edge']!r}")
        off = _rational(loc.get("offset"), "E_DIVISOR", "edge offset")
        if not 0 <= off <= G.length(loc["edge"]):
            raise InputError("E_DIVISOR", f"offset {off} lies outside edge {loc['edge']!r}")
        return EdgePoint(loc["edge"], off)
    raise InputError("E_JSON", f"bad divisor location {loc!r}")


def divisor_from_json(G: MetricGraph, obj: Any) -> TropicalDivisor:
    """``[[location, multiplicity], ...]`` or ``{"vertex": multiplicity}``.

    A location is a vertex id or ``{"edge": id, "offset": "p/q"}``.
    """
    if isinstance(obj, Mapping):
        obj = [[k, v] for k, v in obj.items()]
    if not isinstance(obj, list):
        raise InputError("E_JSON", "divisor must be a list of [location, multiplicity] pairs")
    pts = []
    for item in obj:
        if not isinstance(item, (list, tuple)) or len(item) != 2:
            raise InputError("E_JSON", f"bad divisor entry {item!r}")
        loc = _location_from_json(G, item[0])
        pts.append((loc, _integer(item[1], "E_DIVISOR", "multiplicity")))
    return TropicalDivisor(G, pts)


def divisor_to_json(D: TropicalDivisor) -> list:
    out = []
    for loc, m in D.points:
        if isinstance(loc, VertexPoint):
            out.append([loc.vertex, m])
        else:
            out.append([{"edge": loc.edge, "offset": rational_str(loc.offset)}, m])
    return out


# ---------------------------------------------------------------------------
# decompositions


def _vec(v) -> list[str]:
    return [rational_str(x) for x in v]


def _tuplify(x):
    if isinstance(x, list):
        return tuple(_tuplify(y) for y in x)
    return x


def decomposition_to_json(dec: Decomposition, *, poset: bool = True) -> dict:
    G = dec.graph
    L = dec.lattice
    out = {
        "problem": {
            **graph_to_json(G),
            "polarization": dec.polarization.multidegree.to_dict(G),
            "degree": dec.degree,
            "basepoint": dec.basepoint,
            **({"section": dec.section} if dec.section is not None else {}),
        },
        "mode": dec.mode,
        "lattice": {
            "dimension": L.n,
            "gram": [_vec(r) for r in L.gram],
            "tree": list(L.tree),
            "cycle_edges": list(L.cycle_edges),
            "basis": [[[e, rational_str(c)] for e, c in sorted(g.items(), key=lambda ec: G.eindex[ec[0]])] for g in L.basis],
        },
        "cells": [
            {
                "label": c.label.to_json(G),
                "base": _vec(c.base),
                "edges": list(c.edges),
                "generators": [_vec(g) for g in c.generators],
                "dim": c.dim,
            }
            for c in dec.cells
        ],
    }
    if poset:
        fp = face_poset(dec)
        out["face_poset"] = {
            "hasse": [[a, b, m] for a, b, m in fp.hasse],
            "star_rays": [[i, [list(r) for r in rays]] for i, rays in fp.star_rays],
        }
    if dec.report is not None:
        r = dec.report
        out["validation"] = {
            "passed": r.passed,
            "volume_total": rational_str(r.volume_total),
            "gram_det": rational_str(r.gram_det),
            "volume_ok": r.volume_ok,
            "maximal_cells": r.maximal_cells,
            "face_check": r.face_check,
            "missing_faces": [list(x) for x in r.missing_faces],
            "overlaps": [[a, b, list(c)] for a, b, c in r.overlaps],
            "cover_samples": r.cover_samples,
            "cover_failures": [[list(y), k] for y, k in r.cover_failures],
        }
    return out


def decomposition_from_json(obj: Mapping) -> Decomposition:
    try:
        spec = problem_from_json(obj["problem"])
        G = spec.graph
        lat = obj["lattice"]
        basis = tuple(Chain({e: Fraction(c) for e, c in g}) for g in lat["basis"])
        L = LatticeData(
            G,
            tuple(lat["tree"]),
            tuple(lat["cycle_edges"]),
            basis,
            tuple(tuple(Fraction(x) for x in r) for r in lat["gram"]),
        )
        cells = []
        for c in obj["cells"]:
            label = type_from_json(G, c["label"])
            cells.append(
                Cell(
                    label,
                    tuple(Fraction(x) for x in c["base"]),
                    tuple(c["edges"]),
                    tuple(tuple(Fraction(x) for x in g) for g in c["generators"]),
                    int(c["dim"]),
                )
            )
        report = None
        if "validation" in obj:
            r = obj["validation"]
            report = ValidationReport(
                Fraction(r["volume_total"]),
                Fraction(r["gram_det"]),
                int(r["maximal_cells"]),
                r["face_check"],
                _tuplify(r["missing_faces"]),
                _tuplify(r["overlaps"]),
                int(r["cover_samples"]),
                _tuplify(r["cover_failures"]),
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError("E_JSON", f"malformed decomposition export: {exc}") from None
    return Decomposition(
        G, Polarization(spec.polarization), spec.degree, spec.basepoint, obj["mode"], spec.section, L, tuple(cells), report
    )


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"
