import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from strategies import graph_with_divisor, problems, seeds

from namikawa.graph import EdgePoint, TropicalDivisor, VertexPoint
from namikawa.io import (
    FIXTURES,
    InputError,
    ProblemSpec,
    decomposition_from_json,
    decomposition_to_json,
    divisor_from_json,
    divisor_to_json,
    dumps,
    graph_from_json,
    graph_to_json,
    load_fixture,
    parse_problem,
    problem_from_json,
    type_from_json,
)
from namikawa.jacobian import namikawa_decomposition
from namikawa.stability import SheafType

BASE = {
    "vertices": [{"id": "v1", "weight": 1}, {"id": "v2", "weight": 1}],
    "edges": [
        {"id": "e1", "tail": "v1", "head": "v2", "length": "1"},
        {"id": "e2", "tail": "v1", "head": "v2", "length": "1"},
    ],
    "polarization": {"v1": 2, "v2": 2},
}


def _with(**changes):
    obj = json.loads(json.dumps(BASE))
    for path, value in changes.items():
        node = obj
        keys = path.split("__")
        for k in keys[:-1]:
            node = node[int(k)] if k.isdigit() else node[k]
        last = keys[-1]
        node[int(last) if last.isdigit() else last] = value
    return obj


def _code(obj) -> str:
    with pytest.raises(InputError) as exc:
        problem_from_json(obj)
    return exc.value.code


def test_defaults():
    spec = problem_from_json(BASE)
    assert spec.degree == 3 and spec.basepoint == "v1" and spec.section is None
    assert spec.section_vertex == "v1"


@pytest.mark.parametrize(
    "changes,code",
    [
        ({"edges__0__length": "0"}, "E_LENGTH"),
        ({"edges__0__length": "-1/2"}, "E_LENGTH"),
        ({"edges__0__length": 0.5}, "E_LENGTH"),
        ({"edges__0__length": "x"}, "E_LENGTH"),
        ({"vertices__0__weight": -1}, "E_WEIGHT"),
        ({"polarization": {"v1": 0, "v2": 2}}, "E_POLARIZATION"),
        ({"polarization": {"v1": 1.5, "v2": 2}}, "E_POLARIZATION"),
        ({"polarization": {"v1": 1, "v2": 1, "zz": 1}}, "E_ID"),
        ({"edges__1__head": "v9"}, "E_ID"),
        ({"edges__1__id": "e1"}, "E_ID"),
        ({"basepoint": "nowhere"}, "E_ID"),
        ({"degree": "3"}, "E_JSON"),
        ({"edges": "none"}, "E_JSON"),
    ],
)
def test_problem_error_codes(changes, code):
    assert _code(_with(**changes)) == code


def test_file_errors(tmp_path):
    with pytest.raises(InputError) as exc:
        parse_problem(tmp_path / "missing.json")
    assert exc.value.code == "E_FILE"
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(InputError) as exc:
        parse_problem(bad)
    assert exc.value.code == "E_JSON"
    with pytest.raises(InputError) as exc:
        parse_problem("fixture:nope")
    assert exc.value.code == "E_FILE"


def test_fixtures_load(fixtures):
    for name in FIXTURES:
        spec = parse_problem(f"fixture:{name}")
        assert spec == load_fixture(name)
        assert problem_from_json(json.loads(dumps(spec.to_json()))) == spec


def test_overrides(l2):
    spec = l2.with_overrides(degree=2, section="v2")
    assert (spec.degree, spec.section_vertex) == (2, "v2")
    with pytest.raises(InputError):
        l2.with_overrides(basepoint="zz")


def test_type_and_divisor_parsing(l2):
    G = l2.graph
    T = type_from_json(G, {"S": ["e1"], "d": {"v2": 1}})
    assert T == SheafType(frozenset({"e1"}), T.d) and T.degree == 2
    for bad, code in (({"S": ["zz"], "d": {}}, "E_ID"), ({"S": ["e1", "e1"], "d": {}}, "E_ID"), ([], "E_JSON")):
        with pytest.raises(InputError) as exc:
            type_from_json(G, bad)
        assert exc.value.code == code
    D = divisor_from_json(G, [["v2", 3], [{"edge": "e1", "offset": "1/3"}, 1]])
    assert D.points == ((VertexPoint("v2"), 3), (EdgePoint("e1", Fraction(1, 3)), 1))
    assert divisor_from_json(G, {"v1": 2}) == TropicalDivisor.from_divisor(G, {"v1": 2})
    with pytest.raises(InputError) as exc:
        divisor_from_json(G, [[{"edge": "e1", "offset": "5"}, 1]])
    assert exc.value.code == "E_DIVISOR"


@given(graph_with_divisor())
def test_divisor_round_trip(data):
    G, D = data
    assert divisor_from_json(G, json.loads(json.dumps(divisor_to_json(D)))) == D


@given(problems())
def test_graph_round_trip(problem):
    G, H = problem
    assert graph_from_json(json.loads(json.dumps(graph_to_json(G)))) == G
    spec = ProblemSpec(G, H, G.genus, G.vertex_ids[0])
    assert problem_from_json(spec.to_json()) == spec


@pytest.mark.parametrize("mode", ["ps", "qs"])
def test_decomposition_round_trip(fixtures, mode):
    for spec in fixtures.values():
        dec = namikawa_decomposition(spec.graph, spec.H, spec.degree, spec.basepoint, mode)
        text = dumps(decomposition_to_json(dec))
        back = decomposition_from_json(json.loads(text))
        assert back == dec and back.report == dec.report
        assert dumps(decomposition_to_json(back)) == text


@settings(max_examples=10)
@given(problems(max_vertices=3, max_edges=4), seeds)
def test_decomposition_export_is_deterministic(problem, seed):
    G, H = problem
    a = namikawa_decomposition(G, H, G.genus, G.vertex_ids[0], seed=seed)
    b = namikawa_decomposition(G, H, G.genus, G.vertex_ids[0], seed=seed)
    assert dumps(decomposition_to_json(a)) == dumps(decomposition_to_json(b))


def test_dumps_trailing_newline():
    assert dumps({"a": 1}) == '{\n  "a": 1\n}\n'
