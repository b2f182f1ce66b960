import xml.etree.ElementTree as ET

import pytest

from namikawa import verify
from namikawa.graph import CapExceeded, MetricGraph
from namikawa.jacobian import namikawa_decomposition
from namikawa.svg import render_svg, write_svg
from namikawa.verify import run_verify

EXPECTED = [
    "genus_identity",
    "implication_chain",
    "equality_complements",
    "stable_connected",
    "grade",
    "polarization_independence",
    "degree_g_collapse",
    "os_translation",
    "epsilon_choice",
    "decomposition_ps",
    "decomposition_qs",
    "abel_jacobi_paths",
    "refinement",
    "refinement_vs_grade",
    "degree_g_decompositions",
    "break_divisors",
    "twist_bijection",
    "locate_ps",
    "locate_qs",
]


@pytest.mark.parametrize("name", ["l2", "triangle", "dumbbell"])
def test_fixtures_verify(fixtures, name):
    seen = []
    rep = run_verify(fixtures[name], divisors=20, progress=seen.append)
    assert [c.name for c in rep.checks] == EXPECTED
    assert seen == rep.checks
    assert rep.passed, [c.to_json() for c in rep.failures()]


def test_crashing_check_is_a_failure(l2, monkeypatch):
    def boom(G):
        raise RuntimeError("broken invariant")

    monkeypatch.setattr(verify, "check_genus_identity", boom)
    rep = run_verify(l2, divisors=5)
    (bad,) = rep.failures()
    assert bad.name == "genus_identity"
    assert "broken invariant" in bad.detail["error"]
    assert not rep.to_json()["passed"]


def test_cap_propagates(l2, monkeypatch):
    def capped(*a, **k):
        raise CapExceeded("too many")

    monkeypatch.setattr(verify, "check_implications", capped)
    with pytest.raises(CapExceeded):
        run_verify(l2)


def test_timings_optional(l2):
    rep = run_verify(l2, divisors=5)
    assert "seconds" not in rep.to_json()["checks"][0]
    assert "seconds" in rep.to_json(timings=True)["checks"][0]


# -- pictures ----------------------------------------------------------------------


@pytest.mark.parametrize("name", ["l2", "triangle", "dumbbell"])
def test_svg_is_well_formed_and_stable(fixtures, name, tmp_path):
    spec = fixtures[name]
    dec = namikawa_decomposition(spec.graph, spec.H, spec.degree, spec.basepoint)
    text = render_svg(dec)
    root = ET.fromstring(text)
    assert root.tag.endswith("svg")
    assert text == render_svg(dec)
    write_svg(dec, tmp_path / "d.svg")
    assert (tmp_path / "d.svg").read_text(encoding="utf-8") == text


def test_svg_rejects_rank_three():
    G = MetricGraph.build(["a"], [("x", "a", "a"), ("y", "a", "a", 2), ("z", "a", "a", 3)])
    dec = namikawa_decomposition(G, {"a": 1}, 3, "a", validate="none")
    with pytest.raises(ValueError):
        render_svg(dec)
