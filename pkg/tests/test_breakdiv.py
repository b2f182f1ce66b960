import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from strategies import graphs, problems

from conftest import tree_graph
from namikawa.breakdiv import (
    BreakDivisorMismatch,
    break_types,
    complement_graph,
    degree_g_equivalence,
    is_break_divisor_ineq,
    is_break_divisor_tree,
    tree_ineq_agreement,
    weight_divisor,
)
from namikawa.graph import Divisor, TropicalDivisor
from namikawa.reduction import is_equivalent
from namikawa.stability import SheafType, enumerate_types, twist

L2_DEGREE_3 = {
    SheafType(frozenset(), Divisor({"v1": 2, "v2": 1})),
    SheafType(frozenset(), Divisor({"v1": 1, "v2": 2})),
    SheafType(frozenset({"e1"}), Divisor({"v1": 1, "v2": 1})),
    SheafType(frozenset({"e2"}), Divisor({"v1": 1, "v2": 1})),
}


def _nx_tree_count(G) -> int:
    X = nx.MultiGraph()
    X.add_nodes_from(G.vertex_ids)
    X.add_edges_from((e.tail, e.head) for e in G.edges if not e.is_loop)
    return round(nx.number_of_spanning_trees(X)) if G.n_vertices > 1 else 1


def test_tree_form_examples(l2):
    G = l2.graph
    w = is_break_divisor_tree(G, {"v1": 2, "v2": 1})
    assert w.is_break
    assert len(w.tree) == 1 and dict(w.phi) == {next(iter({"e1", "e2"} - w.tree)): "v1"}
    bad = is_break_divisor_tree(G, {"v1": 3, "v2": 0})
    assert not bad.is_break and bad.reason
    assert not is_break_divisor_tree(G, {"v1": 1}).is_break  # wrong degree


def test_tree_graph_zero_divisor():
    G = tree_graph()
    assert is_break_divisor_tree(G, weight_divisor(G)).is_break
    flat = complement_graph(G, ())
    assert flat == G


def test_inequality_form_examples(l2):
    G = l2.graph
    assert is_break_divisor_ineq(G, {"e1"}, {"v1": 1, "v2": 1})
    assert is_break_divisor_ineq(G, (), {"v1": 2, "v2": 1})
    assert is_break_divisor_ineq(G, (), {"v1": 2, "v2": 1}) == is_break_divisor_tree(G, {"v1": 2, "v2": 1}).is_break
    assert not is_break_divisor_ineq(G, {"e1", "e2"}, {"v1": 1, "v2": 0})
    with pytest.raises(ValueError):
        is_break_divisor_ineq(G, (), {"v1": 1})


def test_degree_g_l2(l2):
    rep = degree_g_equivalence(l2.graph, {"v1": 2, "v2": 2})
    assert set(rep.polystable) == set(rep.break_types) == L2_DEGREE_3
    assert rep.maximal_types == rep.spanning_trees == 2
    assert set(degree_g_equivalence(l2.graph, {"v1": 1, "v2": 3}).break_types) == L2_DEGREE_3


def test_degree_g_tree_graph():
    G = tree_graph()
    rep = degree_g_equivalence(G, {"a": 1, "b": 2, "c": 1})
    assert rep.polystable == (SheafType(frozenset(), weight_divisor(G)),)


def test_degree_g_fixtures(fixtures):
    for spec in fixtures.values():
        G = spec.graph
        rep = degree_g_equivalence(G, spec.H)
        assert rep.passed
        assert rep.matrix_tree == _nx_tree_count(G)
        for v in G.vertex_ids:
            semi = enumerate_types(G, spec.H, G.genus, "semistable")
            assert semi == enumerate_types(G, spec.H, G.genus, "stable")
            assert semi == enumerate_types(G, spec.H, G.genus, "quasistable", v)


def test_mismatch_exception_carries_type():
    exc = BreakDivisorMismatch("boom", offending="T")
    assert exc.offending == "T" and isinstance(exc, AssertionError)


# -- properties ------------------------------------------------------------------------


@given(graphs(max_vertices=4, max_edges=6, min_genus=0))
def test_tree_and_inequality_forms_agree(G):
    assert tree_ineq_agreement(G) == []


@given(graphs(max_vertices=4, max_edges=5, min_genus=0))
def test_break_divisor_count_is_tree_count(G):
    plain = [T.d for T in break_types(G) if not T.S]
    assert len(plain) == _nx_tree_count(G)


@settings(max_examples=20)
@given(graphs(max_vertices=3, max_edges=4))
def test_break_divisors_pairwise_inequivalent(G):
    plain = [TropicalDivisor.from_divisor(G, T.d) for T in break_types(G) if not T.S]
    for a, b in itertools.combinations(plain, 2):
        assert not is_equivalent(G, a, b)


@settings(max_examples=20)
@given(problems(max_vertices=4, max_edges=5))
def test_polystable_equals_break_for_any_polarization(problem):
    G, H = problem
    assert degree_g_equivalence(G, H).passed
    assert set(enumerate_types(G, H, G.genus, "polystable")) == set(break_types(G))


@settings(max_examples=20)
@given(problems(max_vertices=4, max_edges=5))
def test_twist_is_a_bijection_onto_quasistable(problem):
    G, H = problem
    g = G.genus
    top = enumerate_types(G, H, g, "semistable")
    for v in G.vertex_ids:
        image = {twist(T, v, -1) for T in top}
        assert len(image) == len(top)
        assert image == set(enumerate_types(G, H, g - 1, "quasistable", v))
