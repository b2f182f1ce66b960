import itertools
import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st
from strategies import graph_with_divisor, graphs, problems, seeds

from conftest import tree_graph
from namikawa.generators import random_divisor
from namikawa.graph import Divisor, EdgePoint, GraphError, MetricGraph, TropicalDivisor, VertexPoint, spanning_trees
from namikawa.jacobian import (
    Cell,
    DecompositionError,
    abel_jacobi,
    cell_zonotope,
    check_admissible,
    face_poset,
    lattice_data,
    locate,
    locate_all,
    namikawa_decomposition,
    refinement_map,
    same_cells,
)
from namikawa.reduction import is_equivalent, reduce_divisor, tent_divisor
from namikawa.stability import SheafType, grade

H22 = {"v1": 2, "v2": 2}


def T(S, d):
    return SheafType(frozenset(S), Divisor(d))


def _mod2(x):
    return x % 2


# -- oracles ----------------------------------------------------------------------


def _tree_sum_det(G: MetricGraph) -> Fraction:
    """Kirchhoff-type expansion: sum over spanning trees of the product of non-tree lengths."""
    total = Fraction(0)
    k = G.n_vertices - 1
    for tree in itertools.combinations(G.edges, k):
        parent = {v: v for v in G.vertex_ids}

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        ok = True
        for e in tree:
            a, b = find(e.tail), find(e.head)
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            ids = {e.id for e in tree}
            prod = Fraction(1)
            for e in G.edges:
                if e.id not in ids:
                    prod *= e.length
            total += prod
    return total


def _unit_lengths(G: MetricGraph) -> MetricGraph:
    return MetricGraph.build(
        [(v, G.weights[v]) for v in G.vertex_ids], [(e.id, e.tail, e.head, 1) for e in G.edges]
    )


def _laplacian_equivalent(G: MetricGraph, d1: Divisor, d2: Divisor) -> bool:
    """Vertex divisors on a unit-length graph: difference in the integer Laplacian image."""
    V = G.vertex_ids
    idx = {v: i for i, v in enumerate(V)}
    L = sympy.zeros(len(V), len(V))
    for e in G.edges:
        if e.is_loop:
            continue
        i, j = idx[e.tail], idx[e.head]
        L[i, i] += 1
        L[j, j] += 1
        L[i, j] -= 1
        L[j, i] -= 1
    b = sympy.Matrix([d1[v] - d2[v] for v in V])
    if len(V) == 1:
        return b[0] == 0
    x = L[1:, 1:].LUsolve(b[1:, :])
    return all(c.is_integer for c in x)


# -- lattice and Abel-Jacobi ---------------------------------------------------------


def test_lattice_examples(l2, tri):
    L = lattice_data(l2.graph)
    assert L.n == 1 and L.gram == ((2,),)
    assert L.in_lattice((2,)) and not L.in_lattice((1,))
    assert lattice_data(tri.graph).gram == ((3,),)
    assert lattice_data(tree_graph()).n == 0


def test_lattice_rejects_disconnected():
    G = MetricGraph.build(["a", "b"], [("e", "a", "a")])
    with pytest.raises(GraphError):
        lattice_data(G)


def test_abel_jacobi_examples(l2):
    G = l2.graph
    L = lattice_data(G)
    t = Fraction(1, 3)
    assert abel_jacobi(G, L, "v1", TropicalDivisor(G, [(EdgePoint("e1", t), 1)])) == (t,)
    assert abel_jacobi(G, L, "v1", Divisor({"v1": 4})) == (0,)
    assert _mod2(abel_jacobi(G, L, "v1", Divisor({"v2": 3}))[0]) == 1
    with pytest.raises(GraphError):
        abel_jacobi(G, L, EdgePoint("e1", t), Divisor({"v1": 1}))


@given(graph_with_divisor(), seeds)
def test_abel_jacobi_path_independence(data, seed):
    G, D = data
    L = lattice_data(G)
    bp = G.vertex_ids[0]
    x = abel_jacobi(G, L, bp, D)
    rng = random.Random(seed)
    trees = list(itertools.islice(spanning_trees(G), 6))
    for tree in trees:
        y = abel_jacobi(G, L, bp, D, tree=tree, rng=rng)
        assert L.in_lattice([a - b for a, b in zip(x, y)])


@given(graphs(max_vertices=4, max_edges=6))
def test_gram_determinant_matches_tree_expansion(G):
    L = lattice_data(G)
    assert L.det == _tree_sum_det(G)
    M = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in L.gram])
    assert sympy.Rational(L.det.numerator, L.det.denominator) == M.det()


# -- cells ------------------------------------------------------------------------


def test_cell_examples(l2):
    G = l2.graph
    L = lattice_data(G)
    c = cell_zonotope(G, L, "v1", T({"e1", "e2"}, {}))
    assert c.base == (0,)
    assert sorted(c.generators) == [(-1,), (1,)]
    assert c.dim == 1
    assert c.zonotope.vertex == (-1,) and c.zonotope.generators == ((2,),)
    c = cell_zonotope(G, L, "v1", T({"e1"}, {"v1": 1, "v2": 1}))
    lo = c.zonotope.vertex[0]
    assert (_mod2(lo), c.zonotope.generators) == (1, ((1,),))
    c = cell_zonotope(G, L, "v1", T((), {"v1": 1, "v2": 2}))
    assert c.dim == 0 and c.generators == ()


def test_cell_divisor_parameters(l2):
    G = l2.graph
    L = lattice_data(G)
    c = cell_zonotope(G, L, "v1", T({"e1"}, {"v1": 1, "v2": 1}))
    D = c.divisor(G, [Fraction(1, 4)])
    assert D.degree == 3
    assert abel_jacobi(G, L, "v1", D) == c.point([Fraction(1, 4)])
    # parameter 0 puts the point on the tail vertex
    assert c.divisor(G, [0]).points == ((VertexPoint("v1"), 2), (VertexPoint("v2"), 1))


def test_admissibility():
    G = MetricGraph.build(["a"], [("e", "a", "a", "7/3")])
    L = lattice_data(G)
    c = cell_zonotope(G, L, "a", T({"e"}, {}))
    assert check_admissible(L, c)
    seg = Cell(T({"e"}, {}), (Fraction(0),), ("e",), ((Fraction(5, 3),),), 1)
    assert check_admissible(L, seg)
    bad = Cell(T({"e"}, {}), (2**0.5,), ("e",), ((Fraction(1),),), 1)
    assert not check_admissible(L, bad)


# -- decompositions -----------------------------------------------------------------


def test_l2_degree_2(l2):
    dec = namikawa_decomposition(l2.graph, H22, 2, "v1")
    assert set(dec.labels()) == {T({"e1", "e2"}, {}), T((), {"v1": 1, "v2": 1})}
    (zero,) = [c for c in dec.cells if c.dim == 0]
    assert _mod2(zero.base[0]) == 1
    assert dec.report.passed and dec.report.volume_total == 2 == dec.lattice.det


def test_l2_degree_3(l2):
    dec = namikawa_decomposition(l2.graph, H22, 3, "v1")
    assert len(dec.maximal_cells()) == 2
    assert {c.label for c in dec.maximal_cells()} == {T({"e1"}, {"v1": 1, "v2": 1}), T({"e2"}, {"v1": 1, "v2": 1})}
    assert dec.report.passed


def test_tree_graph_is_a_point():
    G = tree_graph()
    for degree in (3, 5):
        dec = namikawa_decomposition(G, {"a": 1, "b": 1, "c": 1}, degree, "a")
        assert len(dec.cells) == 1 and dec.cells[0].dim == 0
        assert dec.report.volume_total == 1 == dec.lattice.det
        assert len(face_poset(dec).cells) == 1


@settings(max_examples=15)
@given(problems(max_vertices=3, max_edges=5))
def test_volume_identity_random(problem):
    G, H = problem
    det = _tree_sum_det(G)
    for degree in (G.genus - 1, G.genus, G.genus + 1):
        for mode in ("ps", "qs"):
            dec = namikawa_decomposition(G, H, degree, G.vertex_ids[0], mode)
            assert dec.report.passed
            assert sum(c.zonotope.volume() for c in dec.maximal_cells()) == det


def test_degree_g_modes_agree(fixtures):
    for spec in fixtures.values():
        G = spec.graph
        ps = namikawa_decomposition(G, spec.H, G.genus, spec.basepoint)
        for v in G.vertex_ids:
            assert same_cells(ps, namikawa_decomposition(G, spec.H, G.genus, spec.basepoint, "qs", v))


# -- location ---------------------------------------------------------------------


def test_locate_examples(l2):
    G = l2.graph
    dec = namikawa_decomposition(G, H22, 3, "v1")
    loc = locate(dec, Divisor({"v2": 3}))
    assert loc.type == T((), {"v1": 2, "v2": 1})
    assert is_equivalent(G, loc.witness, TropicalDivisor.from_divisor(G, {"v2": 3}))
    # a divisor already of a polystable type stays in its own cell
    D = TropicalDivisor(G, [(VertexPoint("v1"), 1), (VertexPoint("v2"), 1), (EdgePoint("e1", Fraction(2, 5)), 1)])
    assert locate(dec, D).type == T({"e1"}, {"v1": 1, "v2": 1})
    assert locate(dec, D).parameters == (("e1", Fraction(2, 5)),)


def test_locate_family_witness(l2):
    G = l2.graph
    dec = namikawa_decomposition(G, H22, 2, "v1")
    loc = locate(dec, Divisor({"v2": 2}))
    assert loc.type == T({"e1", "e2"}, {})
    assert not loc.unique_witness  # a one parameter family of witnesses
    assert all(0 < t < 1 for _, t in loc.parameters)
    assert is_equivalent(G, loc.witness, TropicalDivisor.from_divisor(G, {"v2": 2}))


def test_locate_degree_mismatch(l2):
    dec = namikawa_decomposition(l2.graph, H22, 2, "v1")
    with pytest.raises(ValueError):
        locate(dec, Divisor({"v2": 3}))


@settings(max_examples=15)
@given(problems(max_vertices=3, max_edges=4), seeds)
def test_locate_unique_and_certified(problem, seed):
    G, H = problem
    rng = random.Random(seed)
    degree = G.genus
    for mode in ("ps", "qs"):
        dec = namikawa_decomposition(G, H, degree, G.vertex_ids[0], mode, validate="none")
        for _ in range(4):
            D = random_divisor(rng, G, degree)
            assert len(locate_all(dec, D)) == 1
            loc = locate(dec, D)
            assert is_equivalent(G, loc.witness, D)
            if mode == "qs":
                assert loc.unique_witness


def test_locate_rejects_gap(l2):
    dec = namikawa_decomposition(l2.graph, H22, 3, "v1", validate="none")
    holed = type(dec)(*[getattr(dec, f) for f in ("graph", "polarization", "degree", "basepoint", "mode", "section", "lattice")], dec.cells[:2])
    with pytest.raises(DecompositionError) as exc:
        locate(holed, (Fraction(1, 2),))
    assert exc.value.clause == "cover"


# -- refinement and faces -------------------------------------------------------------


def test_refinement_l2_degree_2(l2):
    G = l2.graph
    ps = namikawa_decomposition(G, H22, 2, "v1")
    qs = namikawa_decomposition(G, H22, 2, "v1", "qs", "v1")
    rep = refinement_map(qs, ps)
    assert rep.volume_ok and rep.agrees_with_grade
    big = ps.labels().index(T({"e1", "e2"}, {}))
    for i, j, _ in rep.mapping:
        c = qs.cells[i]
        if c.dim == 1:
            assert j == big
        if c.label == T((), {"v1": 1, "v2": 1}):
            assert ps.cells[j].label == c.label


def test_refinement_is_identity_in_degree_g(fixtures):
    for spec in fixtures.values():
        G = spec.graph
        ps = namikawa_decomposition(G, spec.H, G.genus, spec.basepoint)
        qs = namikawa_decomposition(G, spec.H, G.genus, spec.basepoint, "qs")
        rep = refinement_map(qs, ps)
        assert all(qs.cells[i].label == ps.cells[j].label for i, j, _ in rep.mapping)


@settings(max_examples=15)
@given(problems(max_vertices=3, max_edges=5))
def test_refinement_agrees_with_grade(problem):
    G, H = problem
    degree = G.genus - 1
    ps = namikawa_decomposition(G, H, degree, G.vertex_ids[0], validate="none")
    qs = namikawa_decomposition(G, H, degree, G.vertex_ids[0], "qs", validate="none")
    rep = refinement_map(qs, ps)
    assert rep.volume_ok
    for i, j, _ in rep.mapping:
        assert qs.cells[i].zonotope.dim <= ps.cells[j].zonotope.dim
        assert grade(G, H, qs.cells[i].label).S >= qs.cells[i].label.S


def test_face_poset_l2(l2):
    G = l2.graph
    fp = face_poset(namikawa_decomposition(G, H22, 3, "v1"))
    zeros = [i for i, d in enumerate(fp.dims) if d == 0]
    ones = [i for i, d in enumerate(fp.dims) if d == 1]
    assert fp.covers() == {(a, b) for a in zeros for b in ones}
    fp = face_poset(namikawa_decomposition(G, H22, 2, "v1"))
    (hasse,) = fp.hasse
    assert hasse[2] == 2  # both ends of the segment wrap to the same point
    assert dict(fp.star_rays)[hasse[0]] == ((-1,), (1,))


# -- reduced divisors ------------------------------------------------------------------


def test_reduction_examples(l2):
    G = l2.graph
    a = reduce_divisor(G, TropicalDivisor.from_divisor(G, {"v2": 3}), "v1")
    b = reduce_divisor(G, TropicalDivisor.from_divisor(G, {"v1": 2, "v2": 1}), "v1")
    assert a == b
    with pytest.raises(ValueError):
        is_equivalent(G, TropicalDivisor.from_divisor(G, {"v1": 1}), TropicalDivisor.from_divisor(G, {"v1": 2}))


@settings(max_examples=20)
@given(graph_with_divisor(), st.integers(min_value=1, max_value=3), seeds)
def test_tent_functions_are_principal(data, slope, seed):
    G, D = data
    rng = random.Random(seed)
    e = rng.choice(G.edges)
    a = e.length * Fraction(rng.randint(0, 4), 9)
    b = e.length * Fraction(rng.randint(5, 9), 9)
    assert is_equivalent(G, D, D + tent_divisor(G, e.id, a, b, slope))
    R = reduce_divisor(G, D, G.vertex_ids[-1])
    assert is_equivalent(G, R, D)


@given(graphs(max_vertices=4, max_edges=6), seeds)
def test_vertex_equivalence_matches_laplacian(G, seed):
    G = _unit_lengths(G)
    rng = random.Random(seed)
    V = G.vertex_ids
    for _ in range(3):
        d1 = Divisor({v: rng.randint(-2, 3) for v in V})
        d2 = Divisor({v: rng.randint(-2, 3) for v in V})
        shift = d1.degree - d2.degree
        d2 = d2 + Divisor({V[0]: shift})
        got = is_equivalent(G, TropicalDivisor.from_divisor(G, d1), TropicalDivisor.from_divisor(G, d2))
        assert got == _laplacian_equivalent(G, d1, d2)
