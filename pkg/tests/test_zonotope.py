import itertools
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.spatial import ConvexHull

from namikawa import _linalg as la
from namikawa.zonotope import Zonotope

small = st.integers(min_value=-4, max_value=4)
rationals = st.fractions(min_value=-3, max_value=3, max_denominator=6)


def square_matrices(n):
    return st.lists(st.lists(rationals, min_size=n, max_size=n), min_size=n, max_size=n)


# -- exact linear algebra against sympy -----------------------------------------


@given(st.integers(min_value=1, max_value=4).flatmap(square_matrices))
def test_det_and_inverse_match_sympy(A):
    M = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in row] for row in A])
    d = la.det(A)
    assert sympy.Rational(d.numerator, d.denominator) == M.det()
    if d != 0:
        inv = la.inverse(A)
        assert sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in inv]) == M.inv()


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4))
def test_rank_and_nullspace_match_sympy(A):
    assert la.rank(A) == sympy.Matrix(A).rank()
    for v in la.nullspace(A):
        assert all(x == 0 for x in la.matvec(A, v))
    assert len(la.nullspace(A)) == 3 - la.rank(A)


def test_solve_inconsistent_returns_none():
    assert la.solve([[1, 1], [2, 2]], [1, 3]) is None
    assert la.solve([[2, 0], [0, 4]], [1, 1]) == (Fraction(1, 2), Fraction(1, 4))


def test_primitive():
    assert la.primitive([Fraction(2, 3), Fraction(-4, 9)]) == (3, -2)
    assert la.primitive([0, 0, 5]) == (0, 0, 1)


# -- zonotopes --------------------------------------------------------------------


def test_parallel_generators_merge():
    Z = Zonotope((0,), [(1,), (-1,)])
    assert Z.vertex == (-1,)
    assert Z.generators == ((2,),)
    assert Z.dim == 1
    assert Z.contains_relint((0,)) and not Z.contains_relint((1,))
    assert Z.contains((1,))


def test_degenerate_zonotope_in_the_plane():
    Z = Zonotope((0, 0), [(1, 1), (2, 2)])
    assert Z.dim == 1 and Z.volume() == 0
    assert Z.contains_relint((Fraction(3, 2), Fraction(3, 2)))
    assert not Z.contains_relint((1, Fraction(3, 2)))
    assert sorted(f.vertex for f in Z.faces()) == [(0, 0), (3, 3)]


def test_square_faces_and_volume():
    Z = Zonotope((0, 0), [(1, 0), (0, 2)])
    assert Z.volume() == 2
    faces = Z.faces()
    assert [f.dim for f in faces].count(1) == 4
    assert [f.dim for f in faces].count(0) == 4


def test_point_zonotope():
    Z = Zonotope((1, 2))
    assert Z.dim == 0 and Z.contains_relint((1, 2)) and not Z.contains_relint((1, 3))
    assert Z.faces() == []


def _generator_sets(dim):
    vec = st.lists(small, min_size=dim, max_size=dim)
    return st.lists(vec, min_size=dim, max_size=dim + 2)


@pytest.mark.parametrize("dim", [2, 3])
@given(data=st.data())
def test_volume_and_facets_match_convex_hull(dim, data):
    gens = data.draw(_generator_sets(dim))
    assume(la.rank(gens) == dim)
    Z = Zonotope((0,) * dim, gens)
    pts = np.array([[float(x) for x in p] for p in Z.corners()])
    hull = ConvexHull(pts)
    assert float(Z.volume()) == pytest.approx(hull.volume, rel=1e-9)
    planes = {tuple(np.round(eq / np.linalg.norm(eq[:-1]), 6)) for eq in hull.equations}
    assert len(Z.facets()) == len(planes)


@given(data=st.data())
def test_relint_matches_hull_inequalities(data):
    gens = data.draw(_generator_sets(2))
    assume(la.rank(gens) == 2)
    Z = Zonotope((0, 0), gens)
    hull = ConvexHull(np.array([[float(x) for x in p] for p in Z.corners()]))
    for _ in range(20):
        y = (data.draw(rationals) * 3, data.draw(rationals) * 3)
        vals = hull.equations[:, :2] @ np.array([float(y[0]), float(y[1])]) + hull.equations[:, 2]
        if np.any(np.abs(vals) < 1e-9):
            continue  # on a boundary plane; float oracle is not decisive
        assert Z.contains_relint(y) == bool(np.all(vals < 0))


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4))
def test_faces_are_closed_under_taking_faces(gens):
    Z = Zonotope((0, 0, 0), gens)
    keys = {f.key for f in Z.faces()}
    for f in Z.faces():
        for g in f.facets():
            assert g.key in keys
        for c in f.corners():
            assert Z.contains(c)


def test_corners_superset_of_vertices():
    Z = Zonotope((0, 0), [(1, 0), (0, 1), (1, 1)])
    assert len(Z.corners()) == 7  # includes the interior point (1, 1)
    assert sum(1 for f in Z.faces() if f.dim == 0) == 6


def test_translate_and_key():
    Z = Zonotope((0, 0), [(1, 0)])
    assert Z.translate((2, 3)) == Zonotope((2, 3), [(-1, 0)]).translate((1, 0))
    assert len({Z, Zonotope((0, 0), [(-1, 0)]).translate((1, 0))}) == 1


def test_cofactor_normal_is_orthogonal():
    for rows in itertools.combinations([(1, 2, 3), (0, 1, 4), (2, 0, 1)], 2):
        c = la.cofactor_normal(rows)
        assert all(la.dot(c, r) == 0 for r in rows)
