"""Tropical Jacobian of a metric graph and its cell decompositions.

Coordinates: a 1-chain ``c`` is sent to ``(<c, gamma_j>)_j`` where the
``gamma_j`` are the fundamental cycles of the canonical spanning forest and
``<., .>`` is the edge-length pairing.  In these coordinates the period lattice
is spanned by the rows of the Gram matrix ``M`` and its dual is ``Z^n``.

A sheaf type ``(S, d)`` gives the zonotope of Abel-Jacobi images of divisors
``d + sum_{e in S} p_e`` with ``p_e`` running over the edge ``e``.
"""

from __future__ import annotations

import itertools
import numbers
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, floor
from typing import Iterable, Iterator, Mapping, Sequence

from . import _linalg as la
from .graph import (
    Chain,
    Divisor,
    EdgePoint,
    GraphError,
    MetricGraph,
    TropicalDivisor,
    VertexPoint,
    check_forest,
    cycle_basis,
    gram_matrix,
    spanning_forest,
    tree_path,
)
from .stability import (
    Polarization,
    SheafType,
    as_polarization,
    as_type,
    enumerate_types,
    grade,
)
from .zonotope import Zonotope

MODES = ("ps", "qs")


class DecompositionError(RuntimeError):
    """A decomposition failed one of its defining properties.

    ``clause`` names the property: ``volume``, ``faces``, ``overlap``,
    ``cover``, ``uniqueness``, ``connected`` or ``refinement``.
    """

    def __init__(self, clause: str, message: str, report=None):
        super().__init__(f"[{clause}] {message}")
        self.clause = clause
        self.report = report


# ---------------------------------------------------------------------------
# lattice


@dataclass(frozen=True)
class LatticeData:
    graph: MetricGraph
    tree: tuple
    cycle_edges: tuple
    basis: tuple
    gram: tuple

    @property
    def n(self) -> int:
        return len(self.basis)

    @cached_property
    def gram_inverse(self) -> list[list[Fraction]]:
        return la.inverse(self.gram) if self.n else []

    @cached_property
    def det(self) -> Fraction:
        return la.det(self.gram)

    def coord(self, chain: Mapping[str, Fraction]) -> tuple[Fraction, ...]:
        G = self.graph
        return tuple(
            sum((Fraction(c) * g.get(e, 0) * G.length(e) for e, c in chain.items()), Fraction(0)) for g in self.basis
        )

    @cached_property
    def _edge_vectors(self) -> dict[str, tuple[Fraction, ...]]:
        return {e.id: tuple(e.length * g.get(e.id, 0) for g in self.basis) for e in self.graph.edges}

    @cached_property
    def _path_cache(self) -> dict:
        return {}

    def edge_vector(self, eid: str) -> tuple[Fraction, ...]:
        """Coordinates of the whole edge traversed tail to head."""
        try:
            return self._edge_vectors[eid]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def to_lattice_coords(self, x: Sequence) -> tuple[Fraction, ...]:
        return la.vecmat(x, self.gram_inverse) if self.n else ()

    def from_lattice_coords(self, a: Sequence) -> tuple[Fraction, ...]:
        return la.vecmat(a, self.gram) if self.n else ()

    def in_lattice(self, x: Sequence) -> bool:
        return all(c.denominator == 1 for c in self.to_lattice_coords(x))

    def reduce(self, x: Sequence) -> tuple[Fraction, ...]:
        """Representative of ``x`` modulo the lattice in the half-open fundamental parallelepiped."""
        a = self.to_lattice_coords(x)
        return self.from_lattice_coords([c - floor(c) for c in a])

    def lattice_points(self, Z: Zonotope) -> Iterator[tuple[tuple[Fraction, ...], tuple[int, ...]]]:
        """Lattice vectors lying in the bounding box of ``Z`` (in lattice coordinates)."""
        if self.n == 0:
            return self.box_points((), ())
        return self.box_points(self.to_lattice_coords(Z.vertex), [self.to_lattice_coords(g) for g in Z.generators])

    def box_points(self, c: Sequence, hs: Sequence) -> Iterator[tuple[tuple[Fraction, ...], tuple[int, ...]]]:
        """Lattice vectors in the box ``c + sum [0, h]``; everything in lattice coordinates."""
        if self.n == 0:
            yield (), ()
            return
        ranges = []
        for j in range(self.n):
            lo = c[j] + sum((min(h[j], 0) for h in hs), Fraction(0))
            hi = c[j] + sum((max(h[j], 0) for h in hs), Fraction(0))
            ranges.append(range(ceil(lo), floor(hi) + 1))
        for a in itertools.product(*ranges):
            yield self.from_lattice_coords(a), a

    def to_json(self) -> dict:
        return {
            "tree": list(self.tree),
            "cycle_edges": list(self.cycle_edges),
            "basis": [{e: str(c) for e, c in g.items()} for g in self.basis],
            "gram": [[str(x) for x in row] for row in self.gram],
        }


def lattice_data(G: MetricGraph, tree: Iterable[str] | None = None) -> LatticeData:
    if not G.is_connected():
        raise GraphError("the Jacobian needs a connected graph")
    tree = spanning_forest(G) if tree is None else check_forest(G, tree)
    basis = cycle_basis(G, tree)
    gram = gram_matrix(G, basis)
    return LatticeData(
        G,
        tuple(e for e in G.edge_ids if e in tree),
        tuple(e for e in G.edge_ids if e not in tree),
        tuple(basis),
        tuple(tuple(r) for r in gram),
    )


# ---------------------------------------------------------------------------
# Abel-Jacobi


def _vertex_coords(L: LatticeData, basepoint: str, tree: frozenset) -> dict[str, tuple[Fraction, ...]]:
    key = (basepoint, tree)
    if key not in L._path_cache:
        L._path_cache[key] = _walk_tree(L, basepoint, tree)
    return L._path_cache[key]


def _walk_tree(L: LatticeData, basepoint: str, tree: frozenset) -> dict[str, tuple[Fraction, ...]]:
    G = L.graph
    zero = tuple(Fraction(0) for _ in range(L.n))
    out = {basepoint: zero}
    stack = [basepoint]
    while stack:
        x = stack.pop()
        for e in G.incident(x):
            if e.id not in tree or e.is_loop:
                continue
            y = e.other(x)
            if y in out:
                continue
            step = L.edge_vector(e.id)
            out[y] = la.vadd(out[x], step) if x == e.tail else la.vsub(out[x], step)
            stack.append(y)
    return out


def _check_basepoint(G: MetricGraph, basepoint) -> str:
    if isinstance(basepoint, VertexPoint):
        basepoint = basepoint.vertex
    if not isinstance(basepoint, str) or basepoint not in G.vindex:
        raise GraphError(f"basepoint must be a vertex of the graph, got {basepoint!r}")
    return basepoint


def _as_tropical(G: MetricGraph, D) -> TropicalDivisor:
    if isinstance(D, TropicalDivisor):
        return D
    return TropicalDivisor.from_divisor(G, D)


def abel_jacobi(
    G: MetricGraph,
    L: LatticeData,
    basepoint: str,
    D,
    *,
    tree: Iterable[str] | None = None,
    rng: random.Random | None = None,
) -> tuple[Fraction, ...]:
    """Coordinates of ``D - deg(D) * basepoint``.

    ``tree`` and ``rng`` change the paths used (another spanning tree, and a
    random choice of reaching each edge point from its tail or its head); the
    result only changes by a lattice vector.
    """
    basepoint = _check_basepoint(G, basepoint)
    D = _as_tropical(G, D)
    tree = frozenset(L.tree) if tree is None else check_forest(G, tree)
    P = _vertex_coords(L, basepoint, tree)
    x = tuple(Fraction(0) for _ in range(L.n))
    for loc, m in D.points:
        if isinstance(loc, VertexPoint):
            x = la.vadd(x, la.vscale(m, P[loc.vertex]))
            continue
        e = G.edge(loc.edge)
        gen = L.edge_vector(e.id)
        if rng is not None and rng.random() < 0.5:
            p = la.vsub(P[e.head], la.vscale((e.length - loc.offset) / e.length, gen))
        else:
            p = la.vadd(P[e.tail], la.vscale(loc.offset / e.length, gen))
        x = la.vadd(x, la.vscale(m, p))
    return x


def abel_jacobi_chain(G: MetricGraph, L: LatticeData, basepoint: str, D) -> Chain:
    """A 1-chain with boundary ``D - deg(D) * basepoint`` built from forest paths."""
    basepoint = _check_basepoint(G, basepoint)
    D = _as_tropical(G, D)
    xi = Chain()
    for loc, m in D.points:
        if isinstance(loc, VertexPoint):
            xi = xi + tree_path(G, L.tree, basepoint, loc.vertex) * m
        else:
            e = G.edge(loc.edge)
            part = tree_path(G, L.tree, basepoint, e.tail) + Chain({e.id: loc.offset / e.length})
            xi = xi + part * m
    return xi


# ---------------------------------------------------------------------------
# cells


@dataclass(frozen=True)
class Cell:
    label: SheafType
    base: tuple
    edges: tuple
    generators: tuple
    dim: int

    @cached_property
    def zonotope(self) -> Zonotope:
        return Zonotope(self.base, self.generators)

    def point(self, params: Sequence) -> tuple[Fraction, ...]:
        x = self.base
        for t, g in zip(params, self.generators):
            x = la.vadd(x, la.vscale(Fraction(t), g))
        return x

    def divisor(self, G: MetricGraph, params: Sequence) -> TropicalDivisor:
        """Divisor of this type whose point on edge e sits at parameter t_e.

        Parameters 0 and 1 put the point on the tail and head vertex.
        """
        pts = [(VertexPoint(v), k) for v, k in self.label.d.items()]
        for eid, t in zip(self.edges, params):
            e = G.edge(eid)
            pts.append((EdgePoint(eid, Fraction(t) * e.length), 1))
        return TropicalDivisor(G, pts)

    def to_json(self) -> dict:
        return {
            "label": {"S": list(self.edges), "d": self.label.d.to_dict()},
            "base": [str(x) for x in self.base],
            "edges": list(self.edges),
            "generators": [[str(x) for x in g] for g in self.generators],
            "dim": self.dim,
        }


def cell_zonotope(G: MetricGraph, L: LatticeData, basepoint: str, T) -> Cell:
    """Cell of a type; parameter t_e in [0, 1] moves the point of e from tail to head."""
    T = as_type(T).validate(G)
    edges = tuple(e for e in G.edge_ids if e in T.S)
    # parameter 0 puts every point on its tail vertex
    anchor = T.d + Divisor.from_vector(G, [sum(1 for e in edges if G.edge(e).tail == v) for v in G.vertex_ids])
    base = abel_jacobi(G, L, basepoint, anchor)
    gens = tuple(L.edge_vector(e) for e in edges)
    return Cell(T, base, edges, gens, la.rank(gens) if gens and L.n else 0)


# ---------------------------------------------------------------------------
# decompositions


@dataclass(frozen=True)
class ValidationReport:
    volume_total: Fraction
    gram_det: Fraction
    maximal_cells: int
    face_check: str  # exact | sampled | skipped
    missing_faces: tuple = ()
    overlaps: tuple = ()
    cover_samples: int = 0
    cover_failures: tuple = ()

    @property
    def volume_ok(self) -> bool:
        return self.volume_total == self.gram_det

    @property
    def passed(self) -> bool:
        return self.volume_ok and not self.missing_faces and not self.overlaps and not self.cover_failures

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "volume_total": str(self.volume_total),
            "gram_det": str(self.gram_det),
            "volume_ok": self.volume_ok,
            "maximal_cells": self.maximal_cells,
            "face_check": self.face_check,
            "missing_faces": [list(x) for x in self.missing_faces],
            "overlaps": [list(x) for x in self.overlaps],
            "cover_samples": self.cover_samples,
            "cover_failures": [list(x) for x in self.cover_failures],
        }


@dataclass(frozen=True)
class Decomposition:
    graph: MetricGraph
    polarization: Polarization
    degree: int
    basepoint: str
    mode: str
    section: str | None
    lattice: LatticeData
    cells: tuple
    report: ValidationReport | None = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return self.lattice.n

    def maximal_cells(self) -> list[Cell]:
        return [c for c in self.cells if c.dim == self.n]

    @cached_property
    def _index(self) -> dict:
        return {cell_key(self.lattice, c.zonotope): i for i, c in enumerate(self.cells)}

    @cached_property
    def _windows(self) -> list[tuple]:
        """Per cell, the box of lattice vectors lam with y - lam possibly in the cell,
        as an offset from y and edge vectors, all in lattice coordinates."""
        L = self.lattice
        out = []
        for c in self.cells:
            W = Zonotope(la.vscale(-1, c.zonotope.vertex), tuple(la.vscale(-1, g) for g in c.zonotope.generators))
            out.append((L.to_lattice_coords(W.vertex), [L.to_lattice_coords(g) for g in W.generators]))
        return out

    def find_cell(self, Z: Zonotope) -> int | None:
        """Index of the cell equal to ``Z`` modulo the lattice."""
        return self._index.get(cell_key(self.lattice, Z))

    def labels(self) -> list[SheafType]:
        return [c.label for c in self.cells]


def cell_key(L: LatticeData, Z: Zonotope) -> tuple:
    return (L.reduce(Z.vertex), Z.generators)


def _types_for(G, H, degree, mode, section, force):
    if mode == "ps":
        return enumerate_types(G, H, degree, "polystable", force=force)
    return enumerate_types(G, H, degree, "quasistable", section, force=force)


def namikawa_decomposition(
    G: MetricGraph,
    H,
    degree: int,
    basepoint: str,
    mode: str = "ps",
    section: str | None = None,
    *,
    validate: str = "full",
    samples: int = 32,
    seed: int = 0,
    strict: bool = True,
    force: bool = False,
) -> Decomposition:
    """Cells of all polystable (``ps``) or section-quasistable (``qs``) types.

    ``validate`` is ``full`` (volume, faces, overlaps and sampled cover),
    ``volume`` or ``none``.  With ``strict`` a failed check raises
    :class:`DecompositionError`; otherwise the report records it.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    H = as_polarization(G, H)
    basepoint = _check_basepoint(G, basepoint)
    if mode == "qs":
        section = basepoint if section is None else _check_basepoint(G, section)
    else:
        section = None
    L = lattice_data(G)
    types = _types_for(G, H, degree, mode, section, force)
    if mode == "qs":
        for T in types:
            if len(G.components(T.S)) != 1:
                raise DecompositionError("connected", f"quasistable type {T} disconnects the graph")
    cells = tuple(cell_zonotope(G, L, basepoint, T) for T in types)
    dec = Decomposition(G, H, degree, basepoint, mode, section, L, cells)
    if validate == "none":
        return dec
    report = validate_decomposition(dec, full=(validate == "full"), samples=samples, seed=seed)
    dec = Decomposition(G, H, degree, basepoint, mode, section, L, cells, report)
    if strict and not report.passed:
        if not report.volume_ok:
            clause = "volume"
        elif report.overlaps:
            clause = "overlap"
        elif report.missing_faces:
            clause = "faces"
        else:
            clause = "cover"
        raise DecompositionError(clause, f"{mode} decomposition failed validation", report)
    return dec


def _label_str(T: SheafType) -> str:
    return f"({sorted(T.S)}, {T.d.to_dict()})"


def validate_decomposition(dec: Decomposition, *, full: bool = True, samples: int = 32, seed: int = 0) -> ValidationReport:
    L = dec.lattice
    n = L.n
    maximal = dec.maximal_cells()
    total = sum((c.zonotope.volume() for c in maximal), Fraction(0))
    if not full:
        return ValidationReport(total, L.det, len(maximal), "skipped")
    missing = []
    overlaps = []
    if n <= 3:
        face_check = "exact"
        for c in dec.cells:
            for f in c.zonotope.faces():
                if dec.find_cell(f) is None:
                    missing.append((_label_str(c.label), repr(f)))
        cells = dec.cells
        # Zi - Zj is a translate of a zonotope that only depends on the two generator sets
        templates: dict[tuple, tuple] = {}
        vcoords = [L.to_lattice_coords(c.zonotope.vertex) for c in cells]
        for i in range(len(cells)):
            for j in range(i, len(cells)):
                Zi, Zj = cells[i].zonotope, cells[j].zonotope
                key = (Zi.generators, Zj.generators)
                if key not in templates:
                    D = Zonotope([0] * n, Zi.generators + tuple(la.vscale(-1, g) for g in Zj.generators))
                    templates[key] = (D, L.to_lattice_coords(D.vertex), [L.to_lattice_coords(g) for g in D.generators])
                D, c0, hs = templates[key]
                off = la.vsub(Zi.vertex, Zj.vertex)
                box = la.vadd(c0, la.vsub(vcoords[i], vcoords[j]))
                for lam, a in L.box_points(box, hs):
                    if i == j and all(x == 0 for x in a):
                        continue
                    if D.contains_relint(la.vsub(lam, off)):
                        overlaps.append((_label_str(cells[i].label), _label_str(cells[j].label), tuple(str(x) for x in a)))
    else:
        face_check = "sampled"
    failures = []
    rng = random.Random(seed)
    for _ in range(samples):
        y = sample_point(L, rng)
        hits = locate_all(dec, y)
        if len(hits) != 1:
            failures.append((tuple(str(x) for x in y), len(hits)))
    return ValidationReport(
        total, L.det, len(maximal), face_check, tuple(missing), tuple(overlaps), samples, tuple(failures)
    )


def sample_point(L: LatticeData, rng: random.Random, denominator: int = 1009) -> tuple[Fraction, ...]:
    """Random rational point of the fundamental parallelepiped."""
    a = [Fraction(rng.randrange(denominator), denominator) for _ in range(L.n)]
    return L.from_lattice_coords(a)


# ---------------------------------------------------------------------------
# point location


@dataclass(frozen=True)
class CellLocation:
    cell_index: int
    type: SheafType
    parameters: tuple  # ((edge, t), ...)
    shift: tuple  # lattice vector in coordinates
    shift_coords: tuple  # integer combination of Gram rows
    witness: TropicalDivisor
    unique_witness: bool

    def to_json(self, G: MetricGraph) -> dict:
        return {
            "type": self.type.to_json(G),
            "parameters": {e: str(t) for e, t in self.parameters},
            "shift": [str(x) for x in self.shift],
            "shift_coords": list(self.shift_coords),
            "witness": [[_loc_json(l), m] for l, m in self.witness.points],
            "unique_witness": self.unique_witness,
        }


def _loc_json(loc):
    if isinstance(loc, VertexPoint):
        return loc.vertex
    return {"edge": loc.edge, "offset": str(loc.offset)}


def _query_coords(dec: Decomposition, p) -> tuple[Fraction, ...]:
    if isinstance(p, (TropicalDivisor, Divisor)) or isinstance(p, Mapping):
        D = _as_tropical(dec.graph, p)
        if D.degree != dec.degree:
            raise ValueError(f"divisor has degree {D.degree}, decomposition has degree {dec.degree}")
        return abel_jacobi(dec.graph, dec.lattice, dec.basepoint, D)
    y = la.frac_vector(p)
    if len(y) != dec.n:
        raise ValueError(f"point must have {dec.n} coordinates")
    return y


def locate_all(dec: Decomposition, p) -> list[tuple[int, tuple, tuple]]:
    """Every (cell index, lattice vector, lattice coords) with p - lattice vector in the cell's relative interior."""
    y = _query_coords(dec, p)
    L = dec.lattice
    cy = L.to_lattice_coords(y)
    hits = []
    for i, (c0, hs) in enumerate(dec._windows):
        Z = dec.cells[i].zonotope
        for lam, a in L.box_points(la.vadd(cy, c0), hs):
            if Z.contains_relint(la.vsub(y, lam)):
                hits.append((i, lam, a))
    return hits


def fiber_vertices(generators: Sequence, target: Sequence) -> list[tuple[Fraction, ...]]:
    """Vertices of {t in [0,1]^k : sum t_i g_i = target}."""
    k = len(generators)
    if k == 0:
        return [()] if all(x == 0 for x in target) else []
    A = la.transpose(generators) if generators and len(target) else []
    r = la.rank(A) if A else 0
    out = set()
    for B in itertools.combinations(range(k), r):
        if r and la.rank([[row[j] for j in B] for row in A]) < r:
            continue
        N = [j for j in range(k) if j not in B]
        for bits in itertools.product((0, 1), repeat=len(N)):
            rhs = list(target)
            for j, b in zip(N, bits):
                if b:
                    rhs = [x - g for x, g in zip(rhs, generators[j])]
            t = [Fraction(0)] * k
            for j, b in zip(N, bits):
                t[j] = Fraction(b)
            if r:
                sol = la.solve([[row[j] for j in B] for row in A], rhs)
                if sol is None:
                    continue
                if any(x < 0 or x > 1 for x in sol):
                    continue
                for j, x in zip(B, sol):
                    t[j] = x
            elif any(x != 0 for x in rhs):
                continue
            out.add(tuple(t))
    return sorted(out)


def locate(dec: Decomposition, p) -> CellLocation:
    """The unique cell whose relative interior contains p modulo the lattice.

    The returned parameters are the centroid of all valid parameter vectors,
    which always lies in the open unit box.
    """
    y = _query_coords(dec, p)
    hits = locate_all(dec, y)
    if len(hits) != 1:
        raise DecompositionError(
            "uniqueness" if hits else "cover", f"point {[str(x) for x in y]} lies in {len(hits)} cell interiors"
        )
    i, lam, a = hits[0]
    cell = dec.cells[i]
    target = la.vsub(la.vsub(y, lam), cell.base)
    verts = fiber_vertices(cell.generators, target)
    if not verts:
        raise DecompositionError("cover", f"no parameters reach the point in cell {_label_str(cell.label)}")
    k = len(cell.edges)
    t = tuple(sum((v[j] for v in verts), Fraction(0)) / len(verts) for j in range(k))
    if any(not 0 < x < 1 for x in t):
        raise DecompositionError("cover", "witness parameters are not interior")
    witness = cell.divisor(dec.graph, t)
    return CellLocation(i, cell.label, tuple(zip(cell.edges, t)), lam, tuple(a), witness, len(verts) == 1)


# ---------------------------------------------------------------------------
# refinement and comparison


@dataclass(frozen=True)
class RefinementReport:
    mapping: tuple  # ((qs index, ps index, lattice coords), ...)
    grade_agreement: tuple  # qs indices where the map agrees with grade()
    volume_ok: bool

    @property
    def agrees_with_grade(self) -> bool:
        return len(self.grade_agreement) == len(self.mapping)

    def to_json(self, qs: Decomposition, ps: Decomposition) -> dict:
        G = qs.graph
        return {
            "map": [
                {"qs": qs.cells[i].label.to_json(G), "ps": ps.cells[j].label.to_json(G), "shift_coords": list(a)}
                for i, j, a in self.mapping
            ],
            "volume_ok": self.volume_ok,
            "agrees_with_grade": self.agrees_with_grade,
            "grade_disagreements": [
                qs.cells[i].label.to_json(G) for i, _, _ in self.mapping if i not in set(self.grade_agreement)
            ],
        }


def refinement_map(qs: Decomposition, ps: Decomposition) -> RefinementReport:
    """Map each quasistable cell to the polystable cell containing it."""
    if (qs.graph, qs.polarization, qs.degree, qs.basepoint) != (ps.graph, ps.polarization, ps.degree, ps.basepoint):
        raise ValueError("decompositions must share graph, polarization, degree and basepoint")
    mapping = []
    agree = []
    for i, c in enumerate(qs.cells):
        Z = c.zonotope
        hits = locate_all(ps, Z.center())
        if len(hits) != 1:
            raise DecompositionError("refinement", f"qs cell {_label_str(c.label)} meets {len(hits)} ps cells")
        j, lam, a = hits[0]
        P = ps.cells[j].zonotope
        for corner in Z.corners():
            if not P.contains(la.vsub(corner, lam)):
                raise DecompositionError("refinement", f"qs cell {_label_str(c.label)} leaves ps cell {_label_str(ps.cells[j].label)}")
        mapping.append((i, j, tuple(a)))
        if grade(qs.graph, qs.polarization, c.label) == ps.cells[j].label:
            agree.append(i)
    volume_ok = True
    n = qs.n
    for j, P in enumerate(ps.cells):
        if P.dim != n:
            continue
        inside = sum((qs.cells[i].zonotope.volume() for i, jj, _ in mapping if jj == j and qs.cells[i].dim == n), Fraction(0))
        if inside != P.zonotope.volume():
            volume_ok = False
    if not volume_ok:
        raise DecompositionError("refinement", "qs volumes do not partition the ps cells")
    return RefinementReport(tuple(mapping), tuple(agree), volume_ok)


def same_cells(a: Decomposition, b: Decomposition) -> bool:
    """Whether two decompositions have the same labelled cells modulo the lattice."""
    ka = sorted((cell_key(a.lattice, c.zonotope), c.label.sort_key(a.graph)) for c in a.cells)
    kb = sorted((cell_key(b.lattice, c.zonotope), c.label.sort_key(b.graph)) for c in b.cells)
    return ka == kb


# ---------------------------------------------------------------------------
# admissibility and face structure


def _is_rational(x) -> bool:
    return isinstance(x, numbers.Rational) and not isinstance(x, bool)


def admissible_halfspaces(cell: Cell) -> list[tuple[tuple[int, ...], Fraction]]:
    """Halfspaces ``<u, v> >= a`` with integral ``v`` cutting out the cell."""
    Z = cell.zonotope
    n = Z.ambient
    out = []
    if Z.generators:
        eqs = la.nullspace([list(g) for g in Z.generators])
    else:
        eqs = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    for v in eqs:
        w = la.primitive(v)
        a = la.dot(w, Z.vertex)
        out.append((w, a))
        out.append((tuple(-x for x in w), -a))
    idx, rows, inv = Z._basis
    for c, lo, hi in Z._facets:
        amb = [Fraction(0)] * n
        for r, coef in zip(rows, la.vecmat(c, inv)):
            amb[r] = coef
        w = la.primitive(amb)
        k = next(k for k in range(n) if amb[k] != 0)
        scale = w[k] / amb[k]
        base = la.dot(amb, Z.vertex)
        out.append((w, scale * (lo + base)))
        out.append((tuple(-x for x in w), -scale * (hi + base)))
    return out


def check_admissible(L: LatticeData, cell: Cell) -> bool:
    """True iff the cell is cut out by integral normals with rational thresholds."""
    values = list(cell.base) + [x for g in cell.generators for x in g]
    if not all(_is_rational(x) for x in values):
        return False
    if len(cell.base) != L.n:
        return False
    Z = cell.zonotope
    spaces = admissible_halfspaces(cell)
    for corner in Z.corners():
        if any(la.dot(w, corner) < a for w, a in spaces):
            return False
    return all(all(isinstance(x, int) for x in w) and _is_rational(a) for w, a in spaces)


@dataclass(frozen=True)
class FacePoset:
    cells: tuple  # labels in decomposition order
    dims: tuple
    hasse: tuple  # ((face index, cell index, multiplicity), ...)
    star_rays: tuple  # ((0-cell index, (ray, ...)), ...)

    def covers(self) -> set[tuple[int, int]]:
        return {(a, b) for a, b, _ in self.hasse}

    def to_json(self, G: MetricGraph) -> dict:
        return {
            "cells": [T.to_json(G) for T in self.cells],
            "dims": list(self.dims),
            "hasse": [{"face": a, "cell": b, "multiplicity": m} for a, b, m in self.hasse],
            "star_rays": {str(i): [list(r) for r in rays] for i, rays in self.star_rays},
        }


def face_poset(dec: Decomposition) -> FacePoset:
    """Facet relations between cells modulo the lattice, and the rays at each 0-cell."""
    counts: dict[tuple[int, int], int] = {}
    for j, c in enumerate(dec.cells):
        for f in dict.fromkeys(c.zonotope.facets()):
            i = dec.find_cell(f)
            if i is None:
                raise DecompositionError("faces", f"facet of {_label_str(c.label)} is not a cell")
            counts[(i, j)] = counts.get((i, j), 0) + 1
    rays: dict[int, set] = {i: set() for i, c in enumerate(dec.cells) if c.dim == 0}
    for c in dec.cells:
        if c.dim != 1:
            continue
        Z = c.zonotope
        (g,) = Z.generators
        u = la.primitive(g)
        for end, direction in ((Z.vertex, u), (la.vadd(Z.vertex, g), tuple(-x for x in u))):
            i = dec.find_cell(Zonotope(end))
            if i is None:
                raise DecompositionError("faces", f"endpoint of {_label_str(c.label)} is not a cell")
            rays[i].add(direction)
    return FacePoset(
        tuple(c.label for c in dec.cells),
        tuple(c.dim for c in dec.cells),
        tuple((a, b, m) for (a, b), m in sorted(counts.items())),
        tuple((i, tuple(sorted(r))) for i, r in sorted(rays.items())),
    )
