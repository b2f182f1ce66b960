"""Vertex-weighted metric multigraphs, divisors, chains and subcurve arithmetic.

A :class:`MetricGraph` is the dual graph of a nodal curve: vertices carry the
geometric genus of their component, edges carry a positive rational length
(the thickness of the node).  Loops and parallel edges are allowed, and every
edge has a stored orientation ``tail -> head`` used by chains.

Subcurves are nonempty proper vertex subsets.  Internally they are bitmasks
over the vertex order of the graph; the public functions accept any iterable
of vertex ids.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, NamedTuple

from . import _linalg as la

MAX_VERTICES = 16


class GraphError(ValueError):
    """Invalid graph data or an operation outside its domain."""


class CapExceeded(GraphError):
    """A combinatorial enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class Vertex:
    id: str
    weight: int = 0


@dataclass(frozen=True)
class Edge:
    id: str
    tail: str
    head: str
    length: Fraction = Fraction(1)

    @property
    def is_loop(self) -> bool:
        return self.tail == self.head

    def other(self, v: str) -> str:
        return self.head if v == self.tail else self.tail


@dataclass(frozen=True)
class MetricGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(
            self,
            "edges",
            tuple(
                e if isinstance(e.length, Fraction) else Edge(e.id, e.tail, e.head, Fraction(e.length))
                for e in self.edges
            ),
        )
        vids = [v.id for v in self.vertices]
        if len(set(vids)) != len(vids):
            raise GraphError("duplicate vertex id")
        eids = [e.id for e in self.edges]
        if len(set(eids)) != len(eids):
            raise GraphError("duplicate edge id")
        if set(vids) & set(eids):
            raise GraphError("vertex and edge ids must be distinct")
        for v in self.vertices:
            if not isinstance(v.weight, int) or v.weight < 0:
                raise GraphError(f"vertex {v.id!r}: weight must be a nonnegative integer")
        vs = set(vids)
        for e in self.edges:
            if e.tail not in vs or e.head not in vs:
                raise GraphError(f"edge {e.id!r} has an unknown endpoint")
            if e.length <= 0:
                raise GraphError(f"edge {e.id!r}: length must be positive")

    @classmethod
    def build(cls, vertices, edges) -> "MetricGraph":
        """Convenience constructor from plain tuples.

        ``vertices`` is an iterable of ids or ``(id, weight)`` pairs and
        ``edges`` of ``(id, tail, head)`` or ``(id, tail, head, length)``.
        """
        vs = []
        for v in vertices:
            if isinstance(v, str):
                vs.append(Vertex(v, 0))
            else:
                vs.append(Vertex(v[0], int(v[1])))
        es = []
        for e in edges:
            length = Fraction(e[3]) if len(e) > 3 else Fraction(1)
            es.append(Edge(e[0], e[1], e[2], length))
        return cls(tuple(vs), tuple(es))

    def __hash__(self):
        # the generated hash walks every vertex and edge; graphs key many caches
        try:
            return self.__dict__["_hash"]
        except KeyError:
            h = hash((self.vertices, self.edges))
            self.__dict__["_hash"] = h
            return h

    # -- lookups -------------------------------------------------------------

    @cached_property
    def vertex_ids(self) -> tuple[str, ...]:
        return tuple(v.id for v in self.vertices)

    @cached_property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.edges)

    @cached_property
    def vindex(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertex_ids)}

    @cached_property
    def eindex(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.edge_ids)}

    @cached_property
    def weights(self) -> dict[str, int]:
        return {v.id: v.weight for v in self.vertices}

    def edge(self, eid: str) -> Edge:
        try:
            return self.edges[self.eindex[eid]]
        except KeyError:
            raise GraphError(f"unknown edge {eid!r}") from None

    def length(self, eid: str) -> Fraction:
        return self.edge(eid).length

    def incident(self, v: str) -> list[Edge]:
        return [e for e in self.edges if v in (e.tail, e.head)]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def mask(self, W: Iterable[str]) -> int:
        m = 0
        for v in W:
            try:
                m |= 1 << self.vindex[v]
            except KeyError:
                raise GraphError(f"unknown vertex {v!r}") from None
        return m

    def unmask(self, m: int) -> frozenset[str]:
        return frozenset(v for i, v in enumerate(self.vertex_ids) if m >> i & 1)

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n_vertices) - 1

    @cached_property
    def _edge_masks(self) -> tuple[tuple[int, int], ...]:
        return tuple((1 << self.vindex[e.tail], 1 << self.vindex[e.head]) for e in self.edges)

    # -- global invariants ----------------------------------------------------

    def components(self, removed: Iterable[str] = ()) -> list[frozenset[str]]:
        """Connected components after deleting the given edges (vertices kept)."""
        removed = set(removed)
        parent = {v: v for v in self.vertex_ids}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            if e.id not in removed:
                a, b = find(e.tail), find(e.head)
                if a != b:
                    parent[a] = b
        groups: dict[str, list[str]] = {}
        for v in self.vertex_ids:
            groups.setdefault(find(v), []).append(v)
        comps = [frozenset(g) for g in groups.values()]
        comps.sort(key=lambda c: min(self.vindex[v] for v in c))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    @cached_property
    def betti(self) -> int:
        return self.n_edges - self.n_vertices + len(self.components())

    @cached_property
    def genus(self) -> int:
        """Total genus: sum of weights plus the first Betti number."""
        return sum(v.weight for v in self.vertices) + self.betti

    def subgraph(self, W: Iterable[str], drop: Iterable[str] = ()) -> "MetricGraph":
        """Induced subgraph on ``W`` with the edges in ``drop`` deleted."""
        W = set(W)
        drop = set(drop)
        return MetricGraph(
            tuple(v for v in self.vertices if v.id in W),
            tuple(e for e in self.edges if e.tail in W and e.head in W and e.id not in drop),
        )


# ---------------------------------------------------------------------------
# Divisors and chains


class Divisor(Mapping):
    """Integer-valued function on vertex ids; absent keys read as zero."""

    __slots__ = ("_items", "_hash")

    def __init__(self, values: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        if isinstance(values, Mapping):
            values = values.items()
        acc: dict[str, int] = {}
        for k, v in values:
            if int(v) != v:
                raise GraphError(f"divisor value at {k!r} is not an integer")
            acc[k] = acc.get(k, 0) + int(v)
        self._items = tuple(sorted((k, v) for k, v in acc.items() if v != 0))
        self._hash = None

    @classmethod
    def from_vector(cls, G: MetricGraph, vec: Iterable[int]) -> "Divisor":
        return cls(zip(G.vertex_ids, vec))

    @classmethod
    def point(cls, v: str, k: int = 1) -> "Divisor":
        return cls({v: k})

    def __getitem__(self, key: str) -> int:
        for k, v in self._items:
            if k == key:
                return v
        return 0

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __contains__(self, key) -> bool:
        return any(k == key for k, _ in self._items)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._items)
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Divisor):
            return self._items == other._items
        if isinstance(other, Mapping):
            return self == Divisor(other)
        return NotImplemented

    def __repr__(self):
        return f"Divisor({dict(self._items)!r})"

    @property
    def degree(self) -> int:
        return sum(v for _, v in self._items)

    def __add__(self, other: Mapping[str, int]) -> "Divisor":
        return Divisor(list(self._items) + list(Divisor(other)._items))

    def __sub__(self, other: Mapping[str, int]) -> "Divisor":
        return Divisor(list(self._items) + [(k, -v) for k, v in Divisor(other)._items])

    def __neg__(self) -> "Divisor":
        return Divisor([(k, -v) for k, v in self._items])

    def __mul__(self, k: int) -> "Divisor":
        return Divisor([(key, k * v) for key, v in self._items])

    __rmul__ = __mul__

    def vector(self, G: MetricGraph) -> tuple[int, ...]:
        return tuple(self[v] for v in G.vertex_ids)

    def restrict(self, W: Iterable[str]) -> "Divisor":
        W = set(W)
        return Divisor([(k, v) for k, v in self._items if k in W])

    def total(self, W: Iterable[str]) -> int:
        W = set(W)
        return sum(v for k, v in self._items if k in W)

    def to_dict(self, G: MetricGraph | None = None) -> dict[str, int]:
        if G is None:
            return dict(self._items)
        return {v: self[v] for v in G.vertex_ids}


class Chain(Mapping):
    """Rational 1-chain: edge id -> coefficient, relative to stored orientations."""

    __slots__ = ("_c",)

    def __init__(self, coeffs: Mapping[str, Fraction] | Iterable[tuple[str, Fraction]] = ()):
        if isinstance(coeffs, Mapping):
            coeffs = coeffs.items()
        acc: dict[str, Fraction] = {}
        for k, v in coeffs:
            acc[k] = acc.get(k, Fraction(0)) + Fraction(v)
        self._c = {k: v for k, v in sorted(acc.items()) if v != 0}

    def __getitem__(self, key):
        return self._c.get(key, Fraction(0))

    def __iter__(self):
        return iter(self._c)

    def __len__(self):
        return len(self._c)

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return self._c == Chain(other)._c
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self._c.items()))

    def __repr__(self):
        return "Chain({" + ", ".join(f"{k!r}: {v}" for k, v in self._c.items()) + "})"

    def __add__(self, other):
        return Chain(list(self._c.items()) + list(Chain(other)._c.items()))

    def __sub__(self, other):
        return Chain(list(self._c.items()) + [(k, -v) for k, v in Chain(other)._c.items()])

    def __neg__(self):
        return Chain({k: -v for k, v in self._c.items()})

    def __mul__(self, c):
        return Chain({k: c * v for k, v in self._c.items()})

    __rmul__ = __mul__

    def boundary(self, G: MetricGraph) -> dict[str, Fraction]:
        """Vertex function head - tail, summed with coefficients."""
        out = {v: Fraction(0) for v in G.vertex_ids}
        for eid, c in self._c.items():
            e = G.edge(eid)
            out[e.head] += c
            out[e.tail] -= c
        return out


# ---------------------------------------------------------------------------
# Tropical divisors (points on the metric graph)


@dataclass(frozen=True, order=True)
class VertexPoint:
    vertex: str

    def sort_key(self):
        return (0, self.vertex, Fraction(0))


@dataclass(frozen=True, order=True)
class EdgePoint:
    edge: str
    offset: Fraction

    def __post_init__(self):
        object.__setattr__(self, "offset", Fraction(self.offset))

    def sort_key(self):
        return (1, self.edge, self.offset)


Location = VertexPoint | EdgePoint


def normalize_location(G: MetricGraph, loc: Location) -> Location:
    """Map edge points at offset 0 or the full length onto the endpoint vertex."""
    if isinstance(loc, VertexPoint):
        if loc.vertex not in G.vindex:
            raise GraphError(f"unknown vertex {loc.vertex!r}")
        return loc
    e = G.edge(loc.edge)
    if loc.offset == 0:
        return VertexPoint(e.tail)
    if loc.offset == e.length:
        return VertexPoint(e.head)
    if not 0 < loc.offset < e.length:
        raise GraphError(f"offset {loc.offset} outside edge {e.id!r}")
    return loc


class TropicalDivisor:
    """Finite integer combination of points of the metric graph."""

    __slots__ = ("graph", "points")

    def __init__(self, G: MetricGraph, points: Iterable[tuple[Location, int]] = ()):
        acc: dict[Location, int] = {}
        for loc, mult in points:
            if isinstance(loc, str):
                loc = VertexPoint(loc)
            loc = normalize_location(G, loc)
            acc[loc] = acc.get(loc, 0) + int(mult)
        self.graph = G
        self.points = tuple(sorted(((l, m) for l, m in acc.items() if m != 0), key=lambda lm: lm[0].sort_key()))

    @classmethod
    def from_divisor(cls, G: MetricGraph, d: Mapping[str, int]) -> "TropicalDivisor":
        return cls(G, [(VertexPoint(v), k) for v, k in Divisor(d).items()])

    @classmethod
    def of_type(cls, G: MetricGraph, d: Mapping[str, int], offsets: Mapping[str, Fraction]) -> "TropicalDivisor":
        """``d`` plus one point in the interior of each edge listed in ``offsets``."""
        pts = [(VertexPoint(v), k) for v, k in Divisor(d).items()]
        for eid, t in offsets.items():
            if not 0 < Fraction(t) < G.length(eid):
                raise GraphError(f"offset on {eid!r} must be interior")
            pts.append((EdgePoint(eid, Fraction(t)), 1))
        return cls(G, pts)

    @property
    def degree(self) -> int:
        return sum(m for _, m in self.points)

    def __eq__(self, other):
        return isinstance(other, TropicalDivisor) and self.points == other.points

    def __hash__(self):
        return hash(self.points)

    def __add__(self, other: "TropicalDivisor") -> "TropicalDivisor":
        return TropicalDivisor(self.graph, self.points + other.points)

    def __sub__(self, other: "TropicalDivisor") -> "TropicalDivisor":
        return TropicalDivisor(self.graph, self.points + tuple((l, -m) for l, m in other.points))

    def __repr__(self):
        parts = []
        for loc, m in self.points:
            if isinstance(loc, VertexPoint):
                parts.append(f"{m}*{loc.vertex}")
            else:
                parts.append(f"{m}*{loc.edge}@{loc.offset}")
        return "TropicalDivisor(" + " + ".join(parts) + ")"

    def is_vertex_supported(self) -> bool:
        return all(isinstance(l, VertexPoint) for l, _ in self.points)

    def vertex_part(self) -> Divisor:
        return Divisor([(l.vertex, m) for l, m in self.points if isinstance(l, VertexPoint)])


# ---------------------------------------------------------------------------
# Subcurve arithmetic


def _as_mask(G: MetricGraph, W) -> int:
    if W is None:
        return G.full_mask
    if isinstance(W, int):
        return W
    if isinstance(W, str):
        W = [W]
    return G.mask(W)


def _edge_set(G: MetricGraph, S: Iterable[str]) -> frozenset[str]:
    S = frozenset(S)
    unknown = S - set(G.edge_ids)
    if unknown:
        raise GraphError(f"unknown edges {sorted(unknown)}")
    return S


def internal_edges(G: MetricGraph, W) -> list[Edge]:
    m = _as_mask(G, W)
    return [e for e, (a, b) in zip(G.edges, G._edge_masks) if a & m and b & m]


def arithmetic_genus(G: MetricGraph, W=None) -> int:
    """Sum of weights + internal edges - |W| + 1; may be negative if W is disconnected."""
    m = _as_mask(G, W)
    if m == 0:
        raise GraphError("subcurve must be nonempty")
    wsum = sum(v.weight for i, v in enumerate(G.vertices) if m >> i & 1)
    return wsum + len(internal_edges(G, m)) - bin(m).count("1") + 1


def normalized_genus(G: MetricGraph, W, S: Iterable[str]) -> int:
    """Arithmetic genus of W after normalizing the nodes in S."""
    S = _edge_set(G, S)
    m = _as_mask(G, W)
    return arithmetic_genus(G, m) - sum(1 for e in internal_edges(G, m) if e.id in S)


class BoundaryCounts(NamedTuple):
    total: int
    in_S: int
    not_in_S: int
    S_internal: int


def boundary_counts(G: MetricGraph, W, S: Iterable[str] = ()) -> BoundaryCounts:
    S = _edge_set(G, S)
    m = _as_mask(G, W)
    in_s = out_s = internal = 0
    for e, (a, b) in zip(G.edges, G._edge_masks):
        inside_a, inside_b = bool(a & m), bool(b & m)
        if inside_a and inside_b:
            internal += e.id in S
        elif inside_a or inside_b:
            if e.id in S:
                in_s += 1
            else:
                out_s += 1
    return BoundaryCounts(in_s + out_s, in_s, out_s, internal)


def boundary_edges(G: MetricGraph, W) -> list[Edge]:
    m = _as_mask(G, W)
    return [e for e, (a, b) in zip(G.edges, G._edge_masks) if bool(a & m) != bool(b & m)]


def subcurve_masks(G: MetricGraph, *, force: bool = False) -> range:
    """Bitmasks of all nonempty proper subcurves."""
    if G.n_vertices > MAX_VERTICES and not force:
        raise CapExceeded(f"|V| = {G.n_vertices} exceeds the cap of {MAX_VERTICES}")
    return range(1, G.full_mask)


def subcurves(G: MetricGraph, *, force: bool = False) -> Iterator[frozenset[str]]:
    for m in subcurve_masks(G, force=force):
        yield G.unmask(m)


# ---------------------------------------------------------------------------
# Trees, cycles and the edge-length pairing


def spanning_forest(G: MetricGraph) -> frozenset[str]:
    """Canonical spanning forest.

    Edges are scanned from the end of the edge list, so the edges left out of
    the forest (the ones that index cycle coordinates) are as early in the
    edge order as possible.
    """
    parent = {v: v for v in G.vertex_ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = []
    for e in reversed(G.edges):
        a, b = find(e.tail), find(e.head)
        if a != b:
            parent[a] = b
            tree.append(e.id)
    return frozenset(tree)


def check_forest(G: MetricGraph, tree: Iterable[str]) -> frozenset[str]:
    tree = _edge_set(G, tree)
    parent = {v: v for v in G.vertex_ids}

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for eid in tree:
        e = G.edge(eid)
        a, b = find(e.tail), find(e.head)
        if a == b:
            raise GraphError(f"edge {eid!r} closes a cycle in the forest")
        parent[a] = b
    if len(G.components(set(G.edge_ids) - tree)) != len(G.components()):
        raise GraphError("forest does not span every component")
    return tree


def tree_path(G: MetricGraph, tree: Iterable[str], start: str, end: str) -> Chain:
    """Signed chain of the unique forest path from ``start`` to ``end``."""
    tree = frozenset(tree)
    if start == end:
        return Chain()
    adj: dict[str, list[tuple[str, str, int]]] = {v: [] for v in G.vertex_ids}
    for eid in tree:
        e = G.edge(eid)
        adj[e.tail].append((e.head, eid, 1))
        adj[e.head].append((e.tail, eid, -1))
    prev: dict[str, tuple[str, str, int] | None] = {start: None}
    stack = [start]
    while stack:
        x = stack.pop()
        if x == end:
            break
        for y, eid, s in adj[x]:
            if y not in prev:
                prev[y] = (x, eid, s)
                stack.append(y)
    if end not in prev:
        raise GraphError(f"no forest path from {start!r} to {end!r}")
    coeffs = []
    x = end
    while prev[x] is not None:
        px, eid, s = prev[x]
        coeffs.append((eid, Fraction(s)))
        x = px
    return Chain(coeffs)


def cycle_basis(G: MetricGraph, tree: Iterable[str] | None = None) -> list[Chain]:
    """Fundamental cycles of the non-forest edges, in edge order.

    Each cycle is ``f + path(head(f) -> tail(f))`` so its coefficient on
    ``f`` is +1 and on every other non-forest edge is 0.
    """
    tree = spanning_forest(G) if tree is None else check_forest(G, tree)
    basis = []
    for e in G.edges:
        if e.id in tree:
            continue
        basis.append(Chain({e.id: Fraction(1)}) + tree_path(G, tree, e.head, e.tail))
    return basis


def edge_pairing(G: MetricGraph, c1: Mapping[str, Fraction], c2: Mapping[str, Fraction]) -> Fraction:
    return sum((Fraction(c) * Fraction(c2.get(e, 0)) * G.length(e) for e, c in c1.items()), Fraction(0))


def gram_matrix(G: MetricGraph, basis: list[Chain]) -> list[list[Fraction]]:
    return [[edge_pairing(G, a, b) for b in basis] for a in basis]


# ---------------------------------------------------------------------------
# Subdivision and spanning trees


def subdivide_type(G: MetricGraph, S: Iterable[str], d: Mapping[str, int]) -> tuple[MetricGraph, Divisor]:
    """Insert a weight-0 exceptional vertex at the midpoint of each edge of S.

    The exceptional vertex of ``e`` is named ``e + "^"`` and the halves
    ``e + "^-"`` (tail side) and ``e + "^+"`` (head side).  The divisor is
    ``d`` on old vertices and 1 on each exceptional vertex.
    """
    S = _edge_set(G, S)
    d = Divisor(d)
    if not S:
        return G, d
    vertices = list(G.vertices)
    edges = []
    dhat = dict(d.items())
    for e in G.edges:
        if e.id not in S:
            edges.append(e)
            continue
        x = e.id + "^"
        vertices.append(Vertex(x, 0))
        half = e.length / 2
        edges.append(Edge(e.id + "^-", e.tail, x, half))
        edges.append(Edge(e.id + "^+", x, e.head, half))
        dhat[x] = 1
    return MetricGraph(tuple(vertices), tuple(edges)), Divisor(dhat)


def laplacian(G: MetricGraph) -> list[list[int]]:
    n = G.n_vertices
    L = [[0] * n for _ in range(n)]
    for e in G.edges:
        if e.is_loop:
            continue
        i, j = G.vindex[e.tail], G.vindex[e.head]
        L[i][i] += 1
        L[j][j] += 1
        L[i][j] -= 1
        L[j][i] -= 1
    return L


def count_spanning_trees(G: MetricGraph) -> int:
    """Kirchhoff's matrix-tree theorem (0 for disconnected graphs)."""
    if G.n_vertices <= 1:
        return 1
    L = laplacian(G)
    minor = [row[1:] for row in L[1:]]
    return int(la.det(minor))


def spanning_trees(G: MetricGraph) -> Iterator[frozenset[str]]:
    """All spanning trees of a connected multigraph, by exhaustive subset search."""
    n = G.n_vertices
    if n == 0:
        return
    candidates = [e for e in G.edges if not e.is_loop]
    for combo in itertools.combinations(candidates, n - 1):
        parent = {v: v for v in G.vertex_ids}

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        ok = True
        for e in combo:
            a, b = find(e.tail), find(e.head)
            if a == b:
                ok = False
                break
            parent[a] = b
        if ok:
            yield frozenset(e.id for e in combo)
