"""Reduced divisors on metric graphs via Dhar's burning algorithm.

This is the independent linear-equivalence oracle: two divisors of the same
degree are equivalent exactly when their reduced forms at a common point agree.
It shares nothing with the lattice code besides the graph data structures.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, lcm

from . import _linalg as la
from .graph import (
    EdgePoint,
    GraphError,
    Location,
    MetricGraph,
    TropicalDivisor,
    VertexPoint,
    normalize_location,
)

MAX_FIRINGS = 200_000


@dataclass(frozen=True)
class _Segment:
    a: int
    b: int
    length: Fraction
    edge: str
    off_a: Fraction
    off_b: Fraction

    def point_from(self, G: MetricGraph, end: int, dist: Fraction) -> Location:
        """Location at distance ``dist`` from endpoint ``end`` towards the other one."""
        if end == self.a:
            off = self.off_a + dist if self.off_b > self.off_a else self.off_a - dist
        else:
            off = self.off_b + dist if self.off_a > self.off_b else self.off_b - dist
        return normalize_location(G, EdgePoint(self.edge, off))


class _Model:
    """Subdivision of G with a node at every vertex and every marked point."""

    def __init__(self, G: MetricGraph, marked):
        self.G = G
        nodes: list[Location] = [VertexPoint(v) for v in G.vertex_ids]
        index: dict[Location, int] = {loc: i for i, loc in enumerate(nodes)}
        on_edge: dict[str, list[Fraction]] = {}
        for loc in marked:
            loc = normalize_location(G, loc)
            if isinstance(loc, EdgePoint) and loc not in index:
                index[loc] = len(nodes)
                nodes.append(loc)
                on_edge.setdefault(loc.edge, []).append(loc.offset)
        segs = []
        for e in G.edges:
            offs = [Fraction(0)] + sorted(on_edge.get(e.id, ())) + [e.length]
            ids = [index[VertexPoint(e.tail)]]
            ids += [index[EdgePoint(e.id, o)] for o in offs[1:-1]]
            ids.append(index[VertexPoint(e.head)])
            for k in range(len(offs) - 1):
                if ids[k] == ids[k + 1]:
                    continue  # a bare loop never carries fire or slope
                segs.append(_Segment(ids[k], ids[k + 1], offs[k + 1] - offs[k], e.id, offs[k], offs[k + 1]))
        self.nodes = nodes
        self.index = index
        self.segments = segs

    def laplacian(self) -> list[list[Fraction]]:
        n = len(self.nodes)
        L = [[Fraction(0)] * n for _ in range(n)]
        for s in self.segments:
            w = 1 / s.length
            L[s.a][s.a] += w
            L[s.b][s.b] += w
            L[s.a][s.b] -= w
            L[s.b][s.a] -= w
        return L


def _as_location(G: MetricGraph, q) -> Location:
    if isinstance(q, str):
        q = VertexPoint(q)
    return normalize_location(G, q)


def _chips(D: TropicalDivisor) -> dict[Location, int]:
    return dict(D.points)


def _clear_negatives(G: MetricGraph, D: TropicalDivisor, q: Location) -> TropicalDivisor:
    """Equivalent divisor that is effective away from q.

    For each negative point p, a harmonic potential with a unit source at p
    and sink at q is scaled to integer slopes; subtracting multiples of its
    divisor moves chips from q to p.
    """
    chips = _chips(D)
    negatives = [p for p, m in chips.items() if m < 0 and p != q]
    if not negatives:
        return D
    model = _Model(G, list(chips) + [q])
    L = model.laplacian()
    qi = model.index[q]
    keep = [i for i in range(len(model.nodes)) if i != qi]
    reduced = [[L[i][j] for j in keep] for i in keep]
    for p in negatives:
        pi = model.index[p]
        rhs = [Fraction(int(i == pi)) for i in keep]
        sol = la.solve(reduced, rhs)
        if sol is None:
            raise GraphError("burning oracle needs a connected graph")
        u = [Fraction(0)] * len(model.nodes)
        for i, x in zip(keep, sol):
            u[i] = x
        K = 1
        for s in model.segments:
            K = lcm(K, ((u[s.b] - u[s.a]) / s.length).denominator)
        a = ceil(Fraction(-chips[p], K))
        chips[p] = chips.get(p, 0) + a * K
        chips[q] = chips.get(q, 0) - a * K
    return TropicalDivisor(G, chips.items())


def _burn(model: _Model, chips: dict[Location, int], q: Location) -> set[int]:
    burnt = {model.index[q]}
    changed = True
    while changed:
        changed = False
        fire_in = [0] * len(model.nodes)
        for s in model.segments:
            if (s.a in burnt) != (s.b in burnt):
                fire_in[s.b if s.a in burnt else s.a] += 1
        for i, loc in enumerate(model.nodes):
            if i not in burnt and fire_in[i] > chips.get(loc, 0):
                burnt.add(i)
                changed = True
    return burnt


def reduce_divisor(G: MetricGraph, D: TropicalDivisor, q) -> TropicalDivisor:
    """The unique q-reduced divisor linearly equivalent to D."""
    if not G.is_connected():
        raise GraphError("reduced divisors need a connected graph")
    q = _as_location(G, q)
    D = _clear_negatives(G, D, q)
    for _ in range(MAX_FIRINGS):
        chips = _chips(D)
        model = _Model(G, list(chips) + [q])
        burnt = _burn(model, chips, q)
        if len(burnt) == len(model.nodes):
            return D
        outgoing = []
        for s in model.segments:
            a_in, b_in = s.a not in burnt, s.b not in burnt
            if a_in and not b_in:
                outgoing.append((s, s.a))
            elif b_in and not a_in:
                outgoing.append((s, s.b))
        delta = min(s.length for s, _ in outgoing)
        moves = []
        for s, end in outgoing:
            moves.append((model.nodes[end], -1))
            moves.append((s.point_from(G, end, delta), 1))
        D = TropicalDivisor(G, D.points + tuple(moves))
    raise RuntimeError("burning algorithm did not terminate")


def is_equivalent(G: MetricGraph, D1: TropicalDivisor, D2: TropicalDivisor, q=None) -> bool:
    if D1.degree != D2.degree:
        raise ValueError(f"degree mismatch: {D1.degree} vs {D2.degree}")
    q = G.vertex_ids[0] if q is None else q
    return reduce_divisor(G, D1, q) == reduce_divisor(G, D2, q)


def tent_divisor(G: MetricGraph, edge: str, a, b, slope: int = 1) -> TropicalDivisor:
    """Divisor of the tent function on ``edge`` that is zero outside [a, b],
    peaks at the midpoint and has slopes of absolute value ``slope``."""
    a, b = Fraction(a), Fraction(b)
    if not 0 <= a < b <= G.length(edge):
        raise GraphError("tent must sit inside the edge")
    m = (a + b) / 2
    return TropicalDivisor(
        G, [(EdgePoint(edge, a), slope), (EdgePoint(edge, b), slope), (EdgePoint(edge, m), -2 * slope)]
    )
