"""Seeded random inputs: small connected metric graphs, polarizations, divisors."""

from __future__ import annotations

import random
from fractions import Fraction

from .graph import Divisor, Edge, EdgePoint, MetricGraph, TropicalDivisor, Vertex, VertexPoint


def random_length(rng: random.Random, max_den: int = 7, max_num: int = 12) -> Fraction:
    return Fraction(rng.randint(1, max_num), rng.randint(1, max_den))


def random_graph(
    rng: random.Random,
    max_vertices: int = 4,
    max_edges: int = 6,
    max_den: int = 7,
    max_weight: int = 1,
    loops: bool = True,
    min_genus: int = 1,
) -> MetricGraph:
    """Connected graph with a random spanning tree plus random extra edges."""
    while True:
        nv = rng.randint(1, max_vertices)
        names = [f"v{i + 1}" for i in range(nv)]
        verts = tuple(Vertex(v, rng.randint(0, max_weight)) for v in names)
        pairs = []
        for i in range(1, nv):
            pairs.append((names[rng.randrange(i)], names[i]))
        extra = rng.randint(0, max_edges - len(pairs))
        for _ in range(extra):
            a, b = rng.choice(names), rng.choice(names)
            if a == b and not loops:
                continue
            pairs.append((a, b))
        rng.shuffle(pairs)
        edges = []
        for k, (a, b) in enumerate(pairs):
            if rng.random() < 0.5:
                a, b = b, a
            edges.append(Edge(f"e{k + 1}", a, b, random_length(rng, max_den)))
        G = MetricGraph(verts, tuple(edges))
        if G.betti >= min_genus:
            return G


def random_polarization(rng: random.Random, G: MetricGraph, max_entry: int = 3) -> Divisor:
    return Divisor({v: rng.randint(1, max_entry) for v in G.vertex_ids})


def random_divisor(
    rng: random.Random, G: MetricGraph, degree: int, points: int = 3, spread: int = 2, max_den: int = 13
) -> TropicalDivisor:
    """Divisor of the given degree with random rational edge points and vertex chips."""
    pts = []
    for _ in range(points):
        e = rng.choice(G.edges)
        t = Fraction(rng.randint(1, max_den - 1), max_den)
        pts.append((EdgePoint(e.id, t * e.length), rng.randint(-spread, spread)))
    current = sum(m for _, m in pts)
    v = rng.choice(G.vertex_ids)
    pts.append((VertexPoint(v), degree - current))
    return TropicalDivisor(G, pts)
