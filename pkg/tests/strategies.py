"""Hypothesis strategies built on the seeded generators."""

import random

from hypothesis import strategies as st

from namikawa.generators import random_divisor, random_graph, random_polarization

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@st.composite
def graphs(draw, max_vertices=4, max_edges=6, min_genus=1):
    rng = random.Random(draw(seeds))
    return random_graph(rng, max_vertices=max_vertices, max_edges=max_edges, min_genus=min_genus)


@st.composite
def problems(draw, max_vertices=4, max_edges=5):
    rng = random.Random(draw(seeds))
    G = random_graph(rng, max_vertices=max_vertices, max_edges=max_edges)
    return G, random_polarization(rng, G)


@st.composite
def graph_with_divisor(draw, max_vertices=3, max_edges=5):
    rng = random.Random(draw(seeds))
    G = random_graph(rng, max_vertices=max_vertices, max_edges=max_edges)
    deg = draw(st.integers(min_value=-2, max_value=4))
    return G, random_divisor(rng, G, deg)
