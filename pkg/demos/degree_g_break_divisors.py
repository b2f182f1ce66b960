"""Degree g: polystable types are break divisors and maximal cells are spanning trees.

Run with ``python3 demos/degree_g_break_divisors.py [--seed N] [--graphs K]``.
"""

import argparse
import random

from namikawa import degree_g_equivalence, enumerate_types, load_fixture, namikawa_decomposition
from namikawa.generators import random_graph, random_polarization
from namikawa.graph import count_spanning_trees
from namikawa.stability import twist


def report(name, G, H) -> bool:
    g = G.genus
    rep = degree_g_equivalence(G, H, strict=False)
    dec = namikawa_decomposition(G, H, g, G.vertex_ids[0], validate="volume")
    # twisting by -v must land exactly on the v-quasistable types one degree lower
    top = enumerate_types(G, H, g, "semistable")
    twists_ok = all(
        {twist(T, v, -1) for T in top} == set(enumerate_types(G, H, g - 1, "quasistable", v)) for v in G.vertex_ids
    )
    trees = count_spanning_trees(G)
    ok = rep.passed and twists_ok and len(dec.maximal_cells()) == trees
    print(
        f"{name:12s} |V|={G.n_vertices} |E|={G.n_edges} g={g}: "
        f"{len(rep.polystable)} polystable / {len(rep.break_types)} break types, "
        f"{len(dec.maximal_cells())} maximal cells / {trees} trees, twists ok={twists_ok}"
    )
    return ok


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--graphs", type=int, default=8)
    args = ap.parse_args()

    results = []
    for name in ("l2", "triangle", "dumbbell"):
        spec = load_fixture(name)
        results.append(report(name, spec.graph, spec.H))

    # polarizations only enter through an open condition, so any choice gives the same sets
    spec = load_fixture("l2")
    a = degree_g_equivalence(spec.graph, {"v1": 2, "v2": 2}).polystable
    b = degree_g_equivalence(spec.graph, {"v1": 1, "v2": 3}).polystable
    print(f"\nL2 with H=(2,2) and H=(1,3) give the same degree-3 types: {set(a) == set(b)}\n")

    rng = random.Random(args.seed)
    for k in range(args.graphs):
        G = random_graph(rng, max_vertices=4, max_edges=6)
        results.append(report(f"random#{k}", G, random_polarization(rng, G)))
    print(f"\nall consistent: {all(results)}")


if __name__ == "__main__":
    main()
