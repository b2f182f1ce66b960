"""Two vertices joined by two edges: stability, grading and the cell decomposition.

Run with ``python3 demos/two_vertex_walkthrough.py [--svg DIR]``.
"""

import argparse
from pathlib import Path

from namikawa import (
    Divisor,
    SheafType,
    classify,
    enumerate_types,
    face_poset,
    grade,
    is_equivalent,
    load_fixture,
    locate,
    namikawa_decomposition,
    refinement_map,
)
from namikawa.graph import TropicalDivisor
from namikawa.svg import write_svg


def fmt(T: SheafType) -> str:
    S = ",".join(sorted(T.S)) or "-"
    return f"(S={S}; d={T.d.to_dict()})"


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--svg", type=Path, help="directory for pictures of both decompositions")
    args = ap.parse_args()

    spec = load_fixture("l2")
    G, H = spec.graph, spec.H
    print(f"genus {G.genus}, first Betti number {G.betti}, polarization {H.multidegree.to_dict()}")

    # a semistable type that sits on a wall: equality on the subcurve {v2}
    T = SheafType(frozenset(), Divisor({"v1": 0, "v2": 2}))
    r = classify(G, H, T)
    print(f"\n{fmt(T)}: semistable={r.semistable} stable={r.stable} polystable={r.polystable}")
    print(f"  equality on {[sorted(W) for W in r.equality_subcurves]}, quasistable for {sorted(r.quasistable_for)}")
    # grading drops the edges across the equality subcurves
    print(f"  graded type {fmt(grade(G, H, T))}")

    # the two decompositions of the circle of length 2
    for degree in (2, 3):
        print(f"\ndegree {degree}, polystable types:")
        for P in enumerate_types(G, H, degree, "polystable"):
            print(f"  {fmt(P)}")
        dec = namikawa_decomposition(G, H, degree, spec.basepoint)
        rep = dec.report
        print(f"  {len(dec.cells)} cells, maximal volume {rep.volume_total} = det {rep.gram_det}")
        for c in dec.cells:
            lo = c.zonotope.vertex[0]
            hi = lo + (c.zonotope.generators[0][0] if c.zonotope.generators else 0)
            print(f"    {fmt(c.label):32s} dim {c.dim}  [{lo}, {hi}]")
        fp = face_poset(dec)
        print(f"  facet relations {sorted(fp.covers())}, rays at 0-cells {dict(fp.star_rays)}")
        if args.svg:
            args.svg.mkdir(parents=True, exist_ok=True)
            write_svg(dec, args.svg / f"l2_degree{degree}.svg")

    # every divisor class has one polystable representative type
    dec = namikawa_decomposition(G, H, 3, spec.basepoint)
    D = TropicalDivisor.from_divisor(G, {"v2": 3})
    loc = locate(dec, D)
    print(f"\n3*v2 lies in the cell of {fmt(loc.type)}; witness {loc.witness}")
    print(f"  witness equivalent to 3*v2: {is_equivalent(G, loc.witness, D)}")

    # degree 2: a family of witnesses in the polystable cell, a single one for the quasistable cells
    ps = namikawa_decomposition(G, H, 2, spec.basepoint)
    qs = namikawa_decomposition(G, H, 2, spec.basepoint, "qs")
    D = TropicalDivisor.from_divisor(G, {"v2": 2})
    a, b = locate(ps, D), locate(qs, D)
    print(f"\n2*v2 -> ps {fmt(a.type)} unique witness {a.unique_witness}; qs {fmt(b.type)} unique witness {b.unique_witness}")
    ref = refinement_map(qs, ps)
    for i, j, _ in ref.mapping:
        print(f"  qs {fmt(qs.cells[i].label):30s} -> ps {fmt(ps.cells[j].label)}")


if __name__ == "__main__":
    main()
