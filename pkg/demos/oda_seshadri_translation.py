"""Polarization stability as Oda-Seshadri stability after a twist to degree 0.

Run with ``python3 demos/oda_seshadri_translation.py [--fixture NAME] [--degree D]``.
"""

import argparse

from namikawa import classify, load_fixture, os_parameter, os_parameter_v
from namikawa.stability import candidate_types, epsilon_for_quasistability, os_is_semistable, os_is_stable, twist


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--fixture", default="triangle", choices=("l2", "triangle", "dumbbell"))
    ap.add_argument("--degree", type=int, help="defaults to g - 1, where walls appear")
    args = ap.parse_args()

    spec = load_fixture(args.fixture)
    G, H, bp = spec.graph, spec.H, spec.basepoint
    degree = G.genus - 1 if args.degree is None else args.degree
    v = spec.section_vertex
    eps = epsilon_for_quasistability(G, H, degree, v)
    print(f"{args.fixture}: degree {degree}, basepoint {bp}, section {v}, epsilon {eps}\n")

    agree = total = 0
    for T in candidate_types(G, H, degree, margin=1):
        r = classify(G, H, T)
        if not r.semistable:
            continue
        # the parameter depends on which edges the type drops
        T0 = twist(T, bp, -degree)
        q = os_parameter(G, H, degree, bp, T)
        qv = os_parameter_v(G, H, degree, bp, v, T)
        flags = (os_is_semistable(G, q, T0), os_is_stable(G, q, T0), os_is_stable(G, qv, T0))
        expected = (r.semistable, r.stable, v in r.quasistable_for)
        total += 1
        agree += flags == expected
        qs = ", ".join(f"{w}:{x}" for w, x in q.q)
        print(f"S={sorted(T.S)!s:14s} d={T.d.vector(G)!s:12s} q=({qs})  stable={r.stable!s:5s} {v}-quasistable={expected[2]}")

    print(f"\n{agree}/{total} semistable types agree on all three flags")


if __name__ == "__main__":
    main()
