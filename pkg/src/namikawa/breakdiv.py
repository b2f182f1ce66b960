"""Break divisors, recognised two independent ways.

* spanning trees: ``d`` is the weight divisor plus one endpoint of every edge
  outside some spanning tree (exhaustive search, returns a witness);
* inequalities: every subcurve carries at least its normalized genus.

In degree g the polystable types are exactly the types ``(S, d)`` with ``d``
a break divisor on ``G - S``; :func:`degree_g_equivalence` checks this by
enumerating both sides.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .graph import (
    Divisor,
    MetricGraph,
    count_spanning_trees,
    normalized_genus,
    spanning_trees,
    subcurve_masks,
)
from .stability import SheafType, as_polarization, enumerate_types


@dataclass(frozen=True)
class BreakWitness:
    is_break: bool
    tree: frozenset = frozenset()
    phi: tuple = ()  # ((edge, vertex), ...) for the edges outside the tree
    reason: str = ""

    def to_json(self) -> dict:
        out = {"break_divisor": self.is_break}
        if self.is_break:
            out["tree"] = sorted(self.tree)
            out["phi"] = {e: v for e, v in self.phi}
        else:
            out["reason"] = self.reason
        return out


def weight_divisor(G: MetricGraph) -> Divisor:
    return Divisor(G.weights)


def _assign(G: MetricGraph, edges: list, residual: dict[str, int]) -> list[tuple[str, str]] | None:
    """Pick one endpoint per edge so that the picks hit ``residual`` exactly."""
    if not edges:
        return [] if all(x == 0 for x in residual.values()) else None
    e, rest = edges[0], edges[1:]
    for v in dict.fromkeys((e.tail, e.head)):
        if residual.get(v, 0) <= 0:
            continue
        residual[v] -= 1
        sub = _assign(G, rest, residual)
        residual[v] += 1
        if sub is not None:
            return [(e.id, v)] + sub
    return None


def is_break_divisor_tree(G: MetricGraph, d) -> BreakWitness:
    """Exhaustive search over spanning trees and endpoint choices."""
    d = Divisor(d)
    if not G.is_connected():
        return BreakWitness(False, reason="graph is not connected")
    if d.degree != G.genus:
        return BreakWitness(False, reason=f"degree {d.degree} differs from the genus {G.genus}")
    base = weight_divisor(G)
    residual = {v: d[v] - base[v] for v in G.vertex_ids}
    if any(x < 0 for x in residual.values()):
        return BreakWitness(False, reason="below the weight divisor at some vertex")
    for tree in spanning_trees(G):
        outside = [e for e in G.edges if e.id not in tree]
        phi = _assign(G, outside, dict(residual))
        if phi is not None:
            return BreakWitness(True, frozenset(tree), tuple(phi))
    return BreakWitness(False, reason="no spanning tree and orientation reaches d")


def is_break_divisor_ineq(G: MetricGraph, S, d) -> bool:
    """Every nonempty proper subcurve U carries at least the genus of U normalized along S."""
    S = frozenset(S)
    d = Divisor(d)
    if d.degree + len(S) != G.genus:
        raise ValueError(f"deg(d) + |S| = {d.degree + len(S)} but the genus is {G.genus}")
    vec = d.vector(G)
    for m in subcurve_masks(G, force=True):
        budget = sum(x for i, x in enumerate(vec) if m >> i & 1)
        if normalized_genus(G, m, S) > budget:
            return False
    return True


def complement_graph(G: MetricGraph, S) -> MetricGraph:
    return G.subgraph(G.vertex_ids, drop=S)


def break_types(G: MetricGraph, force: bool = False) -> list[SheafType]:
    """All degree-g types (S, d) with d a break divisor on G - S, by the inequalities.

    The multidegree box comes from the singleton and co-singleton inequalities
    only, independently of any polarization.
    """
    g = G.genus
    list(subcurve_masks(G, force=force))
    out = []
    for r in range(G.n_edges + 1):
        for combo in itertools.combinations(G.edge_ids, r):
            S = frozenset(combo)
            total = g - len(S)
            lo = [normalized_genus(G, 1 << i, S) for i in range(G.n_vertices)]
            if G.n_vertices == 1:
                hi = [total]
            else:
                hi = [total - normalized_genus(G, G.full_mask ^ (1 << i), S) for i in range(G.n_vertices)]
            for vec in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi))):
                if sum(vec) != total:
                    continue
                d = Divisor.from_vector(G, vec)
                if is_break_divisor_ineq(G, S, d):
                    out.append(SheafType(S, d))
    out.sort(key=lambda T: T.sort_key(G))
    return out


class BreakDivisorMismatch(AssertionError):
    def __init__(self, message: str, offending=None):
        super().__init__(message)
        self.offending = offending


@dataclass(frozen=True)
class DegreeGReport:
    polystable: tuple
    break_types: tuple
    maximal_types: int
    spanning_trees: int
    matrix_tree: int
    tree_agreement: bool = True
    mismatches: tuple = field(default=())

    @property
    def passed(self) -> bool:
        return (
            not self.mismatches
            and self.tree_agreement
            and self.maximal_types == self.spanning_trees == self.matrix_tree
        )

    def to_json(self, G: MetricGraph) -> dict:
        return {
            "passed": self.passed,
            "polystable_count": len(self.polystable),
            "break_count": len(self.break_types),
            "maximal_types": self.maximal_types,
            "spanning_trees": self.spanning_trees,
            "matrix_tree": self.matrix_tree,
            "tree_agreement": self.tree_agreement,
            "mismatches": [T.to_json(G) for T in self.mismatches],
        }


def degree_g_equivalence(G: MetricGraph, H, *, strict: bool = True, force: bool = False) -> DegreeGReport:
    """Polystable degree-g types versus break types, plus the spanning-tree count.

    Maximal types are those whose cell is full dimensional, i.e. G - S is a
    spanning tree; they are counted from the type list alone.
    """
    H = as_polarization(G, H)
    g = G.genus
    poly = enumerate_types(G, H, g, "polystable", force=force)
    brk = break_types(G, force=force)
    mismatches = tuple(sorted(set(poly) ^ set(brk), key=lambda T: T.sort_key(G)))
    # cross-check the inequality form against the tree form on G - S
    tree_ok = True
    for T in brk:
        C = complement_graph(G, T.S)
        if C.is_connected() and not is_break_divisor_tree(C, T.d).is_break:
            tree_ok = False
    maximal = sum(1 for T in poly if len(T.S) == G.betti and complement_graph(G, T.S).is_connected())
    n_trees = sum(1 for _ in spanning_trees(G))
    report = DegreeGReport(tuple(poly), tuple(brk), maximal, n_trees, count_spanning_trees(G), tree_ok, mismatches)
    if strict and not report.passed:
        first = mismatches[0] if mismatches else None
        raise BreakDivisorMismatch(f"degree-g comparison failed: {report.to_json(G)}", first)
    return report


def tree_ineq_agreement(G: MetricGraph) -> list[Divisor]:
    """Degree-g divisors where the two break-divisor tests disagree (empty when consistent)."""
    bad = []
    S = frozenset()
    g = G.genus
    lo = [normalized_genus(G, 1 << i, S) for i in range(G.n_vertices)]
    hi = [g - (normalized_genus(G, G.full_mask ^ (1 << i), S) if G.n_vertices > 1 else 0) for i in range(G.n_vertices)]
    for vec in itertools.product(*(range(a - 1, b + 2) for a, b in zip(lo, hi))):
        if sum(vec) != g:
            continue
        d = Divisor.from_vector(G, vec)
        if is_break_divisor_tree(G, d).is_break != is_break_divisor_ineq(G, S, d):
            bad.append(d)
    return bad
