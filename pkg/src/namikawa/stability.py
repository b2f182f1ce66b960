"""Slope stability of rank-1 torsion-free sheaf types on nodal curves.

A type ``(S, d)`` is a set ``S`` of nodes (edges of the dual graph) where the
sheaf fails to be locally free, together with a multidegree ``d`` on the
vertices.  Its total degree is ``deg(d) + |S|``.

Every predicate reduces to the basic inequality evaluated on each proper
subcurve ``W``::

    sum_{v in W} d_v  <=  g(W normalized along S) - 1
                          + (H(W) / deg H) * (deg + 1 - g)
                          + #(non-S edges leaving W)

Semistable means every inequality holds, stable means all are strict.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import floor, lcm
from typing import Iterable, Iterator, Mapping, Sequence

from .graph import (
    CapExceeded,
    Divisor,
    GraphError,
    MetricGraph,
    boundary_counts,
    boundary_edges,
    normalized_genus,
    subcurve_masks,
)

MAX_TYPES = 10**6
MODES = ("semistable", "stable", "polystable", "quasistable")


class StabilityError(ValueError):
    pass


@dataclass(frozen=True)
class SheafType:
    S: frozenset
    d: Divisor

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(self.S))
        if not isinstance(self.d, Divisor):
            object.__setattr__(self, "d", Divisor(self.d))

    @property
    def degree(self) -> int:
        return self.d.degree + len(self.S)

    def sort_key(self, G: MetricGraph) -> tuple:
        return (len(self.S), tuple(sorted(G.eindex[e] for e in self.S)), self.d.vector(G))

    def validate(self, G: MetricGraph) -> "SheafType":
        unknown = self.S - set(G.edge_ids)
        if unknown:
            raise GraphError(f"unknown edges in S: {sorted(unknown)}")
        bad = set(self.d) - set(G.vertex_ids)
        if bad:
            raise GraphError(f"unknown vertices in d: {sorted(bad)}")
        return self

    def to_json(self, G: MetricGraph | None = None) -> dict:
        if G is None:
            return {"S": sorted(self.S), "d": self.d.to_dict()}
        return {"S": [e for e in G.edge_ids if e in self.S], "d": self.d.to_dict(G)}

    @classmethod
    def from_json(cls, obj: Mapping) -> "SheafType":
        return cls(frozenset(obj.get("S", ())), Divisor({k: int(v) for k, v in obj.get("d", {}).items()}))

    def __repr__(self):
        return f"SheafType(S={sorted(self.S)}, d={self.d.to_dict()})"


@dataclass(frozen=True)
class Polarization:
    multidegree: Divisor

    def __post_init__(self):
        if not isinstance(self.multidegree, Divisor):
            object.__setattr__(self, "multidegree", Divisor(self.multidegree))

    @property
    def degree(self) -> int:
        return self.multidegree.degree

    def on(self, W: Iterable[str]) -> int:
        return self.multidegree.total(W)

    def validate(self, G: MetricGraph) -> "Polarization":
        bad = set(self.multidegree) - set(G.vertex_ids)
        if bad:
            raise GraphError(f"polarization names unknown vertices {sorted(bad)}")
        for v in G.vertex_ids:
            if self.multidegree[v] < 1:
                raise StabilityError(f"polarization must be positive at every vertex (got {self.multidegree[v]} at {v!r})")
        return self

    def restrict(self, W: Iterable[str]) -> "Polarization":
        return Polarization(self.multidegree.restrict(W))


def as_polarization(G: MetricGraph, H) -> Polarization:
    if not isinstance(H, Polarization):
        H = Polarization(Divisor(H))
    return H.validate(G)


def as_type(T) -> SheafType:
    if isinstance(T, SheafType):
        return T
    S, d = T
    return SheafType(frozenset(S), Divisor(d))


@dataclass(frozen=True)
class StabilityReport:
    semistable: bool
    stable: bool
    polystable: bool
    quasistable_for: frozenset
    equality_subcurves: tuple = ()

    def to_json(self, G: MetricGraph) -> dict:
        return {
            "semistable": self.semistable,
            "stable": self.stable,
            "polystable": self.polystable,
            "quasistable_for": [v for v in G.vertex_ids if v in self.quasistable_for],
            "equality_subcurves": [[v for v in G.vertex_ids if v in W] for W in self.equality_subcurves],
        }


# ---------------------------------------------------------------------------
# basic quantities


def slope(G: MetricGraph, H, T) -> Fraction:
    H = as_polarization(G, H)
    T = as_type(T)
    return Fraction(T.degree + 1 - G.genus, H.degree)


def subsheaf_degree(G: MetricGraph, T, W) -> int:
    T = as_type(T)
    bc = boundary_counts(G, W, T.S)
    Wm = _mask(G, W)
    return sum(T.d[v] for v in G.unmask(Wm)) + bc.S_internal - bc.not_in_S


def basic_rhs(G: MetricGraph, H, T, W) -> Fraction:
    H = as_polarization(G, H)
    T = as_type(T)
    Wm = _mask(G, W)
    bc = boundary_counts(G, Wm, T.S)
    ratio = Fraction(H.on(G.unmask(Wm)), H.degree)
    return normalized_genus(G, Wm, T.S) - 1 + ratio * (T.degree + 1 - G.genus) + bc.not_in_S


def _mask(G: MetricGraph, W) -> int:
    if isinstance(W, int):
        return W
    if isinstance(W, str):
        W = [W]
    return G.mask(W)


@lru_cache(maxsize=8192)
def _non_s_boundary(G: MetricGraph, S: frozenset) -> tuple[int, ...]:
    """Number of non-S edges leaving each vertex mask (index = mask)."""
    out = [0] * (G.full_mask + 1)
    masks = [(a, b) for e, (a, b) in zip(G.edges, G._edge_masks) if e.id not in S and a != b]
    for m in range(G.full_mask + 1):
        out[m] = sum(1 for a, b in masks if bool(a & m) != bool(b & m))
    return tuple(out)


def _subset_sums(values: Sequence, full: int, zero=0) -> list:
    """Sums of ``values`` over every vertex mask up to ``full``."""
    sums = [zero] * (full + 1)
    for m in range(1, full + 1):
        low = m & -m
        sums[m] = sums[m ^ low] + values[low.bit_length() - 1]
    return sums


def _rhs_table(G: MetricGraph, H: Polarization, S: frozenset, degree: int) -> tuple:
    return _rhs_table_cached(G, H, S, degree)


@lru_cache(maxsize=4096)
def _rhs_table_cached(G, H, S, degree):
    out = []
    for m in subcurve_masks(G, force=True):
        bc = boundary_counts(G, m, S)
        ratio = Fraction(H.on(G.unmask(m)), H.degree)
        out.append((m, normalized_genus(G, m, S) - 1 + ratio * (degree + 1 - G.genus) + bc.not_in_S))
    return tuple(out)


def _scan(G, H, T) -> tuple[bool, list[int]]:
    """(semistable, equality masks) for a validated type."""
    table = _rhs_table(G, H, T.S, T.degree)
    sums = _subset_sums(T.d.vector(G), G.full_mask)
    ok = True
    eq = []
    for m, rhs in table:
        lhs = sums[m]
        if lhs > rhs:
            ok = False
        elif lhs == rhs:
            eq.append(m)
    return ok, eq


def _component_stable(G: MetricGraph, H: Polarization, T: SheafType) -> bool:
    for C in G.components(T.S):
        if len(C) == 1:
            continue
        sub = G.subgraph(C, drop=T.S)
        ok, eq = _scan(sub, H.restrict(C), SheafType(frozenset(), T.d.restrict(C)))
        if not ok or eq:
            return False
    return True


def classify(G: MetricGraph, H, T) -> StabilityReport:
    H = as_polarization(G, H)
    T = as_type(T).validate(G)
    semistable, eq = _scan(G, H, T)
    eq_sets = tuple(G.unmask(m) for m in eq)
    stable = semistable and not eq
    polystable = semistable and (stable or _component_stable(G, H, T))
    if semistable:
        touched = 0
        for m in eq:
            touched |= m
        qs = frozenset(v for i, v in enumerate(G.vertex_ids) if not touched >> i & 1)
    else:
        qs = frozenset()
    return StabilityReport(semistable, stable, polystable, qs, eq_sets)


def is_semistable(G, H, T) -> bool:
    return classify(G, H, T).semistable


def is_stable(G, H, T) -> bool:
    return classify(G, H, T).stable


def is_polystable(G, H, T) -> bool:
    return classify(G, H, T).polystable


def is_quasistable(G, H, T, v: str) -> bool:
    if v not in G.vindex:
        raise GraphError(f"unknown vertex {v!r}")
    return v in classify(G, H, T).quasistable_for


def equality_subcurves(G, H, T) -> list[frozenset]:
    return list(classify(G, H, T).equality_subcurves)


# ---------------------------------------------------------------------------
# Jordan-Holder grading


def _peel_candidates(G: MetricGraph, T: SheafType, eq_masks: list[int]) -> list[int]:
    """Inclusion-minimal equality masks whose boundary is not inside S."""
    admissible = [m for m in eq_masks if any(e.id not in T.S for e in boundary_edges(G, m))]
    minimal = [m for m in admissible if not any(o != m and o & m == o for o in admissible)]
    return sorted(minimal, key=lambda m: sorted(G.unmask(m), key=G.vindex.get))


def grade_step(G: MetricGraph, T: SheafType, W_mask: int) -> SheafType:
    """Split off the subsheaf supported on W: every non-S boundary edge joins S
    and its endpoint inside W loses one unit of degree."""
    d = dict(T.d.items())
    S = set(T.S)
    for e in boundary_edges(G, W_mask):
        if e.id in S:
            continue
        inner = e.tail if W_mask >> G.vindex[e.tail] & 1 else e.head
        d[inner] = d.get(inner, 0) - 1
        S.add(e.id)
    return SheafType(frozenset(S), Divisor(d))


def grade(G: MetricGraph, H, T, rng: random.Random | None = None) -> SheafType:
    """Type of the associated graded (polystable) sheaf of a semistable type.

    With ``rng`` the peeled subcurve is drawn at random among the admissible
    minimal ones instead of taking the lexicographically first.
    """
    H = as_polarization(G, H)
    T = as_type(T).validate(G)
    ok, eq = _scan(G, H, T)
    if not ok:
        raise StabilityError(f"{T} is not semistable")
    while not classify(G, H, T).polystable:
        cands = _peel_candidates(G, T, eq)
        if not cands:
            raise StabilityError(f"no admissible equality subcurve for {T}")
        m = rng.choice(cands) if rng is not None else cands[0]
        T = grade_step(G, T, m)
        ok, eq = _scan(G, H, T)
        if not ok:
            raise StabilityError(f"peeling produced a non-semistable type {T}")
    return T


# ---------------------------------------------------------------------------
# enumeration


def _mode_check(G, H, T, mode: str, v: str | None) -> bool:
    rep = classify(G, H, T)
    if mode == "semistable":
        return rep.semistable
    if mode == "stable":
        return rep.stable
    if mode == "polystable":
        return rep.polystable
    if mode == "quasistable":
        return v in rep.quasistable_for
    raise ValueError(f"unknown mode {mode!r}")


def _bounded_vectors(lo: list[int], hi: list[int], total: int) -> Iterator[tuple[int, ...]]:
    n = len(lo)
    suffix_lo = [0] * (n + 1)
    suffix_hi = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_lo[i] = suffix_lo[i + 1] + lo[i]
        suffix_hi[i] = suffix_hi[i + 1] + hi[i]

    def rec(i, remaining, prefix):
        if i == n:
            if remaining == 0:
                yield tuple(prefix)
            return
        a = max(lo[i], remaining - suffix_hi[i + 1])
        b = min(hi[i], remaining - suffix_lo[i + 1])
        for x in range(a, b + 1):
            prefix.append(x)
            yield from rec(i + 1, remaining - x, prefix)
            prefix.pop()

    yield from rec(0, total, [])


def multidegree_box(G: MetricGraph, H: Polarization, S: frozenset, degree: int) -> tuple[list[int], list[int]]:
    """Per-vertex bounds implied by the singleton and co-singleton inequalities."""
    n = G.n_vertices
    total = degree - len(S)
    if n == 1:
        return [total], [total]
    table = dict(_rhs_table(G, H, S, degree))
    lo, hi = [], []
    for i in range(n):
        single = 1 << i
        co = G.full_mask ^ single
        hi.append(floor(table[single]))
        lo.append(total - floor(table[co]))
    return lo, hi


def _edge_subsets(G: MetricGraph) -> Iterator[frozenset]:
    ids = G.edge_ids
    for r in range(len(ids) + 1):
        for combo in itertools.combinations(ids, r):
            yield frozenset(combo)


def enumerate_types(
    G: MetricGraph,
    H,
    degree: int,
    mode: str = "semistable",
    v: str | None = None,
    *,
    force: bool = False,
    max_types: int = MAX_TYPES,
) -> list[SheafType]:
    """All types of the given total degree satisfying the mode predicate, canonically ordered."""
    H = as_polarization(G, H)
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "quasistable" and v not in G.vindex:
        raise GraphError(f"quasistable mode needs a vertex of the graph, got {v!r}")
    list(subcurve_masks(G, force=force))
    out = []
    scanned = 0
    for S in _edge_subsets(G):
        lo, hi = multidegree_box(G, H, S, degree)
        for vec in _bounded_vectors(lo, hi, degree - len(S)):
            scanned += 1
            if scanned > max_types and not force:
                raise CapExceeded(f"type enumeration exceeds {max_types} candidates")
            T = SheafType(S, Divisor.from_vector(G, vec))
            if _mode_check(G, H, T, mode, v):
                out.append(T)
    out.sort(key=lambda T: T.sort_key(G))
    return out


def candidate_types(G: MetricGraph, H, degree: int, margin: int = 1) -> Iterator[SheafType]:
    """Types in the enumeration box widened by ``margin``: a finite superset of
    the semistable ones that also contains unstable neighbours."""
    H = as_polarization(G, H)
    for S in _edge_subsets(G):
        lo, hi = multidegree_box(G, H, S, degree)
        lo = [x - margin for x in lo]
        hi = [x + margin for x in hi]
        for vec in _bounded_vectors(lo, hi, degree - len(S)):
            yield SheafType(S, Divisor.from_vector(G, vec))


def twist(T, v: str, k: int) -> SheafType:
    T = as_type(T)
    return SheafType(T.S, T.d + Divisor({v: k}))


# ---------------------------------------------------------------------------
# Oda-Seshadri parameters


@dataclass(frozen=True)
class OSParameter:
    q: tuple  # ((vertex, Fraction), ...) in graph order
    epsilon: Fraction | None = None

    def __getitem__(self, v: str) -> Fraction:
        return dict(self.q)[v]

    def as_dict(self) -> dict[str, Fraction]:
        return dict(self.q)

    @property
    def total(self) -> Fraction:
        return sum((x for _, x in self.q), Fraction(0))

    def to_json(self) -> dict:
        out = {"q": {v: str(x) for v, x in self.q}}
        if self.epsilon is not None:
            out["epsilon"] = str(self.epsilon)
        return out


def _non_s_incidences(G: MetricGraph, v: str, S: frozenset) -> int:
    return sum(1 for e in G.edges if not e.is_loop and e.id not in S and v in (e.tail, e.head))


def _local_genus(G: MetricGraph, v: str, S: frozenset) -> int:
    """Arithmetic genus of the component X_v after normalizing the nodes of S."""
    loops = sum(1 for e in G.edges if e.is_loop and e.tail == v and e.id not in S)
    return G.weights[v] + loops


def os_parameter(G: MetricGraph, H, degree: int, basepoint: str, T) -> OSParameter:
    H = as_polarization(G, H)
    T = as_type(T)
    if basepoint not in G.vindex:
        raise GraphError(f"unknown basepoint {basepoint!r}")
    return _os_parameter(G, H, degree, basepoint, T.S)


@lru_cache(maxsize=8192)
def _os_parameter(G: MetricGraph, H: Polarization, degree: int, basepoint: str, S: frozenset) -> OSParameter:
    g = G.genus
    q = []
    for v in G.vertex_ids:
        val = (
            _local_genus(G, v, S)
            - 1
            + Fraction(H.multidegree[v], H.degree) * (degree + 1 - g)
            + Fraction(_non_s_incidences(G, v, S), 2)
        )
        if v == basepoint:
            val -= degree
        q.append((v, val))
    return OSParameter(tuple(q))


def _os_slacks(G: MetricGraph, q: OSParameter, T: SheafType) -> list[Fraction]:
    """RHS minus LHS of the Oda-Seshadri inequality on every proper subcurve."""
    scaled, den = _os_slacks_scaled(G, q, T)
    return [Fraction(x, den) for x in scaled]


def _os_slacks_scaled(G: MetricGraph, q: OSParameter, T: SheafType) -> tuple[list[int], int]:
    qd = q.as_dict()
    den = 2
    for x in qd.values():
        den = lcm(den, x.denominator)
    qv = [int(qd[v] * den) for v in G.vertex_ids]
    dv = T.d.vector(G)
    full = G.full_mask
    qs = _subset_sums(qv, full)
    ds = _subset_sums(dv, full)
    bd = _non_s_boundary(G, T.S)
    half = den // 2
    return [qs[m] + bd[m] * half - ds[m] * den for m in range(1, full)], den


def _check_degree_zero(T: SheafType):
    if T.degree != 0:
        raise StabilityError(f"Oda-Seshadri stability is defined for degree 0 types, got degree {T.degree}")


def os_is_semistable(G: MetricGraph, q: OSParameter, T) -> bool:
    T = as_type(T)
    _check_degree_zero(T)
    return all(s >= 0 for s in _os_slacks_scaled(G, q, T)[0])


def os_is_stable(G: MetricGraph, q: OSParameter, T) -> bool:
    T = as_type(T)
    _check_degree_zero(T)
    return all(s > 0 for s in _os_slacks_scaled(G, q, T)[0])


def _slack_gap(G: MetricGraph, H: Polarization, degree: int) -> Fraction | None:
    """Smallest distance from 0 of a nonzero slack value on any subcurve.

    Slacks on W all lie in one coset of the integers determined by W alone,
    so a shift smaller than this can never flip the sign of a nonzero slack.
    """
    best = None
    for m in subcurve_masks(G, force=True):
        c = Fraction(H.on(G.unmask(m)) * (degree + 1 - G.genus), H.degree)
        c -= floor(c)
        if c != 0:
            gap = min(c, 1 - c)
            best = gap if best is None else min(best, gap)
    return best


@lru_cache(maxsize=256)
def _epsilon_cached(G: MetricGraph, H: Polarization, degree: int) -> Fraction:
    v0 = G.vertex_ids[0]
    best = None
    for T in enumerate_types(G, H, degree, "semistable"):
        q = os_parameter(G, H, degree, v0, T)
        for s in _os_slacks(G, q, twist(T, v0, -degree)):
            if s > 0 and (best is None or s < best):
                best = s
    eps = Fraction(1, 2)
    if best is not None:
        eps = min(eps, best / 2)
    gap = _slack_gap(G, H, degree)
    if gap is not None:
        eps = min(eps, gap / 2)
    return eps


def epsilon_for_quasistability(G: MetricGraph, H, degree: int, v: str | None = None) -> Fraction:
    """Deterministic perturbation size for the quasistable Oda-Seshadri parameter."""
    H = as_polarization(G, H)
    if v is not None and v not in G.vindex:
        raise GraphError(f"unknown vertex {v!r}")
    return _epsilon_cached(G, H, degree)


@lru_cache(maxsize=256)
def _all_quasistable_stable(G: MetricGraph, H: Polarization, degree: int, v: str) -> bool:
    return all(classify(G, H, T).stable for T in enumerate_types(G, H, degree, "quasistable", v))


def os_parameter_v(
    G: MetricGraph, H, degree: int, basepoint: str, v: str, T, eps: Fraction | None = None
) -> OSParameter:
    """Oda-Seshadri parameter whose stable types are the v-quasistable ones."""
    H = as_polarization(G, H)
    base = os_parameter(G, H, degree, basepoint, T)
    if v not in G.vindex:
        raise GraphError(f"unknown vertex {v!r}")
    if G.n_vertices == 1 or (eps is None and _all_quasistable_stable(G, H, degree, v)):
        return base
    if eps is None:
        eps = epsilon_for_quasistability(G, H, degree, v)
    if not 0 < eps < 1:
        raise StabilityError("epsilon must lie in (0, 1)")
    share = eps / (G.n_vertices - 1)
    q = tuple((w, x - eps if w == v else x + share) for w, x in base.q)
    return OSParameter(q, eps)
