"""The full invariant suite for one problem, as run by ``namikawa verify``.

Every check is exact.  Randomized checks draw from a ``random.Random``
seeded by the caller, so a run is reproducible bit for bit.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable

from .breakdiv import degree_g_equivalence, tree_ineq_agreement
from .generators import random_divisor, random_polarization
from .graph import CapExceeded, MetricGraph, arithmetic_genus, boundary_counts, boundary_edges, spanning_trees
from .jacobian import (
    DecompositionError,
    abel_jacobi,
    locate,
    namikawa_decomposition,
    refinement_map,
    same_cells,
)
from .reduction import is_equivalent
from .stability import (
    Polarization,
    candidate_types,
    classify,
    enumerate_types,
    epsilon_for_quasistability,
    grade,
    os_is_semistable,
    os_is_stable,
    os_parameter,
    os_parameter_v,
    twist,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0
    info: bool = False  # informational: never fails the run

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "seconds": round(self.seconds, 3), "detail": self.detail}
        if self.info:
            out["info"] = True
        return out


@dataclass
class VerifyReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.info)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed and not c.info]

    def to_json(self, timings: bool = False) -> dict:
        rows = []
        for c in self.checks:
            row = c.to_json()
            if not timings:
                row.pop("seconds")
            rows.append(row)
        return {"passed": self.passed, "checks": rows}


def _types_json(G: MetricGraph, types, limit: int = 5) -> list:
    return [T.to_json(G) for T in list(types)[:limit]]


# ---------------------------------------------------------------------------
# individual checks; each returns (passed, detail)


def check_genus_identity(G: MetricGraph) -> tuple[bool, dict]:
    total = arithmetic_genus(G)
    bad = []
    for m in range(1, G.full_mask):
        W = G.unmask(m)
        lhs = arithmetic_genus(G, W) + arithmetic_genus(G, G.full_mask ^ m) + boundary_counts(G, W).total - 1
        if lhs != total:
            bad.append(sorted(W))
    return not bad, {"subcurves": G.full_mask - 1, "violations": bad[:5]}


def check_implications(G: MetricGraph, H: Polarization, types) -> tuple[bool, dict]:
    bad = []
    V = frozenset(G.vertex_ids)
    for T in types:
        r = classify(G, H, T)
        ok = (
            (not r.stable or r.polystable)
            and (not r.polystable or r.semistable)
            and (not r.stable or r.quasistable_for == V)
            and (not r.quasistable_for or r.semistable)
        )
        if not ok:
            bad.append(T)
    return not bad, {"types": len(types), "violations": _types_json(G, bad)}


def check_equality_complements(G: MetricGraph, H: Polarization, types) -> tuple[bool, dict]:
    """Subcurves cut off only by S-edges split a semistable type at equality."""
    bad = []
    checked = 0
    for T in types:
        r = classify(G, H, T)
        if not r.semistable:
            continue
        eq = set(r.equality_subcurves)
        for m in range(1, G.full_mask):
            if all(e.id in T.S for e in boundary_edges(G, m)):
                checked += 1
                if G.unmask(m) not in eq or G.unmask(G.full_mask ^ m) not in eq:
                    bad.append(T)
                    break
    return not bad, {"split_subcurves": checked, "violations": _types_json(G, bad)}


def check_connected(G: MetricGraph, H: Polarization, types) -> tuple[bool, dict]:
    bad = []
    for T in types:
        r = classify(G, H, T)
        if (r.stable or r.quasistable_for) and len(G.components(T.S)) != 1:
            bad.append(T)
    return not bad, {"violations": _types_json(G, bad)}


def check_grade(G: MetricGraph, H: Polarization, types, rng: random.Random, seeds: int) -> tuple[bool, dict]:
    bad = []
    graded = 0
    for T in types:
        if not classify(G, H, T).semistable:
            continue
        graded += 1
        P = grade(G, H, T)
        ok = classify(G, H, P).polystable and grade(G, H, P) == P and P.degree == T.degree
        for _ in range(seeds):
            ok = ok and grade(G, H, T, rng=random.Random(rng.getrandbits(32))) == P
        if not ok:
            bad.append(T)
    return not bad, {"semistable_types": graded, "seeds": seeds, "violations": _types_json(G, bad)}


def check_polarization_independence(
    G: MetricGraph, H: Polarization, degree: int, rng: random.Random, count: int
) -> tuple[bool, dict]:
    """Semistable and stable sets in the given degree do not move with H."""
    ref = (set(enumerate_types(G, H, degree, "semistable")), set(enumerate_types(G, H, degree, "stable")))
    moved = []
    for _ in range(count):
        H2 = Polarization(random_polarization(rng, G))
        got = (set(enumerate_types(G, H2, degree, "semistable")), set(enumerate_types(G, H2, degree, "stable")))
        if got != ref:
            moved.append(H2.multidegree.to_dict(G))
    return not moved, {"degree": degree, "polarizations": count, "semistable": len(ref[0]), "differing": moved}


def check_degree_g_collapse(G: MetricGraph, H: Polarization) -> tuple[bool, dict]:
    g = G.genus
    sets = {mode: set(enumerate_types(G, H, g, mode)) for mode in ("semistable", "stable", "polystable")}
    for v in G.vertex_ids:
        sets[f"quasistable:{v}"] = set(enumerate_types(G, H, g, "quasistable", v))
    ref = sets["semistable"]
    differing = [k for k, s in sets.items() if s != ref]
    return not differing, {"types": len(ref), "differing": differing}


def check_os_translation(
    G: MetricGraph, H: Polarization, degree: int, basepoint: str, margin: int
) -> tuple[bool, dict]:
    """(Semi)stability against the polarization matches Oda-Seshadri (semi)stability
    of the twisted type, and v-quasistability matches the perturbed parameter."""
    bad = []
    checked = 0
    for T in candidate_types(G, H, degree, margin=margin):
        checked += 1
        r = classify(G, H, T)
        T0 = twist(T, basepoint, -degree)
        q = os_parameter(G, H, degree, basepoint, T)
        ok = r.semistable == os_is_semistable(G, q, T0) and r.stable == os_is_stable(G, q, T0)
        for v in G.vertex_ids:
            qv = os_parameter_v(G, H, degree, basepoint, v, T)
            ok = ok and (v in r.quasistable_for) == os_is_stable(G, qv, T0)
        if not ok:
            bad.append(T)
    return not bad, {"degree": degree, "types": checked, "offending": _types_json(G, bad)}


def check_epsilon_choice(G: MetricGraph, H: Polarization, degree: int, basepoint: str) -> tuple[bool, dict]:
    """Two valid perturbation sizes give the same stable types."""
    eps = epsilon_for_quasistability(G, H, degree)
    bad = []
    types = enumerate_types(G, H, degree, "semistable")
    if G.n_vertices > 1:
        for v in G.vertex_ids:
            for T in types:
                T0 = twist(T, basepoint, -degree)
                a = os_is_stable(G, os_parameter_v(G, H, degree, basepoint, v, T, eps), T0)
                b = os_is_stable(G, os_parameter_v(G, H, degree, basepoint, v, T, eps / 2), T0)
                if a != b:
                    bad.append(T)
    return not bad, {"epsilon": str(eps), "offending": _types_json(G, bad)}


def check_abel_jacobi(
    G: MetricGraph, L, basepoint: str, degree: int, rng: random.Random, count: int, trees: int = 5
) -> tuple[bool, dict]:
    alt = [t for _, t in zip(range(trees), spanning_trees(G))]
    bad = 0
    for _ in range(count):
        D = random_divisor(rng, G, degree)
        x = abel_jacobi(G, L, basepoint, D)
        for t in alt:
            y = abel_jacobi(G, L, basepoint, D, tree=t, rng=rng)
            if not L.in_lattice([a - b for a, b in zip(x, y)]):
                bad += 1
    return bad == 0, {"divisors": count, "trees": len(alt), "failures": bad}


def _decomp_detail(dec) -> dict:
    r = dec.report
    return {
        "cells": len(dec.cells),
        "maximal_cells": r.maximal_cells,
        "volume": str(r.volume_total),
        "gram_det": str(r.gram_det),
        "face_check": r.face_check,
        "missing_faces": len(r.missing_faces),
        "overlaps": len(r.overlaps),
        "cover_failures": len(r.cover_failures),
    }


def check_locate(dec, rng: random.Random, count: int) -> tuple[bool, dict]:
    G = dec.graph
    failures = []
    ambiguous = 0
    for _ in range(count):
        D = random_divisor(rng, G, dec.degree)
        try:
            loc = locate(dec, D)
        except DecompositionError as exc:
            failures.append(str(exc))
            continue
        if not is_equivalent(G, loc.witness, D, dec.basepoint):
            failures.append("witness not equivalent")
        if dec.mode == "qs" and not loc.unique_witness:
            ambiguous += 1
    ok = not failures and (dec.mode != "qs" or ambiguous == 0)
    return ok, {"mode": dec.mode, "divisors": count, "failures": failures[:5], "non_unique_qs_witnesses": ambiguous}


# ---------------------------------------------------------------------------
# driver


def run_verify(
    spec,
    *,
    seed: int = 0,
    grade_seeds: int = 10,
    polarizations: int = 5,
    divisors: int = 50,
    margin: int = 1,
    samples: int = 32,
    force: bool = False,
    progress: Callable[[CheckResult], None] | None = None,
) -> VerifyReport:
    """Run every invariant on ``spec`` (a :class:`namikawa.io.ProblemSpec`).

    Cap violations propagate as :class:`CapExceeded`; any other exception
    inside a check turns into a failed check carrying the message.
    """
    G, H, deg, bp = spec.graph, spec.H, spec.degree, spec.basepoint
    v = spec.section_vertex
    g = G.genus
    rng = random.Random(seed)
    checks: list[CheckResult] = []
    state: dict = {}

    def run(name, fn, info=False):
        t0 = time.perf_counter()
        try:
            ok, detail = fn()
        except CapExceeded:
            raise
        except Exception as exc:  # a crash is a failed invariant, not a crashed run
            ok, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
        res = CheckResult(name, bool(ok), detail, time.perf_counter() - t0, info)
        checks.append(res)
        if progress is not None:
            progress(res)

    types = list(candidate_types(G, H, deg, margin=margin))

    run("genus_identity", lambda: check_genus_identity(G))
    run("implication_chain", lambda: check_implications(G, H, types))
    run("equality_complements", lambda: check_equality_complements(G, H, types))
    run("stable_connected", lambda: check_connected(G, H, types))
    run("grade", lambda: check_grade(G, H, types, rng, grade_seeds))
    run("polarization_independence", lambda: check_polarization_independence(G, H, g - 1, rng, polarizations))
    run("degree_g_collapse", lambda: check_degree_g_collapse(G, H))
    run("os_translation", lambda: check_os_translation(G, H, deg, bp, margin + 1))
    run("epsilon_choice", lambda: check_epsilon_choice(G, H, deg, bp))

    def decompose(mode, degree, section=None):
        dec = namikawa_decomposition(G, H, degree, bp, mode, section, samples=samples, seed=seed, strict=False, force=force)
        return dec

    def ps():
        state["ps"] = decompose("ps", deg)
        return state["ps"].report.passed, _decomp_detail(state["ps"])

    def qs():
        state["qs"] = decompose("qs", deg, v)
        return state["qs"].report.passed, _decomp_detail(state["qs"])

    run("decomposition_ps", ps)
    run("decomposition_qs", qs)
    run(
        "abel_jacobi_paths",
        lambda: check_abel_jacobi(G, state["ps"].lattice, bp, deg, rng, divisors),
    )

    def refine():
        rep = refinement_map(state["qs"], state["ps"])
        state["refinement"] = rep
        return rep.volume_ok, {"qs_cells": len(rep.mapping)}

    run("refinement", refine)

    def grade_agreement():
        rep = state["refinement"]
        G_ = state["qs"].graph
        bad = [state["qs"].cells[i].label.to_json(G_) for i, _, _ in rep.mapping if i not in set(rep.grade_agreement)]
        return rep.agrees_with_grade, {"disagreements": bad[:5]}

    run("refinement_vs_grade", grade_agreement, info=True)

    def degree_g_decomps():
        ref = namikawa_decomposition(G, H, g, bp, "ps", validate="none", force=force)
        differing = []
        for w in G.vertex_ids:
            other = namikawa_decomposition(G, H, g, bp, "qs", w, validate="none", force=force)
            if not same_cells(ref, other):
                differing.append(w)
        return not differing, {"cells": len(ref.cells), "differing_sections": differing}

    run("degree_g_decompositions", degree_g_decomps)

    def breakdiv():
        rep = degree_g_equivalence(G, H, strict=False, force=force)
        disagree = tree_ineq_agreement(G)
        ref = set(rep.polystable)
        moved = []
        for _ in range(polarizations):
            H2 = random_polarization(rng, G)
            if set(enumerate_types(G, H2, g, "polystable")) != ref:
                moved.append(H2.to_dict(G))
        detail = rep.to_json(G)
        detail["tree_vs_inequalities"] = [d.to_dict(G) for d in disagree[:5]]
        detail["polarizations_differing"] = moved
        return rep.passed and not disagree and not moved, detail

    run("break_divisors", breakdiv)

    def twists():
        top = enumerate_types(G, H, g, "polystable")
        bad = []
        for w in G.vertex_ids:
            image = [twist(T, w, -1) for T in top]
            target = set(enumerate_types(G, H, g - 1, "quasistable", w))
            if len(set(image)) != len(image) or set(image) != target:
                bad.append(w)
        return not bad, {"types": len(top), "failing_vertices": bad}

    run("twist_bijection", twists)
    run("locate_ps", lambda: check_locate(state["ps"], rng, divisors))
    run("locate_qs", lambda: check_locate(state["qs"], rng, divisors))
    return VerifyReport(checks)

