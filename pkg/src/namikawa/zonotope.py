"""Exact rational zonotopes: base point plus a Minkowski sum of segments.

Parallel generators are merged up front, so a zonotope may have fewer
generators than it was built with and may be lower dimensional than the
ambient space.  Relative-interior tests work inside the affine hull.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from . import _linalg as la


def _sign_normalized(u: tuple[int, ...]) -> tuple[int, ...]:
    for x in u:
        if x != 0:
            return u if x > 0 else tuple(-y for y in u)
    return u


class Zonotope:
    """``base + sum_i [0, g_i]`` with exact rational data.

    After construction ``vertex`` is the lexicographically lowest vertex and
    ``generators`` are pairwise non-parallel with sign-normalized directions,
    which makes ``(vertex, generators)`` a canonical description of the set.
    """

    def __init__(self, base: Sequence, generators: Sequence[Sequence] = ()):
        base = la.frac_vector(base)
        self.ambient = len(base)
        merged: dict[tuple[int, ...], list[Fraction]] = {}
        order: list[tuple[int, ...]] = []
        for g in generators:
            g = la.frac_vector(g)
            if all(x == 0 for x in g):
                continue
            u = _sign_normalized(la.primitive(g))
            k = next(i for i, x in enumerate(u) if x != 0)
            c = g[k] / u[k]
            if u not in merged:
                merged[u] = [Fraction(0), Fraction(0)]
                order.append(u)
            lo_hi = merged[u]
            lo_hi[0] += min(c, 0)
            lo_hi[1] += max(c, 0)
        vertex = base
        gens = []
        for u in sorted(order):
            lo, hi = merged[u]
            vertex = la.vadd(vertex, la.vscale(lo, u))
            gens.append(la.vscale(hi - lo, u))
        self.vertex: tuple[Fraction, ...] = vertex
        self.generators: tuple[tuple[Fraction, ...], ...] = tuple(gens)

    # -- structure ------------------------------------------------------------

    @cached_property
    def _basis(self):
        """Independent generator indices, pivot rows and the inverse of the
        square submatrix they span (used to read off span coordinates)."""
        idx = la.independent_subset(self.generators)
        if not idx:
            return idx, [], []
        cols = [self.generators[i] for i in idx]
        rows = la.independent_subset(la.transpose(cols))
        sub = [[cols[j][r] for j in range(len(cols))] for r in rows]
        return idx, rows, la.inverse(sub)

    @property
    def dim(self) -> int:
        return len(self._basis[0])

    def span_coords(self, x: Sequence) -> tuple[Fraction, ...] | None:
        """Coordinates of ``x`` in the generator basis, or None off the span."""
        idx, rows, inv = self._basis
        if not idx:
            return () if all(v == 0 for v in x) else None
        coeffs = la.matvec(inv, [x[r] for r in rows])
        recon = [Fraction(0)] * self.ambient
        for c, i in zip(coeffs, idx):
            recon = la.vadd(recon, la.vscale(c, self.generators[i]))
        if tuple(recon) != tuple(Fraction(v) for v in x):
            return None
        return coeffs

    @cached_property
    def _gen_coords(self):
        return [self.span_coords(g) for g in self.generators]

    @cached_property
    def _facets(self) -> list[tuple[tuple[Fraction, ...], Fraction, Fraction]]:
        """Facet functionals in span coordinates with their (lo, hi) range."""
        r = self.dim
        if r == 0:
            return []
        gc = self._gen_coords
        normals = []
        seen = set()
        for combo in itertools.combinations(range(len(gc)), r - 1):
            c = la.cofactor_normal([gc[i] for i in combo])
            if all(x == 0 for x in c):
                continue
            key = _sign_normalized(la.primitive(c))
            if key in seen:
                continue
            seen.add(key)
            c = la.frac_vector(key)
            vals = [la.dot(c, g) for g in gc]
            lo = sum((min(v, 0) for v in vals), Fraction(0))
            hi = sum((max(v, 0) for v in vals), Fraction(0))
            normals.append((c, lo, hi))
        return normals

    # -- membership -----------------------------------------------------------

    def _local(self, y: Sequence) -> tuple[Fraction, ...] | None:
        return self.span_coords(la.vsub(y, self.vertex))

    def contains_relint(self, y: Sequence) -> bool:
        z = self._local(y)
        if z is None:
            return False
        return all(lo < la.dot(c, z) < hi for c, lo, hi in self._facets)

    def contains(self, y: Sequence) -> bool:
        z = self._local(y)
        if z is None:
            return False
        return all(lo <= la.dot(c, z) <= hi for c, lo, hi in self._facets)

    # -- derived objects -------------------------------------------------------

    def corners(self) -> list[tuple[Fraction, ...]]:
        """All subset sums of generators; a superset of the vertices."""
        out = set()
        for mask in itertools.product((0, 1), repeat=len(self.generators)):
            p = self.vertex
            for bit, g in zip(mask, self.generators):
                if bit:
                    p = la.vadd(p, g)
            out.add(p)
        return sorted(out)

    def center(self) -> tuple[Fraction, ...]:
        p = self.vertex
        for g in self.generators:
            p = la.vadd(p, la.vscale(Fraction(1, 2), g))
        return p

    def volume(self) -> Fraction:
        """Euclidean volume in the ambient space (zero unless full dimensional)."""
        n = self.ambient
        if self.dim < n:
            return Fraction(0)
        return sum((abs(la.det(list(c))) for c in itertools.combinations(self.generators, n)), Fraction(0))

    def facets(self) -> list["Zonotope"]:
        out = []
        gc = self._gen_coords
        for c, _, _ in self._facets:
            vals = [la.dot(c, g) for g in gc]
            flat = [g for g, v in zip(self.generators, vals) if v == 0]
            for sign in (1, -1):
                shift = self.vertex
                for g, v in zip(self.generators, vals):
                    if sign * v > 0:
                        shift = la.vadd(shift, g)
                out.append(Zonotope(shift, flat))
        return out

    def faces(self) -> list["Zonotope"]:
        """All proper nonempty faces, each once."""
        seen = {}
        stack = self.facets()
        while stack:
            f = stack.pop()
            if f.key in seen:
                continue
            seen[f.key] = f
            stack.extend(f.facets())
        return sorted(seen.values(), key=lambda z: (-z.dim, z.key))

    @property
    def key(self) -> tuple:
        return (self.vertex, self.generators)

    def translate(self, v: Sequence) -> "Zonotope":
        return Zonotope(la.vadd(self.vertex, v), self.generators)

    def __eq__(self, other):
        return isinstance(other, Zonotope) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Zonotope(vertex={self.vertex}, generators={self.generators})"
