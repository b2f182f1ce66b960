"""SVG pictures of decompositions in dimension 1 and 2.

The picture shows one fundamental domain of the period lattice (the segment
or parallelogram spanned by the Gram rows) with every cell translated into it
and clipped to its boundary.  Coordinates are drawn as-is, without the
Gram metric, so angles are affine rather than Euclidean.
"""

from __future__ import annotations

import math
from fractions import Fraction
from html import escape

from . import _linalg as la
from .jacobian import Cell, Decomposition

SIZE = 480
MARGIN = 40
PALETTE = ("#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd")


def _f(x) -> str:
    return f"{float(x):.3f}"


def _label(dec: Decomposition, cell: Cell) -> str:
    G = dec.graph
    S = ",".join(e for e in G.edge_ids if e in cell.label.S) or "∅"
    d = ",".join(str(cell.label.d[v]) for v in G.vertex_ids)
    return f"({S}; {d})"


def _shifts(dec: Decomposition, pts, closed: bool = True) -> list[tuple[Fraction, ...]]:
    """Lattice vectors moving the hull of ``pts`` onto the fundamental domain.

    Full-dimensional cells only need translates meeting the open domain.
    """
    L = dec.lattice
    coords = [L.to_lattice_coords(p) for p in pts]
    ranges = []
    for j in range(L.n):
        lo = min(c[j] for c in coords)
        hi = max(c[j] for c in coords)
        if closed:
            ranges.append(range(math.ceil(-hi), math.floor(1 - lo) + 1))
        else:
            ranges.append(range(math.floor(-hi) + 1, math.ceil(1 - lo)))
    out = []
    for a in _product(ranges):
        out.append(L.from_lattice_coords(a))
    return out


def _product(ranges):
    if not ranges:
        yield ()
        return
    for x in ranges[0]:
        for rest in _product(ranges[1:]):
            yield (x,) + rest


def _polygon(cell: Cell) -> list[tuple[Fraction, ...]]:
    """Boundary of a planar zonotope, counterclockwise."""
    Z = cell.zonotope
    start = Z.vertex
    gens = []
    for g in Z.generators:
        if g[1] < 0 or (g[1] == 0 and g[0] < 0):
            start = la.vadd(start, g)
            g = la.vscale(-1, g)
        gens.append(g)
    gens.sort(key=lambda g: math.atan2(float(g[1]), float(g[0])))
    pts = [start]
    for g in gens:
        pts.append(la.vadd(pts[-1], g))
    for g in gens[:-1]:
        pts.append(la.vsub(pts[-1], g))
    return pts


class _Canvas:
    def __init__(self, corners):
        xs = [float(p[0]) for p in corners]
        ys = [float(p[1]) if len(p) > 1 else 0.0 for p in corners]
        self.x0, self.y0 = min(xs), min(ys)
        span = max(max(xs) - self.x0, max(ys) - self.y0, 1e-9)
        self.s = (SIZE - 2 * MARGIN) / span
        self.h = (max(ys) - self.y0) * self.s + 2 * MARGIN

    def xy(self, p) -> tuple[str, str]:
        x = MARGIN + (float(p[0]) - self.x0) * self.s
        y = self.h - MARGIN - ((float(p[1]) if len(p) > 1 else 0.0) - self.y0) * self.s
        return _f(x), _f(y)


def _svg_1d(dec: Decomposition) -> tuple[list[str], _Canvas]:
    M = dec.lattice.gram[0][0]
    cv = _Canvas([(Fraction(0), Fraction(0)), (M, Fraction(0))])
    cv.h = 2 * MARGIN + 40
    y = _f(cv.h / 2)
    (x0, _), (x1, _) = cv.xy((0,)), cv.xy((M,))
    out = [
        '<clipPath id="domain">',
        f'  <rect x="{x0}" y="0" width="{_f(float(x1) - float(x0))}" height="{_f(cv.h)}"/>',
        "</clipPath>",
        f'<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#999" stroke-width="1"/>',
        '<g clip-path="url(#domain)">',
    ]
    k = 0
    for cell in dec.cells:
        Z = cell.zonotope
        if cell.dim == 1:
            (g,) = Z.generators
            color = PALETTE[k % len(PALETTE)]
            k += 1
            for lam in _shifts(dec, [Z.vertex, la.vadd(Z.vertex, g)], closed=False):
                a = cv.xy(la.vadd(Z.vertex, lam))
                b = cv.xy(la.vadd(la.vadd(Z.vertex, g), lam))
                out.append(f'  <line x1="{a[0]}" y1="{y}" x2="{b[0]}" y2="{y}" stroke="{color}" stroke-width="10"/>')
    for cell in dec.cells:
        if cell.dim == 0:
            for lam in _shifts(dec, [cell.zonotope.vertex]):
                a = cv.xy(la.vadd(cell.zonotope.vertex, lam))
                out.append(f'  <circle cx="{a[0]}" cy="{y}" r="4" fill="#000"/>')
    out.append("</g>")
    for cell in dec.cells:
        c = dec.lattice.reduce(cell.zonotope.center())
        a = cv.xy(c)
        dy = -14 if cell.dim == 1 else 22
        out.append(
            f'<text x="{a[0]}" y="{_f(float(y) + dy)}" font-size="10" text-anchor="middle">{escape(_label(dec, cell))}</text>'
        )
    return out, cv


def _svg_2d(dec: Decomposition) -> tuple[list[str], _Canvas]:
    r1, r2 = dec.lattice.gram
    corners = [(Fraction(0), Fraction(0)), r1, la.vadd(r1, r2), r2]
    cv = _Canvas(corners)
    poly = " ".join(",".join(cv.xy(p)) for p in corners)
    out = [
        '<clipPath id="domain">',
        f'  <polygon points="{poly}"/>',
        "</clipPath>",
        '<g clip-path="url(#domain)">',
    ]
    k = 0
    for cell in dec.cells:
        if cell.dim != 2:
            continue
        color = PALETTE[k % len(PALETTE)]
        k += 1
        boundary = _polygon(cell)
        for lam in _shifts(dec, boundary, closed=False):
            pts = " ".join(",".join(cv.xy(la.vadd(p, lam))) for p in boundary)
            out.append(f'  <polygon points="{pts}" fill="{color}" stroke="none"/>')
    for cell in dec.cells:
        Z = cell.zonotope
        if cell.dim == 1:
            (g,) = Z.generators
            ends = [Z.vertex, la.vadd(Z.vertex, g)]
            for lam in _shifts(dec, ends):
                a, b = (cv.xy(la.vadd(p, lam)) for p in ends)
                out.append(f'  <line x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}" stroke="#333" stroke-width="1.5"/>')
        elif cell.dim == 0:
            for lam in _shifts(dec, [Z.vertex]):
                a = cv.xy(la.vadd(Z.vertex, lam))
                out.append(f'  <circle cx="{a[0]}" cy="{a[1]}" r="3" fill="#000"/>')
    out.append("</g>")
    out.append(f'<polygon points="{poly}" fill="none" stroke="#999" stroke-dasharray="4 3"/>')
    for cell in dec.cells:
        if cell.dim != 2:
            continue
        a = cv.xy(dec.lattice.reduce(cell.zonotope.center()))
        out.append(f'<text x="{a[0]}" y="{a[1]}" font-size="10" text-anchor="middle">{escape(_label(dec, cell))}</text>')
    return out, cv


def render_svg(dec: Decomposition) -> str:
    """SVG document for a decomposition of a graph with first Betti number 1 or 2."""
    if dec.n == 1:
        body, cv = _svg_1d(dec)
    elif dec.n == 2:
        body, cv = _svg_2d(dec)
    else:
        raise ValueError(f"SVG export needs first Betti number 1 or 2, got {dec.n}")
    title = f"{dec.mode} decomposition, degree {dec.degree}, {len(dec.cells)} cells"
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{_f(cv.h)}" '
        f'viewBox="0 0 {SIZE} {_f(cv.h)}" font-family="sans-serif">',
        f"<title>{escape(title)}</title>",
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def write_svg(dec: Decomposition, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_svg(dec))
