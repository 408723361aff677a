"""Deterministic SVG sheets: one row per shape, one cell per open part.

Each cell draws the whole shape faintly and the open part on top.  Rational
coordinates are decimalized with a fixed precision for display only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .shapes import U0, Shape, ShapeError, part_of
from .topology import Topology, reduced_basis

PRECISION = 3


def fmt(q) -> str:
    """Fixed-precision decimal text with trailing zeros stripped."""
    q = Fraction(q)
    scale = 10 ** PRECISION
    n = q * scale
    r = (n.numerator * 2 + n.denominator) // (2 * n.denominator)   # round half up
    sign = "-" if r < 0 else ""
    r = abs(r)
    whole, frac = divmod(r, scale)
    text = f"{sign}{whole}.{frac:0{PRECISION}d}".rstrip("0").rstrip(".")
    return "0" if text in ("-0", "") else text


@dataclass(frozen=True)
class RenderRow:
    label: str
    shape: Shape
    opens: tuple                 # parts of the shape, drawn left to right
    marks: tuple = ()            # indices of opens to highlight, e.g. basis elements
    links: tuple = ()            # ((x0, y0), (x1, y1)) annotation lines, never computed with


@dataclass
class RenderSheet:
    rows: list = field(default_factory=list)
    cell: int = 120              # cell size in pixels
    margin: int = 12
    stroke: float = 2.0
    title: str = ""

    def add(self, label: str, topology: Topology, marks_basis: bool = True, links=()) -> None:
        opens = tuple(u for u in topology.opens if u)
        basis = set(reduced_basis(topology).elements) if marks_basis else set()
        marks = tuple(i for i, u in enumerate(opens) if u in basis)
        self.rows.append(RenderRow(label, topology.universe, opens, marks, tuple(links)))

    def validate(self) -> None:
        for row in self.rows:
            for u in row.opens:
                if not part_of(u, row.shape):
                    raise ShapeError(f"row {row.label}: rendered part is not a part of its shape")


def _bounds(shape: Shape, links=()):
    pts = []
    if shape.kind == U0:
        pts = [p.pos for p in shape.elements]
    else:
        for seg in shape.elements:
            pts.extend((seg.p0, seg.p1))
    for a, b in links:
        pts.extend((a, b))
    if not pts:
        return Fraction(0), Fraction(0), Fraction(1), Fraction(1)
    xs = [Fraction(p[0]) for p in pts]
    ys = [Fraction(p[1]) for p in pts]
    return min(xs), min(ys), max(xs), max(ys)


def _draw(shape: Shape, to_px, color: str, width: float, radius: float) -> list:
    out = []
    if shape.kind == U0:
        for p in shape.elements:
            x, y = to_px(p.pos)
            out.append(f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="{fmt(radius)}" fill="{color}"/>')
    else:
        for seg in shape.elements:
            x0, y0 = to_px(seg.p0)
            x1, y1 = to_px(seg.p1)
            out.append(
                f'<line x1="{fmt(x0)}" y1="{fmt(y0)}" x2="{fmt(x1)}" y2="{fmt(y1)}" '
                f'stroke="{color}" stroke-width="{fmt(width)}" stroke-linecap="round"/>'
            )
    return out


def render_svg(sheet: RenderSheet) -> str:
    sheet.validate()
    cell, margin = sheet.cell, sheet.margin
    label_w = 60
    head = 24 if sheet.title else 0
    ncols = max((1 + len(r.opens) for r in sheet.rows), default=1)
    width = label_w + ncols * cell
    height = head + max(len(sheet.rows), 1) * cell
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if sheet.title:
        out.append(f'<text x="4" y="16" font-family="monospace" font-size="12">{escape(sheet.title)}</text>')
    for ri, row in enumerate(sheet.rows):
        x0, y0, x1, y1 = _bounds(row.shape, row.links)
        span = max(x1 - x0, y1 - y0, Fraction(1))
        scale = Fraction(cell - 2 * margin) / span
        top = head + ri * cell
        out.append(
            f'<text x="4" y="{top + cell // 2}" font-family="monospace" font-size="12">'
            f'{escape(row.label)}</text>'
        )
        cells = [(row.shape, False)] + [(u, i in row.marks) for i, u in enumerate(row.opens)]
        for ci, (part, marked) in enumerate(cells):
            left = label_w + ci * cell

            def to_px(p, left=left, top=top):
                # y axis flipped so shapes read the usual way up
                return (left + margin + (Fraction(p[0]) - x0) * scale,
                        top + cell - margin - (Fraction(p[1]) - y0) * scale)

            out.append(f'<g id="r{ri}c{ci}">')
            frame = "#555" if marked else "#ccc"
            out.append(
                f'<rect x="{left + 2}" y="{top + 2}" width="{cell - 4}" height="{cell - 4}" '
                f'fill="none" stroke="{frame}"/>'
            )
            for a, b in row.links:
                (ax, ay), (bx, by) = to_px(a), to_px(b)
                out.append(
                    f'<line x1="{fmt(ax)}" y1="{fmt(ay)}" x2="{fmt(bx)}" y2="{fmt(by)}" '
                    f'stroke="#ddd" stroke-width="1"/>'
                )
            if ci > 0:
                out.extend(_draw(row.shape, to_px, "#ddd", sheet.stroke, 2.5))
            out.extend(_draw(part, to_px, "black", sheet.stroke, 3))
            out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def sheet_for_topologies(topologies: Sequence[Topology], labels: Optional[Sequence[str]] = None,
                         title: str = "", links=()) -> RenderSheet:
    sheet = RenderSheet(title=title)
    for i, t in enumerate(topologies):
        sheet.add(labels[i] if labels else f"S{i + 1}", t, links=links)
    return sheet
