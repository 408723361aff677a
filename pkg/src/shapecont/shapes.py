"""Exact shapes made of maximal line segments (U1) or labeled points (U0).

Coordinates are :class:`fractions.Fraction` throughout.  A U1 shape is kept
in its unique maximal-element form: collinear segments that overlap or touch
are fused, so two shapes are equal exactly when their element tuples are.

Internally every U1 shape is also viewed as a map ``carrier -> spans`` where
a carrier is a normalised integer line equation ``a*x + b*y + c = 0`` and
spans are disjoint closed intervals of a parameter along that line.  All
four Boolean operations reduce to interval arithmetic on shared carriers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm
from typing import Iterable, Optional, Union

U0 = "u0"
U1 = "u1"
KINDS = (U0, U1)

Point = tuple[Fraction, Fraction]
Carrier = tuple[int, int, int]
Span = tuple[Fraction, Fraction]


class ShapeError(ValueError):
    """Malformed shape input or an operation mixing algebra kinds."""


class DegenerateSegmentError(ShapeError):
    pass


class KindMismatchError(ShapeError):
    pass


def rational(value) -> Fraction:
    """Coerce *value* to an exact rational.

    Floats are refused: they would silently bring binary rounding into
    decisions that have to be exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ShapeError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise ShapeError(f"not an exact rational: {value!r} ({type(value).__name__})")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    num, sep, den = text.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError:
        raise ShapeError(f"malformed rational {text!r}; expected n or n/d") from None
    if d <= 0:
        raise ShapeError(f"malformed rational {text!r}; denominator must be positive")
    return Fraction(n, d)


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_point(p) -> Point:
    x, y = p
    return (rational(x), rational(y))


def carrier_of(p: Point, q: Point) -> Carrier:
    """Normalised line equation through two distinct points."""
    a = q[1] - p[1]
    b = p[0] - q[0]
    c = -(a * p[0] + b * p[1])
    den = lcm(a.denominator, b.denominator, c.denominator)
    ia, ib, ic = int(a * den), int(b * den), int(c * den)
    g = gcd(gcd(abs(ia), abs(ib)), abs(ic))
    ia, ib, ic = ia // g, ib // g, ic // g
    if ia < 0 or (ia == 0 and ib < 0):
        ia, ib, ic = -ia, -ib, -ic
    return (ia, ib, ic)


def param_on(carrier: Carrier, p: Point) -> Fraction:
    # x for non-vertical carriers, y for vertical ones; increasing along
    # the lexicographic point order in both cases
    return p[0] if carrier[1] != 0 else p[1]


def point_on(carrier: Carrier, t: Fraction) -> Point:
    a, b, c = carrier
    if b != 0:
        return (t, Fraction(-(a * t + c), b))
    return (Fraction(-c, a), t)


def direction_of(carrier: Carrier) -> tuple[int, int]:
    a, b, _ = carrier
    return (-b, a) if b <= 0 else (b, -a)


def parallel(c1: Carrier, c2: Carrier) -> bool:
    return c1[0] * c2[1] - c1[1] * c2[0] == 0


def intersection(c1: Carrier, c2: Carrier) -> Point:
    a1, b1, k1 = c1
    a2, b2, k2 = c2
    det = a1 * b2 - a2 * b1
    if det == 0:
        raise ShapeError("parallel carriers have no single intersection")
    x = Fraction(b1 * k2 - b2 * k1, det)
    y = Fraction(a2 * k1 - a1 * k2, det)
    return (x, y)


@dataclass(frozen=True, order=True)
class Segment:
    """A closed line segment with endpoints in lexicographic order."""

    p0: Point
    p1: Point

    def __post_init__(self):
        p0, p1 = as_point(self.p0), as_point(self.p1)
        if p0 == p1:
            raise DegenerateSegmentError(f"zero-length segment at {_fmt_point(p0)}")
        if p1 < p0:
            p0, p1 = p1, p0
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)

    @cached_property
    def carrier(self) -> Carrier:
        return carrier_of(self.p0, self.p1)

    def span(self) -> Span:
        c = self.carrier
        return (param_on(c, self.p0), param_on(c, self.p1))

    def __repr__(self):
        return f"Segment({_fmt_point(self.p0)}-{_fmt_point(self.p1)})"


@dataclass(frozen=True)
class LabeledPoint:
    pos: Point
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "pos", as_point(self.pos))

    def sort_key(self):
        return (self.pos, self.label or "")

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __repr__(self):
        tail = f":{self.label}" if self.label else ""
        return f"LabeledPoint({_fmt_point(self.pos)}{tail})"


Element = Union[Segment, LabeledPoint]


def _fmt_point(p: Point) -> str:
    return f"({format_rational(p[0])}, {format_rational(p[1])})"


# -- interval arithmetic on sorted, disjoint, non-touching closed spans ----

def _merge(spans: Iterable[Span]) -> tuple[Span, ...]:
    out: list[list[Fraction]] = []
    for lo, hi in sorted(spans):
        if out and lo <= out[-1][1]:
            if hi > out[-1][1]:
                out[-1][1] = hi
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def _intersect(xs: tuple[Span, ...], ys: tuple[Span, ...]) -> tuple[Span, ...]:
    out = []
    i = j = 0
    while i < len(xs) and j < len(ys):
        lo = max(xs[i][0], ys[j][0])
        hi = min(xs[i][1], ys[j][1])
        if lo < hi:
            out.append((lo, hi))
        if xs[i][1] < ys[j][1]:
            i += 1
        else:
            j += 1
    return tuple(out)


def _subtract(xs: tuple[Span, ...], ys: tuple[Span, ...]) -> tuple[Span, ...]:
    out = []
    j = 0
    for lo, hi in xs:
        cur = lo
        while j < len(ys) and ys[j][1] <= cur:
            j += 1
        k = j
        while k < len(ys) and ys[k][0] < hi:
            if ys[k][0] > cur:
                out.append((cur, ys[k][0]))
            cur = max(cur, ys[k][1])
            if cur >= hi:
                break
            k += 1
        if cur < hi:
            out.append((cur, hi))
    return tuple(out)


def _covers(ys: tuple[Span, ...], xs: tuple[Span, ...]) -> bool:
    j = 0
    for lo, hi in xs:
        while j < len(ys) and ys[j][1] < hi:
            j += 1
        if j == len(ys) or ys[j][0] > lo:
            return False
    return True


@dataclass(frozen=True)
class Shape:
    """An immutable shape: a canonical tuple of maximal elements.

    Use :func:`canonicalize`, :meth:`u1`, :meth:`u0` or :meth:`empty` to
    build one; the raw constructor trusts its input.
    """

    kind: str
    elements: tuple = ()

    @classmethod
    def empty(cls, kind: str = U1) -> "Shape":
        if kind not in KINDS:
            raise ShapeError(f"unknown algebra kind {kind!r}")
        return cls(kind, ())

    @classmethod
    def u1(cls, segments: Iterable) -> "Shape":
        segs = [s if isinstance(s, Segment) else Segment(*s) for s in segments]
        return canonicalize(segs)

    @classmethod
    def u0(cls, points: Iterable) -> "Shape":
        pts = []
        for p in points:
            if isinstance(p, LabeledPoint):
                pts.append(p)
            elif len(p) == 3:
                pts.append(LabeledPoint((p[0], p[1]), p[2]))
            else:
                pts.append(LabeledPoint(p))
        return cls(U0, tuple(sorted(set(pts))))

    @classmethod
    def from_spans(cls, spans: dict) -> "Shape":
        segs = []
        for carrier, ivs in spans.items():
            for lo, hi in ivs:
                segs.append(Segment(point_on(carrier, lo), point_on(carrier, hi)))
        return cls(U1, tuple(sorted(segs)))

    @cached_property
    def spans(self) -> dict:
        if self.kind != U1:
            raise ShapeError("spans are defined for U1 shapes only")
        out: dict[Carrier, list[Span]] = {}
        for seg in self.elements:
            out.setdefault(seg.carrier, []).append(seg.span())
        return {c: tuple(sorted(v)) for c, v in out.items()}

    @cached_property
    def _points(self) -> frozenset:
        return frozenset(self.elements)

    def __len__(self):
        return len(self.elements)

    def __bool__(self):
        return bool(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def _check(self, other: "Shape"):
        if not isinstance(other, Shape):
            raise TypeError(f"expected Shape, got {type(other).__name__}")
        if other.kind != self.kind:
            raise KindMismatchError(f"cannot combine {self.kind} and {other.kind} shapes")

    def __add__(self, other: "Shape") -> "Shape":
        return sum_(self, other)

    def __sub__(self, other: "Shape") -> "Shape":
        return difference(self, other)

    def __mul__(self, other: "Shape") -> "Shape":
        return product(self, other)

    def __xor__(self, other: "Shape") -> "Shape":
        return sym_difference(self, other)

    def __le__(self, other: "Shape") -> bool:
        return part_of(self, other)

    def __lt__(self, other: "Shape") -> bool:
        return self != other and part_of(self, other)

    def __ge__(self, other: "Shape") -> bool:
        return part_of(other, self)

    def __gt__(self, other: "Shape") -> bool:
        return self != other and part_of(other, self)

    def sort_key(self):
        if self.kind == U1:
            return (len(self.elements), self.elements)
        return (len(self.elements), tuple(p.sort_key() for p in self.elements))

    def __repr__(self):
        from .textio import format_shape

        return f"Shape<{format_shape(self)}>"


def canonicalize(raw: Iterable) -> Shape:
    """Unique maximal-element shape covering the given segments."""
    spans: dict[Carrier, list[Span]] = {}
    for seg in raw:
        if not isinstance(seg, Segment):
            seg = Segment(*seg)
        spans.setdefault(seg.carrier, []).append(seg.span())
    return Shape.from_spans({c: _merge(v) for c, v in spans.items()})


def part_of(x: Shape, y: Shape) -> bool:
    x._check(y)
    if not x.elements:
        return True
    if x.kind == U0:
        return x._points <= y._points
    ys = y.spans
    for carrier, xs in x.spans.items():
        if carrier not in ys or not _covers(ys[carrier], xs):
            return False
    return True


def sum_(x: Shape, y: Shape) -> Shape:
    x._check(y)
    if not y.elements:
        return x
    if not x.elements:
        return y
    if x.kind == U0:
        return Shape(U0, tuple(sorted(x._points | y._points)))
    spans = dict(x.spans)
    for c, ivs in y.spans.items():
        spans[c] = _merge(spans.get(c, ()) + ivs)
    return Shape.from_spans(spans)


def product(x: Shape, y: Shape) -> Shape:
    x._check(y)
    if x.kind == U0:
        return Shape(U0, tuple(sorted(x._points & y._points)))
    ys = y.spans
    spans = {}
    for c, ivs in x.spans.items():
        if c in ys:
            common = _intersect(ivs, ys[c])
            if common:
                spans[c] = common
    return Shape.from_spans(spans)


def difference(x: Shape, y: Shape) -> Shape:
    x._check(y)
    if not y.elements:
        return x
    if x.kind == U0:
        return Shape(U0, tuple(sorted(x._points - y._points)))
    ys = y.spans
    spans = {}
    for c, ivs in x.spans.items():
        rest = _subtract(ivs, ys[c]) if c in ys else ivs
        if rest:
            spans[c] = rest
    return Shape.from_spans(spans)


def sym_difference(x: Shape, y: Shape) -> Shape:
    return sum_(difference(x, y), difference(y, x))


def total(shapes: Iterable[Shape], kind: str = U1) -> Shape:
    """Sum of any number of shapes; the empty sum is the empty shape."""
    out = Shape.empty(kind)
    for s in shapes:
        out = sum_(out, s)
    return out


def atomize(context: Iterable[Shape]) -> list[Shape]:
    """Cut every carrier at every span endpoint contributed by the context.

    Returns single-element shapes that pairwise share no part and whose
    sums reproduce each context shape exactly.
    """
    context = list(context)
    if not context:
        return []
    kind = context[0].kind
    for s in context:
        context[0]._check(s)
    if kind == U0:
        pts = set()
        for s in context:
            pts |= s._points
        return [Shape(U0, (p,)) for p in sorted(pts)]
    cuts: dict[Carrier, set] = {}
    covered: dict[Carrier, list[Span]] = {}
    for s in context:
        for c, ivs in s.spans.items():
            bucket = cuts.setdefault(c, set())
            for lo, hi in ivs:
                bucket.add(lo)
                bucket.add(hi)
            covered.setdefault(c, []).extend(ivs)
    atoms = []
    for c, points in cuts.items():
        union = _merge(covered[c])
        ordered = sorted(points)
        for lo, hi in zip(ordered, ordered[1:]):
            if _covers(union, ((lo, hi),)):
                atoms.append(Segment(point_on(c, lo), point_on(c, hi)))
    return [Shape(U1, (a,)) for a in sorted(atoms)]
