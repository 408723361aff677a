"""Rational affine transformations and embedding search.

A transformation maps ``(x, y) -> (a*x + b*y + e, c*x + d*y + f)``.  Only
rational matrices are admitted so that images stay exact; rotations by
angles other than multiples of 90 degrees are therefore refused unless
they come with a scale factor that makes the matrix rational.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .shapes import (
    U0,
    U1,
    LabeledPoint,
    Segment,
    Shape,
    ShapeError,
    canonicalize,
    direction_of,
    intersection,
    parallel,
    part_of,
    rational,
)


class TransformError(ShapeError):
    pass


Matrix = tuple[Fraction, Fraction, Fraction, Fraction]


@dataclass(frozen=True, order=True)
class Transform:
    a: Fraction = Fraction(1)
    b: Fraction = Fraction(0)
    c: Fraction = Fraction(0)
    d: Fraction = Fraction(1)
    e: Fraction = Fraction(0)
    f: Fraction = Fraction(0)

    def __post_init__(self):
        for name in "abcdef":
            object.__setattr__(self, name, rational(getattr(self, name)))
        if self.det == 0:
            raise TransformError(f"transform is not invertible: {self.sextuple_text()}")

    @classmethod
    def identity(cls) -> "Transform":
        return cls()

    @classmethod
    def translation(cls, dx, dy) -> "Transform":
        return cls(1, 0, 0, 1, dx, dy)

    @classmethod
    def linear(cls, m: Matrix, dx=0, dy=0) -> "Transform":
        return cls(m[0], m[1], m[2], m[3], dx, dy)

    @property
    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    @property
    def matrix(self) -> Matrix:
        return (self.a, self.b, self.c, self.d)

    @property
    def sextuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d, self.e, self.f)

    def sextuple_text(self) -> str:
        from .shapes import format_rational

        return " ".join(format_rational(v) for v in self.sextuple)

    def point(self, p):
        x, y = p
        return (self.a * x + self.b * y + self.e, self.c * x + self.d * y + self.f)

    def then(self, other: "Transform") -> "Transform":
        """``other`` applied after ``self``."""
        a = other.a * self.a + other.b * self.c
        b = other.a * self.b + other.b * self.d
        c = other.c * self.a + other.d * self.c
        d = other.c * self.b + other.d * self.d
        e = other.a * self.e + other.b * self.f + other.e
        f = other.c * self.e + other.d * self.f + other.f
        return Transform(a, b, c, d, e, f)

    def inverse(self) -> "Transform":
        det = self.det
        a, b, c, d = self.d / det, -self.b / det, -self.c / det, self.a / det
        return Transform(a, b, c, d, -(a * self.e + b * self.f), -(c * self.e + d * self.f))

    def __call__(self, shape: Shape) -> Shape:
        return apply(self, shape)


def apply(t: Transform, s: Shape) -> Shape:
    if s.kind == U0:
        return Shape.u0(LabeledPoint(t.point(p.pos), p.label) for p in s.elements)
    return canonicalize(Segment(t.point(seg.p0), t.point(seg.p1)) for seg in s.elements)


_D4 = [
    (1, 0, 0, 1),
    (0, -1, 1, 0),
    (-1, 0, 0, -1),
    (0, 1, -1, 0),
    (1, 0, 0, -1),
    (-1, 0, 0, 1),
    (0, 1, 1, 0),
    (0, -1, -1, 0),
]


@dataclass(frozen=True)
class TransformGroup:
    """A finite set of linear parts, optionally combined with translations."""

    name: str
    linear_parts: tuple
    translations: bool = True

    def __post_init__(self):
        parts = []
        for m in self.linear_parts:
            if len(m) != 4:
                raise TransformError(f"{self.name}: linear part needs four entries, got {m!r}")
            try:
                m = tuple(rational(v) for v in m)
            except ShapeError as exc:
                raise TransformError(
                    f"{self.name}: matrix {m!r} is not rational; only rational-matrix "
                    f"transformations keep embedding exact"
                ) from exc
            if m[0] * m[3] - m[1] * m[2] == 0:
                raise TransformError(f"{self.name}: singular matrix {m!r}")
            parts.append(m)
        object.__setattr__(self, "linear_parts", tuple(sorted(set(parts))))

    @classmethod
    def identity(cls):
        return cls("identity", ((1, 0, 0, 1),), translations=False)

    @classmethod
    def translations_only(cls):
        return cls("translations", ((1, 0, 0, 1),))

    @classmethod
    def isometries(cls):
        """Translations combined with the eight symmetries of the square."""
        return cls("isometries", tuple(_D4))

    @classmethod
    def similarities(cls, scales: Iterable = (Fraction(1, 2), 1, 2)):
        mats = []
        for k in scales:
            k = rational(k)
            if k <= 0:
                raise TransformError(f"scale factor must be positive, got {k}")
            mats.extend(tuple(k * v for v in m) for m in _D4)
        return cls("similarities", tuple(mats))

    @classmethod
    def rotations(cls, degrees: Iterable[int], translations=True):
        mats = []
        for deg in degrees:
            if deg % 90:
                raise TransformError(
                    f"rotation by {deg} degrees has an irrational matrix; "
                    f"only multiples of 90 are exact"
                )
            mats.append(_D4[(deg // 90) % 4])
        return cls("rotations", tuple(mats), translations)

    @classmethod
    def named(cls, name: str) -> "TransformGroup":
        table = {
            "identity": cls.identity,
            "translations": cls.translations_only,
            "isometries": cls.isometries,
            "similarities": cls.similarities,
        }
        if name not in table:
            raise TransformError(f"unknown transform group {name!r}; choose from {sorted(table)}")
        return table[name]()


@dataclass(frozen=True)
class Match:
    transform: Transform
    image: Shape
    determinate: bool
    # other transforms in the group producing the same image
    alternatives: tuple = field(default=(), compare=False)


def is_determinate_image(image: Shape, host: Shape) -> bool:
    """True when every maximal element of *image* is a maximal element of *host*."""
    if image.kind == U0:
        return part_of(image, host)
    host_elements = set(host.elements)
    return all(seg in host_elements for seg in image.elements)


def _apply_linear(m, v):
    return (m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1])


def _is_parallel_dir(v, carrier) -> bool:
    d = direction_of(carrier)
    return v[0] * d[1] - v[1] * d[0] == 0


def _candidates(a: Shape, s: Shape, group: TransformGroup):
    if a.kind == U0:
        anchor = a.elements[0]
        for m in group.linear_parts:
            lp = _apply_linear(m, anchor.pos)
            for q in s.elements:
                if q.label != anchor.label:
                    continue
                yield Transform.linear(m, q.pos[0] - lp[0], q.pos[1] - lp[1])
        return

    carriers = sorted(a.spans)
    pair = next(
        ((c1, c2) for c1, c2 in itertools.combinations(carriers, 2) if not parallel(c1, c2)),
        None,
    )
    host = sorted(s.spans)
    if pair is not None:
        c1, c2 = pair
        p = intersection(c1, c2)
        d1, d2 = direction_of(c1), direction_of(c2)
        for m in group.linear_parts:
            v1, v2 = _apply_linear(m, d1), _apply_linear(m, d2)
            lp = _apply_linear(m, p)
            firsts = [k for k in host if _is_parallel_dir(v1, k)]
            seconds = [k for k in host if _is_parallel_dir(v2, k)]
            for k1 in firsts:
                for k2 in seconds:
                    q = intersection(k1, k2)
                    yield Transform.linear(m, q[0] - lp[0], q[1] - lp[1])
        return

    # every element of a is parallel: register extreme endpoints against host
    # endpoints (sliding placements in between are not enumerated)
    ends = [seg.p0 for seg in a.elements] + [seg.p1 for seg in a.elements]
    lo, hi = min(ends), max(ends)
    host_points = sorted({p for seg in s.elements for p in (seg.p0, seg.p1)})
    for m in group.linear_parts:
        for anchor in (lo, hi):
            la = _apply_linear(m, anchor)
            for q in host_points:
                yield Transform.linear(m, q[0] - la[0], q[1] - la[1])


def enumerate_matches(
    a: Shape,
    s: Shape,
    group: Optional[TransformGroup] = None,
    determinate: bool = False,
) -> list[Match]:
    """All distinct embeddings ``t(a) <= s`` for ``t`` in *group*.

    Candidates come from registering a pair of non-parallel carrier lines of
    *a* against ordered pairs of carriers of *s*; each candidate is then
    verified with :func:`part_of`.  Matches with the same image are reported
    once, under the smallest transform.
    """
    if group is None:
        group = TransformGroup.isometries()
    if not a:
        raise TransformError("cannot match an empty left side")
    a._check(s)
    by_image: dict[Shape, list[Transform]] = {}
    seen = set()
    for t in _candidates(a, s, group):
        if not group.translations and (t.e or t.f):
            continue
        if t in seen:
            continue
        seen.add(t)
        image = apply(t, a)
        if part_of(image, s):
            by_image.setdefault(image, []).append(t)
    out = []
    for image, ts in by_image.items():
        ts.sort()
        det = is_determinate_image(image, s)
        if determinate and not det:
            continue
        out.append(Match(ts[0], image, det, tuple(ts[1:])))
    out.sort(key=lambda m: (m.image.sort_key(), m.transform))
    return out
