"""Parametric point computations.

A schema fixes some labeled points and declares open terms that slide along
one axis inside a rational range.  An assignment gives new values to the
terms; the rule it defines moves the terms from their current positions to
the assigned ones, carrying the anchor points along unchanged.  Links are
drawing annotations only and never enter the point computation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .analysis import AnalysisReport, OpennessPolicy, Rule, Trace, TraceStep, analyze
from .mappings import parse_formula
from .shapes import U0, LabeledPoint, Shape, ShapeError, part_of, rational
from .transforms import Transform

STEP_MAPPING = "x - tA"


class ParametricError(ShapeError):
    pass


@dataclass(frozen=True)
class Term:
    name: str
    at: tuple           # initial position
    axis: str           # "h" moves x, "v" moves y
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.axis not in ("h", "v"):
            raise ParametricError(f"term {self.name}: axis must be h or v, got {self.axis!r}")
        object.__setattr__(self, "at", (rational(self.at[0]), rational(self.at[1])))
        object.__setattr__(self, "lo", rational(self.lo))
        object.__setattr__(self, "hi", rational(self.hi))
        if self.lo > self.hi:
            raise ParametricError(f"term {self.name}: empty range [{self.lo}, {self.hi}]")

    @property
    def initial(self) -> Fraction:
        return self.at[0] if self.axis == "h" else self.at[1]

    def position(self, value: Fraction) -> tuple:
        return (value, self.at[1]) if self.axis == "h" else (self.at[0], value)


@dataclass(frozen=True)
class Mirror:
    """``left`` and ``right`` sit symmetrically about the vertical axis through ``about``."""

    left: str
    right: str
    about: str


@dataclass(frozen=True)
class Schema:
    fixed: tuple                    # (name, (x, y)) pairs
    terms: tuple                    # Term instances
    mirrors: tuple = ()
    anchors: tuple = ()             # fixed point names carried in every rule
    links: tuple = ()               # (name, name) drawing annotations

    def __post_init__(self):
        names = [n for n, _ in self.fixed] + [t.name for t in self.terms]
        if len(set(names)) != len(names):
            raise ParametricError("point names must be unique")
        fixed = {n for n, _ in self.fixed}
        terms = {t.name for t in self.terms}
        for m in self.mirrors:
            for n in (m.left, m.right, m.about):
                if n not in terms:
                    raise ParametricError(f"mirror refers to undeclared term {n!r}")
            if self.term(m.left).axis != "h" or self.term(m.right).axis != "h":
                raise ParametricError(f"mirror {m.left} {m.right}: mirrored terms must move horizontally")
        for a in self.anchors:
            if a not in fixed:
                raise ParametricError(f"anchor {a!r} is not a fixed point")
        for a, b in self.links:
            if a not in fixed | terms or b not in fixed | terms:
                raise ParametricError(f"link {a}-{b} refers to an unknown point")
        self.check(self.initial_assignment())

    def term(self, name: str) -> Term:
        for t in self.terms:
            if t.name == name:
                return t
        raise ParametricError(f"unknown term {name!r}")

    def initial_assignment(self) -> "Assignment":
        return Assignment({t.name: t.initial for t in self.terms})

    def positions(self, g: "Assignment") -> dict:
        out = {n: p for n, p in self.fixed}
        for t in self.terms:
            out[t.name] = t.position(g.values[t.name])
        return out

    def shape(self, g: "Assignment") -> Shape:
        return Shape.u0(LabeledPoint(p, n) for n, p in self.positions(g).items())

    def check(self, g: "Assignment") -> None:
        for t in self.terms:
            if t.name not in g.values:
                raise ParametricError(f"assignment leaves term {t.name} without a value")
            v = g.values[t.name]
            if not t.lo <= v <= t.hi:
                raise ParametricError(f"term {t.name} = {v} is outside its range [{t.lo}, {t.hi}]")
        for m in self.mirrors:
            axis = self.positions(g)[m.about][0]
            if g.values[m.left] + g.values[m.right] != 2 * axis:
                raise ParametricError(
                    f"mirror {m.left} {m.right} about {m.about}: {m.left} and {m.right} "
                    f"are not symmetric about x = {axis}"
                )

    def complete(self, partial: dict, current: Optional["Assignment"] = None) -> "Assignment":
        """Fill unassigned terms from *current* and derive mirrored partners."""
        current = current or self.initial_assignment()
        given = {k: rational(v) for k, v in partial.items()}
        for k in given:
            self.term(k)
        values = dict(current.values)
        values.update(given)
        for m in self.mirrors:
            axis = self.term(m.about).position(values[m.about])[0]
            if m.left in given and m.right not in given:
                values[m.right] = 2 * axis - given[m.left]
            elif m.right in given and m.left not in given:
                values[m.left] = 2 * axis - given[m.right]
        g = Assignment(values)
        self.check(g)
        return g


@dataclass(frozen=True)
class Assignment:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "values", {k: rational(v) for k, v in self.values.items()})

    def __hash__(self):
        return hash(tuple(sorted(self.values.items())))


def _part(schema: Schema, g: Assignment) -> Shape:
    pos = schema.positions(g)
    names = [t.name for t in schema.terms] + list(schema.anchors)
    return Shape.u0(LabeledPoint(pos[n], n) for n in names)


def instantiate(schema: Schema, g: Assignment, current: Optional[Assignment] = None) -> Rule:
    """The rule moving the open terms from *current* to the values of *g*."""
    current = current or schema.initial_assignment()
    schema.check(current)
    schema.check(g)
    return Rule(_part(schema, current), _part(schema, g), name="g")


@dataclass
class ParametricRun:
    trace: Trace
    assignments: list
    report: AnalysisReport


def build_trace(schema: Schema, assignments: Iterable[Assignment]) -> Trace:
    h = parse_formula(STEP_MAPPING)
    current = schema.initial_assignment()
    shape = schema.shape(current)
    steps = []
    for i, g in enumerate(assignments, 1):
        try:
            rule = instantiate(schema, g, current)
        except ParametricError as exc:
            raise ParametricError(f"step {i}: {exc}") from None
        if not part_of(rule.lhs, shape):
            raise ParametricError(f"step {i}: g(x) does not match a subset of the current shape")
        steps.append(TraceStep(rule, Transform.identity(), h, STEP_MAPPING))
        shape = (shape - rule.lhs) + rule.rhs
        current = g
    return Trace(schema.shape(schema.initial_assignment()), tuple(steps))


def run_parametric(schema: Schema, assignments: Iterable[Assignment],
                   policy: str = "ta") -> ParametricRun:
    assignments = list(assignments)
    trace = build_trace(schema, assignments)
    report = analyze(trace, OpennessPolicy(policy))
    return ParametricRun(trace, assignments, report)


def assignment_grid(schema: Schema, counts: dict) -> list:
    """Evenly spaced assignments; *counts* maps free term names to sample counts.

    Terms fixed by a mirror are derived, so only one side of each pair may be
    listed.
    """
    import itertools

    axes = []
    for name, n in sorted(counts.items()):
        t = schema.term(name)
        if n < 1:
            raise ParametricError(f"term {name}: sample count must be positive")
        if n == 1:
            axes.append([(name, t.lo)])
        else:
            step = (t.hi - t.lo) / (n - 1)
            axes.append([(name, t.lo + k * step) for k in range(n)])
    return [schema.complete(dict(combo)) for combo in itertools.product(*axes)]
