"""Line-oriented text formats.

Shape literals::

    u1{ (0 0 2 0) (1 0 3 1/2) }      segments as x0 y0 x1 y1
    u0{ (0 0):p (1 2) }              points with an optional :label
    u1{}                             the empty shape

Trace documents (``#`` starts a comment)::

    shapecont-trace 1
    kind u1
    initial u1{ ... }
    rule R1 u1{ ... } -> u1{ ... }
    rule R2 determinate u1{ ... } -> u1{ ... }
    step R1 transform 1 0 0 1 5 0 mapping x - tA
    expect 2 u1{ ... }               derived shape S2 must equal this
    policy ta | ta+complement | explicit
    open 1 u1{ ... }                 explicit open part of shape 1
    final-open u1{ ... }             generates the final shape's topology

Topology documents::

    shapecont-topologies 1
    topology 1
    universe u1{ ... }               optional when a trace supplies it
    open u1{ ... }
    open u1{ ... } basis             the flag is written on output only

Rationals are written ``n`` or ``n/d``; decimals are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .shapes import (
    KINDS,
    U0,
    U1,
    LabeledPoint,
    Segment,
    Shape,
    ShapeError,
    canonicalize,
    format_rational,
)

TRACE_HEADER = "shapecont-trace 1"
TOPOLOGY_HEADER = "shapecont-topologies 1"


class ParseError(ShapeError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}" if line else message)
        self.line = line
        self.column = column


_RATIONAL = re.compile(r"-?\d+(?:/\d+)?")
_LABEL = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class Cursor:
    """Scanner over one line that reports 1-based columns in errors."""

    def __init__(self, text: str, line: int = 0, source: str = ""):
        self.text = text
        self.pos = 0
        self.line = line
        self.source = source

    def error(self, message: str, pos: Optional[int] = None) -> ParseError:
        col = (self.pos if pos is None else pos) + 1
        return ParseError(message, self.line or 1, col, self.source)

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t\r":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def expect(self, s: str):
        self.skip()
        if not self.text.startswith(s, self.pos):
            found = self.text[self.pos:self.pos + 8] or "end of line"
            raise self.error(f"expected {s!r}, found {found!r}")
        self.pos += len(s)

    def word(self, what: str = "a word") -> str:
        self.skip()
        m = re.compile(r"[^\s{}()]+").match(self.text, self.pos)
        if not m:
            raise self.error(f"expected {what}")
        self.pos = m.end()
        return m.group(0)

    def rational(self) -> Fraction:
        self.skip()
        m = _RATIONAL.match(self.text, self.pos)
        if not m:
            found = self.text[self.pos:self.pos + 8] or "end of line"
            raise self.error(f"expected a rational n or n/d, found {found!r}")
        end = m.end()
        if end < len(self.text) and self.text[end] in ".eE":
            raise self.error("decimals are not accepted; write rationals as n/d")
        text = m.group(0)
        if "/" in text and int(text.split("/")[1]) == 0:
            raise self.error("zero denominator")
        self.pos = end
        return Fraction(text)

    def rest(self) -> str:
        self.skip()
        out = self.text[self.pos:].strip()
        self.pos = len(self.text)
        return out

    def shape(self, kind: Optional[str] = None) -> Shape:
        self.skip()
        start = self.pos
        m = re.compile(r"(u[01])\{").match(self.text, self.pos)
        if not m:
            raise self.error("expected a shape literal u1{...} or u0{...}")
        found = m.group(1)
        if kind is not None and found != kind:
            raise self.error(f"expected a {kind} shape, found {found}; algebra kinds cannot be mixed", start)
        self.pos = m.end()
        elements = []
        while True:
            if self.peek("}"):
                self.pos += 1
                break
            if self.at_end():
                raise self.error("unterminated shape literal; expected '}'")
            open_at = self.pos
            self.expect("(")
            if found == U1:
                vals = [self.rational() for _ in range(4)]
                self.expect(")")
                if vals[:2] == vals[2:]:
                    raise self.error("zero-length segment", open_at)
                elements.append(Segment((vals[0], vals[1]), (vals[2], vals[3])))
            else:
                x, y = self.rational(), self.rational()
                self.expect(")")
                label = None
                if self.text.startswith(":", self.pos):
                    self.pos += 1
                    lm = _LABEL.match(self.text, self.pos)
                    if not lm:
                        raise self.error("expected a label after ':'")
                    label = lm.group(0)
                    self.pos = lm.end()
                elements.append(LabeledPoint((x, y), label))
        if found == U1:
            return canonicalize(elements)
        return Shape.u0(elements)


def parse_shape(text: str, kind: Optional[str] = None) -> Shape:
    cur = Cursor(text.strip(), 1)
    s = cur.shape(kind)
    if not cur.at_end():
        raise cur.error("unexpected text after the shape literal")
    return s


def format_shape(s: Shape) -> str:
    if not s.elements:
        return f"{s.kind}{{}}"
    r = format_rational
    if s.kind == U1:
        body = " ".join(f"({r(e.p0[0])} {r(e.p0[1])} {r(e.p1[0])} {r(e.p1[1])})" for e in s.elements)
    else:
        body = " ".join(
            f"({r(p.pos[0])} {r(p.pos[1])})" + (f":{p.label}" if p.label else "") for p in s.elements
        )
    return f"{s.kind}{{ {body} }}"


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            yield n, line


# -- trace documents ------------------------------------------------------------

@dataclass
class StepRecord:
    rule: str
    transform: tuple
    mapping: str


@dataclass
class TraceDocument:
    kind: str
    initial: Shape
    rules: dict = field(default_factory=dict)      # name -> (lhs, rhs, determinate)
    steps: list = field(default_factory=list)
    expects: dict = field(default_factory=dict)    # 1-based shape index -> Shape
    policy: Optional[str] = None
    opens: dict = field(default_factory=dict)      # 1-based shape index -> [Shape]
    final_opens: list = field(default_factory=list)

    def to_trace(self):
        from .analysis import Rule, Trace, TraceStep
        from .mappings import catalog_id, parse_formula
        from .transforms import Transform

        rules = {
            name: Rule(lhs, rhs, det, name) for name, (lhs, rhs, det) in self.rules.items()
        }
        steps = []
        for rec in self.steps:
            expr = parse_formula(rec.mapping)
            label = rec.mapping if rec.mapping.strip() in _catalog_keys() else ""
            steps.append(TraceStep(rules[rec.rule], Transform(*rec.transform), expr, label))
        trace = Trace(self.initial, tuple(steps))
        shapes = trace.shapes
        for idx, expected in sorted(self.expects.items()):
            if idx > len(shapes):
                raise ParseError(f"expect {idx}: the trace only has {len(shapes)} shapes")
            if shapes[idx - 1] != expected:
                raise ParseError(f"expect {idx}: derived shape differs from the stored literal")
        return trace

    def policy_object(self):
        from .analysis import OpennessPolicy

        if self.policy == "explicit" or (self.policy is None and self.opens):
            return OpennessPolicy.explicit(self.opens)
        return OpennessPolicy(self.policy or "ta")

    def final_topology(self, trace):
        from .topology import generate

        if not self.final_opens:
            return None
        return generate(trace.final, self.final_opens)


def _catalog_keys():
    from .mappings import CATALOG_IDS

    return CATALOG_IDS


def parse_trace_document(text: str, source: str = "") -> TraceDocument:
    from .mappings import FormulaError, parse_formula

    lines = list(_lines(text))
    if not lines or lines[0][1].strip() != TRACE_HEADER:
        n = lines[0][0] if lines else 1
        raise ParseError(f"expected header {TRACE_HEADER!r}", n, 1, source)
    kind = None
    doc = None
    pending_rules: dict = {}
    pending: dict = {"steps": [], "expects": {}, "policy": None, "opens": {}, "final": []}
    initial = None
    for n, line in lines[1:]:
        cur = Cursor(line, n, source)
        key = cur.word("a directive")
        if key == "kind":
            kind = cur.word("an algebra kind")
            if kind not in KINDS:
                raise cur.error(f"unknown algebra kind {kind!r}; expected u0 or u1")
        elif kind is None:
            raise cur.error("'kind' must come before any other directive", 0)
        elif key == "initial":
            initial = cur.shape(kind)
        elif key == "rule":
            name = cur.word("a rule name")
            det = False
            if cur.peek("determinate"):
                cur.word()
                det = True
            lhs = cur.shape(kind)
            cur.expect("->")
            rhs = cur.shape(kind)
            if not lhs:
                raise cur.error(f"rule {name}: left side must be nonempty", 0)
            pending_rules[name] = (lhs, rhs, det)
        elif key == "step":
            name = cur.word("a rule name")
            if name not in pending_rules:
                raise cur.error(f"unknown rule {name!r}", 0)
            if cur.word("'transform'") != "transform":
                raise cur.error("expected 'transform'")
            at = cur.pos
            vals = tuple(cur.rational() for _ in range(6))
            if vals[0] * vals[3] - vals[1] * vals[2] == 0:
                raise cur.error("transform is not invertible", at)
            if cur.word("'mapping'") != "mapping":
                raise cur.error("expected 'mapping'")
            at = cur.pos
            text_h = cur.rest()
            try:
                parse_formula(text_h)
            except FormulaError as exc:
                raise ParseError(f"bad mapping: {exc}", n, at + 2, source) from None
            pending["steps"].append(StepRecord(name, vals, text_h))
        elif key == "expect":
            idx = int(cur.word("a shape index"))
            pending["expects"][idx] = cur.shape(kind)
        elif key == "policy":
            mode = cur.word("a policy")
            if mode not in ("ta", "ta+complement", "explicit"):
                raise cur.error(f"unknown policy {mode!r}")
            pending["policy"] = mode
        elif key == "open":
            idx = int(cur.word("a shape index"))
            pending["opens"].setdefault(idx, []).append(cur.shape(kind))
        elif key == "final-open":
            pending["final"].append(cur.shape(kind))
        else:
            raise cur.error(f"unknown directive {key!r}", 0)
        if not cur.at_end():
            raise cur.error("unexpected trailing text")
    if kind is None or initial is None:
        raise ParseError("trace needs 'kind' and 'initial'", lines[-1][0], 1, source)
    return TraceDocument(
        kind, initial, pending_rules, pending["steps"], pending["expects"],
        pending["policy"], pending["opens"], pending["final"],
    )


def parse_trace(text: str, source: str = ""):
    return parse_trace_document(text, source).to_trace()


def format_trace_document(doc: TraceDocument) -> str:
    r = format_rational
    out = [TRACE_HEADER, f"kind {doc.kind}", f"initial {format_shape(doc.initial)}"]
    for name, (lhs, rhs, det) in doc.rules.items():
        flag = " determinate" if det else ""
        out.append(f"rule {name}{flag} {format_shape(lhs)} -> {format_shape(rhs)}")
    for rec in doc.steps:
        t = " ".join(r(Fraction(v)) for v in rec.transform)
        out.append(f"step {rec.rule} transform {t} mapping {' '.join(rec.mapping.split())}")
    for idx in sorted(doc.expects):
        out.append(f"expect {idx} {format_shape(doc.expects[idx])}")
    if doc.policy:
        out.append(f"policy {doc.policy}")
    for idx in sorted(doc.opens):
        for s in doc.opens[idx]:
            out.append(f"open {idx} {format_shape(s)}")
    for s in doc.final_opens:
        out.append(f"final-open {format_shape(s)}")
    return "\n".join(out) + "\n"


def document_from_trace(trace, policy=None, expects: bool = True) -> TraceDocument:
    rules = {}
    steps = []
    for i, step in enumerate(trace.steps, 1):
        name = step.rule.name or f"R{i}"
        if name in rules and rules[name] != (step.rule.lhs, step.rule.rhs, step.rule.determinate):
            name = f"{name}_{i}"
        rules[name] = (step.rule.lhs, step.rule.rhs, step.rule.determinate)
        steps.append(StepRecord(name, step.transform.sextuple, step.mapping_text))
    doc = TraceDocument(trace.kind, trace.initial, rules, steps)
    if expects:
        doc.expects = {i: s for i, s in enumerate(trace.shapes, 1) if i > 1}
    if policy is not None:
        doc.policy = policy.mode
        if policy.mode == "explicit":
            doc.opens = {i: list(parts) for i, parts in policy.parts}
    return doc


def format_trace(trace, policy=None) -> str:
    return format_trace_document(document_from_trace(trace, policy))


# -- topology documents ---------------------------------------------------------

@dataclass
class TopologyBlock:
    label: str
    universe: Optional[Shape]
    opens: list


def parse_topologies(text: str, kind: Optional[str] = None, source: str = "") -> list:
    lines = list(_lines(text))
    if not lines or lines[0][1].strip() != TOPOLOGY_HEADER:
        n = lines[0][0] if lines else 1
        raise ParseError(f"expected header {TOPOLOGY_HEADER!r}", n, 1, source)
    blocks: list = []
    for n, line in lines[1:]:
        cur = Cursor(line, n, source)
        key = cur.word("a directive")
        if key == "topology":
            label = cur.rest() or str(len(blocks) + 1)
            blocks.append(TopologyBlock(label, None, []))
            continue
        if not blocks:
            raise cur.error("expected 'topology' to open a block", 0)
        block = blocks[-1]
        if key == "universe":
            block.universe = cur.shape(kind)
            kind = kind or block.universe.kind
        elif key == "open":
            block.opens.append(cur.shape(kind))
            kind = kind or block.opens[-1].kind
            if cur.peek("basis"):
                cur.word()
        else:
            raise cur.error(f"unknown directive {key!r}", 0)
        if not cur.at_end():
            raise cur.error("unexpected trailing text")
    return blocks


def format_topologies(topologies, labels=None) -> str:
    from .topology import reduced_basis

    out = [TOPOLOGY_HEADER]
    for i, t in enumerate(topologies):
        out.append(f"topology {labels[i] if labels else i + 1}")
        out.append(f"universe {format_shape(t.universe)}")
        basis = set(reduced_basis(t).elements)
        for u in t.opens:
            flag = " basis" if u in basis else ""
            out.append(f"open {format_shape(u)}{flag}")
    return "\n".join(out) + "\n"


# -- parametric schema and assignments -----------------------------------------

SCHEMA_HEADER = "shapecont-schema 1"
ASSIGNMENTS_HEADER = "shapecont-assignments 1"

_RANGE = re.compile(r"range=\[\s*(-?\d+(?:/\d+)?)\s*,\s*(-?\d+(?:/\d+)?)\s*\]")


def _header(lines, header, source):
    if not lines or lines[0][1].strip() != header:
        n = lines[0][0] if lines else 1
        raise ParseError(f"expected header {header!r}", n, 1, source)


def parse_schema(text: str, source: str = ""):
    """``fixed NAME x y``, ``term NAME at x y axis=h|v range=[lo,hi]``,
    ``mirror P R about Q``, ``anchor NAME ...``, ``link A B``."""
    from .parametric import Mirror, ParametricError, Schema, Term

    lines = list(_lines(text))
    _header(lines, SCHEMA_HEADER, source)
    fixed, terms, mirrors, anchors, links = [], [], [], [], []
    for n, line in lines[1:]:
        cur = Cursor(line, n, source)
        key = cur.word("a directive")
        if key == "fixed":
            name = cur.word("a point name")
            fixed.append((name, (cur.rational(), cur.rational())))
        elif key == "term":
            name = cur.word("a term name")
            if cur.word("'at'") != "at":
                raise cur.error("expected 'at'")
            at = (cur.rational(), cur.rational())
            cur.expect("axis=")
            axis = cur.word("h or v")
            if axis not in ("h", "v"):
                raise cur.error(f"axis must be h or v, got {axis!r}")
            cur.skip()
            m = _RANGE.match(cur.text, cur.pos)
            if not m:
                raise cur.error("expected range=[lo,hi] with rational bounds")
            cur.pos = m.end()
            try:
                terms.append(Term(name, at, axis, Fraction(m.group(1)), Fraction(m.group(2))))
            except ParametricError as exc:
                raise cur.error(str(exc), 0) from None
        elif key == "mirror":
            left, right = cur.word("a term"), cur.word("a term")
            if cur.word("'about'") != "about":
                raise cur.error("expected 'about'")
            mirrors.append(Mirror(left, right, cur.word("a term")))
        elif key == "anchor":
            while not cur.at_end():
                anchors.append(cur.word())
        elif key == "link":
            links.append((cur.word("a point name"), cur.word("a point name")))
        else:
            raise cur.error(f"unknown directive {key!r}", 0)
        if not cur.at_end():
            raise cur.error("unexpected trailing text")
    try:
        return Schema(tuple(fixed), tuple(terms), tuple(mirrors), tuple(anchors), tuple(links))
    except ParametricError as exc:
        raise ParseError(str(exc), lines[-1][0], 1, source) from None


def parse_assignments(text: str, schema, source: str = "") -> list:
    """One ``assign NAME=value ...`` line per step; omitted terms keep their
    current value and mirrored partners are derived."""
    from .parametric import ParametricError

    lines = list(_lines(text))
    _header(lines, ASSIGNMENTS_HEADER, source)
    out = []
    current = schema.initial_assignment()
    for n, line in lines[1:]:
        cur = Cursor(line, n, source)
        if cur.word("'assign'") != "assign":
            raise cur.error("expected 'assign'", 0)
        values = {}
        while not cur.at_end():
            at = cur.pos
            m = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)=").match(cur.text, cur.pos)
            if not m:
                raise cur.error("expected NAME=value")
            cur.pos = m.end()
            values[m.group(1)] = cur.rational()
        try:
            current = schema.complete(values, current)
        except ParametricError as exc:
            raise ParseError(str(exc), n, at + 1 if values else 1, source) from None
        out.append(current)
    return out


# -- reports -------------------------------------------------------------------

def _topology_doc(t) -> dict:
    from .topology import reduced_basis

    basis = set(reduced_basis(t).elements)
    return {
        "universe": format_shape(t.universe),
        "opens": [format_shape(u) for u in t.opens],
        "basis": [format_shape(u) for u in t.opens if u in basis],
    }


def _preimage_doc(d, p) -> dict:
    from .mappings import Undefined

    if isinstance(p, Undefined):
        return {"open": format_shape(d), "preimage": None, "undefined": p.reason}
    return {"open": format_shape(d), "preimage": format_shape(p)}


def report_document(report) -> dict:
    """Machine-readable form mirroring the analysis report fields."""
    steps = []
    for s in report.steps:
        steps.append({
            "index": s.index,
            "mapping": s.mapping,
            "continuous": s.continuous,
            "refined": s.refined,
            "added": [format_shape(p) for p in s.added],
            "violations": [
                {"step": v.step, "kind": v.kind,
                 "part": format_shape(v.part) if v.part is not None else None,
                 "detail": v.detail}
                for v in s.violations
            ],
            "preimages": [_preimage_doc(d, p) for d, p in s.preimages],
            "alternatives": list(s.alternatives),
        })
    provenance = []
    for table in report.provenance:
        provenance.append([{"open": format_shape(u), "origin": o} for u, o in table.items()])
    return {
        "format": "shapecont-report 1",
        "continuous": report.continuous,
        "policy": report.policy,
        "mode": report.mode,
        "refinements": report.refinements,
        "shapes": [format_shape(s) for s in report.shapes],
        "initial_topologies": [_topology_doc(t) for t in report.initial_topologies],
        "topologies": [_topology_doc(t) for t in report.topologies],
        "steps": steps,
        "provenance": provenance,
    }


def report_text(report) -> str:
    from .topology import reduced_basis

    verdict = "continuous" if report.continuous else "NOT continuous"
    out = [
        f"analysis: {verdict} (policy {report.policy}, {report.mode} preimages, "
        f"{report.refinements} preimage-derived part(s) added)",
    ]
    for i, (s, t) in enumerate(zip(report.shapes, report.topologies), 1):
        nb = len(reduced_basis(t))
        out.append(f"S{i}: {len(s)} maximal element(s), {len(t)} open part(s), basis {nb}")
        out.append(f"  shape {format_shape(s)}")
        for u in t.opens:
            origin = report.provenance[i - 1].get(u, "")
            out.append(f"  open  {format_shape(u)}  [{origin}]")
    for s in report.steps:
        state = "continuous" if s.continuous else "DISCONTINUOUS"
        extra = " refined" if s.refined else ""
        out.append(f"step {s.index} ({s.mapping}): {state}{extra}")
        for p in s.added:
            out.append(f"  added {format_shape(p)}")
        for v in s.violations:
            part = format_shape(v.part) if v.part is not None else "-"
            out.append(f"  violation {v.kind}: {v.detail}: {part}")
        if s.alternatives:
            out.append(f"  also described by: {' '.join(s.alternatives)}")
    return "\n".join(out) + "\n"


def emit_report(report):
    """Return ``(text, document)`` for an analysis report."""
    return report_text(report), report_document(report)


# -- bundled fixtures ----------------------------------------------------------

def fixture_names() -> list:
    from importlib.resources import files

    return sorted(p.name for p in files("shapecont.data").iterdir() if not p.name.startswith("_"))


def fixture_text(name: str) -> str:
    """Text of a bundled fixture such as ``chevron.trace``."""
    from importlib.resources import files

    path = files("shapecont.data") / name
    if not path.is_file():
        raise ParseError(f"no bundled fixture {name!r}; available: {', '.join(fixture_names())}")
    return path.read_text()
