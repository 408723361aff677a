"""Mapping forms ``h: S -> S+`` describing one rule application.

A form is an expression over the input part ``x``, the placed sides ``tA``
and ``tB`` and the host shape ``S``, combined with ``+`` (sum), ``-``
(difference), ``.`` (product) and ``^`` (symmetric difference).  Product
binds tighter than the other three, which associate to the left.  Inside
``t( ... )`` the letters ``A`` and ``B`` stand for ``tA`` and ``tB``, so
``x - t(A ^ B)`` is the same form as ``x - (tA ^ tB)``.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .shapes import (
    Shape,
    ShapeError,
    difference,
    part_of,
    product,
    sum_,
    sym_difference,
    total,
)

X, TA, TB, HOST = "x", "tA", "tB", "S"
ATOMS = (X, TA, TB, HOST)

_OPS = {"+": sum_, "-": difference, ".": product, "^": sym_difference}


class FormulaError(ShapeError):
    def __init__(self, message, column: Optional[int] = None):
        super().__init__(message if column is None else f"column {column}: {message}")
        self.column = column


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"

    def __str__(self):
        return f"{_wrap(self.left, self.op, False)} {self.op} {_wrap(self.right, self.op, True)}"


Expr = Union[Atom, BinOp]


def _wrap(e: Expr, parent: str, right: bool) -> str:
    if isinstance(e, Atom):
        return str(e)
    tight = e.op == "."
    if parent == "." and not tight:
        return f"({e})"
    if right and (e.op == parent or (not tight and parent != ".")):
        return f"({e})"
    return str(e)


def uses(e: Expr, name: str) -> bool:
    if isinstance(e, Atom):
        return e.name == name
    return uses(e.left, name) or uses(e.right, name)


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(tA|tB|x|S|t|A|B)|([-+.^()]))")


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            at = len(text) - len(text[pos:].lstrip())
            raise FormulaError(f"unexpected {text[at:at + 8]!r}", at + 1)
        start = m.start(1) if m.group(1) else m.start(2)
        out.append((m.group(1) or m.group(2), start + 1))
        pos = m.end()
    out.append(("<end>", len(text) + 1))
    return out


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.inside_t = False

    def peek(self):
        return self.toks[self.i][0]

    def take(self, expected=None):
        tok, col = self.toks[self.i]
        if expected is not None and tok != expected:
            raise FormulaError(f"expected {expected!r}, found {tok!r}", col)
        self.i += 1
        return tok, col

    def expr(self):
        left = self.term()
        while self.peek() in ("+", "-", "^"):
            op, _ = self.take()
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.factor()
        while self.peek() == ".":
            self.take()
            left = BinOp(".", left, self.factor())
        return left

    def factor(self):
        tok, col = self.take()
        if tok == "(":
            e = self.expr()
            self.take(")")
            return e
        if tok == "t":
            if self.inside_t:
                raise FormulaError("nested t( ... )", col)
            self.take("(")
            self.inside_t = True
            e = self.expr()
            self.inside_t = False
            self.take(")")
            return e
        if tok in ("A", "B"):
            if not self.inside_t:
                raise FormulaError(f"{tok} is only meaningful inside t( ... )", col)
            return Atom(TA if tok == "A" else TB)
        if tok in ATOMS:
            if self.inside_t:
                raise FormulaError(f"{tok} cannot appear inside t( ... )", col)
            return Atom(tok)
        raise FormulaError(f"expected a shape name or '(', found {tok!r}", col)


def parse_formula(text: str) -> Expr:
    """Parse formula text, or look up a catalog id such as ``T1.9``."""
    key = text.strip()
    if key in CATALOG_IDS:
        return CATALOG_IDS[key]
    if re.fullmatch(r"T\d+\.\d+", key):
        raise FormulaError(f"unknown catalog id {key!r}; known ids are T1.1 .. T1.{len(CATALOG)}")
    p = _Parser(text)
    e = p.expr()
    tok, col = p.toks[p.i]
    if tok != "<end>":
        raise FormulaError(f"unexpected {tok!r} after a complete formula", col)
    return e


def catalog_id(e: Expr) -> Optional[str]:
    for key, form in CATALOG_IDS.items():
        if form == e:
            return key
    return None


# -- catalogue of suitable forms ------------------------------------------

_CATALOG_TEXT = [
    "x",
    "x - t(A - B)",
    "x . t(A + B)",
    "x - t(A . B)",
    "x - t(B)",
    "x - t(A ^ B)",
    "x . t(B)",
    "x . t(A ^ B)",
    "x - t(A)",
    "x - t(A + B)",
    "x . t(B - A)",
]
CATALOG_IDS: dict = {}
CATALOG: list = []
for _n, _text in enumerate(_CATALOG_TEXT, 1):
    _p = _Parser(_text)
    _e = _p.expr()
    CATALOG.append(_e)
    CATALOG_IDS[f"T1.{_n}"] = _e


def catalog() -> list:
    return list(CATALOG)


PRODUCTION = parse_formula("(x - tA) + tB")


# -- step context and evaluation -------------------------------------------

@dataclass(frozen=True)
class StepContext:
    s: Shape
    s_next: Shape
    ta: Shape
    tb: Shape

    def __post_init__(self):
        if not part_of(self.ta, self.s):
            raise ShapeError("t(A) is not a part of S; the match is not real")
        expected = sum_(difference(self.s, self.ta), self.tb)
        if expected != self.s_next:
            raise ShapeError("S' differs from (S - t(A)) + t(B)")

    @classmethod
    def of(cls, s: Shape, ta: Shape, tb: Shape) -> "StepContext":
        return cls(s, sum_(difference(s, ta), tb), ta, tb)


def evaluate(h: Expr, x: Shape, ctx: StepContext) -> Shape:
    if not part_of(x, ctx.s):
        raise ShapeError("the input part is not a part of S")
    return _eval(h, {X: x, TA: ctx.ta, TB: ctx.tb, HOST: ctx.s})


def _eval(e: Expr, env: dict) -> Shape:
    if isinstance(e, Atom):
        return env[e.name]
    return _OPS[e.op](_eval(e.left, env), _eval(e.right, env))


def constant_value(e: Expr, ctx: StepContext) -> Shape:
    """Value of an expression that does not mention ``x``."""
    return _eval(e, {TA: ctx.ta, TB: ctx.tb, HOST: ctx.s})


def mapping_describes(h: Expr, ctx: StepContext) -> bool:
    return part_of(evaluate(h, ctx.s, ctx), ctx.s_next)


# -- atom spaces for exhaustive checks -------------------------------------

class AtomOverflow(ShapeError):
    pass


DEFAULT_MAX_UNITS = 18


@dataclass
class AtomSpace:
    """Finite Boolean sublattice spanned by a list of shapes.

    ``units`` are the pieces whose sums are enumerated.  With ``fine=True``
    they are the atoms of :func:`atomize`; otherwise atoms with the same
    membership pattern across the context are merged first.  Every form in
    the formula language acts pointwise, so the merged units lose nothing
    for the questions asked here and keep the enumeration small.
    """

    context: list
    within: Shape
    fine: bool = False
    max_units: int = DEFAULT_MAX_UNITS
    units: list = field(init=False)

    def __post_init__(self):
        from .shapes import atomize

        atoms = [a for a in atomize([self.within, *self.context]) if part_of(a, self.within)]
        if self.fine:
            self.units = atoms
        else:
            groups: dict = {}
            for a in atoms:
                sig = tuple(part_of(a, c) for c in self.context)
                groups.setdefault(sig, []).append(a)
            kind = self.within.kind
            self.units = [total(g, kind) for _, g in sorted(groups.items())]
        if len(self.units) > self.max_units:
            raise AtomOverflow(
                f"{len(self.units)} units exceed the enumeration bound of {self.max_units}"
            )

    def sums(self):
        """Every sum of units, paired with its bitmask."""
        kind = self.within.kind
        n = len(self.units)
        for mask in range(1 << n):
            yield mask, total((self.units[i] for i in range(n) if mask >> i & 1), kind)


# -- classification ----------------------------------------------------------

class Verdict(enum.Enum):
    SUITABLE = "Suitable"
    NONEMPTY_OUTPUT = "NotContinuous_NonemptyOutput"
    CONSTANT = "NotContinuous_Constant"
    ORDER_REVERSING = "Excluded_OrderReversing"


@dataclass(frozen=True)
class Suitability:
    verdict: Verdict
    witness: Optional[tuple] = None
    vacuous: bool = False
    detail: str = ""

    @property
    def suitable(self) -> bool:
        return self.verdict is Verdict.SUITABLE


def classify(h: Expr, ctx: StepContext, fine: bool = False) -> Suitability:
    """Sort a form into suitable or one of the three excluded kinds.

    Checks run in this order: constant output, order preservation over the
    atomised sublattice of ``S``, and finally a nonempty image of the empty
    shape.
    """
    space = AtomSpace([ctx.ta, ctx.tb], ctx.s, fine=fine)
    values = {}
    sums = list(space.sums())
    for mask, x in sums:
        values[mask] = evaluate(h, x, ctx)
    outputs = set(values.values())
    zero = Shape.empty(ctx.s.kind)
    if len(outputs) == 1:
        (y0,) = outputs
        if y0:
            return Suitability(Verdict.CONSTANT, (y0,), detail="outputs the same nonempty part for every input")
        return Suitability(Verdict.SUITABLE, vacuous=True, detail="constant empty output")
    by_mask = dict(sums)
    for m1, m2 in itertools.product(values, repeat=2):
        if m1 != m2 and m1 & m2 == m1 and not part_of(values[m1], values[m2]):
            return Suitability(
                Verdict.ORDER_REVERSING,
                (by_mask[m1], by_mask[m2]),
                detail="x <= y but h(x) is not a part of h(y)",
            )
    h0 = values[0]
    if h0 != zero:
        return Suitability(Verdict.NONEMPTY_OUTPUT, (h0,), detail="h(0) is not empty")
    return Suitability(Verdict.SUITABLE)


# -- preimages -----------------------------------------------------------------

class Undefined:
    """No part of ``S`` maps into the requested part."""

    __slots__ = ("reason",)

    def __init__(self, reason: str = ""):
        self.reason = reason

    def __bool__(self):
        return False

    def __eq__(self, other):
        return isinstance(other, Undefined)

    def __hash__(self):
        return hash(Undefined)

    def __repr__(self):
        return f"Undefined({self.reason!r})"


def closed_form(h: Expr):
    """Return ``(kind, K)`` for ``x - K`` / ``x . K`` / ``x``, else None."""
    if h == Atom(X):
        return ("identity", None)
    if isinstance(h, BinOp) and h.op in ("-", "."):
        if h.left == Atom(X) and not uses(h.right, X):
            return ("minus" if h.op == "-" else "times", h.right)
        if h.op == "." and h.right == Atom(X) and not uses(h.left, X):
            return ("times", h.left)
    return None


def preimage(h: Expr, d: Shape, ctx: StepContext) -> Union[Shape, Undefined]:
    """Largest part of ``S`` whose image under *h* is a part of *d*.

    Forms ``x - K`` use ``S.K + (S - K).d``; forms ``x . K`` use
    ``(S - K) + S.K.d``; anything else goes to :func:`oracle_preimage`.
    """
    form = closed_form(h)
    if form is None:
        return oracle_preimage(h, d, ctx)
    kind, k = form
    s = ctx.s
    if kind == "identity":
        return product(s, d)
    kv = constant_value(k, ctx)
    if kind == "minus":
        return sum_(product(s, kv), product(difference(s, kv), d))
    return sum_(difference(s, kv), product(product(s, kv), d))


def oracle_preimage(h: Expr, d: Shape, ctx: StepContext, fine: bool = False,
                    max_units: int = DEFAULT_MAX_UNITS) -> Union[Shape, Undefined]:
    """Brute-force preimage over every sum of atoms of ``S``."""
    space = AtomSpace([ctx.ta, ctx.tb, d], ctx.s, fine=fine, max_units=max_units)
    good = []
    for mask, x in space.sums():
        if part_of(evaluate(h, x, ctx), d):
            good.append((mask, x))
    if not good:
        return Undefined("no part of S maps into the given part")
    whole = 0
    for mask, _ in good:
        whole |= mask
    for mask, x in good:
        if mask == whole:
            return x
    maximal = [x for m, x in good if not any(m2 != m and m2 & m == m for m2, _ in good)]
    if len(maximal) == 1:
        return maximal[0]
    return Undefined(f"{len(maximal)} incomparable maximal parts map into the given part")
