"""Independent reference implementations used as test oracles.

Shapes are turned into sets of pieces: every line is cut at every endpoint
seen on it, and a shape is the set of pieces its segments cover.  Nothing
here uses the library's interval code, so agreement is real evidence.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from shapecont.mappings import Atom, BinOp, parse_formula


def line_key(p, q):
    (x0, y0), (x1, y1) = p, q
    if x0 == x1:
        return ("v", Fraction(x0))
    m = Fraction(y1 - y0) / (x1 - x0)
    return ("s", m, Fraction(y0) - m * x0)


def param(p, key):
    return Fraction(p[1]) if key[0] == "v" else Fraction(p[0])


def raw_segments(shape):
    return [(seg.p0, seg.p1) for seg in shape.elements]


class PieceSpace:
    """Common refinement of a family of segment lists."""

    def __init__(self, families):
        self.cuts = {}
        for segs in families:
            for p, q in segs:
                k = line_key(p, q)
                self.cuts.setdefault(k, set()).update((param(p, k), param(q, k)))
        self.pieces = []
        for k, ts in self.cuts.items():
            ts = sorted(ts)
            self.pieces.extend((k, a, b) for a, b in zip(ts, ts[1:]))

    def of(self, segs) -> frozenset:
        out = set()
        for p, q in segs:
            k = line_key(p, q)
            lo, hi = sorted((param(p, k), param(q, k)))
            for piece in self.pieces:
                if piece[0] == k and lo <= (piece[1] + piece[2]) / 2 <= hi:
                    out.add(piece)
        return frozenset(out)


def space_for(*shapes) -> PieceSpace:
    return PieceSpace([raw_segments(s) for s in shapes])


_SET_OPS = {
    "+": lambda a, b: a | b,
    "-": lambda a, b: a - b,
    ".": lambda a, b: a & b,
    "^": lambda a, b: a ^ b,
}


def eval_sets(expr, env):
    if isinstance(expr, Atom):
        return env[expr.name]
    return _SET_OPS[expr.op](eval_sets(expr.left, env), eval_sets(expr.right, env))


def brute_preimage(formula, s, ta, tb, d, limit=14):
    """Largest subset X of S's pieces with h(X) inside D, or None.

    Every subset of pieces is tried, so this is kept to small shapes.
    """
    h = parse_formula(formula) if isinstance(formula, str) else formula
    sp = space_for(s, ta, tb, d)
    S, A, B, D = (sp.of(raw_segments(v)) for v in (s, ta, tb, d))
    pieces = sorted(S, key=repr)
    if len(pieces) > limit:
        raise ValueError("too many pieces for exhaustive search")
    good = []
    for r in range(len(pieces) + 1):
        for combo in combinations(pieces, r):
            x = frozenset(combo)
            if eval_sets(h, {"x": x, "tA": A, "tB": B, "S": S}) <= D:
                good.append(x)
    if not good:
        return None, sp
    union = frozenset().union(*good)
    return (union if union in good else None), sp


def closure(universe: frozenset, parts) -> frozenset:
    """Smallest family of piece sets holding 0, the universe and *parts*,
    closed under union and intersection."""
    fam = {frozenset(), universe, *parts}
    while True:
        new = {a | b for a in fam for b in fam} | {a & b for a in fam for b in fam}
        if new <= fam:
            return frozenset(fam)
        fam |= new


def pointwise_preimage(h, d: frozenset, env: dict):
    """Every form here acts piece by piece, so the preimage is the set of
    pieces whose own image lies in D (provided h(0) does)."""
    base = dict(env)
    base["x"] = frozenset()
    if not eval_sets(h, base) <= d:
        return None
    out = set()
    for p in env["S"]:
        base["x"] = frozenset([p])
        if eval_sets(h, base) <= d:
            out.add(p)
    return frozenset(out)


def oracle_analysis(trace, mode="ta", explicit=None, final_parts=()):
    """Backward refinement over piece sets, preimaging every open.

    Returns ``(space, topologies)`` with each topology a frozenset of piece
    sets, for shapes 1..n in order.
    """
    ctxs = trace.contexts
    shapes = trace.shapes
    extra = [u for parts in (explicit or {}).values() for u in parts]
    families = [raw_segments(s) for s in shapes]
    families += [raw_segments(c.ta) for c in ctxs] + [raw_segments(c.tb) for c in ctxs]
    families += [raw_segments(u) for u in [*extra, *final_parts]]
    sp = PieceSpace(families)
    of = lambda s: sp.of(raw_segments(s))
    n = len(shapes)
    tops = [None] * n
    last_parts = [of(u) for u in final_parts] + [of(u) for u in (explicit or {}).get(n, ())]
    tops[-1] = closure(of(shapes[-1]), last_parts)
    for i in range(n - 2, -1, -1):
        c, step = ctxs[i], trace.steps[i]
        env = {"S": of(c.s), "tA": of(c.ta), "tB": of(c.tb)}
        parts = [env["tA"]]
        if mode == "ta+complement":
            parts.append(env["S"] - env["tA"])
        parts += [of(u) for u in (explicit or {}).get(i + 1, ())]
        image = eval_sets(step.mapping, {**env, "x": env["S"]})
        for u in tops[i + 1]:
            pre = pointwise_preimage(step.mapping, u & image, env)
            if pre is None:
                raise ValueError(f"undefined preimage at step {i + 1}")
            parts.append(pre)
        tops[i] = closure(env["S"], parts)
    return sp, tops


def as_piece_family(sp, topology) -> frozenset:
    return frozenset(sp.of(raw_segments(u)) for u in topology.opens)
