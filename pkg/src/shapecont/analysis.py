"""Retrospective continuity analysis of a recorded computation.

The analysis walks a trace backward.  The last shape gets its given
topology (indiscrete by default); each earlier shape starts from the parts
the openness policy selects and is then refined by the preimages of the
next topology's opens, pushed into ``h(S)`` first.  Only reduced-basis
elements are preimaged in the default mode, plus the empty part, whose
preimage is not an empty sum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .mappings import (
    CATALOG_IDS,
    Expr,
    StepContext,
    Undefined,
    catalog_id,
    evaluate,
    mapping_describes,
    oracle_preimage,
    preimage,
)
from .shapes import Shape, ShapeError, difference, part_of, product, sum_
from .topology import Topology, generate, reduced_basis
from .transforms import Transform, apply, is_determinate_image


class TraceError(ShapeError):
    pass


class MappingMismatch(TraceError):
    """The declared mapping does not describe its rule application."""


@dataclass(frozen=True)
class Rule:
    lhs: Shape
    rhs: Shape
    determinate: bool = False
    name: str = ""

    def __post_init__(self):
        if not self.lhs:
            raise TraceError(f"rule {self.name or '?'}: left side must be nonempty")
        self.lhs._check(self.rhs)


@dataclass(frozen=True)
class TraceStep:
    rule: Rule
    transform: Transform
    mapping: Expr
    mapping_label: str = ""

    @property
    def mapping_text(self) -> str:
        return self.mapping_label or str(self.mapping)


@dataclass(frozen=True)
class Trace:
    initial: Shape
    steps: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def kind(self) -> str:
        return self.initial.kind

    @property
    def shapes(self) -> list:
        return [c.s for c in self.contexts] + [self.final] if self.steps else [self.initial]

    @property
    def final(self) -> Shape:
        return self.contexts[-1].s_next if self.steps else self.initial

    @property
    def contexts(self) -> list:
        try:
            return self._contexts
        except AttributeError:
            pass
        out = []
        s = self.initial
        for i, step in enumerate(self.steps, 1):
            ta = apply(step.transform, step.rule.lhs)
            tb = apply(step.transform, step.rule.rhs)
            if not part_of(ta, s):
                raise TraceError(f"step {i}: t(A) is not a part of the current shape")
            ctx = StepContext.of(s, ta, tb)
            out.append(ctx)
            s = ctx.s_next
        object.__setattr__(self, "_contexts", out)
        return out

    def validate(self) -> None:
        """Raise if a match is not real, not determinate when required, or
        if a declared mapping does not describe its step."""
        for i, (step, ctx) in enumerate(zip(self.steps, self.contexts), 1):
            if step.rule.determinate and not is_determinate_image(ctx.ta, ctx.s):
                raise TraceError(
                    f"step {i}: determinate rule {step.rule.name or ''} matches a "
                    f"part that is not made of maximal elements"
                )
            if not mapping_describes(step.mapping, ctx):
                raise MappingMismatch(
                    f"step {i}: h(S) is not a part of S' under {step.mapping_text}"
                )


def added_parts(ctx: StepContext):
    """Split ``S'`` into the kept part, the re-added shared part and the new part."""
    kept = difference(ctx.s, ctx.ta)
    re_added = product(ctx.s, ctx.tb)
    new = difference(ctx.tb, ctx.s)
    return kept, re_added, new


# -- openness policies ---------------------------------------------------------

@dataclass(frozen=True)
class OpennessPolicy:
    """Which parts of each shape are kept open before refinement.

    ``mode`` is ``"ta"``, ``"ta+complement"`` or ``"explicit"``.  Explicit
    parts are keyed by 1-based shape index, are added to ``t(A)`` and may
    include the final shape.
    """

    mode: str = "ta"
    parts: tuple = ()   # ((index, (Shape, ...)), ...)

    def __post_init__(self):
        if self.mode not in ("ta", "ta+complement", "explicit"):
            raise TraceError(f"unknown openness policy {self.mode!r}")

    @classmethod
    def explicit(cls, parts: dict) -> "OpennessPolicy":
        return cls("explicit", tuple(sorted((i, tuple(v)) for i, v in parts.items())))

    def for_shape(self, index: int, ctx: Optional[StepContext]) -> list:
        if self.mode == "explicit":
            # the matched part is mandatory; listed parts come on top of it
            given = list(dict(self.parts).get(index, ()))
            return given if ctx is None else [ctx.ta, *given]
        if ctx is None:
            return []
        if self.mode == "ta":
            return [ctx.ta]
        return [ctx.ta, difference(ctx.s, ctx.ta)]


# -- single step check ---------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    step: int
    kind: str
    part: Optional[Shape]
    detail: str


@dataclass
class StepCheck:
    continuous: bool
    violations: list
    preimages: dict   # induced open part -> preimage (or Undefined)


def induced_opens(t_next: Topology, image: Shape) -> list:
    return t_next.restricted(image)


def check_step(ctx: StepContext, h: Expr, t_s: Topology, t_next: Topology,
               step: int = 0) -> StepCheck:
    """Both continuity conditions for one rule application."""
    if t_s.universe != ctx.s or t_next.universe != ctx.s_next:
        raise TraceError(f"step {step}: topologies are not on S and S'")
    image = evaluate(h, ctx.s, ctx)
    if not part_of(image, ctx.s_next):
        raise MappingMismatch(f"step {step}: h(S) is not a part of S'")
    violations = []
    if ctx.ta not in t_s:
        violations.append(Violation(step, "match-not-open", ctx.ta, "t(A) is not open in the topology for S"))
    pre = {}
    for d in induced_opens(t_next, image):
        p = preimage(h, d, ctx)
        pre[d] = p
        if isinstance(p, Undefined):
            violations.append(Violation(step, "undefined-preimage", d, p.reason))
        elif p not in t_s:
            violations.append(Violation(step, "preimage-not-open", p, "preimage of an open part is not open"))
    defined = {d: p for d, p in pre.items() if not isinstance(p, Undefined)}
    keys = list(defined)
    for i, d in enumerate(keys):
        for e in keys[i:]:
            for op, name in ((sum_, "sum"), (product, "product")):
                de = op(d, e)
                if de in defined and defined[de] != op(defined[d], defined[e]):
                    violations.append(Violation(
                        step, "not-homomorphic", de,
                        f"preimage does not preserve the {name} of two open parts",
                    ))
    return StepCheck(not violations, violations, pre)


# -- whole-trace analysis ------------------------------------------------------

@dataclass
class StepReport:
    index: int
    mapping: str
    continuous: bool
    refined: bool
    added: list          # preimage-derived parts that were not already open
    violations: list
    preimages: list      # (open part of S+, preimage) pairs that were computed
    alternatives: list   # catalog ids that also describe the step


@dataclass
class AnalysisReport:
    shapes: list
    policy: str
    mode: str
    initial_topologies: list
    topologies: list
    steps: list
    provenance: list     # per shape: {open part: origin}

    @property
    def continuous(self) -> bool:
        return all(s.continuous for s in self.steps)

    @property
    def violations(self) -> list:
        return [v for s in self.steps for v in s.violations]

    @property
    def refinements(self) -> int:
        return sum(len(s.added) for s in self.steps)


def _origin_table(t: Topology, seeds: dict) -> dict:
    out = {}
    for u in t.opens:
        if u in seeds:
            out[u] = seeds[u]
        elif not u:
            out[u] = "empty"
        elif u == t.universe:
            out[u] = "universe"
        else:
            out[u] = "closure"
    return out


def analyze(
    trace: Trace,
    policy: Union[OpennessPolicy, str, None] = None,
    final_topology: Optional[Topology] = None,
    mode: str = "basis",
    engine: str = "closed",
    max_opens: Optional[int] = None,
) -> AnalysisReport:
    """Refine topologies backward until every step is continuous.

    ``mode`` selects which opens of the next topology are preimaged
    (``"basis"`` or ``"full"``); ``engine`` selects closed-form preimages
    (``"closed"``) or the brute-force ``"oracle"``.
    """
    if policy is None:
        policy = OpennessPolicy("ta")
    elif isinstance(policy, str):
        policy = OpennessPolicy(policy)
    if mode not in ("basis", "full"):
        raise TraceError(f"unknown analysis mode {mode!r}")
    if engine not in ("closed", "oracle"):
        raise TraceError(f"unknown preimage engine {engine!r}")
    pre_fn = preimage if engine == "closed" else oracle_preimage

    contexts = trace.contexts
    shapes = trace.shapes
    n = len(shapes)
    initial: list = [None] * n
    refined: list = [None] * n
    provenance: list = [None] * n
    reports: list = [None] * len(contexts)

    last = shapes[-1]
    if final_topology is not None:
        if final_topology.universe != last:
            raise TraceError("final topology is not on the last shape")
        t_last = final_topology
        seeds = {u: "given" for u in final_topology.opens if u and u != last}
    else:
        extra = policy.for_shape(n, None)
        t_last = generate(last, extra, max_opens)
        seeds = {u: "policy" for u in extra}
    initial[-1] = refined[-1] = t_last
    provenance[-1] = _origin_table(t_last, seeds)

    for i in range(len(contexts) - 1, -1, -1):
        ctx = contexts[i]
        step = trace.steps[i]
        h = step.mapping
        t_next = refined[i + 1]
        if not mapping_describes(h, ctx):
            raise MappingMismatch(f"step {i + 1}: h(S) is not a part of S' under {step.mapping_text}")
        parts = policy.for_shape(i + 1, ctx)
        t_i = generate(ctx.s, parts, max_opens)
        initial[i] = t_i
        seeds = {u: "policy" for u in parts}

        image = evaluate(h, ctx.s, ctx)
        if mode == "basis":
            targets = [product(b, image) for b in reduced_basis(t_next).elements]
            targets.append(Shape.empty(ctx.s.kind))
        else:
            targets = list(t_next.opens)
            targets = [product(d, image) for d in targets]
        targets = sorted(set(targets), key=Shape.sort_key)

        computed = []
        violations = []
        new_parts = []
        for d in targets:
            p = pre_fn(h, d, ctx)
            computed.append((d, p))
            if isinstance(p, Undefined):
                violations.append(Violation(i + 1, "undefined-preimage", d, p.reason))
                continue
            if p not in t_i and p not in new_parts:
                new_parts.append(p)
                seeds.setdefault(p, f"preimage of an open part of shape {i + 2} (step {i + 1})")
        t_ref = t_i.refine(new_parts, max_opens)
        refined[i] = t_ref
        provenance[i] = _origin_table(t_ref, seeds)

        check = check_step(ctx, h, t_ref, t_next, step=i + 1)
        seen = {(v.kind, v.part) for v in violations}
        violations.extend(v for v in check.violations if (v.kind, v.part) not in seen)
        alternatives = [key for key, form in CATALOG_IDS.items() if mapping_describes(form, ctx)]
        reports[i] = StepReport(
            index=i + 1,
            mapping=step.mapping_text,
            continuous=not violations,
            refined=t_ref != t_i,
            added=[p for p in new_parts if p not in t_i],
            violations=violations,
            preimages=computed,
            alternatives=alternatives,
        )

    return AnalysisReport(
        shapes=shapes,
        policy=policy.mode,
        mode=mode,
        initial_topologies=initial,
        topologies=refined,
        steps=reports,
        provenance=provenance,
    )
