"""Command line entry point.

Exit codes: 0 success or continuous, 2 discontinuity found, 3 input error,
4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import OpennessPolicy, TraceError, analyze, check_step
from .mappings import AtomOverflow, FormulaError, classify, mapping_describes, parse_formula
from .parametric import ParametricError, run_parametric
from .render import render_svg, sheet_for_topologies
from .shapes import ShapeError
from .textio import (
    ParseError,
    emit_report,
    format_shape,
    format_topologies,
    parse_assignments,
    parse_schema,
    parse_shape,
    parse_topologies,
    parse_trace_document,
)
from .topology import Topology, TopologyOverflow, generate, reduced_basis
from .transforms import TransformGroup, enumerate_matches

EXIT_OK = 0
EXIT_DISCONTINUOUS = 2
EXIT_INPUT = 3
EXIT_CAP = 4


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _shape_arg(arg: str, kind=None):
    """A shape literal given inline or as a file holding one."""
    text = arg if arg.lstrip().startswith(("u0{", "u1{")) else _read(arg)
    lines = [ln.split("#", 1)[0] for ln in text.splitlines()]
    return parse_shape(" ".join(ln for ln in lines if ln.strip()), kind)


def _load_trace(path: str):
    doc = parse_trace_document(_read(path), source=path)
    trace = doc.to_trace()
    trace.validate()
    return doc, trace


def _policy(arg, doc, n_shapes, kind):
    if arg is None:
        return doc.policy_object()
    if arg in ("ta", "ta+complement"):
        return OpennessPolicy(arg)
    blocks = parse_topologies(_read(arg), kind, source=arg)
    parts = {}
    for block in blocks:
        try:
            idx = int(block.label)
        except ValueError:
            raise ParseError(f"{arg}: topology label {block.label!r} is not a shape index") from None
        if not 1 <= idx <= n_shapes:
            raise ParseError(f"{arg}: shape index {idx} is out of range 1..{n_shapes}")
        parts[idx] = [u for u in block.opens if u]
    return OpennessPolicy.explicit(parts)


def _write_svgs(directory: str, name: str, topologies, title: str, links=()) -> None:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    svg = render_svg(sheet_for_topologies(topologies, title=title, links=links))
    (out / f"{name}.svg").write_text(svg)


def _analyze_one(path: str, policy_arg, mode: str, engine: str):
    doc, trace = _load_trace(path)
    policy = _policy(policy_arg, doc, len(trace.shapes), trace.kind)
    return analyze(trace, policy, doc.final_topology(trace), mode=mode, engine=engine)


def _batch_worker(job):
    path, policy_arg, mode, engine = job
    try:
        report = _analyze_one(path, policy_arg, mode, engine)
    except (TopologyOverflow, AtomOverflow) as exc:
        return path, EXIT_CAP, f"resource cap exceeded: {exc}", None
    except ShapeError as exc:
        return path, EXIT_INPUT, str(exc), None
    text, document = emit_report(report)
    code = EXIT_OK if report.continuous else EXIT_DISCONTINUOUS
    return path, code, text, (document, report.topologies)


def cmd_analyze(args) -> int:
    if len(args.trace) == 1:
        path = args.trace[0]
        report = _analyze_one(path, args.policy, args.mode, args.engine)
        text, document = emit_report(report)
        sys.stdout.write(text)
        if args.report:
            Path(args.report).write_text(json.dumps(document, indent=2) + "\n")
        if args.svg:
            _write_svgs(args.svg, Path(path).stem, report.topologies, Path(path).name)
        return EXIT_OK if report.continuous else EXIT_DISCONTINUOUS

    # batch: traces are analyzed in parallel, output keeps argument order and
    # --report names a directory
    from concurrent.futures import ProcessPoolExecutor

    jobs = [(path, args.policy, args.mode, args.engine) for path in args.trace]
    with ProcessPoolExecutor(max_workers=min(len(jobs), args.jobs)) as pool:
        results = list(pool.map(_batch_worker, jobs))
    worst = EXIT_OK
    for path, code, text, payload in results:
        print(f"== {path}")
        if payload is None:
            print(f"shapecont: {path}: {text}", file=sys.stderr)
        else:
            sys.stdout.write(text)
            document, topologies = payload
            if args.report:
                Path(args.report).mkdir(parents=True, exist_ok=True)
                (Path(args.report) / f"{Path(path).stem}.json").write_text(json.dumps(document, indent=2) + "\n")
            if args.svg:
                _write_svgs(args.svg, Path(path).stem, topologies, Path(path).name)
        worst = max(worst, code)
    return worst


def cmd_check(args) -> int:
    doc, trace = _load_trace(args.trace)
    blocks = parse_topologies(_read(args.topologies), trace.kind, source=args.topologies)
    shapes = trace.shapes
    tops = {}
    for block in blocks:
        idx = int(block.label) if block.label.isdigit() else None
        if idx is None or not 1 <= idx <= len(shapes):
            raise ParseError(f"{args.topologies}: topology label {block.label!r} is not a shape index")
        universe = block.universe or shapes[idx - 1]
        if universe != shapes[idx - 1]:
            raise ParseError(f"{args.topologies}: universe of topology {idx} is not shape S{idx}")
        tops[idx] = generate(universe, [u for u in block.opens if u])
    ok = True
    for i, (step, ctx) in enumerate(zip(trace.steps, trace.contexts), 1):
        t_s = tops.get(i, Topology.indiscrete(ctx.s))
        t_n = tops.get(i + 1, Topology.indiscrete(ctx.s_next))
        result = check_step(ctx, step.mapping, t_s, t_n, step=i)
        print(f"step {i} ({step.mapping_text}): {'continuous' if result.continuous else 'DISCONTINUOUS'}")
        for v in result.violations:
            part = format_shape(v.part) if v.part is not None else "-"
            print(f"  violation {v.kind}: {v.detail}: {part}")
        ok = ok and result.continuous
    return EXIT_OK if ok else EXIT_DISCONTINUOUS


def cmd_match(args) -> int:
    a = _shape_arg(args.shape_a)
    s = _shape_arg(args.shape_s, a.kind)
    matches = enumerate_matches(a, s, TransformGroup.named(args.group), determinate=args.determinate)
    print(f"{len(matches)} embedding(s)")
    for m in matches:
        flag = " determinate" if m.determinate else ""
        print(f"transform {m.transform.sextuple_text()}{flag}")
        print(f"  image {format_shape(m.image)}")
    return EXIT_OK


def cmd_classify(args) -> int:
    h = parse_formula(args.formula)
    _, trace = _load_trace(args.trace)
    if not 1 <= args.step <= len(trace.steps):
        raise ParseError(f"step {args.step} is out of range 1..{len(trace.steps)}")
    ctx = trace.contexts[args.step - 1]
    result = classify(h, ctx)
    print(f"{h}: {result.verdict.value}" + (" (vacuous)" if result.vacuous else ""))
    if result.detail:
        print(f"  {result.detail}")
    for w in result.witness or ():
        print(f"  witness {format_shape(w)}")
    print(f"  describes step {args.step}: {'yes' if mapping_describes(h, ctx) else 'no'}")
    return EXIT_OK


def cmd_basis(args) -> int:
    blocks = parse_topologies(_read(args.topology), source=args.topology)
    tops = []
    for block in blocks:
        universe = block.universe
        if universe is None:
            if not block.opens:
                raise ParseError(f"topology {block.label}: needs a universe or open parts")
            universe = block.opens[0]
            for u in block.opens[1:]:
                universe = universe + u
        tops.append(generate(universe, block.opens))
    for block, t in zip(blocks, tops):
        basis = reduced_basis(t)
        print(f"topology {block.label}: {len(t)} open part(s), reduced basis of {len(basis)}"
              + (", boolean" if t.is_boolean() else ""))
        for i, b in enumerate(basis, 1):
            print(f"  {i}: {format_shape(b)}")
    if args.emit:
        Path(args.emit).write_text(format_topologies(tops, [b.label for b in blocks]))
    return EXIT_OK


def cmd_parametric(args) -> int:
    schema = parse_schema(_read(args.schema), source=args.schema)
    assignments = parse_assignments(_read(args.assignments), schema, source=args.assignments)
    run = run_parametric(schema, assignments, policy=args.policy)
    text, document = emit_report(run.report)
    sys.stdout.write(text)
    if args.report:
        Path(args.report).write_text(json.dumps(document, indent=2) + "\n")
    if args.svg:
        # links are drawn from the initial positions as annotations only
        pos = schema.positions(schema.initial_assignment())
        links = [(pos[a], pos[b]) for a, b in schema.links]
        _write_svgs(args.svg, Path(args.schema).stem, run.report.topologies,
                    Path(args.schema).name, links)
    return EXIT_OK if run.report.continuous else EXIT_DISCONTINUOUS


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors, not discontinuities
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shapecont", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="refine topologies backward over a trace")
    a.add_argument("trace", nargs="+", help="one trace, or several for a parallel batch")
    a.add_argument("--policy", help="ta, ta+complement, or a topology document of open parts")
    a.add_argument("--report", help="write the JSON report here (a directory in batch mode)")
    a.add_argument("--svg", help="write an SVG sheet into this directory")
    a.add_argument("--mode", choices=("basis", "full"), default="basis")
    a.add_argument("--engine", choices=("closed", "oracle"), default="closed")
    a.add_argument("--jobs", type=int, default=4, help="worker processes in batch mode")
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("check", help="check given topologies for continuity")
    c.add_argument("trace")
    c.add_argument("topologies")
    c.set_defaults(func=cmd_check)

    m = sub.add_parser("match", help="enumerate embeddings of one shape in another")
    m.add_argument("shape_a", help="shape literal or file")
    m.add_argument("shape_s", help="shape literal or file")
    m.add_argument("--determinate", action="store_true")
    m.add_argument("--group", default="isometries",
                   choices=("identity", "translations", "isometries", "similarities"))
    m.set_defaults(func=cmd_match)

    k = sub.add_parser("classify", help="classify a mapping form on one step")
    k.add_argument("formula", help="formula text or catalog id such as T1.9")
    k.add_argument("trace")
    k.add_argument("step", type=int)
    k.set_defaults(func=cmd_classify)

    b = sub.add_parser("basis", help="reduced basis of each topology in a document")
    b.add_argument("topology")
    b.add_argument("--emit", help="write the closed topologies here")
    b.set_defaults(func=cmd_basis)

    r = sub.add_parser("parametric", help="run a parametric point computation")
    r.add_argument("schema")
    r.add_argument("assignments")
    r.add_argument("--policy", choices=("ta", "ta+complement"), default="ta")
    r.add_argument("--report")
    r.add_argument("--svg")
    r.set_defaults(func=cmd_parametric)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (TopologyOverflow, AtomOverflow) as exc:
        print(f"shapecont: resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ShapeError, ParametricError, FormulaError, TraceError) as exc:
        print(f"shapecont: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
