import pytest

from shapecont import (
    PRODUCTION,
    OpennessPolicy,
    Rule,
    StepContext,
    Topology,
    Trace,
    TraceStep,
    Transform,
    added_parts,
    analyze,
    check_step,
    evaluate,
    generate,
    mapping_describes,
    parse_formula,
    part_of,
    preimage,
    product,
)
from shapecont.analysis import MappingMismatch, TraceError
from shapecont.textio import fixture_text, parse_shape, parse_trace, parse_trace_document

from oracles import as_piece_family, oracle_analysis

P = parse_shape
H1 = parse_formula("x - tA")
TRACES = ["chevron", "squares", "triangle"]


def load(name):
    return parse_trace(fixture_text(f"{name}.trace"))


def test_identity_mapping_with_equal_topologies_is_continuous():
    s = P("u1{ (0 0 2 0) (0 0 0 2) }")
    ta = P("u1{ (0 0 1 0) }")
    ctx = StepContext.of(s, ta, ta)
    t = generate(s, [ta])
    assert check_step(ctx, parse_formula("x"), t, t).continuous


def test_chevron_first_step_names_the_missing_open():
    tr = load("chevron")
    ctx = tr.contexts[0]
    t1 = generate(ctx.s, [ctx.ta])
    t2 = generate(ctx.s_next, [tr.contexts[1].ta])
    res = check_step(ctx, H1, t1, t2, step=1)
    assert not res.continuous
    (v,) = res.violations
    assert v.kind == "preimage-not-open" and v.step == 1
    missing = preimage(H1, product(tr.contexts[1].ta, ctx.s_next), ctx)
    assert v.part == missing


def test_chevron_second_step_needs_no_refinement():
    rep = analyze(load("chevron"), "ta")
    assert rep.continuous
    assert [s.refined for s in rep.steps] == [True, False]
    assert rep.topologies[1:] == rep.initial_topologies[1:]
    (added,) = rep.steps[0].added
    # the added part splits the two outer arms of the left chevron where the
    # cross meets them
    assert part_of(P("u1{ (-1 0 0 1) (0 -1 1 -2) }"), added)
    assert not part_of(P("u1{ (-1 0 1 2) }"), added)


def test_mapping_mismatch_is_rejected():
    text = fixture_text("squares.trace").replace(
        "step R2 transform 1 0 0 1 4 0 mapping x - t(A ^ B)",
        "step R2 transform 1 0 0 1 4 0 mapping x - tB", 1)
    tr = parse_trace(text)
    with pytest.raises(MappingMismatch):
        tr.validate()
    with pytest.raises(MappingMismatch):
        analyze(tr)


def test_determinate_rule_on_emergent_part_is_rejected():
    sq = P("u1{ (0 0 1 0) (1 0 1 1) (0 1 1 1) (0 0 0 1) }")
    host = P("u1{ (0 0 3 0) (0 1 3 1) (0 0 0 1) (1 0 1 1) }")
    tr = Trace(host, [TraceStep(Rule(sq, P("u1{}"), determinate=True), Transform.identity(), H1)])
    with pytest.raises(TraceError):
        tr.validate()


def test_rule_needs_nonempty_left_side():
    with pytest.raises(TraceError):
        Rule(P("u1{}"), P("u1{ (0 0 1 0) }"))


def test_step_must_match():
    tr = Trace(P("u1{ (0 0 1 0) }"), [TraceStep(Rule(P("u1{ (5 5 6 5) }"), P("u1{}")), Transform.identity(), H1)])
    with pytest.raises(TraceError):
        tr.contexts


def test_production_mapping_is_never_continuous():
    tr = load("chevron")
    steps = tuple(TraceStep(s.rule, s.transform, PRODUCTION) for s in tr.steps)
    rep = analyze(Trace(tr.initial, steps))
    assert not rep.continuous
    kinds = {v.kind for v in rep.violations}
    assert "undefined-preimage" in kinds
    # the witness is the empty part of the next shape
    assert any(v.kind == "undefined-preimage" and not v.part for v in rep.violations)


def test_added_parts():
    s = P("u1{ (0 0 2 0) (0 0 0 2) }")
    ta = P("u1{ (0 0 2 0) }")
    kept, re_added, new = added_parts(StepContext.of(s, ta, P("u1{}")))
    assert kept == P("u1{ (0 0 0 2) }") and not re_added and not new
    kept, re_added, new = added_parts(StepContext.of(s, ta, ta))
    assert re_added == ta and not new
    ctx = load("triangle").contexts[0]
    kept, re_added, new = added_parts(ctx)
    assert re_added and new
    assert kept + re_added + new == ctx.s_next


@pytest.mark.parametrize("name", TRACES)
@pytest.mark.parametrize("policy", ["ta", "ta+complement"])
def test_basis_mode_equals_full_mode_and_oracle(name, policy):
    tr = load(name)
    basis = analyze(tr, policy)
    assert analyze(tr, policy, mode="full").topologies == basis.topologies
    assert analyze(tr, policy, engine="oracle").topologies == basis.topologies
    sp, expected = oracle_analysis(tr, policy)
    assert [as_piece_family(sp, t) for t in basis.topologies] == list(expected)


@pytest.mark.parametrize("name", TRACES)
def test_refinement_is_monotone_and_a_fixpoint(name):
    tr = load(name)
    rep = analyze(tr, "ta")
    for before, after in zip(rep.initial_topologies, rep.topologies):
        assert set(before.opens) <= set(after.opens)
    again = analyze(tr, OpennessPolicy.explicit(
        {i: [u for u in t.opens if u] for i, t in enumerate(rep.topologies, 1)}))
    assert again.continuous and again.refinements == 0
    assert again.topologies == rep.topologies


@pytest.mark.parametrize("name", TRACES)
def test_preimage_map_preserves_order_and_top(name):
    tr = load(name)
    rep = analyze(tr, "ta+complement")
    for i, (step, ctx) in enumerate(zip(tr.steps, tr.contexts)):
        image = evaluate(step.mapping, ctx.s, ctx)
        assert preimage(step.mapping, image, ctx) == ctx.s
        opens = rep.topologies[i + 1].restricted(image)
        pre = {d: preimage(step.mapping, d, ctx) for d in opens}
        for d in opens:
            for e in opens:
                if part_of(d, e):
                    assert part_of(pre[d], pre[e])


def test_final_topology_must_live_on_last_shape():
    tr = load("chevron")
    with pytest.raises(TraceError):
        analyze(tr, final_topology=Topology.indiscrete(tr.initial))


def test_given_topologies_on_last_two_shapes():
    doc = parse_trace_document(fixture_text("squares_given.trace"))
    tr = doc.to_trace()
    final = doc.final_topology(tr)
    assert len([u for u in final.opens if u]) == 8
    rep = analyze(tr, doc.policy_object(), final)
    assert rep.continuous
    assert analyze(tr, doc.policy_object(), final, mode="full").topologies == rep.topologies
    sp, expected = oracle_analysis(tr, "ta", dict(doc.policy_object().parts), doc.final_opens)
    assert [as_piece_family(sp, t) for t in rep.topologies] == list(expected)


def test_unknown_options():
    tr = load("triangle")
    with pytest.raises(TraceError):
        analyze(tr, mode="some")
    with pytest.raises(TraceError):
        analyze(tr, engine="guess")
    with pytest.raises(TraceError):
        OpennessPolicy("everything")
