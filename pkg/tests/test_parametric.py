from fractions import Fraction as Fr

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shapecont import Assignment, instantiate, run_parametric
from shapecont.parametric import Mirror, ParametricError, Schema, Term, assignment_grid, build_trace
from shapecont.textio import fixture_text, parse_assignments, parse_schema

SCHEMA = parse_schema(fixture_text("gable.schema"))


def test_schema_fields():
    assert [t.name for t in SCHEMA.terms] == ["p", "q", "r"]
    assert SCHEMA.anchors == ("c", "d")
    assert len(SCHEMA.shape(SCHEMA.initial_assignment())) == 7


def test_identity_assignment_leaves_shape_fixed():
    g = SCHEMA.initial_assignment()
    rule = instantiate(SCHEMA, g)
    assert rule.lhs == rule.rhs
    run = run_parametric(SCHEMA, [g])
    assert run.trace.final == run.trace.initial


def test_mirror_moves_partner_the_other_way():
    g = SCHEMA.complete({"p": Fr(1, 2)})
    assert g.values["r"] == Fr(7, 2)
    g = SCHEMA.complete({"r": Fr(11, 4)})
    assert g.values["p"] == Fr(5, 4)


def test_constraint_violations_are_named():
    with pytest.raises(ParametricError, match="mirror p r"):
        instantiate(SCHEMA, Assignment({"p": 1, "q": 3, "r": 7 / Fr(2)}))
    with pytest.raises(ParametricError, match="outside its range"):
        SCHEMA.complete({"q": 5})
    with pytest.raises(ParametricError, match="unknown term"):
        SCHEMA.complete({"z": 1})


def test_schema_validation():
    t = Term("p", (0, 0), "h", 0, 1)
    with pytest.raises(ParametricError):
        Term("p", (0, 0), "d", 0, 1)
    with pytest.raises(ParametricError):
        Term("p", (0, 0), "h", 2, 1)
    with pytest.raises(ParametricError):
        Schema((), (t,), (Mirror("p", "x", "p"),))
    with pytest.raises(ParametricError):
        Schema((("a", (0, 0)),), (t,), anchors=("b",))
    with pytest.raises(ParametricError):
        Schema((("p", (0, 0)),), (t,))


def test_grid_gives_distinct_shapes_of_constant_size():
    grid = assignment_grid(SCHEMA, {"p": 3, "q": 3})
    shapes = {SCHEMA.shape(g) for g in grid}
    assert len(shapes) == 9
    assert {len(s) for s in shapes} == {7}


def test_empty_assignment_list():
    run = run_parametric(SCHEMA, [])
    assert run.trace.steps == () and run.report.continuous


def test_bundled_assignments_run_continuously():
    gs = parse_assignments(fixture_text("gable.assignments"), SCHEMA)
    assert len(gs) == 25
    for policy in ("ta", "ta+complement"):
        run = run_parametric(SCHEMA, gs, policy)
        assert run.report.continuous and run.report.refinements == 0


def test_lines_never_enter_the_computation():
    from shapecont import U0

    trace = build_trace(SCHEMA, assignment_grid(SCHEMA, {"p": 2}))
    assert all(s.kind == U0 for s in trace.shapes)


values_p = st.integers(0, 8).map(lambda k: Fr(1, 2) + Fr(k, 8))
values_q = st.integers(0, 6).map(lambda k: Fr(5, 2) + Fr(k, 4))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(values_p, values_q), min_size=1, max_size=4),
       st.sampled_from(["ta", "ta+complement"]))
def test_every_parametric_trace_is_automatically_continuous(moves, policy):
    gs = [SCHEMA.complete({"p": p, "q": q}) for p, q in moves]
    run = run_parametric(SCHEMA, gs, policy)
    assert run.report.continuous
    assert run.report.refinements == 0
