import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from shapecont import (
    CATALOG_IDS,
    PRODUCTION,
    Shape,
    StepContext,
    Undefined,
    Verdict,
    classify,
    closed_form,
    evaluate,
    mapping_describes,
    oracle_preimage,
    parse_formula,
    preimage,
    product,
)
from shapecont.mappings import AtomOverflow, AtomSpace, FormulaError, catalog, catalog_id
from shapecont.textio import parse_shape

from oracles import brute_preimage, raw_segments
from strategies import nonempty_u1, u1_shapes

P = parse_shape

# a host with a rule that erases one bar and draws another that overlaps S
S = P("u1{ (0 0 4 0) (0 0 0 2) (0 2 4 2) }")
TA = P("u1{ (0 0 2 0) }")
TB = P("u1{ (0 2 2 2) (1 1 3 1) }")
CTX = StepContext.of(S, TA, TB)


def test_parse_precedence_and_printing():
    e = parse_formula("x - tA . tB + S")
    assert str(e) == "x - tA . tB + S"
    assert parse_formula("x - (tA . tB) + S") == e
    assert str(parse_formula("x - (tA - tB)")) == "x - (tA - tB)"
    assert parse_formula("x - t(A ^ B)") == parse_formula("x - (tA ^ tB)")


@pytest.mark.parametrize("text,col", [("x - ", 5), ("x - t(A", 8), ("x ? tA", 3), ("A + x", 1), ("t(x)", 3)])
def test_parse_errors_carry_columns(text, col):
    with pytest.raises(FormulaError) as info:
        parse_formula(text)
    assert info.value.column == col


def test_catalog_has_eleven_forms_in_order():
    texts = [str(e) for e in catalog()]
    assert texts == [
        "x", "x - (tA - tB)", "x . (tA + tB)", "x - tA . tB", "x - tB", "x - (tA ^ tB)",
        "x . tB", "x . (tA ^ tB)", "x - tA", "x - (tA + tB)", "x . (tB - tA)",
    ]
    assert parse_formula("T1.9") == parse_formula("x - tA")
    assert catalog_id(parse_formula("x - t(A)")) == "T1.9"
    with pytest.raises(FormulaError):
        parse_formula("T1.12")


def test_context_checks_the_match():
    with pytest.raises(Exception):
        StepContext.of(S, P("u1{ (5 5 6 6) }"), TB)


def test_production_formula_describes_exactly():
    assert evaluate(PRODUCTION, S, CTX) == CTX.s_next
    assert mapping_describes(PRODUCTION, CTX)


def test_classify_examples():
    assert classify(PRODUCTION, CTX).verdict is Verdict.NONEMPTY_OUTPUT
    assert classify(parse_formula("tB - x"), CTX).verdict is Verdict.ORDER_REVERSING
    assert classify(parse_formula("tB"), CTX).verdict is Verdict.CONSTANT
    assert classify(parse_formula("x - tA"), CTX).verdict is Verdict.SUITABLE
    r = classify(parse_formula("x - S"), CTX)
    assert r.suitable and r.vacuous


def test_every_catalog_form_is_suitable_here():
    for key, h in CATALOG_IDS.items():
        assert classify(h, CTX).suitable, key
        assert classify(h, CTX, fine=True).suitable, key


def test_closed_form_detection():
    assert closed_form(parse_formula("x")) == ("identity", None)
    assert closed_form(parse_formula("x - t(A + B)"))[0] == "minus"
    assert closed_form(parse_formula("tB . x"))[0] == "times"
    assert closed_form(parse_formula("x - tA + tB")) is None


def test_closed_form_for_x_minus_ta():
    d = P("u1{ (0 2 4 2) }")
    assert preimage(parse_formula("x - tA"), d, CTX) == TA + product(S - TA, d)


def test_undefined_preimage_of_nonempty_output_form():
    # h(0) = tB is not inside the empty part, so nothing maps into it
    p = oracle_preimage(PRODUCTION, P("u1{}"), CTX)
    assert isinstance(p, Undefined) and not p


def test_atom_space_bound():
    many = P("u1{ " + " ".join(f"({i} 0 {i} 1)" for i in range(20)) + " }")
    ctx = StepContext.of(many, P("u1{ (0 0 0 1) }"), P("u1{}"))
    with pytest.raises(AtomOverflow):
        AtomSpace([many], many, fine=True)
    # merged classes stay small
    assert len(AtomSpace([ctx.ta, ctx.tb], many).units) <= 2


@st.composite
def contexts(draw):
    s = draw(nonempty_u1(4))
    keep = draw(st.sampled_from(s.elements))
    ta = product(s, draw(u1_shapes(3))) + Shape.u1([keep])
    tb = draw(u1_shapes(2))
    return StepContext.of(s, ta, tb)


@settings(max_examples=200, deadline=None)
@given(contexts(), u1_shapes(3), st.sampled_from(sorted(CATALOG_IDS)))
def test_closed_forms_match_exhaustive_oracle(ctx, d_raw, key):
    h = CATALOG_IDS[key]
    d = product(d_raw, evaluate(h, ctx.s, ctx))
    try:
        expected, sp = brute_preimage(h, ctx.s, ctx.ta, ctx.tb, d)
    except ValueError:
        assume(False)
    got = preimage(h, d, ctx)
    assert expected is not None
    assert sp.of(raw_segments(got)) == expected
    assert oracle_preimage(h, d, ctx) == got
    # the image of the preimage stays inside the part
    assert evaluate(h, got, ctx) <= d
