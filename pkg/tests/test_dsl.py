import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randmodels import random_formula, random_model
from varisel.errors import ParseError
from varisel.fm import And, BUNDLED, Implies, Not, Or, Var, bundled_text, load_bundled, parse, parse_formula, serialize
from varisel.fm.expr import to_text

GOOD = """\
# a comment
feature Phone mandatory "Mobile phone"
  feature Calls mandatory
  feature GPS optional
  or {
    feature Camera
    feature MP3
  }
constraint Camera => GPS
"""


def test_parse_example():
    m = parse(GOOD)
    assert m.root.id == "Phone" and m.root.display_name == "Mobile phone"
    assert m.by_id["GPS"].parent == "Phone"
    assert [g.children for g in m.groups] == [("Camera", "MP3")]
    assert str(m.constraints[0]) == "Camera => GPS"


def test_default_variability():
    m = parse("feature R\n  feature A\n")
    assert m.by_id["R"].variability.value == "MANDATORY"
    assert m.by_id["A"].variability.value == "OPTIONAL"


@pytest.mark.parametrize(
    "text,expected",
    [
        ("a => b => c", Implies(Var("a"), Implies(Var("b"), Var("c")))),
        ("a | b & c", Or(Var("a"), And(Var("b"), Var("c")))),
        ("!a & b", And(Not(Var("a")), Var("b"))),
        ("!(a | b)", Not(Or(Var("a"), Var("b")))),
        ("(a => b) => c", Implies(Implies(Var("a"), Var("b")), Var("c"))),
        ("a & b & c", And(And(Var("a"), Var("b")), Var("c"))),
    ],
)
def test_formula_precedence(text, expected):
    assert parse_formula(text) == expected
    assert parse_formula(to_text(expected)) == expected


@pytest.mark.parametrize(
    "text,code,line,column",
    [
        ("feature R\n  feature A\n  feature A\n", "DUPLICATE_ID", 3, 11),
        ("feature R\nconstraint R => Q\n", "UNKNOWN_REF", 2, 17),
        ("feature R\n  alt {\n    feature A\n  }\n", "BAD_GROUP", 2, 3),
        ("feature R\n   feature A\n", "SYNTAX", 2, 1),
        ("feature R\n  feature A @\n", "SYNTAX", 2, 13),
        ("feature R\n  alt {\n    feature A\n    feature B\n", "SYNTAX", 2, 3),
        ("feature R\nconstraint (R\n", "SYNTAX", 2, 14),
        ("", "SYNTAX", 1, 1),
    ],
)
def test_parse_errors(text, code, line, column):
    with pytest.raises(ParseError) as e:
        parse(text)
    assert e.value.code == code
    assert (e.value.span.line, e.value.span.column) == (line, column)
    assert e.value.message


def test_group_member_rejects_keyword():
    with pytest.raises(ParseError) as e:
        parse("feature R\n  or {\n    feature A mandatory\n    feature B\n  }\n")
    assert e.value.code == "SYNTAX"


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_round_trip(name):
    m = load_bundled(name)
    assert parse(serialize(m)) == m
    assert serialize(parse(serialize(m))) == serialize(m)
    assert parse(bundled_text(name)) == m


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_round_trip_random_models(seed):
    m = random_model(random.Random(seed))
    text = serialize(m)
    assert parse(text) == m
    assert serialize(parse(text)) == text


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_formula_text_round_trip(seed):
    rng = random.Random(seed)
    f = random_formula(rng, ["a", "b", "c", "d"], depth=4)
    assert parse_formula(to_text(f)) == f
    sel = {x for x in "abcd" if rng.random() < 0.5}
    assert parse_formula(to_text(f)).evaluate(sel) == f.evaluate(sel)
