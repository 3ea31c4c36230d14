"""Parser and renderer behavior."""

import pytest
from hypothesis import given, settings

from rctc import (
    NIL,
    Par,
    ParseError,
    Prefix,
    Relabel,
    Restrict,
    Seq,
    Sum,
    TAU,
    parse,
    parse_defs,
    render,
)
from conftest import standard_terms


# -- structure ---------------------------------------------------------------

def test_prefix_chain_nests_right():
    assert parse("a.b.nil") == Prefix(("a",), None, Prefix(("b",), None, NIL))


def test_sum_binds_looser_than_par():
    t = parse("a.nil + b.nil | c.nil")
    assert isinstance(t, Sum)
    assert isinstance(t.right, Par)


def test_postfix_operators_bind_tighter_than_par():
    t = parse("a.nil | b.nil \\ {b}")
    assert isinstance(t, Par)
    assert isinstance(t.right, Restrict)
    assert t.right.labels == frozenset({"b"})


def test_relabel_postfix():
    t = parse("a.nil [a -> b]")
    assert isinstance(t, Relabel)
    assert t.as_dict() == {"a": "b"}


def test_conames_and_tau():
    t = parse("~a.tau.nil")
    assert t.actions == ("~a",)
    assert t.body.actions == (TAU,)


def test_executed_action_carries_key():
    t = parse("a[3].nil")
    assert t.key == 3 and t.actions == ("a",)


def test_simultaneous_group_shares_one_key():
    t = parse("(a[2] || b[2]).nil")
    assert t.key == 2 and t.actions == ("a", "b")


def test_group_with_mismatched_keys_rejected():
    with pytest.raises(ParseError):
        parse("(a[1] || b[2]).nil")


def test_sequencing_dot_on_processes():
    t = parse("(a.nil + b.nil) . c.nil")
    assert isinstance(t, Seq)
    assert isinstance(t.left.left, Sum)
    assert render(t) == "(a.nil + b.nil).c.nil"


def test_parens_override_precedence():
    t = parse("(a.nil + b.nil) | c.nil")
    assert isinstance(t, Par)


@pytest.mark.parametrize(
    "bad",
    ["", "a.", "a.nil +", "(a.nil", "a.nil [a ->]", "a[].nil",
     "tau[1].nil", "(tau || a).nil", "~tau.nil"],
)
def test_malformed_input_raises(bad):
    with pytest.raises(ParseError):
        parse(bad)


def test_definitions_file():
    defs = parse_defs("A := a.A\nB := b.nil + A\n")
    assert set(defs) == {"A", "B"}
    assert render(defs["B"]) == "b.nil + A"


def test_definitions_reject_duplicates():
    with pytest.raises(ParseError):
        parse_defs("A := a.nil\nA := b.nil\n")


# -- round trip --------------------------------------------------------------

@settings(max_examples=300, deadline=None)
@given(standard_terms())
def test_render_parse_round_trip(t):
    assert parse(render(t)) == t


def test_round_trip_keeps_keys_and_groups():
    for src in [
        "a[1].b.nil",
        "(a[4] || c[4]).(nil | nil)",
        "((a || b).nil + tau.nil) \\ {a} [b -> c]",
        "a.nil . b[2].nil",
    ]:
        assert render(parse(render(parse(src)))) == render(parse(src))
