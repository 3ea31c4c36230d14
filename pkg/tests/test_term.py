"""Term-level helpers: sorts, keys, canonicalization, predicates."""

import pytest
from hypothesis import given, settings

from rctc import (
    NIL,
    Prefix,
    Relabel,
    Sum,
    TAU,
    TermError,
    complement,
    apply_relabel,
    is_fully_executed,
    is_standard,
    keys,
    max_key,
    parse,
    render,
    sort,
)
from rctc.term import canonical_keys, map_keys
from conftest import standard_terms


def test_complement_is_an_involution():
    assert complement("a") == "~a"
    assert complement("~a") == "a"
    with pytest.raises(TermError):
        complement(TAU)


def test_relabel_extends_to_conames_and_fixes_tau():
    f = {"a": "b"}
    assert apply_relabel(f, "a") == "b"
    assert apply_relabel(f, "~a") == "~b"
    assert apply_relabel(f, TAU) == TAU


def test_sort_collects_through_operators():
    p = parse("(a.b.nil + ~c.nil) \\ {b} [a -> d]")
    assert sort(p).labels == frozenset({"d", "~c"})


def test_sort_of_recursion_unfolds_to_a_lower_bound():
    defs = {"A": parse("a.b.A")}
    s = sort(parse("A"), defs)
    assert s.labels == frozenset({"a", "b"})
    # the unfold budget cannot certify a fixed point for recursive constants
    assert not s.complete


def test_keys_and_max_key():
    p = parse("a[3].(b[1].nil | c.nil)")
    assert keys(p) == frozenset({1, 3})
    assert max_key(p) == 3


def test_standard_and_fully_executed_predicates():
    assert is_standard(parse("a.b.nil + c.nil"))
    assert not is_standard(parse("a[1].nil"))
    assert is_fully_executed(parse("a[1].b[2].nil"))
    assert not is_fully_executed(parse("a[1].b.nil"))


def test_canonical_keys_renumbers_in_traversal_order():
    p = parse("a[7].nil | b[3].nil")
    canon, ren = canonical_keys(p)
    assert render(canon) == "a[1].nil | b[2].nil"
    assert ren == {7: 1, 3: 2}


def test_map_keys_is_a_plain_rewrite():
    p = parse("a[1].b[2].nil")
    assert render(map_keys(p, {1: 5})) == "a[5].b[2].nil"


def test_term_layer_permits_shared_keys():
    # configuration consistency is the step engine's concern, not the AST's
    assert keys(parse("a[1].nil | b[1].nil")) == frozenset({1})


def test_synchronized_pair_shares_key_legally():
    p = parse("a[1].nil | ~a[1].nil")
    assert keys(p) == frozenset({1})


@settings(max_examples=200, deadline=None)
@given(standard_terms())
def test_standard_terms_have_no_keys(t):
    assert is_standard(t)
    assert keys(t) == frozenset()
    assert max_key(t) == 0


@settings(max_examples=200, deadline=None)
@given(standard_terms())
def test_sort_is_tau_free(t):
    assert TAU not in sort(t).labels


def test_tau_prefix_never_keyed():
    with pytest.raises(TermError):
        Prefix((TAU,), 4, NIL)


def test_sum_of_nil_is_not_nil():
    assert Sum(NIL, NIL) != NIL
    assert render(Sum(NIL, NIL)) == "nil + nil"


def test_relabel_rejects_double_mapping():
    with pytest.raises(TermError):
        Relabel(NIL, (("a", "b"), ("a", "c")))
    with pytest.raises(TermError):
        Relabel(NIL, (("a", "b"), ("a", "b")))
