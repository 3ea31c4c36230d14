"""Equivalence checking across the four flavors, two strengths, and
directions, cross-audited by the naive oracles."""

import random

from hypothesis import given, settings

from rctc import Bounds, Flavor, Strength, check, parse
from rctc.term import map_keys, keys

from conftest import standard_terms
from oracles import enumerate_small_terms, naive_hp_related, naive_step_related

B = Bounds(max_depth=5, max_width=2, max_states=600)
FLAVORS = (Flavor.STEP, Flavor.POMSET, Flavor.HP, Flavor.HHP)


def verdict(ls, rs, flavor=Flavor.STEP, strength=Strength.STRONG, direction="both"):
    return check(parse(ls), parse(rs), bounds=B, flavor=flavor,
                 strength=strength, direction=direction)


# -- frozen verdicts ---------------------------------------------------------

def test_interleaving_expansion_fails_in_every_flavor():
    for fl in FLAVORS:
        v = verdict("a.nil | b.nil", "a.b.nil + b.a.nil", flavor=fl)
        assert not v.related
        assert any("{a, b}" in line for line in v.evidence)


def test_identical_terms_are_related_in_every_flavor():
    for fl in FLAVORS:
        for st in (Strength.STRONG, Strength.WEAK):
            v = verdict("a.(b.nil + c.nil)", "a.(b.nil + c.nil)", flavor=fl, strength=st)
            assert v.related
            w = v.witness
            assert w is not None and (w.pairs or w.triples)


def test_silent_prefix_collapses_weakly_only():
    for fl in FLAVORS:
        assert not verdict("tau.a.nil", "a.nil", flavor=fl).related
        assert verdict("tau.a.nil", "a.nil", flavor=fl, strength=Strength.WEAK).related


def test_hidden_synchronization_is_weakly_silent():
    v = verdict("(a.nil | ~a.nil) \\ {a}", "tau.nil", strength=Strength.WEAK)
    assert v.related


def test_direction_restricts_the_game():
    assert verdict("a[1].nil", "b[1].nil", direction="forward").related
    assert not verdict("a[1].nil", "b[1].nil", direction="reverse").related
    assert not verdict("a[1].nil", "b[1].nil").related


def test_out_of_order_undo_distinguishes_structure():
    # forward-only they agree; the parallel side can undo a under b
    assert verdict("a.nil | b.nil + a.b.nil", "a.nil | b.nil", direction="forward").related
    assert not verdict("a.nil | b.nil + a.b.nil", "a.nil | b.nil").related


def test_key_values_are_immaterial():
    p = parse("a[1].(b[2].nil | c.nil)")
    q = map_keys(p, {k: k + 10 for k in keys(p)})
    for fl in FLAVORS:
        assert check(p, q, bounds=B, flavor=fl).related


def test_evidence_accompanies_every_refusal():
    v = verdict("a.nil", "b.nil")
    assert not v.related and v.evidence


def test_truncation_is_reported_not_hidden():
    tight = Bounds(max_depth=2, max_width=1, max_states=3)
    v = check(parse("a.b.c.nil"), parse("a.b.d.nil"), bounds=tight)
    assert v.bounded


# -- cross-audit against the oracles ----------------------------------------

def test_checkers_agree_with_oracles_on_small_pairs():
    terms = enumerate_small_terms()
    rng = random.Random(23)
    for _ in range(40):
        p, q = rng.choice(terms), rng.choice(terms)
        assert naive_step_related(p, q, B) == check(
            p, q, bounds=B, flavor=Flavor.STEP
        ).related
        assert naive_hp_related(p, q, B) == check(
            p, q, bounds=B, flavor=Flavor.HP
        ).related


@settings(max_examples=40, deadline=None)
@given(standard_terms(max_leaves=6), standard_terms(max_leaves=6))
def test_inclusion_ladder_on_generated_pairs(p, q):
    small = Bounds(max_depth=3, max_width=2, max_states=200)
    results = {
        fl: check(p, q, bounds=small, flavor=fl).related for fl in FLAVORS
    }
    assert not (results[Flavor.HHP] and not results[Flavor.HP])
    assert not (results[Flavor.HP] and not results[Flavor.POMSET])
    assert not (results[Flavor.POMSET] and not results[Flavor.STEP])
    if results[Flavor.STEP]:
        weak = check(p, q, bounds=small, flavor=Flavor.STEP, strength=Strength.WEAK)
        assert weak.related


@settings(max_examples=50, deadline=None)
@given(standard_terms(max_leaves=6))
def test_every_term_relates_to_itself(t):
    small = Bounds(max_depth=3, max_width=2, max_states=200)
    for fl in FLAVORS:
        assert check(t, t, bounds=small, flavor=fl).related
