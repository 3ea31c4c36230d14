"""Bounded exploration, run pomsets, and the export format."""

from hypothesis import given, settings

from rctc import (
    Bounds,
    Pomset,
    explore,
    export,
    import_lts,
    parse,
    pomset_isomorphic,
    pomset_runs,
    render,
    reverse_runs,
    structural_history,
)
from conftest import standard_terms

B = Bounds(max_depth=4, max_width=2, max_states=500)


def test_two_independent_actions_make_a_square():
    lts = explore(parse("a.nil | b.nil"), None, B)
    assert len(lts.states) == 4
    assert len(lts.edges) == 10  # 5 forward (incl. the joint step), 5 reverse
    assert not lts.truncated


def test_states_are_shared_across_paths():
    # a then b and b then a land in the same state, keys renumbered
    lts = explore(parse("a.nil | b.nil"), None, B)
    terms = {render(s.term) for s in lts.states}
    assert terms == {
        "a.nil | b.nil",
        "a[1].nil | b.nil",
        "a.nil | b[1].nil",
        "a[1].nil | b[2].nil",
    }


def test_exploration_is_deterministic():
    a = export(explore(parse("a.(b.nil | c.nil) + tau.nil"), None, B))
    b = export(explore(parse("a.(b.nil | c.nil) + tau.nil"), None, B))
    assert a == b


def test_state_budget_sets_the_truncation_flag():
    defs = {"A": parse("a.A")}
    lts = explore(parse("A"), defs, Bounds(max_depth=10, max_width=1, max_states=3))
    assert lts.truncated
    assert len(lts.states) == 3


def test_depth_budget_counts_keyed_events_only():
    lts = explore(parse("tau.tau.a.nil"), None, Bounds(max_depth=1, max_width=1, max_states=50))
    # both silent vanishes are free; the single keyed event fits the budget
    assert {render(s.term) for s in lts.states} >= {"tau.tau.a.nil", "a.nil", "a[1].nil"}


def test_history_mirrors_the_term():
    lts = explore(parse("a.b.nil"), None, B)
    by_term = {render(s.term): s for s in lts.states}
    full = by_term["a[1].b[2].nil"]
    recs = {(r.action, r.key) for r in full.history}
    assert recs == {("a", 1), ("b", 2)}
    (b_rec,) = [r for r in full.history if r.action == "b"]
    (a_rec,) = [r for r in full.history if r.action == "a"]
    assert a_rec.event_id in b_rec.causes


def test_structural_history_reads_keys_off_the_term():
    hist = structural_history(parse("a[1].b[2].nil | c[3].nil"))
    assert {(r.action, r.key) for r in hist} == {("a", 1), ("b", 2), ("c", 3)}


def test_sequential_run_is_ordered():
    lts = explore(parse("a.b.nil"), None, B)
    runs = pomset_runs(lts, 0, 4)
    assert sorted(len(r.events) for r in runs) == [0, 1, 2]
    (two,) = [r for r in runs if len(r.events) == 2]
    ids = {a: i for (i, _gen), a in ((e[0], e[1]) for e in two.events)}
    assert len(two.order) == 1  # a strictly below b


def test_parallel_run_is_unordered():
    lts = explore(parse("a.nil | b.nil"), None, B)
    (two,) = [r for r in pomset_runs(lts, 0, 4) if len(r.events) == 2]
    assert two.order == frozenset()


def test_runs_between_bracketings_match():
    l1 = explore(parse("(a.nil | b.nil) | c.nil"), None, Bounds(4, 3, 500))
    l2 = explore(parse("a.nil | (b.nil | c.nil)"), None, Bounds(4, 3, 500))
    p1 = {r.pomset() for r in pomset_runs(l1, 0, 3)}
    p2 = {r.pomset() for r in pomset_runs(l2, 0, 3)}
    match = lambda pa, pb: pomset_isomorphic(pa, pb)
    assert len(p1) == len(p2)
    assert all(any(match(x, y) for y in p2) for x in p1)


def test_reverse_runs_undo_the_recorded_past():
    lts = explore(parse("a[1].b[2].nil"), None, B)
    runs = reverse_runs(lts, 0, 4)
    assert sorted(len(r.events) for r in runs) == [0, 1, 2]
    (two,) = [r for r in runs if len(r.events) == 2]
    assert {a for _eid, a in two.events} == {"a", "b"}


def test_machine_export_round_trips():
    lts = explore(parse("(a.nil | ~a.nil) \\ {a} + b.c.nil"), None, B)
    doc = export(lts, "machine-readable")
    again = import_lts(doc)
    assert export(again, "machine-readable") == doc


@settings(max_examples=60, deadline=None)
@given(standard_terms(max_leaves=8))
def test_export_round_trip_over_generated_terms(t):
    lts = explore(t, None, Bounds(max_depth=3, max_width=2, max_states=120))
    doc = export(lts, "machine-readable")
    again = import_lts(doc)
    assert export(again, "machine-readable") == doc


@settings(max_examples=60, deadline=None)
@given(standard_terms(max_leaves=8))
def test_run_orders_are_transitive_and_irreflexive(t):
    lts = explore(t, None, Bounds(max_depth=3, max_width=2, max_states=120))
    for run in pomset_runs(lts, 0, 3):
        order = run.order
        assert all(x != y for x, y in order)
        for x, y in order:
            for y2, z in order:
                if y == y2:
                    assert (x, z) in order


def test_pomset_isomorphism_ignores_event_identity():
    p1 = Pomset((((1, 0), "a"), ((2, 0), "b")), frozenset({((1, 0), (2, 0))}))
    p2 = Pomset((((5, 1), "a"), ((9, 0), "b")), frozenset({((5, 1), (9, 0))}))
    p3 = Pomset((((5, 1), "a"), ((9, 0), "b")), frozenset())
    assert pomset_isomorphic(p1, p2)
    assert not pomset_isomorphic(p1, p3)
