"""Independent reference implementations used to cross-check the checkers.

Both oracles work straight off the explored transition systems with the
plainest algorithms available — a pairwise greatest-fixed-point for step
bisimulation and an explicit enumeration of posetal triples for
history-preserving bisimulation — sharing no code with rctc.equiv, whose
partition-refinement / game machinery they are meant to audit.
"""

from __future__ import annotations

from itertools import permutations

from rctc import Bounds, explore


def _step_moves(lts):
    moves = {s.id: [] for s in lts.states}
    for e in lts.edges:
        acts = tuple(sorted(a for a, _ in e.label.events))
        moves[e.src].append((e.direction, acts, e.dst))
    return moves


def naive_step_related(p, q, bounds: Bounds, defs=None) -> bool:
    """Greatest fixed point over state pairs, labels matched by action
    multiset in both directions."""
    l1 = explore(p, defs, bounds)
    l2 = explore(q, defs, bounds)
    m1, m2 = _step_moves(l1), _step_moves(l2)
    rel = {(s.id, t.id) for s in l1.states for t in l2.states}

    changed = True
    while changed:
        changed = False
        for s, t in list(rel):
            left_ok = all(
                any(
                    d == d2 and acts == a2 and (s2, t2) in rel
                    for d2, a2, t2 in m2[t]
                )
                for d, acts, s2 in m1[s]
            )
            right_ok = left_ok and all(
                any(
                    d == d2 and acts == a2 and (s2, t2) in rel
                    for d2, a2, s2 in m1[s]
                )
                for d, acts, t2 in m2[t]
            )
            if not right_ok:
                rel.discard((s, t))
                changed = True
    return (l1.initial, l2.initial) in rel


# ---------------------------------------------------------------------------
# Posetal (history-preserving) oracle
# ---------------------------------------------------------------------------

def _posets(lts):
    """Per state: ordered event list, labels, and the causal order closure."""
    out = {}
    for s in lts.states:
        ids = sorted(r.event_id for r in s.history)
        labels = {r.event_id: r.action for r in s.history}
        below = {r.event_id: set(r.causes) for r in s.history}
        changed = True
        while changed:
            changed = False
            for e, bs in below.items():
                extra = set().union(*(below.get(c, set()) for c in bs)) - bs
                if extra:
                    bs |= extra
                    changed = True
        out[s.id] = (ids, labels, below)
    return out


def _isos(pos1, pos2):
    """All label- and order-preserving bijections between two history posets."""
    ids1, lab1, below1 = pos1
    ids2, lab2, below2 = pos2
    if len(ids1) != len(ids2):
        return
    if sorted(lab1.values()) != sorted(lab2.values()):
        return
    for perm in permutations(ids2):
        f = dict(zip(ids1, perm))
        if any(lab1[e] != lab2[f[e]] for e in ids1):
            continue
        if any(
            ((a in below1[b]) != (f[a] in below2[f[b]]))
            for a in ids1
            for b in ids1
            if a != b
        ):
            continue
        yield frozenset(f.items())


def naive_hp_related(p, q, bounds: Bounds, defs=None) -> bool:
    """Brute force over posetal triples (state, order-iso, state).

    The candidate set is seeded with every label/order iso between every
    history pair, so a successor produced below is a *valid* triple exactly
    when it is already in the set; the pruning loop then removes triples
    with an unanswerable challenge until nothing changes.
    """
    l1 = explore(p, defs, bounds)
    l2 = explore(q, defs, bounds)
    pos1, pos2 = _posets(l1), _posets(l2)
    out1 = {s.id: l1.out_edges(s.id) for s in l1.states}
    out2 = {s.id: l2.out_edges(s.id) for s in l2.states}

    triples = {
        (s.id, f, t.id)
        for s in l1.states
        for t in l2.states
        for f in _isos(pos1[s.id], pos2[t.id])
    }

    def successors(f, el, er):
        """Candidate triples from answering left edge el with right edge er
        (or vice versa — the construction is challenge-agnostic)."""
        if el.direction != er.direction:
            return
        fmap = dict(f)
        carry_l, carry_r = dict(el.carried), dict(er.carried)
        if el.direction == "reverse":
            if {fmap[r] for r in el.removed} != set(er.removed):
                return
            nf = {
                carry_l[a]: carry_r[b]
                for a, b in fmap.items()
                if a in carry_l and b in carry_r
            }
            yield (el.dst, frozenset(nf.items()), er.dst)
            return
        base = {
            carry_l[a]: carry_r[b]
            for a, b in fmap.items()
            if a in carry_l and b in carry_r
        }
        if len(base) != len(fmap):
            return
        add_l, add_r = sorted(el.added), sorted(er.added)
        if len(add_l) != len(add_r):
            return
        for perm in permutations(add_r):
            g = dict(base)
            g.update(zip(add_l, perm))
            yield (el.dst, frozenset(g.items()), er.dst)

    changed = True
    while changed:
        changed = False
        for trip in list(triples):
            if trip not in triples:
                continue
            s, f, t = trip
            ok = all(
                any(
                    nt in triples
                    for er in out2[t]
                    for nt in successors(f, el, er)
                )
                for el in out1[s]
            ) and all(
                any(
                    nt in triples
                    for el in out1[s]
                    for nt in successors(f, el, er)
                )
                for er in out2[t]
            )
            if not ok:
                triples.discard(trip)
                changed = True
    return (l1.initial, frozenset(), l2.initial) in triples


# ---------------------------------------------------------------------------
# Small-term enumeration
# ---------------------------------------------------------------------------

def enumerate_small_terms(max_events: int = 5):
    """A deterministic crop of standard terms over {a, b, ~a}, each carrying
    at most ``max_events`` prefix events."""
    from rctc import NIL, Par, Prefix, Restrict, Sum

    def events(t):
        from rctc.term import subterms, Prefix as P

        return sum(len(s.actions) for s in subterms(t) if isinstance(s, P))

    atoms = [NIL]
    for act in ("a", "b", "~a"):
        atoms.append(Prefix((act,), None, NIL))
    atoms.append(Prefix(("a",), None, Prefix(("b",), None, NIL)))
    atoms.append(Prefix(("b",), None, Prefix(("~a",), None, NIL)))
    atoms.append(Prefix(("a", "b"), None, NIL))

    seen = []
    pool = set()

    def add(t):
        if t not in pool and events(t) <= max_events:
            pool.add(t)
            seen.append(t)

    for t in atoms:
        add(t)
    base = list(seen)
    for x in base:
        for y in base:
            add(Sum(x, y))
            add(Par(x, y))
    for x in base:
        add(Restrict(x, frozenset({"a"})))
        add(Prefix(("a",), None, x))
    return seen
