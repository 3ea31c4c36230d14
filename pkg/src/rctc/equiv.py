"""Equivalence checking over explored transition systems.

Four flavors, each in a strong and a weak variant and each parameterized by
direction (forward, reverse, or both):

* step   -- partition refinement; two states match when their (multiset-
            labelled) steps can answer each other, in the chosen directions.
* pomset -- greatest fixpoint over state pairs matching whole runs up to
            pomset isomorphism.
* hp     -- posetal games: configurations related by an explicit label- and
            order-preserving bijection between their event histories,
            extended step by step and retracted on reverse steps.
* hhp    -- hp plus hereditary closure: every downward-closed sub-history
            must again yield a related triple.

Verdicts carry a machine-checkable witness when related and a distinguishing
transcript when not.  All verdicts are downgraded to "bounded" whenever the
underlying exploration was truncated.

The run budget for pomset matching is the exploration depth; systems with
silent cycles can in principle hide differences past that window, which is
the price of a bounded workbench.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

from .lts import (
    Bounds,
    EventId,
    KeyedLts,
    LtsEdge,
    Pomset,
    explore,
    pomset_isomorphic,
    pomset_runs,
    reverse_runs,
)
from .sos import FORWARD, REVERSE
from .syntax import render
from .term import Process, TAU


class Strength(str, Enum):
    STRONG = "strong"
    WEAK = "weak"


class Flavor(str, Enum):
    STEP = "step"
    POMSET = "pomset"
    HP = "hp"
    HHP = "hhp"


DIRECTIONS = ("forward", "reverse", "both")


@dataclass(frozen=True)
class PosetalTriple:
    left: int
    mapping: tuple[tuple[EventId, EventId], ...]
    right: int


@dataclass(frozen=True)
class Witness:
    flavor: Flavor
    strength: Strength
    direction: str
    left: str
    right: str
    defs: tuple[tuple[str, str], ...]
    bounds: Bounds
    pairs: tuple[tuple[int, int], ...] = ()
    triples: tuple[PosetalTriple, ...] = ()


@dataclass(frozen=True)
class Verdict:
    related: bool
    witness: Witness | None
    evidence: tuple[str, ...]
    bounded: bool


def _dirs(direction: str) -> tuple[str, ...]:
    if direction == "both":
        return (FORWARD, REVERSE)
    return (direction,)


# ---------------------------------------------------------------------------
# Per-lts caches
# ---------------------------------------------------------------------------

class _View:
    """Derived data the games need, computed once per explored system."""

    def __init__(self, lts: KeyedLts):
        self.lts = lts
        self.actions = []  # per state: event id -> action
        self.order = []  # per state: strict order on history ids (closed)
        self.visible = []  # per state: frozenset of visible ids
        for s in lts.states:
            acts = {r.event_id: r.action for r in s.history}
            pairs = {
                (c, r.event_id) for r in s.history for c in r.causes
            }
            self.actions.append(acts)
            self.order.append(_transitive(pairs))
            self.visible.append(
                frozenset(e for e, a in acts.items() if a != TAU)
            )
        self._eps: dict = {}
        self._weak_moves: dict = {}
        self._composites: dict = {}
        self._runs: dict = {}
        self._down: dict = {}

    def edges(self, sid: int, direction: str) -> tuple[LtsEdge, ...]:
        return self.lts.out_edges(sid, direction)

    def visible_order(self, sid: int) -> frozenset:
        vis = self.visible[sid]
        return frozenset((a, b) for a, b in self.order[sid] if a in vis and b in vis)

    # -- weak machinery ----------------------------------------------------

    def eps_states(self, sid: int, direction: str) -> frozenset[int]:
        key = (sid, direction)
        got = self._eps.get(key)
        if got is None:
            seen = {sid}
            stack = [sid]
            while stack:
                s = stack.pop()
                for e in self.edges(s, direction):
                    if e.label.is_silent() and e.dst not in seen:
                        seen.add(e.dst)
                        stack.append(e.dst)
            got = self._eps[key] = frozenset(seen)
        return got

    def weak_moves(self, sid: int, direction: str):
        """(visible action multiset, destination); () stands for a silent hop."""
        key = (sid, direction)
        got = self._weak_moves.get(key)
        if got is None:
            out = {((), t) for t in self.eps_states(sid, direction)}
            for m in self.eps_states(sid, direction):
                for e in self.edges(m, direction):
                    vis = tuple(a for a, _ in e.label.events if a != TAU)
                    if not vis:
                        continue
                    for t in self.eps_states(e.dst, direction):
                        out.add((vis, t))
            got = self._weak_moves[key] = frozenset(out)
        return got

    def composites(self, sid: int, direction: str):
        """Weak responses with id transport, for the posetal games.

        Each composite is (end, delta, carry): for forward play delta is the
        set of visible ids the composite created (in the end state's space);
        for reverse play it is the set of visible ids it undid (in the start
        state's space).  carry transports the start state's surviving visible
        ids to the end state's space.
        """
        key = (sid, direction)
        got = self._composites.get(key)
        if got is not None:
            return got
        start_vis = self.visible[sid]
        ident = {e: e for e in start_vis}

        def silent_closure(seeds):
            seen = set()
            stack = list(seeds)
            while stack:
                item = stack.pop()
                if item in seen:
                    continue
                seen.add(item)
                s, carry, delta = item
                for e in self.edges(s, direction):
                    if not e.label.is_silent():
                        continue
                    cmap = dict(e.carried)
                    nc = frozenset(
                        (a, cmap[b]) for a, b in carry if b in cmap
                    )
                    nd = delta if direction == REVERSE else frozenset(
                        cmap[d] for d in delta if d in cmap
                    )
                    stack.append((e.dst, nc, nd))
            return seen

        base = silent_closure(
            {(sid, frozenset(ident.items()), frozenset())}
        )
        full = set(base)
        for s, carry, _ in base:
            for e in self.edges(s, direction):
                if e.label.is_silent():
                    continue
                cmap = dict(e.carried)
                if direction == FORWARD:
                    delta = frozenset(
                        x for x in e.added if self.actions[e.dst].get(x, TAU) != TAU
                    )
                else:
                    undone = frozenset(
                        a for a, b in carry if b in e.removed
                        and self.actions[s][b] != TAU
                    )
                    delta = undone
                nc = frozenset((a, cmap[b]) for a, b in carry if b in cmap)
                full |= silent_closure({(e.dst, nc, delta)})
        got = self._composites[key] = tuple(
            (s, delta, carry) for s, carry, delta in full
        )
        return got

    # -- runs and subhistories ----------------------------------------------

    def runs(self, sid: int, direction: str, budget: int, weak: bool):
        key = (sid, direction, budget, weak)
        got = self._runs.get(key)
        if got is None:
            raw = (
                pomset_runs(self.lts, sid, budget)
                if direction == FORWARD
                else reverse_runs(self.lts, sid, budget)
            )
            if weak:
                got = [(_visible_pomset(r.pomset()), r.end_state) for r in raw]
            else:
                got = [(r.pomset(), r.end_state) for r in raw]
            self._runs[key] = got
        return got

    def down_closed(self, sid: int):
        """All downward-closed subsets of the state's history ids."""
        got = self._down.get(sid)
        if got is None:
            ids = sorted(self.actions[sid])
            order = self.order[sid]
            preds = {
                e: frozenset(a for a, b in order if b == e) for e in ids
            }
            subsets = [frozenset()]
            for e in ids:  # grow subsets; keep only downward-closed ones
                subsets += [
                    s | {e} for s in subsets if preds[e] <= s
                ]
            got = self._down[sid] = tuple(frozenset(s) for s in subsets)
        return got


def _transitive(pairs: set) -> frozenset:
    succ: dict = {}
    for a, b in pairs:
        succ.setdefault(a, set()).add(b)
    changed = True
    while changed:
        changed = False
        for a, bs in list(succ.items()):
            extra = set().union(*(succ.get(b, set()) for b in bs)) - bs
            if extra:
                bs |= extra
                changed = True
    return frozenset((a, b) for a, bs in succ.items() for b in bs)


def _visible_pomset(p: Pomset) -> Pomset:
    keep = {e for e, a in p.events if a != TAU}
    return Pomset(
        tuple((e, a) for e, a in p.events if e in keep),
        frozenset((a, b) for a, b in p.order if a in keep and b in keep),
    )


def _all_isos(ev1: dict, ord1, ev2: dict, ord2) -> Iterator[dict]:
    """Every label- and order-preserving bijection between two event sets."""
    if len(ev1) != len(ev2):
        return
    ids1, ids2 = sorted(ev1), sorted(ev2)

    def bt(i, partial, used):
        if i == len(ids1):
            yield dict(partial)
            return
        e1 = ids1[i]
        for e2 in ids2:
            if e2 in used or ev2[e2] != ev1[e1]:
                continue
            if all(
                ((e1, d1) in ord1) == ((e2, d2) in ord2)
                and ((d1, e1) in ord1) == ((d2, e2) in ord2)
                for d1, d2 in partial
            ):
                yield from bt(i + 1, partial + [(e1, e2)], used | {e2})

    yield from bt(0, [], set())


def _is_order_iso(fmap: dict, ord1, ord2) -> bool:
    items = list(fmap.items())
    for i, (a1, a2) in enumerate(items):
        for b1, b2 in items[i + 1:]:
            if ((a1, b1) in ord1) != ((a2, b2) in ord2):
                return False
            if ((b1, a1) in ord1) != ((b2, a2) in ord2):
                return False
    return True


# ---------------------------------------------------------------------------
# step: partition refinement
# ---------------------------------------------------------------------------

def _step_moves(view: _View, sid: int, strength: Strength, direction: str):
    out = []
    for d in _dirs(direction):
        if strength is Strength.WEAK:
            for acts, dst in view.weak_moves(sid, d):
                out.append((d, acts, dst))
        else:
            for e in view.edges(sid, d):
                out.append((d, tuple(a for a, _ in e.label.events), e.dst))
    return out


def _step_refine(v1: _View, v2: _View, strength, direction):
    nodes = [(0, i) for i in range(len(v1.lts.states))] + [
        (1, j) for j in range(len(v2.lts.states))
    ]
    views = (v1, v2)
    moves = {
        (side, sid): [
            (d, a, (side, t))
            for d, a, t in _step_moves(views[side], sid, strength, direction)
        ]
        for side, sid in nodes
    }
    block = {n: 0 for n in nodes}
    history = [dict(block)]
    while True:
        sig = {
            n: frozenset((d, a, block[t]) for d, a, t in moves[n]) for n in nodes
        }
        fresh: dict = {}
        nb = {n: fresh.setdefault((block[n], sig[n]), len(fresh)) for n in nodes}
        if nb == block:
            break
        block = nb
        history.append(dict(block))
    return block, history, moves


def _sep_round(history, a, b):
    for r, blk in enumerate(history):
        if blk[a] != blk[b]:
            return r
    return None


def _fmt_acts(acts) -> str:
    return "{" + ", ".join(acts) + "}" if acts else "(silent)"


def _step_evidence(history, moves, a, b, names=("left", "right"), depth=0):
    lines: list[str] = []
    if depth > 8:
        return ["... (differences continue)"]
    best = None
    for att, dfn, an, dn in ((a, b) + names, (b, a) + names[::-1]):
        for d, acts, t in sorted(moves[att], key=lambda m: (len(m[1]), m[1], m[0])):
            partners = [
                t2 for d2, a2, t2 in moves[dfn] if (d2, a2) == (d, acts)
            ]
            seps = [_sep_round(history, t, t2) for t2 in partners]
            if any(s is None for s in seps):
                continue  # this move is answered
            score = (0 if not partners else 1, max(seps, default=0), len(acts))
            if best is None or score < best[0]:
                best = (score, att, dfn, an, dn, d, acts, t, partners, seps)
    if best is None:
        return ["states disagree, but every single move is answered (width/depth interplay)"]
    _, att, dfn, an, dn, d, acts, t, partners, seps = best
    if not partners:
        lines.append(f"{an} offers {d} step {_fmt_acts(acts)}; {dn} cannot match it")
    else:
        worst = partners[max(range(len(partners)), key=lambda i: seps[i])]
        lines.append(
            f"{an} offers {d} step {_fmt_acts(acts)}; every {dn} reply is "
            f"distinguished afterwards, e.g.:"
        )
        lines += _step_evidence(history, moves, t, worst, (an, dn), depth + 1)
    return lines


def _check_step(v1, v2, strength, direction):
    block, history, moves = _step_refine(v1, v2, strength, direction)
    i1, i2 = (0, v1.lts.initial), (1, v2.lts.initial)
    if block[i1] == block[i2]:
        pairs = tuple(
            sorted(
                (i, j)
                for i in range(len(v1.lts.states))
                for j in range(len(v2.lts.states))
                if block[(0, i)] == block[(1, j)]
            )
        )
        return True, pairs, []
    return False, (), _step_evidence(history, moves, i1, i2)


# ---------------------------------------------------------------------------
# pomset: run matching
# ---------------------------------------------------------------------------

def _pomset_text(p: Pomset) -> str:
    lab = dict(p.events)
    acts = ", ".join(a for _, a in sorted(p.events, key=lambda e: (e[1], e[0])))
    if not p.order:
        return "{" + acts + "}"
    rel = ", ".join(
        f"{lab[x]} < {lab[y]}"
        for x, y in sorted(p.order, key=lambda xy: (lab[xy[0]], lab[xy[1]], xy))
    )
    return "{" + acts + " | " + rel + "}"


def _check_pomset(v1, v2, strength, direction, budget):
    weak = strength is Strength.WEAK
    n1, n2 = len(v1.lts.states), len(v2.lts.states)
    runs1 = {
        (s, d): v1.runs(s, d, budget, weak) for s in range(n1) for d in _dirs(direction)
    }
    runs2 = {
        (s, d): v2.runs(s, d, budget, weak) for s in range(n2) for d in _dirs(direction)
    }

    # which runs are pomset-isomorphic is independent of the relation: cache it
    iso: dict = {}

    def candidates(r, pool):
        key = (id(r[0]), id(pool))
        got = iso.get(key)
        if got is None:
            got = [i for i, r2 in enumerate(pool) if pomset_isomorphic(r[0], r2[0])]
            iso[key] = got
        return got

    related = {(i, j) for i in range(n1) for j in range(n2)}

    def survives(i, j):
        for d in _dirs(direction):
            for r in runs1[(i, d)]:
                pool = runs2[(j, d)]
                if not any(
                    (r[1], pool[k][1]) in related for k in candidates(r, pool)
                ):
                    return False
            for r in runs2[(j, d)]:
                pool = runs1[(i, d)]
                if not any(
                    (pool[k][1], r[1]) in related for k in candidates(r, pool)
                ):
                    return False
        return True

    changed = True
    while changed:
        changed = False
        for pair in sorted(related):
            if not survives(*pair):
                related.discard(pair)
                changed = True

    init = (v1.lts.initial, v2.lts.initial)
    if init in related:
        return True, tuple(sorted(related)), []
    # evidence: shortest nonempty unanswerable run from the initial pair;
    # prefer runs with no isomorphic partner at all
    evidence = None
    for d in _dirs(direction):
        sides = (
            ("left", "right", runs1[(init[0], d)], runs2[(init[1], d)], False),
            ("right", "left", runs2[(init[1], d)], runs1[(init[0], d)], True),
        )
        for an, dn, mine, pool, flip in sides:
            for r in mine:
                if not r[0].events:
                    continue
                cands = candidates(r, pool)
                if any(
                    ((pool[k][1], r[1]) if flip else (r[1], pool[k][1])) in related
                    for k in cands
                ):
                    continue
                why = (
                    "has no isomorphic run"
                    if not cands
                    else "cannot match it and reach a related pair"
                )
                line = f"{an} has a {d} run with pomset {_pomset_text(r[0])}; {dn} {why}"
                score = (1 if cands else 0, len(r[0]))
                if evidence is None or score < evidence[0]:
                    evidence = (score, line)
    return False, (), [evidence[1] if evidence else "the initial states match no common run tree"]


# ---------------------------------------------------------------------------
# hp / hhp: posetal games
# ---------------------------------------------------------------------------

def _initial_triples(v1, v2, weak):
    s1, s2 = v1.lts.initial, v2.lts.initial
    if weak:
        ev1 = {e: v1.actions[s1][e] for e in v1.visible[s1]}
        ev2 = {e: v2.actions[s2][e] for e in v2.visible[s2]}
        o1, o2 = v1.visible_order(s1), v2.visible_order(s2)
    else:
        ev1, ev2 = v1.actions[s1], v2.actions[s2]
        o1, o2 = v1.order[s1], v2.order[s2]
    return [
        PosetalTriple(s1, tuple(sorted(f.items())), s2)
        for f in _all_isos(ev1, o1, ev2, o2)
    ]


def _hp_responses_strong(view_a, view_d, edge, fmap, defender_state):
    """Defender answers an attacker's strong edge in the strong game."""
    responses = []
    label_a = tuple(a for a, _ in edge.label.events)
    ca = dict(edge.carried)
    for e2 in view_d.edges(defender_state, edge.direction):
        if tuple(a for a, _ in e2.label.events) != label_a:
            continue
        c2 = dict(e2.carried)
        if edge.direction == FORWARD:
            base = {ca[a]: c2[b] for a, b in fmap.items()}
            ev1 = {x: view_a.actions[edge.dst][x] for x in edge.added}
            ev2 = {y: view_d.actions[e2.dst][y] for y in e2.added}
            o1, o2 = view_a.order[edge.dst], view_d.order[e2.dst]
            for g in _all_isos(ev1, o1, ev2, o2):
                cand = base | g
                if _is_order_iso(cand, o1, o2):
                    responses.append((e2.dst, cand))
        else:
            undone = frozenset(edge.removed)
            if frozenset(fmap[a] for a in undone if a in fmap) != frozenset(e2.removed):
                continue
            if any((a in undone) != (fmap[a] in e2.removed) for a in fmap):
                continue
            cand = {
                ca[a]: c2[fmap[a]]
                for a in fmap
                if a not in undone
            }
            if _is_order_iso(cand, view_a.order[edge.dst], view_d.order[e2.dst]):
                responses.append((e2.dst, cand))
    return responses


def _hp_responses_weak(view_a, view_d, edge, fmap, defender_state):
    """Defender answers with a silent*-step-silent* composite (weak game)."""
    responses = []
    d = edge.direction
    ca = {a: b for a, b in edge.carried}
    if d == FORWARD:
        vadd1 = {
            x: view_a.actions[edge.dst][x]
            for x in edge.added
            if view_a.actions[edge.dst][x] != TAU
        }
        o1 = view_a.visible_order(edge.dst)
        for end, delta, carry in view_d.composites(defender_state, FORWARD):
            ev2 = {y: view_d.actions[end][y] for y in delta}
            if sorted(ev2.values()) != sorted(vadd1.values()):
                continue
            o2 = view_d.visible_order(end)
            cd = dict(carry)
            base = {
                ca[a]: cd[b] for a, b in fmap.items() if a in ca and b in cd
            }
            if len(base) != len(fmap):
                continue
            for g in _all_isos(vadd1, o1, ev2, o2):
                cand = base | g
                if _is_order_iso(cand, o1, o2):
                    responses.append((end, cand))
    else:
        # removed ids that are visible (τ records never enter the weak map)
        undone_vis = frozenset(a for a in edge.removed if a in fmap)
        want = frozenset(fmap[a] for a in undone_vis)
        for end, delta, carry in view_d.composites(defender_state, REVERSE):
            if frozenset(delta) != want:
                continue
            cd = dict(carry)
            cand = {}
            total = True
            for a, b in fmap.items():
                if a in undone_vis:
                    continue
                if a not in ca or b not in cd:
                    total = False
                    break
                cand[ca[a]] = cd[b]
            if not total:
                continue
            if _is_order_iso(
                cand, view_a.visible_order(edge.dst), view_d.visible_order(end)
            ):
                responses.append((end, cand))
    return responses


def _check_hp(v1, v2, strength, direction, hereditary):
    weak = strength is Strength.WEAK
    inits = _initial_triples(v1, v2, weak)
    if not inits:
        return False, (), ["the initial event histories are not isomorphic"]

    views = (v1, v2)
    succs: dict = {}
    challenges: dict = {}

    def attacker_edges(triple):
        out = []
        for d in _dirs(direction):
            for e in v1.edges(triple.left, d):
                out.append((0, e))
            for e in v2.edges(triple.right, d):
                out.append((1, e))
        return out

    def expand(triple):
        if triple in challenges:
            return
        fmap = dict(triple.mapping)
        chs = []
        for side, edge in attacker_edges(triple):
            va, vd = views[side], views[1 - side]
            dstate = triple.right if side == 0 else triple.left
            if weak:
                resp = _hp_responses_weak(va, vd, edge, fmap if side == 0 else
                                          {b: a for a, b in fmap.items()}, dstate)
            else:
                resp = _hp_responses_strong(va, vd, edge, fmap if side == 0 else
                                            {b: a for a, b in fmap.items()}, dstate)
            nexts = []
            for dst2, cand in resp:
                if side == 0:
                    t2 = PosetalTriple(edge.dst, tuple(sorted(cand.items())), dst2)
                else:
                    t2 = PosetalTriple(
                        dst2, tuple(sorted((b, a) for a, b in cand.items())), edge.dst
                    )
                nexts.append(t2)
            desc = (
                f"{'left' if side == 0 else 'right'} offers {edge.direction} "
                f"step {_fmt_acts(tuple(a for a, _ in edge.label.events))}"
            )
            chs.append((desc, tuple(nexts)))
        challenges[triple] = chs
        for _, nexts in chs:
            for t2 in nexts:
                if t2 not in challenges:
                    pending.append(t2)

    def sub_triples(triple):
        """Hereditary obligations: one per downward-closed subhistory."""
        fmap = dict(triple.mapping)
        obligations = []
        for d1 in v1.down_closed(triple.left):
            if weak:
                vis1 = d1 & v1.visible[triple.left]
                want = frozenset(fmap[a] for a in vis1 if a in fmap)
                if len(want) != len(vis1):
                    continue
                options = []
                for d2 in v2.down_closed(triple.right):
                    if d2 & v2.visible[triple.right] != want:
                        continue
                    r1 = _substate(v1, triple.left, d1)
                    r2 = _substate(v2, triple.right, d2)
                    if r1 is None or r2 is None:
                        continue
                    (s1, m1), (s2, m2) = r1, r2
                    options.append(
                        PosetalTriple(
                            s1,
                            tuple(sorted((m1[a], m2[fmap[a]]) for a in vis1)),
                            s2,
                        )
                    )
                if options:
                    obligations.append(options)
            else:
                if any(a not in fmap for a in d1):
                    continue
                d2 = frozenset(fmap[a] for a in d1)
                r1 = _substate(v1, triple.left, d1)
                r2 = _substate(v2, triple.right, d2)
                if r1 is None or r2 is None:
                    continue  # outside the explored region: benefit of the doubt
                (s1, m1), (s2, m2) = r1, r2
                obligations.append(
                    [
                        PosetalTriple(
                            s1, tuple(sorted((m1[a], m2[fmap[a]]) for a in d1)), s2
                        )
                    ]
                )
        return obligations

    hered: dict = {}
    pending = list(inits)
    while pending:
        t = pending.pop()
        expand(t)
        if hereditary and t not in hered:
            hered[t] = sub_triples(t)
            for options in hered[t]:
                for o in options:
                    if o not in challenges:
                        pending.append(o)

    alive = set(challenges)

    changed = True
    while changed:
        changed = False
        for t in list(alive):
            dead = any(
                not any(n in alive for n in nexts) for _, nexts in challenges[t]
            )
            if not dead and hereditary:
                dead = any(
                    not any(o in alive for o in options) for options in hered[t]
                )
            if dead:
                alive.discard(t)
                changed = True

    winners = [t for t in inits if t in alive]
    if winners:
        return True, tuple(sorted(alive, key=lambda t: (t.left, t.right, t.mapping))), []

    # evidence: for the best initial triple, name an unanswerable challenge,
    # preferring one with no posetal reply at all
    best = None
    for t in inits:
        for desc, nexts in challenges[t]:
            if any(n in alive for n in nexts):
                continue
            score = (1 if nexts else 0, len(desc))
            if best is None or score < best[0]:
                more = " (all replies fail later)" if nexts else ""
                best = (score, f"{desc}; no posetal reply survives{more}")
        if hereditary and best is None:
            for options in hered[t]:
                if not any(o in alive for o in options):
                    best = (
                        (2, 0),
                        "a downward-closed subhistory of the initial match has "
                        "no related counterpart",
                    )
                    break
    return False, (), [best[1] if best else "every initial history match is eventually refuted"]


def _unkey(p: Process, gone: frozenset) -> Process:
    """The term after undoing the given keys: their prefixes turn pending.

    Key removal commutes, so this is the state every order of those reverse
    steps arrives at.
    """
    from .term import Par, Prefix, Relabel, Restrict, Seq, Sum

    if isinstance(p, Prefix):
        body = _unkey(p.body, gone)
        key = None if p.key in gone else p.key
        return Prefix(p.actions, key, body)
    if isinstance(p, Seq):
        return Seq(_unkey(p.left, gone), _unkey(p.right, gone))
    if isinstance(p, Sum):
        return Sum(_unkey(p.left, gone), _unkey(p.right, gone))
    if isinstance(p, Par):
        return Par(_unkey(p.left, gone), _unkey(p.right, gone))
    if isinstance(p, Restrict):
        return Restrict(_unkey(p.body, gone), p.labels)
    if isinstance(p, Relabel):
        return Relabel(_unkey(p.body, gone), p.mapping)
    return p


def _substate(view: _View, sid: int, ids: frozenset):
    """The explored state left after undoing every event outside `ids`.

    Returns (state id, event-id translation into that state's key space),
    or None when the state lies outside the explored region.  The
    translation matters: canonical renumbering shifts the keys the kept
    records carry.
    """
    from .lts import _map_record_keys
    from .term import canonical_keys

    state = view.lts.state(sid)
    kept = frozenset(r for r in state.history if r.event_id in ids)
    gone = frozenset(r.key for r in state.history if r.event_id not in ids)
    if not gone:
        return sid, {r.event_id: r.event_id for r in kept}
    term, ren = canonical_keys(_unkey(state.term, gone))
    sub = view.lts.state_by_key(term, _map_record_keys(kept, ren))
    if sub is None:
        return None
    idmap = {
        r.event_id: (ren.get(r.event_id[0], r.event_id[0]), r.event_id[1])
        for r in kept
    }
    return sub, idmap


# ---------------------------------------------------------------------------
# entry points
# ---------------------------------------------------------------------------

def check(
    p: Process,
    q: Process,
    defs=None,
    bounds: Bounds | None = None,
    flavor: Flavor | str = Flavor.STEP,
    strength: Strength | str = Strength.STRONG,
    direction: str = "both",
) -> Verdict:
    flavor = Flavor(flavor)
    strength = Strength(strength)
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}")
    bounds = bounds or Bounds()
    defs = defs or {}
    l1 = explore(p, defs, bounds)
    l2 = explore(q, defs, bounds)
    bounded = l1.truncated or l2.truncated
    v1, v2 = _View(l1), _View(l2)

    pairs: tuple = ()
    triples: tuple = ()
    if flavor is Flavor.STEP:
        related, pairs, evidence = _check_step(v1, v2, strength, direction)
    elif flavor is Flavor.POMSET:
        related, pairs, evidence = _check_pomset(
            v1, v2, strength, direction, bounds.max_depth
        )
    else:
        related, triples, evidence = _check_hp(
            v1, v2, strength, direction, flavor is Flavor.HHP
        )

    witness = None
    if related:
        witness = Witness(
            flavor,
            strength,
            direction,
            render(p),
            render(q),
            tuple(sorted((n, render(b)) for n, b in (defs or {}).items())),
            bounds,
            pairs=pairs,
            triples=triples,
        )
    return Verdict(related, witness, tuple(evidence), bounded)


def validate_witness(w: Witness) -> bool:
    """Re-check every clause of a claimed witness against a fresh exploration."""
    from .syntax import parse

    try:
        defs = {n: parse(s) for n, s in w.defs}
        p, q = parse(w.left), parse(w.right)
    except Exception:
        return False
    l1 = explore(p, defs, w.bounds)
    l2 = explore(q, defs, w.bounds)
    v1, v2 = _View(l1), _View(l2)
    strength, direction = Strength(w.strength), w.direction

    if w.flavor is Flavor.STEP:
        rel = set(w.pairs)
        if (l1.initial, l2.initial) not in rel:
            return False
        for i, j in rel:
            if i >= len(l1.states) or j >= len(l2.states):
                return False
            m1 = _step_moves(v1, i, strength, direction)
            m2 = _step_moves(v2, j, strength, direction)
            for d, a, t in m1:
                if not any(
                    (d2, a2) == (d, a) and (t, t2) in rel for d2, a2, t2 in m2
                ):
                    return False
            for d, a, t in m2:
                if not any(
                    (d2, a2) == (d, a) and (t2, t) in rel for d2, a2, t2 in m1
                ):
                    return False
        return True

    if w.flavor is Flavor.POMSET:
        rel = set(w.pairs)
        if (l1.initial, l2.initial) not in rel:
            return False
        weak = strength is Strength.WEAK
        budget = w.bounds.max_depth
        for i, j in rel:
            for d in _dirs(direction):
                r1 = v1.runs(i, d, budget, weak)
                r2 = v2.runs(j, d, budget, weak)
                for pom, end in r1:
                    if not any(
                        pomset_isomorphic(pom, pom2) and (end, end2) in rel
                        for pom2, end2 in r2
                    ):
                        return False
                for pom, end in r2:
                    if not any(
                        pomset_isomorphic(pom2, pom) and (end2, end) in rel
                        for pom2, end2 in r1
                    ):
                        return False
        return True

    # hp / hhp
    weak = strength is Strength.WEAK
    triples = set(w.triples)
    if not any(
        t.left == l1.initial and t.right == l2.initial for t in triples
    ):
        return False
    inits = set(_initial_triples(v1, v2, weak))
    if not any(t in inits for t in triples if t.left == l1.initial and t.right == l2.initial):
        return False
    views = (v1, v2)
    for t in triples:
        fmap = dict(t.mapping)
        if t.left >= len(l1.states) or t.right >= len(l2.states):
            return False
        # the map must be a label- and order-preserving bijection
        dom = v1.visible[t.left] if weak else frozenset(v1.actions[t.left])
        cod = v2.visible[t.right] if weak else frozenset(v2.actions[t.right])
        if frozenset(fmap) != dom or frozenset(fmap.values()) != cod:
            return False
        if len(set(fmap.values())) != len(fmap):
            return False
        if any(
            v1.actions[t.left][a] != v2.actions[t.right][b] for a, b in fmap.items()
        ):
            return False
        o1 = v1.visible_order(t.left) if weak else v1.order[t.left]
        o2 = v2.visible_order(t.right) if weak else v2.order[t.right]
        if not _is_order_iso(fmap, o1, o2):
            return False
        for d in _dirs(direction):
            for side in (0, 1):
                va, vd = views[side], views[1 - side]
                astate = t.left if side == 0 else t.right
                dstate = t.right if side == 0 else t.left
                amap = fmap if side == 0 else {b: a for a, b in fmap.items()}
                for e in va.edges(astate, d):
                    if weak:
                        resp = _hp_responses_weak(va, vd, e, amap, dstate)
                    else:
                        resp = _hp_responses_strong(va, vd, e, amap, dstate)
                    hit = False
                    for dst2, cand in resp:
                        if side == 0:
                            t2 = PosetalTriple(e.dst, tuple(sorted(cand.items())), dst2)
                        else:
                            t2 = PosetalTriple(
                                dst2,
                                tuple(sorted((b, a) for a, b in cand.items())),
                                e.dst,
                            )
                        if t2 in triples:
                            hit = True
                            break
                    if not hit:
                        return False
        if w.flavor is Flavor.HHP:
            for d1 in v1.down_closed(t.left):
                if weak:
                    vis1 = d1 & v1.visible[t.left]
                    if any(a not in fmap for a in vis1):
                        continue
                    want = frozenset(fmap[a] for a in vis1)
                    options = []
                    for d2 in v2.down_closed(t.right):
                        if d2 & v2.visible[t.right] != want:
                            continue
                        s1 = _substate(v1, t.left, d1)
                        s2 = _substate(v2, t.right, d2)
                        if s1 is None or s2 is None:
                            continue
                        options.append(
                            PosetalTriple(
                                s1, tuple(sorted((a, fmap[a]) for a in vis1)), s2
                            )
                        )
                    if options and not any(o in triples for o in options):
                        return False
                else:
                    d2 = frozenset(fmap[a] for a in d1)
                    s1 = _substate(v1, t.left, d1)
                    s2 = _substate(v2, t.right, d2)
                    if s1 is None or s2 is None:
                        continue
                    sub = PosetalTriple(
                        s1, tuple(sorted((a, fmap[a]) for a in d1)), s2
                    )
                    if sub not in triples:
                        return False
    return True
