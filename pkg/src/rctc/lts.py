"""Bounded exploration of the keyed transition system.

States pair a canonical term (keys renumbered by first occurrence) with the
history of executed events, so that diamond interleavings that differ only in
key allocation merge.  Forward steps append event records carrying causal
predecessors; reverse steps remove the undone records.  Runs re-derive
transitions from a state so that event identity stays stable along the run,
then abstract each run to its pomset.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .sos import FORWARD, REVERSE, StepLabel, Transition, forward_steps, reverse_steps
from .syntax import parse, render
from .term import (
    Par,
    Prefix,
    Process,
    Relabel,
    Restrict,
    Seq,
    Sum,
    TAU,
    apply_relabel,
    canonical_keys,
    keys,
)

EventId = tuple[int, int]


@dataclass(frozen=True)
class Bounds:
    max_depth: int = 6  # keyed events beyond the initial history, per state
    max_width: int = 3
    max_states: int = 20000

    def __post_init__(self):
        if min(self.max_depth, self.max_width, self.max_states) < 1:
            raise ValueError("bounds must all be at least 1")


@dataclass(frozen=True)
class EventRecord:
    event_id: EventId
    action: str
    key: int | None  # None only for silent pseudo-events inside runs
    causes: frozenset[EventId] = frozenset()


@dataclass(frozen=True)
class State:
    id: int
    term: Process
    history: frozenset[EventRecord]


@dataclass(frozen=True)
class LtsEdge:
    src: int
    dst: int
    label: StepLabel
    direction: str
    # Event records created by this edge (ids in the target state's key
    # space) and removed by it (ids in the source state's key space).
    added: frozenset[EventId] = frozenset()
    removed: frozenset[EventId] = frozenset()
    # Surviving records' ids, source space -> target space.  Key renumbering
    # can shift ids between states, so id-level games need the transport.
    carried: tuple[tuple[EventId, EventId], ...] = ()


@dataclass(frozen=True)
class KeyedLts:
    states: tuple[State, ...]
    edges: tuple[LtsEdge, ...]
    initial: int
    truncated: bool
    bounds: Bounds
    defs: tuple = ()

    def state(self, sid: int) -> State:
        return self.states[sid]

    def defs_dict(self) -> dict:
        return dict(self.defs)

    def out_edges(self, sid: int, direction: str | None = None) -> tuple[LtsEdge, ...]:
        adj = self._adjacency()
        es = adj.get(sid, ())
        if direction is None:
            return es
        return tuple(e for e in es if e.direction == direction)

    def state_by_history(self, history: frozenset[EventRecord]) -> int | None:
        """A state with exactly this history, if unique enough to be useful.

        Histories do not determine states (a silent vanish changes the term
        but not the history); prefer state_by_key when the term is at hand.
        """
        return self._history_index().get(history)

    def state_by_key(self, term: Process, history: frozenset[EventRecord]) -> int | None:
        """The state with exactly this canonical term and history, if explored."""
        if not hasattr(self, "_by_key"):
            object.__setattr__(
                self, "_by_key", {(s.term, s.history): s.id for s in self.states}
            )
        return self._by_key.get((term, history))

    def _adjacency(self):
        if not hasattr(self, "_adj"):
            adj: dict[int, list[LtsEdge]] = {}
            for e in self.edges:
                adj.setdefault(e.src, []).append(e)
            object.__setattr__(self, "_adj", {k: tuple(v) for k, v in adj.items()})
        return self._adj

    def _history_index(self):
        if not hasattr(self, "_by_hist"):
            object.__setattr__(
                self, "_by_hist", {s.history: s.id for s in self.states}
            )
        return self._by_hist


# ---------------------------------------------------------------------------
# Histories
# ---------------------------------------------------------------------------

def _map_record_keys(recs: Iterable[EventRecord], ren: Mapping[int, int]) -> frozenset[EventRecord]:
    def mid(eid: EventId) -> EventId:
        return (ren.get(eid[0], eid[0]), eid[1])

    return frozenset(
        EventRecord(
            mid(r.event_id),
            r.action,
            ren.get(r.key, r.key) if r.key is not None else None,
            frozenset(mid(c) for c in r.causes),
        )
        for r in recs
    )


def structural_history(p: Process) -> frozenset[EventRecord]:
    """Reconstruct the event records a keyed term carries, mirroring how the
    derivation engine assigns causes (enclosing executed prefixes, the left
    part of a sequence, merged choice branches, fused synchronizations)."""
    raw = _collect(p, frozenset())
    by_key: dict[int, list[tuple[int, str, frozenset[int]]]] = {}
    for key, idx, action, causes in raw:
        by_key.setdefault(key, []).append((idx, action, causes))
    records = []
    for key, entries in by_key.items():
        for idx, action, causes in entries:
            cause_ids = frozenset(
                (k2, i2)
                for k2, es in by_key.items()
                if k2 in causes
                for i2, _, _ in es
            )
            records.append(EventRecord((key, idx), action, key, cause_ids))
    return frozenset(records)


def _collect(p: Process, ambient: frozenset[int]) -> list[tuple[int, int, str, frozenset[int]]]:
    if isinstance(p, Prefix):
        out = []
        inner = ambient
        if p.key is not None:
            out = [(p.key, i, a, ambient) for i, a in enumerate(p.actions)]
            inner = ambient | {p.key}
        return out + _collect(p.body, inner)
    if isinstance(p, Seq):
        return _collect(p.left, ambient) + _collect(p.right, ambient | keys(p.left))
    if isinstance(p, Sum):
        merged: dict[tuple[int, int, str], frozenset[int]] = {}
        for key, idx, action, causes in _collect(p.left, ambient) + _collect(p.right, ambient):
            k = (key, idx, action)
            merged[k] = merged.get(k, frozenset()) | causes
        return [(key, idx, action, causes) for (key, idx, action), causes in merged.items()]
    if isinstance(p, Par):
        left, right = _collect(p.left, ambient), _collect(p.right, ambient)
        shared = {k for k, *_ in left} & {k for k, *_ in right}
        out = [e for e in left + right if e[0] not in shared]
        for k in sorted(shared):  # a synchronized pair fuses into one τ event
            causes = frozenset().union(
                *(c for key, _, _, c in left + right if key == k)
            )
            out.append((k, 0, TAU, causes))
        return out
    if isinstance(p, Restrict):
        return _collect(p.body, ambient)
    if isinstance(p, Relabel):
        f = p.as_dict()
        return [
            (key, idx, apply_relabel(f, action), causes)
            for key, idx, action, causes in _collect(p.body, ambient)
        ]
    return []


def _records_for_step(detail, history: frozenset[EventRecord]):
    """New event records for one forward step, ids in the source key space."""
    new = []
    seen_per_key: dict[int, int] = {}
    for action, key, cause_keys, _sync in detail:
        if key is None:  # a vanished silent prefix records nothing
            continue
        idx = seen_per_key.get(key, 0)
        seen_per_key[key] = idx + 1
        cause_ids = frozenset(r.event_id for r in history if r.key in cause_keys)
        new.append(EventRecord((key, idx), action, key, cause_ids))
    return new


# ---------------------------------------------------------------------------
# Exploration
# ---------------------------------------------------------------------------

def _edge_sort_key(t: Transition):
    evs = tuple((a, -1 if k is None else k) for a, k in t.label.events)
    return (t.direction, evs, sorted(t.label.sync_keys), render(t.target))


def explore(p: Process, defs=None, bounds: Bounds | None = None) -> KeyedLts:
    """BFS over forward and reverse steps up to bounds.

    Forward growth is capped at max_depth keyed events beyond the initial
    history; silent vanishes are free (the state budget still applies).
    Truncation of any kind is flagged, never silent.
    """
    defs = defs or {}
    bounds = bounds or Bounds()
    defs_tuple = tuple(sorted(defs.items()))

    hist0 = _map_record_keys(structural_history(p), {})
    term0, ren0 = canonical_keys(p)
    hist0 = _map_record_keys(hist0, ren0)

    index: dict[tuple[Process, frozenset[EventRecord]], int] = {(term0, hist0): 0}
    statelist: list[tuple[Process, frozenset[EventRecord]]] = [(term0, hist0)]
    edges: list[LtsEdge] = []
    edge_seen: set = set()
    truncated = False
    base = len(hist0)
    queue = deque([0])

    def intern(term, hist) -> int | None:
        nonlocal truncated
        key = (term, hist)
        sid = index.get(key)
        if sid is not None:
            return sid
        if len(statelist) >= bounds.max_states:
            truncated = True
            return None
        sid = len(statelist)
        index[key] = sid
        statelist.append(key)
        queue.append(sid)
        return sid

    while queue:
        sid = queue.popleft()
        term, hist = statelist[sid]

        for t in sorted(forward_steps(term, defs, bounds.max_width), key=_edge_sort_key):
            new_records = _records_for_step(t.detail, hist)
            if len(hist) + len(new_records) - base > bounds.max_depth:
                truncated = True
                continue
            ct, ren = canonical_keys(t.target)
            ch = _map_record_keys(set(hist) | set(new_records), ren)
            dst = intern(ct, ch)
            if dst is None:
                continue
            label = StepLabel(
                t.label.events, frozenset(ren.get(k, k) for k in t.label.sync_keys)
            )
            added = frozenset(
                (ren.get(r.event_id[0], r.event_id[0]), r.event_id[1]) for r in new_records
            )
            carried = tuple(
                sorted(
                    (r.event_id, (ren.get(r.event_id[0], r.event_id[0]), r.event_id[1]))
                    for r in hist
                )
            )
            e = LtsEdge(sid, dst, label, FORWARD, added=added, carried=carried)
            if (sid, dst, label, FORWARD) not in edge_seen:
                edge_seen.add((sid, dst, label, FORWARD))
                edges.append(e)

        for t in sorted(reverse_steps(term, defs, bounds.max_width), key=_edge_sort_key):
            undone_keys = {k for _, k in t.label.events if k is not None}
            removed = frozenset(r.event_id for r in hist if r.key in undone_keys)
            kept = frozenset(r for r in hist if r.key not in undone_keys)
            ct, ren = canonical_keys(t.target)
            ch = _map_record_keys(kept, ren)
            dst = intern(ct, ch)
            if dst is None:
                continue
            carried = tuple(
                sorted(
                    (r.event_id, (ren.get(r.event_id[0], r.event_id[0]), r.event_id[1]))
                    for r in kept
                )
            )
            e = LtsEdge(sid, dst, t.label, REVERSE, removed=removed, carried=carried)
            if (sid, dst, t.label, REVERSE) not in edge_seen:
                edge_seen.add((sid, dst, t.label, REVERSE))
                edges.append(e)

    states = tuple(State(i, term, hist) for i, (term, hist) in enumerate(statelist))
    return KeyedLts(states, tuple(edges), 0, truncated, bounds, defs_tuple)


# ---------------------------------------------------------------------------
# Pomsets and runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Pomset:
    """Labelled events under a strict partial order; ids are opaque."""

    events: tuple[tuple[EventId, str], ...]
    order: frozenset[tuple[EventId, EventId]]

    def actions(self) -> tuple[str, ...]:
        return tuple(sorted(a for _, a in self.events))

    def __len__(self) -> int:
        return len(self.events)


EMPTY_POMSET = Pomset((), frozenset())


@dataclass(frozen=True)
class PomsetRun:
    events: tuple[tuple[EventId, str], ...]
    order: frozenset[tuple[EventId, EventId]]
    end_state: int

    def pomset(self) -> Pomset:
        return Pomset(self.events, self.order)


def _closure(pairs: set[tuple[EventId, EventId]]) -> frozenset[tuple[EventId, EventId]]:
    succ: dict[EventId, set[EventId]] = {}
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


def _invariant(pom: Pomset):
    below = {e: 0 for e, _ in pom.events}
    above = {e: 0 for e, _ in pom.events}
    for a, b in pom.order:
        above[a] += 1
        below[b] += 1
    return tuple(sorted((act, below[e], above[e]) for e, act in pom.events))


def pomset_isomorphic(x: Pomset, y: Pomset) -> bool:
    """Label- and order-preserving bijection, by backtracking search."""
    if len(x) != len(y) or len(x.order) != len(y.order):
        return False
    if _invariant(x) != _invariant(y):
        return False
    xe = [e for e, _ in x.events]
    ye = [e for e, _ in y.events]
    xl = dict(x.events)
    yl = dict(y.events)
    xo, yo = x.order, y.order

    def ok(partial: dict, e1, e2) -> bool:
        if xl[e1] != yl[e2]:
            return False
        for d1, d2 in partial.items():
            if ((e1, d1) in xo) != ((e2, d2) in yo):
                return False
            if ((d1, e1) in xo) != ((d2, e2) in yo):
                return False
        return True

    def go(i: int, partial: dict, used: set) -> bool:
        if i == len(xe):
            return True
        e1 = xe[i]
        for e2 in ye:
            if e2 in used or not ok(partial, e1, e2):
                continue
            partial[e1] = e2
            if go(i + 1, partial, used | {e2}):
                return True
            del partial[e1]
        return False

    return go(0, {}, set())


def _dedupe_pomsets(items: list) -> list:
    """Keep one representative per (end_state, pomset-isomorphism) class."""
    buckets: dict[tuple, list] = {}
    out = []
    for run in items:
        pom = run.pomset()
        key = (run.end_state, _invariant(pom))
        kept = buckets.setdefault(key, [])
        if any(pomset_isomorphic(pom, other.pomset()) for other in kept):
            continue
        kept.append(run)
        out.append(run)
    return out


def pomset_runs(lts: KeyedLts, from_state: int, max_events: int) -> list[PomsetRun]:
    """All forward runs of at most max_events events from a state, each
    abstracted to its pomset, deduplicated up to isomorphism per end state."""
    return _runs(lts, from_state, max_events, FORWARD)


def reverse_runs(lts: KeyedLts, from_state: int, max_events: int) -> list[PomsetRun]:
    """Reverse mirror of pomset_runs: the pomset collects the undone events
    under their recorded causal order."""
    return _runs(lts, from_state, max_events, REVERSE)


def _runs(lts: KeyedLts, from_state: int, max_events: int, direction: str) -> list[PomsetRun]:
    defs = lts.defs_dict()
    width = lts.bounds.max_width
    start = lts.state(from_state)
    out: list[PomsetRun] = []
    pseudo = [0]

    def emit(events, order_pairs, sid):
        ids = {e for e, _ in events}
        order = _closure({(a, b) for a, b in order_pairs if a in ids and b in ids})
        out.append(PomsetRun(tuple(events), order, sid))

    def walk_forward(term, hist, events, order_pairs, sid, budget, silent_seen):
        emit(events, order_pairs, sid)
        for t in sorted(forward_steps(term, defs, width), key=_edge_sort_key):
            # Silent vanishes are budget-free, mirroring exploration depth;
            # recorded events alone consume the event budget.
            step_n = sum(1 for _, key, _c, _s in t.detail if key is not None)
            if step_n > budget:
                continue
            new_records = _records_for_step(t.detail, hist)
            step_events = []
            step_order = []
            for action, key, cause_keys, _sync in t.detail:
                if key is None:
                    pseudo[0] += 1
                    eid: EventId = (-pseudo[0], 0)
                    causes = frozenset(
                        r.event_id for r in hist if r.key in cause_keys
                    )
                else:
                    idx = sum(1 for e, _ in step_events if e[0] == key)
                    eid = (key, idx)
                    causes = frozenset(r.event_id for r in hist if r.key in cause_keys)
                step_events.append((eid, action))
                step_order.extend((c, eid) for c in causes)
            nh = hist | frozenset(new_records)
            ct, ren = canonical_keys(t.target)
            nsid = lts.state_by_key(ct, _map_record_keys(nh, ren))
            if nsid is None:
                continue  # outside the explored region
            if step_n == 0:
                if nsid in silent_seen:
                    continue  # a purely silent cycle adds no pomset
                seen = silent_seen | {nsid}
            else:
                seen = frozenset((nsid,))
            walk_forward(
                t.target,
                nh,
                events + step_events,
                order_pairs + step_order,
                nsid,
                budget - step_n,
                seen,
            )

    def walk_reverse(term, hist, undone, sid, budget, silent_seen):
        events = sorted(
            ((r.event_id, r.action) for r in undone), key=lambda e: (e[0], e[1])
        )
        pairs = {(a.event_id, b.event_id) for a in undone for b in undone
                 if a.event_id in b.causes}
        emit(list(events), list(pairs), sid)
        for t in sorted(reverse_steps(term, defs, width), key=_edge_sort_key):
            step_n = sum(1 for _, key, _c, _s in t.detail if key is not None)
            if step_n > budget:
                continue
            undone_keys = {k for _, k in t.label.events if k is not None}
            gone = frozenset(r for r in hist if r.key in undone_keys)
            pseudo_evs = []
            for action, key, _causes, _sync in t.detail:
                if key is None:
                    pseudo[0] += 1
                    pseudo_evs.append(EventRecord((-pseudo[0], 0), action, None))
            kept = frozenset(r for r in hist if r.key not in undone_keys)
            ct, ren = canonical_keys(t.target)
            nsid = lts.state_by_key(ct, _map_record_keys(kept, ren))
            if nsid is None:
                continue
            if step_n == 0:
                if nsid in silent_seen:
                    continue
                seen = silent_seen | {nsid}
            else:
                seen = frozenset((nsid,))
            walk_reverse(
                t.target,
                kept,
                undone | gone | frozenset(pseudo_evs),
                nsid,
                budget - step_n,
                seen,
            )

    # Run enumeration works on the state's own (canonical) term: event ids
    # stay stable because no renumbering happens inside one run.
    if direction == FORWARD:
        walk_forward(start.term, start.history, [], [], from_state,
                     max_events, frozenset((from_state,)))
    else:
        walk_reverse(start.term, start.history, frozenset(), from_state,
                     max_events, frozenset((from_state,)))
    return _dedupe_pomsets(out)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _record_json(r: EventRecord):
    return {
        "id": list(r.event_id),
        "action": r.action,
        "key": r.key,
        "causes": sorted(list(c) for c in r.causes),
    }


def export(lts: KeyedLts, format: str = "graph-text") -> str:
    """Stable textual form; the machine-readable flavor round-trips."""
    if format == "machine-readable":
        doc = {
            "initial": lts.initial,
            "truncated": lts.truncated,
            "bounds": {
                "max_depth": lts.bounds.max_depth,
                "max_width": lts.bounds.max_width,
                "max_states": lts.bounds.max_states,
            },
            "defs": {name: render(body) for name, body in lts.defs},
            "states": [
                {
                    "id": s.id,
                    "term": render(s.term),
                    "history": sorted(
                        (_record_json(r) for r in s.history),
                        key=lambda d: (d["id"], d["action"]),
                    ),
                }
                for s in lts.states
            ],
            "edges": sorted(
                (
                    {
                        "src": e.src,
                        "dst": e.dst,
                        "direction": e.direction,
                        "events": [[a, k] for a, k in e.label.events],
                        "keys": sorted(e.label.sync_keys),
                        "added": sorted(list(x) for x in e.added),
                        "removed": sorted(list(x) for x in e.removed),
                        "carried": [[list(a), list(b)] for a, b in e.carried],
                    }
                    for e in lts.edges
                ),
                key=lambda d: (d["src"], d["dst"], d["direction"], d["events"]),
            ),
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    if format != "graph-text":
        raise ValueError(f"unknown export format {format!r}")

    lines = [
        f"states: {len(lts.states)}  edges: {len(lts.edges)}  "
        f"initial: {lts.initial}  truncated: {'yes' if lts.truncated else 'no'}"
    ]
    for s in lts.states:
        lines.append(f"state {s.id}: {render(s.term)}")
        if s.history:
            hist = ", ".join(
                f"{r.action}[{r.key}]" for r in sorted(s.history, key=lambda r: r.event_id)
            )
            lines.append(f"  history: {hist}")
    for e in sorted(lts.edges, key=lambda e: (e.src, e.dst, e.direction, str(e.label))):
        arrow = "-->" if e.direction == FORWARD else "~~>"
        lines.append(f"edge {e.src} --{e.label}{arrow} {e.dst}")
    return "\n".join(lines) + "\n"


def import_lts(text: str) -> KeyedLts:
    """Rebuild a KeyedLts from its machine-readable export."""
    doc = json.loads(text)
    bounds = Bounds(**doc["bounds"])
    defs = tuple(sorted((name, parse(src)) for name, src in doc["defs"].items()))
    states = []
    for sd in doc["states"]:
        history = frozenset(
            EventRecord(
                tuple(rd["id"]),
                rd["action"],
                rd["key"],
                frozenset(tuple(c) for c in rd["causes"]),
            )
            for rd in sd["history"]
        )
        states.append(State(sd["id"], parse(sd["term"]), history))
    edges = tuple(
        LtsEdge(
            ed["src"],
            ed["dst"],
            StepLabel(tuple((a, k) for a, k in ed["events"]), frozenset(ed["keys"])),
            ed["direction"],
            frozenset(tuple(x) for x in ed["added"]),
            frozenset(tuple(x) for x in ed["removed"]),
            tuple((tuple(a), tuple(b)) for a, b in ed["carried"]),
        )
        for ed in doc["edges"]
    )
    return KeyedLts(tuple(states), edges, doc["initial"], doc["truncated"], bounds, defs)
