"""Transition derivation: forward and reverse; single-event, step, and weak.

The engine produces *moves* — event sets plus a target term — for every rule
of the calculus: prefix groups firing atomically under a shared key, keyed
prefixes undoing when their body is standard, sequencing gated on the left
part being fully executed, choices advancing in lockstep when both branches
offer the same signature, parallel components interleaving, combining into
wider steps, and fusing complementary singles into keyed synchronizations.

Fresh keys are allocated as negative placeholders during derivation and
renumbered left-to-right over the target (max_key of the source + 1, +2, ...)
when a transition is published.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator

from .term import (
    Const,
    Nil,
    Par,
    Prefix,
    Process,
    Relabel,
    Restrict,
    Seq,
    Sum,
    TAU,
    TermError,
    complement,
    is_fully_executed,
    is_standard,
    keys,
    keys_preorder,
    label_name,
    map_keys,
    max_key,
)

FORWARD = "forward"
REVERSE = "reverse"

_UNFOLD_NOTE = "constant unfolds into itself without consuming a prefix"


# ---------------------------------------------------------------------------
# Public label/transition types
# ---------------------------------------------------------------------------

def _fmt_event(action: str, key: int | None) -> str:
    return action if key is None else f"{action}[{key}]"


@dataclass(frozen=True)
class StepLabel:
    """A step: the multiset of events fired (or undone) together.

    Forward events are bare actions (their keys are drawn on the target);
    reverse events carry the keys they undo.  ``sync_keys`` lists the keys of
    the synchronization pairs consumed or produced by this step.
    """

    events: tuple[tuple[str, int | None], ...]
    sync_keys: frozenset[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(sorted(self.events, key=_ev_order)))

    def actions(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.events)

    def visible(self) -> tuple[tuple[str, int | None], ...]:
        return tuple(e for e in self.events if e[0] != TAU)

    def is_silent(self) -> bool:
        return all(a == TAU for a, _ in self.events)

    def __str__(self) -> str:
        return "{" + ", ".join(_fmt_event(a, k) for a, k in self.events) + "}"


def _ev_order(ev: tuple[str, int | None]):
    action, key = ev
    return (action, key is not None, key if key is not None else 0)


@dataclass(frozen=True)
class Transition:
    source: Process
    label: StepLabel
    direction: str  # FORWARD or REVERSE
    target: Process
    # Per-event derivation data (action, key, cause keys, is-sync), used by
    # the exploration layer; not part of the transition's identity.
    detail: tuple = field(default=(), compare=False)

    def __str__(self) -> str:
        arrow = "-->" if self.direction == FORWARD else "~~>"
        return f"{self.source} --{self.label}{arrow} {self.target}"


class TransitionSet(set):
    """A set of transitions; ``truncated`` marks an exhausted τ-closure."""

    truncated = False


# ---------------------------------------------------------------------------
# Internal move representation
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class _Ev:
    action: str
    key: int | None  # negative while still a placeholder; None for vanish-τ
    causes: frozenset[int] = frozenset()
    shared: bool = False  # key shared with the other members of one group
    sync: bool = False  # a synchronization τ (or its undoing)


@dataclass(frozen=True, slots=True)
class _Move:
    events: tuple[_Ev, ...]
    target: Process


def _with_causes(m: _Move, extra: frozenset[int], target: Process) -> _Move:
    if not extra:
        return _Move(m.events, target)
    evs = tuple(
        _Ev(e.action, e.key, e.causes | extra, e.shared, e.sync) for e in m.events
    )
    return _Move(evs, target)


def _placeholders(m: _Move) -> list[int]:
    return [k for k in keys_preorder(m.target) if k < 0]


def _rename(m: _Move, ren: dict[int, int]) -> _Move:
    if not ren:
        return m
    evs = tuple(
        _Ev(
            e.action,
            ren.get(e.key, e.key) if e.key is not None else None,
            e.causes,
            e.shared,
            e.sync,
        )
        for e in m.events
    )
    return _Move(evs, map_keys(m.target, ren))


def _normalize(m: _Move) -> _Move:
    """Canonical placeholder names -1, -2, ... by target scan order."""
    ren = {k: -(i + 1) for i, k in enumerate(_placeholders(m))}
    if all(k == v for k, v in ren.items()):
        return m
    return _rename(m, ren)


def _shift(m: _Move, offset: int) -> _Move:
    """Move placeholders out of the way of another move's."""
    ren = {k: k - offset for k in _placeholders(m)}
    return _rename(m, ren)


def _move_keys(m: _Move) -> frozenset[int]:
    return frozenset(e.key for e in m.events if e.key is not None)


# Union-find over placeholder keys, used when a pairing forces keys to agree.
def _find(parent: dict[int, int], k: int) -> int:
    while parent.get(k, k) != k:
        parent[k] = parent.get(parent[k], parent[k])
        k = parent[k]
    return k


def _union(parent: dict[int, int], a: int, b: int):
    ra, rb = _find(parent, a), _find(parent, b)
    if ra != rb:
        # Deterministic representative: the smaller placeholder.
        lo, hi = (ra, rb) if ra < rb else (rb, ra)
        parent[hi] = lo


def _resolve(parent: dict[int, int]) -> dict[int, int]:
    return {k: _find(parent, k) for k in list(parent)}


# ---------------------------------------------------------------------------
# Rule engine
# ---------------------------------------------------------------------------

def _defs_key(defs) -> tuple:
    if not defs:
        return ()
    return tuple(sorted(defs.items()))


@lru_cache(maxsize=None)
def _defs_dict(defs_key: tuple) -> dict:
    return dict(defs_key)


def _signature(m: _Move, direction: str):
    if direction == FORWARD:
        return tuple(sorted((e.action, e.key is not None) for e in m.events))
    return tuple(sorted(((e.action, e.key) for e in m.events), key=_ev_order))


def _dedupe(moves: Iterable[_Move]) -> tuple[_Move, ...]:
    out: dict[tuple, _Move] = {}
    for m in moves:
        out.setdefault((m.events, m.target), m)
    return tuple(out.values())


@lru_cache(maxsize=120_000)
def _derive(
    p: Process,
    defs_key: tuple,
    direction: str,
    width: int,
    mode: str,
    seen: frozenset,
) -> tuple[_Move, ...]:
    forward = direction == FORWARD
    sub = lambda q: _derive(q, defs_key, direction, width, mode, seen)

    if isinstance(p, Nil):
        return ()

    if isinstance(p, Const):
        if p.name in seen:
            raise TermError(f"{_UNFOLD_NOTE}: {p.name}")
        defs = _defs_dict(defs_key)
        if p.name not in defs:
            from .term import UnresolvedConstantError

            raise UnresolvedConstantError(p.name)
        return _derive(defs[p.name], defs_key, direction, width, mode, seen | {p.name})

    if isinstance(p, Prefix):
        return _prefix_moves(p, sub, forward)

    if isinstance(p, Seq):
        out = []
        if is_standard(p.right):
            for m in sub(p.left):
                out.append(_with_causes(m, frozenset(), Seq(m.target, p.right)))
        if is_fully_executed(p.left):
            gate = keys(p.left) if forward else frozenset()
            for m in sub(p.right):
                out.append(_with_causes(m, gate, Seq(p.left, m.target)))
        return _dedupe(out)

    if isinstance(p, Sum):
        return _sum_moves(p, sub, direction)

    if isinstance(p, Par):
        return _par_moves(p, sub, direction, width, mode)

    if isinstance(p, Restrict):
        out = []
        for m in sub(p.body):
            if all(e.action == TAU or label_name(e.action) not in p.labels for e in m.events):
                out.append(_Move(m.events, Restrict(m.target, p.labels)))
        return _dedupe(out)

    if isinstance(p, Relabel):
        f = p.as_dict()
        out = []
        for m in sub(p.body):
            evs = tuple(
                _Ev(_map_action(f, e.action), e.key, e.causes, e.shared, e.sync)
                for e in m.events
            )
            out.append(_Move(evs, Relabel(m.target, p.mapping)))
        return _dedupe(out)

    raise TermError(f"unknown process {p!r}")


def _map_action(f: dict, action: str) -> str:
    if action == TAU:
        return TAU
    from .term import apply_relabel

    return apply_relabel(f, action)


def _prefix_moves(p: Prefix, sub, forward: bool) -> tuple[_Move, ...]:
    out = []
    if p.key is None:
        if p.actions == (TAU,):
            # The silent prefix vanishes in both directions; it never draws a
            # key, so nothing records its passing.
            out.append(_Move((_Ev(TAU, None),), p.body))
        elif forward:
            shared = len(p.actions) > 1
            evs = tuple(_Ev(a, -1, frozenset(), shared) for a in p.actions)
            out.append(_normalize(_Move(evs, Prefix(p.actions, -1, p.body))))
        # A pending visible prefix freezes its body in both directions.
        return _dedupe(out)

    # Executed prefix: the body runs (and rewinds) underneath it.
    for m in sub(p.body):
        out.append(_with_causes(m, frozenset([p.key]) if forward else frozenset(), Prefix(p.actions, p.key, m.target)))
    if not forward and is_standard(p.body):
        shared = len(p.actions) > 1
        evs = tuple(_Ev(a, p.key, frozenset(), shared) for a in p.actions)
        out.append(_Move(evs, Prefix(p.actions, None, p.body)))
    return _dedupe(out)


def _sum_moves(p: Sum, sub, direction: str) -> tuple[_Move, ...]:
    kl, kr = keys(p.left), keys(p.right)
    if kl > kr:  # the right summand lost the choice and is inert
        return _dedupe(_committed_moves(p, sub, direction, left_won=True))
    if kr > kl:
        return _dedupe(_committed_moves(p, sub, direction, left_won=False))

    moves_l, moves_r = sub(p.left), sub(p.right)
    sigs_l = [_signature(m, direction) for m in moves_l]
    sigs_r = [_signature(m, direction) for m in moves_r]
    out = []
    for ml, sig in zip(moves_l, sigs_l):
        partners = [mr for mr, s in zip(moves_r, sigs_r) if s == sig]
        if partners:
            for mr in partners:
                out.extend(_lockstep(ml, mr, direction))
        elif direction == FORWARD:
            out.append(_Move(ml.events, Sum(ml.target, p.right)))
        elif _move_keys(ml).isdisjoint(kr):
            out.append(_Move(ml.events, Sum(ml.target, p.right)))
    for mr, sig in zip(moves_r, sigs_r):
        if any(s == sig for s in sigs_l):
            continue  # lockstep already emitted from the left pass
        if direction == FORWARD or _move_keys(mr).isdisjoint(kl):
            out.append(_Move(mr.events, Sum(p.left, mr.target)))
    return _dedupe(out)


def _committed_moves(p: Sum, sub, direction: str, left_won: bool) -> list[_Move]:
    """Moves of a resolved choice.

    The winning side runs freely, but the loser still holds its copy of every
    event recorded before the choice fell.  Undoing such an event must erase
    both copies in the same step; undoing it on one side alone would leave the
    two summands remembering different pasts.  A group undo touching shared
    keys therefore pairs with a move of the losing copy undoing exactly the
    shared part, and is dropped when no such move exists (the frozen copy's
    own causality can forbid it).
    """
    live, dead = (p.left, p.right) if left_won else (p.right, p.left)
    dead_keys = keys(dead)
    rebuild = (lambda a, b: Sum(a, b)) if left_won else (lambda a, b: Sum(b, a))
    out = []
    erasers = None
    for m in sub(live):
        if direction == FORWARD or _move_keys(m).isdisjoint(dead_keys):
            out.append(_Move(m.events, rebuild(m.target, dead)))
            continue
        if erasers is None:
            erasers = sub(dead)
        want = sorted((e.action, e.key) for e in m.events if e.key in dead_keys)
        for md in erasers:
            if sorted((e.action, e.key) for e in md.events) == want:
                out.append(_Move(m.events, rebuild(m.target, md.target)))
    return out


def _lockstep(ml: _Move, mr: _Move, direction: str) -> Iterator[_Move]:
    """Both summands advance together on one signature, sharing keys."""
    if direction == REVERSE:
        # Keys already agree (the signature includes them); no rewriting.
        yield _Move(ml.events, Sum(ml.target, mr.target))
        return
    mr = _shift(mr, len(_placeholders(ml)))
    for pairing in _event_bijections(ml.events, mr.events):
        parent: dict[int, int] = {}
        for el, er in pairing:
            if el.key is not None:
                _union(parent, el.key, er.key)
        ren = _resolve(parent)
        evs = tuple(
            _Ev(
                el.action,
                ren.get(el.key, el.key) if el.key is not None else None,
                el.causes | er.causes,
                el.shared,
                el.sync,
            )
            for el, er in pairing
        )
        yield _normalize(_Move(evs, Sum(map_keys(ml.target, ren), map_keys(mr.target, ren))))


def _event_bijections(evs_l, evs_r):
    """Total bijections pairing events of equal forward signature."""
    by_l: dict[tuple, list[_Ev]] = {}
    by_r: dict[tuple, list[_Ev]] = {}
    for e in evs_l:
        by_l.setdefault((e.action, e.key is not None), []).append(e)
    for e in evs_r:
        by_r.setdefault((e.action, e.key is not None), []).append(e)
    if set(by_l) != set(by_r) or any(len(by_l[s]) != len(by_r[s]) for s in by_l):
        return
    sigs = sorted(by_l)
    per_class = [
        [list(zip(by_l[s], perm)) for perm in itertools.permutations(by_r[s])]
        for s in sigs
    ]
    for choice in itertools.product(*per_class):
        yield [pair for cls in choice for pair in cls]


def _par_moves(p: Par, sub, direction: str, width: int, mode: str) -> tuple[_Move, ...]:
    forward = direction == FORWARD
    moves_l, moves_r = sub(p.left), sub(p.right)
    out = []

    # Interleavings.  Reversing one side alone additionally requires the
    # other side to hold no undo of the same key (else a synchronized pair
    # could be split); a strict mode demands the other side be fully inert.
    if forward:
        out.extend(_Move(m.events, Par(m.target, p.right)) for m in moves_l)
        out.extend(_Move(m.events, Par(p.left, m.target)) for m in moves_r)
    else:
        block_l = _rev_block(moves_r)
        block_r = _rev_block(moves_l)
        for m in moves_l:
            if mode == "strict" and moves_r:
                continue
            if _move_keys(m).isdisjoint(block_l):
                out.append(_Move(m.events, Par(m.target, p.right)))
        for m in moves_r:
            if mode == "strict" and moves_l:
                continue
            if _move_keys(m).isdisjoint(block_r):
                out.append(_Move(m.events, Par(p.left, m.target)))

    # Combinations: both sides move in the same round.  The same key-wise
    # guard applies to an event left unpaired in the round: undoing one half
    # of a synchronization while its partner stays put would split the pair.
    if forward:
        block_l = block_r = frozenset()
    for ml in moves_l:
        for mr in moves_r:
            out.extend(_combine(ml, mr, forward, width, block_l, block_r))
    return _dedupe(out)


def _rev_block(moves) -> frozenset[int]:
    blocked: set[int] = set()
    for m in moves:
        blocked |= _move_keys(m)
    return frozenset(blocked)


def _pairable(e: _Ev, forward: bool) -> bool:
    if e.action == TAU or e.shared:
        return False
    return e.key is not None  # placeholders forward, real keys in reverse


def _combine(
    ml: _Move,
    mr: _Move,
    forward: bool,
    width: int,
    block_l: frozenset[int] = frozenset(),
    block_r: frozenset[int] = frozenset(),
) -> Iterator[_Move]:
    if forward:
        mr = _shift(mr, len(_placeholders(ml)))
    evs_l, evs_r = ml.events, mr.events
    candidates = []
    for i, el in enumerate(evs_l):
        for j, er in enumerate(evs_r):
            if not (_pairable(el, forward) and _pairable(er, forward)):
                continue
            if er.action != complement(el.action):
                continue
            if not forward and el.key != er.key:
                continue  # undoing a synchronization needs its shared key
            candidates.append((i, j))

    for matching in _matchings(candidates):
        used_l = {i for i, _ in matching}
        used_r = {j for _, j in matching}
        # Complementary survivors are tolerated here: a survivor may still be
        # paired higher up, against an event from outside this composition.
        # Steps in which such a pair ultimately goes unpaired are dropped at
        # the top level (_unfused), where the whole step is in view.
        if len(evs_l) + len(evs_r) - len(matching) > width:
            continue
        if not forward:
            # An unpaired undo whose key the other side also holds would
            # split a synchronized pair across rounds.
            split = any(
                el.key in block_l
                for i, el in enumerate(evs_l)
                if i not in used_l and el.key is not None
            ) or any(
                er.key in block_r
                for j, er in enumerate(evs_r)
                if j not in used_r and er.key is not None
            )
            if split:
                continue
        parent: dict[int, int] = {}
        taus = []
        for i, j in matching:
            el, er = evs_l[i], evs_r[j]
            if forward:
                _union(parent, el.key, er.key)
            taus.append((el, er))
        ren = _resolve(parent)
        evs = []
        for el, er in taus:
            key = ren.get(el.key, el.key)
            taus_causes = el.causes | er.causes
            evs.append(_Ev(TAU, key, taus_causes, False, True))
        for i, el in enumerate(evs_l):
            if i not in used_l:
                evs.append(_rename_ev(el, ren))
        for j, er in enumerate(evs_r):
            if j not in used_r:
                evs.append(_rename_ev(er, ren))
        move = _Move(
            tuple(evs),
            Par(map_keys(ml.target, ren), map_keys(mr.target, ren)),
        )
        yield _normalize(move) if forward else move


def _rename_ev(e: _Ev, ren: dict[int, int]) -> _Ev:
    if e.key is None or e.key not in ren:
        return e
    return _Ev(e.action, ren[e.key], e.causes, e.shared, e.sync)


def _matchings(candidates: list[tuple[int, int]]) -> Iterator[list[tuple[int, int]]]:
    """All pairwise-disjoint subsets of candidate pairs (the empty one too)."""
    def go(idx: int, used_l: frozenset, used_r: frozenset):
        if idx == len(candidates):
            yield []
            return
        i, j = candidates[idx]
        for rest in go(idx + 1, used_l, used_r):
            yield rest
        if i not in used_l and j not in used_r:
            for rest in go(idx + 1, used_l | {i}, used_r | {j}):
                yield [(i, j)] + rest

    return go(0, frozenset(), frozenset())


# ---------------------------------------------------------------------------
# Publishing moves as transitions
# ---------------------------------------------------------------------------

def _finalize(p: Process, m: _Move, direction: str) -> _Move:
    if direction == REVERSE:
        return m
    order = _placeholders(m)
    base = max_key(p)
    ren = {k: base + i + 1 for i, k in enumerate(order)}
    m = _rename(m, ren)
    if any(e.key is not None and e.key < 0 for e in m.events):
        raise TermError("placeholder key escaped finalization")
    return m


def _publish(p: Process, m: _Move, direction: str) -> Transition:
    m = _finalize(p, m, direction)
    if direction == FORWARD:
        label_events = tuple((e.action, None) for e in m.events)
    else:
        label_events = tuple((e.action, e.key) for e in m.events)
    sync_keys = frozenset(e.key for e in m.events if e.sync and e.key is not None)
    detail = tuple(
        sorted(
            ((e.action, e.key, tuple(sorted(e.causes)), e.sync) for e in m.events),
            key=lambda d: (d[0], -1 if d[1] is None else d[1], d[2], d[3]),
        )
    )
    return Transition(p, StepLabel(label_events, sync_keys), direction, m.target, detail)


def _unfused(m: _Move) -> bool:
    """Whether the step carries a complementary pair of visible events.

    Such a pair must synchronize rather than co-occur, no matter how far
    apart the partners sit in the term, so the check runs over the finished
    step.  The one exception is a pair inside a single atomic group (same
    shared key): a group is one indivisible event bundle, not a composition.
    """
    evs = m.events
    for i, a in enumerate(evs):
        if a.action == TAU:
            continue
        for b in evs[i + 1 :]:
            if b.action == TAU or b.action != complement(a.action):
                continue
            if a.shared and b.shared and a.key == b.key:
                continue
            return True
    return False


def _steps(p: Process, defs, direction: str, max_width: int, premise_mode: str) -> set[Transition]:
    moves = _derive(p, _defs_key(defs), direction, max_width, premise_mode, frozenset())
    return {_publish(p, m, direction) for m in moves if not _unfused(m)}


def forward_steps(p: Process, defs=None, max_width: int = 3, premise_mode: str = "keywise") -> set[Transition]:
    """All forward steps of width up to max_width (an atomic multi-action
    group still fires alone even when wider than the bound)."""
    if max_width < 1:
        raise ValueError("max_width must be at least 1")
    return _steps(p, defs, FORWARD, max_width, premise_mode)


def reverse_steps(p: Process, defs=None, max_width: int = 3, premise_mode: str = "keywise") -> set[Transition]:
    """All reverse steps of width up to max_width."""
    if max_width < 1:
        raise ValueError("max_width must be at least 1")
    return _steps(p, defs, REVERSE, max_width, premise_mode)


def forward_single(p: Process, defs=None, premise_mode: str = "keywise") -> set[Transition]:
    """Single-event forward transitions (synchronizations included; atomic
    groups of two or more actions are wider than one event and excluded)."""
    return {t for t in _steps(p, defs, FORWARD, 1, premise_mode) if len(t.label.events) == 1}


def reverse_single(p: Process, defs=None, premise_mode: str = "keywise") -> set[Transition]:
    """Single-event reverse transitions."""
    return {t for t in _steps(p, defs, REVERSE, 1, premise_mode) if len(t.label.events) == 1}


# ---------------------------------------------------------------------------
# Weak (τ-closed) steps
# ---------------------------------------------------------------------------

def _tau_closure(p: Process, defs, direction: str, max_width: int, premise_mode: str, budget: int) -> tuple[list[Process], bool]:
    seen = {p}
    frontier = [p]
    order = [p]
    truncated = False
    while frontier:
        q = frontier.pop()
        for t in _steps(q, defs, direction, max_width, premise_mode):
            if not t.label.is_silent():
                continue
            if t.target in seen:
                continue
            if len(seen) >= budget:
                truncated = True
                continue
            seen.add(t.target)
            order.append(t.target)
            frontier.append(t.target)
    return order, truncated


def _weak_steps(p: Process, defs, direction: str, max_width: int, premise_mode: str, tau_budget: int) -> TransitionSet:
    out = TransitionSet()
    pre, trunc = _tau_closure(p, defs, direction, max_width, premise_mode, tau_budget)
    out.truncated |= trunc
    for q in pre:
        for t in _steps(q, defs, direction, max_width, premise_mode):
            stripped = t.label.visible()
            if not stripped:
                continue
            post, trunc = _tau_closure(t.target, defs, direction, max_width, premise_mode, tau_budget)
            out.truncated |= trunc
            for r in post:
                out.add(Transition(p, StepLabel(stripped), direction, r))
    return out


def weak_forward_steps(p: Process, defs=None, max_width: int = 3, premise_mode: str = "keywise", tau_budget: int = 512) -> TransitionSet:
    """τ* · step · τ* with the label's visible part; silent steps answer
    within the closures and are not reported on their own."""
    return _weak_steps(p, defs, FORWARD, max_width, premise_mode, tau_budget)


def weak_reverse_steps(p: Process, defs=None, max_width: int = 3, premise_mode: str = "keywise", tau_budget: int = 512) -> TransitionSet:
    return _weak_steps(p, defs, REVERSE, max_width, premise_mode, tau_budget)
