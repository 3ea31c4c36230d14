"""Core term model: actions, keys, process constructors, sorts, predicates.

Processes are immutable dataclasses compared structurally.  Visible labels are
plain strings, with the complement of ``a`` written ``~a``; the silent action
is the reserved name ``tau``.  An executed prefix carries a communication key
(a positive integer); a prefix with ``key=None`` has not fired yet.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

TAU = "tau"

Definitions = dict  # constant name -> Process


class TermError(ValueError):
    """An ill-formed label, action, relabelling, or process."""


class UnresolvedConstantError(KeyError):
    """A constant was referenced that the definitions do not provide."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unresolved constant {self.name!r}"


# ---------------------------------------------------------------------------
# Actions and labels
# ---------------------------------------------------------------------------

def is_tau(action: str) -> bool:
    return action == TAU


def is_co(label: str) -> bool:
    """True for co-names like ``~a``."""
    return label.startswith("~")


def label_name(label: str) -> str:
    """The plain channel name underneath a label (``~a`` -> ``a``)."""
    return label[1:] if label.startswith("~") else label


def complement(label: str) -> str:
    """``a`` <-> ``~a``.  An involution on visible labels; tau has none."""
    if label == TAU:
        raise TermError("tau has no complement")
    return label[1:] if label.startswith("~") else "~" + label


def check_action(action: str) -> str:
    if not action or action == "~" or (is_co(action) and label_name(action) == TAU):
        raise TermError(f"ill-formed action {action!r}")
    return action


def apply_relabel(f: Union[Mapping[str, str], Iterable[tuple[str, str]]], action: str) -> str:
    """Apply a relabelling to one action: tau is fixed, ~l follows l."""
    if not isinstance(f, Mapping):
        f = dict(f)
    if action == TAU:
        return TAU
    if is_co(action):
        return "~" + f.get(label_name(action), label_name(action))
    return f.get(action, action)


def _check_relabel_pairs(pairs: Iterable[tuple[str, str]]) -> tuple[tuple[str, str], ...]:
    out = []
    seen = set()
    for src, dst in pairs:
        for side in (src, dst):
            if side == TAU or is_co(side) or not side:
                raise TermError(f"relabelling must map plain names, got {side!r}")
        if src in seen:
            raise TermError(f"relabelling maps {src!r} twice")
        seen.add(src)
        out.append((src, dst))
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# Process constructors
# ---------------------------------------------------------------------------

class Process:
    """Base class for process terms."""

    __slots__ = ()

    def __str__(self) -> str:  # late import keeps the model renderer-free
        from .syntax import render

        return render(self)


@dataclass(frozen=True, slots=True)
class Nil(Process):
    pass


@dataclass(frozen=True, slots=True)
class Const(Process):
    name: str


@dataclass(frozen=True, slots=True)
class Prefix(Process):
    """An action group guarding a body.

    ``actions`` is the multiset fired together (one action in the common
    case); ``key`` is None while the group is pending and the shared
    communication key once it has fired.  A silent prefix is always the
    singleton group ``(tau,)`` and never acquires a key.
    """

    actions: tuple[str, ...]
    key: int | None
    body: Process

    def __post_init__(self):
        if not self.actions:
            raise TermError("empty action group")
        acts = tuple(sorted(check_action(a) for a in self.actions))
        object.__setattr__(self, "actions", acts)
        if TAU in acts:
            if len(acts) > 1:
                raise TermError("tau cannot join a multi-action group")
            if self.key is not None:
                raise TermError("tau never carries a key")


@dataclass(frozen=True, slots=True)
class Seq(Process):
    """General sequential composition ``P . Q``."""

    left: Process
    right: Process


@dataclass(frozen=True, slots=True)
class Sum(Process):
    left: Process
    right: Process


@dataclass(frozen=True, slots=True)
class Par(Process):
    left: Process
    right: Process


@dataclass(frozen=True, slots=True)
class Restrict(Process):
    """Blocks the plain names in ``labels`` and their co-names."""

    body: Process
    labels: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        norm = frozenset(label_name(l) for l in self.labels)
        for l in norm:
            if l == TAU or not l:
                raise TermError("restriction sets hold visible names only")
        object.__setattr__(self, "labels", norm)


@dataclass(frozen=True, slots=True)
class Relabel(Process):
    """Applies a name-to-name map, extended to co-names; tau is fixed."""

    body: Process
    mapping: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "mapping", _check_relabel_pairs(self.mapping))

    def as_dict(self) -> dict[str, str]:
        return dict(self.mapping)


NIL = Nil()


def children(p: Process) -> tuple[Process, ...]:
    if isinstance(p, Prefix):
        return (p.body,)
    if isinstance(p, (Seq, Sum, Par)):
        return (p.left, p.right)
    if isinstance(p, (Restrict, Relabel)):
        return (p.body,)
    return ()


def subterms(p: Process) -> Iterator[Process]:
    """Pre-order traversal of p and everything under it."""
    stack = [p]
    while stack:
        q = stack.pop()
        yield q
        stack.extend(reversed(children(q)))


# ---------------------------------------------------------------------------
# Key bookkeeping
# ---------------------------------------------------------------------------

def keys(p: Process) -> frozenset[int]:
    """All communication keys occurring in p."""
    return frozenset(q.key for q in subterms(p) if isinstance(q, Prefix) and q.key is not None)


def max_key(p: Process) -> int:
    """Largest key in p, 0 when p is key-free."""
    return max((q.key for q in subterms(p) if isinstance(q, Prefix) and q.key is not None), default=0)


def map_keys(p: Process, f: Mapping[int, int]) -> Process:
    """Rewrite every key through f (keys missing from f are kept)."""
    if isinstance(p, Prefix):
        k = f.get(p.key, p.key) if p.key is not None else None
        return Prefix(p.actions, k, map_keys(p.body, f))
    if isinstance(p, Seq):
        return Seq(map_keys(p.left, f), map_keys(p.right, f))
    if isinstance(p, Sum):
        return Sum(map_keys(p.left, f), map_keys(p.right, f))
    if isinstance(p, Par):
        return Par(map_keys(p.left, f), map_keys(p.right, f))
    if isinstance(p, Restrict):
        return Restrict(map_keys(p.body, f), p.labels)
    if isinstance(p, Relabel):
        return Relabel(map_keys(p.body, f), p.mapping)
    return p


def keys_preorder(p: Process) -> list[int]:
    """Keys in order of first occurrence under a left-to-right pre-order scan."""
    seen: list[int] = []
    have: set[int] = set()
    for q in subterms(p):
        if isinstance(q, Prefix) and q.key is not None and q.key not in have:
            have.add(q.key)
            seen.append(q.key)
    return seen


def canonical_keys(p: Process) -> tuple[Process, dict[int, int]]:
    """Renumber keys 1..n by first occurrence; returns (term, old->new map)."""
    ren = {k: i + 1 for i, k in enumerate(keys_preorder(p))}
    return map_keys(p, ren), ren


# ---------------------------------------------------------------------------
# Standard / fully-executed predicates
# ---------------------------------------------------------------------------

def is_standard(p: Process) -> bool:
    """True when no executed (keyed) prefix occurs anywhere in p."""
    return all(not (isinstance(q, Prefix) and q.key is not None) for q in subterms(p))


def is_fully_executed(p: Process) -> bool:
    """True when no visible forward prefix remains live in p.

    This is the gate the sequential rules fire on.  Pending silent prefixes
    do not count (nothing observable is left to do), and in a choice whose
    branches have diverged only the branch that moved is consulted — the
    retained alternative is dead.
    """
    if isinstance(p, Nil):
        return True
    if isinstance(p, Const):
        return False
    if isinstance(p, Prefix):
        if p.key is None and p.actions != (TAU,):
            return False
        return is_fully_executed(p.body)
    if isinstance(p, (Seq, Par)):
        return is_fully_executed(p.left) and is_fully_executed(p.right)
    if isinstance(p, Sum):
        kl, kr = keys(p.left), keys(p.right)
        if kl == kr:
            return is_fully_executed(p.left) and is_fully_executed(p.right)
        if kl > kr:
            return is_fully_executed(p.left)
        if kl < kr:
            return is_fully_executed(p.right)
        return is_fully_executed(p.left) and is_fully_executed(p.right)
    if isinstance(p, (Restrict, Relabel)):
        return is_fully_executed(p.body)
    raise TermError(f"unknown process {p!r}")


# ---------------------------------------------------------------------------
# Sorts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sort:
    """A process sort; ``complete`` is False when the unfold budget ran out
    (the labels then form a lower bound only)."""

    labels: frozenset[str]
    complete: bool = True

    def __contains__(self, label: str) -> bool:
        return label in self.labels

    def __iter__(self):
        return iter(sorted(self.labels))


def sort(p: Process, defs: Mapping[str, Process] | None = None, fuel: int = 64) -> Sort:
    """The set of visible labels p can ever use, constants unfolded with fuel.

    Raises UnresolvedConstantError when a constant has no definition.
    """
    defs = defs or {}
    complete = True

    def go(q: Process, remaining: int) -> frozenset[str]:
        nonlocal complete
        if isinstance(q, Nil):
            return frozenset()
        if isinstance(q, Const):
            if q.name not in defs:
                raise UnresolvedConstantError(q.name)
            if remaining <= 0:
                complete = False
                return frozenset()
            return go(defs[q.name], remaining - 1)
        if isinstance(q, Prefix):
            own = frozenset(a for a in q.actions if a != TAU)
            return own | go(q.body, remaining)
        if isinstance(q, (Seq, Sum, Par)):
            return go(q.left, remaining) | go(q.right, remaining)
        if isinstance(q, Restrict):
            blocked = q.labels
            return frozenset(l for l in go(q.body, remaining) if label_name(l) not in blocked)
        if isinstance(q, Relabel):
            f = q.as_dict()
            return frozenset(apply_relabel(f, l) for l in go(q.body, remaining))
        raise TermError(f"unknown process {q!r}")

    return Sort(go(p, fuel), complete)


def sort_names(p: Process, defs: Mapping[str, Process] | None = None, fuel: int = 64) -> frozenset[str]:
    """Plain channel names in the sort (both polarities folded together)."""
    return frozenset(label_name(l) for l in sort(p, defs, fuel).labels)


def unfold(name: str, defs: Mapping[str, Process]) -> Process:
    if name not in defs:
        raise UnresolvedConstantError(name)
    return defs[name]
