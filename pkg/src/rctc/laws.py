"""Algebraic-law registry and sampled verification harness.

Every law the workbench vouches for lives here as a LawCase: the monoid laws
of choice, the static laws of composition/restriction/relabelling, the
failure of the interleaving expansion, the concurrency-respecting expansion
(forward and reverse forms), the silent-step laws for the weak equivalences,
and the congruence properties of every operator.  Laws are verified by
sampling: deterministic pseudo-random ground instances are generated per
seed, each instance is checked with the law's flavor/strength/direction, and
a report collects passes, failures (verbatim), and bounded verdicts.

The harness never claims more than "no counterexample found within bounds".
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass
from typing import Iterator

from .equiv import Flavor, Strength, Verdict, check
from .lts import Bounds
from .sos import forward_steps
from .syntax import render
from .term import (
    NIL,
    Par,
    Prefix,
    Process,
    Relabel,
    Restrict,
    Seq,
    Sum,
    TAU,
    TermError,
    apply_relabel,
    complement,
    keys,
    label_name,
    max_key,
    sort,
)

FLAVORS = (Flavor.STEP, Flavor.POMSET, Flavor.HP, Flavor.HHP)


# ---------------------------------------------------------------------------
# Term generation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    alphabet: int = 3
    max_depth: int = 4
    max_width: int = 2
    include_tau: bool = True
    include_keys: bool = False

    def __post_init__(self):
        if self.alphabet < 1 or self.max_depth < 1 or self.max_width < 1:
            raise ValueError("alphabet, max_depth and max_width must be positive")


def _names(cfg: GenConfig) -> list[str]:
    return list(string.ascii_lowercase[: cfg.alphabet])


def _action(rng: random.Random, cfg: GenConfig, allow_tau=True) -> str:
    if allow_tau and cfg.include_tau and rng.random() < 0.15:
        return TAU
    name = rng.choice(_names(cfg))
    return "~" + name if rng.random() < 0.3 else name


def _visible(rng: random.Random, cfg: GenConfig) -> str:
    name = rng.choice(_names(cfg))
    return "~" + name if rng.random() < 0.3 else name


def _build(rng: random.Random, cfg: GenConfig, depth: int, pars: list[int]) -> Process:
    if depth <= 0:
        return NIL
    roll = rng.random()
    if depth == 1:
        if roll < 0.25:
            return NIL
        return Prefix((_action(rng, cfg),), None, NIL)
    sub = lambda: _build(rng, cfg, depth - 1, pars)
    if roll < 0.32:
        return Prefix((_action(rng, cfg),), None, sub())
    if roll < 0.42 and cfg.max_width >= 2:
        n = rng.randint(2, cfg.max_width)
        acts = tuple(_visible(rng, cfg) for _ in range(n))
        return Prefix(acts, None, sub())
    if roll < 0.60:
        return Sum(sub(), sub())
    if roll < 0.72 and pars[0] < cfg.max_width - 1:
        pars[0] += 1
        return Par(sub(), sub())
    if roll < 0.80:
        return Seq(sub(), sub())
    if roll < 0.88:
        k = rng.randint(1, max(1, cfg.alphabet // 2))
        labels = frozenset(rng.sample(_names(cfg), k))
        return Restrict(sub(), labels)
    if roll < 0.96:
        return Relabel(sub(), _relabel_pairs(rng, cfg))
    return Prefix((_action(rng, cfg),), None, sub())


def _relabel_pairs(rng: random.Random, cfg: GenConfig, injective=False):
    names = _names(cfg)
    doms = rng.sample(names, rng.randint(0, len(names)))
    if injective:
        cods = rng.sample(names, len(doms))
    else:
        cods = [rng.choice(names) for _ in doms]
    return tuple(sorted((d, c) for d, c in zip(doms, cods) if d != c))


def gen_terms(cfg: GenConfig) -> Iterator[Process]:
    """Deterministic infinite stream of ground terms for the given config."""
    rng = random.Random(cfg.seed)
    while True:
        t = _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
        if not cfg.include_tau and TAU in _actions_of(t):
            continue
        if cfg.include_keys and rng.random() < 0.5:
            t = run_forward(t, rng, steps=rng.randint(1, 3), width=cfg.max_width)
        yield t


def sample_terms(cfg: GenConfig, n: int) -> list[Process]:
    g = gen_terms(cfg)
    return [next(g) for _ in range(n)]


def _actions_of(p: Process) -> set[str]:
    from .term import subterms

    out: set[str] = set()
    for q in subterms(p):
        if isinstance(q, Prefix):
            out.update(q.actions)
    return out


def run_forward(p: Process, rng: random.Random, steps: int, width: int, defs=None) -> Process:
    """Execute up to `steps` pseudo-randomly chosen forward steps."""
    cur = p
    for _ in range(steps):
        moves = sorted(forward_steps(cur, defs, width), key=lambda t: (str(t.label), render(t.target)))
        if not moves:
            break
        cur = rng.choice(moves).target
    return cur


def execute_fully(p: Process, rng: random.Random, width: int, cap: int = 64, defs=None) -> Process:
    """Run forward until no step remains (bounded by cap)."""
    cur = p
    for _ in range(cap):
        moves = sorted(forward_steps(cur, defs, width), key=lambda t: (str(t.label), render(t.target)))
        if not moves:
            return cur
        cur = rng.choice(moves).target
    return cur


# ---------------------------------------------------------------------------
# Expansion construction
# ---------------------------------------------------------------------------

def expansion_lhs(components, restriction) -> Process:
    """(P1[f1] | ... | Pn[fn]) \\ L, with identity relabellings elided."""
    if not components:
        raise TermError("an expansion needs at least one component")
    parts = [
        Relabel(p, tuple(f)) if tuple(f) else p for p, f in components
    ]
    body = parts[0]
    for part in parts[1:]:
        body = Par(body, part)
    return Restrict(body, frozenset(restriction)) if restriction else body


def _strip_keys(p: Process, gone: frozenset) -> Process:
    if isinstance(p, Prefix):
        body = _strip_keys(p.body, gone)
        if p.key is not None and p.key in gone:
            return body
        return Prefix(p.actions, p.key, body)
    if isinstance(p, Seq):
        return Seq(_strip_keys(p.left, gone), _strip_keys(p.right, gone))
    if isinstance(p, Sum):
        # A branch that just executed freezes its sibling for good, so the
        # sibling has no place in the forward continuation.
        lk, rk = keys(p.left) & gone, keys(p.right) & gone
        if lk and not rk:
            return _strip_keys(p.left, gone)
        if rk and not lk:
            return _strip_keys(p.right, gone)
        return Sum(_strip_keys(p.left, gone), _strip_keys(p.right, gone))
    if isinstance(p, Par):
        return Par(_strip_keys(p.left, gone), _strip_keys(p.right, gone))
    if isinstance(p, Restrict):
        return Restrict(_strip_keys(p.body, gone), p.labels)
    if isinstance(p, Relabel):
        return Relabel(_strip_keys(p.body, gone), p.mapping)
    return p


def _drop_pending_visible(p: Process) -> Process:
    if isinstance(p, Prefix):
        body = _drop_pending_visible(p.body)
        if p.key is None and p.actions != (TAU,):
            return body
        return Prefix(p.actions, p.key, body)
    if isinstance(p, Seq):
        return Seq(_drop_pending_visible(p.left), _drop_pending_visible(p.right))
    if isinstance(p, Sum):
        return Sum(_drop_pending_visible(p.left), _drop_pending_visible(p.right))
    if isinstance(p, Par):
        return Par(_drop_pending_visible(p.left), _drop_pending_visible(p.right))
    if isinstance(p, Restrict):
        return Restrict(_drop_pending_visible(p.body), p.labels)
    if isinstance(p, Relabel):
        return Relabel(_drop_pending_visible(p.body), p.mapping)
    return p


def expansion_rhs(components, restriction, bounds: Bounds | None = None,
                  direction: str = "forward") -> Process:
    """Head-normal-form expansion of (P1[f1] | ... | Pn[fn]) \\ L.

    The forward form sums, over every forward step of the composition, a
    pending prefix carrying the step's actions followed by the continuation
    (the step's target with the freshly executed prefixes elided).  The
    reverse form dually suffixes each reverse step's keyed actions after the
    fully-executed remainder.  Steps mixing silent and visible actions,
    undoing several distinct keys at once, or undoing a silent event (whose
    prefix form could carry no key) have no prefix form and are rejected.
    """
    from .sos import reverse_steps

    bounds = bounds or Bounds()
    p = expansion_lhs(components, restriction)
    summands: list[Process] = []
    if direction == "forward":
        for t in forward_steps(p, None, bounds.max_width):
            actions = tuple(a for a, _ in t.label.events)
            fresh = keys(t.target) - keys(p)
            cont = _strip_keys(t.target, frozenset(fresh))
            if all(a == TAU for a in actions):
                if len(actions) != 1:
                    raise TermError("a multi-silent step has no prefix form")
                summands.append(Prefix((TAU,), None, cont))
            elif TAU in actions:
                raise TermError("a step mixing silent and visible actions has no prefix form")
            else:
                summands.append(Prefix(actions, None, cont))
    elif direction == "reverse":
        for t in reverse_steps(p, None, bounds.max_width):
            cont = _drop_pending_visible(t.target)
            ks = {k for _, k in t.label.events if k is not None}
            actions = tuple(a for a, _ in t.label.events)
            if TAU in actions:
                # A silent prefix never carries a key, so an undone silent
                # event has no keyed suffix form: the unkeyed stand-in would
                # leave the remainder free to undo events the original still
                # orders after the silent one.
                raise TermError("a silent reverse step has no prefix form")
            elif len(ks) != 1:
                raise TermError("a reverse step spanning distinct keys has no prefix form")
            else:
                summands.append(Seq(cont, Prefix(actions, next(iter(ks)), NIL)))
    else:
        raise ValueError("direction must be 'forward' or 'reverse'")

    if not summands:
        return NIL
    summands.sort(key=render)
    out = summands[0]
    for s in summands[1:]:
        out = Sum(out, s)
    return out


# ---------------------------------------------------------------------------
# The registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LawCase:
    law_id: str
    flavor: Flavor
    strength: Strength
    direction: str
    lhs: str
    rhs: str
    expect: str  # "equivalent" | "inequivalent"


_MONOID = {
    "monoid-1": ("P + Q", "Q + P"),
    "monoid-2": ("P + (Q + R)", "(P + Q) + R"),
    "monoid-3": ("P + P", "P"),
    "monoid-4": ("P + nil", "P"),
}

_STATIC = {
    "static-1": ("P | Q", "Q | P"),
    "static-2": ("P | (Q | R)", "(P | Q) | R"),
    "static-3": ("P | nil", "P"),
    "static-4": ("P \\ L", "P  [when no label of P meets L]"),
    "static-5": ("P \\ K \\ L", "P \\ (K u L)"),
    "static-6": ("P[f] \\ L", "(P \\ f-inverse(L))[f]"),
    "static-7": ("(P | Q) \\ L", "P \\ L | Q \\ L  [when no synchronization crosses L]"),
    "static-8": ("P[Id]", "P"),
    "static-9": ("P[f]", "P[f']  [when f and f' agree on P's labels]"),
    "static-10": ("P[f][f']", "P[f' o f]"),
    "static-11": ("(P | Q)[f]", "P[f] | Q[f]  [when f is injective on the labels]"),
}

_TAU = {
    # law_id: (direction, lhs, rhs)
    "tau-1": ("forward", "P", "tau.P"),
    "tau-2": ("reverse", "P", "P.tau"),
    "tau-3": ("forward", "a.tau.P", "a.P"),
    "tau-4": ("reverse", "P.tau.a[m]", "P.a[m]"),
    "tau-5": ("forward", "(a1 || ... || an).tau.P", "(a1 || ... || an).P"),
    "tau-6": ("reverse", "P.tau.(a1[m] || ... || an[m])", "P.(a1[m] || ... || an[m])"),
    "tau-7": ("forward", "P + tau.P", "tau.P"),
    "tau-8": ("reverse", "P + P.tau", "P.tau"),
    "tau-9": ("forward", "a.(tau.(P + Q) + P)", "a.(P + Q)"),
    "tau-10": ("reverse", "((P + Q).tau + P).a[m]", "(P + Q).a[m]"),
    "tau-11": ("forward", "(a1 || ... || an).(tau.(P + Q) + P)", "(a1 || ... || an).(P + Q)"),
    "tau-12": ("reverse", "((P + Q).tau + P).(a1[m] || ... || an[m])", "(P + Q).(a1[m] || ... || an[m])"),
    "tau-13": ("both", "P", "tau | P"),
}

_CONG = {
    # law_id: (direction, context description)
    "cong-const": ("both", "A := P  implies  A ~ P"),
    "cong-a": ("forward", "a._"),
    "cong-b": ("forward", "(a1 || ... || an)._"),
    "cong-c": ("reverse", "_.a[m]"),
    "cong-d": ("reverse", "_.(a1[m] || ... || an[m])"),
    "cong-e": ("both", "_ + Q"),
    "cong-f": ("both", "_ | Q"),
    "cong-g": ("both", "_ \\ L"),
    "cong-h": ("both", "_[f]"),
}


def all_laws() -> tuple[LawCase, ...]:
    out: list[LawCase] = []
    for law_id, (lhs, rhs) in _MONOID.items():
        for fl in FLAVORS:
            out.append(LawCase(law_id, fl, Strength.STRONG, "both", lhs, rhs, "equivalent"))
    for law_id, (lhs, rhs) in _STATIC.items():
        for fl in FLAVORS:
            out.append(LawCase(law_id, fl, Strength.STRONG, "both", lhs, rhs, "equivalent"))
    for fl in FLAVORS:
        out.append(
            LawCase("milner", fl, Strength.STRONG, "both", "a | b", "a.b + b.a", "inequivalent")
        )
    for law_id, d in (("expansion-f", "forward"), ("expansion-r", "reverse")):
        for fl in FLAVORS:
            out.append(
                LawCase(
                    law_id, fl, Strength.STRONG, d,
                    "(P1[f1] | ... | Pn[fn]) \\ L",
                    "its head-normal-form expansion",
                    "equivalent",
                )
            )
    for law_id, (d, lhs, rhs) in _TAU.items():
        for fl in FLAVORS:
            out.append(LawCase(law_id, fl, Strength.WEAK, d, lhs, rhs, "equivalent"))
    for law_id, (d, ctx) in _CONG.items():
        for fl in FLAVORS:
            for st in (Strength.STRONG, Strength.WEAK):
                out.append(LawCase(law_id, fl, st, d, f"{ctx} on P1", f"{ctx} on P2", "equivalent"))
    return tuple(out)


def laws_by_id(law_id: str) -> tuple[LawCase, ...]:
    return tuple(c for c in all_laws() if c.law_id == law_id)


def registry_families() -> dict[str, tuple[str, ...]]:
    """Item inventory by family, for completeness auditing."""
    return {
        "monoid": tuple(_MONOID),
        "static": tuple(_STATIC),
        "milner": ("milner",),
        "expansion": ("expansion-f", "expansion-r"),
        "tau": tuple(_TAU),
        "congruence": tuple(_CONG),
    }


def excluded_items() -> tuple[tuple[str, str], ...]:
    """Law families deliberately outside the sampled registry, with reasons."""
    return (
        (
            "recursion-unique-solution",
            "uniqueness of solutions for guarded recursive definitions is a "
            "statement about all processes at once; sampling ground instances "
            "cannot witness it, so it is documented rather than encoded "
            "(constants themselves are covered by cong-const)",
        ),
    )


# ---------------------------------------------------------------------------
# Instantiation
# ---------------------------------------------------------------------------

def _seq_only(rng: random.Random, cfg: GenConfig, depth: int) -> Process:
    """A term with no parallel composition anywhere (for expansion sampling)."""
    if depth <= 0:
        return NIL
    roll = rng.random()
    if depth == 1 or roll < 0.4:
        if roll < 0.15:
            return NIL
        return Prefix((_visible(rng, cfg),), None, _seq_only(rng, cfg, depth - 1))
    if roll < 0.7:
        return Sum(_seq_only(rng, cfg, depth - 1), _seq_only(rng, cfg, depth - 1))
    return Prefix((_visible(rng, cfg),), None, _seq_only(rng, cfg, depth - 1))


def _sortnames(p: Process) -> frozenset[str]:
    return frozenset(label_name(l) for l in sort(p).labels)


def _fresh_names(used: frozenset[str], count: int) -> list[str]:
    pool = [n for n in string.ascii_lowercase if n not in used]
    pool += [f"z{i}" for i in range(count)]
    return pool[:count]


def _keyed_pairish(rng: random.Random, cfg: GenConfig) -> Process:
    base = _build(rng, GenConfig(cfg.seed, cfg.alphabet, min(cfg.max_depth, 3),
                                 cfg.max_width, cfg.include_tau), rng.randint(1, 3), [0])
    return execute_fully(base, rng, cfg.max_width)


class _Skip(Exception):
    """This draw cannot instantiate the law; try the next one."""


def _instantiate(case: LawCase, rng: random.Random, cfg: GenConfig, bounds: Bounds):
    """One ground (lhs, rhs, defs) instance of a law, or raise _Skip."""
    law = case.law_id
    gen = lambda: _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
    defs: dict = {}

    if law.startswith("monoid"):
        P, Q, R = gen(), gen(), gen()
        if law == "monoid-3":
            for _attempt in range(20):
                if _branch_deterministic(P, bounds):
                    break
                P = gen()
            else:
                raise _Skip
        return {
            "monoid-1": (Sum(P, Q), Sum(Q, P)),
            "monoid-2": (Sum(P, Sum(Q, R)), Sum(Sum(P, Q), R)),
            "monoid-3": (Sum(P, P), P),
            "monoid-4": (Sum(P, NIL), P),
        }[law] + (defs,)

    if law.startswith("static"):
        return _instantiate_static(law, rng, cfg) + (defs,)

    if law == "milner":
        a = _visible(rng, cfg)
        b = _visible(rng, cfg)
        lhs = Par(Prefix((a,), None, NIL), Prefix((b,), None, NIL))
        rhs = Sum(
            Prefix((a,), None, Prefix((b,), None, NIL)),
            Prefix((b,), None, Prefix((a,), None, NIL)),
        )
        return lhs, rhs, defs

    if law.startswith("expansion"):
        return _instantiate_expansion(case, rng, cfg, bounds) + (defs,)

    if law.startswith("tau"):
        return _instantiate_tau(law, rng, cfg) + (defs,)

    if law.startswith("cong"):
        return _instantiate_cong(case, rng, cfg, bounds)

    raise ValueError(f"unknown law {law!r}")


def _instantiate_static(law: str, rng: random.Random, cfg: GenConfig):
    gen = lambda: _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
    names = _names(cfg)
    P = gen()
    if law == "static-1":
        Q = gen()
        return Par(P, Q), Par(Q, P)
    if law == "static-2":
        Q, R = gen(), gen()
        return Par(P, Par(Q, R)), Par(Par(P, Q), R)
    if law == "static-3":
        return Par(P, NIL), P
    if law == "static-4":
        used = _sortnames(P)
        avail = [n for n in names if n not in used] or _fresh_names(used, 1)
        L = frozenset(rng.sample(avail, rng.randint(1, len(avail))))
        return Restrict(P, L), P
    if law == "static-5":
        K = frozenset(rng.sample(names, rng.randint(1, len(names))))
        L = frozenset(rng.sample(names, rng.randint(1, len(names))))
        return Restrict(Restrict(P, K), L), Restrict(P, K | L)
    if law == "static-6":
        f = _relabel_pairs(rng, cfg)
        L = frozenset(rng.sample(names, rng.randint(1, len(names))))
        fmap = dict(f)
        universe = set(names) | set(fmap) | set(fmap.values()) | set(L)
        finv = frozenset(
            n for n in universe if label_name(apply_relabel(fmap, n)) in L
        )
        return Restrict(Relabel(P, f), L), Relabel(Restrict(P, finv), f)
    if law == "static-7":
        Q = gen()
        crossing = {
            label_name(l)
            for l in sort(P).labels
            if complement(l) in sort(Q).labels
        }
        avail = [n for n in names if n not in crossing]
        if not avail:
            raise _Skip
        L = frozenset(rng.sample(avail, rng.randint(1, len(avail))))
        return Restrict(Par(P, Q), L), Par(Restrict(P, L), Restrict(Q, L))
    if law == "static-8":
        return Relabel(P, ()), P
    if law == "static-9":
        f = _relabel_pairs(rng, cfg)
        used = _sortnames(P)
        outside = [n for n in names if n not in used and n not in dict(f)]
        extra = tuple((n, rng.choice(names)) for n in outside[:1])
        extra = tuple((d, c) for d, c in extra if d != c)
        f2 = tuple(sorted(set(tuple((d, c) for d, c in f if d in used) + extra)))
        f1 = tuple(sorted((d, c) for d, c in f if d in used))
        return Relabel(P, f1), Relabel(P, f2)
    if law == "static-10":
        f = _relabel_pairs(rng, cfg)
        g = _relabel_pairs(rng, cfg)
        fmap, gmap = dict(f), dict(g)
        dom = set(fmap) | set(gmap)
        comp = tuple(
            sorted(
                (d, label_name(apply_relabel(gmap, label_name(apply_relabel(fmap, d)))))
                for d in dom
            )
        )
        comp = tuple((d, c) for d, c in comp if d != c)
        return Relabel(Relabel(P, f), g), Relabel(P, comp)
    if law == "static-11":
        Q = gen()
        used = sorted(_sortnames(P) | _sortnames(Q))
        targets = _fresh_names(frozenset(), len(used) + 2)
        rng.shuffle(targets)
        f = tuple(sorted((d, c) for d, c in zip(used, targets) if d != c))
        return Relabel(Par(P, Q), f), Par(Relabel(P, f), Relabel(Q, f))
    raise ValueError(law)


def _component_vector(rng: random.Random, cfg: GenConfig, n: int, sequential: bool):
    """Components plus per-component relabellings for an expansion instance.

    Cross-complementary sorts are avoided unless the vector is a simple
    two-component synchronizer, so that no step mixes a silent action with a
    visible one (such steps have no prefix form).
    """
    if n == 2 and not sequential and rng.random() < 0.3:
        a = rng.choice(_names(cfg))
        depth = rng.randint(1, 2)
        left = Prefix((a,), None, _seq_only(rng, cfg, depth - 1))
        right = Prefix((complement(a),), None, _seq_only(rng, cfg, depth - 1))
        comps = [(left, ()), (right, ())]
        # The synchronizing name must be restricted.  Left open, the head
        # normal form's silent summand fires without recording a key, so the
        # choice between it and the visible summands stays unresolved, while
        # the composition's own synchronization commits both partners at once.
        return comps, frozenset([a])
    comps = []
    taken: set[str] = set()  # names already used by earlier components, post-relabelling
    for _ in range(n):
        for _attempt in range(20):
            t = _seq_only(rng, cfg, rng.randint(1, 3))
            f = _relabel_pairs(rng, cfg, injective=True) if rng.random() < 0.3 else ()
            mine = {label_name(apply_relabel(dict(f), l)) for l in sort(t).labels}
            if not (mine & taken):
                break
        else:
            raise _Skip
        comps.append((t, f))
        taken |= mine
    return comps, frozenset()


def _instantiate_expansion(case: LawCase, rng: random.Random, cfg: GenConfig, bounds: Bounds):
    sequential = case.flavor is not Flavor.STEP
    n = 1 if sequential else rng.randint(1, 3)
    comps, restriction = _component_vector(rng, cfg, n, sequential)
    if case.direction == "reverse":
        executed = []
        active = rng.randrange(len(comps))
        for i, (t, f) in enumerate(comps):
            if i == active or (len(comps) == 2 and restriction):
                executed.append((execute_fully(t, rng, 1), f))
            else:
                executed.append((t, f))
        comps = executed
    lhs = expansion_lhs(comps, restriction)
    try:
        rhs = expansion_rhs(comps, restriction, bounds, case.direction)
    except TermError:
        raise _Skip
    return lhs, rhs


def _fully_executed(rng: random.Random, cfg: GenConfig) -> Process:
    t = _seq_only(rng, cfg, rng.randint(1, 3))
    return execute_fully(t, rng, cfg.max_width)


def _branch_deterministic(p: Process, bounds: Bounds) -> bool:
    """Whether every reachable state's same-label forward steps agree.

    The idempotence instances quantify over such processes.  ``P + P`` pairs
    label-equal moves of the two copies without insisting they be the *same*
    move, so when a state of P offers one label through two different doors
    the pair ends up half through each, a commitment no single run of P makes.
    Label-deterministic processes never open that door twice.
    """
    from .sos import reverse_steps
    from .term import canonical_keys

    seen = {canonical_keys(p)[0]}
    frontier = [p]
    for _ in range(2 * bounds.max_depth):
        nxt = []
        for q in frontier:
            fwd = forward_steps(q, None, bounds.max_width)
            by_label: dict = {}
            for t in fwd:
                canon = canonical_keys(t.target)[0]
                prior = by_label.setdefault(t.label, canon)
                if prior != canon:
                    return False
            for t in list(fwd) + list(reverse_steps(q, None, bounds.max_width)):
                canon = canonical_keys(t.target)[0]
                if canon not in seen:
                    if len(seen) >= 400:
                        return True
                    seen.add(canon)
                    nxt.append(t.target)
        if not nxt:
            break
        frontier = nxt
    return True


def _choice_arms(rng: random.Random, cfg: GenConfig) -> tuple[Process, Process]:
    """P and Q for the absorption laws: silent-free, over disjoint names.

    When the two arms contend for an initial action, the absorbed side can
    commit to P while the absorbing side only has the lockstep move that
    keeps the choice open, and the laws fail; the stated forms carry this
    side condition implicitly.
    """
    names = _names(cfg)
    if len(names) < 2:
        names = names + _fresh_names(frozenset(names), 1)
    i = rng.randrange(len(names))
    j = rng.randrange(len(names) - 1)
    pools = [names[i]], [names[(i + 1 + j) % len(names)]]

    def arm(pool, depth):
        if depth <= 0:
            return NIL
        name = rng.choice(pool)
        act = "~" + name if rng.random() < 0.3 else name
        if depth > 1 and rng.random() < 0.4:
            return Sum(arm(pool, depth - 1), arm(pool, depth - 1))
        return Prefix((act,), None, arm(pool, depth - 1))

    return arm(pools[0], rng.randint(1, 2)), arm(pools[1], rng.randint(1, 2))


def _instantiate_tau(law: str, rng: random.Random, cfg: GenConfig):
    tau_nil = Prefix((TAU,), None, NIL)

    def group(n):
        return tuple(_visible(rng, cfg) for _ in range(n))

    if law == "tau-1":
        P = _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
        return P, Prefix((TAU,), None, P)
    if law == "tau-2":
        P = _fully_executed(rng, cfg) if rng.random() < 0.7 else _build(rng, cfg, 2, [0])
        return P, Seq(P, tau_nil)
    if law == "tau-3":
        P = _build(rng, cfg, rng.randint(1, 3), [0])
        a = _visible(rng, cfg)
        return (
            Prefix((a,), None, Prefix((TAU,), None, P)),
            Prefix((a,), None, P),
        )
    if law == "tau-4":
        P = _fully_executed(rng, cfg)
        a = _visible(rng, cfg)
        m = max_key(P) + 1
        return (
            Seq(Seq(P, tau_nil), Prefix((a,), m, NIL)),
            Seq(P, Prefix((a,), m, NIL)),
        )
    if law == "tau-5":
        P = _build(rng, cfg, rng.randint(1, 3), [0])
        acts = group(rng.randint(2, max(2, cfg.max_width)))
        return (
            Prefix(acts, None, Prefix((TAU,), None, P)),
            Prefix(acts, None, P),
        )
    if law == "tau-6":
        P = _fully_executed(rng, cfg)
        acts = group(rng.randint(2, max(2, cfg.max_width)))
        m = max_key(P) + 1
        return (
            Seq(Seq(P, tau_nil), Prefix(acts, m, NIL)),
            Seq(P, Prefix(acts, m, NIL)),
        )
    if law == "tau-7":
        P = _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
        return Sum(P, Prefix((TAU,), None, P)), Prefix((TAU,), None, P)
    if law == "tau-8":
        P = _fully_executed(rng, cfg) if rng.random() < 0.7 else _build(rng, cfg, 2, [0])
        return Sum(P, Seq(P, tau_nil)), Seq(P, tau_nil)
    if law == "tau-9":
        P, Q = _choice_arms(rng, cfg)
        a = _visible(rng, cfg)
        return (
            Prefix((a,), None, Sum(Prefix((TAU,), None, Sum(P, Q)), P)),
            Prefix((a,), None, Sum(P, Q)),
        )
    if law == "tau-10":
        P = _fully_executed(rng, cfg)
        Q = _fully_executed(rng, cfg)
        a = _visible(rng, cfg)
        m = max(max_key(P), max_key(Q)) + 1
        return (
            Seq(Sum(Seq(Sum(P, Q), tau_nil), P), Prefix((a,), m, NIL)),
            Seq(Sum(P, Q), Prefix((a,), m, NIL)),
        )
    if law == "tau-11":
        P, Q = _choice_arms(rng, cfg)
        acts = group(rng.randint(2, max(2, cfg.max_width)))
        return (
            Prefix(acts, None, Sum(Prefix((TAU,), None, Sum(P, Q)), P)),
            Prefix(acts, None, Sum(P, Q)),
        )
    if law == "tau-12":
        P = _fully_executed(rng, cfg)
        Q = _fully_executed(rng, cfg)
        acts = group(rng.randint(2, max(2, cfg.max_width)))
        m = max(max_key(P), max_key(Q)) + 1
        return (
            Seq(Sum(Seq(Sum(P, Q), tau_nil), P), Prefix(acts, m, NIL)),
            Seq(Sum(P, Q), Prefix(acts, m, NIL)),
        )
    if law == "tau-13":
        keyed = rng.random() < 0.4
        P = _fully_executed(rng, cfg) if keyed else _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
        return P, Par(tau_nil, P)
    raise ValueError(law)


def equivalent_pairs(rng: random.Random, cfg: GenConfig, strength: Strength,
                     keyed: bool = False) -> Iterator[tuple[Process, Process]]:
    """Candidate pairs that ought to be equivalent, for congruence testing."""
    while True:
        if keyed:
            P = _keyed_pairish(rng, cfg)
            Q = _keyed_pairish(rng, cfg)
        else:
            P = _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
            Q = _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
        roll = rng.random()
        if roll < 0.2:
            yield P, P
        elif roll < 0.45:
            yield Sum(P, Q), Sum(Q, P)
        elif roll < 0.65:
            yield Sum(P, NIL), P
        elif roll < 0.8:
            yield Sum(P, P), P
        elif roll < 0.9 and not keyed:
            yield Par(P, NIL), P
        elif strength is Strength.WEAK and not keyed:
            yield P, Prefix((TAU,), None, P)
        else:
            yield Sum(P, P), P


def _instantiate_cong(case: LawCase, rng: random.Random, cfg: GenConfig, bounds: Bounds):
    if case.law_id == "cong-const":
        P = _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
        from .term import Const

        defs = {"A": P}
        return Const("A"), P, defs

    keyed = case.law_id in ("cong-c", "cong-d")
    pair_gen = equivalent_pairs(rng, cfg, case.strength, keyed=keyed)
    for _ in range(10):
        P1, P2 = next(pair_gen)
        v = check(P1, P2, bounds=bounds, flavor=case.flavor,
                  strength=case.strength, direction="both")
        if v.related and not v.bounded:
            break
    else:
        raise _Skip
    lhs, rhs = _wrap_context(case.law_id, P1, P2, rng, cfg)
    return lhs, rhs, {}


def _wrap_context(law: str, P1: Process, P2: Process, rng: random.Random, cfg: GenConfig):
    names = _names(cfg)
    if law == "cong-a":
        a = _action(rng, cfg)
        return Prefix((a,), None, P1), Prefix((a,), None, P2)
    if law == "cong-b":
        acts = tuple(_visible(rng, cfg) for _ in range(rng.randint(2, max(2, cfg.max_width))))
        return Prefix(acts, None, P1), Prefix(acts, None, P2)
    if law == "cong-c":
        a = _visible(rng, cfg)
        m = max(max_key(P1), max_key(P2)) + 1
        return Seq(P1, Prefix((a,), m, NIL)), Seq(P2, Prefix((a,), m, NIL))
    if law == "cong-d":
        acts = tuple(_visible(rng, cfg) for _ in range(rng.randint(2, max(2, cfg.max_width))))
        m = max(max_key(P1), max_key(P2)) + 1
        return Seq(P1, Prefix(acts, m, NIL)), Seq(P2, Prefix(acts, m, NIL))
    if law == "cong-e":
        Q = _build(rng, cfg, rng.randint(1, cfg.max_depth), [0])
        return Sum(P1, Q), Sum(P2, Q)
    if law == "cong-f":
        Q = _build(rng, cfg, rng.randint(1, 2), [0])
        return Par(P1, Q), Par(P2, Q)
    if law == "cong-g":
        L = frozenset(rng.sample(names, rng.randint(1, len(names))))
        return Restrict(P1, L), Restrict(P2, L)
    if law == "cong-h":
        f = _relabel_pairs(rng, cfg)
        return Relabel(P1, f), Relabel(P2, f)
    raise ValueError(law)


# ---------------------------------------------------------------------------
# The suite
# ---------------------------------------------------------------------------

@dataclass
class CaseResult:
    law_id: str
    flavor: str
    strength: str
    direction: str
    samples: int
    passes: int
    fails: int
    bounded: int
    skipped: int
    failures: tuple[tuple[str, str, str], ...]  # (lhs, rhs, note)


@dataclass
class Report:
    cases: tuple[CaseResult, ...]
    seed: int

    @property
    def total_fails(self) -> int:
        return sum(c.fails for c in self.cases)

    @property
    def total_bounded(self) -> int:
        return sum(c.bounded for c in self.cases)

    def as_text(self) -> str:
        lines = []
        width = max((len(c.law_id) for c in self.cases), default=10)
        for c in self.cases:
            status = "ok" if c.fails == 0 else "FAIL"
            lines.append(
                f"{c.law_id:<{width}}  {c.flavor:<6} {c.strength:<6} {c.direction:<7} "
                f"samples={c.samples:<4} passes={c.passes:<4} fails={c.fails:<3} "
                f"bounded={c.bounded:<3} {status}"
            )
            for lhs, rhs, note in c.failures:
                lines.append(f"    counterexample: {lhs}  vs  {rhs}  ({note})")
        lines.append(
            f"total: {len(self.cases)} cases, {self.total_fails} failing samples, "
            f"{self.total_bounded} bounded verdicts (seed {self.seed})"
        )
        return "\n".join(lines)

    def as_records(self) -> list[dict]:
        return [
            {
                "law_id": c.law_id,
                "flavor": c.flavor,
                "strength": c.strength,
                "direction": c.direction,
                "samples": c.samples,
                "passes": c.passes,
                "fails": c.fails,
                "bounded": c.bounded,
                "skipped": c.skipped,
                "failures": [list(f) for f in c.failures],
            }
            for c in self.cases
        ]


def run_law_case(case: LawCase, cfg: GenConfig, bounds: Bounds, samples: int) -> CaseResult:
    rng = random.Random((cfg.seed, case.law_id, str(case.flavor), str(case.strength)).__repr__())
    passes = fails = bounded = skipped = 0
    failures: list[tuple[str, str, str]] = []
    done = 0
    attempts = 0
    while done < samples and attempts < samples * 8:
        attempts += 1
        try:
            lhs, rhs, defs = _instantiate(case, rng, cfg, bounds)
        except _Skip:
            skipped += 1
            continue
        v = check(lhs, rhs, defs=defs, bounds=bounds, flavor=case.flavor,
                  strength=case.strength, direction=case.direction)
        done += 1
        ok = v.related == (case.expect == "equivalent")
        if v.bounded:
            bounded += 1
            if not ok:
                failures.append((render(lhs), render(rhs), "mismatch under truncation"))
        elif ok:
            passes += 1
        else:
            fails += 1
            note = "; ".join(v.evidence) if v.evidence else "expected inequivalent"
            failures.append((render(lhs), render(rhs), note))
    return CaseResult(
        case.law_id, case.flavor.value, case.strength.value, case.direction,
        done, passes, fails, bounded, skipped, tuple(failures[:5])
    )


def run_law_suite(cfg: GenConfig, laws=None, bounds: Bounds | None = None,
                  samples: int = 20) -> Report:
    bounds = bounds or Bounds()
    cases = tuple(laws) if laws is not None else all_laws()
    results = [run_law_case(c, cfg, bounds, samples) for c in cases]
    return Report(tuple(results), cfg.seed)


def check_congruence(pairs, cfg: GenConfig, bounds: Bounds | None = None,
                     flavor: Flavor | str = Flavor.STEP,
                     strength: Strength | str = Strength.STRONG) -> Report:
    """Wrap verified-equivalent pairs in every one-hole context and re-check.

    Pairs that are not equivalent to begin with are rejected and reported
    as failures of the input, not of any law.
    """
    flavor, strength = Flavor(flavor), Strength(strength)
    bounds = bounds or Bounds()
    rng = random.Random(cfg.seed + 77)
    results = []
    contexts = [l for l in _CONG if l != "cong-const"]
    rejected: list[tuple[str, str, str]] = []
    verified: list[tuple[Process, Process]] = []
    for P1, P2 in pairs:
        v = check(P1, P2, bounds=bounds, flavor=flavor, strength=strength)
        if not v.related:
            rejected.append((render(P1), render(P2), "input pair not equivalent"))
        else:
            verified.append((P1, P2))
    if rejected:
        results.append(
            CaseResult("cong-input", flavor.value, strength.value, "both",
                       len(rejected), 0, len(rejected), 0, 0, tuple(rejected[:5]))
        )
    for law in contexts:
        direction = _CONG[law][0]
        passes = fails = bounded = 0
        failures = []
        usable = 0
        for P1, P2 in verified:
            try:
                lhs, rhs = _wrap_context(law, P1, P2, rng, cfg)
            except TermError:
                continue
            usable += 1
            v = check(lhs, rhs, bounds=bounds, flavor=flavor,
                      strength=strength, direction=direction)
            if v.bounded:
                bounded += 1
                if not v.related:
                    failures.append((render(lhs), render(rhs), "mismatch under truncation"))
            elif v.related:
                passes += 1
            else:
                fails += 1
                failures.append((render(lhs), render(rhs), "; ".join(v.evidence)))
        results.append(
            CaseResult(law, flavor.value, strength.value, direction,
                       usable, passes, fails, bounded, 0, tuple(failures[:5]))
        )
    return Report(tuple(results), cfg.seed)
