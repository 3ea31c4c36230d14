"""Shared hypothesis strategies.

The generators here are deliberately independent of the library's own random
term builder in rctc.laws: properties checked against these strategies are
not checked against the code that will later be asked to confirm them.
"""

from __future__ import annotations

import hypothesis.strategies as st

from rctc import NIL, Par, Prefix, Relabel, Restrict, Seq, Sum, TAU

NAMES = ("a", "b", "c")


def actions(include_tau: bool = True):
    base = list(NAMES) + ["~" + n for n in NAMES]
    if include_tau:
        base.append(TAU)
    return st.sampled_from(base)


def groups(include_tau: bool = True):
    """Action tuples for a prefix: usually singletons, sometimes a
    simultaneous pair of distinct visible actions."""
    single = actions(include_tau).map(lambda a: (a,))
    pair = st.tuples(
        st.sampled_from(NAMES), st.sampled_from(NAMES)
    ).filter(lambda t: t[0] != t[1])
    return st.one_of(single, single, single, pair)


def _extend(children, include_tau: bool = True):
    prefixed = st.tuples(groups(include_tau), children).map(
        lambda t: Prefix(t[0], None, t[1])
    )
    summed = st.tuples(children, children).map(lambda t: Sum(*t))
    pared = st.tuples(children, children).map(lambda t: Par(*t))
    restricted = st.tuples(
        children, st.sets(st.sampled_from(NAMES), min_size=1, max_size=2)
    ).map(lambda t: Restrict(t[0], frozenset(t[1])))
    relabelled = st.tuples(
        children, st.sampled_from(NAMES), st.sampled_from(NAMES)
    ).map(lambda t: Relabel(t[0], ((t[1], t[2]),)))
    sequenced = st.tuples(children, children).map(lambda t: Seq(*t))
    return st.one_of(prefixed, prefixed, summed, pared, restricted, relabelled, sequenced)


def standard_terms(max_leaves: int = 12, include_tau: bool = True):
    """Standard processes (no executed prefixes) over a three-name alphabet."""
    extend = lambda children: _extend(children, include_tau)
    return st.recursive(st.just(NIL), extend, max_leaves=max_leaves)
