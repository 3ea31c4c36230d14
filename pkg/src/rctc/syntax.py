"""Concrete syntax: lexer, parser, canonical renderer, definitions files.

Operator binding, loosest to tightest: ``+``, then ``|``, then the postfix
operators ``\\ {...}`` and ``[...]``, then the sequencing dot.  ``a.nil \\ {b}``
therefore restricts the whole prefix.  Co-names are written ``~a``, the silent
action ``tau``, executed actions ``a[3]``, simultaneous groups ``(a || b)``
and ``(a[3] || b[3])``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .term import (
    NIL,
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
    is_co,
    label_name,
)


class ParseError(ValueError):
    def __init__(self, message: str, pos: int | None = None, text: str | None = None):
        self.pos = pos
        if pos is not None and text is not None:
            message = f"{message} (at position {pos}: {text[pos:pos + 12]!r}...)"
        super().__init__(message)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<defeq>:=)
  | (?P<dpar>\|\|)
  | (?P<nat>\d+)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<const>[A-Z][A-Za-z0-9_]*)
  | (?P<sym>[.+|(){}\[\],~\\])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # arrow, defeq, dpar, nat, name, const, sym, end
    text: str
    pos: int


def _lex(src: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(src):
        m = _TOKEN_RE.match(src, i)
        if not m:
            raise ParseError("lexical error", i, src)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), i))
        i = m.end()
    toks.append(_Tok("end", "", len(src)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _lex(src)
        self.i = 0

    # -- token plumbing ----------------------------------------------------
    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind != "name"

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str, what: str) -> _Tok:
        if not self.at(text):
            raise ParseError(f"expected {what}", self.peek().pos, self.src)
        return self.next()

    def fail(self, msg: str):
        raise ParseError(msg, self.peek().pos, self.src)

    # -- grammar -----------------------------------------------------------
    def proc(self) -> Process:
        left = self.par()
        while self.eat("+"):
            left = Sum(left, self.par())
        return left

    def par(self) -> Process:
        parts = [self.post()]
        while self.eat("|"):
            parts.append(self.post())
        p = parts[-1]
        for q in reversed(parts[:-1]):
            p = Par(q, p)
        return p

    def post(self) -> Process:
        p = self.chain()
        while True:
            if self.eat("\\"):
                p = Restrict(p, self.restriction_set())
            elif self.at("["):
                p = Relabel(p, self.relabel_map())
            else:
                return p

    def restriction_set(self) -> frozenset[str]:
        self.expect("{", "'{' after '\\'")
        names = set()
        if not self.at("}"):
            while True:
                a = self.act()
                if a == TAU:
                    self.fail("tau cannot be restricted")
                names.add(label_name(a))
                if not self.eat(","):
                    break
        self.expect("}", "'}' closing the restriction set")
        return frozenset(names)

    def relabel_map(self) -> tuple[tuple[str, str], ...]:
        self.expect("[", "'['")
        pairs = []
        if not self.at("]"):
            while True:
                src = self._plain_name("relabelling source")
                self.expect("->", "'->' in relabelling pair")
                dst = self._plain_name("relabelling target")
                pairs.append((src, dst))
                if not self.eat(","):
                    break
        self.expect("]", "']' closing the relabelling")
        return tuple(pairs)

    def _plain_name(self, what: str) -> str:
        t = self.peek()
        if t.kind != "name" or t.text == TAU:
            self.fail(f"expected a plain name for the {what}")
        return self.next().text

    # A dot chain mixes action groups and process atoms.  Leading groups are
    # prefixes of the first process; later groups are suffixes of everything
    # to their left (so ``P.tau.a[3]`` associates as ``(P.tau).a[3]``).
    def chain(self) -> Process:
        items = [self.item()]
        while self.eat("."):
            items.append(self.item())
        cur: Process | None = None
        pending: list[tuple[tuple[str, ...], int | None]] = []
        for it in items:
            if isinstance(it, tuple):
                if cur is None:
                    pending.append(it)
                else:
                    acts, key = it
                    cur = Seq(cur, Prefix(acts, key, NIL))
            else:
                if cur is None:
                    p = it
                    for acts, key in reversed(pending):
                        p = Prefix(acts, key, p)
                    pending.clear()
                    cur = p
                else:
                    cur = Seq(cur, it)
        if cur is None:
            self.fail("an action group is not a process by itself (append '.nil')")
        return cur

    # Returns either a Process atom or an action-group tuple (actions, key).
    def item(self):
        t = self.peek()
        if t.kind == "const":
            self.next()
            return Const(t.text)
        if t.kind == "name" and t.text == "nil":
            self.next()
            return NIL
        if t.kind == "name" or t.text == "~":
            return self.group_single()
        if self.at("("):
            saved = self.i
            group = self.try_group_multi()
            if group is not None:
                return group
            self.i = saved
            self.next()
            p = self.proc()
            self.expect(")", "')'")
            return p
        self.fail("expected a process")

    def act(self) -> str:
        t = self.peek()
        if t.text == "~":
            self.next()
            u = self.peek()
            if u.kind != "name" or u.text in (TAU, "nil"):
                self.fail("expected a channel name after '~'")
            self.next()
            return "~" + u.text
        if t.kind == "name" and t.text != "nil":
            self.next()
            return t.text
        self.fail("expected an action")

    def keyed_or_plain(self) -> tuple[str, int | None]:
        a = self.act()
        key = None
        if self.eat("["):
            t = self.peek()
            if t.kind != "nat":
                self.fail("expected a key (a natural number)")
            key = int(self.next().text)
            if key < 1:
                self.fail("keys start at 1")
            if a == TAU:
                self.fail("tau never carries a key")
            self.expect("]", "']' closing the key")
        return a, key

    def group_single(self) -> tuple[tuple[str, ...], int | None]:
        a, key = self.keyed_or_plain()
        return (a,), key

    def try_group_multi(self):
        # "(" act ("||" act)+ ")" or "(" keyed ("||" keyed)+ ")"; None if the
        # parenthesis opens an ordinary subterm instead.
        start = self.i
        self.next()  # "("
        try:
            first = self.keyed_or_plain()
        except ParseError:
            self.i = start
            return None
        if not self.at("||"):
            self.i = start
            return None
        parts = [first]
        while self.eat("||"):
            parts.append(self.keyed_or_plain())
        self.expect(")", "')' closing the action group")
        actions = tuple(a for a, _ in parts)
        keys = {k for _, k in parts}
        if TAU in actions:
            self.fail("tau cannot join a multi-action group")
        if len(keys) > 1:
            self.fail("a past group shares a single key")
        return actions, keys.pop()


def parse(src: str) -> Process:
    """Parse one process term."""
    p = _Parser(src)
    try:
        out = p.proc()
    except TermError as e:
        raise ParseError(str(e)) from e
    if p.peek().kind != "end":
        p.fail("trailing input")
    return out


def parse_defs(src: str) -> dict[str, Process]:
    """Parse a definitions file: one ``Name := term`` per line, # comments."""
    defs: dict[str, Process] = {}
    for lineno, raw in enumerate(src.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"([A-Z][A-Za-z0-9_]*)\s*:=\s*(.+)$", line)
        if not m:
            raise ParseError(f"line {lineno}: expected 'Name := term'")
        name, body = m.group(1), m.group(2)
        if name in defs:
            raise ParseError(f"line {lineno}: duplicate definition of {name}")
        try:
            defs[name] = parse(body)
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}") from e
    return defs


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

# Binding levels, loosest to tightest.
_SUM, _PAR, _POST, _SEQ, _PREFIX, _ATOM = range(6)


def _level(p: Process) -> int:
    if isinstance(p, Sum):
        return _SUM
    if isinstance(p, Par):
        return _PAR
    if isinstance(p, (Restrict, Relabel)):
        return _POST
    if isinstance(p, Seq):
        return _SEQ
    if isinstance(p, Prefix):
        return _PREFIX
    return _ATOM


def _group(actions: tuple[str, ...], key: int | None) -> str:
    parts = [a if key is None else f"{a}[{key}]" for a in actions]
    if len(parts) == 1:
        return parts[0]
    return "(" + " || ".join(parts) + ")"


def _render(p: Process, ctx: int) -> str:
    if isinstance(p, Nil):
        s = "nil"
    elif isinstance(p, Const):
        s = p.name
    elif isinstance(p, Prefix):
        body = _render(p.body, _PREFIX)
        if isinstance(p.body, Seq):  # a.(P.Q) is not the chain a.P.Q
            body = "(" + body + ")"
        s = _group(p.actions, p.key) + "." + body
    elif isinstance(p, Seq):
        left = _render(p.left, _SEQ)
        right = p.right
        if isinstance(right, Prefix) and isinstance(right.body, Nil):
            s = left + "." + _group(right.actions, right.key)
        else:
            s = left + "." + _render(right, _ATOM)
    elif isinstance(p, Sum):
        s = _render(p.left, _SUM) + " + " + _render(p.right, _PAR)
    elif isinstance(p, Par):
        s = _render(p.left, _POST) + " | " + _render(p.right, _PAR)
    elif isinstance(p, Restrict):
        s = _render(p.body, _POST) + " \\ {" + ", ".join(sorted(p.labels)) + "}"
    elif isinstance(p, Relabel):
        s = _render(p.body, _POST) + " [" + ", ".join(f"{a}->{b}" for a, b in p.mapping) + "]"
    else:
        raise TermError(f"unknown process {p!r}")
    if _level(p) < ctx:
        return "(" + s + ")"
    return s


def render(p: Process) -> str:
    """Canonical text for p; parse(render(p)) is structurally equal to p."""
    return _render(p, _SUM)
