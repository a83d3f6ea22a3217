"""Past-tense temporal logic over finite words of atoms, and (TL|TL) pairs.

Atoms are integers used as bitmasks over an :class:`EventSet`: bit ``i`` is
set iff the ``i``-th declared event holds.  A word is a non-empty sequence of
atoms.  Formulas are immutable dataclasses; ``and``, ``->``, ``<->``, ``once``
and ``hist`` are derived and :func:`expand` rewrites them into the core
connectives ``not``, ``or``, ``Y`` and ``S``; ``once f`` is ``true S f``
(with ``false S f`` the left operand can never hold, which collapses to ``f``).
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

MAX_EVENTS = 16
KEYWORDS = frozenset({"not", "Y", "once", "hist", "true", "false", "S", "and", "or"})
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class ThreeVal(enum.IntEnum):
    FALSE = 0
    TRUE = 1
    UNDEF = 2

    def __str__(self) -> str:
        return ("0", "1", "⊥")[self]

    @classmethod
    def of(cls, b: bool) -> "ThreeVal":
        return cls.TRUE if b else cls.FALSE

    @classmethod
    def parse(cls, text: str) -> "ThreeVal":
        key = text.strip().lower()
        if key in ("0", "false", "f"):
            return cls.FALSE
        if key in ("1", "true", "t"):
            return cls.TRUE
        if key in ("⊥", "bot", "undef", "u", "b", "_|_"):
            return cls.UNDEF
        raise ValueError(f"not a three-valued truth value: {text!r}")


class EventSetError(ValueError):
    pass


class EventSet:
    """Ordered, duplicate-free set of event names (at most ``MAX_EVENTS``)."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        names = tuple(names)
        if len(names) > MAX_EVENTS:
            raise EventSetError(f"at most {MAX_EVENTS} events are supported, got {len(names)}")
        for name in names:
            if not _IDENT.match(name):
                raise EventSetError(f"invalid event name {name!r}")
            if name in KEYWORDS:
                raise EventSetError(f"event name {name!r} is a reserved word")
        if len(set(names)) != len(names):
            raise EventSetError(f"duplicate event names in {names}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    @classmethod
    def parse(cls, text: str) -> "EventSet":
        return cls(text.replace(",", " ").split())

    def __len__(self) -> int:
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name) -> bool:
        return name in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, EventSet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"EventSet({list(self.names)!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise EventSetError(f"unknown event {name!r}") from None

    @property
    def n_atoms(self) -> int:
        return 1 << len(self.names)

    def atoms(self) -> range:
        return range(self.n_atoms)

    def atom(self, members: Iterable[str]) -> int:
        mask = 0
        for name in members:
            mask |= 1 << self.index(name)
        return mask

    def members(self, atom: int) -> list[str]:
        return [n for i, n in enumerate(self.names) if atom >> i & 1]

    def format_atom(self, atom: int) -> str:
        return "{" + " ".join(self.members(atom)) + "}"


def parse_word(text: str, events: EventSet) -> tuple[int, ...]:
    """Parse ``"{a b} {} {b}"`` (commas also accepted inside braces)."""
    groups = re.findall(r"\{([^{}]*)\}", text)
    rest = re.sub(r"\{[^{}]*\}", "", text).strip(" \t\n,;")
    if rest:
        raise ValueError(f"unexpected text in word: {rest!r}")
    if not groups:
        raise ValueError("a word needs at least one letter")
    return tuple(events.atom(g.replace(",", " ").split()) for g in groups)


def format_word(word: Sequence[int], events: EventSet) -> str:
    return " ".join(events.format_atom(a) for a in word)


# --------------------------------------------------------------------------
# AST


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Var(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Prev(Formula):
    arg: Formula


@dataclass(frozen=True)
class Since(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Once(Formula):
    arg: Formula


@dataclass(frozen=True)
class Hist(Formula):
    arg: Formula


TRUE = TrueF()
FALSE = FalseF()

_UNARY = {Not: "not", Prev: "Y", Once: "once", Hist: "hist"}
_BINARY = {Since: "S", And: "and", Or: "or", Implies: "->", Iff: "<->"}


@dataclass(frozen=True)
class CondPair:
    """The conditional ``(consequent | antecedent)``."""

    consequent: Formula
    antecedent: Formula

    def __str__(self) -> str:
        return f"({to_text(self.consequent)} | {to_text(self.antecedent)})"


def conj(*fs: Formula) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def variables(f: Formula) -> set[str]:
    if isinstance(f, Var):
        return {f.name}
    out: set[str] = set()
    for child in _children(f):
        out |= variables(child)
    return out


def _children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (Not, Prev, Once, Hist)):
        return (f.arg,)
    if isinstance(f, (Or, And, Implies, Iff, Since)):
        return (f.left, f.right)
    return ()


def depth(f: Formula) -> int:
    kids = _children(f)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


def check_events(f: Formula, events: EventSet) -> None:
    for name in sorted(variables(f)):
        if name not in events:
            raise EventSetError(f"unknown event {name!r}")


# --------------------------------------------------------------------------
# printing
#
# Chains of the same left-associative binary operator print flat; any other
# binary operand of a binary operator is parenthesized, as is a binary operand
# of a unary operator.  ``->`` chains to the right.


def to_text(f: Formula) -> str:
    if isinstance(f, TrueF):
        return "true"
    if isinstance(f, FalseF):
        return "false"
    if isinstance(f, Var):
        return f.name
    if type(f) in _UNARY:
        return f"{_UNARY[type(f)]} {_operand(f.arg)}"
    op = _BINARY[type(f)]
    if isinstance(f, Implies):
        left = _operand(f.left)
        right = to_text(f.right) if isinstance(f.right, Implies) else _operand(f.right)
    else:
        left = to_text(f.left) if type(f.left) is type(f) else _operand(f.left)
        right = _operand(f.right)
    return f"{left} {op} {right}"


def _operand(f: Formula) -> str:
    if type(f) in _BINARY:
        return f"({to_text(f)})"
    return to_text(f)


# --------------------------------------------------------------------------
# parsing


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        super().__init__(f"{message} at position {position}")
        self.message = message
        self.position = position
        self.text = text


_TOKEN = re.compile(r"\s*(?:(<->|->|[()|!])|([A-Za-z][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        tok = m.group(1) or m.group(2)
        tokens.append((tok, m.start(1) if m.group(1) else m.start(2)))
        pos = m.end()
    tokens.append(("<eof>", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, events: EventSet | None):
        self.text = text
        self.events = events
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def advance(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def fail(self, message: str):
        where = "end of input" if self.peek() == "<eof>" else repr(self.peek())
        raise FormulaSyntaxError(f"{message}, found {where}", self.pos(), self.text)

    def expect(self, tok: str, message: str | None = None):
        if self.peek() != tok:
            self.fail(message or f"expected {tok!r}")
        self.advance()

    def iff(self) -> Formula:
        f = self.imp()
        while self.peek() == "<->":
            self.advance()
            f = Iff(f, self.imp())
        return f

    def imp(self) -> Formula:
        f = self.disj()
        if self.peek() == "->":
            self.advance()
            return Implies(f, self.imp())
        return f

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek() == "or":
            self.advance()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.since()
        while self.peek() == "and":
            self.advance()
            f = And(f, self.since())
        return f

    def since(self) -> Formula:
        f = self.unary()
        while self.peek() == "S":
            self.advance()
            f = Since(f, self.unary())
        return f

    def unary(self) -> Formula:
        tok = self.peek()
        if tok in ("not", "!"):
            self.advance()
            return Not(self.unary())
        if tok == "Y":
            self.advance()
            return Prev(self.unary())
        if tok == "once":
            self.advance()
            return Once(self.unary())
        if tok == "hist":
            self.advance()
            return Hist(self.unary())
        if tok == "true":
            self.advance()
            return TRUE
        if tok == "false":
            self.advance()
            return FALSE
        if tok == "(":
            self.advance()
            f = self.iff()
            self.expect(")", "expected ')'")
            return f
        if tok == "<eof>" or tok in KEYWORDS or not _IDENT.match(tok):
            self.fail("expected a formula")
        if self.events is not None and tok not in self.events:
            raise FormulaSyntaxError(f"unknown event {tok!r}", self.pos(), self.text)
        self.advance()
        return Var(tok)


def parse_formula(text: str, events: EventSet | None = None) -> Formula:
    p = _Parser(text, events)
    f = p.iff()
    if p.peek() == "|":
        p.fail("'|' is only allowed in a top-level conditional")
    p.expect("<eof>", "expected end of input")
    return f


def parse_conditional(text: str, events: EventSet | None = None) -> CondPair:
    p = _Parser(text, events)
    p.expect("(", "a conditional starts with '('")
    consequent = p.iff()
    p.expect("|", "missing top-level '|'")
    antecedent = p.iff()
    if p.peek() == "|":
        p.fail("only one '|' is allowed in a conditional")
    p.expect(")", "expected ')'")
    p.expect("<eof>", "expected end of input")
    return CondPair(consequent, antecedent)


# --------------------------------------------------------------------------
# derived operators


def expand(f: Formula) -> Formula:
    """Rewrite into ``{true, false, var, not, or, Y, S}``."""
    if isinstance(f, (TrueF, FalseF, Var)):
        return f
    if isinstance(f, Not):
        return Not(expand(f.arg))
    if isinstance(f, Prev):
        return Prev(expand(f.arg))
    if isinstance(f, Or):
        return Or(expand(f.left), expand(f.right))
    if isinstance(f, Since):
        return Since(expand(f.left), expand(f.right))
    if isinstance(f, And):
        return Not(Or(Not(expand(f.left)), Not(expand(f.right))))
    if isinstance(f, Implies):
        return Or(Not(expand(f.left)), expand(f.right))
    if isinstance(f, Iff):
        left, right = expand(f.left), expand(f.right)
        return Not(Or(Not(Or(Not(left), right)), Not(Or(Not(right), left))))
    if isinstance(f, Once):
        return Since(TRUE, expand(f.arg))
    if isinstance(f, Hist):
        return Not(Since(TRUE, Not(expand(f.arg))))
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# semantics


def valuation(f: Formula, word: Sequence[int], events: EventSet) -> list[bool]:
    """Truth value of ``f`` at every position of ``word``."""
    memo: dict[int, list[bool]] = {}
    return _values(f, word, events, memo)


def _values(f, word, events, memo) -> list[bool]:
    hit = memo.get(id(f))
    if hit is not None:
        return hit
    n = len(word)
    if isinstance(f, TrueF):
        out = [True] * n
    elif isinstance(f, FalseF):
        out = [False] * n
    elif isinstance(f, Var):
        bit = 1 << events.index(f.name)
        out = [bool(a & bit) for a in word]
    elif isinstance(f, Not):
        out = [not v for v in _values(f.arg, word, events, memo)]
    elif isinstance(f, (Or, And, Implies, Iff)):
        lv = _values(f.left, word, events, memo)
        rv = _values(f.right, word, events, memo)
        if isinstance(f, Or):
            out = [x or y for x, y in zip(lv, rv)]
        elif isinstance(f, And):
            out = [x and y for x, y in zip(lv, rv)]
        elif isinstance(f, Implies):
            out = [(not x) or y for x, y in zip(lv, rv)]
        else:
            out = [x == y for x, y in zip(lv, rv)]
    elif isinstance(f, Prev):
        inner = _values(f.arg, word, events, memo)
        out = [False] + inner[:-1]
    elif isinstance(f, Since):
        lv = _values(f.left, word, events, memo)
        rv = _values(f.right, word, events, memo)
        out = []
        acc = False
        for x, y in zip(lv, rv):
            acc = y or (x and acc)
            out.append(acc)
    elif isinstance(f, Once):
        out = []
        acc = False
        for v in _values(f.arg, word, events, memo):
            acc = acc or v
            out.append(acc)
    elif isinstance(f, Hist):
        out = []
        acc = True
        for v in _values(f.arg, word, events, memo):
            acc = acc and v
            out.append(acc)
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[id(f)] = out
    return out


def _check_word(word: Sequence[int], events: EventSet) -> None:
    if len(word) == 0:
        raise ValueError("words must be non-empty")
    for a in word:
        if not 0 <= a < events.n_atoms:
            raise ValueError(f"atom {a} out of range for {events!r}")


def eval_formula(f: Formula, word: Sequence[int], events: EventSet) -> bool:
    _check_word(word, events)
    return valuation(f, word, events)[-1]


def cond_value(phi: bool, psi: bool) -> ThreeVal:
    if not psi:
        return ThreeVal.UNDEF
    return ThreeVal.of(phi)


def trace_conditional(c: CondPair, word: Sequence[int], events: EventSet) -> list[ThreeVal]:
    """Value of ``c`` on every non-empty prefix of ``word``."""
    _check_word(word, events)
    memo: dict[int, list[bool]] = {}
    phi = _values(c.consequent, word, events, memo)
    psi = _values(c.antecedent, word, events, memo)
    return [cond_value(x, y) for x, y in zip(phi, psi)]


def eval_conditional(c: CondPair, word: Sequence[int], events: EventSet) -> ThreeVal:
    return trace_conditional(c, word, events)[-1]
