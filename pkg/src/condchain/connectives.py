"""Connectives of conditionals.

Three present-tense systems (truth tables on 𝟯 and the matching syntactic
rewrites of (TL|TL) pairs) plus the past-tense conjunction ``and_star``:

* ``sac``: Sobociński, ⊥ is the unit of both ``and`` and ``or``;
* ``gnw``: Łukasiewicz / strong Kleene, min and max under 0 < ⊥ < 1;
* ``sch``: Bochvar, any ⊥ argument gives ⊥.
"""
from __future__ import annotations

from .automata import TruthTable3
from .logic import And, CondPair, Formula, Not, Or, Since, ThreeVal, conj, disj

F, T, U = ThreeVal.FALSE, ThreeVal.TRUE, ThreeVal.UNDEF

SYSTEMS = ("sac", "gnw", "sch")
BINARY_NAMES = tuple(f"{s}-{k}" for s in SYSTEMS for k in ("and", "or"))
OP_NAMES = BINARY_NAMES + ("neg", "star-and")

_RANK = {F: 0, U: 1, T: 2}


def _sac_and(x, y):
    if x == U:
        return y
    if y == U:
        return x
    return ThreeVal.of(x == T and y == T)


def _sac_or(x, y):
    if x == U:
        return y
    if y == U:
        return x
    return ThreeVal.of(x == T or y == T)


def _gnw_and(x, y):
    return min(x, y, key=_RANK.__getitem__)


def _gnw_or(x, y):
    return max(x, y, key=_RANK.__getitem__)


def _sch_and(x, y):
    if U in (x, y):
        return U
    return ThreeVal.of(x == T and y == T)


def _sch_or(x, y):
    if U in (x, y):
        return U
    return ThreeVal.of(x == T or y == T)


def _neg(x):
    return {F: T, T: F, U: U}[x]


TABLES = {
    "sac-and": TruthTable3.from_function("sac-and", 2, _sac_and),
    "sac-or": TruthTable3.from_function("sac-or", 2, _sac_or),
    "gnw-and": TruthTable3.from_function("gnw-and", 2, _gnw_and),
    "gnw-or": TruthTable3.from_function("gnw-or", 2, _gnw_or),
    "sch-and": TruthTable3.from_function("sch-and", 2, _sch_and),
    "sch-or": TruthTable3.from_function("sch-or", 2, _sch_or),
    "neg": TruthTable3.from_function("neg", 1, _neg),
}


def table_of(name: str) -> TruthTable3:
    try:
        return TABLES[name]
    except KeyError:
        raise ValueError(f"unknown connective {name!r}; expected one of {sorted(TABLES)}") from None


def apply_pointwise(t: TruthTable3, *args: ThreeVal) -> ThreeVal:
    return t(*args)


def neg(c: CondPair) -> CondPair:
    return CondPair(Not(c.consequent), c.antecedent)


def _gnw_and_rule(a, b, c, d):
    return conj(a, b, c, d), disj(And(Not(a), b), And(Not(c), d), conj(a, b, c, d))


# Variant antecedent ``a' d or c' d or abcd``.  It disagrees
# with the strong Kleene table (e.g. 0 and ⊥ with d false gives ⊥, not 0),
# so it is kept for comparison only.
def gnw_and_asymmetric(c1: CondPair, c2: CondPair) -> CondPair:
    a, b, c, d = c1.consequent, c1.antecedent, c2.consequent, c2.antecedent
    return CondPair(conj(a, b, c, d), disj(And(Not(a), d), And(Not(c), d), conj(a, b, c, d)))


def reduce(name: str, c1: CondPair, c2: CondPair | None = None) -> CondPair:
    """Rewrite a connective applied to (TL|TL) pairs back into one pair."""
    if name == "neg":
        if c2 is not None:
            raise ValueError("neg takes one conditional")
        return neg(c1)
    if c2 is None:
        raise ValueError(f"{name} takes two conditionals")
    if name == "star-and":
        return and_star(c1, c2)
    a, b, c, d = c1.consequent, c1.antecedent, c2.consequent, c2.antecedent
    if name == "sac-and":
        phi = disj(conj(a, b, c, d), conj(a, b, Not(d)), conj(c, d, Not(b)))
        return CondPair(phi, Or(b, d))
    if name == "gnw-and":
        return CondPair(*_gnw_and_rule(a, b, c, d))
    if name == "sch-and":
        return CondPair(conj(a, b, c, d), And(b, d))
    if name == "sac-or":
        return CondPair(Or(And(a, b), And(c, d)), Or(b, d))
    if name == "gnw-or":
        return CondPair(Or(And(a, b), And(c, d)), disj(And(a, b), And(c, d), And(b, d)))
    if name == "sch-or":
        return CondPair(Or(And(a, b), And(c, d)), And(b, d))
    raise ValueError(f"unknown connective {name!r}; expected one of {list(OP_NAMES)}")


def and_star(c1: CondPair, c2: CondPair) -> CondPair:
    """Conjunction that reuses each argument's most recent defined value
    (false if it has never been defined); defined when either side is."""
    a, b, c, d = c1.consequent, c1.antecedent, c2.consequent, c2.antecedent
    latest = lambda x, y: Since(Not(y), And(x, y))  # noqa: E731
    return CondPair(And(latest(a, b), latest(c, d)), Or(b, d))
