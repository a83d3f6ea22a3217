"""Three-valued Moore machines: compilation from (TL|TL), minimization,
counter-freeness and products under present-tense truth tables."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .logic import (
    CondPair,
    EventSet,
    FalseF,
    Formula,
    Not,
    Or,
    Prev,
    Since,
    ThreeVal,
    TrueF,
    Var,
    check_events,
    cond_value,
    expand,
)

DEFAULT_MONOID_CAP = 10**6


class MonoidTooLarge(RuntimeError):
    pass


@dataclass(frozen=True)
class MooreMachine:
    """Deterministic Moore machine over the atoms of ``events``.

    ``delta[q][atom]`` is the successor of ``q``; ``output[q]`` is h(q).
    Outputs are produced after each letter, so h of a state that is only
    ever the initial state is never observed.
    """

    events: EventSet
    delta: tuple[tuple[int, ...], ...]
    initial: int
    output: tuple[ThreeVal, ...]

    def __post_init__(self):
        n = len(self.delta)
        if len(self.output) != n:
            raise ValueError("output map and transition table disagree on the state count")
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        width = self.events.n_atoms
        for row in self.delta:
            if len(row) != width:
                raise ValueError("transition table must be total over all atoms")
            for q in row:
                if not 0 <= q < n:
                    raise ValueError(f"transition target {q} out of range")

    @property
    def n_states(self) -> int:
        return len(self.delta)

    def run(self, word: Sequence[int]) -> int:
        q = self.initial
        for a in word:
            q = self.delta[q][a]
        return q

    def run_trace(self, word: Sequence[int]) -> list[ThreeVal]:
        if len(word) == 0:
            raise ValueError("words must be non-empty")
        q = self.initial
        out = []
        for a in word:
            q = self.delta[q][a]
            out.append(self.output[q])
        return out

    def reachable(self) -> list[int]:
        """States reachable from the initial state, in BFS order over atoms."""
        seen = {self.initial}
        order = [self.initial]
        queue = deque(order)
        while queue:
            q = queue.popleft()
            for r in self.delta[q]:
                if r not in seen:
                    seen.add(r)
                    order.append(r)
                    queue.append(r)
        return order

    def has_incoming(self, q: int) -> bool:
        return any(q in row for row in self.delta)

    def to_json(self) -> dict:
        ev = self.events
        return {
            "events": list(ev.names),
            "states": [{"id": q, "output": str(h)} for q, h in enumerate(self.output)],
            "initial": self.initial,
            "transitions": [
                {"from": q, "atom": sorted(ev.members(a)), "to": r}
                for q, row in enumerate(self.delta)
                for a, r in enumerate(row)
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "MooreMachine":
        events = EventSet(data["events"])
        ids = [s["id"] for s in data["states"]]
        index = {sid: i for i, sid in enumerate(ids)}
        output = [ThreeVal.parse(str(s["output"])) for s in data["states"]]
        table: list[list[int | None]] = [[None] * events.n_atoms for _ in ids]
        for t in data["transitions"]:
            table[index[t["from"]]][events.atom(t["atom"])] = index[t["to"]]
        for q, row in enumerate(table):
            if None in row:
                raise ValueError(f"state {ids[q]!r} has no transition on some atom")
        return cls(events, tuple(tuple(r) for r in table), index[data["initial"]], tuple(output))

    def to_dot(self, name: str = "moore") -> str:
        ev = self.events
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  start [shape=point, label=""];']
        for q, h in enumerate(self.output):
            lines.append(f'  q{q} [shape=circle, label="{h}"];')
        lines.append(f"  start -> q{self.initial};")
        edges: dict[tuple[int, int], list[int]] = {}
        for q, row in enumerate(self.delta):
            for a, r in enumerate(row):
                edges.setdefault((q, r), []).append(a)
        for (q, r), atoms in edges.items():
            label = ", ".join(ev.format_atom(a) for a in atoms)
            lines.append(f'  q{q} -> q{r} [label="{label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def dumps(m: MooreMachine) -> str:
    return json.dumps(m.to_json(), indent=2, ensure_ascii=False)


# --------------------------------------------------------------------------
# compilation


class _Compiler:
    """Subformula-vector construction.

    A state records, at the last consumed position, the value of every
    operand of a ``Y`` subformula and of every ``S`` subformula, together
    with the conditional's output there.  The pre-initial state is ``None``.
    """

    def __init__(self, c: CondPair, events: EventSet):
        self.events = events
        self.phi = expand(c.consequent)
        self.psi = expand(c.antecedent)
        # memo tables are keyed by node identity; structurally equal nodes
        # share a slot in the state vector
        self.prev_args: list[Formula] = []
        self.sinces: list[Formula] = []
        self.prev_pos: dict[int, int] = {}  # id of a Y node -> slot of its operand
        self.since_pos: dict[int, int] = {}
        self.bit: dict[int, int] = {}
        for f in (self.phi, self.psi):
            self._collect(f)

    @staticmethod
    def _slot(f, items) -> int:
        try:
            return items.index(f)
        except ValueError:
            items.append(f)
            return len(items) - 1

    def _collect(self, f):
        if isinstance(f, Var):
            self.bit[id(f)] = self.events.index(f.name)
        elif isinstance(f, Not):
            self._collect(f.arg)
        elif isinstance(f, Prev):
            self._collect(f.arg)
            self.prev_pos[id(f)] = self._slot(f.arg, self.prev_args)
        elif isinstance(f, (Or, Since)):
            self._collect(f.left)
            self._collect(f.right)
            if isinstance(f, Since):
                self.since_pos[id(f)] = self._slot(f, self.sinces)

    def step(self, state, atom: int):
        if state is None:
            prev_vals = (False,) * len(self.prev_args)
            since_vals = (False,) * len(self.sinces)
        else:
            prev_vals, since_vals, _ = state
        memo: dict[int, bool] = {}

        def ev(f) -> bool:
            hit = memo.get(id(f))
            if hit is not None:
                return hit
            if isinstance(f, TrueF):
                v = True
            elif isinstance(f, FalseF):
                v = False
            elif isinstance(f, Var):
                v = bool(atom >> self.bit[id(f)] & 1)
            elif isinstance(f, Not):
                v = not ev(f.arg)
            elif isinstance(f, Or):
                v = ev(f.left) or ev(f.right)
            elif isinstance(f, Prev):
                v = prev_vals[self.prev_pos[id(f)]]
            elif isinstance(f, Since):
                v = ev(f.right) or (ev(f.left) and since_vals[self.since_pos[id(f)]])
            else:
                raise TypeError(f"unexpanded formula node {f!r}")
            memo[id(f)] = v
            return v

        out = cond_value(ev(self.phi), ev(self.psi))
        new_prev = tuple(ev(f) for f in self.prev_args)
        new_since = tuple(ev(f) for f in self.sinces)
        return (new_prev, new_since, out)


def compile_unminimized(c: CondPair, events: EventSet) -> MooreMachine:
    check_events(c.consequent, events)
    check_events(c.antecedent, events)
    comp = _Compiler(c, events)
    index: dict = {None: 0}
    keys: list = [None]
    rows: list[list[int]] = []
    queue = deque([None])
    while queue:
        key = queue.popleft()
        row = []
        for a in events.atoms():
            nxt = comp.step(key, a)
            if nxt not in index:
                index[nxt] = len(keys)
                keys.append(nxt)
                queue.append(nxt)
            row.append(index[nxt])
        rows.append(row)
    output = tuple(ThreeVal.UNDEF if k is None else k[2] for k in keys)
    return MooreMachine(events, tuple(tuple(r) for r in rows), 0, output)


def compile_conditional(c: CondPair, events: EventSet) -> MooreMachine:
    """Minimal Moore machine whose trace on every word equals that of ``c``."""
    return minimize(compile_unminimized(c, events))


# --------------------------------------------------------------------------
# minimization


def _refine(m: MooreMachine, states: list[int]) -> dict[int, int]:
    """Coarsest output-respecting congruence on ``states`` (Moore's algorithm)."""
    block = {q: int(m.output[q]) for q in states}
    n_blocks = len(set(block.values()))
    while True:
        sigs: dict[tuple, int] = {}
        new_block = {}
        for q in states:
            sig = (block[q], tuple(block[r] for r in m.delta[q]))
            new_block[q] = sigs.setdefault(sig, len(sigs))
        if len(sigs) == n_blocks:
            return new_block
        block, n_blocks = new_block, len(sigs)


def minimize(m: MooreMachine) -> MooreMachine:
    """Trace-equivalent machine with the fewest states, canonically numbered.

    If the initial state has no incoming transitions its output is never
    observed, so it is merged into any state with equivalent successors.
    """
    states = m.reachable()
    block = _refine(m, states)
    init = m.initial
    if not any(init in m.delta[q] for q in states):
        succ = tuple(block[r] for r in m.delta[init])
        for q in states:
            if q != init and tuple(block[r] for r in m.delta[q]) == succ:
                block[init] = block[q]
                break
    rep: dict[int, int] = {}
    for q in states:
        # prefer a non-initial representative: its output is the observable one
        if rep.get(block[q], init) == init:
            rep[block[q]] = q

    number = {block[init]: 0}
    order = [block[init]]
    queue = deque(order)
    while queue:
        b = queue.popleft()
        for r in m.delta[rep[b]]:
            if block[r] not in number:
                number[block[r]] = len(order)
                order.append(block[r])
                queue.append(block[r])
    delta = tuple(tuple(number[block[r]] for r in m.delta[rep[b]]) for b in order)
    output = tuple(m.output[rep[b]] for b in order)
    return MooreMachine(m.events, delta, 0, output)


def trace_equivalent(m1: MooreMachine, m2: MooreMachine) -> bool:
    """Decide equality of the trace functions on all non-empty words."""
    if m1.events != m2.events:
        return False
    start = [(r1, r2) for r1, r2 in zip(m1.delta[m1.initial], m2.delta[m2.initial])]
    seen = set()
    queue = deque()
    for pair in start:
        if pair not in seen:
            seen.add(pair)
            queue.append(pair)
    while queue:
        p, q = queue.popleft()
        if m1.output[p] != m2.output[q]:
            return False
        for r1, r2 in zip(m1.delta[p], m2.delta[q]):
            if (r1, r2) not in seen:
                seen.add((r1, r2))
                queue.append((r1, r2))
    return True


# --------------------------------------------------------------------------
# counter-freeness


def _has_nontrivial_cycle(t: tuple[int, ...]) -> bool:
    """True iff the map ``t`` permutes some set of >= 2 states cyclically."""
    n = len(t)
    color = [0] * n
    for start in range(n):
        if color[start]:
            continue
        path = []
        q = start
        while not color[q]:
            color[q] = 1
            path.append(q)
            q = t[q]
        if color[q] == 1 and t[q] != q:
            return True
        for p in path:
            color[p] = 2
    return False


def transition_monoid(m: MooreMachine, cap: int = DEFAULT_MONOID_CAP) -> set[tuple[int, ...]]:
    """Transformations induced by all non-empty words."""
    gens = sorted({tuple(m.delta[q][a] for q in range(m.n_states)) for a in m.events.atoms()})
    seen = set(gens)
    queue = deque(gens)
    while queue:
        t = queue.popleft()
        for g in gens:
            u = tuple(g[x] for x in t)  # t then g
            if u not in seen:
                seen.add(u)
                if len(seen) > cap:
                    raise MonoidTooLarge(f"transition monoid exceeds {cap} elements")
                queue.append(u)
    return seen


def is_counter_free(m: MooreMachine, cap: int = DEFAULT_MONOID_CAP) -> bool:
    """Aperiodicity of the transition monoid: no word cycles >= 2 states."""
    return not any(_has_nontrivial_cycle(t) for t in transition_monoid(m, cap))


def counter_witness(m: MooreMachine, cap: int = DEFAULT_MONOID_CAP):
    """A shortest word (list of atoms) and a state cycle it induces, or None."""
    gens = {}
    for a in m.events.atoms():
        gens.setdefault(tuple(m.delta[q][a] for q in range(m.n_states)), a)
    word_of = {t: [a] for t, a in gens.items()}
    queue = deque(word_of)
    while queue:
        t = queue.popleft()
        cyc = _cycle_of(t)
        if cyc:
            return word_of[t], cyc
        for g, a in gens.items():
            u = tuple(g[x] for x in t)
            if u not in word_of:
                word_of[u] = word_of[t] + [a]
                if len(word_of) > cap:
                    raise MonoidTooLarge(f"transition monoid exceeds {cap} elements")
                queue.append(u)
    return None


def _cycle_of(t):
    for q in range(len(t)):
        seen = []
        p = q
        while p not in seen:
            seen.append(p)
            p = t[p]
        if p == q and len(seen) > 1:
            return seen
    return None


# --------------------------------------------------------------------------
# products


@dataclass(frozen=True)
class TruthTable3:
    """A present-tense connective: a total map from 𝟯 (or 𝟯 × 𝟯) to 𝟯."""

    name: str
    arity: int
    table: Mapping[tuple[ThreeVal, ...], ThreeVal] = field(hash=False, compare=False)

    def __call__(self, *args: ThreeVal) -> ThreeVal:
        return self.table[tuple(ThreeVal(a) for a in args)]

    @classmethod
    def from_function(cls, name: str, arity: int, fn: Callable[..., ThreeVal]) -> "TruthTable3":
        from itertools import product

        table = {args: ThreeVal(fn(*args)) for args in product(ThreeVal, repeat=arity)}
        return cls(name, arity, table)


COND_TABLE = TruthTable3.from_function(
    "cond", 2, lambda x, y: x if y == ThreeVal.TRUE and x != ThreeVal.UNDEF else ThreeVal.UNDEF
)


def product_with_table(t: TruthTable3, m1: MooreMachine, m2: MooreMachine) -> MooreMachine:
    """Reachable part of ``m1 × m2`` with output ``t(h1, h2)``."""
    if m1.events != m2.events:
        raise ValueError("machines are over different event sets")
    start = (m1.initial, m2.initial)
    index = {start: 0}
    pairs = [start]
    rows = []
    queue = deque([start])
    while queue:
        p, q = queue.popleft()
        row = []
        for a in m1.events.atoms():
            nxt = (m1.delta[p][a], m2.delta[q][a])
            if nxt not in index:
                index[nxt] = len(pairs)
                pairs.append(nxt)
                queue.append(nxt)
            row.append(index[nxt])
        rows.append(tuple(row))
    output = tuple(t(m1.output[p], m2.output[q]) for p, q in pairs)
    return MooreMachine(m1.events, tuple(rows), 0, output)
