"""Finite Markov chains induced by Moore machines, in exact rational arithmetic.

Step convention: ``initial`` is the distribution of the machine state after
the first letter, so ``n_step_distribution(x, n)`` is the law of the state
after ``n`` letters.  The machine's pre-initial state stays in the chain with
zero initial mass.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

import numpy as np

from .automata import MooreMachine
from .logic import EventSet, ThreeVal

SUPPORT_CAP = 1 << 20


class DistError(ValueError):
    pass


class SupportCapExceeded(RuntimeError):
    pass


def to_fraction(text) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    text = str(text).strip()
    if not re.fullmatch(r"[+-]?\d+(/\d+)?|[+-]?\d*\.\d+", text):
        raise DistError(f"not a rational number: {text!r}")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise DistError(f"zero denominator in {text!r}") from None


def format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# --------------------------------------------------------------------------
# distributions on atoms


@dataclass(frozen=True)
class Dist:
    events: EventSet
    prob: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.prob) != self.events.n_atoms:
            raise DistError("a distribution needs one probability per atom")
        for p in self.prob:
            if p < 0 or p > 1:
                raise DistError(f"probability {p} outside [0, 1]")
        if sum(self.prob) != 1:
            raise DistError(f"atom probabilities sum to {sum(self.prob)}, not 1")

    @classmethod
    def independent(cls, events: EventSet, marginals: dict) -> "Dist":
        ps = []
        for name in events:
            if name not in marginals:
                raise DistError(f"no probability given for event {name!r}")
            p = to_fraction(marginals[name])
            if p < 0 or p > 1:
                raise DistError(f"probability of {name!r} is {p}, outside [0, 1]")
            ps.append(p)
        for name in marginals:
            events.index(name)
        prob = []
        for a in events.atoms():
            w = Fraction(1)
            for i, p in enumerate(ps):
                w *= p if a >> i & 1 else 1 - p
            prob.append(w)
        return cls(events, tuple(prob))

    @classmethod
    def from_atoms(cls, events: EventSet, weights: dict) -> "Dist":
        """``weights`` maps atoms (ints or iterables of event names) to probabilities."""
        prob = [Fraction(0)] * events.n_atoms
        for key, p in weights.items():
            a = key if isinstance(key, int) else events.atom(key)
            p = to_fraction(p)
            if p < 0 or p > 1:
                raise DistError(f"probability {p} outside [0, 1]")
            prob[a] += p
        return cls(events, tuple(prob))

    def __getitem__(self, atom: int) -> Fraction:
        return self.prob[atom]

    def marginal(self, name: str) -> Fraction:
        bit = 1 << self.events.index(name)
        return sum((p for a, p in enumerate(self.prob) if a & bit), Fraction(0))

    def digest(self) -> str:
        text = " ".join(self.events.names) + ";" + ",".join(format_fraction(p) for p in self.prob)
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def to_text(self) -> str:
        lines = ["events " + " ".join(self.events.names), "mode atoms"]
        for a, p in enumerate(self.prob):
            if p:
                lines.append(f"{self.events.format_atom(a)} = {format_fraction(p)}")
        return "\n".join(lines) + "\n"


def parse_dist(text: str, events: EventSet | None = None) -> Dist:
    """Parse the line-oriented distribution format.

    ``events`` may be omitted when the text has an ``events`` header; when
    both are present they must agree.
    """
    header = None
    mode = None
    entries: list[tuple[str, str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("events ") or line == "events":
            header = EventSet(line.split()[1:])
        elif line.startswith("mode"):
            parts = line.split()
            if len(parts) != 2 or parts[1] not in ("independent", "atoms"):
                raise DistError(f"line {lineno}: mode must be 'independent' or 'atoms'")
            mode = parts[1]
        elif "=" in line:
            lhs, rhs = line.rsplit("=", 1)
            entries.append((lhs.strip(), rhs.strip(), lineno))
        else:
            raise DistError(f"line {lineno}: cannot parse {raw!r}")
    if header is not None and events is not None and header != events:
        raise DistError(f"dist declares events {list(header.names)} but {list(events.names)} were given")
    events = events if events is not None else header
    if events is None:
        raise DistError("no events declared")
    if mode is None:
        mode = "atoms" if any(lhs.startswith("{") for lhs, _, _ in entries) else "independent"
    if mode == "independent":
        marginals = {}
        for lhs, rhs, lineno in entries:
            if lhs not in events:
                raise DistError(f"line {lineno}: unknown event {lhs!r}")
            if lhs in marginals:
                raise DistError(f"line {lineno}: duplicate entry for {lhs!r}")
            marginals[lhs] = to_fraction(rhs)
        return Dist.independent(events, marginals)
    weights: dict[int, Fraction] = {}
    for lhs, rhs, lineno in entries:
        m = re.fullmatch(r"\{([^{}]*)\}", lhs)
        if not m:
            raise DistError(f"line {lineno}: atoms are written as {{e1 e2 ...}}")
        names = m.group(1).replace(",", " ").split()
        for name in names:
            if name not in events:
                raise DistError(f"line {lineno}: unknown event {name!r}")
        a = events.atom(names)
        if a in weights:
            raise DistError(f"line {lineno}: atom listed twice")
        weights[a] = to_fraction(rhs)
    return Dist.from_atoms(events, weights)


# --------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class MarkovChain:
    matrix: tuple[tuple[Fraction, ...], ...]
    initial: tuple[Fraction, ...]
    output: tuple[ThreeVal, ...]

    def __post_init__(self):
        n = len(self.matrix)
        if len(self.initial) != n or len(self.output) != n:
            raise ValueError("matrix, initial vector and outputs disagree on the state count")
        for i, row in enumerate(self.matrix):
            if len(row) != n:
                raise ValueError("transition matrix must be square")
            if any(p < 0 for p in row) or sum(row) != 1:
                raise ValueError(f"row {i} is not a probability vector")
        if any(p < 0 for p in self.initial) or sum(self.initial) != 1:
            raise ValueError("initial vector is not a probability vector")

    @property
    def n_states(self) -> int:
        return len(self.matrix)

    def successors(self, i: int) -> list[int]:
        return [j for j, p in enumerate(self.matrix[i]) if p]

    def float_matrix(self) -> np.ndarray:
        return np.array([[float(p) for p in row] for row in self.matrix])

    def to_json(self) -> dict:
        return {
            "convention": "initial is the state law after the first letter; step n is word position n",
            "states": list(range(self.n_states)),
            "matrix": [[format_fraction(p) for p in row] for row in self.matrix],
            "initial": [format_fraction(p) for p in self.initial],
            "outputs": [str(h) for h in self.output],
        }


def induce(m: MooreMachine, d: Dist) -> MarkovChain:
    if m.events != d.events:
        raise ValueError("machine and distribution are over different event sets")
    n = m.n_states
    rows = []
    for q in range(n):
        row = [Fraction(0)] * n
        for a, r in enumerate(m.delta[q]):
            row[r] += d.prob[a]
        rows.append(tuple(row))
    init = [Fraction(0)] * n
    for a, r in enumerate(m.delta[m.initial]):
        init[r] += d.prob[a]
    return MarkovChain(tuple(rows), tuple(init), m.output)


def step(x: MarkovChain, v: Sequence[Fraction]) -> list[Fraction]:
    n = x.n_states
    out = [Fraction(0)] * n
    for i, vi in enumerate(v):
        if vi:
            for j, p in enumerate(x.matrix[i]):
                if p:
                    out[j] += vi * p
    return out


def n_step_distribution(x: MarkovChain, n: int) -> list[Fraction]:
    """Exact law of the state after ``n`` letters (``n >= 1``)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    v = list(x.initial)
    for _ in range(n - 1):
        v = step(x, v)
    return v


def n_step_float(x: MarkovChain, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("n must be at least 1")
    v = np.array([float(p) for p in x.initial])
    return v @ np.linalg.matrix_power(x.float_matrix(), n - 1)


# --------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class StateClassification:
    sccs: tuple[tuple[int, ...], ...]
    ergodic: tuple[bool, ...]
    periods: tuple[int | None, ...]  # None for transient classes

    def class_of(self, i: int) -> int:
        for k, c in enumerate(self.sccs):
            if i in c:
                return k
        raise KeyError(i)

    @property
    def ergodic_classes(self) -> list[tuple[int, ...]]:
        return [c for c, e in zip(self.sccs, self.ergodic) if e]

    @property
    def transient_states(self) -> list[int]:
        return sorted(i for c, e in zip(self.sccs, self.ergodic) if not e for i in c)


def strongly_connected_components(succ: list[list[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(sorted(comp))
    return comps


def _period(succ: list[list[int]], members: Sequence[int]) -> int:
    inside = set(members)
    root = members[0]
    level = {root: 0}
    queue = [root]
    for v in queue:
        for w in succ[v]:
            if w in inside and w not in level:
                level[w] = level[v] + 1
                queue.append(w)
    g = 0
    for v in members:
        for w in succ[v]:
            if w in inside:
                g = gcd(g, level[v] + 1 - level[w])
    return g


def classify_states(x: MarkovChain) -> StateClassification:
    succ = [x.successors(i) for i in range(x.n_states)]
    comps = sorted(strongly_connected_components(succ))
    where = {i: k for k, c in enumerate(comps) for i in c}
    ergodic = []
    periods = []
    for k, c in enumerate(comps):
        closed = all(where[w] == k for v in c for w in succ[v])
        ergodic.append(closed)
        periods.append(_period(succ, c) if closed else None)
    return StateClassification(tuple(tuple(c) for c in comps), tuple(ergodic), tuple(periods))


def reachable_states(x: MarkovChain) -> set[int]:
    seen = {i for i, p in enumerate(x.initial) if p}
    todo = list(seen)
    while todo:
        v = todo.pop()
        for w in x.successors(v):
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


# --------------------------------------------------------------------------
# exact linear algebra


class SingularSystem(ArithmeticError):
    pass


def solve_exact(a: list[list[Fraction]], b: list[list[Fraction]]) -> list[list[Fraction]]:
    """Solve ``a @ X = b`` by Gauss-Jordan elimination over the rationals."""
    n = len(a)
    k = len(b[0]) if b else 0
    m = [list(a[i]) + list(b[i]) for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise SingularSystem("singular system; the input chain is not stochastic")
        m[col], m[piv] = m[piv], m[col]
        pv = m[col][col]
        if pv != 1:
            m[col] = [v / pv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                rowc = m[col]
                m[r] = [vr - f * vc for vr, vc in zip(m[r], rowc)]
    return [row[n : n + k] for row in m]


def stationary_exact(x: MarkovChain, members: Sequence[int]) -> dict[int, Fraction]:
    """Stationary law of a closed class: pi (P - I) = 0, sum pi = 1."""
    idx = list(members)
    n = len(idx)
    if n == 1:
        return {idx[0]: Fraction(1)}
    # transpose system; the last balance equation is replaced by normalization
    a = [[x.matrix[idx[j]][idx[i]] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    a[-1] = [Fraction(1)] * n
    b = [[Fraction(0)] for _ in range(n)]
    b[-1] = [Fraction(1)]
    sol = solve_exact(a, b)
    return {idx[i]: sol[i][0] for i in range(n)}


@dataclass(frozen=True)
class LimitVector:
    """Limit of ``n_step_distribution`` when ``exists``.

    ``values`` is always the Cesaro limit (absorption probability times the
    stationary law of each reachable closed class), which coincides with the
    ordinary limit exactly when every reachable closed class is aperiodic.
    """

    values: tuple[Fraction, ...]
    exists: bool
    absorption: tuple[tuple[tuple[int, ...], Fraction], ...] = ()


def absorption_probabilities(x: MarkovChain, cls: StateClassification | None = None):
    """Probability that the chain started from ``initial`` ends in each closed class."""
    cls = cls or classify_states(x)
    closed = cls.ergodic_classes
    transient = cls.transient_states
    tpos = {t: i for i, t in enumerate(transient)}
    out = []
    if transient:
        a = [[(1 if i == j else 0) - x.matrix[s][t] for j, t in enumerate(transient)] for i, s in enumerate(transient)]
        b = [[sum((x.matrix[s][j] for j in c), Fraction(0)) for c in closed] for s in transient]
        hit = solve_exact(a, b)
    for k, c in enumerate(closed):
        p = sum((x.initial[i] for i in c), Fraction(0))
        for t in transient:
            if x.initial[t]:
                p += x.initial[t] * hit[tpos[t]][k]
        out.append((c, p))
    return out


def limiting_distribution(x: MarkovChain) -> LimitVector:
    cls = classify_states(x)
    values = [Fraction(0)] * x.n_states
    exists = True
    absorption = absorption_probabilities(x, cls)
    period = dict(zip(cls.sccs, cls.periods))
    for c, p in absorption:
        if p == 0:
            continue
        if period[c] != 1:
            exists = False
        pi = stationary_exact(x, c)
        for i, v in pi.items():
            values[i] = p * v
    return LimitVector(tuple(values), exists, tuple(absorption))


# --------------------------------------------------------------------------
# supports


def support_sequence(x: MarkovChain, cap: int = SUPPORT_CAP) -> tuple[int, list[frozenset[int]]]:
    """Eventually periodic sequence of supports of the n-step laws.

    Returns ``(preperiod, cycle)``: the support after ``n`` letters is the
    ``n``-th term of ``prefix + cycle + cycle + ...`` where the prefix has
    ``preperiod`` terms.
    """
    succ = [x.successors(i) for i in range(x.n_states)]
    cur = frozenset(i for i, p in enumerate(x.initial) if p)
    seen: dict[frozenset[int], int] = {}
    terms: list[frozenset[int]] = []
    while cur not in seen:
        if len(terms) >= cap:
            raise SupportCapExceeded(f"support sequence did not cycle within {cap} steps")
        seen[cur] = len(terms)
        terms.append(cur)
        cur = frozenset(w for v in cur for w in succ[v])
    start = seen[cur]
    return start, terms[start:]


def support_at(preperiod: int, cycle: Sequence[frozenset[int]], n: int) -> frozenset[int]:
    if n <= preperiod:
        raise ValueError("n inside the preperiod; use the explicit prefix")
    return cycle[(n - preperiod - 1) % len(cycle)]
