"""Conditional events: time-indexed and asymptotic probabilities, the
regular / strange / degenerate taxonomy, a Bayes cross-check and a Monte
Carlo sampler of the defining process."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .automata import MooreMachine, compile_conditional
from .chains import (
    Dist,
    MarkovChain,
    format_fraction,
    induce,
    limiting_distribution,
    step,
    support_sequence,
)
from .logic import TRUE, And, CondPair, Formula, ThreeVal

DEFAULT_WINDOW = 256
DEFAULT_MAX_PERIOD = 64
DEFAULT_MAX_PREPERIOD = 128

# pr_n is a Fraction, or None where the denominator vanishes
PrnValue = Optional[Fraction]


class EventClass(enum.Enum):
    REGULAR = "Regular"
    STRANGE = "Strange"
    DEGENERATE = "Degenerate"
    STRICTLY_DEGENERATE = "StrictlyDegenerate"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class CondEvent:
    source: Optional[CondPair]
    machine: MooreMachine
    dist: Dist
    chain: MarkovChain

    @classmethod
    def build(cls, c: CondPair, dist: Dist) -> "CondEvent":
        m = compile_conditional(c, dist.events)
        return cls(c, m, dist, induce(m, dist))

    @classmethod
    def from_machine(cls, m: MooreMachine, dist: Dist) -> "CondEvent":
        return cls(None, m, dist, induce(m, dist))


def _masses(x: MarkovChain, v: Sequence[Fraction]) -> tuple[Fraction, Fraction]:
    ones = Fraction(0)
    defined = Fraction(0)
    for p, h in zip(v, x.output):
        if h == ThreeVal.TRUE:
            ones += p
            defined += p
        elif h == ThreeVal.FALSE:
            defined += p
    return ones, defined


def pr_n_table(e: CondEvent, n_max: int) -> list[PrnValue]:
    """``[pr_1, ..., pr_{n_max}]`` computed exactly in one pass."""
    out: list[PrnValue] = []
    v = list(e.chain.initial)
    for n in range(1, n_max + 1):
        if n > 1:
            v = step(e.chain, v)
        ones, defined = _masses(e.chain, v)
        out.append(ones / defined if defined else None)
    return out


def pr_n(e: CondEvent, n: int) -> PrnValue:
    if n < 1:
        raise ValueError("n must be at least 1")
    return pr_n_table(e, n)[-1]


def pr_n_float(e: CondEvent, n: int) -> Optional[float]:
    from .chains import n_step_float

    v = n_step_float(e.chain, n)
    ones = sum(p for p, h in zip(v, e.chain.output) if h == ThreeVal.TRUE)
    defined = sum(p for p, h in zip(v, e.chain.output) if h != ThreeVal.UNDEF)
    return ones / defined if defined > 0 else None


def limit_masses(e: CondEvent) -> tuple[Fraction, Fraction]:
    """Limiting mass on output 1 and on outputs {0, 1}."""
    lim = limiting_distribution(e.chain)
    return _masses(e.chain, lim.values)


def classify_event(e: CondEvent) -> EventClass:
    _, defined = limit_masses(e)
    if defined > 0:
        return EventClass.REGULAR
    _, cycle = support_sequence(e.chain)
    out = e.chain.output
    dead = [not any(out[i] != ThreeVal.UNDEF for i in s) for s in cycle]
    if all(dead):
        return EventClass.STRICTLY_DEGENERATE
    if any(dead):
        return EventClass.DEGENERATE
    return EventClass.STRANGE


# --------------------------------------------------------------------------
# asymptotic probability


@dataclass(frozen=True)
class AsymptoticResult:
    """``verdict`` is one of ``Value``, ``ResidueLimits``, ``NoLimit``, ``Undetermined``.

    For ``NoLimit`` and ``ResidueLimits`` the clean residue pattern found is in
    ``period`` / ``residues`` (``residues[r]`` is the value at ``n % period == r``,
    ``None`` where never defined in the window).
    """

    verdict: str
    method: str
    value: Optional[Fraction] = None
    period: Optional[int] = None
    preperiod: Optional[int] = None
    residues: Optional[tuple[PrnValue, ...]] = None
    note: str = ""

    def to_json(self) -> dict:
        out: dict = {"verdict": self.verdict, "method": self.method}
        if self.value is not None:
            out["value"] = format_fraction(self.value)
        if self.period is not None:
            out["period"] = self.period
            out["preperiod"] = self.preperiod
        if self.residues is not None:
            out["residues"] = [format_fraction(r) if r is not None else "undef" for r in self.residues]
        if self.note:
            out["note"] = self.note
        return out

    def __str__(self) -> str:
        if self.verdict == "Value":
            return f"Value {format_fraction(self.value)}"
        if self.residues is not None:
            res = ", ".join(
                f"{r} mod {self.period} -> {format_fraction(v) if v is not None else 'undef'}"
                for r, v in enumerate(self.residues)
            )
            return f"{self.verdict}, residues [{res}]"
        return self.verdict + (f" ({self.note})" if self.note else "")


def find_residue_pattern(
    values: Sequence[PrnValue],
    max_period: int = DEFAULT_MAX_PERIOD,
    max_preperiod: int = DEFAULT_MAX_PREPERIOD,
):
    """Smallest period ``p`` such that, from some ``n0 <= max_preperiod`` on,
    the defined entries of ``values`` (``values[k]`` is pr_{k+1}) depend only
    on ``n mod p``.  Returns ``(p, n0, residues)`` or ``None``.
    """
    n_max = len(values)
    for p in range(1, max_period + 1):
        seen: dict[int, Fraction] = {}
        n0 = 1
        for n in range(n_max, 0, -1):
            v = values[n - 1]
            if v is None:
                continue
            r = n % p
            if r not in seen:
                seen[r] = v
            elif seen[r] != v:
                n0 = n + 1
                break
        # at least two full periods of evidence
        if n0 <= max_preperiod and n_max - n0 + 1 >= 2 * p and seen:
            residues = tuple(seen.get(r) for r in range(p))
            return p, n0, residues
    return None


def asymptotic_probability(
    e: CondEvent,
    window: int = DEFAULT_WINDOW,
    max_period: int = DEFAULT_MAX_PERIOD,
    max_preperiod: int = DEFAULT_MAX_PREPERIOD,
    cls: EventClass | None = None,
) -> AsymptoticResult:
    cls = cls or classify_event(e)
    if cls is EventClass.REGULAR:
        ones, defined = limit_masses(e)
        return AsymptoticResult("Value", "bayes-limit", value=ones / defined)
    if cls is EventClass.STRICTLY_DEGENERATE:
        return AsymptoticResult("Undetermined", "strange-heuristic", note="undefined cofinitely")
    values = pr_n_table(e, window)
    if all(v is None for v in values):
        return AsymptoticResult("Undetermined", "strange-heuristic", note="never defined in the window")
    found = find_residue_pattern(values, max_period, max_preperiod)
    if found is None:
        return AsymptoticResult("Undetermined", "strange-heuristic", note="no periodic pattern in the window")
    p, n0, residues = found
    defined = [r for r in residues if r is not None]
    if len(set(defined)) == 1:
        if cls is EventClass.DEGENERATE and len(defined) < len(residues):
            return AsymptoticResult(
                "ResidueLimits", "strange-heuristic", period=p, preperiod=n0 - 1, residues=residues,
                note="undefined infinitely often",
            )
        # period 1 is reported as a plain value
        return AsymptoticResult("Value", "strange-heuristic", value=defined[0], period=p, preperiod=n0 - 1)
    return AsymptoticResult("NoLimit", "strange-heuristic", period=p, preperiod=n0 - 1, residues=residues)


def pr_of_formula(f: Formula, d: Dist, **kw) -> AsymptoticResult:
    return asymptotic_probability(CondEvent.build(CondPair(f, TRUE), d), **kw)


@dataclass(frozen=True)
class BayesReport:
    lhs: AsymptoticResult
    rhs: Optional[Fraction]  # None when Pr(antecedent) is 0 or not a value
    equal: Optional[bool]

    def to_json(self) -> dict:
        return {
            "lhs": self.lhs.to_json(),
            "rhs": format_fraction(self.rhs) if self.rhs is not None else "undefined",
            "equal": self.equal,
        }

    def __str__(self) -> str:
        rhs = format_fraction(self.rhs) if self.rhs is not None else "undefined"
        eq = {True: "equal", False: "NOT equal", None: "right side undefined"}[self.equal]
        return f"lhs {self.lhs}; rhs {rhs}; {eq}"


def bayes_check(c: CondPair, d: Dist, **kw) -> BayesReport:
    lhs = asymptotic_probability(CondEvent.build(c, d), **kw)
    joint = pr_of_formula(And(c.consequent, c.antecedent), d)
    given = pr_of_formula(c.antecedent, d)
    if given.verdict != "Value" or not given.value or joint.verdict != "Value":
        return BayesReport(lhs, None, None)
    rhs = joint.value / given.value
    return BayesReport(lhs, rhs, lhs.verdict == "Value" and lhs.value == rhs)


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class SimulationResult:
    n: int
    samples: int
    seed: int
    counts: dict = field(default_factory=dict)  # ThreeVal -> int
    estimate: Optional[float] = None
    stderr: Optional[float] = None


def simulate_pr_n(e: CondEvent, n: int, samples: int, seed: int = 0) -> SimulationResult:
    """Sample ``samples`` words of length ``n`` with i.i.d. atoms and tally
    the conditional's value at the last letter."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rng = np.random.default_rng(seed)
    probs = np.array([float(p) for p in e.dist.prob])
    probs /= probs.sum()
    delta = np.array(e.machine.delta, dtype=np.int64)
    state = np.full(samples, e.machine.initial, dtype=np.int64)
    for _ in range(n):
        letters = rng.choice(len(probs), size=samples, p=probs)
        state = delta[state, letters]
    outputs = np.array([int(h) for h in e.machine.output])[state]
    counts = {h: int(np.count_nonzero(outputs == int(h))) for h in ThreeVal}
    ones, zeros = counts[ThreeVal.TRUE], counts[ThreeVal.FALSE]
    m = ones + zeros
    if m == 0:
        return SimulationResult(n, samples, seed, counts)
    est = ones / m
    return SimulationResult(n, samples, seed, counts, est, math.sqrt(est * (1 - est) / m))
