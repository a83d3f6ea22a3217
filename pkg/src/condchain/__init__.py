"""Conditional events as stochastic processes.

Compile (TL|TL) conditionals into three-valued Moore machines, induce Markov
chains from atom distributions, and compute exact conditional probabilities.
"""
from .automata import (
    MooreMachine,
    TruthTable3,
    compile_conditional,
    is_counter_free,
    minimize,
    product_with_table,
)
from .chains import Dist, MarkovChain, induce, limiting_distribution, n_step_distribution, parse_dist
from .logic import CondPair, EventSet, ThreeVal, parse_conditional, parse_formula, trace_conditional
from .probability import (
    CondEvent,
    EventClass,
    asymptotic_probability,
    bayes_check,
    classify_event,
    pr_n,
    pr_of_formula,
    simulate_pr_n,
)

__version__ = "0.1.0"
