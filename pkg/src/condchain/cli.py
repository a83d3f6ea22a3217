"""Command-line interface.

Exit codes: 0 success, 2 input syntax or usage, 3 distribution validation,
4 internal cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import automata, chains, connectives, logic, probability
from .automata import MonoidTooLarge, MooreMachine
from .chains import DistError, SupportCapExceeded, format_fraction
from .logic import EventSet, EventSetError, FormulaSyntaxError

EXIT_OK, EXIT_SYNTAX, EXIT_DIST, EXIT_CAP = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _fmt_prn(v) -> str:
    return "undef" if v is None else format_fraction(v)


def _fmt_float(x: float) -> str:
    return f"{x:.12g}"


# --------------------------------------------------------------------------
# input handling


def _events(args, required=True) -> EventSet | None:
    declared = None
    if args.events:
        try:
            declared = EventSet.parse(args.events)
        except EventSetError as exc:
            raise CliError(str(exc), EXIT_SYNTAX)
    if getattr(args, "dist", None):
        dist = _load_dist(args, declared)
        return dist.events
    if declared is None and required:
        raise CliError("declare events with -e/--events or give a dist file with -d", EXIT_SYNTAX)
    return declared


def _load_dist(args, events: EventSet | None = None) -> chains.Dist:
    try:
        text = Path(args.dist).read_text()
    except OSError as exc:
        raise CliError(f"cannot read dist file: {exc}", EXIT_DIST)
    try:
        return chains.parse_dist(text, events)
    except (DistError, EventSetError) as exc:
        raise CliError(f"invalid distribution: {exc}", EXIT_DIST)


def _dist(args) -> chains.Dist:
    if not args.dist:
        raise CliError("this command needs a distribution file (-d)", EXIT_SYNTAX)
    declared = EventSet.parse(args.events) if args.events else None
    return _load_dist(args, declared)


def _cond(text: str, events: EventSet) -> logic.CondPair:
    try:
        return logic.parse_conditional(text, events)
    except FormulaSyntaxError as exc:
        raise CliError(f"syntax error: {exc.message} at position {exc.position}\n  {text}\n  {' ' * exc.position}^", EXIT_SYNTAX)


def _machine(args, events_required=True) -> MooreMachine:
    if getattr(args, "machine", None):
        try:
            return MooreMachine.from_json(json.loads(Path(args.machine).read_text()))
        except (OSError, ValueError, KeyError) as exc:
            raise CliError(f"cannot load machine: {exc}", EXIT_SYNTAX)
    if not args.conditional:
        raise CliError("give a conditional or --machine FILE", EXIT_SYNTAX)
    events = _events(args)
    return automata.compile_conditional(_cond(args.conditional, events), events)


def _emit_machine(m: MooreMachine, fmt: str) -> str:
    if fmt == "dot":
        return m.to_dot()
    if fmt == "json":
        return automata.dumps(m) + "\n"
    lines = [f"states: {m.n_states}, initial: {m.initial}"]
    for q in range(m.n_states):
        groups: dict[int, list[int]] = {}
        for a, r in enumerate(m.delta[q]):
            groups.setdefault(r, []).append(a)
        edges = "; ".join(
            f"{' '.join(m.events.format_atom(a) for a in atoms)} -> {r}" for r, atoms in groups.items()
        )
        lines.append(f"  {q} [{m.output[q]}]: {edges}")
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# subcommands


def cmd_parse(args) -> str:
    events = _events(args)
    text = args.text.strip()
    try:
        if "|" in text:
            c = logic.parse_conditional(text, events)
            expanded = logic.CondPair(logic.expand(c.consequent), logic.expand(c.antecedent))
            return f"{c}\nexpanded: {expanded}\n"
        f = logic.parse_formula(text, events)
    except FormulaSyntaxError as exc:
        raise CliError(f"syntax error: {exc.message} at position {exc.position}", EXIT_SYNTAX)
    return f"{f}\nexpanded: {logic.expand(f)}\n"


def cmd_compile(args) -> str:
    events = _events(args)
    m = automata.compile_conditional(_cond(args.conditional, events), events)
    return _emit_machine(m, args.format)


def cmd_minimize(args) -> str:
    m = _machine(args)
    return _emit_machine(automata.minimize(m), args.format)


def cmd_counterfree(args) -> str:
    m = _machine(args)
    free = automata.is_counter_free(m)
    out = {"counter_free": free, "states": m.n_states}
    if not free:
        word, cycle = automata.counter_witness(m)
        out["witness_word"] = [sorted(m.events.members(a)) for a in word]
        out["witness_cycle"] = cycle
    if args.format == "json":
        return json.dumps(out) + "\n"
    text = f"counter-free: {'true' if free else 'false'}\n"
    if not free:
        text += f"witness: {logic.format_word(word, m.events)} cycles states {cycle}\n"
    return text


def _word(args, events):
    try:
        return logic.parse_word(args.word, events)
    except (ValueError, EventSetError) as exc:
        raise CliError(f"bad word: {exc}", EXIT_SYNTAX)


def cmd_eval(args) -> str:
    events = _events(args)
    c = _cond(args.conditional, events)
    return f"{logic.eval_conditional(c, _word(args, events), events)}\n"


def cmd_trace(args) -> str:
    events = _events(args)
    c = _cond(args.conditional, events)
    tr = logic.trace_conditional(c, _word(args, events), events)
    return " ".join(str(v) for v in tr) + "\n"


def _event(args) -> probability.CondEvent:
    dist = _dist(args)
    c = _cond(args.conditional, dist.events)
    return probability.CondEvent.build(c, dist)


def _heuristic_kw(args) -> dict:
    return {"window": args.window, "max_period": args.max_period}


def _summary(cls, res) -> str:
    if res.verdict == "NoLimit" and res.period == 2:
        ev, od = res.residues
        return f"{cls}, NoLimit, residues [even→{_fmt_prn(ev)}, odd→{_fmt_prn(od)}]"
    return f"{cls}, {res}"


def cmd_prob(args) -> str:
    e = _event(args)
    cls = probability.classify_event(e)
    res = probability.asymptotic_probability(e, cls=cls, **_heuristic_kw(args))
    bayes = probability.bayes_check(e.source, e.dist, **_heuristic_kw(args))
    table = probability.pr_n_table(e, args.table_n)
    if args.format == "json":
        report = {
            "formula": str(e.source),
            "dist_digest": e.dist.digest(),
            "class": str(cls),
            "asymptotic": res.to_json(),
            "pr_n_table": [[n, _fmt_prn(v)] for n, v in enumerate(table, 1)],
            "bayes": bayes.to_json(),
        }
        return json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    lines = [
        _summary(cls, res),
        f"class: {cls}",
        f"asymptotic: {res} (method {res.method})",
        f"bayes: {bayes}",
        "n\tpr_n",
    ]
    lines += [f"{n}\t{_fmt_prn(v)}" for n, v in enumerate(table, 1)]
    return "\n".join(lines) + "\n"


def cmd_prn(args) -> str:
    e = _event(args)
    if args.n is not None:
        return f"{_fmt_prn(probability.pr_n(e, args.n))}\n"
    table = probability.pr_n_table(e, args.table_n)
    if args.format == "json":
        return json.dumps([[n, _fmt_prn(v)] for n, v in enumerate(table, 1)]) + "\n"
    return "n\tpr_n\n" + "".join(f"{n}\t{_fmt_prn(v)}\n" for n, v in enumerate(table, 1))


def cmd_classify(args) -> str:
    return f"{probability.classify_event(_event(args))}\n"


def cmd_simulate(args) -> str:
    if args.samples < 1:
        raise CliError("--samples must be at least 1", EXIT_SYNTAX)
    n = args.n if args.n is not None else 10
    if n < 1:
        raise CliError("--n must be at least 1", EXIT_SYNTAX)
    e = _event(args)
    sim = probability.simulate_pr_n(e, n, args.samples, args.seed)
    exact = probability.pr_n(e, n)
    counts = {str(k): v for k, v in sim.counts.items()}
    if args.format == "json":
        out = {
            "n": n, "samples": args.samples, "seed": args.seed, "counts": counts,
            "estimate": None if sim.estimate is None else _fmt_float(sim.estimate),
            "stderr": None if sim.stderr is None else _fmt_float(sim.stderr),
            "exact": _fmt_prn(exact),
        }
        return json.dumps(out, ensure_ascii=False) + "\n"
    lines = [f"n={n} samples={args.samples} seed={args.seed}",
             "counts: " + " ".join(f"{k}:{v}" for k, v in counts.items())]
    if sim.estimate is None:
        lines.append("all samples undefined")
    else:
        lines.append(f"estimate: {_fmt_float(sim.estimate)}")
        lines.append(f"stderr: {_fmt_float(sim.stderr)}")
    lines.append(f"exact: {_fmt_prn(exact)}")
    if sim.estimate is not None and exact is not None:
        z = (sim.estimate - float(exact)) / sim.stderr if sim.stderr else 0.0
        lines.append(f"z: {_fmt_float(z)}")
    return "\n".join(lines) + "\n"


def cmd_connect(args) -> str:
    if args.op not in connectives.OP_NAMES:
        raise CliError(f"unknown connective {args.op!r}; expected one of {', '.join(connectives.OP_NAMES)}", EXIT_SYNTAX)
    events = _events(args, required=False)
    conds = [_cond(t, events) for t in args.conditionals]
    arity = 1 if args.op == "neg" else 2
    if len(conds) != arity:
        raise CliError(f"{args.op} takes {arity} conditional(s)", EXIT_SYNTAX)
    result = connectives.reduce(args.op, *conds)
    out = f"{result}\n"
    if args.compile:
        if events is None:
            raise CliError("--compile needs -e/--events", EXIT_SYNTAX)
        out += _emit_machine(automata.compile_conditional(result, events), args.format)
    return out


def cmd_export(args) -> str:
    e = _event(args)
    data = {
        "formula": str(e.source),
        "dist_digest": e.dist.digest(),
        "machine": e.machine.to_json(),
        "chain": e.chain.to_json(),
    }
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-e", "--events", help='event names, e.g. "a b c"')
    common.add_argument("-d", "--dist", help="distribution file")
    common.add_argument("--format", choices=("text", "json", "dot"), default="text")
    common.add_argument("--window", type=int, default=probability.DEFAULT_WINDOW,
                        help="pr_n horizon for the strange-event heuristic")
    common.add_argument("--max-period", type=int, default=probability.DEFAULT_MAX_PERIOD)
    common.add_argument("--table-n", type=int, default=20)
    common.add_argument("--n", type=int, default=None)
    common.add_argument("--samples", type=int, default=100000)
    common.add_argument("--seed", type=int, default=0)

    p = argparse.ArgumentParser(prog="condchain", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    add("parse", cmd_parse, "parse and pretty-print a formula or conditional").add_argument("text")
    add("compile", cmd_compile, "compile a conditional to a minimal Moore machine").add_argument("conditional")
    for name, fn, help_ in (("minimize", cmd_minimize, "minimize a machine"),
                            ("counterfree", cmd_counterfree, "check counter-freeness")):
        sp = add(name, fn, help_)
        sp.add_argument("conditional", nargs="?")
        sp.add_argument("--machine", help="machine JSON file instead of a conditional")
    for name, fn, help_ in (("eval", cmd_eval, "value of a conditional on a word"),
                            ("trace", cmd_trace, "values on every prefix of a word")):
        sp = add(name, fn, help_)
        sp.add_argument("conditional")
        sp.add_argument("word", help='e.g. "{a b} {} {b}"')
    for name, fn, help_ in (("prob", cmd_prob, "full probability report"),
                            ("prn", cmd_prn, "exact pr_n"),
                            ("classify", cmd_classify, "regular/strange/degenerate class"),
                            ("simulate", cmd_simulate, "Monte Carlo estimate of pr_n"),
                            ("export", cmd_export, "machine and chain as JSON")):
        add(name, fn, help_).add_argument("conditional")
    sp = add("connect", cmd_connect, "apply a connective to conditionals")
    sp.add_argument("op")
    sp.add_argument("conditionals", nargs="+")
    sp.add_argument("--compile", action="store_true", help="also print the compiled machine")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except FormulaSyntaxError as exc:
        print(f"error: syntax error: {exc}", file=sys.stderr)
        return EXIT_SYNTAX
    except EventSetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SYNTAX
    except (MonoidTooLarge, SupportCapExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    sys.stdout.write(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
