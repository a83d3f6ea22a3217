import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from condchain.logic import (
    FALSE,
    TRUE,
    CondPair,
    EventSet,
    EventSetError,
    FormulaSyntaxError,
    Hist,
    Not,
    Once,
    Or,
    Prev,
    Since,
    ThreeVal,
    Var,
    eval_conditional,
    eval_formula,
    expand,
    parse_conditional,
    parse_formula,
    parse_word,
    to_text,
    trace_conditional,
)

from .oracles import C1, C1_ANTECEDENT, all_words, brute_trace, holds, random_condpair, random_formula

AB = EventSet(["a", "b"])
U = ThreeVal.UNDEF


def w(text, events=AB):
    return parse_word(text, events)


class TestEventSet:
    def test_atoms_are_bitmasks(self):
        ev = EventSet(["a", "b", "c"])
        assert ev.atom(["a", "c"]) == 0b101
        assert ev.members(0b110) == ["b", "c"]
        assert ev.n_atoms == 8

    def test_cap(self):
        EventSet([f"e{i}" for i in range(16)])
        with pytest.raises(EventSetError):
            EventSet([f"e{i}" for i in range(17)])

    @pytest.mark.parametrize("names", [["a", "a"], ["1x"], ["S"], ["not"], [""]])
    def test_rejects_bad_names(self, names):
        with pytest.raises(EventSetError):
            EventSet(names)


class TestParser:
    def test_or_not(self):
        assert parse_formula("a or not b", AB) == Or(Var("a"), Not(Var("b")))

    def test_c1_antecedent_parses(self):
        f = parse_formula(C1_ANTECEDENT, EventSet(["a"]))
        assert isinstance(f, Hist)

    def test_incomplete_since(self):
        with pytest.raises(FormulaSyntaxError) as info:
            parse_formula("a S", AB)
        assert info.value.position == 3
        assert "end of input" in str(info.value)

    def test_unknown_event(self):
        with pytest.raises(FormulaSyntaxError, match="unknown event 'c'"):
            parse_formula("a or c", AB)

    def test_precedence(self):
        # unary > S > and > or > -> > <->
        assert parse_formula("not a S b", AB) == Since(Not(Var("a")), Var("b"))
        assert parse_formula("Y a S b S a", AB) == Since(Since(Prev(Var("a")), Var("b")), Var("a"))
        f = parse_formula("a or b and a S b <-> a -> b", AB)
        assert to_text(f) == "(a or (b and (a S b))) <-> (a -> b)"

    def test_bang_is_not(self):
        assert parse_formula("!a", AB) == Not(Var("a"))

    def test_conditional(self):
        assert parse_conditional("(a | b)", AB) == CondPair(Var("a"), Var("b"))
        assert parse_conditional("(a | true)", AB) == CondPair(Var("a"), TRUE)

    @pytest.mark.parametrize("text", ["(a | b | a)", "a | b", "(a b)", "(a | b", "(a |)", "(a | b) a"])
    def test_conditional_errors(self, text):
        with pytest.raises(FormulaSyntaxError):
            parse_conditional(text, AB)

    def test_one_bar_message(self):
        with pytest.raises(FormulaSyntaxError, match="only one"):
            parse_conditional("(a | b | a)", AB)

    def test_bar_inside_formula(self):
        with pytest.raises(FormulaSyntaxError):
            parse_formula("a | b", AB)

    @pytest.mark.parametrize(
        "text",
        [
            "a or not b",
            "(a and b and c and d) or (a and b and not d) or (c and d and not b)",
            "(not b S (a and b)) and (not d S (c and d))",
            "hist ((Y a -> not a) and (Y not a -> a))",
            "a -> b -> c",
            "(a -> b) -> c",
            "once Y (a S b)",
            "true or false",
        ],
    )
    def test_round_trip_canonical_text(self, text):
        ev = EventSet(["a", "b", "c", "d"])
        assert to_text(parse_formula(text, ev)) == text

    @given(st.integers(0, 10**9))
    @settings(max_examples=200)
    def test_parse_print_parse(self, seed):
        f = random_formula(random.Random(seed), ["a", "b", "c"], 5)
        assert parse_formula(to_text(f)) == f


class TestSemantics:
    def test_prev_at_first_position(self):
        assert eval_formula(parse_formula("Y a", AB), w("{a}"), AB) is False

    def test_since_witness(self):
        f = parse_formula("a S b", AB)
        assert eval_formula(f, w("{b} {a} {a}"), AB) is True
        assert eval_formula(f, w("{b} {} {a}"), AB) is False

    def test_since_base_case(self):
        f = parse_formula("a S b", AB)
        assert eval_formula(f, w("{b}"), AB) is True
        assert eval_formula(f, w("{a}"), AB) is False

    def test_cond_values(self):
        c = parse_conditional("(a | b)", AB)
        assert eval_conditional(c, w("{a b}"), AB) == ThreeVal.TRUE
        assert eval_conditional(c, w("{a b} {}"), AB) == U
        assert eval_conditional(c, w("{a b} {} {b}"), AB) == ThreeVal.FALSE

    def test_traces(self):
        c = parse_conditional("(a | b)", AB)
        assert trace_conditional(c, w("{a b} {} {b}"), AB) == [ThreeVal.TRUE, U, ThreeVal.FALSE]
        assert trace_conditional(parse_conditional("(a | true)", AB), w("{a} {}"), AB) == [
            ThreeVal.TRUE,
            ThreeVal.FALSE,
        ]

    def test_length_one_trace(self):
        c = parse_conditional("(a | Y b)", AB)
        assert trace_conditional(c, w("{a b}"), AB) == [eval_conditional(c, w("{a b}"), AB)]

    def test_c1_alternation(self):
        ev = EventSet(["a"])
        c = parse_conditional(C1, ev)
        # a holds at positions 1 and 3 only
        assert trace_conditional(c, parse_word("{a} {} {a}", ev), ev) == [ThreeVal.TRUE, ThreeVal.FALSE, ThreeVal.TRUE]
        assert trace_conditional(c, parse_word("{} {a}", ev), ev) == [U, U]
        assert trace_conditional(c, parse_word("{a} {a} {}", ev), ev) == [ThreeVal.TRUE, U, U]

    def test_empty_word_rejected(self):
        with pytest.raises(ValueError):
            eval_formula(Var("a"), (), AB)

    def test_since_recurrence_matches_definition(self):
        # all words up to length 6 over two events
        for f in [parse_formula(t, AB) for t in ("a S b", "(a S b) S Y a", "not a S (b and Y a)")]:
            for word in all_words(4, 6):
                assert eval_formula(f, word, AB) == holds(f, word, len(word) - 1, AB)

    def test_derived_operators_exhaustive(self):
        ev = EventSet(["a", "b", "c"])
        rng = random.Random(11)
        bodies = [random_formula(rng, ["a", "b", "c"], 2) for _ in range(6)] + [Var("a")]
        for body in bodies:
            once, hist = Once(body), Hist(body)
            once_via_since = Since(TRUE, body)
            hist_via_once = Not(Once(Not(body)))
            for word in all_words(8, 4):
                assert eval_formula(once, word, ev) == eval_formula(once_via_since, word, ev)
                assert eval_formula(hist, word, ev) == eval_formula(hist_via_once, word, ev)
                assert eval_formula(once, word, ev) == holds(once, word, len(word) - 1, ev)

    def test_false_since_collapses(self):
        # with an unsatisfiable left operand only t = s can witness
        f = Since(FALSE, Var("a"))
        for word in all_words(4, 4):
            assert eval_formula(f, word, AB) == eval_formula(Var("a"), word, AB)

    def test_present_tense_depends_on_last_letter(self):
        c = parse_conditional("(a | b)", AB)
        for word in all_words(4, 4):
            assert eval_conditional(c, word, AB) == eval_conditional(c, word[-1:], AB)


@given(st.integers(0, 10**9), st.lists(st.integers(0, 7), min_size=1, max_size=5), st.lists(st.integers(0, 7), max_size=4))
@settings(max_examples=200, deadline=None)
def test_prefix_monotone_and_matches_definition(seed, v, extra):
    ev = EventSet(["a", "b", "c"])
    c = random_condpair(random.Random(seed), ev, depth=3)
    tv = trace_conditional(c, v, ev)
    tvw = trace_conditional(c, v + extra, ev)
    assert tvw[: len(v)] == tv
    assert tvw == brute_trace(c, v + extra, ev)


@given(st.integers(0, 10**9))
@settings(max_examples=100)
def test_expansion_is_total_and_idempotent(seed):
    f = random_formula(random.Random(seed), ["a", "b"], 5)
    e = expand(f)
    assert expand(e) == e
    for word in list(product(range(4), repeat=3))[::3]:
        assert eval_formula(f, word, AB) == eval_formula(e, word, AB)
