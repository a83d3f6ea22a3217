import random
from fractions import Fraction as Fr

import numpy as np
import pytest

from condchain.automata import compile_conditional
from condchain.chains import (
    Dist,
    DistError,
    MarkovChain,
    SupportCapExceeded,
    absorption_probabilities,
    classify_states,
    induce,
    limiting_distribution,
    n_step_distribution,
    n_step_float,
    parse_dist,
    support_at,
    support_sequence,
)
from condchain.logic import EventSet, ThreeVal, parse_conditional

from .oracles import (
    PRISONERS,
    PRISONERS_EVENTS,
    prisoners_dist,
    prisoners_state_words,
    random_condpair,
    random_rational,
)

AB = EventSet(["a", "b"])
T, F, U = ThreeVal.TRUE, ThreeVal.FALSE, ThreeVal.UNDEF

ONE_TWO_TWO = MarkovChain(((Fr(0), Fr(1)), (Fr(0), Fr(1))), (Fr(1), Fr(0)), (U, T))
SWAP = MarkovChain(((Fr(0), Fr(1)), (Fr(1), Fr(0))), (Fr(1), Fr(0)), (T, F))


def ab_chain(pa, pb):
    m = compile_conditional(parse_conditional("(a | b)", AB), AB)
    return m, induce(m, Dist.independent(AB, {"a": pa, "b": pb}))


def state_with_output(m, h):
    return m.output.index(h)


class TestParseDist:
    def test_independent_product(self):
        d = parse_dist("events a b\nmode independent\na = 1/2\nb = 1/2\n")
        assert d.prob == (Fr(1, 4),) * 4

    def test_independent_marginals(self):
        d = parse_dist("a = 1/3  # comment\nb = 1/2", AB)
        assert d.marginal("a") == Fr(1, 3)
        assert d[AB.atom("ab")] == Fr(1, 6)

    def test_six_equiprobable_atoms(self):
        ev = EventSet.parse(PRISONERS_EVENTS)
        text = "mode atoms\n" + "\n".join(f"{{{p} {c}}} = 1/6" for p in ("AB", "BC", "AC") for c in ("H", "T"))
        d = parse_dist(text, ev)
        assert sum(1 for p in d.prob if p) == 6
        assert d.marginal("H") == Fr(1, 2)

    def test_atoms_unlisted_are_zero(self):
        d = parse_dist("events a b\nmode atoms\n{a b} = 1/4\n{} = 3/4\n")
        assert d[AB.atom("a")] == 0 and d[AB.atom("")] == Fr(3, 4)

    @pytest.mark.parametrize(
        "text",
        [
            "mode atoms\n{a} = 1/2\n{b} = 1/3\n",  # sums to 5/6
            "a = 3/2\nb = 1/2",
            "a = 1/2\nc = 1/2",
            "a = 1/2",
            "mode atoms\n{a c} = 1",
            "a = x",
            "a = 1/0\nb = 1",
            "mode sideways\na = 1\nb = 1",
            "events a c\na = 1\nc = 1",
        ],
    )
    def test_errors(self, text):
        with pytest.raises(DistError):
            parse_dist(text, AB)

    def test_round_trip_text(self):
        d = Dist.independent(AB, {"a": Fr(1, 3), "b": Fr(2, 7)})
        assert parse_dist(d.to_text()) == d
        assert parse_dist(d.to_text()).digest() == d.digest()


class TestInduce:
    def test_ab_chain_edge_weights(self):
        m, x = ab_chain(Fr(1, 3), Fr(1, 2))
        one, zero, bot = (state_with_output(m, h) for h in (T, F, U))
        for q in range(3):
            assert x.matrix[q][one] == Fr(1, 6)
            assert x.matrix[q][zero] == Fr(1, 3)
            assert x.matrix[q][bot] == Fr(1, 2)
        assert x.initial[one] == Fr(1, 6)

    def test_point_mass_is_deterministic(self):
        rng = random.Random(2)
        for _ in range(10):
            c = random_condpair(rng, AB, 3)
            m = compile_conditional(c, AB)
            x = induce(m, Dist.from_atoms(AB, {rng.randrange(4): 1}))
            assert all(p in (0, 1) for row in x.matrix for p in row)

    def test_rows_sum_to_one_exactly(self):
        rng = random.Random(4)
        ev = EventSet(["a", "b", "c"])
        for _ in range(20):
            m = compile_conditional(random_condpair(rng, ev, 4), ev)
            d = Dist.independent(ev, {e: random_rational(rng, 0, 10) for e in ev})
            x = induce(m, d)
            assert all(sum(row) == 1 for row in x.matrix)
            assert sum(x.initial) == 1

    def test_prisoners_matrix_entries(self):
        ev = EventSet.parse(PRISONERS_EVENTS)
        m = compile_conditional(parse_conditional(PRISONERS, ev), ev)
        ab, bc, ac, h = Fr(1, 2), Fr(1, 3), Fr(1, 6), Fr(1, 4)
        x = induce(m, prisoners_dist(ev, ab, bc, ac, h))
        states = [m.run(w) for w in prisoners_state_words(ev)]
        pardon = (ab, bc, ac)
        coin = {"H": h, "T": 1 - h}

        def kind(last, c):
            # output of the next state: 1 after AB, 0 after BC with heads, else ⊥
            return 0 if last == 0 else 1 if last == 1 and c == "H" else 2

        for i, s in enumerate(states):
            expected = [Fr(0)] * 9
            for new in range(3):
                for c, pc in coin.items():
                    expected[3 * new + kind(i // 3, c)] += pardon[new] * pc
            assert [x.matrix[s][t] for t in states] == expected


class TestNStep:
    def test_first_step_is_initial(self):
        _, x = ab_chain(Fr(1, 3), Fr(1, 2))
        assert n_step_distribution(x, 1) == list(x.initial)

    def test_ab_chain_mass_on_one(self):
        m, x = ab_chain(Fr(1, 3), Fr(1, 2))
        one = state_with_output(m, T)
        for n in range(1, 12):
            v = n_step_distribution(x, n)
            assert v[one] == Fr(1, 6)
            assert sum(v) == 1

    def test_one_two_two(self):
        assert n_step_distribution(ONE_TWO_TWO, 3) == [0, 1]

    def test_float_path_agrees(self):
        _, x = ab_chain(Fr(2, 7), Fr(3, 5))
        assert np.allclose(n_step_float(x, 9), [float(p) for p in n_step_distribution(x, 9)])

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            n_step_distribution(ONE_TWO_TWO, 0)


class TestClassify:
    def test_ab_chain_all_positive(self):
        _, x = ab_chain(Fr(1, 3), Fr(1, 2))
        cls = classify_states(x)
        assert cls.ergodic_classes == [(0, 1, 2)]
        assert cls.periods == (1,)

    def test_ab_chain_b_certain(self):
        m, x = ab_chain(Fr(1, 3), Fr(1))
        cls = classify_states(x)
        assert cls.ergodic_classes == [tuple(sorted((state_with_output(m, T), state_with_output(m, F))))]
        assert cls.transient_states == [state_with_output(m, U)]
        assert cls.periods[cls.sccs.index(cls.ergodic_classes[0])] == 1

    def test_swap_has_period_two(self):
        cls = classify_states(SWAP)
        assert cls.ergodic_classes == [(0, 1)]
        assert cls.periods == (2,)

    def test_period_three_with_chord(self):
        # cycle 0->1->2->0 plus 0->0 becomes aperiodic
        h = Fr(1, 2)
        cyc = ((0, 1, 0), (0, 0, 1), (1, 0, 0))
        x = MarkovChain(tuple(tuple(Fr(p) for p in r) for r in cyc), (Fr(1), Fr(0), Fr(0)), (U, U, U))
        assert classify_states(x).periods == (3,)
        chord = ((h, h, 0), (0, 0, 1), (1, 0, 0))
        x = MarkovChain(tuple(tuple(Fr(p) for p in r) for r in chord), (Fr(1), Fr(0), Fr(0)), (U, U, U))
        assert classify_states(x).periods == (1,)

    def test_compiled_machines_are_aperiodic(self):
        # counter-free machine + strictly positive distribution
        rng = random.Random(17)
        ev = EventSet(["a", "b"])
        for _ in range(60):
            m = compile_conditional(random_condpair(rng, ev, 4), ev)
            d = Dist.independent(ev, {e: random_rational(rng) for e in ev})
            cls = classify_states(induce(m, d))
            assert all(cls.periods[k] == 1 for k, e in enumerate(cls.ergodic) if e)


class TestLimits:
    def test_one_two_two(self):
        lim = limiting_distribution(ONE_TWO_TWO)
        assert lim.exists and lim.values == (0, 1)

    def test_swap_has_no_limit(self):
        assert not limiting_distribution(SWAP).exists

    def test_unreachable_periodic_class_is_harmless(self):
        # the swap pair is never entered
        rows = ((1, 0, 0), (0, 0, 1), (0, 1, 0))
        x = MarkovChain(tuple(tuple(Fr(p) for p in r) for r in rows), (Fr(1), Fr(0), Fr(0)), (T, F, U))
        lim = limiting_distribution(x)
        assert lim.exists and lim.values == (1, 0, 0)

    def test_prisoners_limits(self):
        ev = EventSet.parse(PRISONERS_EVENTS)
        m = compile_conditional(parse_conditional(PRISONERS, ev), ev)
        states = [m.run(w) for w in prisoners_state_words(ev)]
        rng = random.Random(9)
        for _ in range(5):
            raw = [Fr(rng.randint(1, 9)) for _ in range(3)]
            ab, bc, ac = (r / sum(raw) for r in raw)
            h = random_rational(rng)
            x = induce(m, prisoners_dist(ev, ab, bc, ac, h))
            lim = limiting_distribution(x)
            assert lim.exists
            expected = [
                ab * ab, ab * bc * h, ab * (1 - ab - bc * h),
                bc * ab, bc * bc * h, bc * (1 - ab - bc * h),
                ac * ab, ac * bc * h, ac * (1 - ab - bc * h),
            ]  # fmt: skip
            assert [lim.values[s] for s in states] == expected
            assert sum(lim.values) == 1

    def test_absorption_sums_to_one(self):
        rng = random.Random(31)
        ev = EventSet(["a", "b"])
        for _ in range(30):
            m = compile_conditional(random_condpair(rng, ev, 4), ev)
            d = Dist.independent(ev, {e: random_rational(rng, 0, 10) for e in ev})
            assert sum(p for _, p in absorption_probabilities(induce(m, d))) == 1

    def test_float_convergence(self):
        rng = random.Random(12)
        ev = EventSet(["a", "b"])
        for _ in range(20):
            m = compile_conditional(random_condpair(rng, ev, 4), ev)
            x = induce(m, Dist.independent(ev, {e: random_rational(rng) for e in ev}))
            lim = limiting_distribution(x)
            assert lim.exists
            gap = np.max(np.abs(n_step_float(x, 4096) - np.array([float(v) for v in lim.values])))
            assert gap < 1e-6


class TestSupport:
    def test_one_two_two(self):
        assert support_sequence(ONE_TWO_TWO) == (1, [frozenset({1})])

    def test_ab_chain_full_cycle(self):
        _, x = ab_chain(Fr(1, 3), Fr(1, 2))
        pre, cycle = support_sequence(x)
        assert cycle == [frozenset({0, 1, 2})]
        assert support_at(pre, cycle, 50) == frozenset({0, 1, 2})

    def test_swap(self):
        assert support_sequence(SWAP) == (0, [frozenset({0}), frozenset({1})])

    def test_false_antecedent_never_defined(self):
        m = compile_conditional(parse_conditional("(a | false)", AB), AB)
        x = induce(m, Dist.independent(AB, {"a": Fr(1, 2), "b": Fr(1, 2)}))
        pre, cycle = support_sequence(x)
        for s in cycle:
            assert all(x.output[i] == U for i in s)

    def test_matches_n_step_support(self):
        rng = random.Random(6)
        ev = EventSet(["a", "b"])
        for _ in range(15):
            m = compile_conditional(random_condpair(rng, ev, 4), ev)
            d = Dist.from_atoms(ev, {0: Fr(1, 2), 3: Fr(1, 2)})
            x = induce(m, d)
            pre, cycle = support_sequence(x)
            for n in range(pre + 1, pre + 10):
                v = n_step_distribution(x, n)
                assert support_at(pre, cycle, n) == frozenset(i for i, p in enumerate(v) if p)

    def test_cap(self):
        with pytest.raises(SupportCapExceeded):
            support_sequence(SWAP, cap=1)
