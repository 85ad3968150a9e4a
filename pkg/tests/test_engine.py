import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import SQRT2, naive_improving, square
from twoopt_lab import gadgets
from twoopt_lab.engine import (MAX_STEPS, PivotKind, PivotRule, Termination, default_step_limit,
                               improving_moves, is_local_optimum, run)
from twoopt_lab.errors import ScriptViolation
from twoopt_lab.gadgets import GadgetScript
from twoopt_lab.geometry import Instance, Tour, TwoChange, tour_length
from twoopt_lab.heuristics import random_tour
from twoopt_lab.random_models import sample_uniform

CROSS = Tour((0, 2, 1, 3))
PERIM = Tour((0, 1, 2, 3))
RULES = [PivotRule.first(), PivotRule.best(), PivotRule.random(5)]


def test_pivot_rule_validation():
    with pytest.raises(ValueError):
        PivotRule(PivotKind.RANDOM_IMPROVEMENT)
    with pytest.raises(ValueError):
        PivotRule(PivotKind.SCRIPTED)
    assert PivotRule("best").kind is PivotKind.BEST_IMPROVEMENT


def test_step_limit_default():
    assert default_step_limit(10) == MAX_STEPS
    assert default_step_limit(10, 2.0) == 10 * 10**4 * 2
    assert default_step_limit(10, 0.5) == 10 * 10**4


class TestImprovingMoves:
    def test_square(self):
        moves = improving_moves(CROSS, square())
        assert len(moves) == 1
        assert moves[0][1] == pytest.approx(2 * SQRT2 - 2, abs=1e-15)
        assert improving_moves(PERIM, square()) == []
        assert is_local_optimum(PERIM, square()) and not is_local_optimum(CROSS, square())

    def test_gadget_flips_present(self):
        inst, t0, script = gadgets.build_euclidean_family(1)
        found = {frozenset(map(frozenset, c.removed)) for c, _ in improving_moves(t0, inst)}
        for mv in script.moves:
            c = TwoChange.of(*mv)
            assert frozenset(map(frozenset, c.removed)) in found

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10_000), st.integers(4, 14), st.sampled_from([0.0, 0.01]))
    def test_matches_naive_enumeration(self, seed, n, eps):
        inst = sample_uniform(n, 2, seed)
        t = random_tour(inst, seed)
        got = improving_moves(t, inst, eps)
        want = naive_improving(t, inst, eps)
        assert [c for c, _ in got] == [c for c, _ in want]
        assert [d for _, d in got] == [d for _, d in want]  # same formula, bit-identical


class TestRun:
    @pytest.mark.parametrize("rule", RULES)
    def test_square(self, rule):
        tr = run(square(), CROSS, rule)
        assert tr.step_count == 1 and tr.final_length == 4.0
        assert tr.terminated is Termination.LOCAL_OPT and tr.final_tour == PERIM

    def test_local_opt_start(self):
        tr = run(square(), PERIM, PivotRule.first())
        assert tr.step_count == 0 and tr.terminated is Termination.LOCAL_OPT
        assert tr.final_length == 4.0

    def test_scripted_gadget(self):
        inst, t0, script = gadgets.build_euclidean_family(3)
        tr = run(inst, t0, PivotRule.scripted(script))
        assert tr.step_count == 50 and tr.terminated is Termination.SCRIPT_END
        assert gadgets.block_states(tr.final_tour, 6) == "SSSSSS"

    def test_script_violation_carries_index(self):
        inst, t0, script = gadgets.build_euclidean_family(2)
        moves = script.moves.copy()
        moves[[3, 4]] = moves[[4, 3]]
        with pytest.raises(ScriptViolation) as e:
            run(inst, t0, PivotRule.scripted(GadgetScript(moves, script.expected_count)))
        assert e.value.step_index == 3

    def test_script_non_improving(self):
        inst = square()
        bad = GadgetScript(np.array([[0, 1, 2, 3]]), 1)
        with pytest.raises(ScriptViolation) as e:
            run(inst, PERIM, PivotRule.scripted(bad))
        assert e.value.step_index == 0 and e.value.delta < 0

    def test_step_limit(self):
        inst = sample_uniform(40, 2, 1)
        tr = run(inst, random_tour(inst, 1), PivotRule.first(), step_limit=5)
        assert tr.step_count == 5 and tr.terminated is Termination.STEP_LIMIT
        assert run(inst, random_tour(inst, 1), PivotRule.first(), 0).step_count == 0
        with pytest.raises(ValueError):
            run(inst, random_tour(inst, 1), PivotRule.first(), -1)

    @pytest.mark.parametrize("rule", RULES)
    @pytest.mark.parametrize("seed", range(6))
    def test_trace_invariants(self, rule, seed):
        inst = sample_uniform(25, 2, seed)
        start = random_tour(inst, seed)
        tr = run(inst, start, rule)
        assert tr.terminated is Termination.LOCAL_OPT
        assert np.all(tr.deltas > 0)
        lens = np.concatenate([[tr.initial_length], tr.lengths])
        assert np.all(np.diff(lens) < 0)
        assert tr.replay() == tr.final_tour
        assert is_local_optimum(tr.final_tour, inst)
        assert tr.final_length == tour_length(tr.final_tour, inst)
        for s in tr.steps:
            assert s.delta > 0 and s.length_after == tr.lengths[s.index]

    def test_best_takes_max_delta(self):
        inst = sample_uniform(15, 2, 3)
        t = random_tour(inst, 3)
        tr = run(inst, t, PivotRule.best(), step_limit=1)
        assert tr.deltas[0] == max(d for _, d in naive_improving(t, inst))

    def test_first_takes_first_in_scan_order(self):
        inst = sample_uniform(15, 2, 4)
        t = random_tour(inst, 4)
        tr = run(inst, t, PivotRule.first(), step_limit=1)
        first = naive_improving(t, inst)[0][0]
        assert TwoChange.of(*tr.edges[0]) == first

    def test_random_deterministic(self):
        inst = sample_uniform(30, 2, 2)
        t = random_tour(inst, 2)
        a = run(inst, t, PivotRule.random(9))
        b = run(inst, t, PivotRule.random(9))
        assert np.array_equal(a.edges, b.edges) and np.array_equal(a.deltas, b.deltas)

    def test_tour_size_mismatch(self):
        with pytest.raises(ValueError):
            run(square(), Tour((0, 1, 2)), PivotRule.first())

    def test_eps_threshold(self):
        inst = sample_uniform(30, 2, 8)
        t = random_tour(inst, 8)
        tr = run(inst, t, PivotRule.first(), eps=0.05)
        assert np.all(tr.deltas > 0.05)
        assert improving_moves(tr.final_tour, inst, 0.05) == []
