"""Tests for the free and sequential recall simulators."""

import numpy as np
import pytest

import fyhopfield as fh
from fyhopfield import PatternMemory, RecallConfig, RecallTrace


class TestMatchPattern:
    def test_best_match_is_one_based(self, identity3):
        matched, sim = fh.match_pattern([0.0, 2.0, 0.1], identity3)
        assert matched == 2
        assert sim == pytest.approx(2.0 / np.sqrt(4.01))

    def test_below_threshold(self, identity2):
        matched, sim = fh.match_pattern([1.0, 1.0], identity2)
        assert matched is None
        assert sim == pytest.approx(1 / np.sqrt(2))

    def test_zero_query(self, identity2):
        assert fh.match_pattern([0.0, 0.0], identity2) == (None, 0.0)


class TestEwma:
    def test_unit_decay_keeps_latest(self):
        np.testing.assert_array_equal(fh.ewma_update(np.ones(3), np.array([0.0, 1.0, 0.0]), 1.0),
                                      [0.0, 1.0, 0.0])

    def test_closed_form_matches_recursion(self):
        rng = np.random.default_rng(0)
        history = [rng.dirichlet(np.ones(4)) for _ in range(12)]
        a = np.zeros(4)
        for p in history:
            a = fh.ewma_update(a, p, 0.3)
        np.testing.assert_allclose(fh.ewma_closed_form(history, 0.3), a, atol=1e-12)

    def test_closed_form_needs_history(self):
        with pytest.raises(fh.DomainError):
            fh.ewma_closed_form([], 0.5)


class TestConstrainedRecall:
    def test_recalls_every_pattern(self, sphere64):
        cfg = RecallConfig(beta=0.1, inner_steps=5)
        trace = fh.free_recall_constrained(sphere64, sphere64.X[0], cfg)
        assert len(trace) == 64
        assert trace.algorithm == "constrained"
        fh.unique_ratio_at_least(trace, sphere64, 1.0)

    def test_distributions_respect_simplex(self, sphere64):
        trace = fh.free_recall_constrained(sphere64, sphere64.X[3], RecallConfig(inner_steps=2))
        for step in trace:
            fh.on_simplex(step.distribution)

    def test_single_pattern(self):
        mem = PatternMemory(np.array([[0.0, 3.0]]))
        trace = fh.free_recall_constrained(mem, [0.1, 1.0])
        assert trace.recalled == [1]
        assert not trace.exhausted

    def test_cue_shape(self, identity2):
        with pytest.raises(fh.DomainError, match="Cue"):
            fh.free_recall_constrained(identity2, [1.0, 0.0, 0.0])


class TestPenalizedRecall:
    def test_without_penalty_repeats_one_pattern(self, sphere64):
        cfg = RecallConfig(beta=0.1, penalty=0.0, inner_steps=5)
        trace = fh.free_recall_penalized(sphere64, sphere64.X[5], cfg)
        assert fh.unique_memory_ratio(trace, sphere64) == pytest.approx(1 / 64)

    def test_penalty_moves_on(self, sphere64):
        cfg = RecallConfig(beta=0.1, inner_steps=5)
        trace = fh.free_recall_penalized(sphere64, sphere64.X[5], cfg)
        assert trace.algorithm == "penalized"
        fh.unique_ratio_at_least(trace, sphere64, 2 / 64)


class TestSequentialRecall:
    def test_follows_the_chain(self, sequence16):
        cfg = RecallConfig(beta=10.0)
        trace = fh.sequential_recall(sequence16, sequence16.X[0], cfg)
        assert trace.recalled_indices == list(range(2, 17)) + [15]
        assert fh.unique_memory_ratio(trace, sequence16) == pytest.approx(15 / 16)
        coefficient = fh.levenshtein_coefficient(trace.recalled_indices, fh.successor_chain(16))
        assert coefficient == pytest.approx(1 - 1 / 15)

    def test_needs_two_patterns(self):
        with pytest.raises(fh.DomainError, match="at least 2"):
            fh.sequential_recall(PatternMemory(np.ones((1, 3))), np.ones(3))

    def test_trace_survives_disk(self, sequence16, tmp_path):
        trace = fh.sequential_recall(sequence16, sequence16.X[0], RecallConfig(beta=10.0))
        path = tmp_path / "seq.json"
        trace.save(path)
        loaded = RecallTrace.from_file(path)
        assert loaded.recalled == trace.recalled
        assert loaded.metadata["config"]["beta"] == 10.0


class TestMetrics:
    def test_levenshtein(self):
        assert fh.levenshtein_distance([1, 2, 3], [1, 3]) == 1
        assert fh.levenshtein_distance([], [4, 5]) == 2
        assert fh.levenshtein_distance([1, 2], [2, 1]) == 2

    def test_coefficient_can_go_negative(self):
        assert fh.levenshtein_coefficient([9, 9, 9, 9], [1, 2]) == pytest.approx(1 - 4 / 2)

    def test_successor_chain(self):
        assert fh.successor_chain(4) == [2, 3, 4]

    def test_rematching_with_threshold(self, identity2):
        trace = RecallTrace(algorithm="manual")
        trace.add_step(fh.RecallStep(1, [0.5, 0.5], None, 0.7, query=[1.0, 1.0]))
        assert fh.unique_memory_ratio(trace, identity2) == 0.0
        assert fh.unique_memory_ratio(trace, identity2, match_threshold=0.5) == 0.5

    def test_empty_trace(self, identity2):
        with pytest.raises(fh.DomainError, match="empty"):
            fh.unique_memory_ratio(RecallTrace(), identity2)
