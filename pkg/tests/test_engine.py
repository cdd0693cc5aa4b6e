import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from toxsteer import (CalibrationConfig, ContractViolation, MockBackend,
                      LexiconScorer, SamplerConfig, Vocabulary,
                      calibrate_scores, compute_lambda, generate_interpretation,
                      renormalize, select_token)
from toxsteer.engine import nucleus_support
from toxsteer.session import DecodeSession

from conftest import make_sampler


class TestCalibrateScores:
    def test_lambda_zero_is_identity(self):
        scores = np.array([-0.5, -1.0, 0.3])
        tox = np.array([0.9, 0.1, 0.5])
        out = calibrate_scores(scores, tox, 0.1, 0.9, 0.0)
        assert np.array_equal(out, scores)

    def test_equal_toxicity_returns_unchanged(self):
        scores = np.array([-0.5, -1.0])
        tox = np.array([0.9, 0.1])
        out = calibrate_scores(scores, tox, 0.5, 0.5, 1.0, tolerance=0.0)
        assert np.array_equal(out, scores)

    def test_additive_branch(self):
        out = calibrate_scores(np.array([-0.5, -1.0]), np.array([0.9, 0.1]),
                               prefix_toxicity=0.1, target_toxicity=0.5, lam=1.0)
        assert out == pytest.approx([0.4, -0.9])

    def test_subtractive_branch(self):
        out = calibrate_scores(np.array([-0.5, -1.0]), np.array([0.9, 0.1]),
                               prefix_toxicity=0.8, target_toxicity=0.5, lam=1.0)
        assert out == pytest.approx([-1.4, -1.1])

    def test_tolerance_band_suppresses_calibration(self):
        scores = np.array([-0.5, -1.0])
        tox = np.array([0.9, 0.1])
        out = calibrate_scores(scores, tox, 0.500001, 0.5, 1.0, tolerance=1e-3)
        assert np.array_equal(out, scores)

    def test_does_not_mutate_input(self):
        scores = np.array([-0.5, -1.0])
        calibrate_scores(scores, np.array([0.9, 0.1]), 0.1, 0.5, 1.0)
        assert scores.tolist() == [-0.5, -1.0]

    def test_length_mismatch_rejected(self):
        with pytest.raises(ContractViolation):
            calibrate_scores(np.zeros(3), np.zeros(2), 0.1, 0.5, 1.0)

    def test_non_finite_rejected(self):
        with pytest.raises(ContractViolation):
            calibrate_scores(np.array([np.nan, 0.0]), np.zeros(2), 0.1, 0.5, 1.0)
        with pytest.raises(ContractViolation):
            calibrate_scores(np.zeros(2), np.array([np.inf, 0.0]), 0.1, 0.5, 1.0)
        with pytest.raises(ContractViolation):
            calibrate_scores(np.zeros(2), np.zeros(2), 0.1, 0.5, math.inf)

    def test_directional_monotonicity(self):
        # equal base scores: more toxic token must win under the boost branch
        scores = np.zeros(4)
        tox = np.array([0.1, 0.4, 0.7, 0.95])
        up = calibrate_scores(scores, tox, 0.0, 0.9, 0.5)
        assert np.all(np.diff(up) > 0)
        down = calibrate_scores(scores, tox, 0.9, 0.1, 0.5)
        assert np.all(np.diff(down) < 0)


class TestComputeLambda:
    def test_adaptive_from_target(self):
        config = CalibrationConfig(objective1=True, objective2=True)
        assert compute_lambda(config, 0.04) == pytest.approx(0.25)

    def test_defaults_to_one(self):
        assert compute_lambda(CalibrationConfig(), 0.3) == 1.0

    def test_fixed_lambda(self):
        config = CalibrationConfig(objective1=True, fixed_lambda=0.75)
        assert compute_lambda(config, 0.3) == 0.75

    def test_epsilon_floor(self):
        config = CalibrationConfig(objective1=True, objective2=True)
        assert compute_lambda(config, 0.0) == pytest.approx(10.0)

    @given(st.tuples(st.floats(1e-3, 1.0), st.floats(1e-3, 1.0)))
    def test_strictly_decreasing_in_target(self, pair):
        lo, hi = sorted(pair)
        if lo == hi:
            return
        config = CalibrationConfig(objective1=True, objective2=True)
        assert compute_lambda(config, lo) > compute_lambda(config, hi)

    def test_objective2_requires_objective1(self):
        with pytest.raises(ContractViolation):
            CalibrationConfig(objective1=False, objective2=True)

    def test_objective2_excludes_fixed_lambda(self):
        with pytest.raises(ContractViolation):
            CalibrationConfig(objective1=True, objective2=True, fixed_lambda=0.5)


class TestRenormalize:
    def test_uniform_on_equal_scores(self):
        out = renormalize(np.full(5, -2.3))
        assert out == pytest.approx(np.full(5, 0.2))

    def test_two_zeros(self):
        assert renormalize(np.zeros(2)) == pytest.approx([0.5, 0.5])

    def test_reference_softmax_values(self):
        # frozen from a 50-digit mpmath evaluation of softmax(1, 0, -1)
        out = renormalize(np.array([1.0, 0.0, -1.0]))
        expected = [0.66524095577482190, 0.24472847105479767, 0.09003057317038046]
        assert out == pytest.approx(expected, abs=1e-15)

    def test_overflow_guard(self):
        out = renormalize(np.array([1000.0, 999.0, -1000.0]))
        assert np.all(np.isfinite(out))
        assert out.sum() == pytest.approx(1.0, abs=1e-9)

    def test_nan_rejected(self):
        with pytest.raises(ContractViolation):
            renormalize(np.array([0.0, np.nan]))

    def test_order_preserved(self):
        scores = np.array([0.3, -1.2, 2.0, 0.1])
        assert int(np.argmax(renormalize(scores))) == int(np.argmax(scores))

    @settings(max_examples=200)
    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=40))
    def test_sums_to_one(self, values):
        out = renormalize(np.array(values))
        assert abs(float(out.sum()) - 1.0) < 1e-9
        assert np.all(out >= 0)


class TestSelectToken:
    def test_greedy_argmax(self):
        probs = np.array([0.1, 0.7, 0.2])
        assert select_token(probs, SamplerConfig(mode="greedy")) == 1

    def test_greedy_tie_takes_lowest_index(self):
        probs = np.array([0.4, 0.4, 0.2])
        assert select_token(probs, SamplerConfig(mode="greedy")) == 0

    def test_nucleus_support_cutoff(self):
        support = nucleus_support(np.array([0.5, 0.45, 0.05]), 0.9)
        assert sorted(support.tolist()) == [0, 1]

    def test_nucleus_p_one_keeps_everything(self):
        support = nucleus_support(np.array([0.5, 0.3, 0.15, 0.05]), 1.0)
        assert sorted(support.tolist()) == [0, 1, 2, 3]

    def test_nucleus_sampling_stays_in_support(self):
        probs = np.array([0.5, 0.45, 0.05])
        rng = np.random.default_rng(0)
        sampler = SamplerConfig(mode="nucleus", nucleus_p=0.9)
        draws = {select_token(probs, sampler, rng) for _ in range(200)}
        assert draws <= {0, 1}
        assert len(draws) == 2

    def test_same_seed_same_choice(self):
        probs = np.array([0.3, 0.3, 0.4])
        sampler = SamplerConfig(mode="nucleus", nucleus_p=1.0, rng_seed=42)
        assert select_token(probs, sampler) == select_token(probs, sampler)

    def test_nucleus_with_tiny_p_equals_greedy(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            probs = rng.dirichlet(np.ones(6))
            sampler = SamplerConfig(mode="nucleus", nucleus_p=1e-12)
            nuc = select_token(probs, sampler, np.random.default_rng(1))
            greedy = select_token(probs, SamplerConfig(mode="greedy"))
            assert nuc == greedy

    def test_sampler_validation(self):
        with pytest.raises(ContractViolation):
            SamplerConfig(mode="beam")
        with pytest.raises(ContractViolation):
            SamplerConfig(mode="nucleus", nucleus_p=0.0)
        with pytest.raises(ContractViolation):
            SamplerConfig(mode="nucleus", nucleus_p=1.5)


def _session(target, calibration=None, sampler=None, **kwargs):
    return DecodeSession(sentence="x",
                         base_target_toxicity=target,
                         current_target_toxicity=target,
                         calibration=calibration or CalibrationConfig(),
                         sampler=sampler or make_sampler(),
                         **kwargs)


class TestGenerateInterpretation:
    def test_greedy_repeats_argmax_token(self, tiny_vocab):
        backend = MockBackend.from_probabilities(tiny_vocab, [[0.2, 0.7, 0.1]])
        scorer = LexiconScorer({}, default_toxicity=0.0)
        session = _session(0.0, CalibrationConfig(objective1=False),
                           make_sampler(mode="greedy"))
        tokens = generate_interpretation(session, backend, scorer, max_len=5)
        assert tokens == ["beta"] * 5

    def test_toxic_boost_dominates_with_large_lambda(self):
        # slur toxicity sits just under the target so the boost branch fires
        # every step; 5 * 0.95 outweighs the base log-score gap of ~2.94
        vocab = Vocabulary(["slur", "kind"])
        backend = MockBackend.from_probabilities(vocab, [[0.05, 0.95]])
        scorer = LexiconScorer({"slur": 0.95, "kind": 0.0})
        session = _session(1.0, CalibrationConfig(objective1=True, fixed_lambda=5.0),
                           make_sampler(mode="greedy"))
        tokens = generate_interpretation(session, backend, scorer, max_len=6)
        assert tokens == ["slur"] * 6

    def test_objective1_off_matches_uncontrolled_loop(self, tiny_vocab):
        backend = MockBackend.from_probabilities(
            tiny_vocab, [[0.2, 0.5, 0.3], [0.6, 0.1, 0.3]])
        scorer = LexiconScorer({"alpha": 0.9}, default_toxicity=0.1)
        sampler = make_sampler(mode="nucleus", nucleus_p=1.0, rng_seed=7)
        session = _session(0.9, CalibrationConfig(objective1=False), sampler)
        got = generate_interpretation(session, backend, scorer, max_len=8,
                                      rng=np.random.default_rng(7))
        rng = np.random.default_rng(7)
        expected = []
        for t in range(8):
            probs = renormalize(backend.next_scores(expected))
            expected.append(tiny_vocab.token(select_token(probs, sampler, rng)))
        assert got == expected

    def test_stops_at_eos(self):
        vocab = Vocabulary(["</s>", "word"])
        backend = MockBackend.from_probabilities(vocab, [[0.01, 0.99],
                                                         [0.01, 0.99],
                                                         [0.99, 0.01]])
        scorer = LexiconScorer({}, default_toxicity=0.0)
        session = _session(0.0, CalibrationConfig(objective1=False),
                           make_sampler(mode="greedy"))
        tokens = generate_interpretation(session, backend, scorer, max_len=10)
        assert tokens == ["word", "word"]

    def test_immediate_eos_gives_empty_sequence(self):
        vocab = Vocabulary(["</s>", "word"])
        backend = MockBackend.from_probabilities(vocab, [[0.99, 0.01]])
        scorer = LexiconScorer({}, default_toxicity=0.0)
        session = _session(0.0, CalibrationConfig(objective1=False),
                           make_sampler(mode="greedy"))
        assert generate_interpretation(session, backend, scorer, max_len=10) == []

    def test_min_len_masks_eos(self):
        vocab = Vocabulary(["</s>", "word"])
        backend = MockBackend.from_probabilities(vocab, [[0.99, 0.01]])
        scorer = LexiconScorer({}, default_toxicity=0.0)
        session = _session(0.0, CalibrationConfig(objective1=False),
                           make_sampler(mode="greedy"))
        tokens = generate_interpretation(session, backend, scorer,
                                         max_len=4, min_len=4)
        assert tokens == ["word"] * 4

    def test_backend_failure_carries_step(self, tiny_vocab):
        class Broken:
            vocabulary = tiny_vocab

            def next_scores(self, prefix):
                if len(prefix) == 2:
                    raise RuntimeError("boom")
                return np.log(np.full(3, 1 / 3))

        scorer = LexiconScorer({}, default_toxicity=0.0)
        session = _session(0.0, CalibrationConfig(objective1=False),
                           make_sampler(mode="greedy"))
        from toxsteer import GenerationError
        with pytest.raises(GenerationError, match="step 3"):
            generate_interpretation(session, Broken(), scorer, max_len=5)

    def test_trace_records_lambda_and_prefix(self, tiny_vocab):
        backend = MockBackend.uniform(tiny_vocab)
        scorer = LexiconScorer({"alpha": 0.8}, default_toxicity=0.0)
        config = CalibrationConfig(objective1=True, objective2=True)
        session = _session(0.5, config, make_sampler(mode="greedy"))
        trace = []
        generate_interpretation(session, backend, scorer, max_len=3, trace=trace)
        assert len(trace) == 3
        assert trace[0]["prefix_toxicity"] == 0.0  # empty prefix scores zero
        assert all(step["lambda"] == pytest.approx(1 / (0.5 * 100)) for step in trace)

    def test_rescore_every_reuses_prefix_measurement(self, tiny_vocab):
        backend = MockBackend.uniform(tiny_vocab)
        scorer = LexiconScorer({"alpha": 0.9, "beta": 0.1, "gamma": 0.1})
        config = CalibrationConfig(objective1=True, rescore_every=3)
        session = _session(0.5, config, make_sampler(mode="greedy"))
        trace = []
        generate_interpretation(session, backend, scorer, max_len=7, trace=trace)
        measured = [step["prefix_toxicity"] for step in trace]
        # steps 2-3 reuse the step-1 measurement, 5-6 reuse step-4, ...
        assert measured[1] == measured[0] and measured[2] == measured[0]
        assert measured[4] == measured[3] and measured[5] == measured[3]

    def test_reproducible_under_same_seed(self, toy_model, scorer):
        def run():
            session = _session(0.7, CalibrationConfig(objective1=True),
                               make_sampler(rng_seed=13))
            return generate_interpretation(session, toy_model, scorer, max_len=12,
                                           rng=np.random.default_rng(13))
        assert run() == run()

    def test_calibrated_distribution_matches_base_when_lambda_zero(self, toy_model, scorer):
        scores = toy_model.next_scores([])
        tox = scorer.token_toxicity_vector(toy_model.vocabulary)
        base = renormalize(scores)
        calibrated = renormalize(calibrate_scores(scores, tox, 0.2, 0.8, 0.0))
        assert np.max(np.abs(base - calibrated)) < 1e-15
