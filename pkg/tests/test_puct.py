"""Baseline rules: Dirichlet noise, PUCT selection, visit-count sampling."""

import numpy as np
import pytest

from rescale.puct import PuctParams, apply_dirichlet_noise, puct_select, visit_count_action
from rescale.rng import derive_rng

PARAMS = PuctParams()


class TestDirichletNoise:
    def test_epsilon_zero_is_identity(self):
        priors = [0.7, 0.2, 0.1]
        params = PuctParams(dirichlet_epsilon=0.0)
        assert apply_dirichlet_noise(priors, params, derive_rng(0)) == priors

    def test_epsilon_one_is_pure_noise(self):
        params = PuctParams(dirichlet_epsilon=1.0)
        noised = apply_dirichlet_noise([0.5, 0.5], params, derive_rng(1))
        assert all(0 < p < 1 for p in noised)
        assert sum(noised) == pytest.approx(1.0, abs=1e-9)

    def test_output_stays_normalized(self):
        noised = apply_dirichlet_noise([0.6, 0.3, 0.1], PARAMS, derive_rng(2))
        assert sum(noised) == pytest.approx(1.0, abs=1e-9)

    def test_mean_matches_mixture_oracle(self):
        # E[p'] = (1 - eps) p + eps / k
        priors = [0.6, 0.3, 0.1]
        rng = derive_rng(3)
        total = np.zeros(3)
        n = 100_000
        for _ in range(n):
            total += apply_dirichlet_noise(priors, PARAMS, rng)
        expected = [(1 - 0.25) * p + 0.25 / 3 for p in priors]
        assert np.allclose(total / n, expected, atol=0.01)


class TestPuctSelect:
    def test_unvisited_prefers_high_prior(self):
        idx = puct_select([0.7, 0.3], [0, 0], [0.0, 0.0], [0.0, 0.0], PARAMS)
        assert idx == 0

    def test_hand_computed_scores(self):
        # Q=(0,1), N=(0,1), p=(.5,.5), c=1: scores (0.5, 1.25) -> 1
        params = PuctParams(c_puct=1.0)
        idx = puct_select([0.5, 0.5], [0, 1], [0.0, 1.0], [0.0, 0.0], params)
        assert idx == 1

    def test_large_c_puct_follows_prior_over_value(self):
        # with huge c the ranking approaches p(a) / (1 + N(a))
        params = PuctParams(c_puct=1e9)
        idx = puct_select([0.6, 0.4], [1, 1], [0.0, 1.0], [0.0, 0.0], params)
        assert idx == 0

    def test_visit_reset_depends_only_on_priors(self):
        idx = puct_select([0.2, 0.5, 0.3], [0, 0, 0], [0.9, 0.1, 0.5],
                          [0.0, 0.0, 0.0], PARAMS)
        assert idx == 1

    def test_unvisited_q_value_eval_mode(self):
        params = PuctParams(c_puct=0.01, unvisited_q="value_eval")
        idx = puct_select([0.5, 0.5], [0, 1], [0.0, 0.5], [0.9, 0.0], params)
        assert idx == 0

    def test_unvisited_q_parent_mean_mode(self):
        params = PuctParams(c_puct=0.01, unvisited_q="parent_mean")
        idx = puct_select([0.5, 0.5], [0, 1], [0.0, 0.5], [0.0, 0.0], params,
                          parent_mean=0.95)
        assert idx == 0


class TestVisitCountAction:
    def test_all_zero_counts_rejected(self):
        with pytest.raises(ValueError):
            visit_count_action([0, 0], 1.0, derive_rng(0))

    def test_greedy_tau_is_argmax(self):
        idx = visit_count_action([3, 9, 1], 0.01, derive_rng(0))
        assert idx == 1

    def test_nine_to_one_distribution(self):
        rng = derive_rng(4)
        picks = np.array([visit_count_action([9, 1], 1.0, rng) for _ in range(100_000)])
        assert abs((picks == 0).mean() - 0.9) < 0.01

    def test_symmetric_counts_sample_evenly(self):
        rng = derive_rng(5)
        picks = np.array([visit_count_action([4, 4], 1.0, rng) for _ in range(100_000)])
        assert abs((picks == 0).mean() - 0.5) < 0.01

    def test_chi_square_against_exponentiated_counts(self):
        from scipy import stats
        counts = [5, 3, 2]
        tau = 0.7
        weights = np.array([n ** (1 / tau) for n in counts], dtype=float)
        expected = weights / weights.sum()
        rng = derive_rng(6)
        n = 100_000
        observed = np.zeros(3)
        for _ in range(n):
            observed[visit_count_action(counts, tau, rng)] += 1
        _, p_value = stats.chisquare(observed, expected * n)
        assert p_value > 0.001

    def test_zero_count_edges_never_sampled(self):
        rng = derive_rng(7)
        for _ in range(1000):
            assert visit_count_action([0, 5, 0], 1.0, rng) == 1
