"""Selection math: Gumbel sampling, halving schedules, completed values."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rescale.gumbel import (RootCandidate, completed_values, final_score_argmax,
                            gumbel_top_m, halving_eliminate, halving_schedule,
                            improved_policy, sample_gumbel,
                            select_final_root_action, select_nonroot_action,
                            sigma)
from rescale.rng import derive_rng


class FixedUniform:
    def __init__(self, u):
        self.u = u

    def random(self, n=None):
        return self.u if n is None else np.full(n, self.u)


class TestSampleGumbel:
    def test_fixed_point_one_over_e(self):
        # u = 1/e: -log(-log(1/e)) = -log(1) = 0
        assert sample_gumbel(FixedUniform(1 / math.e)) == pytest.approx(0.0, abs=1e-12)

    def test_analytic_e_to_minus_e(self):
        # u = e^-e: -log(e) = -1
        assert sample_gumbel(FixedUniform(math.exp(-math.e))) == pytest.approx(-1.0, abs=1e-12)

    def test_endpoints_are_clamped(self):
        assert math.isfinite(sample_gumbel(FixedUniform(0.0)))
        assert math.isfinite(sample_gumbel(FixedUniform(1.0)))

    def test_empirical_mean_is_euler_mascheroni(self):
        rng = derive_rng(7)
        draws = np.fromiter((sample_gumbel(rng) for _ in range(10**6)),
                            dtype=float, count=10**6)
        assert abs(draws.mean() - 0.5772156649) < 0.01


class TestGumbelTopM:
    def test_empty_priors_rejected(self):
        with pytest.raises(ValueError):
            gumbel_top_m([], 1, derive_rng(0))

    def test_equal_priors_rank_by_gumbel(self):
        rng = derive_rng(3)
        cands = gumbel_top_m([0.25] * 4, 2, rng)
        gumbels = sorted((c.gumbel for c in cands), reverse=True)
        assert [c.gumbel for c in cands] == gumbels

    def test_disabled_gumbel_reduces_to_top_priors(self):
        cands = gumbel_top_m([0.1, 0.4, 0.2, 0.3], 2, derive_rng(0),
                             gumbel_enabled=False)
        assert all(c.gumbel == 0.0 for c in cands)
        alive = sorted(c.action_index for c in cands if c.alive)
        assert alive == [1, 3]

    def test_disabled_gumbel_ties_break_to_lower_index(self):
        cands = gumbel_top_m([0.25, 0.25, 0.25, 0.25], 2, derive_rng(0),
                             gumbel_enabled=False)
        assert sorted(c.action_index for c in cands if c.alive) == [0, 1]

    def test_top1_frequency_matches_priors(self):
        # Gumbel-max trick: argmax(log p + g) ~ Categorical(p)
        priors = [0.5, 0.3, 0.2]
        rng = derive_rng(11)
        counts = [0, 0, 0]
        n = 100_000
        for _ in range(n):
            cands = gumbel_top_m(priors, 1, rng)
            counts[cands[0].action_index] += 1
        for i, p in enumerate(priors):
            assert abs(counts[i] / n - p) < 0.01

    def test_chi_square_against_softmax_oracle(self):
        from scipy import stats
        priors = [0.35, 0.25, 0.2, 0.12, 0.08]
        rng = derive_rng(13)
        counts = np.zeros(5)
        n = 100_000
        for _ in range(n):
            counts[gumbel_top_m(priors, 1, rng)[0].action_index] += 1
        _, p_value = stats.chisquare(counts, np.asarray(priors) * n)
        assert p_value > 0.001


class TestSigma:
    def test_half_value_no_visits(self):
        assert sigma(0.5, 0, c_visit=50.0, c_scale=1.0) == pytest.approx(25.0)

    def test_zero_value_is_zero(self):
        assert sigma(0.0, 123, c_visit=50.0) == 0.0

    def test_full_value_fourteen_visits(self):
        assert sigma(1.0, 14, c_visit=50.0) == pytest.approx(64.0)

    @given(v1=st.floats(0, 1), v2=st.floats(0, 1),
           visits=st.integers(0, 10_000),
           c_scale=st.floats(0.01, 10))
    def test_strictly_increasing_in_v(self, v1, v2, visits, c_scale):
        if v1 == v2:
            return
        lo, hi = sorted((v1, v2))
        assert sigma(lo, visits, 50.0, c_scale) < sigma(hi, visits, 50.0, c_scale)


class TestHalvingSchedule:
    def test_schedule_8_arms_24_sims(self):
        schedule = halving_schedule(8, 24)
        assert schedule.rounds == [(8, 1), (4, 2), (2, 4)]
        assert schedule.extra_final_sims == 0
        assert schedule.total == 24

    def test_single_arm_degenerate(self):
        schedule = halving_schedule(1, 10)
        assert schedule.rounds == [(1, 10)]
        assert schedule.extra_final_sims == 0

    def test_remainder_goes_to_final_round(self):
        schedule = halving_schedule(4, 10)
        assert schedule.rounds == [(4, 1), (2, 2)]
        assert schedule.extra_final_sims == 2
        assert schedule.total == 10

    def test_exhaustive_budget_exactness(self):
        # every (m, n) grid point spends exactly n simulations
        for m in range(1, 65):
            min_n = max(1, math.ceil(math.log2(m)))
            for n in range(min_n, 513):
                schedule = halving_schedule(m, n)
                assert schedule.total == n, (m, n)
                counts = [s for s, _ in schedule.rounds]
                assert counts[0] == m
                for a, b in zip(counts, counts[1:]):
                    assert b == (a + 1) // 2
                assert counts[-1] in (1, 2)

    @given(m=st.integers(1, 64), n=st.integers(1, 512))
    def test_budget_exactness_property(self, m, n):
        if n < math.ceil(math.log2(max(m, 2))):
            return
        assert halving_schedule(m, n).total == n


def _candidates(scores_priors):
    out = []
    for i, (score, prior) in enumerate(scores_priors):
        # encode the desired f directly: gumbel = score, log_prior = 0
        out.append(RootCandidate(i, score, 0.0, prior, alive=True))
    return out


class TestHalvingEliminate:
    def test_pairwise_comparison(self):
        cands = _candidates([(3.1, 0.5), (2.9, 0.5)])
        halving_eliminate(cands, [1, 1], [0.0, 0.0])
        assert [c.alive for c in cands] == [True, False]

    def test_tie_break_by_prior(self):
        # scores (5, 4, 4, 1); the two 4s have priors 0.3 and 0.1
        cands = _candidates([(5, 0.2), (4, 0.3), (4, 0.1), (1, 0.4)])
        halving_eliminate(cands, [1, 1, 1, 1], [0.0] * 4)
        assert [c.alive for c in cands] == [True, True, False, False]

    def test_constant_values_reduce_to_f_ranking(self):
        cands = _candidates([(1.0, 0.25), (3.0, 0.25), (2.0, 0.25), (0.5, 0.25)])
        halving_eliminate(cands, [2, 2, 2, 2], [0.7, 0.7, 0.7, 0.7])
        assert [c.alive for c in cands] == [False, True, True, False]

    def test_unvisited_candidates_score_by_initial_value(self):
        # zero-sim rounds fall back to the cached evaluator value in mean_value
        cands = _candidates([(0.0, 0.25), (0.1, 0.25)])
        halving_eliminate(cands, [0, 0], [0.9, 0.1])
        assert [c.alive for c in cands] == [True, False]


class TestCompletedValues:
    def test_mixed_value_hand_example(self):
        # A: p=0.6 N=2 mean=0.7; B: p=0.4 N=0 v_phi=0.4
        # v_bar = 0.7, v_mix(B) = (0.4 + 2*0.7) / 3 = 0.6
        out = completed_values([0.6, 0.4], [2, 0], [0.7, 0.0], [0.55, 0.4])
        assert out[0] == pytest.approx(0.7)
        assert out[1] == pytest.approx(0.6)

    def test_no_visits_returns_value_evals(self):
        out = completed_values([0.5, 0.5], [0, 0], [0.0, 0.0], [0.3, 0.8])
        assert out == [0.3, 0.8]

    def test_all_visited_returns_means(self):
        out = completed_values([0.5, 0.5], [3, 1], [0.2, 0.9], [0.99, 0.01])
        assert out == [0.2, 0.9]


class TestImprovedPolicy:
    def test_uniform_symmetry(self):
        pi = improved_policy([math.log(0.25)] * 4, [0.5] * 4, 0)
        for p in pi:
            assert p == pytest.approx(0.25, abs=1e-12)
        assert sum(pi) == pytest.approx(1.0, abs=1e-12)

    def test_shift_invariance(self):
        logp = [math.log(p) for p in (0.5, 0.3, 0.2)]
        q = [0.9, 0.4, 0.1]
        base = improved_policy(logp, q, 3)
        shifted = improved_policy([lp + 7.3 for lp in logp], q, 3)
        for a, b in zip(base, shifted):
            assert a == pytest.approx(b, abs=1e-12)

    def test_sigma_gap_of_fifty_dominates(self):
        logp = [math.log(0.5), math.log(0.5)]
        pi = improved_policy(logp, [1.0, 0.0], 0, c_visit=50.0)
        assert pi[0] > 1 - 1e-15

    @settings(max_examples=200)
    @given(st.data())
    def test_one_step_policy_improvement(self, data):
        k = data.draw(st.integers(2, 16))
        raw = data.draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k))
        q = data.draw(st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k))
        visits = data.draw(st.lists(st.integers(0, 50), min_size=k, max_size=k))
        total = sum(raw)
        priors = [r / total for r in raw]
        pi = improved_policy([math.log(p) for p in priors], q, max(visits))
        gain = sum(p * v for p, v in zip(pi, q)) - sum(p * v for p, v in zip(priors, q))
        assert gain >= -1e-12


class TestSelectNonRoot:
    def test_hand_example_visit_correction(self):
        # pi' = (0.5, 0.3, 0.2), N = (1, 0, 0): scores (0.0, 0.3, 0.2) -> 1
        # realize pi' via uniform completed values and these priors
        priors = [0.5, 0.3, 0.2]
        idx = select_nonroot_action(priors, [1, 0, 0], [0.5, 0.0, 0.0],
                                    [0.5, 0.5, 0.5])
        assert idx == 1

    def test_no_visits_returns_argmax_pi(self):
        idx = select_nonroot_action([0.2, 0.5, 0.3], [0, 0, 0],
                                    [0.0] * 3, [0.5, 0.5, 0.5])
        assert idx == 1

    def test_visit_fractions_track_policy(self):
        # counting oracle: repeated selection keeps ||N/sum - pi'||_inf small
        priors = [0.45, 0.3, 0.15, 0.1]
        value = 0.37  # constant values: pi' == softmax(log p) == p
        visits = [0, 0, 0, 0]
        for step in range(1, 101):
            idx = select_nonroot_action(priors, visits, [value] * 4, [value] * 4)
            visits[idx] += 1
            total = sum(visits)
            gap = max(abs(n / total - p) for n, p in zip(visits, priors))
            # the first step can exceed the 1/(1+total) envelope; afterwards
            # the correction term keeps fractions inside it
            if step >= 2:
                assert gap <= 1.0 / (1 + total) + 1e-12

    def test_argmax_invariant_under_logprior_shift(self):
        priors = [0.5, 0.3, 0.2]
        scaled = [p * 3.0 for p in priors]  # same ratios, unnormalized
        visits, means, values = [2, 1, 0], [0.6, 0.4, 0.0], [0.5, 0.5, 0.3]
        a = select_nonroot_action(priors, visits, means, values)
        b = select_nonroot_action(scaled, visits, means, values)
        assert a == b


class TestFinalSelection:
    def test_halving_completion_returns_sole_survivor(self):
        cands = _candidates([(1.0, 0.5), (2.0, 0.5)])
        cands[0].alive = False
        idx = select_final_root_action(cands, [3, 5], [0.2, 0.8],
                                       halving_completed=True)
        assert idx == 1

    def test_two_survivors_is_an_error(self):
        cands = _candidates([(1.0, 0.5), (2.0, 0.5)])
        with pytest.raises(RuntimeError):
            select_final_root_action(cands, [1, 1], [0.5, 0.5],
                                     halving_completed=True)

    def test_ablation_argmax_over_visited(self):
        cands = _candidates([(2.0, 0.3), (3.5, 0.3), (1.0, 0.4)])
        idx = select_final_root_action(cands, [1, 1, 1], [0.0, 0.0, 0.0],
                                       halving_completed=False)
        assert idx == 1

    def test_ablation_skips_unvisited(self):
        cands = _candidates([(9.0, 0.5), (1.0, 0.5)])
        idx = final_score_argmax(cands, [0, 4], [0.0, 0.5])
        assert idx == 1

    def test_frozen_gumbel_never_resampled(self):
        rng = derive_rng(5)
        cands = gumbel_top_m([0.4, 0.3, 0.3], 2, rng)
        before = [c.gumbel for c in cands]
        halving_eliminate(cands, [1, 1, 1], [0.5, 0.5, 0.5])
        assert [c.gumbel for c in cands] == before
