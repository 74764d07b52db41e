import asyncio

import numpy as np
import pytest
from scipy import stats

from pod_mpc.dp.audit import empirical_dp_check, laplace_count_mechanism
from pod_mpc.dp.mechanisms import exponential_mechanism, laplace_mechanism, report_noisy_max
from pod_mpc.dp.secure import encode_scores, noisy_max_circuit
from pod_mpc.errors import InvalidParameters
from pod_mpc.mpc.runner import run_delegated


class TestMechanisms:
    def test_laplace_centered(self, np_rng):
        draws = [laplace_mechanism(5.0, 1.0, 2.0, np_rng) for _ in range(20_000)]
        assert np.mean(draws) == pytest.approx(5.0, abs=0.03)

    def test_non_positive_epsilon(self, np_rng):
        with pytest.raises(InvalidParameters):
            laplace_mechanism(0.0, 1.0, 0.0, np_rng)
        with pytest.raises(InvalidParameters):
            exponential_mechanism([1.0], -1.0, np_rng)

    def test_exponential_weights(self, np_rng):
        picks = [exponential_mechanism([0.0, 1.0], 2.0, np_rng) for _ in range(20_000)]
        assert np.mean(picks) == pytest.approx(np.e / (1 + np.e), abs=0.02)

    def test_exponential_large_scores(self, np_rng):
        assert exponential_mechanism([0.0, 1e6], 1.0, np_rng) == 1

    def test_noisy_max_small_noise(self, np_rng):
        assert report_noisy_max([0, 100, 0], 0.1, np_rng) == 1


class TestAudit:
    def test_laplace_meets_its_epsilon(self):
        result = empirical_dp_check(laplace_count_mechanism(1.0), [0] * 10, [0] * 11, 1.0,
                                    partition=[10, 11], runs=200_000, rng=np.random.default_rng(0))
        assert result.passed
        assert result.max_log_ratio == pytest.approx(1.0, abs=0.05)

    def test_understated_epsilon_detected(self):
        result = empirical_dp_check(laplace_count_mechanism(1.0), [0] * 10, [0] * 11, 0.5,
                                    partition=[8, 10, 11, 13], runs=200_000, rng=np.random.default_rng(1))
        assert not result.passed
        assert result.max_excess > 0.3

    def test_sparse_partition(self):
        with pytest.raises(InvalidParameters):
            empirical_dp_check(laplace_count_mechanism(1.0), [0], [0, 0], 1.0, partition=[0], runs=10)


class TestSecureNoisyMax:
    def test_clear_winner(self):
        circuit = noisy_max_circuit(3, scale=0.01)
        clients = {0: encode_scores([0.0, 1000.0, 0.0])}
        result = asyncio.run(run_delegated(circuit, 3, clients, transport="memory"))
        assert result.outputs == [[1]]

    def test_encoding(self):
        assert encode_scores([1.5, -0.25]) == [3 << 19, -(1 << 18)]

    def test_wide_gap_wins(self, np_rng):
        scale = 1.0
        scores = [0.0, 0.0, 25.0 * scale, 0.0]
        wins = sum(report_noisy_max(scores, scale, np_rng) == 2 for _ in range(1_000))
        assert wins / 1_000 >= 0.99

    def test_equal_scores_pick_uniformly(self, np_rng):
        counts = np.bincount([report_noisy_max([1.0] * 4, 1.0, np_rng) for _ in range(4_000)], minlength=4)
        assert stats.chisquare(counts).pvalue > 0.01

    @pytest.mark.slow
    def test_secure_wide_gap_wins(self):
        circuit = noisy_max_circuit(4, scale=1.0)
        clients = {0: encode_scores([0.0, 0.0, 25.0, 0.0])}

        async def scenario():
            return [(await run_delegated(circuit, 3, clients, transport="memory", seed=seed)).flat[0]
                    for seed in range(100)]

        winners = asyncio.run(scenario())
        assert winners.count(2) >= 99

    @pytest.mark.slow
    def test_secure_equal_scores_pick_uniformly(self):
        circuit = noisy_max_circuit(4, scale=1.0)
        clients = {0: encode_scores([1.0] * 4)}

        async def scenario():
            return [(await run_delegated(circuit, 3, clients, transport="memory", seed=seed)).flat[0]
                    for seed in range(400)]

        counts = np.bincount(asyncio.run(scenario()), minlength=4)
        assert stats.chisquare(counts).pvalue > 0.01
