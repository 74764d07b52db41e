import numpy as np
import pytest
from scipy import stats

from pod_mpc.core.field import FixedPointParams
from pod_mpc.mpc.noise import NoiseSampler, derive_seed, joint_noise_stream, sample_laplace


def joint_samples(parties: int, scale: float, size: int) -> np.ndarray:
    samplers = [NoiseSampler(derive_seed(7, "noise-test", p, "noise"), parties) for p in range(parties)]
    return sum(s.contribution(scale, size) for s in samplers)


class TestNoiseSampler:
    def test_seeds_stable_and_distinct(self):
        assert derive_seed(1, "job", 0, "noise") == derive_seed(1, "job", 0, "noise")
        assert derive_seed(1, "job", 0, "noise") != derive_seed(1, "job", 1, "noise")

    def test_needs_a_party(self):
        with pytest.raises(ValueError):
            NoiseSampler(0, 0)

    def test_replay_matches_contributions(self):
        params = FixedPointParams()
        seeds = [11, 12, 13]
        [replayed] = joint_noise_stream([{"scale": 5.0, "width": 6}], 3, seeds, params)
        direct = [NoiseSampler(s, 3).encoded_contribution(5.0, 6, params) for s in seeds]
        assert replayed == [sum(col) for col in zip(*direct)]

    def test_single_player_is_laplace(self):
        samples = NoiseSampler(3, 1).contribution(1.0, 20_000)
        assert stats.kstest(samples, stats.laplace(scale=1.0).cdf).pvalue > 0.01

    def test_direct_sampler(self, np_rng):
        assert sample_laplace(2.0, 10, np_rng).shape == (10,)


@pytest.mark.slow
class TestJointLaplace:
    SIZE = 100_000

    @pytest.mark.parametrize("parties", [3, 5, 10])
    def test_variance(self, parties):
        scale = 4.0
        samples = joint_samples(parties, scale, self.SIZE)
        assert abs(samples.var() / (2 * scale ** 2) - 1) < 0.05

    @pytest.mark.parametrize("parties", [3, 10])
    def test_kolmogorov_smirnov(self, parties):
        samples = joint_samples(parties, 1.0, self.SIZE)
        assert stats.kstest(samples, stats.laplace(scale=1.0).cdf).pvalue > 0.01
