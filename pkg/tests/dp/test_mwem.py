import numpy as np
import pytest
from pydantic import ValidationError

from pod_mpc.dp.circuit_builder import MwemSetting, bin_thresholds, build_mwem_circuit, client_inputs
from pod_mpc.dp.histogram import Histogram, bin_data, bin_edges
from pod_mpc.dp.mwem import (
    MwemConfig,
    MwemMode,
    SyntheticDistribution,
    mw_update,
    mwem_plaintext,
    replay_mwem,
    sample_synthetic,
    uniform_distribution,
)
from pod_mpc.dp.queries import LinearQuery, eval_query, load_queries, random_queries, save_queries
from pod_mpc.errors import DimensionMismatch, InvalidParameters, OutOfDomain, UnsupportedMode
from pod_mpc.mpc.circuit import GateOp
from pod_mpc.workloads import MwemWorkload


class TestHistogram:
    def test_binning(self):
        assert bin_data([0, 0, 5, 9], 10, (0, 10)).counts == [2, 0, 0, 0, 0, 1, 0, 0, 0, 1]

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            bin_data([10], 10, (0, 10))
        with pytest.raises(OutOfDomain):
            bin_data([-1], 10, (0, 10))

    def test_uneven_width(self):
        assert bin_data([0, 3, 4, 9], 3, (0, 10)).counts == [2, 1, 1]
        assert bin_edges(4, (0, 10)) == [0, 2.5, 5, 7.5]

    def test_addition(self):
        total = bin_data([1, 2], 2, (0, 4)) + bin_data([3], 2, (0, 4))
        assert total.counts == [1, 2]
        assert total.total == 3
        with pytest.raises(InvalidParameters):
            total + bin_data([1], 4, (0, 4))

    def test_negative_counts(self):
        with pytest.raises(InvalidParameters):
            Histogram(counts=[1, -1], domain=(0, 2))


class TestQueries:
    def test_eval(self):
        assert eval_query(LinearQuery(weights=[1, -1]), [3, 1]) == 2

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            eval_query(LinearQuery(weights=[1, 0, 1]), Histogram(counts=[1, 1], domain=(0, 2)))

    def test_weight_bounds(self):
        with pytest.raises(ValidationError):
            LinearQuery(weights=[1.5])

    def test_random_queries_on_grid(self, np_rng):
        queries = random_queries(20, 5, np_rng, frac_bits=8)
        weights = np.array([q.weights for q in queries])
        assert weights.shape == (20, 5)
        assert np.all(np.abs(weights) <= 1)
        assert np.all(weights * 256 == np.round(weights * 256))

    def test_save_and_load(self, np_rng, tmp_path):
        queries = random_queries(3, 4, np_rng)
        save_queries(queries, tmp_path / "q.json")
        assert load_queries(tmp_path / "q.json") == queries


class TestMultiplicativeWeights:
    def test_update_keeps_total(self):
        A = uniform_distribution(100, 4)
        updated = mw_update(A, [1, 0, -1, 0.5], 80.0, 100)
        assert updated.sum() == pytest.approx(100)
        assert updated[0] > A[0] > updated[2]

    def test_plaintext_conserves_mass(self, np_rng):
        data = bin_data(list(np_rng.integers(0, 100, 500)), 10, (0, 100))
        cfg = MwemConfig(queries=random_queries(15, 10, np_rng), iterations=10, epsilon=1.0, n=500)
        dist = mwem_plaintext(data, cfg, np_rng)
        assert len(dist.steps) == 10
        assert all(step.total == pytest.approx(500) for step in dist.steps)
        assert all(v >= 0 for v in dist.A)

    @pytest.mark.parametrize("mode", [MwemMode.NOISY_MAX, MwemMode.EXPONENTIAL])
    def test_beats_uniform_on_skewed_data(self, mode):
        rng = np.random.default_rng(3)
        data = bin_data([5] * 9000 + [95] * 1000, 10, (0, 100))
        queries = random_queries(20, 10, rng)
        cfg = MwemConfig(queries=queries, iterations=20, epsilon=50.0, n=10_000, mode=mode)
        dist = mwem_plaintext(data, cfg, rng)
        uniform = SyntheticDistribution(A=list(uniform_distribution(10_000, 10)), n=10_000)
        assert dist.max_error(queries, data) < uniform.max_error(queries, data)

    def test_replay_matches_run(self, np_rng):
        data = bin_data(list(np_rng.integers(0, 100, 300)), 10, (0, 100))
        cfg = MwemConfig(queries=random_queries(8, 10, np_rng), iterations=6, epsilon=2.0, n=300,
                         average_output=True)
        dist = mwem_plaintext(data, cfg, np_rng)
        replayed = replay_mwem([(s.query, s.measurement) for s in dist.steps], cfg.queries, 300, 10,
                               average_output=True)
        assert np.allclose(replayed.A, dist.A)

    def test_noise_scales(self, np_rng):
        cfg = MwemConfig(queries=random_queries(2, 3, np_rng), iterations=10, epsilon=0.5, n=10, bins=3)
        assert cfg.selection_scale == 80
        assert cfg.measurement_scale == 40

    def test_query_bins_checked(self, np_rng):
        with pytest.raises(DimensionMismatch):
            MwemConfig(queries=random_queries(2, 4, np_rng), n=10, bins=3)

    def test_sample_synthetic(self, np_rng):
        dist = SyntheticDistribution(A=[0.0, 10.0, 0.0], n=10)
        assert sample_synthetic(dist, None, np_rng) == [1] * 10
        points = sample_synthetic(dist, 5, np_rng, domain=(0, 30))
        assert all(10 <= p < 20 for p in points)


class TestMwemCircuit:
    def _cfg(self, np_rng, n: int = 12) -> MwemConfig:
        return MwemConfig(queries=random_queries(4, 4, np_rng), iterations=3, epsilon=1.0, n=n, bins=4)

    def test_gate_counts(self, np_rng):
        circuit = build_mwem_circuit(self._cfg(np_rng), 3, MwemSetting.CLIENT_BINNING)
        ops = [g.op for g in circuit.gates]
        assert ops.count(GateOp.INPUT) == 3
        assert ops.count(GateOp.NOISE_INPUT) == 6
        assert ops.count(GateOp.ARGMAX) == 3
        assert len(circuit.output_gates()) == 6
        assert circuit.input_widths() == {0: 4, 1: 4, 2: 4}

    def test_in_mpc_binning_inputs_raw_points(self, np_rng):
        circuit = build_mwem_circuit(self._cfg(np_rng), 3, MwemSetting.IN_MPC_BINNING, [2, 5, 5], (0, 16))
        assert circuit.input_widths() == {0: 2, 1: 5, 2: 5}
        assert circuit.cost_profile().comparisons >= 12 * 4

    def test_exponential_mode_unsupported(self, np_rng):
        cfg = self._cfg(np_rng).model_copy(update={"mode": MwemMode.EXPONENTIAL})
        with pytest.raises(UnsupportedMode):
            build_mwem_circuit(cfg, 3)

    def test_thresholds(self):
        assert bin_thresholds(4, (0, 16)) == [-1, 3, 7, 11]
        assert bin_thresholds(3, (0, 10)) == [-1, 3, 6]

    def test_client_inputs(self):
        assert client_inputs(MwemSetting.CLIENT_BINNING, [0, 5, 15], 4, (0, 16)) == [1, 1, 0, 1]
        assert client_inputs(MwemSetting.IN_MPC_BINNING, [0, 5, 15], 4, (0, 16)) == [0, 5, 15]
        with pytest.raises(OutOfDomain):
            client_inputs(MwemSetting.IN_MPC_BINNING, [16], 4, (0, 16))

    def test_settings(self):
        assert MwemSetting.from_number(1) == MwemSetting.IN_MPC_BINNING
        assert MwemSetting.from_number(3) == MwemSetting.CLIENT_BINNING
        with pytest.raises(InvalidParameters):
            MwemSetting.from_number(4)

    def test_setting_one_needs_total(self):
        with pytest.raises(ValidationError):
            MwemWorkload(setting=1)
        assert MwemWorkload(setting=1, total_points=10).points(3) == [4, 3, 3]


@pytest.mark.slow
class TestPrivacyUtilityTrend:
    def test_error_shrinks_with_budget(self):
        data_rng = np.random.default_rng(11)
        points = np.clip(data_rng.normal(30, 12, 1600), 0, 99).astype(int)
        data = bin_data(list(points), 10, (0, 100))
        queries = random_queries(60, 10, data_rng)
        mean_errors = []
        for epsilon in (0.1, 1.0, 10.0):
            cfg = MwemConfig(queries=queries, iterations=30, epsilon=epsilon, n=1600)
            errors = [mwem_plaintext(data, cfg, np.random.default_rng(seed)).max_error(queries, data)
                      for seed in range(20)]
            mean_errors.append(np.mean(errors))
        assert mean_errors[0] >= mean_errors[1] >= mean_errors[2]
