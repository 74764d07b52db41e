import asyncio

import pytest
from pydantic import ValidationError

from pod_mpc.bench.fit import fit_scaling
from pod_mpc.bench.harness import run_plan, sample_data
from pod_mpc.bench.plan import CSV_COLUMNS, ExecutionModel, ExperimentPlan
from pod_mpc.bench.report import emit_plots, read_csv, rows_frame, write_csv
from pod_mpc.errors import ConfigError, InvalidParameters
from pod_mpc.workloads import CircuitSpec, WorkloadKind

SUM = CircuitSpec(kind=WorkloadKind.SUM, width=2)


def delegated_plan(**overrides) -> ExperimentPlan:
    fields = dict(model=ExecutionModel.DELEGATED, circuit=SUM, sweep=[1, 2, 4, 8], transport="memory")
    fields.update(overrides)
    return ExperimentPlan(**fields)


class TestExperimentPlan:
    @pytest.mark.parametrize("overrides", [
        {"repetitions": 5},
        {"sweep": [0, 2]},
        {"transport": "udp"},
        {"total_elements": 10, "model": ExecutionModel.DIRECT},
        {"total_elements": 10, "circuit": CircuitSpec(kind=WorkloadKind.PRODUCT)},
    ])
    def test_invalid(self, overrides):
        with pytest.raises(ValidationError):
            delegated_plan(**overrides)

    def test_load_yaml(self, tmp_path):
        path = tmp_path / "plan.yaml"
        path.write_text("model: direct\ncircuit:\n  kind: product\n  width: 4\nsweep: [3, 5]\n")
        plan = ExperimentPlan.load(path)
        assert plan.model == ExecutionModel.DIRECT
        assert plan.circuit.width == 4

    def test_load_errors(self, tmp_path):
        with pytest.raises(ConfigError):
            ExperimentPlan.load(tmp_path / "missing.yaml")
        bad = tmp_path / "bad.yaml"
        bad.write_text("model: sideways\n")
        with pytest.raises(ConfigError):
            ExperimentPlan.load(bad)


class TestSampleData:
    def test_pooled_split(self, np_rng):
        data = sample_data(delegated_plan(total_elements=10), 3, np_rng)
        assert [len(v) for v in data.values()] == [4, 3, 3]

    def test_values_in_range(self, np_rng):
        data = sample_data(delegated_plan(), 4, np_rng)
        assert all(0 <= v < 100 for values in data.values() for v in values)


class TestRunPlan:
    def test_delegated_sweep(self, tmp_path):
        rows = asyncio.run(run_plan(delegated_plan()))
        assert [r.clients for r in rows] == [1, 2, 4, 8]
        assert all(r.correct and r.parties == 3 for r in rows)
        assert len({r.rounds for r in rows}) == 1
        assert fit_scaling(rows, "client_bytes").slope == pytest.approx(1, abs=0.05)

        path = write_csv(rows, tmp_path / "out" / "sum.csv")
        frame = read_csv(path)
        assert list(frame.columns) == CSV_COLUMNS
        assert len(frame) == 4

        charts = emit_plots(rows, tmp_path / "charts")
        assert charts and all(p.exists() for p in charts)

    def test_pooled_elements(self):
        rows = asyncio.run(run_plan(delegated_plan(sweep=[1, 3], total_elements=12)))
        assert all(r.correct and r.array_size == 12 for r in rows)

    def test_direct_sweep(self):
        plan = ExperimentPlan(model=ExecutionModel.DIRECT, circuit=CircuitSpec(kind=WorkloadKind.PRODUCT, width=3),
                              sweep=[3, 4], transport="memory")
        rows = asyncio.run(run_plan(plan))
        assert [r.parties for r in rows] == [3, 4]
        assert all(r.correct and r.clients == 0 for r in rows)

    def test_caps(self):
        with pytest.raises(InvalidParameters):
            asyncio.run(run_plan(delegated_plan(sweep=[100])))
        with pytest.raises(InvalidParameters):
            asyncio.run(run_plan(delegated_plan(players=12)))

    def test_empty_frame(self):
        assert list(rows_frame([]).columns) == CSV_COLUMNS
