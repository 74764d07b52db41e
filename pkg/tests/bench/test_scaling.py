"""Growth shapes of the two execution models, measured end to end."""

import asyncio

import pytest

from pod_mpc.bench.fit import fit_scaling
from pod_mpc.bench.harness import run_plan
from pod_mpc.bench.plan import ExecutionModel, ExperimentPlan
from pod_mpc.mpc.circuits import ElementwiseOp
from pod_mpc.workloads import CircuitSpec, MwemWorkload, WorkloadKind, build_circuit


def sweep(**fields):
    return asyncio.run(run_plan(ExperimentPlan(transport="memory", **fields)))


@pytest.mark.slow
class TestDelegatedScaling:
    CLIENTS = [8, 16, 32, 64]

    def test_player_traffic_fixed_with_pooled_data(self):
        rows = sweep(model=ExecutionModel.DELEGATED, sweep=self.CLIENTS, total_elements=256,
                     circuit=CircuitSpec(kind=WorkloadKind.ELEMENTWISE_OP_SUM, op=ElementwiseOp.MUL))
        assert all(r.correct for r in rows)
        assert len({r.rounds for r in rows}) == 1
        assert len({r.bytes_global for r in rows}) == 1

    def test_client_traffic_linear(self):
        rows = sweep(model=ExecutionModel.DELEGATED, sweep=self.CLIENTS,
                     circuit=CircuitSpec(kind=WorkloadKind.SUM, width=4))
        fit = fit_scaling(rows, "client_bytes")
        assert fit.slope == pytest.approx(1.0, abs=0.05)
        assert fit.r_squared >= 0.99


@pytest.mark.slow
class TestDirectScaling:
    PLAYERS = [3, 5, 7, 9]

    def test_sum_quadratic(self):
        rows = sweep(model=ExecutionModel.DIRECT, sweep=self.PLAYERS, circuit=CircuitSpec(kind=WorkloadKind.SUM, width=4))
        assert all(r.correct for r in rows)
        assert fit_scaling(rows, "bytes_global").slope == pytest.approx(2.0, abs=0.3)

    def test_multiplication_cubic(self):
        rows = sweep(model=ExecutionModel.DIRECT, sweep=self.PLAYERS,
                     circuit=CircuitSpec(kind=WorkloadKind.ELEMENTWISE_OP_SUM, op=ElementwiseOp.MUL, width=4))
        assert all(r.correct for r in rows)
        assert fit_scaling(rows, "bytes_global").slope == pytest.approx(3.0, abs=0.4)


class TestClientBinningAdvantage:
    def test_gate_count(self):
        def gates(setting: int) -> int:
            workload = MwemWorkload(setting=setting, points_per_provider=100,
                                    total_points=1600 if setting == 1 else None)
            circuit = build_circuit(CircuitSpec(kind=WorkloadKind.MWEM, mwem=workload), 16)
            return circuit.cost_profile().player_side_gates

        client_binned, mpc_binned = gates(3), gates(1)
        assert mpc_binned >= 10 * client_binned
