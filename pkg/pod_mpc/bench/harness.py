"""
Scalability harness.

Runs every sweep point of an ``ExperimentPlan`` through the MPC runner, one
job at a time, checks each job against the plaintext oracle and averages
the repetitions into a ``BenchRow``.
"""

import asyncio
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidParameters, JobTimeout
from ..mpc.circuit import Circuit
from ..mpc.circuits import ElementwiseOp, pooled_op_sum_circuit, split_evenly
from ..mpc.runner import JobResult, reconstruct_noise, run_delegated, run_direct
from ..workloads import (
    WorkloadKind,
    WorkloadResult,
    build_circuit,
    encode_inputs,
    interpret_result,
    plaintext_result,
    results_match,
)
from .plan import BenchRow, ExecutionModel, ExperimentPlan

logger = logging.getLogger(__name__)

VALUE_RANGE = (0, 100)


def sample_data(plan: ExperimentPlan, sources: int, rng: np.random.Generator) -> Dict[int, List[int]]:
    """Raw Pod-style values per source for one run."""
    spec = plan.circuit
    if plan.total_elements is not None:
        widths = split_evenly(plan.total_elements, sources)
    elif spec.kind == WorkloadKind.AVERAGE_WAGE:
        widths = [1] * sources
    elif spec.kind == WorkloadKind.MWEM:
        widths = spec.mwem.points(sources)
    else:
        widths = [spec.width] * sources
    low, high = spec.mwem.domain if spec.kind == WorkloadKind.MWEM else VALUE_RANGE
    return {src: [int(v) for v in rng.integers(low, high, size=w)] for src, w in enumerate(widths)}


def _circuit_for(plan: ExperimentPlan, data: Dict[int, List[int]]) -> Circuit:
    if plan.total_elements is not None:
        op = ElementwiseOp.ADD if plan.circuit.kind == WorkloadKind.SUM else plan.circuit.op
        return pooled_op_sum_circuit({src: len(values) for src, values in data.items()}, op)
    return build_circuit(plan.circuit, len(data))


def _pooled_oracle(plan: ExperimentPlan, data: Dict[int, List[int]]) -> WorkloadResult:
    pooled = [v for src in sorted(data) for v in data[src]]
    squared = plan.circuit.kind != WorkloadKind.SUM and plan.circuit.op == ElementwiseOp.MUL
    return WorkloadResult(kind=plan.circuit.kind, values=[sum(v * v if squared else v for v in pooled)])


def check_result(plan: ExperimentPlan, circuit: Circuit, data: Dict[int, List[int]], result: JobResult) -> bool:
    """Whether a finished job agrees with the plaintext evaluation of the same data."""
    secure = interpret_result(plan.circuit, circuit, result.outputs)
    if plan.total_elements is not None:
        oracle = _pooled_oracle(plan, data)
    else:
        noise = reconstruct_noise(circuit, result) if plan.circuit.kind == WorkloadKind.MWEM else None
        oracle = plaintext_result(plan.circuit, data, noise)
    return results_match(secure, oracle, circuit.modulus)


async def run_point(plan: ExperimentPlan, point: int, seed: int) -> Tuple[Circuit, JobResult, bool]:
    """One job of a sweep point; returns (circuit, job result, oracle match)."""
    data = sample_data(plan, point, np.random.default_rng(seed))
    circuit = _circuit_for(plan, data)
    encoded = {src: encode_inputs(plan.circuit, circuit, src, values) for src, values in data.items()}
    if plan.model == ExecutionModel.DIRECT:
        run = run_direct(circuit, sorted(encoded.items()), plan.protocol, transport=plan.transport, seed=seed)
    else:
        run = run_delegated(circuit, plan.players, encoded, plan.protocol, transport=plan.transport, seed=seed)
    try:
        result = await asyncio.wait_for(run, timeout=plan.job_timeout)
    except asyncio.TimeoutError:
        raise JobTimeout(f"Sweep point {point} did not finish within {plan.job_timeout}s")
    return circuit, result, check_result(plan, circuit, data, result)


def _row(plan: ExperimentPlan, point: int, circuit: Circuit, results: Sequence[JobResult],
         correct: bool) -> BenchRow:
    first = results[0].metrics
    spec = plan.circuit
    return BenchRow(
        model=plan.model,
        circuit=circuit.name,
        op=spec.op.value if spec.kind == WorkloadKind.ELEMENTWISE_OP_SUM else "",
        array_size=plan.total_elements or spec.width,
        parties=point if plan.model == ExecutionModel.DIRECT else plan.players,
        clients=point if plan.model == ExecutionModel.DELEGATED else 0,
        protocol=plan.protocol.value,
        full_time_s=float(np.mean([r.metrics.full_time for r in results])),
        comp_time_s=float(np.mean([r.metrics.comp_time for r in results])),
        rounds=first.rounds,
        bytes_global=first.bytes_global,
        bytes_p0=first.bytes_sent_per_party[0] if first.bytes_sent_per_party else 0,
        client_bytes=first.client_bytes,
        gates=circuit.cost_profile().player_side_gates,
        runs=len(results),
        correct=correct,
    )


async def run_plan(plan: ExperimentPlan, max_clients: int = 64, max_players: int = 9) -> List[BenchRow]:
    """
    Run a plan, one averaged row per sweep point.

    Raises:
        InvalidParameters: A sweep point exceeds the configured caps
        SpawnFailure: Player nodes could not be started
        JobTimeout: A job exceeded the plan's timeout
    """
    cap = max_clients if plan.model == ExecutionModel.DELEGATED else max_players
    for point in plan.sweep:
        if point > cap:
            raise InvalidParameters(f"Sweep point {point} exceeds the {plan.model.value} cap of {cap}")
    if plan.model == ExecutionModel.DELEGATED and plan.players > max_players:
        raise InvalidParameters(f"{plan.players} players exceed the cap of {max_players}")

    rows = []
    for point in plan.sweep:
        results: List[JobResult] = []
        correct = True
        circuit: Optional[Circuit] = None
        for seed in plan.seeds:
            for rep in range(plan.repetitions):
                circuit, result, ok = await run_point(plan, point, seed * 1_000 + rep)
                results.append(result)
                correct = correct and ok
        if not correct:
            logger.error(f"Sweep point {point} disagrees with the plaintext oracle")
        row = _row(plan, point, circuit, results, correct)
        logger.info(f"{plan.model.value} {row.circuit} point={point}: full={row.full_time_s:.3f}s "
                    f"rounds={row.rounds} bytes={row.bytes_global}")
        rows.append(row)
    return rows
