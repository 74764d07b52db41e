"""
Workloads a job can run.

A ``CircuitSpec`` is the declarative part of a resource description. The App
and every encryption agent build the same circuit from it, so the circuit
hash the providers sign is reproducible on both sides; the agent also uses
it to turn raw Pod data into the input vector the circuit expects.
"""

import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .core.field import to_signed
from .dp.circuit_builder import (
    MWEM_FIXED_POINT,
    MwemSetting,
    build_mwem_circuit,
    client_inputs,
    decode_releases,
    pooled_histogram,
    synthetic_from_outputs,
)
from .dp.mwem import MwemConfig, NoisyMaxRelease, mwem_noisy_max_oracle
from .dp.queries import random_queries
from .errors import InvalidParameters
from .mpc.circuit import Circuit
from .mpc.circuits import (
    ElementwiseOp,
    average_wage_circuit,
    elementwise_op_sum_circuit,
    mean_from_aggregate,
    product_circuit,
    split_evenly,
    sum_circuit,
)

logger = logging.getLogger(__name__)


class WorkloadKind(str, Enum):
    SUM = "sum"
    PRODUCT = "product"
    ELEMENTWISE_OP_SUM = "elementwise_op_sum"
    AVERAGE_WAGE = "average_wage"
    MWEM = "mwem"


class MwemWorkload(BaseModel):
    """MWEM parameters as they appear in a resource description."""
    setting: int = Field(default=3, ge=1, le=3, description="1/2 bin inside MPC, 3 bins at the client")
    bins: int = Field(default=10, ge=1)
    queries: int = Field(default=60, ge=1, description="Number of random linear queries")
    query_seed: int = Field(default=0, description="Seed of the random query set")
    iterations: int = Field(default=30, ge=1)
    epsilon: float = Field(default=1.0, gt=0)
    points_per_provider: int = Field(default=100, ge=1, description="Points each provider holds (settings 2 and 3)")
    total_points: Optional[int] = Field(default=None, ge=1, description="Points across all providers (setting 1)")
    domain: Tuple[int, int] = (0, 100)
    average_output: bool = False

    @model_validator(mode="after")
    def _check(self) -> "MwemWorkload":
        if self.setting == 1 and self.total_points is None:
            raise ValueError("Setting 1 fixes the total number of points; set total_points")
        if self.domain[1] <= self.domain[0]:
            raise ValueError(f"Empty domain {self.domain}")
        return self

    @property
    def mode(self) -> MwemSetting:
        return MwemSetting.from_number(self.setting)

    def points(self, providers: int) -> List[int]:
        """Points held by each of ``providers`` providers."""
        if self.setting == 1:
            return split_evenly(self.total_points, providers)
        return [self.points_per_provider] * providers

    def config(self, providers: int) -> MwemConfig:
        rng = np.random.default_rng(self.query_seed)
        return MwemConfig(
            queries=random_queries(self.queries, self.bins, rng),
            iterations=self.iterations,
            epsilon=self.epsilon,
            n=sum(self.points(providers)),
            bins=self.bins,
            average_output=self.average_output,
        )


class CircuitSpec(BaseModel):
    kind: WorkloadKind
    width: int = Field(default=1, ge=1, description="Array size per provider (sum, product, elementwise)")
    op: ElementwiseOp = ElementwiseOp.MUL
    mwem: Optional[MwemWorkload] = None

    @model_validator(mode="after")
    def _mwem_params(self) -> "CircuitSpec":
        if self.kind == WorkloadKind.MWEM and self.mwem is None:
            self.mwem = MwemWorkload()
        return self


class WorkloadResult(BaseModel):
    """Interpreted output of a finished job."""
    kind: WorkloadKind
    values: List[int] = Field(default_factory=list, description="Signed opened outputs")
    mean: Optional[float] = None
    synthetic: Optional[List[float]] = Field(default=None, description="MWEM A_T")
    releases: Optional[List[NoisyMaxRelease]] = None


def build_circuit(spec: CircuitSpec, providers: int) -> Circuit:
    """Circuit for ``providers`` input sources, numbered in resource-description order."""
    if providers < 1:
        raise InvalidParameters("A job needs at least one provider")
    sources = list(range(providers))
    if spec.kind == WorkloadKind.SUM:
        return sum_circuit(sources, spec.width)
    if spec.kind == WorkloadKind.PRODUCT:
        return product_circuit(sources, spec.width)
    if spec.kind == WorkloadKind.ELEMENTWISE_OP_SUM:
        return elementwise_op_sum_circuit(sources, spec.width, spec.op)
    if spec.kind == WorkloadKind.AVERAGE_WAGE:
        return average_wage_circuit(sources)
    mwem = spec.mwem
    return build_mwem_circuit(mwem.config(providers), sources, mwem.mode,
                              mwem.points(providers), mwem.domain, MWEM_FIXED_POINT)


def encode_inputs(spec: CircuitSpec, circuit: Circuit, source: int, values: Sequence[int]) -> List[int]:
    """
    The input vector one provider injects, from the values in its Pod.

    Raises:
        InvalidParameters: The data does not fit the circuit
        OutOfDomain: An MWEM point lies outside the domain
    """
    expected = circuit.input_widths().get(source)
    if expected is None:
        raise InvalidParameters(f"Circuit {circuit.name} has no input source {source}")
    if spec.kind == WorkloadKind.AVERAGE_WAGE:
        if len(values) != 1:
            raise InvalidParameters(f"Average wage expects one wage per provider, got {len(values)} values")
        encoded = [int(values[0]), 1]
    elif spec.kind == WorkloadKind.MWEM:
        encoded = client_inputs(spec.mwem.mode, values, spec.mwem.bins, spec.mwem.domain)
    else:
        encoded = [int(v) for v in values]
    if len(encoded) != expected:
        raise InvalidParameters(f"Source {source} provides {len(encoded)} inputs, circuit expects {expected}")
    return encoded


def interpret_result(spec: CircuitSpec, circuit: Circuit, outputs: Sequence[Sequence[int]]) -> WorkloadResult:
    """Turn opened field outputs into the workload's answer."""
    values = [to_signed(v, circuit.modulus) for out in outputs for v in out]
    result = WorkloadResult(kind=spec.kind, values=values)
    if spec.kind == WorkloadKind.AVERAGE_WAGE:
        result.mean = mean_from_aggregate(values)
    elif spec.kind == WorkloadKind.MWEM:
        result.releases = decode_releases(circuit, outputs)
        result.synthetic = synthetic_from_outputs(circuit, outputs, spec.mwem.average_output).A
    return result


def plaintext_result(spec: CircuitSpec, data: Dict[int, Sequence[int]],
                     noise: Optional[Sequence[Sequence[int]]] = None) -> WorkloadResult:
    """
    Evaluate the workload in the clear.

    Args:
        spec: Workload
        data: Raw Pod values per source id
        noise: MWEM only, the joint noise the secure run drew (see ``reconstruct_noise``)
    """
    sources = sorted(data)
    if spec.kind == WorkloadKind.MWEM:
        if noise is None:
            raise InvalidParameters("The MWEM oracle replays the secure run's noise; pass it in")
        cfg = spec.mwem.config(len(sources))
        histogram = pooled_histogram(data, spec.mwem.bins, spec.mwem.domain)
        releases, dist = mwem_noisy_max_oracle(histogram, cfg, MWEM_FIXED_POINT, noise)
        return WorkloadResult(kind=spec.kind, values=[v for r in releases for v in (r.index, r.measurement)],
                              synthetic=dist.A, releases=releases)
    if spec.kind == WorkloadKind.AVERAGE_WAGE:
        total = sum(int(data[s][0]) for s in sources)
        return WorkloadResult(kind=spec.kind, values=[total, len(sources)], mean=total / len(sources))
    arrays = [np.asarray(data[s], dtype=object) for s in sources]
    if spec.kind == WorkloadKind.SUM:
        return WorkloadResult(kind=spec.kind, values=[int(sum(int(a.sum()) for a in arrays))])
    combined = arrays[0]
    for a in arrays[1:]:
        combined = combined * a if spec.kind == WorkloadKind.PRODUCT or spec.op == ElementwiseOp.MUL else combined + a
    if spec.kind == WorkloadKind.PRODUCT:
        return WorkloadResult(kind=spec.kind, values=[int(v) for v in combined])
    return WorkloadResult(kind=spec.kind, values=[int(combined.sum())])


def results_match(secure: WorkloadResult, oracle: WorkloadResult, modulus: int,
                  tolerance: float = 2 ** -10) -> bool:
    """Exact match on opened values; MWEM A_T within ``tolerance`` relative error per bin."""
    if _normalized(secure, modulus) != _normalized(oracle, modulus):
        return False
    if secure.synthetic is None or oracle.synthetic is None:
        return True
    a, b = np.asarray(secure.synthetic), np.asarray(oracle.synthetic)
    return bool(np.all(np.abs(a - b) <= tolerance * np.maximum(np.abs(b), 1.0)))


def _normalized(result: WorkloadResult, modulus: int) -> List[int]:
    return [to_signed(v % modulus, modulus) for v in result.values]

