"""Command implementations"""

import logging
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import httpx
import numpy as np
from pydantic import BaseModel

from ..app.models import JobReport, ResourceDescription, SelectionPolicy
from ..app.orchestrator import App, KeyringTaskSigner
from ..bench.report import job_row, write_csv
from ..config import AppConfig
from ..dp.circuit_builder import pooled_histogram
from ..dp.mwem import SyntheticDistribution, mwem_plaintext
from ..errors import InvalidParameters
from ..fixtures import DataModel, generate_fixture, generate_values
from ..local import LocalDeployment
from ..mpc.protocols import ProtocolClass
from ..mpc.runner import JobResult, reconstruct_noise, run_delegated
from ..pod.auth import Keyring
from ..workloads import (
    CircuitSpec,
    MwemWorkload,
    WorkloadKind,
    WorkloadResult,
    build_circuit,
    encode_inputs,
    interpret_result,
    plaintext_result,
    results_match,
)

logger = logging.getLogger(__name__)


class Scenario(str, Enum):
    AVERAGE_WAGE = "average_wage"
    MWEM_SETTING1 = "mwem_setting1"
    MWEM_SETTING3 = "mwem_setting3"


def scenario_circuit(scenario: Scenario, providers: int, points_per_provider: int = 100) -> CircuitSpec:
    scenario = Scenario(scenario)
    if scenario == Scenario.AVERAGE_WAGE:
        return CircuitSpec(kind=WorkloadKind.AVERAGE_WAGE)
    if scenario == Scenario.MWEM_SETTING1:
        return CircuitSpec(kind=WorkloadKind.MWEM, mwem=MwemWorkload(
            setting=1, total_points=providers * points_per_provider))
    return CircuitSpec(kind=WorkloadKind.MWEM, mwem=MwemWorkload(setting=3, points_per_provider=points_per_provider))


def oracle_for(description: ResourceDescription, values: Dict[int, List[int]], report: JobReport) -> WorkloadResult:
    """Plaintext answer for the same data; MWEM replays the job's joint noise."""
    circuit = build_circuit(description.circuit, len(values))
    noise = reconstruct_noise(circuit, report.job) if description.circuit.kind == WorkloadKind.MWEM else None
    return plaintext_result(description.circuit, values, noise)


class DemoOutcome(BaseModel):
    report: JobReport
    oracle: WorkloadResult
    matched: bool


class DemoCommand:
    """End-to-end job on a deployment spawned in-process"""

    def __init__(self, scenario: Scenario, providers: int = 3, seed: int = 0,
                 incomes: Optional[Sequence[int]] = None, untrusted_app: bool = False,
                 config: Optional[AppConfig] = None, metrics_out: Optional[Path] = None):
        self.scenario = Scenario(scenario)
        self.providers = len(incomes) if incomes else providers
        self.seed = seed
        self.incomes = list(incomes) if incomes else None
        self.untrusted_app = untrusted_app
        self.config = config or AppConfig()
        self.metrics_out = metrics_out

    def values(self, circuit: CircuitSpec) -> Dict[int, List[int]]:
        if self.incomes is not None:
            if self.scenario != Scenario.AVERAGE_WAGE:
                raise InvalidParameters("Incomes apply to the average wage scenario")
            return {i: [int(v)] for i, v in enumerate(self.incomes)}
        model = DataModel.UNIFORM_INCOME if self.scenario == Scenario.AVERAGE_WAGE else DataModel.INTEGER_DATASET
        return generate_values(self.providers, model, circuit, self.seed)

    async def execute(self) -> DemoOutcome:
        circuit = scenario_circuit(self.scenario, self.providers)
        values = self.values(circuit)
        jobs = self.config.jobs
        async with LocalDeployment(self.providers, computation_agents=jobs.default_m,
                                   dealer_seed=jobs.dealer_seed, client_timeout=jobs.client_timeout,
                                   job_timeout=jobs.job_timeout) as deployment:
            description = await deployment.populate(values, circuit, m=jobs.default_m)
            if self.untrusted_app:
                await deployment.distrust_app(0)
            report = await deployment.run(description, self.seed)
        oracle = oracle_for(description, values, report)
        matched = results_match(report.result, oracle, report.job.modulus)
        if self.metrics_out:
            write_csv([job_row(report, build_circuit(circuit, self.providers), matched)], self.metrics_out)
        return DemoOutcome(report=report, oracle=oracle, matched=matched)


class AppRunCommand:
    """Run one job of a resource description against live services"""

    def __init__(self, description: ResourceDescription, keyring: Keyring, app_identity: str,
                 seed: int = 0, config: Optional[AppConfig] = None, metrics_out: Optional[Path] = None):
        self.description = description
        self.keyring = keyring
        self.app_identity = app_identity
        self.seed = seed
        self.config = config or AppConfig()
        self.metrics_out = metrics_out

    async def execute(self) -> JobReport:
        jobs = self.config.jobs
        async with httpx.AsyncClient(timeout=None) as http:
            app = App(self.keyring.get(self.app_identity), http, KeyringTaskSigner(self.keyring),
                      client_timeout=jobs.client_timeout, job_timeout=jobs.job_timeout)
            report = await app.run_job(self.description, self.seed)
        if self.metrics_out:
            circuit = build_circuit(self.description.circuit, len(self.description.entries))
            write_csv([job_row(report, circuit)], self.metrics_out)
        return report


class FixtureCommand:
    """Populate live Pods and write the matching resource description"""

    def __init__(self, providers: int, data_model: DataModel, circuit: CircuitSpec, seed: int,
                 pods: Sequence[str], keyring: Keyring, encryption_agents: Sequence[str],
                 computation_agents: Sequence[str], app: str, out: Path,
                 policy: SelectionPolicy = SelectionPolicy.SUBSET, m: int = 3,
                 requested_protocol: Optional[ProtocolClass] = None):
        self.providers = providers
        self.data_model = data_model
        self.circuit = circuit
        self.seed = seed
        self.pods = list(pods)
        self.keyring = keyring
        self.encryption_agents = list(encryption_agents)
        self.computation_agents = list(computation_agents)
        self.app = app
        self.out = out
        self.policy = policy
        self.m = m
        self.requested_protocol = requested_protocol

    async def execute(self) -> ResourceDescription:
        values = generate_values(self.providers, self.data_model, self.circuit, self.seed)
        async with httpx.AsyncClient(timeout=30.0) as http:
            description = await generate_fixture(
                http, self.keyring, self.pods, values, self.circuit, self.encryption_agents,
                self.computation_agents, self.app, policy=self.policy, m=self.m,
                requested_protocol=self.requested_protocol,
            )
        description.save(self.out)
        logger.info(f"Wrote resource description for {self.providers} providers to {self.out}")
        return description


class MwemOutcome(BaseModel):
    synthetic: List[float]
    max_error: float
    oracle_match: Optional[bool] = None
    job: Optional[JobResult] = None


class MwemCommand:
    """MWEM over synthetic provider data, in the clear or through delegated MPC"""

    def __init__(self, workload: MwemWorkload, providers: int, seed: int = 0, secure: bool = True,
                 players: int = 3, protocol: ProtocolClass = ProtocolClass.HONEST_MAJORITY_SEMI_HONEST,
                 transport: str = "tcp"):
        self.spec = CircuitSpec(kind=WorkloadKind.MWEM, mwem=workload)
        self.providers = providers
        self.seed = seed
        self.secure = secure
        self.players = players
        self.protocol = protocol
        self.transport = transport

    async def execute(self) -> MwemOutcome:
        mwem = self.spec.mwem
        values = generate_values(self.providers, DataModel.INTEGER_DATASET, self.spec, self.seed)
        histogram = pooled_histogram(values, mwem.bins, mwem.domain)
        cfg = mwem.config(self.providers)
        if not self.secure:
            dist = mwem_plaintext(histogram, cfg, np.random.default_rng(self.seed))
            return MwemOutcome(synthetic=dist.A, max_error=dist.max_error(cfg.queries, histogram))

        circuit = build_circuit(self.spec, self.providers)
        clients = {src: encode_inputs(self.spec, circuit, src, v) for src, v in values.items()}
        job = await run_delegated(circuit, self.players, clients, self.protocol,
                                  transport=self.transport, seed=self.seed)
        secure = interpret_result(self.spec, circuit, job.outputs)
        oracle = plaintext_result(self.spec, values, reconstruct_noise(circuit, job))
        dist = SyntheticDistribution(A=secure.synthetic, n=cfg.n)
        return MwemOutcome(synthetic=secure.synthetic, max_error=dist.max_error(cfg.queries, histogram),
                           oracle_match=results_match(secure, oracle, circuit.modulus), job=job)
