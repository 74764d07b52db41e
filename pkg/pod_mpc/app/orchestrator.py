"""
The App: turns a resource description into one delegated MPC job.

It reads the providers' preference files, chooses agents, dispatches a
computation task to every chosen computation agent and an encryption task
to every provider's encryption agent, then checks that all players opened
the same outputs.
"""

import asyncio
import logging
import time
from abc import ABC, abstractmethod
from typing import List, Optional, Sequence, Type, TypeVar

import httpx
from pydantic import BaseModel

from ..agents.models import (
    AbortRequest,
    AgentInfo,
    CAEndpoint,
    ComputationResult,
    ComputationTask,
    EncryptionReceipt,
    EncryptionTask,
    ExpectedClient,
    TaskSignature,
)
from ..errors import JobTimeout, PeerDisconnected, PodMpcError, SessionAborted
from ..mpc.runner import collect_outcomes, make_job_id
from ..net.http import raise_for_error
from ..pod.auth import Identity, Keyring, SignatureAuth, task_message
from ..pod.client import PodClient
from ..pod.models import PreferenceFile
from ..workloads import build_circuit, interpret_result
from .models import AgentSelection, JobReport, ResourceDescription
from .selection import select_agents

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


class TaskSigner(ABC):
    """Obtains each data provider's signature over a circuit hash."""

    @abstractmethod
    def sign(self, provider: str, circuit_hash: str) -> str:
        pass


class KeyringTaskSigner(TaskSigner):
    """Signs with provider keys held locally; used by the demo and tests."""

    def __init__(self, keyring: Keyring):
        self.keyring = keyring

    def sign(self, provider: str, circuit_hash: str) -> str:
        return self.keyring.get(provider).sign(task_message(circuit_hash))


class App:
    """
    Args:
        identity: The App's identity; Pods and agents see requests signed with it
        http: Client for Pods and agents
        signer: Source of the data providers' task signatures
        client_timeout: How long computation agents wait for encryption agents
        job_timeout: Bound on one whole job
    """

    def __init__(self, identity: Identity, http: httpx.AsyncClient, signer: TaskSigner,
                 client_timeout: float = 30.0, job_timeout: float = 300.0):
        self.identity = identity
        self.http = http
        self.signer = signer
        self.client_timeout = client_timeout
        self.job_timeout = job_timeout
        self.pods = PodClient(identity, http)

    async def run_job(self, description: ResourceDescription, seed: int = 0) -> JobReport:
        """
        Run the job a resource description asks for.

        Raises:
            EmptyIntersection / InsufficientUnion: No acceptable set of computation agents
            JobTimeout: The job did not finish within ``job_timeout``
            PodMpcError: The first agent-side rejection, attributed to its provider
        """
        try:
            return await asyncio.wait_for(self._run_job(description, seed), timeout=self.job_timeout)
        except asyncio.TimeoutError:
            raise JobTimeout(f"Job did not finish within {self.job_timeout}s", stage="computation")

    async def fetch_preferences(self, description: ResourceDescription) -> List[PreferenceFile]:
        return list(await asyncio.gather(*[
            self.pods.get_json(entry.preference_url, PreferenceFile) for entry in description.entries
        ]))

    async def select(self, description: ResourceDescription, seed: int = 0) -> AgentSelection:
        preferences = await self.fetch_preferences(description)
        return select_agents(
            [(entry.provider, prefs) for entry, prefs in zip(description.entries, preferences)],
            description.policy, description.m, seed=seed, requested_protocol=description.requested_protocol,
        )

    async def _run_job(self, description: ResourceDescription, seed: int) -> JobReport:
        started = time.perf_counter()
        selection = await self.select(description, seed)
        infos = await asyncio.gather(*[
            self._get(f"{url}/info", AgentInfo) for url in selection.computation_agents
        ])
        cas = [CAEndpoint(url=url, party_id=i, mpc_address=info.mpc_address)
               for i, (url, info) in enumerate(zip(selection.computation_agents, infos))]

        providers = len(description.entries)
        circuit = build_circuit(description.circuit, providers)
        circuit_hash = circuit.circuit_hash()
        job_id = make_job_id(description.description_hash(), seed)
        signatures = [TaskSignature(provider=entry.provider, signature=self.signer.sign(entry.provider, circuit_hash))
                      for entry in description.entries]
        logger.info(f"Job {job_id}: {providers} providers, CAs {selection.computation_agents}, "
                    f"protocol {selection.protocol.value}")

        clients = [ExpectedClient(source=i, provider=e.provider) for i, e in enumerate(description.entries)]
        computation_tasks = [
            ComputationTask(job_id=job_id, party_id=ca.party_id, circuit=circuit, protocol=selection.protocol,
                            peers=cas, clients=clients, signatures=signatures, app=self.identity.url,
                            seed=seed, client_timeout=self.client_timeout)
            for ca in cas
        ]
        encryption_tasks = [
            EncryptionTask(job_id=job_id, source=i, provider=entry.provider, data_url=entry.data_url,
                           preference_url=entry.preference_url, cas=cas, circuit_spec=description.circuit,
                           providers=providers, circuit_hash=circuit_hash, protocol=selection.protocol,
                           app=self.identity.url, seed=seed)
            for i, entry in enumerate(description.entries)
        ]

        ca_calls = [asyncio.create_task(self._post(f"{ca.url}/dispatch", task, ComputationResult))
                    for ca, task in zip(cas, computation_tasks)]
        try:
            receipts = await self._dispatch_encryption(description, selection, encryption_tasks)
        except PodMpcError as e:
            await self._abort(cas, job_id, e)
            await asyncio.gather(*ca_calls, return_exceptions=True)
            raise
        except BaseException:
            for call in ca_calls:
                call.cancel()
            raise

        done, pending = await asyncio.wait(ca_calls, return_when=asyncio.FIRST_EXCEPTION)
        if pending:
            first = next(call.exception() for call in done if call.exception() is not None)
            await self._abort(cas, job_id, first)
            await asyncio.gather(*pending, return_exceptions=True)
        failures = [call.exception() for call in ca_calls if call.exception() is not None]
        if failures:
            raise _root_cause(failures)
        results: List[ComputationResult] = [call.result() for call in ca_calls]

        job = collect_outcomes(job_id, circuit.modulus, [r.outputs for r in results], [r.metrics for r in results],
                               seed, len(cas), full_time=time.perf_counter() - started)
        logger.info(f"Job {job_id} finished in {job.metrics.full_time:.3f}s, {job.metrics.rounds} rounds")
        return JobReport(job_id=job_id, circuit_hash=circuit_hash, selection=selection,
                         result=interpret_result(description.circuit, circuit, job.outputs),
                         job=job, receipts=receipts)

    async def _dispatch_encryption(self, description: ResourceDescription, selection: AgentSelection,
                                   tasks: Sequence[EncryptionTask]) -> List[EncryptionReceipt]:
        outcomes = await asyncio.gather(*[
            self._post(f"{selection.encryption_agents[entry.provider]}/dispatch", task, EncryptionReceipt)
            for entry, task in zip(description.entries, tasks)
        ], return_exceptions=True)
        for outcome in outcomes:
            if isinstance(outcome, BaseException):
                raise outcome
        return list(outcomes)

    async def _abort(self, cas: Sequence[CAEndpoint], job_id: str, error: BaseException) -> None:
        logger.warning(f"Job {job_id} failed, aborting players: {error}")
        if isinstance(error, PodMpcError):
            request = AbortRequest(job_id=job_id, code=error.code, message=error.message, provider=error.provider)
        else:
            request = AbortRequest(job_id=job_id, message=str(error))
        results = await asyncio.gather(*[
            self._post(f"{ca.url}/abort", request, None) for ca in cas
        ], return_exceptions=True)
        for ca, result in zip(cas, results):
            if isinstance(result, BaseException):
                logger.warning(f"Could not abort {ca.url}: {result}")

    async def _get(self, url: str, model: Type[ModelT]) -> ModelT:
        try:
            response = await self.http.get(url)
        except httpx.TransportError as e:
            raise PeerDisconnected(f"Agent {url} unreachable: {e}", stage="dispatch")
        raise_for_error(response)
        return model.model_validate_json(response.content)

    async def _post(self, url: str, body: BaseModel, model: Optional[Type[ModelT]]) -> Optional[ModelT]:
        try:
            response = await self.http.post(url, content=body.model_dump_json().encode(),
                                            headers={"content-type": "application/json"},
                                            auth=SignatureAuth(self.identity))
        except httpx.TransportError as e:
            raise PeerDisconnected(f"Agent {url} unreachable: {e}", stage="dispatch")
        raise_for_error(response)
        return model.model_validate_json(response.content) if model else None


def _root_cause(failures: Sequence[BaseException]) -> BaseException:
    """The originating error; peers of the failing player only report SessionAborted."""
    for failure in failures:
        if not isinstance(failure, SessionAborted):
            return failure
    return failures[0]
