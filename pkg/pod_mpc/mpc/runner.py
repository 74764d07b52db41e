"""
Running whole jobs: direct-decentralised and delegated-decentralised.

``LocalCluster`` hosts m player nodes on loopback TCP. The ``memory``
transport runs the same sessions over in-process queues; frames are encoded
identically, so byte and round counts agree with TCP runs.
"""

import asyncio
import hashlib
import logging
import time
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, Field

from ..core.dealer import InsecureTestDealer, PartyMaterial
from ..core.field import to_signed
from ..core.sharing import SharingScheme
from ..errors import InconsistentResults, InvalidParameters, PodMpcError, SpawnFailure
from .circuit import Circuit
from .metrics import PartyMetrics, RunMetrics
from .node import ClientInjector, JobSpec, PlayerNode, TcpClientLink, format_address, request_job, serve_job_control
from .noise import joint_noise_stream
from .protocols import ProtocolClass
from .reconnect import ReconnectionHandler
from .session import PlayerSession, noise_seed
from .transport import MemoryNetwork

logger = logging.getLogger(__name__)

TRANSPORTS = ("tcp", "memory")


def make_job_id(label: str, seed: int = 0) -> str:
    """Fixed-length (32 hex chars) job id so frame sizes do not depend on the label."""
    return hashlib.sha256(f"{label}:{seed}".encode()).hexdigest()[:32]


class JobResult(BaseModel):
    """Opened outputs of a job plus its metrics."""
    job_id: str
    modulus: int
    outputs: List[List[int]] = Field(description="Opened values per output gate")
    metrics: RunMetrics
    party_metrics: List[PartyMetrics] = Field(default_factory=list)
    noise_seeds: List[int] = Field(default_factory=list)

    @property
    def flat(self) -> List[int]:
        return [v for out in self.outputs for v in out]

    def signed(self) -> List[List[int]]:
        return [[to_signed(v, self.modulus) for v in out] for out in self.outputs]


def resolve_scheme(scheme: Union[SharingScheme, ProtocolClass, None], parties: int) -> SharingScheme:
    if scheme is None:
        return ProtocolClass.HONEST_MAJORITY_SEMI_HONEST.scheme(parties)
    if isinstance(scheme, ProtocolClass):
        return scheme.scheme(parties)
    if scheme.parties != parties:
        raise InvalidParameters(f"Scheme is for {scheme.parties} parties, job has {parties}")
    return scheme


def deal_for_job(circuit: Circuit, scheme: SharingScheme, job_id: str,
                 dealer: Optional[InsecureTestDealer] = None) -> List[PartyMaterial]:
    dealer = dealer or InsecureTestDealer(seed=0)
    return [m.model_copy(deep=True) for m in dealer.material_for_job(
        job_id, scheme, circuit.demand(scheme), circuit.modulus, circuit.fixed_point,
        circuit.magnitude_bits())]


def collect_outcomes(job_id: str, modulus: int, outputs: Sequence[List[List[int]]],
                     metrics: Sequence[PartyMetrics], seed: int, parties: int,
                     full_time: Optional[float] = None) -> JobResult:
    """
    Check that every player opened the same outputs and aggregate metrics.

    Raises:
        InconsistentResults: If two players disagree
    """
    first = outputs[0]
    for party, out in enumerate(outputs[1:], start=1):
        if out != first:
            raise InconsistentResults(f"Party {party} opened different outputs than party 0 in job {job_id}")
    return JobResult(
        job_id=job_id,
        modulus=modulus,
        outputs=first,
        metrics=RunMetrics.aggregate(list(metrics), full_time=full_time),
        party_metrics=sorted(metrics, key=lambda m: m.party_id),
        noise_seeds=[noise_seed(seed, job_id, p) for p in range(parties)],
    )


def reconstruct_noise(circuit: Circuit, result: JobResult) -> List[List[int]]:
    """Joint noise a finished job injected, re-derived from the players' seeds."""
    specs = [{"scale": circuit.gates[i].params["scale"], "width": circuit.gates[i].params.get("width", 1)}
             for i in circuit.noise_gates()]
    return joint_noise_stream(specs, len(result.noise_seeds), result.noise_seeds, circuit.fixed_point)


class LocalCluster:
    """
    m player nodes on loopback TCP.

    Jobs are submitted through CIRCUIT control frames; every node hosts many
    sessions at once.
    """

    def __init__(self, players: int, host: str = "127.0.0.1",
                 dealer: Optional[InsecureTestDealer] = None,
                 reconnect: Optional[ReconnectionHandler] = None):
        if players < 2:
            raise InvalidParameters(f"A cluster needs at least 2 players, got {players}")
        self.players = players
        self.host = host
        self.dealer = dealer or InsecureTestDealer(seed=0)
        self.reconnect = reconnect or ReconnectionHandler()
        self.nodes: List[PlayerNode] = []

    @property
    def addresses(self) -> List[Tuple[str, int]]:
        return [node.address for node in self.nodes]

    async def start(self) -> "LocalCluster":
        try:
            for _ in range(self.players):
                node = PlayerNode(self.host, 0, self.reconnect)
                await node.start()
                node.set_control_handler(lambda data, node=node: serve_job_control(node, data))
                self.nodes.append(node)
        except OSError as e:
            await self.stop()
            raise SpawnFailure(f"Could not start player nodes: {e}")
        logger.info(f"Local cluster of {self.players} players on {[format_address(a) for a in self.addresses]}")
        return self

    async def stop(self) -> None:
        await asyncio.gather(*(node.stop() for node in self.nodes), return_exceptions=True)
        self.nodes = []

    async def __aenter__(self) -> "LocalCluster":
        return await self.start()

    async def __aexit__(self, *exc) -> None:
        await self.stop()

    def job_specs(self, circuit: Circuit, scheme: SharingScheme, job_id: str, seed: int,
                  inputs: Optional[Dict[int, List[int]]] = None,
                  clients: Optional[List[int]] = None,
                  protocol: Optional[ProtocolClass] = None,
                  client_timeout: float = 30.0) -> List[JobSpec]:
        material = deal_for_job(circuit, scheme, job_id, self.dealer)
        peers = [format_address(a) for a in self.addresses]
        specs = []
        for party in range(self.players):
            own = {party: list(inputs[party])} if inputs is not None and party in inputs else {}
            specs.append(JobSpec(
                job_id=job_id, party_id=party, scheme=scheme.to_dict(), circuit=circuit,
                peers=peers, protocol=protocol, seed=seed, inputs=own, clients=clients,
                material=material[party], client_timeout=client_timeout,
            ))
        return specs

    async def submit(self, specs: List[JobSpec]) -> List:
        return await asyncio.gather(*(request_job(self.addresses[s.party_id], s, self.reconnect)
                                      for s in specs))

    async def run_direct(self, circuit: Circuit, inputs: Dict[int, List[int]],
                         scheme: Optional[SharingScheme] = None, job_id: Optional[str] = None,
                         seed: int = 0, protocol: Optional[ProtocolClass] = None) -> JobResult:
        scheme = resolve_scheme(scheme or protocol, self.players)
        job_id = job_id or make_job_id(f"direct:{circuit.circuit_hash()}", seed)
        start = time.perf_counter()
        outcomes = await self.submit(self.job_specs(circuit, scheme, job_id, seed, inputs=inputs,
                                                    protocol=protocol))
        return collect_outcomes(job_id, circuit.modulus, [o.outputs for o in outcomes],
                                [o.metrics for o in outcomes], seed, self.players,
                                time.perf_counter() - start)

    async def run_delegated(self, circuit: Circuit, client_data: Dict[int, List[int]],
                            scheme: Optional[SharingScheme] = None, job_id: Optional[str] = None,
                            seed: int = 0, protocol: Optional[ProtocolClass] = None,
                            client_timeout: float = 30.0) -> JobResult:
        scheme = resolve_scheme(scheme or protocol, self.players)
        job_id = job_id or make_job_id(f"delegated:{circuit.circuit_hash()}", seed)
        clients = sorted(client_data)
        specs = self.job_specs(circuit, scheme, job_id, seed, clients=clients, protocol=protocol,
                               client_timeout=client_timeout)
        start = time.perf_counter()
        players_task = asyncio.ensure_future(self.submit(specs))
        injectors = [
            ClientInjector(job_id, c, circuit.circuit_hash(), scheme, circuit.modulus,
                           TcpClientLink(self.addresses, self.reconnect), seed=seed * 1_000_003 + c)
            for c in clients
        ]
        try:
            await asyncio.gather(*(inj.inject(client_data[inj.client_id]) for inj in injectors))
        except PodMpcError:
            players_task.cancel()
            raise
        outcomes = await players_task
        return collect_outcomes(job_id, circuit.modulus, [o.outputs for o in outcomes],
                                [o.metrics for o in outcomes], seed, self.players,
                                time.perf_counter() - start)


async def _run_memory(circuit: Circuit, scheme: SharingScheme, job_id: str, seed: int,
                      dealer: Optional[InsecureTestDealer],
                      inputs: Optional[Dict[int, List[int]]] = None,
                      client_data: Optional[Dict[int, List[int]]] = None,
                      protocol: Optional[ProtocolClass] = None,
                      client_timeout: float = 30.0) -> JobResult:
    network = MemoryNetwork()
    material = deal_for_job(circuit, scheme, job_id, dealer)
    clients = sorted(client_data) if client_data is not None else None
    sessions = []
    for party in range(scheme.parties):
        own = {party: list(inputs[party])} if inputs is not None and party in inputs else {}
        sessions.append(PlayerSession(
            job_id, party, circuit, scheme, network.channel(job_id, party), protocol=protocol,
            material=material[party], seed=seed, inputs=own, clients=clients,
            client_timeout=client_timeout,
        ))
    start = time.perf_counter()
    tasks = [asyncio.ensure_future(s.evaluate()) for s in sessions]
    try:
        if client_data is not None:
            for c in clients:
                injector = ClientInjector(job_id, c, circuit.circuit_hash(), scheme, circuit.modulus,
                                          network.client_link(), seed=seed * 1_000_003 + c)
                await injector.inject(client_data[c])
        await asyncio.gather(*tasks)
    except PodMpcError:
        for task in tasks:
            task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)
        raise
    network.forget(job_id)
    outputs = [[s.outputs_by_gate[i] for i in circuit.output_gates()] for s in sessions]
    return collect_outcomes(job_id, circuit.modulus, outputs, [s.metrics for s in sessions], seed,
                            scheme.parties, time.perf_counter() - start)


async def run_direct(circuit: Circuit, providers: Sequence[Tuple[int, List[int]]],
                     scheme: Union[SharingScheme, ProtocolClass, None] = None,
                     transport: str = "tcp", seed: int = 0, job_id: Optional[str] = None,
                     dealer: Optional[InsecureTestDealer] = None) -> JobResult:
    """
    Direct-decentralised run: every provider is a computation party.

    Args:
        circuit: Circuit whose input sources are the party ids
        providers: (party id, local data) per provider
        scheme: Sharing scheme or protocol class (default honest-majority Shamir)
        transport: ``tcp`` (loopback cluster) or ``memory``
        seed: Job seed for share and noise randomness

    Returns:
        Opened outputs and metrics
    """
    inputs = {int(party): list(data) for party, data in providers}
    parties = len(inputs)
    protocol = scheme if isinstance(scheme, ProtocolClass) else None
    resolved = resolve_scheme(scheme, parties)
    job_id = job_id or make_job_id(f"direct:{circuit.circuit_hash()}", seed)
    if transport not in TRANSPORTS:
        raise InvalidParameters(f"Unknown transport {transport!r}")
    if transport == "memory":
        return await _run_memory(circuit, resolved, job_id, seed, dealer, inputs=inputs, protocol=protocol)
    async with LocalCluster(parties, dealer=dealer) as cluster:
        return await cluster.run_direct(circuit, inputs, resolved, job_id, seed, protocol)


async def run_delegated(circuit: Circuit, players: int, clients: Dict[int, List[int]],
                        scheme: Union[SharingScheme, ProtocolClass, None] = None,
                        transport: str = "tcp", seed: int = 0, job_id: Optional[str] = None,
                        dealer: Optional[InsecureTestDealer] = None,
                        client_timeout: float = 30.0) -> JobResult:
    """
    Delegated-decentralised run: ``players`` fixed parties, clients inject shares.

    Args:
        circuit: Circuit whose input sources are client ids
        players: Number of computation parties m
        clients: Input vector per client id
        scheme: Sharing scheme or protocol class (default honest-majority Shamir)
        transport: ``tcp`` (loopback cluster) or ``memory``
        seed: Job seed
        client_timeout: Seconds players wait for every client

    Raises:
        ClientTimeout: A client never injected
    """
    if not clients:
        raise InvalidParameters("Delegated runs need at least one client")
    protocol = scheme if isinstance(scheme, ProtocolClass) else None
    resolved = resolve_scheme(scheme, players)
    job_id = job_id or make_job_id(f"delegated:{circuit.circuit_hash()}", seed)
    if transport not in TRANSPORTS:
        raise InvalidParameters(f"Unknown transport {transport!r}")
    if transport == "memory":
        return await _run_memory(circuit, resolved, job_id, seed, dealer, client_data=clients,
                                 protocol=protocol, client_timeout=client_timeout)
    async with LocalCluster(players, dealer=dealer) as cluster:
        return await cluster.run_delegated(circuit, clients, resolved, job_id, seed, protocol,
                                           client_timeout)
