"""
Computation agent.

Hosts a player node and runs one player session per dispatched
computation task. Before any received share is decoded it checks that every
data provider signed the circuit and that the negotiated protocol is within
every provider's allowed list, as relayed by the encryption agents.
"""

import asyncio
import logging
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware

from ..api_models import HealthCheckResponse
from ..errors import (
    BadTaskSignature,
    PodMpcError,
    ProtocolOutsideAllowedList,
    SignatureInvalid,
    error_from_dict,
)
from ..mpc.node import JobSpec, PlayerNode, format_address
from ..mpc.session import PlayerSession
from ..net.http import add_exception_handlers, authenticate
from ..pod.auth import Identity, IdentityDirectory, RequestVerifier, verify_task_signature
from .dealer_service import LocalMaterialSource, MaterialSource
from .event_log import EventLogInterface, create_event_log
from .models import AbortRequest, AgentInfo, ComputationResult, ComputationTask
from .replay import ReplayCache

logger = logging.getLogger(__name__)


class ComputationAgent:
    """
    Args:
        identity: The agent's identity
        directory: Known identities; a provider listed here must sign with its registered key
        node: Player node serving the MPC data plane
        material: Source of correlated randomness
        event_log: Ordered record of each job's steps
    """

    def __init__(self, identity: Identity, directory: IdentityDirectory, node: PlayerNode,
                 material: Optional[MaterialSource] = None,
                 event_log: Optional[EventLogInterface] = None,
                 replay: Optional[ReplayCache] = None):
        self.identity = identity
        self.directory = directory
        self.node = node
        self.material = material or LocalMaterialSource()
        self.event_log = event_log or create_event_log()
        self.replay = replay or ReplayCache()
        self._start_lock = asyncio.Lock()
        self._started = False

    @property
    def started(self) -> bool:
        return self._started

    async def start(self) -> None:
        async with self._start_lock:
            if not self._started:
                await self.node.start()
                self._started = True

    async def stop(self) -> None:
        if self._started:
            await self.node.stop()
            self._started = False

    async def info(self) -> AgentInfo:
        await self.start()
        return AgentInfo(identity=self.identity.url, role="computation", address=self.identity.address,
                         mpc_address=format_address(self.node.address))

    async def handle_dispatch(self, task: ComputationTask, requester: str) -> ComputationResult:
        """
        Run this agent's player for one job.

        Raises:
            BadTaskSignature: A provider signature is missing, forged or made with another key
            ProtocolOutsideAllowedList: Some provider does not accept the negotiated protocol
            PoolExhausted: The dealt material ran out
            PeerDisconnected: Another player went away
        """
        stage = "dispatch"
        try:
            if requester != task.app:
                raise SignatureInvalid(f"Dispatch signed by {requester} claims to come from App {task.app}")
            self.replay.check_and_remember(task.job_id)
            await self.start()
            circuit_hash = task.circuit.circuit_hash()
            self.event_log.record(task.job_id, "dispatch_received", detail=circuit_hash[:12])
            for client in task.clients:
                if task.signature_of(client.provider) is None:
                    raise BadTaskSignature(f"No task signature from {client.provider}", provider=client.provider)

            stage = "preprocessing"
            scheme = task.protocol.scheme(len(task.peers))
            material = await self.material.party_material(task.job_id, task.party_id, scheme, task.circuit)

            stage = "client_collection"
            spec = JobSpec(
                job_id=task.job_id, party_id=task.party_id, scheme=scheme.to_dict(), circuit=task.circuit,
                peers=[p.mpc_address for p in sorted(task.peers, key=lambda p: p.party_id)],
                protocol=task.protocol, seed=task.seed, clients=[c.source for c in task.clients],
                material=material, client_timeout=task.client_timeout,
            )
            session = self.node.open_session(spec)
            try:
                await session.prepare()
                stage = "task_verification"
                await self._verify_clients(task, session, circuit_hash)
                self.event_log.record(task.job_id, "signatures_verified")
                stage = "computation"
                outputs = await session.run()
            finally:
                await session.channel.close()
        except PodMpcError as e:
            e.stage = e.stage or stage
            self.event_log.record(task.job_id, "rejected", e.provider, e.code)
            logger.error(f"Job {task.job_id} party {task.party_id}: {e}")
            raise
        self.event_log.record(task.job_id, "outputs_opened")
        return ComputationResult(job_id=task.job_id, party_id=task.party_id, circuit_hash=circuit_hash,
                                 outputs=outputs, metrics=session.metrics)

    async def _verify_clients(self, task: ComputationTask, session: PlayerSession, circuit_hash: str) -> None:
        try:
            for client in task.clients:
                handshake = session.client_handshakes[client.source]
                if handshake.provider != client.provider:
                    raise BadTaskSignature(
                        f"Source {client.source} injected for {handshake.provider}, task expects {client.provider}",
                        provider=client.provider,
                    )
                registered = self.directory.address_of(client.provider)
                key = handshake.public_key
                if not key or (registered is not None and registered.lower() != key.lower()):
                    raise BadTaskSignature(f"Relayed key of {client.provider} is not its registered key",
                                           provider=client.provider)
                if not verify_task_signature(circuit_hash, task.signature_of(client.provider), key):
                    raise BadTaskSignature(f"Signature of {client.provider} does not cover this circuit",
                                           provider=client.provider)
                if task.protocol.value not in handshake.allowed_protocols:
                    raise ProtocolOutsideAllowedList(
                        f"{task.protocol.value} is outside the list relayed for {client.provider}: "
                        f"{handshake.allowed_protocols}",
                        provider=client.provider,
                    )
        except PodMpcError as e:
            await session.abort(e)
            raise

    def abort(self, request: AbortRequest) -> None:
        """Fail a running session, e.g. because an encryption agent rejected the job."""
        error = error_from_dict(request.model_dump())
        logger.warning(f"Aborting job {request.job_id}: {error}")
        self.event_log.record(request.job_id, "aborted", request.provider, request.code)
        self.node.mailbox(request.job_id).fail(error)


class ComputationAgentAPI:
    """Main API class of a computation agent."""

    def __init__(self, agent: ComputationAgent, verifier: RequestVerifier):
        self.agent = agent
        self.verifier = verifier
        self.app = self._create_app()

    def _create_app(self) -> FastAPI:

        @asynccontextmanager
        async def lifespan(app: FastAPI):
            await self.agent.start()
            yield
            await self.agent.stop()

        app = FastAPI(title="Computation agent", description="Runs MPC player sessions",
                      version="1.0.0", lifespan=lifespan)
        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_credentials=True,
            allow_methods=["*"],
            allow_headers=["*"],
        )
        self._add_routes(app)
        self._add_exception_handlers(app)
        return app

    def _add_exception_handlers(self, app: FastAPI):
        add_exception_handlers(app)

    def _add_routes(self, app: FastAPI):

        @app.get("/health", response_model=HealthCheckResponse)
        async def health_check():
            node_status = "listening" if self.agent.started else "not started"
            return HealthCheckResponse(status="healthy", services={"player_node": node_status})

        @app.get("/info", response_model=AgentInfo)
        async def info():
            return await self.agent.info()

        @app.post("/dispatch", response_model=ComputationResult)
        async def dispatch(request: Request):
            requester = await authenticate(request, self.verifier)
            task = ComputationTask.model_validate_json(await request.body())
            return await self.agent.handle_dispatch(task, requester)

        @app.post("/abort")
        async def abort(request: Request):
            await authenticate(request, self.verifier)
            self.agent.abort(AbortRequest.model_validate_json(await request.body()))
            return {"aborted": True}


def create_app(agent: ComputationAgent, verifier: Optional[RequestVerifier] = None) -> FastAPI:
    api = ComputationAgentAPI(agent, verifier or RequestVerifier(agent.directory))
    return api.app
