"""
Encryption agent.

Acts for one or more data providers: checks that the requesting App is one
the provider trusts, works out which protocol classes the provider accepts
for the chosen computation agents, and only then reads the provider's data
from its Pod and injects secret shares into the players.
"""

import logging
from typing import Callable, List, Optional

import httpx
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware

from ..api_models import HealthCheckResponse
from ..errors import (
    AppNotTrusted,
    CircuitHashMismatch,
    NoTrustedCA,
    PodMpcError,
    PodUnauthorized,
    ProtocolNotAllowed,
    SignatureInvalid,
    Unauthorized,
)
from ..mpc.circuit import Circuit
from ..mpc.node import ClientInjector, TcpClientLink, parse_address
from ..mpc.protocols import ProtocolClass, allowed_protocols
from ..mpc.transport import ClientLink
from ..net.http import add_exception_handlers, authenticate
from ..pod.auth import Identity, IdentityDirectory, RequestVerifier
from ..pod.client import PodClient, resolve_description
from ..pod.models import DataResource, PreferenceFile
from ..workloads import build_circuit, encode_inputs
from .event_log import EventLogInterface, create_event_log
from .models import AgentInfo, EncryptionReceipt, EncryptionTask
from .replay import ReplayCache

logger = logging.getLogger(__name__)

LinkFactory = Callable[[EncryptionTask], ClientLink]


def tcp_link_factory(task: EncryptionTask) -> ClientLink:
    return TcpClientLink([parse_address(ca.mpc_address) for ca in task.players()])


class EncryptionAgent:
    """
    Args:
        identity: The agent's own identity; Pods see requests signed with it
        directory: Identity to address mapping, used to relay provider keys
        http: Client for Pod access
        event_log: Ordered record of each job's pipeline steps
        enforce_protocol_locally: Reject a disallowed protocol here instead of
            leaving the check to the computation agents
        link_factory: Builds the data-plane link to the players
    """

    def __init__(self, identity: Identity, directory: IdentityDirectory, http: httpx.AsyncClient,
                 event_log: Optional[EventLogInterface] = None,
                 enforce_protocol_locally: bool = True,
                 link_factory: LinkFactory = tcp_link_factory,
                 replay: Optional[ReplayCache] = None):
        self.identity = identity
        self.directory = directory
        self.pods = PodClient(identity, http)
        self.event_log = event_log or create_event_log()
        self.enforce_protocol_locally = enforce_protocol_locally
        self.link_factory = link_factory
        self.replay = replay or ReplayCache()

    def info(self) -> AgentInfo:
        return AgentInfo(identity=self.identity.url, role="encryption", address=self.identity.address)

    async def handle_dispatch(self, task: EncryptionTask, requester: str) -> EncryptionReceipt:
        """
        Run the encryption pipeline for one provider of one job.

        Args:
            task: The dispatched task
            requester: Identity that signed the dispatch request

        Raises:
            AppNotTrusted: The App is not among the provider's trusted actors
            NoTrustedCA: None of the chosen CAs is trusted and the provider did not opt in
            ProtocolNotAllowed: Requested protocol outside the allowed list (local enforcement)
            PodUnauthorized: The Pod refused this agent read access
        """
        stage = "dispatch"
        try:
            if requester != task.app:
                raise SignatureInvalid(f"Dispatch signed by {requester} claims to come from App {task.app}")
            self.replay.check_and_remember((task.job_id, task.source))
            circuit = build_circuit(task.circuit_spec, task.providers)
            if circuit.circuit_hash() != task.circuit_hash:
                raise CircuitHashMismatch(f"Task circuit hash {task.circuit_hash[:12]} does not match the circuit built from its workload")
            self.event_log.record(task.job_id, "dispatch_received", task.provider, task.app)

            stage = "app_verification"
            _, actors = await resolve_description(task.data_url, self.pods)
            if task.app not in actors.trusted_apps:
                raise AppNotTrusted(f"App {task.app} is not a trusted actor of {task.provider}")
            self.event_log.record(task.job_id, "app_verified", task.provider)

            stage = "protocol_verification"
            allowed = await self._allowed_protocols(task)
            self.event_log.record(task.job_id, "protocol_checked", task.provider,
                                  ",".join(p.value for p in allowed))

            stage = "data_fetch"
            data = await self._fetch_data(task)
            self.event_log.record(task.job_id, "data_fetched", task.provider, f"{len(data.values)} values")

            stage = "share_injection"
            bytes_sent = await self._inject(task, circuit, data, allowed)
            self.event_log.record(task.job_id, "shares_injected", task.provider, f"{bytes_sent} bytes")
        except PodMpcError as e:
            e.stage = e.stage or stage
            e.provider = e.provider or task.provider
            self.event_log.record(task.job_id, "rejected", task.provider, e.code)
            logger.error(f"Job {task.job_id}: {e}")
            raise
        return EncryptionReceipt(job_id=task.job_id, source=task.source, provider=task.provider,
                                 allowed_protocols=allowed, bytes_sent=bytes_sent,
                                 events=self.event_log.names(task.job_id))

    async def _allowed_protocols(self, task: EncryptionTask) -> List[ProtocolClass]:
        prefs = await self.pods.get_json(task.preference_url, PreferenceFile)
        trusted = sum(1 for ca in task.cas if ca.url in prefs.trusted_computation_agents)
        allowed = allowed_protocols(trusted, len(task.cas), prefs.accept_untrusted_union, prefs.allowed_protocols)
        logger.info(f"Job {task.job_id}: {trusted}/{len(task.cas)} chosen CAs trusted by {task.provider}")
        if not allowed:
            raise NoTrustedCA(f"None of the {len(task.cas)} chosen CAs is trusted by {task.provider}")
        if self.enforce_protocol_locally and task.protocol not in allowed:
            raise ProtocolNotAllowed(
                f"{task.protocol.value} requested, {task.provider} allows {[p.value for p in allowed]}"
            )
        return allowed

    async def _fetch_data(self, task: EncryptionTask) -> DataResource:
        try:
            return await self.pods.get_json(task.data_url, DataResource)
        except Unauthorized as e:
            raise PodUnauthorized(f"Pod refused {self.identity.url} read access to {task.data_url}: {e.message}")

    async def _inject(self, task: EncryptionTask, circuit: Circuit, data: DataResource,
                      allowed: List[ProtocolClass]) -> int:
        values = encode_inputs(task.circuit_spec, circuit, task.source, data.values)
        injector = ClientInjector(
            task.job_id, task.source, task.circuit_hash, task.protocol.scheme(len(task.cas)), circuit.modulus,
            self.link_factory(task), seed=task.seed * 1_000_003 + task.source,
            provider=task.provider, public_key=self.directory.address_of(task.provider),
            allowed_protocols=[p.value for p in allowed],
        )
        return await injector.inject(values)


class EncryptionAgentAPI:
    """Main API class of an encryption agent."""

    def __init__(self, agent: EncryptionAgent, verifier: RequestVerifier):
        self.agent = agent
        self.verifier = verifier
        self.app = self._create_app()

    def _create_app(self) -> FastAPI:
        app = FastAPI(title="Encryption agent", description="Verifies Apps and injects secret shares",
                      version="1.0.0")
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
            return HealthCheckResponse(status="healthy", services={"encryption_agent": "healthy"})

        @app.get("/info", response_model=AgentInfo)
        async def info():
            return self.agent.info()

        @app.post("/dispatch", response_model=EncryptionReceipt)
        async def dispatch(request: Request):
            requester = await authenticate(request, self.verifier)
            task = EncryptionTask.model_validate_json(await request.body())
            return await self.agent.handle_dispatch(task, requester)


def create_app(agent: EncryptionAgent, verifier: Optional[RequestVerifier] = None) -> FastAPI:
    api = EncryptionAgentAPI(agent, verifier or RequestVerifier(agent.directory))
    return api.app
