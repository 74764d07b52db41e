"""
A complete deployment inside one process.

Pods, encryption agents and computation agents are FastAPI apps mounted on a
``ServiceMesh``; the computation agents' player nodes listen on loopback TCP,
so the MPC data plane is the same one separate processes would use.
"""

import logging
from typing import Dict, List, Optional, Sequence, Tuple

from .agents.computation_agent import ComputationAgent, ComputationAgentAPI
from .agents.dealer_service import LocalMaterialSource
from .agents.encryption_agent import EncryptionAgent, EncryptionAgentAPI
from .agents.event_log import InMemoryEventLog
from .app.models import JobReport, ResourceDescription, SelectionPolicy
from .app.orchestrator import App, KeyringTaskSigner
from .core.dealer import InsecureTestDealer
from .fixtures import ProviderFixture, generate_fixture, provider_identity
from .mpc.node import PlayerNode
from .mpc.protocols import ProtocolClass
from .mpc.reconnect import ReconnectionHandler
from .net.mesh import ServiceMesh
from .pod.auth import Identity, Keyring, RequestVerifier
from .pod.client import PodClient
from .pod.models import AccessControlList, TrustedActors
from .pod.server import PodAPI, create_pod_service
from .pod.service import PodService
from .workloads import CircuitSpec

logger = logging.getLogger(__name__)

APP_URL = "http://app.local"


def pod_url(i: int) -> str:
    return f"http://pod{i}.local"


def encryption_agent_url(i: int) -> str:
    return f"http://ea{i}.local"


def computation_agent_url(i: int) -> str:
    return f"http://ca{i}.local"


class LocalDeployment:
    """
    Args:
        providers: Number of data providers, one Pod each
        computation_agents: Computation agents available for selection
        encryption_agents: Encryption agents; provider i trusts agent i mod count
        key_seed: Seed of every identity's key, so runs are reproducible
        enforce_protocol_locally: Passed to every encryption agent
        dealer_seed: Seed of the shared in-process dealer
        client_timeout: How long players wait for client shares
    """

    def __init__(self, providers: int, computation_agents: int = 3, encryption_agents: int = 1,
                 key_seed: bytes = b"pod-mpc-local", enforce_protocol_locally: bool = True,
                 dealer_seed: int = 0, client_timeout: float = 30.0, job_timeout: float = 300.0):
        self.providers = providers
        self.mesh = ServiceMesh()
        self.http = self.mesh.client(timeout=None)
        self.keyring = Keyring()
        self.pod_urls = [pod_url(i) for i in range(providers)]
        self.ea_urls = [encryption_agent_url(i) for i in range(encryption_agents)]
        self.ca_urls = [computation_agent_url(i) for i in range(computation_agents)]
        for url in [APP_URL] + [provider_identity(p) for p in self.pod_urls] + self.ea_urls + self.ca_urls:
            self.keyring.add(Identity.generate(url, seed=key_seed))
        self.directory = self.keyring.directory()

        self.pods: Dict[str, PodService] = {}
        for url in self.pod_urls:
            service = create_pod_service(provider_identity(url))
            self.pods[url] = service
            self.mesh.mount(url, PodAPI(service, RequestVerifier(self.directory)).app)

        self.encryption_agents: Dict[str, EncryptionAgent] = {}
        for url in self.ea_urls:
            agent = EncryptionAgent(self.keyring.get(url), self.directory, self.http,
                                    event_log=InMemoryEventLog(),
                                    enforce_protocol_locally=enforce_protocol_locally)
            self.encryption_agents[url] = agent
            self.mesh.mount(url, EncryptionAgentAPI(agent, RequestVerifier(self.directory)).app)

        material = LocalMaterialSource(InsecureTestDealer(seed=dealer_seed))
        self.computation_agents: Dict[str, ComputationAgent] = {}
        for url in self.ca_urls:
            node = PlayerNode("127.0.0.1", 0, ReconnectionHandler())
            agent = ComputationAgent(self.keyring.get(url), self.directory, node, material,
                                     event_log=InMemoryEventLog())
            self.computation_agents[url] = agent
            self.mesh.mount(url, ComputationAgentAPI(agent, RequestVerifier(self.directory)).app)

        self.app = App(self.keyring.get(APP_URL), self.http, KeyringTaskSigner(self.keyring),
                       client_timeout=client_timeout, job_timeout=job_timeout)

    def provider(self, i: int) -> str:
        return provider_identity(self.pod_urls[i])

    def pod(self, i: int) -> PodService:
        return self.pods[self.pod_urls[i]]

    async def populate(self, values: Dict[int, List[int]], circuit: CircuitSpec,
                       policy: SelectionPolicy = SelectionPolicy.SUBSET, m: int = 3,
                       requested_protocol: Optional[ProtocolClass] = None,
                       trusted_cas: Optional[Sequence[Sequence[str]]] = None,
                       accept_untrusted_union: bool = False) -> ResourceDescription:
        return await generate_fixture(
            self.http, self.keyring, self.pod_urls, values, circuit, self.ea_urls, self.ca_urls, APP_URL,
            policy=policy, m=m, requested_protocol=requested_protocol, trusted_cas=trusted_cas,
            accept_untrusted_union=accept_untrusted_union,
        )

    async def run(self, description: ResourceDescription, seed: int = 0) -> JobReport:
        return await self.app.run_job(description, seed)

    def _owner(self, i: int) -> Tuple[PodClient, ProviderFixture]:
        fixture = ProviderFixture.for_pod(self.pod_urls[i])
        return PodClient(self.keyring.get(fixture.provider), self.http), fixture

    async def distrust_app(self, i: int) -> None:
        """Provider i removes the App from its trusted actors."""
        owner, fixture = self._owner(i)
        await owner.put_json(fixture.actors_url, TrustedActors(webid=fixture.provider, trusted_apps=[]),
                             acl=AccessControlList.read_only(*self.ea_urls))

    async def revoke_encryption_agents(self, i: int) -> None:
        """Provider i withdraws every encryption agent's read access to its data."""
        owner, fixture = self._owner(i)
        for url in self.ea_urls:
            await owner.revoke(fixture.data_url, url)

    async def close(self) -> None:
        for agent in self.computation_agents.values():
            await agent.stop()
        await self.http.aclose()

    async def __aenter__(self) -> "LocalDeployment":
        return self

    async def __aexit__(self, *exc) -> None:
        await self.close()
