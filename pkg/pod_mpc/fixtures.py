"""
Multi-provider fixtures.

Fills one Pod per provider with a data resource, its description, the
provider's trusted actors and preference file, grants the encryption agents
(and the App, for preferences) read access, and returns the resource
description an App runs.
"""

import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence

import httpx
import numpy as np
from pydantic import BaseModel

from .app.models import DescriptionEntry, ResourceDescription, SelectionPolicy
from .errors import EmptyFixture, InvalidParameters
from .mpc.protocols import ProtocolClass
from .pod.auth import Keyring
from .pod.client import PodClient
from .pod.models import AccessControlList, DataResource, DescriptionResource, PreferenceFile, TrustedActors, description_url
from .workloads import CircuitSpec, WorkloadKind

logger = logging.getLogger(__name__)

INCOME_RANGE = (10, 100)
VALUE_RANGE = (0, 100)


class DataModel(str, Enum):
    UNIFORM_INCOME = "uniform_income"
    INTEGER_DATASET = "integer_dataset"


def provider_identity(pod_url: str) -> str:
    return f"{pod_url.rstrip('/')}/profile/card#me"


class ProviderFixture(BaseModel):
    """Where one provider's resources live."""
    provider: str
    pod: str
    data_url: str
    preference_url: str
    actors_url: str

    @classmethod
    def for_pod(cls, pod_url: str, resource: str = "values") -> "ProviderFixture":
        base = pod_url.rstrip("/")
        return cls(
            provider=provider_identity(base),
            pod=base,
            data_url=f"{base}/data/{resource}.json",
            preference_url=f"{base}/settings/preferences.json",
            actors_url=f"{base}/settings/trusted-actors.json",
        )


def generate_values(providers: int, data_model: DataModel, spec: CircuitSpec, seed: int) -> Dict[int, List[int]]:
    """
    Deterministic synthetic data per provider.

    Raises:
        EmptyFixture: No providers requested
    """
    if providers < 1:
        raise EmptyFixture("A fixture needs at least one provider")
    rng = np.random.default_rng(seed)
    data_model = DataModel(data_model)
    if data_model == DataModel.UNIFORM_INCOME:
        return {i: [int(rng.integers(*INCOME_RANGE))] for i in range(providers)}
    if spec.kind == WorkloadKind.MWEM:
        low, high = spec.mwem.domain
        counts = spec.mwem.points(providers)
        return {i: [int(v) for v in rng.integers(low, high, size=counts[i])] for i in range(providers)}
    return {i: [int(v) for v in rng.integers(*VALUE_RANGE, size=spec.width)] for i in range(providers)}


async def populate_provider(client: PodClient, fixture: ProviderFixture, values: Sequence[int],
                            encryption_agents: Sequence[str], trusted_encryption_agent: str,
                            trusted_computation_agents: Sequence[str], app: str,
                            allowed: Optional[List[ProtocolClass]] = None,
                            accept_untrusted_union: bool = False) -> DescriptionEntry:
    """Write one provider's resources through its own (owner) client."""
    readers = AccessControlList.read_only(*encryption_agents)
    await client.put_json(fixture.data_url, DataResource(values=list(values)), acl=readers)
    await client.put_json(description_url(fixture.data_url),
                          DescriptionResource(data=fixture.data_url, trusted_actors=fixture.actors_url), acl=readers)
    await client.put_json(fixture.actors_url, TrustedActors(webid=fixture.provider, trusted_apps=[app]), acl=readers)
    prefs = PreferenceFile(
        webid=fixture.provider,
        trusted_encryption_agents=[trusted_encryption_agent],
        trusted_computation_agents=list(trusted_computation_agents),
        allowed_protocols=allowed,
        accept_untrusted_union=accept_untrusted_union,
    )
    await client.put_json(fixture.preference_url, prefs, acl=AccessControlList.read_only(*encryption_agents, app))
    logger.info(f"Populated {fixture.pod} with {len(values)} values for {fixture.provider}")
    return DescriptionEntry(data_url=fixture.data_url, preference_url=fixture.preference_url,
                            provider=fixture.provider)


async def generate_fixture(http: httpx.AsyncClient, keyring: Keyring, pods: Sequence[str],
                           values: Dict[int, List[int]], circuit: CircuitSpec,
                           encryption_agents: Sequence[str], computation_agents: Sequence[str], app: str,
                           policy: SelectionPolicy = SelectionPolicy.SUBSET, m: int = 3,
                           requested_protocol: Optional[ProtocolClass] = None,
                           trusted_cas: Optional[Sequence[Sequence[str]]] = None,
                           accept_untrusted_union: bool = False) -> ResourceDescription:
    """
    Populate ``len(values)`` Pods and build the matching resource description.

    Provider i lives in ``pods[i]``, signs as ``provider_identity(pods[i])``
    and trusts encryption agent ``encryption_agents[i % len]``; by default
    every provider trusts every computation agent.

    Raises:
        EmptyFixture: No providers
        PodUnreachable: A Pod did not answer
        ConfigError: The keyring lacks a provider's key
    """
    if not values:
        raise EmptyFixture("A fixture needs at least one provider")
    if len(pods) < len(values):
        raise InvalidParameters(f"{len(values)} providers need {len(values)} Pods, got {len(pods)}")
    if not encryption_agents:
        raise InvalidParameters("A fixture needs at least one encryption agent")
    entries = []
    for i in sorted(values):
        fixture = ProviderFixture.for_pod(pods[i])
        owner = PodClient(keyring.get(fixture.provider), http)
        cas = trusted_cas[i] if trusted_cas is not None else computation_agents
        entries.append(await populate_provider(
            owner, fixture, values[i], encryption_agents, encryption_agents[i % len(encryption_agents)],
            cas, app, accept_untrusted_union=accept_untrusted_union,
        ))
    return ResourceDescription(entries=entries, circuit=circuit, policy=policy, m=m,
                               requested_protocol=requested_protocol)
