"""Rejections a misbehaving App or a withdrawn grant must trigger, end to end."""

import asyncio

import pytest

from pod_mpc.app.models import SelectionPolicy
from pod_mpc.app.orchestrator import KeyringTaskSigner
from pod_mpc.errors import (
    AppNotTrusted,
    BadTaskSignature,
    PodUnauthorized,
    ProtocolNotAllowed,
    ProtocolOutsideAllowedList,
    Unauthorized,
)
from pod_mpc.local import LocalDeployment
from pod_mpc.mpc.protocols import ProtocolClass
from pod_mpc.pod.auth import task_message
from pod_mpc.workloads import CircuitSpec, WorkloadKind

INCOMES = {0: [10], 1: [20], 2: [30]}
AVERAGE = CircuitSpec(kind=WorkloadKind.AVERAGE_WAGE)


class ForgingSigner(KeyringTaskSigner):
    """Signs one provider's approval with the App's own key."""

    def __init__(self, keyring, victim: str, app: str):
        super().__init__(keyring)
        self.victim = victim
        self.app = app

    def sign(self, provider: str, circuit_hash: str) -> str:
        if provider == self.victim:
            return self.keyring.get(self.app).sign(task_message(circuit_hash))
        return super().sign(provider, circuit_hash)


def events_for(deployment: LocalDeployment, provider: str):
    return [e.name for agent in deployment.encryption_agents.values()
            for e in agent.event_log.events() if e.provider == provider]


class TestBaseline:
    def test_average_wage(self):
        async def scenario():
            async with LocalDeployment(3) as d:
                description = await d.populate(INCOMES, AVERAGE)
                return await d.run(description), events_for(d, d.provider(1))

        report, events = asyncio.run(scenario())
        assert report.result.mean == 20
        assert report.selection.protocol == ProtocolClass.HONEST_MAJORITY_SEMI_HONEST
        assert events == ["dispatch_received", "app_verified", "protocol_checked", "data_fetched",
                          "shares_injected"]


class TestUntrustedApp:
    def test_rejected_before_any_data_read(self):
        async def scenario():
            async with LocalDeployment(3) as d:
                description = await d.populate(INCOMES, AVERAGE)
                await d.distrust_app(0)
                with pytest.raises(AppNotTrusted) as excinfo:
                    await d.run(description)
                return excinfo.value, events_for(d, d.provider(0)), d.provider(0)

        error, events, provider = asyncio.run(scenario())
        assert error.provider == provider
        assert error.stage == "app_verification"
        assert "data_fetched" not in events
        assert events[-1] == "rejected"


class TestForgedTaskSignature:
    def test_computation_agents_refuse(self):
        async def scenario():
            async with LocalDeployment(3) as d:
                description = await d.populate(INCOMES, AVERAGE)
                d.app.signer = ForgingSigner(d.keyring, d.provider(0), d.app.identity.url)
                with pytest.raises(BadTaskSignature) as excinfo:
                    await d.run(description)
                return excinfo.value, d.provider(0)

        error, provider = asyncio.run(scenario())
        assert error.provider == provider


class TestProtocolDowngrade:
    TRUSTED = [["http://ca0.local"], ["http://ca1.local"], ["http://ca2.local"]]

    async def _populate(self, d: LocalDeployment):
        return await d.populate(INCOMES, AVERAGE, policy=SelectionPolicy.UNION_RANDOM, m=3,
                                requested_protocol=ProtocolClass.HONEST_MAJORITY_SEMI_HONEST,
                                trusted_cas=self.TRUSTED)

    def test_players_check_relayed_allowed_list(self):
        async def scenario():
            async with LocalDeployment(3, enforce_protocol_locally=False) as d:
                description = await self._populate(d)
                with pytest.raises(ProtocolOutsideAllowedList):
                    await d.run(description)

        asyncio.run(scenario())

    def test_encryption_agent_enforces_locally(self):
        async def scenario():
            async with LocalDeployment(3) as d:
                description = await self._populate(d)
                with pytest.raises(ProtocolNotAllowed) as excinfo:
                    await d.run(description)
                return excinfo.value

        assert asyncio.run(scenario()).stage == "protocol_verification"


class TestRevokedAccess:
    def test_job_fails_with_pod_unauthorized(self):
        async def scenario():
            async with LocalDeployment(3) as d:
                description = await d.populate(INCOMES, AVERAGE)
                await d.revoke_encryption_agents(0)
                with pytest.raises(PodUnauthorized) as excinfo:
                    await d.run(description)
                with pytest.raises(Unauthorized):
                    d.pod(0).get_resource(d.ea_urls[0], "/data/values.json")
                return excinfo.value, d.provider(0)

        error, provider = asyncio.run(scenario())
        assert error.provider == provider
        assert error.stage == "data_fetch"
