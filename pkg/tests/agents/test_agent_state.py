import asyncio

import pytest

from pod_mpc.agents.encryption_agent import EncryptionAgent
from pod_mpc.agents.event_log import InMemoryEventLog, NullEventLog, create_event_log
from pod_mpc.agents.models import CAEndpoint, EncryptionTask
from pod_mpc.agents.replay import ReplayCache
from pod_mpc.errors import ReplayDetected, SignatureInvalid
from pod_mpc.mpc.protocols import ProtocolClass
from pod_mpc.net.mesh import ServiceMesh
from pod_mpc.workloads import CircuitSpec, WorkloadKind, build_circuit


class FakeClock:
    def __init__(self):
        self.now = 0.0

    def __call__(self) -> float:
        return self.now


class TestReplayCache:
    def test_second_acceptance_rejected(self):
        cache = ReplayCache()
        cache.check_and_remember(("job", 0))
        cache.check_and_remember(("job", 1))
        with pytest.raises(ReplayDetected):
            cache.check_and_remember(("job", 0))

    def test_keys_expire(self):
        clock = FakeClock()
        cache = ReplayCache(ttl=10, clock=clock)
        cache.check_and_remember("job")
        clock.now = 11
        cache.check_and_remember("job")

    def test_capacity_bound(self):
        cache = ReplayCache(capacity=2)
        for key in ("a", "b", "c"):
            cache.check_and_remember(key)
        cache.check_and_remember("x")
        cache.check_and_remember("a")
        with pytest.raises(ReplayDetected):
            cache.check_and_remember("x")


class TestEventLog:
    def test_filters_by_job(self):
        log = InMemoryEventLog()
        log.record("j1", "dispatch_received", "alice")
        log.record("j2", "dispatch_received", "bob")
        log.record("j1", "app_verified", "alice")
        assert log.names("j1") == ["dispatch_received", "app_verified"]
        assert log.counts() == {"dispatch_received": 2, "app_verified": 1}

    def test_bounded(self):
        log = InMemoryEventLog(max_events=2)
        for i in range(5):
            log.record("j", f"e{i}")
        assert log.names() == ["e3", "e4"]

    def test_disabled(self):
        log = create_event_log(enabled=False)
        log.record("j", "x")
        assert isinstance(log, NullEventLog)
        assert log.events() == []


class TestEncryptionAgentGuards:
    APP = "http://app.local"

    def _task(self) -> EncryptionTask:
        spec = CircuitSpec(kind=WorkloadKind.SUM)
        return EncryptionTask(
            job_id="job", source=0, provider="http://pod0.local/profile/card#me",
            data_url="http://pod0.local/data/values.json",
            preference_url="http://pod0.local/settings/preferences.json",
            cas=[CAEndpoint(url=f"http://ca{i}.local", party_id=i, mpc_address=f"127.0.0.1:{9000 + i}")
                 for i in range(3)],
            circuit_spec=spec, providers=1, circuit_hash=build_circuit(spec, 1).circuit_hash(),
            protocol=ProtocolClass.HONEST_MAJORITY_SEMI_HONEST, app=self.APP,
        )

    def _run(self, keyring, directory, requester: str, replay: ReplayCache):
        async def scenario():
            async with ServiceMesh().client() as http:
                agent = EncryptionAgent(keyring.get("https://ea.example/#me"), directory, http,
                                        event_log=InMemoryEventLog(), replay=replay)
                await agent.handle_dispatch(self._task(), requester)

        asyncio.run(scenario())

    def test_dispatch_must_come_from_named_app(self, keyring, directory):
        with pytest.raises(SignatureInvalid):
            self._run(keyring, directory, "https://app.example/#me", ReplayCache())

    def test_replayed_dispatch(self, keyring, directory):
        replay = ReplayCache()
        replay.check_and_remember(("job", 0))
        with pytest.raises(ReplayDetected):
            self._run(keyring, directory, self.APP, replay)

    def test_cas_must_cover_party_ids(self):
        task = self._task().model_dump()
        task["cas"][2]["party_id"] = 0
        with pytest.raises(ValueError):
            EncryptionTask.model_validate(task)
