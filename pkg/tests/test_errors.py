from pod_mpc.errors import (
    AppNotTrusted,
    ConfigError,
    PeerDisconnected,
    PodMpcError,
    PodUnauthorized,
    SessionAborted,
    error_from_dict,
    exit_code_for,
)


class TestErrorSerialization:
    def test_round_trip_keeps_type_and_attribution(self):
        original = PodUnauthorized("no read grant", stage="fetch", provider="https://alice.example/#me")
        rebuilt = error_from_dict(original.to_dict())
        assert isinstance(rebuilt, PodUnauthorized)
        assert rebuilt.provider == original.provider
        assert rebuilt.stage == "fetch"

    def test_unknown_code_kept(self):
        rebuilt = error_from_dict({"code": "SomethingNew", "message": "m"})
        assert type(rebuilt) is PodMpcError
        assert rebuilt.code == "SomethingNew"

    def test_str_names_provider(self):
        assert "provider=p1" in str(AppNotTrusted("x", provider="p1"))


class TestExitCodes:
    def test_categories(self):
        assert exit_code_for(AppNotTrusted()) == 2
        assert exit_code_for(PeerDisconnected()) == 3
        assert exit_code_for(ConfigError()) == 4
        assert exit_code_for(PodMpcError()) == 1
        assert exit_code_for(RuntimeError()) == 1

    def test_abort_uses_remote_cause(self):
        assert exit_code_for(SessionAborted("peer gave up", remote_code="PeerDisconnected")) == 3
        assert exit_code_for(SessionAborted("peer gave up")) == 1
