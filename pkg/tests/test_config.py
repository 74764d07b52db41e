import pytest

from pod_mpc.config import AppConfig, create_app_config, validate_config
from pod_mpc.core.field import M127
from pod_mpc.errors import ConfigError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("PODMPC_SEED", "PODMPC_MPC_PORT", "PODMPC_MODULUS", "PODMPC_LOG_LEVEL", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


class TestCreateAppConfig:
    def test_defaults(self):
        config = create_app_config()
        assert config == AppConfig()
        assert config.jobs.default_m == 3

    def test_priority(self, tmp_path, monkeypatch):
        path = tmp_path / "config.yaml"
        path.write_text("jobs:\n  seed: 1\n  default_m: 4\nfield:\n  modulus: m127\n")
        monkeypatch.setenv("PODMPC_SEED", "2")
        config = create_app_config(str(path), {"log_level": "DEBUG"})
        assert config.jobs.seed == 2
        assert config.jobs.default_m == 4
        assert config.field.prime() == M127
        assert config.log_level == "DEBUG"

    def test_env_number_checked(self, monkeypatch):
        monkeypatch.setenv("PODMPC_MPC_PORT", "ninety")
        with pytest.raises(ConfigError):
            create_app_config()

    def test_empty_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("")
        assert create_app_config(str(path)) == AppConfig()

    def test_non_mapping_file(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("- a\n- b\n")
        with pytest.raises(ConfigError):
            create_app_config(str(path))


class TestValidateConfig:
    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="unknown key 'network.prot'"):
            validate_config({"network": {"prot": 1}})

    def test_bad_value_named(self):
        with pytest.raises(ConfigError, match="'jobs.default_m'"):
            validate_config({"jobs": {"default_m": 1}})

    def test_reconnection_handler(self):
        handler = validate_config({"network": {"max_retries": 2, "retry_delay": 0.5}}).network.reconnection_handler()
        assert handler.max_reconnection_attempts == 2
