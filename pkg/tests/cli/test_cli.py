import pytest
from typer.testing import CliRunner

from pod_mpc.cli.main import app
from pod_mpc.pod.auth import IdentityDirectory, Keyring

runner = CliRunner()


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("PODMPC_LOG_LEVEL", "LOG_LEVEL", "PODMPC_SEED", "PODMPC_MODULUS"):
        monkeypatch.delenv(name, raising=False)


class TestRisk:
    def test_exact_and_bound(self):
        result = runner.invoke(app, ["app", "risk", "--n", "6", "--k", "3", "--m", "2"])
        assert result.exit_code == 0
        assert "exact: 0.2" in result.output
        assert "bound: 0.25" in result.output

    def test_monte_carlo(self):
        result = runner.invoke(app, ["app", "risk", "--n", "6", "--k", "3", "--m", "2", "--trials", "1000"])
        assert result.exit_code == 0
        assert "monte-carlo (1000 trials)" in result.output

    def test_invalid_parameters(self):
        result = runner.invoke(app, ["app", "risk", "--n", "3", "--k", "4", "--m", "1"])
        assert result.exit_code == 2


class TestConfig:
    def test_show_defaults(self):
        result = runner.invoke(app, ["config", "show"])
        assert result.exit_code == 0
        assert "default_m: 3" in result.output

    def test_file_overrides(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("jobs:\n  default_m: 5\n")
        result = runner.invoke(app, ["--config", str(path), "config", "show"])
        assert result.exit_code == 0
        assert "default_m: 5" in result.output

    def test_unknown_key_exits_with_config_code(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text("jobs:\n  defualt_m: 5\n")
        result = runner.invoke(app, ["--config", str(path), "config", "show"])
        assert result.exit_code == 4
        assert "jobs.defualt_m" in result.output

    def test_missing_file(self, tmp_path):
        result = runner.invoke(app, ["--config", str(tmp_path / "nope.yaml"), "config", "show"])
        assert result.exit_code == 4

    def test_bad_log_level(self):
        result = runner.invoke(app, ["--log-level", "chatty", "config", "show"])
        assert result.exit_code == 4


class TestKeys:
    def test_generate(self, tmp_path):
        keys, ids = tmp_path / "keys.json", tmp_path / "ids.json"
        result = runner.invoke(app, ["keys", "generate", "--identity", "https://a.example/#me",
                                     "--identity", "https://b.example/#me", "--out", str(keys),
                                     "--directory-out", str(ids), "--seed", "demo"])
        assert result.exit_code == 0
        keyring = Keyring.load(keys)
        directory = IdentityDirectory.load(ids)
        assert directory.to_dict() == keyring.directory().to_dict()
        assert len(directory.to_dict()) == 2


class TestDemo:
    def test_average_wage(self):
        result = runner.invoke(app, ["demo", "--incomes", "10,20,30", "--seed", "1"])
        assert result.exit_code == 0, result.output
        assert "matches the plaintext oracle" in result.output

    def test_untrusted_app_exits_with_verification_code(self):
        result = runner.invoke(app, ["demo", "--incomes", "10,20,30", "--untrusted-app"])
        assert result.exit_code == 2
        assert "[AppNotTrusted]" in result.output

    def test_bad_incomes(self):
        result = runner.invoke(app, ["demo", "--incomes", "10,x"])
        assert result.exit_code == 2


class TestMwem:
    def test_plaintext_run(self):
        result = runner.invoke(app, ["mwem", "run", "--providers", "4", "--points", "20", "--bins", "5",
                                     "--queries", "5", "--iterations", "3", "--no-secure"])
        assert result.exit_code == 0, result.output
        assert "A_T:" in result.output
        assert "max query error" in result.output
