"""Environment variable handling and settings"""

import os
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from ..errors import ConfigError

# Load environment variables from .env file
load_dotenv()

ENV_PREFIX = "PODMPC_"


def _env(name: str) -> Optional[str]:
    value = os.getenv(ENV_PREFIX + name)
    return value if value not in (None, "") else None


def _number(name: str, cast):
    value = _env(name)
    if value is None:
        return None
    try:
        return cast(value)
    except ValueError:
        raise ConfigError(f"{ENV_PREFIX}{name}={value!r} is not a valid {cast.__name__}")


class Settings:
    """Settings loaded from ``PODMPC_*`` environment variables"""

    def __init__(self):
        self.log_level = _env("LOG_LEVEL") or os.getenv("LOG_LEVEL")
        self.modulus = _env("MODULUS")

        self.host = _env("HOST")
        self.mpc_port = _number("MPC_PORT", int)
        self.connect_timeout = _number("CONNECT_TIMEOUT", float)

        self.keyring = _env("KEYRING")
        self.directory = _env("DIRECTORY")

        self.client_timeout = _number("CLIENT_TIMEOUT", float)
        self.job_timeout = _number("JOB_TIMEOUT", float)
        self.seed = _number("SEED", int)

        self.bench_max_clients = _number("BENCH_MAX_CLIENTS", int)
        self.bench_max_players = _number("BENCH_MAX_PLAYERS", int)

        self.pod_storage = _env("POD_STORAGE")
        self.pod_owner = _env("POD_OWNER")
        self.dealer_url = _env("DEALER_URL")

    def overrides(self) -> Dict[str, Any]:
        """The variables that are set, as a nested config dictionary."""
        sections = {
            "field": {"modulus": self.modulus},
            "network": {"host": self.host, "mpc_port": self.mpc_port, "connect_timeout": self.connect_timeout},
            "keys": {"keyring": self.keyring, "directory": self.directory},
            "jobs": {"client_timeout": self.client_timeout, "job_timeout": self.job_timeout,
                     "seed": self.seed, "dealer_url": self.dealer_url},
            "bench": {"max_clients": self.bench_max_clients, "max_players": self.bench_max_players},
            "pod": {"storage_dir": self.pod_storage, "owner": self.pod_owner},
        }
        config: Dict[str, Any] = {}
        for section, values in sections.items():
            present = {k: v for k, v in values.items() if v is not None}
            if present:
                config[section] = present
        if self.log_level:
            config["log_level"] = self.log_level
        return config
