"""
Configuration of every pod-mpc component.

Handles loading configuration from various sources:
- Command line arguments (primary)
- ``PODMPC_*`` environment variables and ``.env``
- YAML configuration file
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..core.field import FixedPointParams, resolve_modulus
from ..errors import ConfigError
from ..mpc.reconnect import ReconnectionHandler
from .settings import Settings

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class FixedPointConfig(_Section):
    f: int = Field(default=20, ge=0, description="Fractional bits")
    k: int = Field(default=40, ge=1, description="Magnitude bits")
    s: int = Field(default=40, ge=1, description="Statistical masking bits")

    def params(self) -> FixedPointParams:
        return FixedPointParams(f=self.f, k=self.k, s=self.s)


class FieldConfig(_Section):
    modulus: Union[str, int] = Field(default="m61", description="Preset name (m61, m127) or a prime")
    fixed_point: FixedPointConfig = Field(default_factory=FixedPointConfig)

    def prime(self) -> int:
        return resolve_modulus(self.modulus)


class NetworkConfig(_Section):
    host: str = Field(default="127.0.0.1", description="Bind address of every service")
    pod_port: int = Field(default=8000, description="Pod service HTTP port")
    encryption_port: int = Field(default=8100, description="Encryption agent HTTP port")
    computation_port: int = Field(default=8200, description="Computation agent HTTP port")
    dealer_port: int = Field(default=8300, description="Dealer HTTP port")
    mpc_port: int = Field(default=9000, description="Player node TCP port")
    connect_timeout: float = Field(default=10.0, gt=0, description="Seconds per connection attempt")
    retry_delay: float = Field(default=0.05, gt=0, description="First backoff delay")
    max_retries: int = Field(default=8, ge=0, description="Connection retries (0 = infinite)")

    def reconnection_handler(self) -> ReconnectionHandler:
        return ReconnectionHandler(reconnect_delay=self.retry_delay, max_reconnection_attempts=self.max_retries,
                                   connect_timeout=self.connect_timeout)


class KeysConfig(_Section):
    keyring: Optional[str] = Field(default=None, description="Keyring file with this host's private keys")
    directory: Optional[str] = Field(default=None, description="Identity directory (identity URL to address)")


class JobsConfig(_Section):
    client_timeout: float = Field(default=30.0, gt=0, description="Seconds players wait for client shares")
    job_timeout: float = Field(default=300.0, gt=0, description="Seconds the App waits for a whole job")
    default_m: int = Field(default=3, ge=2, description="Computation agents per job")
    seed: int = Field(default=0, description="Default job seed")
    dealer_url: Optional[str] = Field(default=None, description="Dealer endpoint; in-process dealer when unset")
    dealer_seed: int = Field(default=0, description="Seed of the in-process dealer")


class BenchConfig(_Section):
    max_clients: int = Field(default=64, ge=1)
    max_players: int = Field(default=9, ge=2)


class PodConfig(_Section):
    storage_dir: Optional[str] = Field(default=None, description="Directory backend; in-memory when unset")
    owner: Optional[str] = Field(default=None, description="Identity owning the Pod")
    clock_skew: float = Field(default=300.0, gt=0, description="Accepted request timestamp skew in seconds")


class AppConfig(_Section):
    """Application configuration."""
    field: FieldConfig = Field(default_factory=FieldConfig)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    keys: KeysConfig = Field(default_factory=KeysConfig)
    jobs: JobsConfig = Field(default_factory=JobsConfig)
    bench: BenchConfig = Field(default_factory=BenchConfig)
    pod: PodConfig = Field(default_factory=PodConfig)
    log_level: str = Field(default="INFO", description="Logging level")


def validate_config(data: Dict[str, Any]) -> AppConfig:
    """
    Build an ``AppConfig``, naming the offending key path on failure.

    Raises:
        ConfigError: Unknown key or invalid value
    """
    try:
        return AppConfig.model_validate(data)
    except ValidationError as e:
        problems = []
        for err in e.errors():
            path = ".".join(str(part) for part in err["loc"])
            if err["type"] == "extra_forbidden":
                problems.append(f"unknown key '{path}'")
            else:
                problems.append(f"'{path}': {err['msg']}")
        raise ConfigError("Invalid configuration: " + "; ".join(problems))


def load_config_from_file(config_path: str) -> Optional[Dict[str, Any]]:
    """
    Load configuration from YAML file.

    Args:
        config_path: Path to configuration file

    Returns:
        Configuration dictionary or None if file doesn't exist
    """
    path = Path(config_path)
    if not path.exists():
        return None

    try:
        with path.open() as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Failed to load config file {config_path}: {e}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {config_path} must hold a mapping")
    return data


def load_config_from_env() -> Dict[str, Any]:
    return Settings().overrides()


def _merge(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    for key, value in overrides.items():
        if isinstance(base.get(key), dict) and isinstance(value, dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


def create_app_config(config_file: Optional[str] = None,
                      overrides: Optional[Dict[str, Any]] = None) -> AppConfig:
    """
    Create application configuration from multiple sources.

    Priority order:
    1. Explicit parameters (highest)
    2. Environment variables
    3. Configuration file
    4. Defaults (lowest)

    Args:
        config_file: Path to configuration file
        overrides: Nested dictionary of explicit values, e.g. from CLI flags

    Returns:
        AppConfig instance
    """
    config_data: Dict[str, Any] = {}

    if config_file:
        file_config = load_config_from_file(config_file)
        if file_config is None:
            raise ConfigError(f"Config file {config_file} does not exist")
        _merge(config_data, file_config)

    _merge(config_data, load_config_from_env())

    if overrides:
        _merge(config_data, {k: v for k, v in overrides.items() if v is not None})

    return validate_config(config_data)


DEFAULT_CONFIG = AppConfig()
