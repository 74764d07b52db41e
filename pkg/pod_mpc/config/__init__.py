"""Configuration exports"""

from .app_config import (
    DEFAULT_CONFIG,
    AppConfig,
    BenchConfig,
    FieldConfig,
    JobsConfig,
    KeysConfig,
    NetworkConfig,
    PodConfig,
    create_app_config,
    load_config_from_env,
    load_config_from_file,
    validate_config,
)
from .settings import Settings

__all__ = [
    "DEFAULT_CONFIG",
    "AppConfig",
    "BenchConfig",
    "FieldConfig",
    "JobsConfig",
    "KeysConfig",
    "NetworkConfig",
    "PodConfig",
    "create_app_config",
    "load_config_from_env",
    "load_config_from_file",
    "validate_config",
    "Settings",
]
