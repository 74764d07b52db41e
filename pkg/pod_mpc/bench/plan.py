"""Experiment plans and result rows of the scalability harness"""

from enum import Enum
from pathlib import Path
from typing import List, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from ..errors import ConfigError
from ..mpc.protocols import ProtocolClass
from ..workloads import CircuitSpec, WorkloadKind

MIN_AVERAGED_REPETITIONS = 10


class ExecutionModel(str, Enum):
    DIRECT = "direct"
    DELEGATED = "delegated"


class ExperimentPlan(BaseModel):
    """
    One sweep.

    Direct plans sweep the number of players (every provider is a player).
    Delegated plans sweep the number of clients feeding ``players`` fixed
    players; with ``total_elements`` set, sum and elementwise workloads pool a
    fixed amount of data split across the clients.
    """
    model: ExecutionModel
    circuit: CircuitSpec
    sweep: List[int] = Field(..., min_length=1, description="Player counts (direct) or client counts (delegated)")
    players: int = Field(default=3, ge=2, description="Players of a delegated run")
    protocol: ProtocolClass = ProtocolClass.HONEST_MAJORITY_SEMI_HONEST
    seeds: List[int] = Field(default_factory=lambda: [0], min_length=1)
    repetitions: int = Field(default=1, ge=1)
    total_elements: Optional[int] = Field(default=None, ge=1)
    transport: str = "tcp"
    job_timeout: float = Field(default=600.0, gt=0)

    @model_validator(mode="after")
    def _check(self) -> "ExperimentPlan":
        if any(point < 1 for point in self.sweep):
            raise ValueError("Sweep points must be positive")
        if 1 < self.repetitions < MIN_AVERAGED_REPETITIONS:
            raise ValueError(f"Averaged rows need at least {MIN_AVERAGED_REPETITIONS} repetitions")
        if self.total_elements is not None:
            if self.model != ExecutionModel.DELEGATED:
                raise ValueError("total_elements applies to delegated plans")
            if self.circuit.kind not in (WorkloadKind.SUM, WorkloadKind.ELEMENTWISE_OP_SUM):
                raise ValueError("total_elements applies to sum and elementwise workloads")
        if self.transport not in ("tcp", "memory"):
            raise ValueError(f"Unknown transport {self.transport!r}")
        return self

    @classmethod
    def load(cls, path: Path) -> "ExperimentPlan":
        """Load a plan from JSON or YAML."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Plan file {path} does not exist")
        try:
            return cls.model_validate(yaml.safe_load(path.read_text()) or {})
        except (yaml.YAMLError, ValidationError) as e:
            raise ConfigError(f"Invalid plan {path}: {e}")


class BenchRow(BaseModel):
    """One averaged sweep point."""
    model: ExecutionModel
    circuit: str
    op: str
    array_size: int
    parties: int
    clients: int
    protocol: str
    full_time_s: float
    comp_time_s: float
    rounds: int
    bytes_global: int
    bytes_p0: int
    client_bytes: int
    gates: int = 0
    runs: int = 1
    correct: bool = True

    @property
    def sweep_point(self) -> int:
        return self.clients if self.model == ExecutionModel.DELEGATED else self.parties


CSV_COLUMNS = [
    "model", "circuit", "op", "array_size", "parties", "clients", "protocol",
    "full_time_s", "comp_time_s", "rounds", "bytes_global", "bytes_p0", "client_bytes",
]
