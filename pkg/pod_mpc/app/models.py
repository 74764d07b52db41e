"""Pydantic models of the App: resource descriptions, selections and job reports"""

import hashlib
import json
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic.alias_generators import to_camel

from ..agents.models import EncryptionReceipt
from ..errors import ConfigError
from ..mpc.protocols import ProtocolClass
from ..mpc.runner import JobResult
from ..workloads import CircuitSpec, WorkloadResult

DESCRIPTION_SCHEMA_VERSION = 1


class _CamelModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True, alias_generator=to_camel)


class SelectionPolicy(str, Enum):
    SUBSET = "subset"
    UNION_RANDOM = "union_random"


class DescriptionEntry(_CamelModel):
    data_url: str
    preference_url: str
    provider: str


class ResourceDescription(_CamelModel):
    """The App's job manifest."""
    version: int = DESCRIPTION_SCHEMA_VERSION
    entries: List[DescriptionEntry]
    circuit: CircuitSpec
    requested_protocol: Optional[ProtocolClass] = None
    policy: SelectionPolicy = SelectionPolicy.SUBSET
    m: int = Field(default=3, ge=2, description="Number of computation agents")

    @model_validator(mode="after")
    def _check_entries(self) -> "ResourceDescription":
        if not self.entries:
            raise ValueError("A resource description needs at least one entry")
        providers = [e.provider for e in self.entries]
        if len(set(providers)) != len(providers):
            raise ValueError("Each provider may appear only once")
        return self

    def description_hash(self) -> str:
        canonical = json.dumps(self.model_dump(mode="json", by_alias=True), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()

    @classmethod
    def load(cls, path: Path) -> "ResourceDescription":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Description file {path} does not exist")
        return cls.model_validate_json(path.read_text())

    def save(self, path: Path) -> None:
        Path(path).write_text(self.model_dump_json(by_alias=True, indent=2, exclude_none=True))


class AgentSelection(BaseModel):
    encryption_agents: Dict[str, str] = Field(description="Provider identity to its encryption agent URL")
    computation_agents: List[str]
    protocol: ProtocolClass


class RiskParams(BaseModel):
    n: int = Field(ge=1, description="Size of the union of trusted CAs")
    k: int = Field(ge=0, description="Corrupted agents in the union")
    m: int = Field(ge=1, description="Chosen CAs")

    @model_validator(mode="after")
    def _check(self) -> "RiskParams":
        if self.k > self.n:
            raise ValueError(f"k={self.k} exceeds n={self.n}")
        if self.m > self.n:
            raise ValueError(f"m={self.m} exceeds n={self.n}")
        return self


class RiskEstimate(BaseModel):
    exact: float
    bound: float


class JobReport(BaseModel):
    """Everything the App learned from one job."""
    job_id: str
    circuit_hash: str
    selection: AgentSelection
    result: WorkloadResult
    job: JobResult
    receipts: List[EncryptionReceipt] = Field(default_factory=list)

    def transcript_hash(self) -> str:
        """Hash of what is deterministic given the seed: selection, job, circuit and opened outputs."""
        transcript = {
            "job_id": self.job_id,
            "circuit_hash": self.circuit_hash,
            "selection": self.selection.model_dump(mode="json"),
            "outputs": self.job.outputs,
        }
        return hashlib.sha256(json.dumps(transcript, sort_keys=True).encode()).hexdigest()
