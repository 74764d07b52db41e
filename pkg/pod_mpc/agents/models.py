"""
Pydantic models for the agent control plane.

Tasks travel as the JSON body of a signed POST /dispatch; the signature
over the whole body binds the chosen agents and the protocol to the App.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field, model_validator

from ..core.dealer import PartyMaterial, PreprocessingDemand
from ..core.field import FixedPointParams
from ..mpc.circuit import Circuit
from ..mpc.metrics import PartyMetrics
from ..mpc.protocols import ProtocolClass
from ..workloads import CircuitSpec


class CAEndpoint(BaseModel):
    """A computation agent chosen for a job."""
    url: str = Field(..., description="Control-plane base URL, also the agent's identity")
    party_id: int = Field(..., ge=0)
    mpc_address: str = Field(..., description="host:port of the agent's player node")


class AgentInfo(BaseModel):
    identity: str
    role: str = Field(..., description="encryption, computation or dealer")
    address: str = Field(..., description="Account address the agent signs with")
    mpc_address: Optional[str] = None
    version: str = "1.0.0"


class TaskSignature(BaseModel):
    """A data provider's approval of one circuit."""
    provider: str
    signature: str


class ExpectedClient(BaseModel):
    source: int = Field(..., ge=0, description="Circuit input source id")
    provider: str


class EncryptionTask(BaseModel):
    job_id: str
    source: int = Field(..., ge=0, description="Input source this provider feeds")
    provider: str = Field(..., description="Identity of the data provider")
    data_url: str
    preference_url: str
    cas: List[CAEndpoint]
    circuit_spec: CircuitSpec
    providers: int = Field(..., ge=1, description="Number of input sources of the job")
    circuit_hash: str
    protocol: ProtocolClass
    app: str = Field(..., description="Identity of the requesting App")
    seed: int = 0

    @model_validator(mode="after")
    def _check_cas(self) -> "EncryptionTask":
        if sorted(ca.party_id for ca in self.cas) != list(range(len(self.cas))):
            raise ValueError("Chosen CAs must cover party ids 0..m-1 exactly once")
        return self

    def players(self) -> List[CAEndpoint]:
        return sorted(self.cas, key=lambda ca: ca.party_id)


class ComputationTask(BaseModel):
    job_id: str
    party_id: int = Field(..., ge=0)
    circuit: Circuit
    protocol: ProtocolClass
    peers: List[CAEndpoint]
    clients: List[ExpectedClient]
    signatures: List[TaskSignature]
    app: str
    seed: int = 0
    client_timeout: float = Field(default=30.0, gt=0)

    @model_validator(mode="after")
    def _check_peers(self) -> "ComputationTask":
        if sorted(p.party_id for p in self.peers) != list(range(len(self.peers))):
            raise ValueError("Peers must cover party ids 0..m-1 exactly once")
        if not 0 <= self.party_id < len(self.peers):
            raise ValueError(f"Party {self.party_id} is not among {len(self.peers)} peers")
        return self

    def signature_of(self, provider: str) -> Optional[str]:
        for sig in self.signatures:
            if sig.provider == provider:
                return sig.signature
        return None


class EncryptionReceipt(BaseModel):
    job_id: str
    source: int
    provider: str
    allowed_protocols: List[ProtocolClass]
    bytes_sent: int
    events: List[str] = Field(default_factory=list)


class ComputationResult(BaseModel):
    job_id: str
    party_id: int
    circuit_hash: str
    outputs: List[List[int]]
    metrics: PartyMetrics


class AbortRequest(BaseModel):
    job_id: str
    code: str = "SessionAborted"
    message: str = ""
    provider: Optional[str] = None


class PreprocessRequest(BaseModel):
    """One party's request for its slice of a job's correlated randomness."""
    job_id: str
    party_id: int = Field(..., ge=0)
    scheme: Dict
    demand: PreprocessingDemand
    modulus: int
    fixed_point: FixedPointParams = Field(default_factory=FixedPointParams)
    magnitude_bits: Optional[int] = None


class PreprocessResponse(BaseModel):
    material: PartyMaterial
