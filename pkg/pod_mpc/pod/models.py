"""
Pydantic models for Pod resources, access control and trust documents.

Trust documents are plain JSON resources stored in the owner's Pod. Their
wire form uses camelCase keys; every model also accepts snake_case.
"""

import json
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..errors import MalformedDescription
from ..mpc.protocols import ProtocolClass

ACL_SUFFIX = ".acl.json"
DESCRIPTION_SUFFIX = ".description.json"
PREFERENCE_SCHEMA_VERSION = 1


class AccessMode(str, Enum):
    READ = "read"
    WRITE = "write"


class AclEntry(BaseModel):
    """Grant of one or more access modes to an agent identity."""
    agent: str = Field(..., description="Identity URL of the grantee")
    modes: List[AccessMode] = Field(default_factory=lambda: [AccessMode.READ])


class AccessControlList(BaseModel):
    entries: List[AclEntry] = Field(default_factory=list)

    def allows(self, identity: str, mode: AccessMode) -> bool:
        return any(e.agent == identity and mode in e.modes for e in self.entries)

    def revoke(self, identity: str) -> "AccessControlList":
        return AccessControlList(entries=[e for e in self.entries if e.agent != identity])

    @classmethod
    def read_only(cls, *agents: str) -> "AccessControlList":
        return cls(entries=[AclEntry(agent=a, modes=[AccessMode.READ]) for a in agents])


class StoredResource(BaseModel):
    """A resource as held by a storage backend."""
    path: str
    body: bytes
    content_type: str = "application/json"
    version: int = 0


class _CamelModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    def to_json_bytes(self) -> bytes:
        return self.model_dump_json(by_alias=True, exclude_none=True).encode()


class PreferenceFile(_CamelModel):
    """A data provider's trust declarations."""
    version: int = Field(default=PREFERENCE_SCHEMA_VERSION)
    webid: str = Field(..., description="Owner identity")
    trusted_encryption_agents: List[str] = Field(default_factory=list, alias="trustedEncryptionAgents")
    trusted_computation_agents: List[str] = Field(default_factory=list, alias="trustedComputationAgents")
    allowed_protocols: Optional[List[ProtocolClass]] = Field(default=None, alias="allowedProtocols")
    accept_untrusted_union: bool = Field(
        default=False, alias="acceptUntrustedUnion",
        description="Accept a computation with none of the chosen agents trusted (union-random risk mode)",
    )


class TrustedActors(_CamelModel):
    webid: str = Field(..., description="Owner identity")
    trusted_apps: List[str] = Field(default_factory=list, alias="trustedApps")


class DescriptionResource(_CamelModel):
    """Metadata of a data resource, linking to the owner's trusted actors."""
    data: str = Field(..., description="URL of the described data resource")
    trusted_actors: str = Field(..., alias="trustedActors")

    @field_validator("trusted_actors")
    @classmethod
    def _non_empty(cls, value: str) -> str:
        if not value:
            raise ValueError("trustedActors link is empty")
        return value

    @classmethod
    def parse(cls, body: bytes) -> "DescriptionResource":
        """
        Raises:
            MalformedDescription: Body is not JSON or lacks the trusted-actors link
        """
        try:
            return cls.model_validate(json.loads(body))
        except (ValueError, TypeError) as e:
            raise MalformedDescription(f"Description resource is malformed: {e}")


class DataResource(BaseModel):
    """Body of a data resource."""
    values: List[int] = Field(default_factory=list)


def acl_path(path: str) -> str:
    return f"{path}{ACL_SUFFIX}"


def description_url(data_url: str) -> str:
    return f"{data_url}{DESCRIPTION_SUFFIX}"


def container_of(path: str) -> str:
    """Parent container path, always ending in '/'."""
    return path.rstrip("/").rsplit("/", 1)[0] + "/"
