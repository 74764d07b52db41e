"""
API models for HTTP request/response schemas.

These models define the structure of the service responses that are not
domain records themselves: errors, health checks and small acknowledgements.
"""

from datetime import datetime, timezone
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from .errors import PodMpcError

SERVICE_VERSION = "1.0.0"


# Error Models

class ErrorResponse(BaseModel):
    """Standard error response model."""
    error: str = Field(..., description="Error type: verification, network, config, other or validation")
    code: str = Field(..., description="Stable error code, the name of the error class")
    message: str = Field(..., description="Human-readable error message")
    stage: Optional[str] = Field(None, description="Pipeline stage the error was raised in")
    provider: Optional[str] = Field(None, description="Data provider the error is attributed to")

    @classmethod
    def from_error(cls, error: PodMpcError) -> "ErrorResponse":
        return cls(error=error.category, **error.to_dict())

    @classmethod
    def validation_error(cls, message: str) -> "ErrorResponse":
        """Create validation error response."""
        return cls(error="validation", code="InvalidParameters", message=message)

    @classmethod
    def service_error(cls, message: str) -> "ErrorResponse":
        """Create service error response."""
        return cls(error="other", code="PodMpcError", message=message)


# Health Check Models

class HealthCheckResponse(BaseModel):
    """Health check response model."""
    status: str = Field(..., description="Service status: healthy, unhealthy")
    services: Dict[str, str] = Field(default_factory=dict, description="Component statuses")
    timestamp: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    version: str = Field(default=SERVICE_VERSION)


# Pod Models

class PutResourceResponse(BaseModel):
    path: str = Field(..., description="Stored resource path")
    version: int = Field(..., description="Monotonic version after the write")


class ContainerListingResponse(BaseModel):
    container: str
    members: List[str] = Field(default_factory=list)
