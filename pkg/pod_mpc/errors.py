"""
Error hierarchy shared by every pod-mpc component.

Each error carries a stable ``code`` (used on the wire, in HTTP error bodies
and in ABORT frames), the pipeline ``stage`` it was raised in and, where it
applies, the data ``provider`` it is attributed to. ``category`` decides the
CLI exit code.
"""

from typing import Dict, Optional, Type


class ErrorCategory:
    """Exit-code categories used by the CLI."""
    VERIFICATION = "verification"
    NETWORK = "network"
    CONFIG = "config"
    OTHER = "other"


class PodMpcError(Exception):
    """Base class for all domain errors."""

    code = "PodMpcError"
    category = ErrorCategory.OTHER
    http_status = 500

    def __init__(self, message: str = "", stage: Optional[str] = None,
                 provider: Optional[str] = None):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.stage = stage
        self.provider = provider

    def to_dict(self) -> Dict[str, Optional[str]]:
        """Serialize for HTTP bodies and ABORT frames."""
        return {
            "code": self.code,
            "message": self.message,
            "stage": self.stage,
            "provider": self.provider,
        }

    def __str__(self) -> str:
        prefix = f"[{self.code}]"
        if self.provider:
            prefix += f" provider={self.provider}"
        if self.stage:
            prefix += f" stage={self.stage}"
        return f"{prefix} {self.message}"


class VerificationError(PodMpcError):
    category = ErrorCategory.VERIFICATION
    http_status = 403


class NetworkError(PodMpcError):
    category = ErrorCategory.NETWORK
    http_status = 503


# Secret sharing / arithmetic

class InvalidScheme(PodMpcError):
    code = "InvalidScheme"
    http_status = 422


class InvalidParameters(PodMpcError):
    code = "InvalidParameters"
    http_status = 422


class InsufficientShares(PodMpcError):
    code = "InsufficientShares"


class InconsistentShares(PodMpcError):
    code = "InconsistentShares"


class PoolExhausted(PodMpcError):
    code = "PoolExhausted"


# MPC engine

class PeerDisconnected(NetworkError):
    code = "PeerDisconnected"


class CircuitHashMismatch(VerificationError):
    code = "CircuitHashMismatch"
    http_status = 409


class ProtocolNotExecutable(PodMpcError):
    code = "ProtocolNotExecutable"
    http_status = 422


class ClientTimeout(NetworkError):
    code = "ClientTimeout"
    http_status = 504


class SessionAborted(PodMpcError):
    """A peer sent ABORT; ``remote_code`` holds the peer's error code."""
    code = "SessionAborted"

    def __init__(self, message: str = "", stage: Optional[str] = None,
                 provider: Optional[str] = None, remote_code: Optional[str] = None):
        super().__init__(message, stage, provider)
        self.remote_code = remote_code


# Pod service

class Unauthorized(VerificationError):
    code = "Unauthorized"


class SignatureInvalid(VerificationError):
    code = "SignatureInvalid"
    http_status = 401


class NotFound(PodMpcError):
    code = "NotFound"
    http_status = 404


class MalformedDescription(PodMpcError):
    code = "MalformedDescription"
    http_status = 422


class PodUnreachable(NetworkError):
    code = "PodUnreachable"


# Agents

class AppNotTrusted(VerificationError):
    code = "AppNotTrusted"


class ProtocolNotAllowed(VerificationError):
    code = "ProtocolNotAllowed"


class NoTrustedCA(VerificationError):
    code = "NoTrustedCA"


class PodUnauthorized(VerificationError):
    code = "PodUnauthorized"


class BadTaskSignature(VerificationError):
    code = "BadTaskSignature"


class ProtocolOutsideAllowedList(VerificationError):
    code = "ProtocolOutsideAllowedList"


class ReplayDetected(VerificationError):
    code = "ReplayDetected"
    http_status = 409


# Orchestrator

class EmptyIntersection(PodMpcError):
    code = "EmptyIntersection"
    http_status = 422


class InsufficientUnion(PodMpcError):
    code = "InsufficientUnion"
    http_status = 422


class JobTimeout(NetworkError):
    code = "JobTimeout"
    http_status = 504


class InconsistentResults(PodMpcError):
    code = "InconsistentResults"


# Differential privacy

class OutOfDomain(PodMpcError):
    code = "OutOfDomain"
    http_status = 422


class DimensionMismatch(PodMpcError):
    code = "DimensionMismatch"
    http_status = 422


class UnsupportedMode(PodMpcError):
    code = "UnsupportedMode"
    http_status = 422


# Bench / CLI

class DegenerateSweep(PodMpcError):
    code = "DegenerateSweep"


class SpawnFailure(NetworkError):
    code = "SpawnFailure"


class EmptyFixture(PodMpcError):
    code = "EmptyFixture"


class ConfigError(PodMpcError):
    code = "ConfigError"
    category = ErrorCategory.CONFIG


def _all_error_classes() -> Dict[str, Type[PodMpcError]]:
    registry: Dict[str, Type[PodMpcError]] = {}
    pending = [PodMpcError]
    while pending:
        cls = pending.pop()
        if "code" in cls.__dict__:
            registry[cls.code] = cls
        pending.extend(cls.__subclasses__())
    return registry


ERROR_CLASSES = _all_error_classes()


def error_from_dict(data: Dict[str, Optional[str]]) -> PodMpcError:
    """
    Rebuild a typed error from its serialized form.

    Args:
        data: Mapping with ``code``, ``message``, ``stage`` and ``provider``

    Returns:
        Instance of the matching error class (``PodMpcError`` for unknown codes)
    """
    cls = ERROR_CLASSES.get(data.get("code") or "", PodMpcError)
    error = cls(data.get("message") or "", stage=data.get("stage"), provider=data.get("provider"))
    if cls is PodMpcError and data.get("code"):
        error.code = data["code"]
    return error


def exit_code_for(error: BaseException) -> int:
    """CLI exit code: 2 verification, 3 network, 4 config, 1 anything else."""
    if isinstance(error, SessionAborted) and error.remote_code:
        remote = ERROR_CLASSES.get(error.remote_code)
        if remote is not None:
            return exit_code_for(remote())
    if isinstance(error, PodMpcError):
        return {
            ErrorCategory.VERIFICATION: 2,
            ErrorCategory.NETWORK: 3,
            ErrorCategory.CONFIG: 4,
        }.get(error.category, 1)
    return 1
