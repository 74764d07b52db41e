"""Encryption and computation agent exports"""

from .computation_agent import ComputationAgent, ComputationAgentAPI
from .dealer_service import DealerAPI, HttpMaterialSource, LocalMaterialSource, MaterialSource
from .encryption_agent import EncryptionAgent, EncryptionAgentAPI
from .event_log import EventLogInterface, InMemoryEventLog, NullEventLog, create_event_log
from .models import (
    AbortRequest,
    AgentInfo,
    CAEndpoint,
    ComputationResult,
    ComputationTask,
    EncryptionReceipt,
    EncryptionTask,
    ExpectedClient,
    TaskSignature,
)
from .replay import ReplayCache

__all__ = [
    "ComputationAgent",
    "ComputationAgentAPI",
    "DealerAPI",
    "HttpMaterialSource",
    "LocalMaterialSource",
    "MaterialSource",
    "EncryptionAgent",
    "EncryptionAgentAPI",
    "EventLogInterface",
    "InMemoryEventLog",
    "NullEventLog",
    "create_event_log",
    "AbortRequest",
    "AgentInfo",
    "CAEndpoint",
    "ComputationResult",
    "ComputationTask",
    "EncryptionReceipt",
    "EncryptionTask",
    "ExpectedClient",
    "TaskSignature",
    "ReplayCache",
]
