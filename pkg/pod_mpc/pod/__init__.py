"""Pod service exports"""

from .auth import (
    Identity,
    IdentityDirectory,
    Keyring,
    RequestVerifier,
    SignatureAuth,
    task_message,
    verify_task_signature,
)
from .client import PodClient, resolve_description
from .models import (
    AccessControlList,
    AccessMode,
    AclEntry,
    DataResource,
    DescriptionResource,
    PreferenceFile,
    TrustedActors,
    acl_path,
    description_url,
)
from .server import PodAPI, create_app
from .service import PodService
from .storage import DirectoryStorage, InMemoryStorage, StorageInterface, create_storage

__all__ = [
    "Identity",
    "IdentityDirectory",
    "Keyring",
    "RequestVerifier",
    "SignatureAuth",
    "task_message",
    "verify_task_signature",
    "PodClient",
    "resolve_description",
    "AccessControlList",
    "AccessMode",
    "AclEntry",
    "DataResource",
    "DescriptionResource",
    "PreferenceFile",
    "TrustedActors",
    "acl_path",
    "description_url",
    "PodAPI",
    "create_app",
    "PodService",
    "DirectoryStorage",
    "InMemoryStorage",
    "StorageInterface",
    "create_storage",
]
