"""
Access-controlled resource operations of one Pod.

The owner may do anything. Other identities need a READ or WRITE grant in
the resource's ``.acl.json`` sidecar; listing a container needs a grant on
the container's own sidecar. ACL sidecars are writable by the owner only.
"""

import json
import logging
from typing import List, Optional

from ..errors import InvalidParameters, NotFound, Unauthorized
from .models import ACL_SUFFIX, AccessControlList, AccessMode, StoredResource, acl_path
from .storage import StorageInterface, create_storage

logger = logging.getLogger(__name__)


def normalize_path(path: str) -> str:
    if not path.startswith("/"):
        path = "/" + path
    if "//" in path or "/../" in path or path.endswith("/.."):
        raise InvalidParameters(f"Malformed resource path {path!r}")
    return path


class PodService:
    """
    Args:
        owner: Identity URL of the Pod owner
        storage: Backend holding resources and ACL sidecars
    """

    def __init__(self, owner: str, storage: Optional[StorageInterface] = None):
        self.owner = owner
        self.storage = storage or create_storage()

    # Access control

    def acl_of(self, path: str) -> AccessControlList:
        stored = self.storage.get(acl_path(path))
        if stored is None:
            return AccessControlList()
        return AccessControlList.model_validate(json.loads(stored.body))

    def can(self, identity: str, path: str, mode: AccessMode) -> bool:
        if identity == self.owner:
            return True
        if path.endswith(ACL_SUFFIX):
            return False
        return self.acl_of(path).allows(identity, mode)

    def _require(self, identity: str, path: str, mode: AccessMode) -> None:
        if not self.can(identity, path, mode):
            logger.info(f"Denied {mode.value} on {path} to {identity}")
            raise Unauthorized(f"{identity} may not {mode.value} {path}")

    # Operations

    def put_resource(self, identity: str, path: str, body: bytes,
                     content_type: str = "application/json",
                     acl: Optional[AccessControlList] = None) -> int:
        """
        Store ``body`` at ``path``, optionally replacing its ACL.

        Returns:
            The new version of the resource

        Raises:
            Unauthorized: Writer lacks WRITE, or a non-owner tries to set an ACL
        """
        path = normalize_path(path)
        if path.endswith("/"):
            raise InvalidParameters("Containers are created implicitly; PUT a resource inside them")
        self._require(identity, path, AccessMode.WRITE)
        if acl is not None and identity != self.owner:
            raise Unauthorized(f"Only the owner may change the ACL of {path}")
        if path.endswith(ACL_SUFFIX):
            AccessControlList.model_validate(json.loads(body))
        version = self.storage.put(path, body, content_type)
        if acl is not None:
            self.storage.put(acl_path(path), acl.model_dump_json().encode(), "application/json")
        logger.debug(f"Stored {path} v{version} ({len(body)} bytes)")
        return version

    def get_resource(self, identity: str, path: str) -> StoredResource:
        """
        Raises:
            Unauthorized: Reader lacks READ (checked before existence)
            NotFound: Authorized, but nothing stored at ``path``
        """
        path = normalize_path(path)
        self._require(identity, path, AccessMode.READ)
        stored = self.storage.get(path)
        if stored is None:
            raise NotFound(f"No resource at {path}")
        return stored

    def delete_resource(self, identity: str, path: str) -> None:
        path = normalize_path(path)
        if identity != self.owner:
            raise Unauthorized(f"Only the owner may delete {path}")
        if not self.storage.delete(path):
            raise NotFound(f"No resource at {path}")
        self.storage.delete(acl_path(path))

    def list_container(self, identity: str, container: str) -> List[str]:
        """Member names; needs READ on the container itself, not on its members."""
        container = normalize_path(container)
        if not container.endswith("/"):
            container += "/"
        self._require(identity, container, AccessMode.READ)
        members = [m for m in self.storage.list_container(container) if not m.endswith(ACL_SUFFIX)]
        if not members and identity != self.owner:
            raise NotFound(f"No container at {container}")
        return members

    def set_acl(self, identity: str, path: str, acl: AccessControlList) -> int:
        path = normalize_path(path)
        if identity != self.owner:
            raise Unauthorized(f"Only the owner may change the ACL of {path}")
        return self.storage.put(acl_path(path), acl.model_dump_json().encode(), "application/json")

    def revoke(self, identity: str, path: str, agent: str) -> int:
        """Remove every grant ``agent`` holds on ``path``."""
        return self.set_acl(identity, path, self.acl_of(normalize_path(path)).revoke(agent))
