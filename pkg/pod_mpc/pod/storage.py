"""Resource storage backends for the Pod service"""

import json
import logging
import threading
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, List, Optional
from urllib.parse import quote, unquote

from .models import StoredResource

logger = logging.getLogger(__name__)


class StorageInterface(ABC):
    """Abstract interface for resource storage"""

    @abstractmethod
    def get(self, path: str) -> Optional[StoredResource]:
        """Stored resource at ``path`` or None"""

    @abstractmethod
    def put(self, path: str, body: bytes, content_type: str) -> int:
        """Store a resource, returns its new version"""

    @abstractmethod
    def delete(self, path: str) -> bool:
        """Remove a resource, returns whether it existed"""

    @abstractmethod
    def paths(self) -> List[str]:
        """Every stored path"""

    def list_container(self, container: str) -> List[str]:
        """Direct members of ``container`` (sub-containers end in '/')."""
        prefix = container if container.endswith("/") else container + "/"
        members = set()
        for path in self.paths():
            if not path.startswith(prefix) or path == prefix:
                continue
            head, sep, _ = path[len(prefix):].partition("/")
            members.add(head + sep)
        return sorted(members)


class InMemoryStorage(StorageInterface):
    """Dictionary-backed storage; writes are serialized with monotonic versions"""

    def __init__(self):
        self._resources: Dict[str, StoredResource] = {}
        self._lock = threading.Lock()

    def get(self, path: str) -> Optional[StoredResource]:
        return self._resources.get(path)

    def put(self, path: str, body: bytes, content_type: str) -> int:
        with self._lock:
            previous = self._resources.get(path)
            version = (previous.version if previous else 0) + 1
            self._resources[path] = StoredResource(path=path, body=body, content_type=content_type,
                                                   version=version)
            return version

    def delete(self, path: str) -> bool:
        with self._lock:
            return self._resources.pop(path, None) is not None

    def paths(self) -> List[str]:
        return list(self._resources)


class DirectoryStorage(StorageInterface):
    """
    One file per resource under ``root/data`` plus a JSON sidecar with its
    metadata under ``root/meta``.

    Paths are percent-encoded into flat file names so any resource path maps
    to exactly one file in each directory.
    """

    def __init__(self, root: Path):
        self.root = Path(root)
        self.data_dir = self.root / "data"
        self.meta_dir = self.root / "meta"
        self.data_dir.mkdir(parents=True, exist_ok=True)
        self.meta_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        logger.info(f"Directory storage at {self.root}")

    def _file(self, path: str) -> Path:
        return self.data_dir / quote(path, safe="")

    def _meta(self, path: str) -> Path:
        return self.meta_dir / quote(path, safe="")

    def get(self, path: str) -> Optional[StoredResource]:
        data_file, meta_file = self._file(path), self._meta(path)
        if not data_file.exists() or not meta_file.exists():
            return None
        meta = json.loads(meta_file.read_text())
        return StoredResource(path=path, body=data_file.read_bytes(),
                              content_type=meta["content_type"], version=meta["version"])

    def put(self, path: str, body: bytes, content_type: str) -> int:
        with self._lock:
            previous = self.get(path)
            version = (previous.version if previous else 0) + 1
            self._file(path).write_bytes(body)
            self._meta(path).write_text(json.dumps({"content_type": content_type, "version": version}))
            return version

    def delete(self, path: str) -> bool:
        with self._lock:
            data_file = self._file(path)
            if not data_file.exists():
                return False
            data_file.unlink()
            self._meta(path).unlink(missing_ok=True)
            return True

    def paths(self) -> List[str]:
        return [unquote(f.name) for f in self.data_dir.iterdir() if f.is_file()]


def create_storage(directory: Optional[Path] = None) -> StorageInterface:
    return DirectoryStorage(directory) if directory else InMemoryStorage()
