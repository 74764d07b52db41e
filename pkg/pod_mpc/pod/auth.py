"""
Request signatures and identities.

Every identity is a URL bound to a secp256k1 account. Requests carry
X-Identity, X-Timestamp and X-Signature headers; the signature is an
EIP-191 personal-message signature over method, path, body hash and
timestamp.
"""

import hashlib
import json
import logging
import time
from pathlib import Path
from typing import Callable, Dict, Generator, Iterable, Mapping, Optional

import httpx
import yaml
from eth_account import Account
from eth_account.messages import encode_defunct
from pydantic import BaseModel, Field

from ..errors import ConfigError, SignatureInvalid

logger = logging.getLogger(__name__)

IDENTITY_HEADER = "X-Identity"
TIMESTAMP_HEADER = "X-Timestamp"
SIGNATURE_HEADER = "X-Signature"


def signing_message(method: str, path: str, body: bytes, timestamp: int) -> str:
    digest = hashlib.sha256(body or b"").hexdigest()
    return f"{method.upper()}\n{path}\n{digest}\n{timestamp}"


def recover_address(message: str, signature: str) -> str:
    """
    Raises:
        SignatureInvalid: The signature does not decode
    """
    try:
        return Account.recover_message(encode_defunct(text=message), signature=signature)
    except Exception as e:
        raise SignatureInvalid(f"Undecodable signature: {e}")


class Identity(BaseModel):
    """An identity URL and the private key it signs with."""
    url: str
    private_key: str = Field(..., repr=False)

    @classmethod
    def generate(cls, url: str, seed: Optional[bytes] = None) -> "Identity":
        """Fresh key, or a deterministic one derived from ``seed``."""
        if seed is not None:
            key = "0x" + hashlib.sha256(seed + url.encode()).hexdigest()
        else:
            key = "0x" + Account.create().key.hex().removeprefix("0x")
        return cls(url=url, private_key=key)

    @property
    def address(self) -> str:
        return Account.from_key(self.private_key).address

    def sign(self, message: str) -> str:
        signed = Account.sign_message(encode_defunct(text=message), private_key=self.private_key)
        return "0x" + signed.signature.hex().removeprefix("0x")

    def sign_request(self, method: str, path: str, body: bytes,
                     timestamp: Optional[int] = None) -> Dict[str, str]:
        ts = int(time.time()) if timestamp is None else timestamp
        return {
            IDENTITY_HEADER: self.url,
            TIMESTAMP_HEADER: str(ts),
            SIGNATURE_HEADER: self.sign(signing_message(method, path, body, ts)),
        }


class SignatureAuth(httpx.Auth):
    """httpx auth flow that signs every outgoing request as ``identity``."""
    requires_request_body = True

    def __init__(self, identity: Identity, clock: Callable[[], float] = time.time):
        self.identity = identity
        self.clock = clock

    def auth_flow(self, request: httpx.Request) -> Generator[httpx.Request, httpx.Response, None]:
        headers = self.identity.sign_request(request.method, request.url.path, request.content,
                                             int(self.clock()))
        request.headers.update(headers)
        yield request


class IdentityDirectory:
    """Identity URL to account address; the trust root of every verifier."""

    def __init__(self, entries: Optional[Mapping[str, str]] = None):
        self._addresses: Dict[str, str] = dict(entries or {})

    def register(self, identity: str, address: str) -> None:
        self._addresses[identity] = address

    def register_all(self, identities: Iterable[Identity]) -> "IdentityDirectory":
        for identity in identities:
            self.register(identity.url, identity.address)
        return self

    def address_of(self, identity: str) -> Optional[str]:
        return self._addresses.get(identity)

    def __contains__(self, identity: str) -> bool:
        return identity in self._addresses

    def to_dict(self) -> Dict[str, str]:
        return dict(self._addresses)

    def save(self, path: Path) -> None:
        Path(path).write_text(yaml.safe_dump(self.to_dict(), sort_keys=True))

    @classmethod
    def load(cls, path: Path) -> "IdentityDirectory":
        """Load a YAML or JSON mapping of identity URL to address."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Identity directory {path} does not exist")
        data = yaml.safe_load(path.read_text()) or {}
        if not isinstance(data, dict):
            raise ConfigError(f"Identity directory {path} must be a mapping")
        return cls({str(k): str(v) for k, v in data.items()})


class Keyring:
    """Private keys of the identities a process may act as."""

    def __init__(self, identities: Optional[Iterable[Identity]] = None):
        self._identities: Dict[str, Identity] = {i.url: i for i in identities or []}

    def add(self, identity: Identity) -> Identity:
        self._identities[identity.url] = identity
        return identity

    def get(self, url: str) -> Identity:
        if url not in self._identities:
            raise ConfigError(f"No key for identity {url}")
        return self._identities[url]

    def __contains__(self, url: str) -> bool:
        return url in self._identities

    def __iter__(self):
        return iter(self._identities.values())

    def directory(self) -> IdentityDirectory:
        return IdentityDirectory().register_all(self._identities.values())

    def save(self, path: Path) -> None:
        Path(path).write_text(json.dumps({u: i.private_key for u, i in sorted(self._identities.items())},
                                         indent=2))

    @classmethod
    def load(cls, path: Path) -> "Keyring":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Key file {path} does not exist")
        data = json.loads(path.read_text())
        return cls(Identity(url=u, private_key=k) for u, k in data.items())


class RequestVerifier:
    """
    Checks signed request headers.

    Args:
        directory: Known identities
        clock_skew: Largest accepted age (and future offset) of a timestamp, in seconds
        clock: Time source
    """

    def __init__(self, directory: IdentityDirectory, clock_skew: float = 300.0,
                 clock: Callable[[], float] = time.time):
        self.directory = directory
        self.clock_skew = clock_skew
        self.clock = clock

    def verify(self, method: str, path: str, body: bytes, headers: Mapping[str, str]) -> str:
        """
        Returns:
            The authenticated identity URL

        Raises:
            SignatureInvalid: Missing headers, unknown identity, stale timestamp or bad signature
        """
        identity = headers.get(IDENTITY_HEADER)
        ts_raw = headers.get(TIMESTAMP_HEADER)
        signature = headers.get(SIGNATURE_HEADER)
        if not identity or not ts_raw or not signature:
            raise SignatureInvalid("Request is missing identity, timestamp or signature headers")
        try:
            timestamp = int(ts_raw)
        except ValueError:
            raise SignatureInvalid(f"Malformed timestamp {ts_raw!r}")
        if abs(self.clock() - timestamp) > self.clock_skew:
            raise SignatureInvalid(f"Timestamp {timestamp} outside the {self.clock_skew:.0f}s window")
        expected = self.directory.address_of(identity)
        if expected is None:
            raise SignatureInvalid(f"Unknown identity {identity}")
        recovered = recover_address(signing_message(method, path, body, timestamp), signature)
        if recovered.lower() != expected.lower():
            logger.warning(f"Signature for {identity} recovered to {recovered}")
            raise SignatureInvalid(f"Signature does not match identity {identity}")
        return identity


def task_message(circuit_hash: str) -> str:
    """What a data provider signs to approve a computation."""
    return f"pod-mpc task {circuit_hash}"


def verify_task_signature(circuit_hash: str, signature: str, address: str) -> bool:
    try:
        return recover_address(task_message(circuit_hash), signature).lower() == address.lower()
    except SignatureInvalid:
        return False
