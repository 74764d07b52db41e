"""
Shamir and additive secret sharing.

Shamir evaluation points are ``party_id + 1``. Reconstruction interpolates
at zero with Lagrange coefficients cached per point set.
"""

import random
import struct
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

from ..errors import InconsistentShares, InsufficientShares, InvalidScheme
from .field import DEFAULT_MODULUS, FieldElement, decode_elements, encode_elements


class SchemeKind(str, Enum):
    SHAMIR = "shamir"
    ADDITIVE = "additive"


_SCHEME_TAGS = {SchemeKind.SHAMIR: 1, SchemeKind.ADDITIVE: 2}
_TAG_SCHEMES = {v: k for k, v in _SCHEME_TAGS.items()}


@dataclass(frozen=True)
class SharingScheme:
    """Shamir(t, p) or Additive(p)."""
    kind: SchemeKind
    parties: int
    threshold: int = 0

    def __post_init__(self):
        if self.kind == SchemeKind.SHAMIR:
            if self.threshold < 1 or self.threshold > (self.parties - 1) // 2:
                raise InvalidScheme(
                    f"Shamir needs 1 <= t <= (p-1)/2, got t={self.threshold}, p={self.parties}"
                )
        elif self.kind == SchemeKind.ADDITIVE:
            if self.parties < 2:
                raise InvalidScheme(f"Additive sharing needs p >= 2, got {self.parties}")
        else:
            raise InvalidScheme(f"Unknown scheme kind {self.kind}")

    @classmethod
    def shamir(cls, t: int, p: int) -> "SharingScheme":
        return cls(SchemeKind.SHAMIR, p, t)

    @classmethod
    def additive(cls, p: int) -> "SharingScheme":
        return cls(SchemeKind.ADDITIVE, p, p - 1)

    @classmethod
    def for_parties(cls, kind: SchemeKind, p: int) -> "SharingScheme":
        """Maximal-threshold scheme of a kind for ``p`` parties."""
        if kind == SchemeKind.SHAMIR:
            return cls.shamir(max(1, (p - 1) // 2), p)
        return cls.additive(p)

    @property
    def is_shamir(self) -> bool:
        return self.kind == SchemeKind.SHAMIR

    @property
    def reconstruction_size(self) -> int:
        """Shares needed to reconstruct."""
        return self.threshold + 1 if self.is_shamir else self.parties

    @property
    def tag(self) -> int:
        return _SCHEME_TAGS[self.kind]

    def to_dict(self) -> Dict[str, Union[str, int]]:
        return {"kind": self.kind.value, "parties": self.parties, "threshold": self.threshold}

    @classmethod
    def from_dict(cls, data: Dict) -> "SharingScheme":
        return cls(SchemeKind(data["kind"]), int(data["parties"]), int(data.get("threshold", 0)))


@dataclass
class ShareVector:
    """One party's shares of a secret vector."""
    party_id: int
    scheme: SharingScheme
    values: List[int]
    modulus: int = DEFAULT_MODULUS

    def __add__(self, other: "ShareVector") -> "ShareVector":
        self._check(other)
        return ShareVector(self.party_id, self.scheme,
                           [(a + b) % self.modulus for a, b in zip(self.values, other.values)],
                           self.modulus)

    def __sub__(self, other: "ShareVector") -> "ShareVector":
        self._check(other)
        return ShareVector(self.party_id, self.scheme,
                           [(a - b) % self.modulus for a, b in zip(self.values, other.values)],
                           self.modulus)

    def scale(self, c: int) -> "ShareVector":
        return ShareVector(self.party_id, self.scheme,
                           [(a * c) % self.modulus for a in self.values], self.modulus)

    def _check(self, other: "ShareVector") -> None:
        if (self.party_id, self.scheme, self.modulus) != (other.party_id, other.scheme, other.modulus):
            raise InconsistentShares("Share vectors differ in party, scheme or field")
        if len(self.values) != len(other.values):
            raise InconsistentShares("Share vectors differ in length")


@dataclass
class BeaverTriple:
    """Shares of (a, b, c = a*b); each field holds one ShareVector per party."""
    a: List[ShareVector]
    b: List[ShareVector]
    c: List[ShareVector]


@lru_cache(maxsize=1024)
def lagrange_coefficients(points: Tuple[int, ...], modulus: int, at: int = 0) -> Tuple[int, ...]:
    """Coefficients l_i with f(at) = sum l_i f(points[i]) for deg < len(points)."""
    coeffs = []
    for i, xi in enumerate(points):
        num, den = 1, 1
        for j, xj in enumerate(points):
            if i != j:
                num = num * (at - xj) % modulus
                den = den * (xi - xj) % modulus
        coeffs.append(num * pow(den, -1, modulus) % modulus)
    return tuple(coeffs)


def evaluation_point(party_id: int) -> int:
    return party_id + 1


def _eval_poly(coeffs: Sequence[int], x: int, modulus: int) -> int:
    # Horner
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % modulus
    return acc


def shamir_share_values(secrets: Sequence[int], threshold: int, parties: int,
                        rng: random.Random, modulus: int) -> List[List[int]]:
    """Per-party share lists for a vector of secrets under a degree-``threshold`` polynomial."""
    out: List[List[int]] = [[] for _ in range(parties)]
    for secret in secrets:
        coeffs = [secret % modulus] + [rng.randrange(modulus) for _ in range(threshold)]
        for pid in range(parties):
            out[pid].append(_eval_poly(coeffs, pid + 1, modulus))
    return out


def additive_share_values(secrets: Sequence[int], parties: int,
                          rng: random.Random, modulus: int) -> List[List[int]]:
    out: List[List[int]] = [[] for _ in range(parties)]
    for secret in secrets:
        acc = 0
        for pid in range(parties - 1):
            r = rng.randrange(modulus)
            out[pid].append(r)
            acc += r
        out[parties - 1].append((secret - acc) % modulus)
    return out


def share_values(secrets: Sequence[int], scheme: SharingScheme,
                 rng: random.Random, modulus: int = DEFAULT_MODULUS) -> List[List[int]]:
    if scheme.is_shamir:
        return shamir_share_values(secrets, scheme.threshold, scheme.parties, rng, modulus)
    return additive_share_values(secrets, scheme.parties, rng, modulus)


def share_vector(secrets: Sequence[int], scheme: SharingScheme, rng: random.Random,
                 modulus: int = DEFAULT_MODULUS) -> List[ShareVector]:
    """Share a vector of secrets; returns one ShareVector per party."""
    per_party = share_values(secrets, scheme, rng, modulus)
    return [ShareVector(pid, scheme, values, modulus) for pid, values in enumerate(per_party)]


def share(secret: Union[FieldElement, int], scheme: SharingScheme, rng: random.Random,
          modulus: Optional[int] = None) -> List[ShareVector]:
    """
    Share a single secret.

    Args:
        secret: Field element (or integer, reduced into the field)
        scheme: Validated sharing scheme
        rng: Seeded randomness source

    Returns:
        ``p`` share vectors of length 1
    """
    if isinstance(secret, FieldElement):
        modulus = secret.modulus
        value = secret.value
    else:
        modulus = modulus or DEFAULT_MODULUS
        value = secret % modulus
    return share_vector([value], scheme, rng, modulus)


def _check_consistent(shares: Sequence[ShareVector]) -> None:
    first = shares[0]
    for s in shares[1:]:
        if s.scheme != first.scheme or s.modulus != first.modulus:
            raise InconsistentShares("Shares carry different scheme descriptors")
        if len(s.values) != len(first.values):
            raise InconsistentShares("Shares have different lengths")


def reconstruct_vector(shares: Sequence[ShareVector], check: bool = False) -> List[int]:
    """
    Reconstruct a shared vector.

    Args:
        shares: Share vectors of distinct parties
        check: For Shamir, verify redundant shares lie on the same polynomial

    Raises:
        InsufficientShares: Fewer than t+1 (Shamir) or p (additive) distinct shares
        InconsistentShares: Mixed descriptors or, with ``check``, off-polynomial shares
    """
    if not shares:
        raise InsufficientShares("No shares given")
    _check_consistent(shares)
    scheme = shares[0].scheme
    modulus = shares[0].modulus
    distinct = {s.party_id: s for s in shares}
    if len(distinct) < scheme.reconstruction_size:
        raise InsufficientShares(
            f"Need {scheme.reconstruction_size} shares, got {len(distinct)}"
        )

    if not scheme.is_shamir:
        if set(distinct) != set(range(scheme.parties)):
            raise InsufficientShares("Additive reconstruction needs every party's share")
        width = len(shares[0].values)
        return [sum(distinct[p].values[i] for p in range(scheme.parties)) % modulus
                for i in range(width)]

    ordered = sorted(distinct.values(), key=lambda s: s.party_id)
    basis = ordered[:scheme.threshold + 1]
    points = tuple(evaluation_point(s.party_id) for s in basis)
    coeffs = lagrange_coefficients(points, modulus)
    width = len(basis[0].values)
    secrets = [sum(c * s.values[i] for c, s in zip(coeffs, basis)) % modulus for i in range(width)]

    if check and len(ordered) > len(basis):
        for extra in ordered[len(basis):]:
            at = evaluation_point(extra.party_id)
            coeffs_at = lagrange_coefficients(points, modulus, at)
            for i in range(width):
                expected = sum(c * s.values[i] for c, s in zip(coeffs_at, basis)) % modulus
                if expected != extra.values[i]:
                    raise InconsistentShares(
                        f"Share of party {extra.party_id} is off the sharing polynomial"
                    )
    return secrets


def reconstruct(shares: Sequence[ShareVector], check: bool = False) -> FieldElement:
    """Reconstruct a single shared secret."""
    values = reconstruct_vector(shares, check=check)
    return FieldElement(values[0], shares[0].modulus)


_SHARE_HEADER = struct.Struct("<HBHHI")


def encode_share_vector(share_vec: ShareVector) -> bytes:
    """(party_id u16, scheme u8, t u16, p u16, count u32, elements)."""
    scheme = share_vec.scheme
    header = _SHARE_HEADER.pack(share_vec.party_id, scheme.tag, scheme.threshold,
                                scheme.parties, len(share_vec.values))
    return header + encode_elements(share_vec.values, share_vec.modulus)


def decode_share_vector(data: bytes, modulus: int = DEFAULT_MODULUS) -> ShareVector:
    party_id, tag, t, p, count = _SHARE_HEADER.unpack_from(data)
    if tag not in _TAG_SCHEMES:
        raise InvalidScheme(f"Unknown scheme tag {tag}")
    kind = _TAG_SCHEMES[tag]
    scheme = SharingScheme(kind, p, t)
    values = decode_elements(data[_SHARE_HEADER.size:], modulus)
    if len(values) != count:
        raise InconsistentShares(f"Header announces {count} elements, payload has {len(values)}")
    return ShareVector(party_id, scheme, values, modulus)
