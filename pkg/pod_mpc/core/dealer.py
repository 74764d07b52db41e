"""
INSECURE-TEST-ONLY trusted dealer for correlated randomness.

The dealer knows every secret it deals. It stands in for an offline
preprocessing phase and must never be used where a real deployment needs
secrecy against the dealer.
"""

import hashlib
import json
import logging
import random
import threading
from collections import OrderedDict
from typing import Dict, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, Field, PrivateAttr

from ..errors import InvalidParameters, PoolExhausted
from .field import DEFAULT_MODULUS, FixedPointParams
from .sharing import BeaverTriple, SharingScheme, ShareVector, share_values

logger = logging.getLogger(__name__)


def deal_triples(n: int, scheme: SharingScheme, rng: random.Random,
                 modulus: int = DEFAULT_MODULUS) -> List[BeaverTriple]:
    """Deal ``n`` Beaver triples with c = a*b."""
    if n == 0:
        return []
    a = [rng.randrange(modulus) for _ in range(n)]
    b = [rng.randrange(modulus) for _ in range(n)]
    c = [(x * y) % modulus for x, y in zip(a, b)]
    sa, sb, sc = (share_values(v, scheme, rng, modulus) for v in (a, b, c))
    triples = []
    for i in range(n):
        triples.append(BeaverTriple(
            a=[ShareVector(p, scheme, [sa[p][i]], modulus) for p in range(scheme.parties)],
            b=[ShareVector(p, scheme, [sb[p][i]], modulus) for p in range(scheme.parties)],
            c=[ShareVector(p, scheme, [sc[p][i]], modulus) for p in range(scheme.parties)],
        ))
    return triples


def deal_trunc_pairs(n: int, params: FixedPointParams, scheme: SharingScheme,
                     rng: random.Random,
                     modulus: int = DEFAULT_MODULUS) -> List[Tuple[List[ShareVector], List[ShareVector]]]:
    """
    Deal ``n`` masked-truncation pairs (r, floor(r / 2^f)).

    r is uniform on [0, 2^(k+f+s)). Each pair holds one ShareVector per
    party for r and for its high part.
    """
    if n == 0:
        return []
    bound = 1 << (params.k + params.f + params.s)
    rs = [rng.randrange(bound) for _ in range(n)]
    his = [r >> params.f for r in rs]
    s_r = share_values(rs, scheme, rng, modulus)
    s_hi = share_values(his, scheme, rng, modulus)
    pairs = []
    for i in range(n):
        pairs.append((
            [ShareVector(p, scheme, [s_r[p][i]], modulus) for p in range(scheme.parties)],
            [ShareVector(p, scheme, [s_hi[p][i]], modulus) for p in range(scheme.parties)],
        ))
    return pairs


def square_mask_bits(modulus: int, magnitude_bits: int) -> int:
    """Largest rho such that r < 2^rho keeps |r^2 x| below P/2 for |x| < 2^magnitude_bits."""
    return (modulus.bit_length() - 2 - magnitude_bits) // 2


class PreprocessingDemand(BaseModel):
    """Correlated randomness a circuit consumes, per party."""
    triples: int = Field(default=0, ge=0, description="Beaver triples (additive multiplication)")
    trunc_pairs: int = Field(default=0, ge=0, description="Masked-truncation pairs")
    squares: int = Field(default=0, ge=0, description="Shared random nonzero squares for masked-sign compares")
    bit_masks: Dict[int, int] = Field(default_factory=dict,
                                      description="Bit-decomposed masks keyed by bit count")

    def merge(self, other: "PreprocessingDemand") -> "PreprocessingDemand":
        masks = dict(self.bit_masks)
        for bits, count in other.bit_masks.items():
            masks[bits] = masks.get(bits, 0) + count
        return PreprocessingDemand(
            triples=self.triples + other.triples,
            trunc_pairs=self.trunc_pairs + other.trunc_pairs,
            squares=self.squares + other.squares,
            bit_masks=masks,
        )

    @property
    def empty(self) -> bool:
        return not (self.triples or self.trunc_pairs or self.squares or any(self.bit_masks.values()))


class BitMask(BaseModel):
    """Shares of m random bits and of a wide random high part."""
    bits: List[int]
    high: int


class PartyMaterial(BaseModel):
    """One party's slice of a job's correlated randomness, consumed in order."""
    party_id: int
    triples_a: List[int] = Field(default_factory=list)
    triples_b: List[int] = Field(default_factory=list)
    triples_c: List[int] = Field(default_factory=list)
    trunc_r: List[int] = Field(default_factory=list)
    trunc_hi: List[int] = Field(default_factory=list)
    squares: List[int] = Field(default_factory=list)
    bit_masks: Dict[int, List[BitMask]] = Field(default_factory=dict)

    _cursor: Dict[str, int] = PrivateAttr(default_factory=dict)

    def _take(self, name: str, pool: Sequence, n: int) -> Sequence:
        start = self._cursor.get(name, 0)
        if start + n > len(pool):
            raise PoolExhausted(
                f"Party {self.party_id} needs {n} more {name} but only {len(pool) - start} remain"
            )
        self._cursor[name] = start + n
        return pool[start:start + n]

    def take_triples(self, n: int) -> Tuple[Sequence[int], Sequence[int], Sequence[int]]:
        start = self._cursor.get("triples", 0)
        a = self._take("triples", self.triples_a, n)
        self._cursor["triples"] = start
        b = self._take("triples", self.triples_b, n)
        self._cursor["triples"] = start
        c = self._take("triples", self.triples_c, n)
        return a, b, c

    def take_trunc_pairs(self, n: int) -> Tuple[Sequence[int], Sequence[int]]:
        start = self._cursor.get("trunc", 0)
        r = self._take("trunc", self.trunc_r, n)
        self._cursor["trunc"] = start
        hi = self._take("trunc", self.trunc_hi, n)
        return r, hi

    def take_squares(self, n: int) -> Sequence[int]:
        return self._take("squares", self.squares, n)

    def take_bit_masks(self, bits: int, n: int) -> Sequence[BitMask]:
        return self._take(f"mask{bits}", self.bit_masks.get(bits, []), n)

    def remaining(self) -> Dict[str, int]:
        return {
            "triples": len(self.triples_a) - self._cursor.get("triples", 0),
            "trunc_pairs": len(self.trunc_r) - self._cursor.get("trunc", 0),
            "squares": len(self.squares) - self._cursor.get("squares", 0),
        }


class InsecureTestDealer:
    """
    Deals a whole job's correlated randomness from one seeded generator.

    Material for a job is a pure function of (seed, job_id, scheme, demand),
    so every party asking for its slice sees consistent values. Per-party
    fetches go through a cache that drops a job once every party has its
    slice, and holds at most ``max_cached_jobs`` jobs.
    """

    def __init__(self, seed: int = 0, max_cached_jobs: int = 64):
        self.seed = seed
        self.max_cached_jobs = max_cached_jobs
        self._cache: "OrderedDict[Tuple[str, str], List[PartyMaterial]]" = OrderedDict()
        self._served: Dict[Tuple[str, str], Set[int]] = {}
        self._lock = threading.Lock()
        logger.warning("InsecureTestDealer in use: correlated randomness is known to the dealer")

    def _rng_for(self, job_id: str) -> random.Random:
        digest = hashlib.sha256(f"{self.seed}:{job_id}".encode()).digest()
        return random.Random(int.from_bytes(digest[:16], "big"))

    @staticmethod
    def _cache_key(job_id: str, scheme: SharingScheme, demand: PreprocessingDemand, modulus: int,
                   params: FixedPointParams, magnitude_bits: Optional[int]) -> Tuple[str, str]:
        shape = json.dumps([scheme.to_dict(), demand.model_dump(), modulus, params.model_dump(),
                            magnitude_bits], sort_keys=True)
        return job_id, hashlib.sha256(shape.encode()).hexdigest()

    def material_for_job(self, job_id: str, scheme: SharingScheme, demand: PreprocessingDemand,
                         modulus: int, params: Optional[FixedPointParams] = None,
                         magnitude_bits: Optional[int] = None) -> List[PartyMaterial]:
        """Every party's slice for ``job_id``, dealt afresh."""
        material = deal_material(demand, scheme, self._rng_for(job_id), modulus,
                                 params or FixedPointParams(), magnitude_bits)
        logger.info(f"Dealt material for job {job_id}: {demand.model_dump()}")
        return material

    def party_material(self, job_id: str, party_id: int, scheme: SharingScheme,
                       demand: PreprocessingDemand, modulus: int,
                       params: Optional[FixedPointParams] = None,
                       magnitude_bits: Optional[int] = None) -> PartyMaterial:
        params = params or FixedPointParams()
        key = self._cache_key(job_id, scheme, demand, modulus, params, magnitude_bits)
        with self._lock:
            material = self._cache.get(key)
            if material is None:
                material = self.material_for_job(job_id, scheme, demand, modulus, params, magnitude_bits)
                self._cache[key] = material
                self._served[key] = set()
                while len(self._cache) > self.max_cached_jobs:
                    evicted, _ = self._cache.popitem(last=False)
                    self._served.pop(evicted, None)
                    logger.warning(f"Dealer cache full, dropped job {evicted[0]}")
            slice_ = material[party_id].model_copy(deep=True)
            self._served[key].add(party_id)
            if len(self._served[key]) == scheme.parties:
                del self._cache[key]
                del self._served[key]
                logger.debug(f"Every party fetched material for job {job_id}")
        return slice_

    def cached_jobs(self) -> List[str]:
        return [job_id for job_id, _ in self._cache]

    def forget(self, job_id: str) -> None:
        with self._lock:
            for key in [k for k in self._cache if k[0] == job_id]:
                del self._cache[key]
                self._served.pop(key, None)


def deal_material(demand: PreprocessingDemand, scheme: SharingScheme, rng: random.Random,
                  modulus: int, params: FixedPointParams,
                  magnitude_bits: Optional[int] = None) -> List[PartyMaterial]:
    """
    Generate every party's preprocessing slice for a demand.

    Args:
        demand: Counts per kind of correlated randomness
        scheme: Sharing scheme of the job
        rng: Dealer randomness
        modulus: Field modulus
        params: Fixed-point layout (truncation pairs, mask widths)
        magnitude_bits: Bound on compared magnitudes for masked-sign squares
    """
    p = scheme.parties
    out = [PartyMaterial(party_id=i) for i in range(p)]

    if demand.triples:
        a = [rng.randrange(modulus) for _ in range(demand.triples)]
        b = [rng.randrange(modulus) for _ in range(demand.triples)]
        c = [(x * y) % modulus for x, y in zip(a, b)]
        for name, values in (("triples_a", a), ("triples_b", b), ("triples_c", c)):
            for pid, shares in enumerate(share_values(values, scheme, rng, modulus)):
                setattr(out[pid], name, shares)

    if demand.trunc_pairs:
        bound = 1 << (params.k + params.f + params.s)
        rs = [rng.randrange(bound) for _ in range(demand.trunc_pairs)]
        for pid, shares in enumerate(share_values(rs, scheme, rng, modulus)):
            out[pid].trunc_r = shares
        for pid, shares in enumerate(share_values([r >> params.f for r in rs], scheme, rng, modulus)):
            out[pid].trunc_hi = shares

    if demand.squares:
        mag = magnitude_bits if magnitude_bits is not None else params.k + params.f
        rho = square_mask_bits(modulus, mag)
        if rho < 1:
            raise InvalidParameters(f"No room for square masks: modulus too small for {mag}-bit magnitudes")
        squares = [rng.randrange(1, 1 << rho) ** 2 for _ in range(demand.squares)]
        for pid, shares in enumerate(share_values(squares, scheme, rng, modulus)):
            out[pid].squares = shares

    for bits, count in sorted(demand.bit_masks.items()):
        if not count:
            continue
        raw_bits = [[rng.randrange(2) for _ in range(bits)] for _ in range(count)]
        # high part keeps the opened value statistically hiding: [0, 2^(l + s - m)) with l = m + 1
        highs = [rng.randrange(1 << (params.s + 1)) for _ in range(count)]
        flat = [b for row in raw_bits for b in row]
        bit_shares = share_values(flat, scheme, rng, modulus)
        high_shares = share_values(highs, scheme, rng, modulus)
        for pid in range(p):
            masks = []
            for j in range(count):
                masks.append(BitMask(bits=bit_shares[pid][j * bits:(j + 1) * bits],
                                     high=high_shares[pid][j]))
            out[pid].bit_masks[bits] = masks
    return out
