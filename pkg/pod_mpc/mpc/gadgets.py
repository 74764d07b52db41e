"""
Interactive MPC building blocks.

Gadgets are generators. Whenever a gadget needs communication it yields a
list of ``Exchange`` requests and is resumed with one ``{peer: elements}``
dict per request. The session scheduler batches the requests of every
runnable gate into a single round, so independent gadgets share rounds.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Dict, Generator, List, Optional, Sequence

from ..core.dealer import PartyMaterial
from ..core.field import FixedPointParams, to_signed
from ..core.sharing import SharingScheme, lagrange_coefficients, share_values
from .noise import NoiseSampler

logger = logging.getLogger(__name__)

Received = Dict[int, List[int]]


class ExchangeKind:
    INPUT = "input"
    RESHARE = "reshare"
    OPEN = "open"
    NOISE = "noise"
    BEAVER = "beaver"


@dataclass
class Exchange:
    """Elements to send to each peer and element counts expected back."""
    kind: str
    sends: Dict[int, List[int]] = field(default_factory=dict)
    expect: Dict[int, int] = field(default_factory=dict)


Gadget = Generator[List[Exchange], List[Received], List[int]]


class GadgetContext:
    """Everything a gadget may touch on one party."""

    def __init__(self, party_id: int, scheme: SharingScheme, modulus: int,
                 params: FixedPointParams, material: Optional[PartyMaterial],
                 share_rng: random.Random, noise_sampler: NoiseSampler):
        self.party_id = party_id
        self.scheme = scheme
        self.modulus = modulus
        self.params = params
        self.material = material if material is not None else PartyMaterial(party_id=party_id)
        self.share_rng = share_rng
        self.noise_sampler = noise_sampler
        self.peers = [q for q in range(scheme.parties) if q != party_id]
        self.noise_log: List[List[int]] = []

    @property
    def parties(self) -> int:
        return self.scheme.parties

    def lift(self, values: Sequence[int]) -> List[int]:
        """This party's share of a public vector."""
        if self.scheme.is_shamir or self.party_id == 0:
            return [v % self.modulus for v in values]
        return [0] * len(values)

    def share_out(self, values: Sequence[int]) -> List[List[int]]:
        return share_values([v % self.modulus for v in values], self.scheme, self.share_rng, self.modulus)

    def add(self, a: Sequence[int], b: Sequence[int]) -> List[int]:
        return [(x + y) % self.modulus for x, y in zip(a, b)]

    def sub(self, a: Sequence[int], b: Sequence[int]) -> List[int]:
        return [(x - y) % self.modulus for x, y in zip(a, b)]

    def scale(self, a: Sequence[int], c: int) -> List[int]:
        return [(x * c) % self.modulus for x in a]

    def recombine(self, received: Received) -> List[int]:
        """Reconstruct opened values from every party's shares."""
        width = len(received[self.party_id])
        if self.scheme.is_shamir:
            parties = tuple(sorted(received))
            coeffs = lagrange_coefficients(tuple(q + 1 for q in parties), self.modulus)
            return [sum(c * received[q][i] for c, q in zip(coeffs, parties)) % self.modulus
                    for i in range(width)]
        return [sum(received[q][i] for q in received) % self.modulus for i in range(width)]


def share_input(ctx: GadgetContext, owner: int, width: int,
                values: Optional[Sequence[int]] = None) -> Gadget:
    """Owner secret-shares ``values``; everyone returns its share."""
    if ctx.party_id == owner:
        shares = ctx.share_out(values)
        sends = {q: shares[q] for q in ctx.peers}
        expect: Dict[int, int] = {}
    else:
        shares = None
        sends = {}
        expect = {owner: width}
    [received] = yield [Exchange(ExchangeKind.INPUT, sends, expect)]
    if shares is not None:
        return shares[ctx.party_id]
    return received[owner]


def open_values(ctx: GadgetContext, shares: Sequence[int], kind: str = ExchangeKind.OPEN) -> Gadget:
    """Broadcast shares and reconstruct the public values."""
    shares = list(shares)
    ex = Exchange(kind, {q: shares for q in ctx.peers},
                  {q: len(shares) for q in ctx.peers})
    [received] = yield [ex]
    received = dict(received)
    received[ctx.party_id] = shares
    return ctx.recombine(received)


def reshare_products(ctx: GadgetContext, products: Sequence[int]) -> Gadget:
    """Degree reduction: reshare local degree-2t products and recombine."""
    subshares = ctx.share_out(products)
    ex = Exchange(ExchangeKind.RESHARE, {q: subshares[q] for q in ctx.peers},
                  {q: len(products) for q in ctx.peers})
    [received] = yield [ex]
    received = dict(received)
    received[ctx.party_id] = subshares[ctx.party_id]
    return ctx.recombine(received)


def secure_multiply(ctx: GadgetContext, x: Sequence[int], y: Sequence[int]) -> Gadget:
    """Elementwise product of two shared vectors in one round."""
    P = ctx.modulus
    if ctx.scheme.is_shamir:
        local = [(a * b) % P for a, b in zip(x, y)]
        return (yield from reshare_products(ctx, local))

    n = len(x)
    a, b, c = ctx.material.take_triples(n)
    d_e = yield from open_values(ctx, ctx.sub(x, a) + ctx.sub(y, b), ExchangeKind.BEAVER)
    d, e = d_e[:n], d_e[n:]
    out = []
    for i in range(n):
        z = c[i] + d[i] * b[i] + e[i] * a[i]
        if ctx.party_id == 0:
            z += d[i] * e[i]
        out.append(z % P)
    return out


def truncate(ctx: GadgetContext, x: Sequence[int]) -> Gadget:
    """Probabilistic truncation by 2^f through a masked open."""
    f, k = ctx.params.f, ctx.params.k
    n = len(x)
    r, r_hi = ctx.material.take_trunc_pairs(n)
    bias = 1 << (k + f)
    masked = ctx.add(ctx.add(x, ctx.lift([bias] * n)), r)
    c = yield from open_values(ctx, masked)
    shifted = [(ci >> f) - (1 << k) for ci in c]
    return ctx.sub(ctx.lift(shifted), r_hi)


def compare_masked_sign(ctx: GadgetContext, x: Sequence[int]) -> Gadget:
    """
    Public bits [x > 0] via r^2 masking.

    Reveals the sign of each compared value and nothing about its magnitude
    beyond what r^2 x statistically hides.
    """
    squares = ctx.material.take_squares(len(x))
    y = yield from secure_multiply(ctx, x, squares)
    s = yield from open_values(ctx, y)
    half = (ctx.modulus - 1) // 2
    return [1 if 0 < v <= half else 0 for v in s]


def bit_less_than(ctx: GadgetContext, public: Sequence[int],
                  bits: Sequence[Sequence[int]], m: int) -> Gadget:
    """
    Shares of [c < r] for public c and bit-shared r, both m bits wide.

    Builds a log-depth tree of (lt, eq) pairs, least significant bit first.
    """
    one = ctx.lift([1])[0]
    P = ctx.modulus
    segments = []
    for c, r_bits in zip(public, bits):
        leaves = []
        for i in range(m):
            ci = (c >> i) & 1
            ri = r_bits[i]
            lt = 0 if ci else ri
            eq = ri if ci else (one - ri) % P
            leaves.append((lt, eq))
        segments.append(leaves)

    while len(segments[0]) > 1:
        xs: List[int] = []
        ys: List[int] = []
        for seg in segments:
            for j in range(0, len(seg) - 1, 2):
                (lt_lo, eq_lo), (_, eq_hi) = seg[j], seg[j + 1]
                xs += [eq_hi, eq_hi]
                ys += [lt_lo, eq_lo]
        prods = yield from secure_multiply(ctx, xs, ys)
        pos = 0
        merged = []
        for seg in segments:
            nxt = []
            for j in range(0, len(seg) - 1, 2):
                lt_hi = seg[j + 1][0]
                nxt.append(((lt_hi + prods[pos]) % P, prods[pos + 1]))
                pos += 2
            if len(seg) % 2:
                nxt.append(seg[-1])
            merged.append(nxt)
        segments = merged
    return [seg[0][0] for seg in segments]


def compare_bitwise(ctx: GadgetContext, x: Sequence[int], bits: int) -> Gadget:
    """
    Shares of [x > 0] for signed x with |x| < 2^(bits-1), without revealing it.

    Computes the sign of a = -x by masked open of a + 2^(bits-1) + r with a
    bit-decomposed r, then a comparison of the low bits against the mask.
    """
    m = bits - 1
    n = len(x)
    masks = ctx.material.take_bit_masks(m, n)
    a = [(-v) % ctx.modulus for v in x]
    r_low = [sum((b << i) for i, b in enumerate(mask.bits)) % ctx.modulus for mask in masks]
    r_high = [(mask.high << m) % ctx.modulus for mask in masks]
    masked = ctx.add(ctx.add(ctx.add(a, ctx.lift([1 << m] * n)), r_high), r_low)
    c = yield from open_values(ctx, masked)
    c_low = [ci % (1 << m) for ci in c]
    u = yield from bit_less_than(ctx, c_low, [mask.bits for mask in masks], m)
    a_mod = ctx.add(ctx.sub(ctx.lift(c_low), r_low), ctx.scale(u, 1 << m))
    inv = pow(1 << m, -1, ctx.modulus)
    return ctx.scale(ctx.sub(a_mod, a), inv)


def argmax_tournament(ctx: GadgetContext, values: Sequence[int]) -> Gadget:
    """Public index of the first maximum of a shared vector."""
    contenders = [(i, v) for i, v in enumerate(values)]
    while len(contenders) > 1:
        pairs = [(contenders[j], contenders[j + 1]) for j in range(0, len(contenders) - 1, 2)]
        diffs = [(right[1] - left[1]) % ctx.modulus for left, right in pairs]
        right_wins = yield from compare_masked_sign(ctx, diffs)
        nxt = [right if won else left for (left, right), won in zip(pairs, right_wins)]
        if len(contenders) % 2:
            nxt.append(contenders[-1])
        contenders = nxt
    return [contenders[0][0]]


def joint_noise(ctx: GadgetContext, scale: float, width: int) -> Gadget:
    """Shares of summed per-player Gamma-difference noise (Laplace(scale) overall)."""
    contribution = ctx.noise_sampler.encoded_contribution(scale, width, ctx.params)
    ctx.noise_log.append(contribution)
    shares = ctx.share_out(contribution)
    ex = Exchange(ExchangeKind.NOISE, {q: shares[q] for q in ctx.peers},
                  {q: width for q in ctx.peers})
    [received] = yield [ex]
    total = list(shares[ctx.party_id])
    for q in ctx.peers:
        total = ctx.add(total, received[q])
    return total


def public_argmax(values: Sequence[int], modulus: int) -> int:
    signed = [to_signed(v, modulus) for v in values]
    return signed.index(max(signed))


def public_truncate(values: Sequence[int], params: FixedPointParams, modulus: int) -> List[int]:
    return [(to_signed(v, modulus) >> params.f) % modulus for v in values]


__all__ = [
    "Exchange", "ExchangeKind", "GadgetContext", "Gadget",
    "share_input", "open_values", "reshare_products", "secure_multiply", "truncate",
    "compare_masked_sign", "compare_bitwise", "bit_less_than", "argmax_tournament",
    "joint_noise", "public_argmax", "public_truncate",
]
