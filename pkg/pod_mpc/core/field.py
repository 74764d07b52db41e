"""
Prime-field arithmetic and fixed-point encoding.

Values live in Z_P for a prime P. Signed quantities use the usual MPC
convention: v in [0, (P-1)/2] is non-negative, v in ((P-1)/2, P) encodes
v - P. Reals are encoded with ``f`` fractional bits.
"""

import struct
from dataclasses import dataclass
from typing import Iterable, List, Sequence

from pydantic import BaseModel, Field

from ..errors import InvalidParameters

# Mersenne primes used as field moduli
M61 = 2**61 - 1
M127 = 2**127 - 1

DEFAULT_MODULUS = M61

MODULUS_PRESETS = {
    "m61": M61,
    "m127": M127,
}


def resolve_modulus(value) -> int:
    """Accept a preset name ("m61", "m127") or an integer modulus."""
    if isinstance(value, str):
        key = value.lower()
        if key in MODULUS_PRESETS:
            return MODULUS_PRESETS[key]
        return int(value, 0)
    return int(value)


def element_size(modulus: int) -> int:
    """Wire width in bytes of one element: whole 8-byte words."""
    return max(1, (modulus.bit_length() + 63) // 64) * 8


@dataclass(frozen=True)
class FieldElement:
    """Element of Z_P."""
    value: int
    modulus: int = DEFAULT_MODULUS

    def __post_init__(self):
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"Field element {self.value} outside [0, {self.modulus})")

    @classmethod
    def of(cls, value: int, modulus: int = DEFAULT_MODULUS) -> "FieldElement":
        """Reduce an arbitrary integer into the field."""
        return cls(value % modulus, modulus)

    def _check(self, other: "FieldElement") -> None:
        if self.modulus != other.modulus:
            raise ValueError("Field elements belong to different fields")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        return field_add(self, other)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        return field_sub(self, other)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        return field_mul(self, other)

    def __neg__(self) -> "FieldElement":
        return field_neg(self)

    def __int__(self) -> int:
        return self.value

    def signed(self) -> int:
        """Signed integer representative."""
        return to_signed(self.value, self.modulus)


def field_add(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement((a.value + b.value) % a.modulus, a.modulus)


def field_sub(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement((a.value - b.value) % a.modulus, a.modulus)


def field_mul(a: FieldElement, b: FieldElement) -> FieldElement:
    a._check(b)
    return FieldElement((a.value * b.value) % a.modulus, a.modulus)


def field_neg(a: FieldElement) -> FieldElement:
    return FieldElement((-a.value) % a.modulus, a.modulus)


def field_inv(a: FieldElement) -> FieldElement:
    if a.value == 0:
        raise ZeroDivisionError("zero has no inverse")
    return FieldElement(pow(a.value, -1, a.modulus), a.modulus)


def to_signed(value: int, modulus: int = DEFAULT_MODULUS) -> int:
    """Map [0, P) onto (-P/2, P/2]."""
    return value - modulus if value > (modulus - 1) // 2 else value


def from_signed(value: int, modulus: int = DEFAULT_MODULUS) -> int:
    return value % modulus


class FixedPointParams(BaseModel):
    """Fixed-point layout: ``f`` fractional bits, ``k`` magnitude bits, ``s`` mask bits."""
    f: int = Field(default=20, ge=0, description="Fractional bits")
    k: int = Field(default=40, ge=1, description="Total magnitude bits of an encoding")
    s: int = Field(default=40, ge=1, description="Statistical masking bits")

    model_config = {"frozen": True}

    @property
    def scale(self) -> int:
        return 1 << self.f

    def fits(self, modulus: int) -> bool:
        return self.k + self.f + self.s < modulus.bit_length()

    def validate_for(self, modulus: int) -> "FixedPointParams":
        """
        Check the masked-open budget against a modulus.

        Raises:
            InvalidParameters: If k + f + s >= bit-length(P)
        """
        if not self.fits(modulus):
            raise InvalidParameters(
                f"k + f + s = {self.k + self.f + self.s} must be below the "
                f"{modulus.bit_length()}-bit modulus"
            )
        return self


DEFAULT_FIXED_POINT = FixedPointParams()


def encode_fixed(x: float, params: FixedPointParams = DEFAULT_FIXED_POINT,
                 modulus: int = DEFAULT_MODULUS) -> FieldElement:
    """
    Encode a real as round(x * 2^f), negatives as P - |.|.

    Raises:
        OverflowError: If |x| >= 2^(k - f)
    """
    if abs(x) >= 2 ** (params.k - params.f):
        raise OverflowError(f"|{x}| does not fit in 2^{params.k - params.f}")
    return FieldElement(round(x * params.scale) % modulus, modulus)


def decode_fixed(e: FieldElement, params: FixedPointParams = DEFAULT_FIXED_POINT) -> float:
    return to_signed(e.value, e.modulus) / params.scale


def encode_fixed_int(x: float, params: FixedPointParams = DEFAULT_FIXED_POINT) -> int:
    """Signed integer encoding (no reduction), used by plaintext oracles."""
    return round(x * params.scale)


def decode_fixed_int(value: int, modulus: int, params: FixedPointParams = DEFAULT_FIXED_POINT) -> float:
    return to_signed(value % modulus, modulus) / params.scale


def encode_elements(values: Sequence[int], modulus: int) -> bytes:
    """Little-endian fixed-width encoding of field elements."""
    width = element_size(modulus)
    if width == 8:
        return struct.pack(f"<{len(values)}Q", *values)
    return b"".join(v.to_bytes(width, "little") for v in values)


def decode_elements(data: bytes, modulus: int) -> List[int]:
    width = element_size(modulus)
    if len(data) % width:
        raise ValueError(f"Element payload of {len(data)} bytes is not a multiple of {width}")
    count = len(data) // width
    if width == 8:
        values = list(struct.unpack(f"<{count}Q", data))
    else:
        values = [int.from_bytes(data[i * width:(i + 1) * width], "little") for i in range(count)]
    for v in values:
        if v >= modulus:
            raise ValueError(f"Element {v} outside the field")
    return values


def vector_add(a: Iterable[int], b: Iterable[int], modulus: int) -> List[int]:
    return [(x + y) % modulus for x, y in zip(a, b)]


def vector_sub(a: Iterable[int], b: Iterable[int], modulus: int) -> List[int]:
    return [(x - y) % modulus for x, y in zip(a, b)]
