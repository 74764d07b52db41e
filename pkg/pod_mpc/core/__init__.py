"""Core module exports"""

from .field import (M61, M127, DEFAULT_MODULUS, FieldElement, FixedPointParams, field_add, field_mul,
                    encode_fixed, decode_fixed, resolve_modulus)
from .sharing import SchemeKind, SharingScheme, ShareVector, BeaverTriple, share, share_vector, reconstruct, reconstruct_vector
from .dealer import InsecureTestDealer, PartyMaterial, PreprocessingDemand, deal_triples, deal_trunc_pairs

__all__ = ['M61', 'M127', 'DEFAULT_MODULUS', 'FieldElement', 'FixedPointParams', 'field_add', 'field_mul',
           'encode_fixed', 'decode_fixed', 'resolve_modulus', 'SchemeKind', 'SharingScheme', 'ShareVector',
           'BeaverTriple', 'share', 'share_vector', 'reconstruct', 'reconstruct_vector', 'InsecureTestDealer',
           'PartyMaterial', 'PreprocessingDemand', 'deal_triples', 'deal_trunc_pairs']
