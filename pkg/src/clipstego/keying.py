"""Stego-key derivation: progression parameters and xorshift64* keystreams.

This is deterministic obfuscation, not cryptography. FNV-1a and
xorshift64* were picked because they are trivial to reproduce bit-for-bit
in any language.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import SeedZero

MASK64 = (1 << 64) - 1

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

HEADER_XOR = 0x5851F42D4C957F2D
DYNAMIC_XOR = 0xA5A5A5A5A5A5A5A5
ZERO_SEED_FALLBACK = 0x9E3779B97F4A7C15
XORSHIFT_MULT = 0x2545F4914F6CDD1D

# progression used when the caller supplies no key
DEFAULT_START = 5
DEFAULT_STEP = 3


def hash_key(key: bytes) -> int:
    """64-bit FNV-1a digest of `key`."""
    h = FNV_OFFSET
    for b in key:
        h = ((h ^ b) * FNV_PRIME) & MASK64
    return h


@dataclass(frozen=True)
class KeyMaterial:
    digest: int
    start_i: int
    step_d: int
    header_seed: int
    static_seed: int
    dynamic_seed: int

    def __post_init__(self):
        if self.start_i < 1 or self.step_d < 1:
            raise ValueError(f"progression needs start_i >= 1 and step_d >= 1, got ({self.start_i}, {self.step_d})")
        for name in ("header_seed", "static_seed", "dynamic_seed"):
            if not getattr(self, name):
                raise SeedZero(f"{name} must be nonzero")

    def with_progression(self, start_i: int, step_d: int) -> "KeyMaterial":
        """Same keystreams, explicit (start_i, step_d)."""
        return KeyMaterial(self.digest, start_i, step_d, self.header_seed, self.static_seed, self.dynamic_seed)


KeyLike = Union[None, bytes, bytearray, str, KeyMaterial]


def _nonzero(seed: int) -> int:
    return seed or ZERO_SEED_FALLBACK


def derive_key_material(key: Optional[bytes] = None) -> KeyMaterial:
    """Map a stego-key onto progression parameters and three keystream seeds.

    Without a key the progression falls back to start 5, step 3 and the
    seeds come from the digest of the empty key.
    """
    h = hash_key(b"" if key is None else bytes(key))
    if key is None:
        start_i, step_d = DEFAULT_START, DEFAULT_STEP
    else:
        start_i = 1 + (h % 64)
        step_d = 1 + ((h >> 8) % 8)
    return KeyMaterial(
        digest=h,
        start_i=start_i,
        step_d=step_d,
        header_seed=_nonzero(h ^ HEADER_XOR),
        static_seed=_nonzero(h or 1),
        dynamic_seed=_nonzero(h ^ DYNAMIC_XOR),
    )


def as_key_material(key: KeyLike) -> KeyMaterial:
    """Accept None, raw bytes, a str (UTF-8 encoded) or ready KeyMaterial."""
    if isinstance(key, KeyMaterial):
        return key
    if isinstance(key, str):
        key = key.encode("utf-8")
    return derive_key_material(key)


def keystream(seed: int, n: int) -> bytes:
    """`n` bytes of xorshift64* output (top byte of each product)."""
    if seed == 0:
        raise SeedZero("xorshift64* seed must be nonzero")
    if n < 0:
        raise ValueError("n must be >= 0")
    s = seed & MASK64
    out = bytearray(n)
    for k in range(n):
        s ^= s >> 12
        s ^= (s << 25) & MASK64
        s ^= s >> 27
        out[k] = ((s * XORSHIFT_MULT) & MASK64) >> 56
    return bytes(out)


def xor_mask(data: bytes, seed: int) -> bytes:
    """XOR `data` with the keystream for `seed`; applying it twice is a no-op."""
    if not data:
        return b""
    ks = np.frombuffer(keystream(seed, len(data)), dtype=np.uint8)
    return (np.frombuffer(bytes(data), dtype=np.uint8) ^ ks).tobytes()
