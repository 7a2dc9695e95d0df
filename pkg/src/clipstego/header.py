"""In-band metadata: the fixed 23-byte header and the run-length region map.

Layout of the fixed part (little-endian)::

    magic      4  b"SMC1"
    version    1  1
    method     1  detector id (1 pixel diff, 2 block, 3 histogram)
    flags      1  bit0 static payload present, bit1 dynamic payload present
    static_len 4
    dynamic_len 4
    map_len    4  byte length of the RLE map that follows
    crc        4  CRC-32 over the 19 bytes above plus the map bytes

The region map is a sequence of LEB128 run lengths with alternating labels,
the first run static.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import BadMagic, CrcMismatch, IntegrityError, UnsupportedVersion
from .motion_analysis import RegionMap

MAGIC = b"SMC1"
VERSION = 1
FLAG_STATIC = 0x01
FLAG_DYNAMIC = 0x02

_FIXED = struct.Struct("<4sBBBIII")
HEADER_SIZE = _FIXED.size + 4  # 23


class CorruptMap(IntegrityError):
    """Region map does not decode to the clip's pixel count."""


def crc32(data: bytes) -> int:
    """CRC-32, reflected polynomial 0xEDB88320 (zlib's)."""
    return zlib.crc32(data) & 0xFFFFFFFF


@dataclass(frozen=True)
class StegoHeader:
    method: int
    flags: int
    static_len: int
    dynamic_len: int
    map_len: int
    crc: int = 0
    version: int = VERSION
    magic: bytes = MAGIC

    @property
    def has_static(self) -> bool:
        return bool(self.flags & FLAG_STATIC)

    @property
    def has_dynamic(self) -> bool:
        return bool(self.flags & FLAG_DYNAMIC)

    def fixed_fields(self) -> bytes:
        return _FIXED.pack(self.magic, self.version, self.method, self.flags,
                           self.static_len, self.dynamic_len, self.map_len)

    def pack(self, map_bytes: bytes) -> bytes:
        """Fixed fields + CRC + map bytes, CRC recomputed from the content."""
        if len(map_bytes) != self.map_len:
            raise ValueError(f"map_len {self.map_len} != {len(map_bytes)} map bytes")
        fixed = self.fixed_fields()
        return fixed + struct.pack("<I", crc32(fixed + map_bytes)) + map_bytes

    @classmethod
    def unpack_fixed(cls, raw: bytes) -> "StegoHeader":
        """Parse the 23 fixed bytes, checking magic and version (not the CRC)."""
        if len(raw) < HEADER_SIZE:
            raise ValueError(f"need {HEADER_SIZE} header bytes, got {len(raw)}")
        magic, version, method, flags, s_len, d_len, m_len = _FIXED.unpack_from(raw)
        if magic != MAGIC:
            raise BadMagic("no stego header found (wrong key or not a stego clip)")
        if version != VERSION:
            raise UnsupportedVersion(f"header version {version} not supported")
        (crc,) = struct.unpack_from("<I", raw, _FIXED.size)
        return cls(method, flags, s_len, d_len, m_len, crc, version, magic)

    def verify(self, map_bytes: bytes) -> None:
        if crc32(self.fixed_fields() + map_bytes) != self.crc:
            raise CrcMismatch("header CRC mismatch (wrong key or corrupted clip)")


# ---------------------------------------------------------------- varint / RLE

def encode_varint(value: int) -> bytes:
    if value < 0:
        raise ValueError("varints are unsigned")
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def decode_varints(buf: bytes) -> list[int]:
    values = []
    cur = shift = 0
    for b in buf:
        cur |= (b & 0x7F) << shift
        if b & 0x80:
            shift += 7
        else:
            values.append(cur)
            cur = shift = 0
    if shift:
        raise CorruptMap("map ends inside a varint")
    return values


def region_runs(region: RegionMap) -> list[int]:
    """Run lengths of the flattened mask, first run static (may be 0)."""
    flat = region.flat()
    edges = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], edges, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs.insert(0, 0)
    return runs


def encode_region_map(region: RegionMap) -> bytes:
    return b"".join(encode_varint(r) for r in region_runs(region))


def decode_region_map(buf: bytes, frame_count: int, height: int, width: int) -> RegionMap:
    runs = decode_varints(buf)
    total = frame_count * height * width
    if sum(runs) != total:
        raise CorruptMap(f"map runs cover {sum(runs)} pixels, clip has {total}")
    labels = np.zeros(len(runs), dtype=bool)
    labels[1::2] = True
    flat = np.repeat(labels, runs)
    return RegionMap(flat.reshape(frame_count, height, width))
