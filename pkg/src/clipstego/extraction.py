"""Recover the header, region map and payloads from a stego clip."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embedding import EmbedPlan, ap_count, ap_positions, build_plan, reserved_bits
from .errors import ClipTooSmall, OutOfRange
from .frame_io import Clip
from .header import HEADER_SIZE, StegoHeader, decode_region_map
from .keying import KeyLike, KeyMaterial, as_key_material, xor_mask
from .motion_analysis import Method, RegionMap


@dataclass
class ExtractResult:
    static_payload: bytes
    dynamic_payload: bytes
    method: int
    map: RegionMap
    header: StegoHeader

    @property
    def method_name(self) -> str:
        try:
            return Method(self.method).name.lower()
        except ValueError:
            return str(self.method)


def _read_lsbs(buf: np.ndarray, start_bit: int, nbytes: int) -> bytes:
    return np.packbits(buf[start_bit:start_bit + nbytes * 8] & 1).tobytes()


def read_header(stego: Clip, km: KeyMaterial) -> tuple[StegoHeader, RegionMap]:
    buf = stego.flat_bytes()
    if buf.size < HEADER_SIZE * 8:
        raise ClipTooSmall(f"clip has {buf.size} bytes, header needs {HEADER_SIZE * 8}")
    raw = _read_lsbs(buf, 0, HEADER_SIZE)
    fixed = xor_mask(raw, km.header_seed)
    header = StegoHeader.unpack_fixed(fixed)
    need = reserved_bits(header.map_len)
    if need > buf.size:
        raise ClipTooSmall(f"header claims a {header.map_len}-byte map; clip has room for "
                           f"{buf.size // 8 - HEADER_SIZE}")
    plain = xor_mask(_read_lsbs(buf, 0, HEADER_SIZE + header.map_len), km.header_seed)
    map_bytes = plain[HEADER_SIZE:]
    header.verify(map_bytes)
    region = decode_region_map(map_bytes, stego.frame_count, stego.height, stego.width)
    return header, region


def extract_static(stego: Clip, plan: EmbedPlan, km: KeyMaterial, length: int) -> bytes:
    if length == 0:
        return b""
    n_slots = len(plan.static_slots)
    if length > 3 * ap_count(km.start_i, km.step_d, n_slots):
        raise OutOfRange(f"{length} static bytes requested, capacity "
                         f"{3 * ap_count(km.start_i, km.step_d, n_slots)}")
    pos = ap_positions(km.start_i, km.step_d, -(-length // 3), n_slots)
    pixels = plan.static_slots[pos - 1]
    targets = (pixels[:, None] * 3 + np.arange(3)).ravel()[:length]
    return xor_mask(stego.flat_bytes()[targets].tobytes(), km.static_seed)


def extract_dynamic(stego: Clip, plan: EmbedPlan, km: KeyMaterial, length: int) -> bytes:
    if length == 0:
        return b""
    if 8 * length > plan.capacity_dynamic_bits:
        raise OutOfRange(f"{8 * length} dynamic bits requested, capacity {plan.capacity_dynamic_bits}")
    buf = stego.flat_bytes()
    bits = buf[plan.dynamic_slots[: 8 * length]] & 1
    return xor_mask(np.packbits(bits).tobytes(), km.dynamic_seed)


def extract(stego: Clip, static_key: KeyLike = None, dynamic_key: KeyLike = None) -> ExtractResult:
    """Reverse of :func:`clipstego.embedding.embed`; keys must match."""
    km_s = as_key_material(static_key)
    km_d = km_s if dynamic_key is None else as_key_material(dynamic_key)
    header, region = read_header(stego, km_s)
    plan = build_plan(region, km_s, header.map_len)
    s_len = header.static_len if header.has_static else 0
    d_len = header.dynamic_len if header.has_dynamic else 0
    return ExtractResult(
        static_payload=extract_static(stego, plan, km_s, s_len),
        dynamic_payload=extract_dynamic(stego, plan, km_d, d_len),
        method=header.method,
        map=region,
        header=header,
    )


def extraction_plan(stego: Clip, key: KeyLike = None) -> EmbedPlan:
    """Plan the extractor derives from the embedded header (diagnostics, tests)."""
    km = as_key_material(key)
    header, region = read_header(stego, km)
    return build_plan(region, km, header.map_len)


__all__ = [
    "ExtractResult",
    "read_header",
    "extract_static",
    "extract_dynamic",
    "extract",
    "extraction_plan",
]
