"""Payload embedding.

Two schemes share one carrier:

* static pixels take whole bytes: each pixel picked by the arithmetic
  progression ``start_i + (j - 1) * step_d`` over the static pixel stream
  has its R, G, B replaced by three masked payload bytes;
* dynamic pixels take one bit per channel byte, by nudging the byte up or
  down by one until its parity matches the bit.

A header and the run-length region map go first, into the LSBs of a
reserved pixel prefix, so the extractor never has to re-run detection on
the (already modified) stego clip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import CapacityExceeded, ClipTooSmall, OutOfRange
from .frame_io import Clip
from .header import (
    FLAG_DYNAMIC,
    FLAG_STATIC,
    HEADER_SIZE,
    StegoHeader,
    encode_region_map,
)
from .keying import KeyLike, KeyMaterial, as_key_material, xor_mask
from .motion_analysis import AnalysisParams, RegionMap, analyze

CAPACITY_MESSAGE = "Secret Data size is more"


def ap_count(start_i: int, step_d: int, limit: int) -> int:
    """How many progression terms fit at or below `limit`."""
    if limit < start_i:
        return 0
    return (limit - start_i) // step_d + 1


def ap_positions(start_i: int, step_d: int, count: int, limit: Optional[int] = None) -> np.ndarray:
    """1-based positions ``start_i + (j - 1) * step_d`` for j = 1..count."""
    if start_i < 1 or step_d < 1 or count < 0:
        raise ValueError("need start_i >= 1, step_d >= 1, count >= 0")
    if limit is not None and count > ap_count(start_i, step_d, limit):
        raise OutOfRange(
            f"{count} positions from {start_i} step {step_d} exceed limit {limit} "
            f"(at most {ap_count(start_i, step_d, limit)} fit)"
        )
    return start_i + np.arange(count, dtype=np.int64) * step_d


def reserved_bits(map_len: int) -> int:
    return (HEADER_SIZE + map_len) * 8


@dataclass(frozen=True, eq=False)
class EmbedPlan:
    """Slot layout for one (region map, key) pair.

    ``static_slots`` are pixel indices, ``dynamic_slots`` are byte offsets,
    both into the clip flattened frame-major, row-major (bytes R,G,B).
    """

    reserved_slot_count: int
    reserved_pixels: int
    start_i: int
    step_d: int
    static_slots: np.ndarray = field(repr=False)
    dynamic_slots: np.ndarray = field(repr=False)

    @property
    def capacity_static_bytes(self) -> int:
        return 3 * ap_count(self.start_i, self.step_d, len(self.static_slots))

    @property
    def capacity_dynamic_bits(self) -> int:
        return len(self.dynamic_slots)

    def static_pixels_for(self, nbytes: int) -> tuple[np.ndarray, np.ndarray]:
        """(progression positions, pixel indices) carrying `nbytes` static bytes."""
        pos = ap_positions(self.start_i, self.step_d, -(-nbytes // 3), len(self.static_slots))
        return pos, self.static_slots[pos - 1]

    def __eq__(self, other):
        if not isinstance(other, EmbedPlan):
            return NotImplemented
        return (
            (self.reserved_slot_count, self.reserved_pixels, self.start_i, self.step_d)
            == (other.reserved_slot_count, other.reserved_pixels, other.start_i, other.step_d)
            and np.array_equal(self.static_slots, other.static_slots)
            and np.array_equal(self.dynamic_slots, other.dynamic_slots)
        )


def build_plan(region: RegionMap, km: KeyMaterial, map_bytes_len: int) -> EmbedPlan:
    total_pixels = region.mask.size
    bits = reserved_bits(map_bytes_len)
    if bits > total_pixels * 3:
        raise ClipTooSmall(
            f"header and map need {bits} LSB slots, clip has only {total_pixels * 3} bytes"
        )
    rp = -(-bits // 3)
    labels = region.flat()[rp:]
    idx = np.arange(rp, total_pixels, dtype=np.int64)
    static = idx[labels == 0]
    dyn_pixels = idx[labels == 1]
    dynamic = (dyn_pixels[:, None] * 3 + np.arange(3, dtype=np.int64)).ravel()
    return EmbedPlan(bits, rp, km.start_i, km.step_d, static, dynamic)


# ------------------------------------------------------------ low-level writers

def _bits_msb_first(data: bytes) -> np.ndarray:
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8))


def set_parities(buf: np.ndarray, positions: np.ndarray, bits: np.ndarray) -> None:
    """In place: make ``buf[positions] & 1 == bits`` by -1 (bit 0) or +1 (bit 1).

    A mismatched bit 1 means the byte is even (<= 254) and a mismatched
    bit 0 means it is odd (>= 1), so neither step can wrap.
    """
    v = buf[positions]
    wrong = (v & 1) != bits
    step = np.where(bits == 1, 1, -1).astype(np.int16)
    buf[positions] = (v.astype(np.int16) + wrong * step).astype(np.uint8)


def _write_header(buf: np.ndarray, header_plus_map: bytes, km: KeyMaterial) -> None:
    bits = _bits_msb_first(xor_mask(header_plus_map, km.header_seed))
    if bits.size > buf.size:
        raise ClipTooSmall(f"header and map need {bits.size} LSB slots, clip has {buf.size} bytes")
    set_parities(buf, np.arange(bits.size), bits)


def _write_static(buf: np.ndarray, plan: EmbedPlan, km: KeyMaterial, payload: bytes) -> np.ndarray:
    """Substitute masked payload triplets; returns the pixel indices written."""
    n_slots = len(plan.static_slots)
    cap = 3 * ap_count(km.start_i, km.step_d, n_slots)
    if len(payload) > cap:
        raise CapacityExceeded(
            f"{CAPACITY_MESSAGE}: {len(payload)} static bytes requested, capacity {cap}"
        )
    if not payload:
        return np.zeros(0, dtype=np.int64)
    masked = np.frombuffer(xor_mask(payload, km.static_seed), dtype=np.uint8)
    pos = ap_positions(km.start_i, km.step_d, -(-len(payload) // 3), n_slots)
    pixels = plan.static_slots[pos - 1]
    # a trailing partial triplet only fills the channels it has
    targets = (pixels[:, None] * 3 + np.arange(3)).ravel()[: len(payload)]
    buf[targets] = masked
    return pixels


def _write_dynamic(buf: np.ndarray, plan: EmbedPlan, km: KeyMaterial, payload: bytes) -> None:
    if 8 * len(payload) > plan.capacity_dynamic_bits:
        raise CapacityExceeded(
            f"{CAPACITY_MESSAGE}: {8 * len(payload)} dynamic bits requested, "
            f"capacity {plan.capacity_dynamic_bits}"
        )
    if not payload:
        return
    bits = _bits_msb_first(xor_mask(payload, km.dynamic_seed))
    set_parities(buf, plan.dynamic_slots[: bits.size], bits)


def _rebuild(buf: np.ndarray, like: Clip) -> Clip:
    return Clip.from_flat_bytes(buf, like.width, like.height, like.fps)


# ----------------------------------------------------------- public operations

def embed_header(clip: Clip, header_plus_map: bytes, km: KeyMaterial) -> Clip:
    buf = clip.flat_bytes()
    _write_header(buf, header_plus_map, km)
    return _rebuild(buf, clip)


def embed_static(clip: Clip, plan: EmbedPlan, km: KeyMaterial, payload: bytes) -> Clip:
    buf = clip.flat_bytes()
    _write_static(buf, plan, km, bytes(payload))
    return _rebuild(buf, clip)


def embed_dynamic(clip: Clip, plan: EmbedPlan, km: KeyMaterial, payload: bytes) -> Clip:
    buf = clip.flat_bytes()
    _write_dynamic(buf, plan, km, bytes(payload))
    return _rebuild(buf, clip)


def _table(report) -> str:
    lines = []
    for k, v in report.items():
        if isinstance(v, (list, tuple)):
            v = ",".join(str(x) for x in v)
        lines.append(f"{k}={v}")
    return "\n".join(lines) + "\n"


@dataclass
class EmbedReport:
    method: str
    width: int
    height: int
    frame_count: int
    start_i: int
    step_d: int
    map_bytes: int
    reserved_pixels: int
    reserved_bits: int
    capacity_static_bytes: int
    capacity_dynamic_bits: int
    static_bytes_used: int
    dynamic_bytes_used: int
    static_pixels_used: int
    dynamic_slots_used: int
    changed_pixels_per_frame: list[int]
    # progression positions (1-based, over the static stream) and the pixels they hit
    static_positions: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0, np.int64))
    static_pixel_indices: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0, np.int64))

    def items(self) -> dict:
        return {
            "method": self.method,
            "width": self.width,
            "height": self.height,
            "frame_count": self.frame_count,
            "start_i": self.start_i,
            "step_d": self.step_d,
            "map_bytes": self.map_bytes,
            "reserved_pixels": self.reserved_pixels,
            "reserved_bits": self.reserved_bits,
            "capacity_static_bytes": self.capacity_static_bytes,
            "capacity_dynamic_bits": self.capacity_dynamic_bits,
            "static_bytes_used": self.static_bytes_used,
            "dynamic_bytes_used": self.dynamic_bytes_used,
            "static_pixels_used": self.static_pixels_used,
            "dynamic_slots_used": self.dynamic_slots_used,
            "changed_pixels_per_frame": self.changed_pixels_per_frame,
        }

    def to_text(self) -> str:
        return _table(self.items())


def _method_name(params: AnalysisParams) -> str:
    return params.method.name.lower()


def embed(
    cover: Clip,
    params: AnalysisParams = AnalysisParams(),
    static_payload: Optional[bytes] = None,
    dynamic_payload: Optional[bytes] = None,
    static_key: KeyLike = None,
    dynamic_key: KeyLike = None,
) -> tuple[Clip, EmbedReport]:
    """Hide up to two payloads in `cover`.

    The header and the static payload use `static_key`; the dynamic payload
    uses `dynamic_key`, falling back to `static_key`. The cover is not
    modified.
    """
    static_payload = bytes(static_payload or b"")
    dynamic_payload = bytes(dynamic_payload or b"")
    if not static_payload and not dynamic_payload:
        raise ValueError("nothing to embed: both payloads are empty")
    km_s = as_key_material(static_key)
    km_d = km_s if dynamic_key is None else as_key_material(dynamic_key)

    region = analyze(cover, params)
    map_bytes = encode_region_map(region)
    plan = build_plan(region, km_s, len(map_bytes))
    flags = (FLAG_STATIC if static_payload else 0) | (FLAG_DYNAMIC if dynamic_payload else 0)
    header = StegoHeader(int(params.method), flags, len(static_payload), len(dynamic_payload), len(map_bytes))

    # check both capacities before touching anything
    if len(static_payload) > plan.capacity_static_bytes or 8 * len(dynamic_payload) > plan.capacity_dynamic_bits:
        raise CapacityExceeded(
            f"{CAPACITY_MESSAGE}: static {len(static_payload)}/{plan.capacity_static_bytes} bytes, "
            f"dynamic {8 * len(dynamic_payload)}/{plan.capacity_dynamic_bits} bits"
        )

    buf = cover.flat_bytes()
    _write_header(buf, header.pack(map_bytes), km_s)
    pixels = _write_static(buf, plan, km_s, static_payload)
    _write_dynamic(buf, plan, km_d, dynamic_payload)
    stego = _rebuild(buf, cover)

    orig = cover.flat_bytes().reshape(cover.frame_count, -1, 3)
    changed = (buf.reshape(orig.shape) != orig).any(axis=2).sum(axis=1)
    positions = (ap_positions(plan.start_i, plan.step_d, len(pixels)) if len(pixels)
                 else np.zeros(0, np.int64))
    report = EmbedReport(
        method=_method_name(params),
        width=cover.width,
        height=cover.height,
        frame_count=cover.frame_count,
        start_i=plan.start_i,
        step_d=plan.step_d,
        map_bytes=len(map_bytes),
        reserved_pixels=plan.reserved_pixels,
        reserved_bits=plan.reserved_slot_count,
        capacity_static_bytes=plan.capacity_static_bytes,
        capacity_dynamic_bits=plan.capacity_dynamic_bits,
        static_bytes_used=len(static_payload),
        dynamic_bytes_used=len(dynamic_payload),
        static_pixels_used=len(pixels),
        dynamic_slots_used=8 * len(dynamic_payload),
        changed_pixels_per_frame=[int(c) for c in changed],
        static_positions=positions,
        static_pixel_indices=pixels,
    )
    return stego, report


@dataclass
class CapacityReport:
    method: str
    start_i: int
    step_d: int
    capacity_static_bytes: int
    capacity_dynamic_bits: int
    gross_static_bytes: int  # same progression over every static pixel, nothing reserved
    header_bytes: int  # fixed header + serialized map
    reserved_pixels: int
    static_pixels_per_frame: list[int]
    dynamic_pixels_per_frame: list[int]

    @property
    def capacity_dynamic_bytes(self) -> int:
        return self.capacity_dynamic_bits // 8

    def items(self) -> dict:
        d = dict(self.__dict__)
        d["capacity_dynamic_bytes"] = self.capacity_dynamic_bytes
        return d

    def to_text(self) -> str:
        return _table(self.items())


def capacity(cover: Clip, params: AnalysisParams = AnalysisParams(), key: KeyLike = None) -> CapacityReport:
    km = as_key_material(key)
    region = analyze(cover, params)
    map_len = len(encode_region_map(region))
    plan = build_plan(region, km, map_len)
    dyn = region.mask.reshape(region.frame_count, -1).sum(axis=1)
    per_frame = region.width * region.height
    return CapacityReport(
        method=_method_name(params),
        start_i=km.start_i,
        step_d=km.step_d,
        capacity_static_bytes=plan.capacity_static_bytes,
        capacity_dynamic_bits=plan.capacity_dynamic_bits,
        gross_static_bytes=3 * ap_count(km.start_i, km.step_d, region.static_count()),
        header_bytes=HEADER_SIZE + map_len,
        reserved_pixels=plan.reserved_pixels,
        static_pixels_per_frame=[int(per_frame - d) for d in dyn],
        dynamic_pixels_per_frame=[int(d) for d in dyn],
    )
