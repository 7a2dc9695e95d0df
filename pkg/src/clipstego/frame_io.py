"""Clip/frame model and lossless container codecs (PPM P6, RGB24 AVI)."""

from __future__ import annotations

import os
import re
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    MalformedHeader,
    NotRiff,
    TruncatedChunk,
    TruncatedData,
    UnsupportedCodec,
    UnsupportedMaxval,
)

DEFAULT_FPS = Fraction(30)


@dataclass(frozen=True)
class Frame:
    """One RGB8 image, rows top-to-bottom, channels R,G,B, no padding."""

    width: int
    height: int
    data: bytes = field(repr=False)

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise DimensionMismatch(f"bad frame size {self.width}x{self.height}")
        if not isinstance(self.data, bytes):
            object.__setattr__(self, "data", bytes(self.data))
        if len(self.data) != self.width * self.height * 3:
            raise DimensionMismatch(
                f"{self.width}x{self.height} frame needs {self.width * self.height * 3} bytes, "
                f"got {len(self.data)}"
            )

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "Frame":
        arr = np.asarray(arr)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise DimensionMismatch(f"expected (height, width, 3) array, got {arr.shape}")
        return cls(arr.shape[1], arr.shape[0], np.ascontiguousarray(arr, dtype=np.uint8).tobytes())

    def array(self) -> np.ndarray:
        """Read-only (height, width, 3) uint8 view of the pixel bytes."""
        return np.frombuffer(self.data, dtype=np.uint8).reshape(self.height, self.width, 3)


@dataclass(frozen=True)
class Clip:
    """Ordered, non-empty sequence of equally sized frames plus a frame rate."""

    frames: tuple[Frame, ...]
    fps: Fraction = DEFAULT_FPS

    def __post_init__(self):
        frames = tuple(self.frames)
        if not frames:
            raise DimensionMismatch("a clip needs at least one frame")
        w, h = frames[0].width, frames[0].height
        for i, f in enumerate(frames):
            if (f.width, f.height) != (w, h):
                raise DimensionMismatch(
                    f"frame {i} is {f.width}x{f.height}, expected {w}x{h}"
                )
        fps = Fraction(self.fps)
        if fps <= 0:
            raise ValueError("fps must be positive")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "fps", fps)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    @property
    def pixel_count(self) -> int:
        return self.frame_count * self.width * self.height

    def __len__(self) -> int:
        return len(self.frames)

    @classmethod
    def from_array(cls, arr: np.ndarray, fps=DEFAULT_FPS) -> "Clip":
        """Build from a (frames, height, width, 3) uint8 array."""
        arr = np.asarray(arr)
        if arr.ndim != 4 or arr.shape[3] != 3:
            raise DimensionMismatch(f"expected (frames, height, width, 3) array, got {arr.shape}")
        return cls(tuple(Frame.from_array(a) for a in arr), fps)

    def array(self) -> np.ndarray:
        """Fresh writable (frames, height, width, 3) uint8 copy."""
        return np.stack([f.array() for f in self.frames])

    def flat_bytes(self) -> np.ndarray:
        """Fresh writable copy of all pixel bytes, frame-major, row-major, R,G,B."""
        return np.frombuffer(b"".join(f.data for f in self.frames), dtype=np.uint8).copy()

    @classmethod
    def from_flat_bytes(cls, buf: np.ndarray, width: int, height: int, fps=DEFAULT_FPS) -> "Clip":
        raw = np.asarray(buf, dtype=np.uint8).tobytes()
        size = width * height * 3
        if len(raw) == 0 or len(raw) % size:
            raise DimensionMismatch("byte buffer is not a whole number of frames")
        return cls(tuple(Frame(width, height, raw[o:o + size]) for o in range(0, len(raw), size)), fps)


# --------------------------------------------------------------------------- PPM

_WS = b" \t\n\r\v\f"


def _ppm_tokens(buf: bytes, count: int) -> tuple[list[bytes], int]:
    """Pull `count` whitespace-separated header tokens, skipping # comments.

    Returns the tokens and the offset of the single whitespace byte that
    terminates the last one.
    """
    tokens = []
    pos = 0
    n = len(buf)
    while len(tokens) < count:
        while pos < n and buf[pos] in _WS:
            pos += 1
        if pos < n and buf[pos] == ord("#"):
            while pos < n and buf[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and buf[pos] not in _WS and buf[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise MalformedHeader("PPM header ended early")
        tokens.append(buf[start:pos])
    return tokens, pos


def read_ppm(buf: bytes) -> Frame:
    buf = bytes(buf)
    if buf[:2] != b"P6":
        raise MalformedHeader(f"not a binary PPM (magic {buf[:2]!r})")
    tokens, pos = _ppm_tokens(buf, 4)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise MalformedHeader(f"non-numeric PPM header tokens {tokens[1:]!r}") from None
    if tokens[0] != b"P6" or width < 1 or height < 1:
        raise MalformedHeader(f"bad PPM header {tokens!r}")
    if maxval != 255:
        raise UnsupportedMaxval(f"maxval {maxval} unsupported, only 255")
    if pos >= len(buf) or buf[pos] not in _WS:
        raise MalformedHeader("missing whitespace after maxval")
    start = pos + 1
    size = width * height * 3
    if len(buf) - start < size:
        raise TruncatedData(f"expected {size} pixel bytes, found {len(buf) - start}")
    return Frame(width, height, buf[start:start + size])


def write_ppm(frame: Frame) -> bytes:
    return b"P6\n%d %d\n255\n" % (frame.width, frame.height) + frame.data


_FRAME_NAME = re.compile(r"(\d+)")


def _frame_sort_key(path) -> tuple:
    name = Path(path).name
    m = _FRAME_NAME.findall(name)
    return (int(m[-1]) if m else -1, name)


def read_frame_dir(paths: Iterable[os.PathLike | str], fps=DEFAULT_FPS) -> Clip:
    """Load PPM files as one clip, ordered by the number in their names.

    `paths` may also be a single directory, in which case every ``*.ppm``
    inside it is used.
    """
    if isinstance(paths, (str, os.PathLike)) and Path(paths).is_dir():
        paths = list(Path(paths).glob("*.ppm"))
    paths = sorted(paths, key=_frame_sort_key)
    if not paths:
        raise TruncatedData("no frame files given")
    return Clip(tuple(read_ppm(Path(p).read_bytes()) for p in paths), fps)


def write_frame_dir(clip: Clip, directory: os.PathLike | str) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for i, frame in enumerate(clip.frames, start=1):
        p = directory / f"frame_{i:06d}.ppm"
        p.write_bytes(write_ppm(frame))
        out.append(p)
    return out


# --------------------------------------------------------------------------- AVI

AVIF_HASINDEX = 0x10
AVIIF_KEYFRAME = 0x10


def _stride(width: int) -> int:
    return (width * 3 + 3) & ~3


def frame_to_dib(frame: Frame) -> bytes:
    """Top-down RGB -> bottom-up BGR with rows padded to 4 bytes (zeros)."""
    rows = frame.array()[::-1, :, ::-1]
    pad = _stride(frame.width) - frame.width * 3
    if pad:
        out = np.zeros((frame.height, _stride(frame.width)), dtype=np.uint8)
        out[:, :frame.width * 3] = rows.reshape(frame.height, -1)
        return out.tobytes()
    return np.ascontiguousarray(rows).tobytes()


def dib_to_frame(buf: bytes, width: int, height: int, bottom_up: bool = True) -> Frame:
    stride = _stride(width)
    rows = np.frombuffer(buf, dtype=np.uint8, count=stride * height).reshape(height, stride)
    px = rows[:, :width * 3].reshape(height, width, 3)[:, :, ::-1]
    if bottom_up:
        px = px[::-1]
    return Frame.from_array(px)


def _chunk(fourcc: bytes, payload: bytes) -> bytes:
    out = fourcc + struct.pack("<I", len(payload)) + payload
    return out + b"\0" if len(payload) % 2 else out


def _list(kind: bytes, payload: bytes) -> bytes:
    return _chunk(b"LIST", kind + payload)


def _rate_scale(fps: Fraction) -> tuple[int, int]:
    f = fps.limit_denominator(0xFFFF) if fps.numerator > 0xFFFFFFFF or fps.denominator > 0xFFFFFFFF else fps
    return f.numerator, f.denominator


def write_avi(clip: Clip) -> bytes:
    w, h = clip.width, clip.height
    frame_size = _stride(w) * h
    n = clip.frame_count
    rate, scale = _rate_scale(clip.fps)
    usec = round(Fraction(1_000_000) / clip.fps)

    avih = struct.pack(
        "<14I",
        usec,
        min(round(frame_size * clip.fps), 0xFFFFFFFF),
        0,
        AVIF_HASINDEX,
        n,
        0,
        1,
        frame_size,
        w,
        h,
        0, 0, 0, 0,
    )
    strh = struct.pack(
        "<4s4sIHHIIIIIIII4h",
        b"vids",
        b"DIB ",
        0,
        0,
        0,
        0,
        scale,
        rate,
        0,
        n,
        frame_size,
        0xFFFFFFFF,
        0,
        0, 0, min(w, 0x7FFF), min(h, 0x7FFF),
    )
    strf = struct.pack("<IiiHHIIiiII", 40, w, h, 1, 24, 0, frame_size, 0, 0, 0, 0)
    hdrl = _list(b"hdrl", _chunk(b"avih", avih) + _list(b"strl", _chunk(b"strh", strh) + _chunk(b"strf", strf)))

    chunks = []
    index = []
    offset = 4  # idx1 offsets are relative to the 'movi' fourcc
    for frame in clip.frames:
        c = _chunk(b"00db", frame_to_dib(frame))
        index.append(struct.pack("<4sIII", b"00db", AVIIF_KEYFRAME, offset, frame_size))
        offset += len(c)
        chunks.append(c)
    movi = _list(b"movi", b"".join(chunks))
    idx1 = _chunk(b"idx1", b"".join(index))

    body = b"AVI " + hdrl + movi + idx1
    return b"RIFF" + struct.pack("<I", len(body)) + body


def _iter_chunks(buf: bytes, start: int, end: int):
    """Yield (fourcc, payload_start, payload_size) for chunks in buf[start:end]."""
    pos = start
    while pos + 8 <= end:
        fourcc = buf[pos:pos + 4]
        (size,) = struct.unpack_from("<I", buf, pos + 4)
        body = pos + 8
        if body + size > end:
            raise TruncatedChunk(f"chunk {fourcc!r} at {pos} claims {size} bytes, only {end - body} left")
        yield fourcc, body, size
        pos = body + size + (size & 1)
    if pos < end and end - pos >= 8:
        raise TruncatedChunk(f"trailing bytes at {pos}")


def read_avi(buf: bytes) -> Clip:
    buf = bytes(buf)
    if len(buf) < 12 or buf[:4] != b"RIFF":
        raise NotRiff("missing RIFF signature")
    if buf[8:12] != b"AVI ":
        raise NotRiff(f"RIFF form type {buf[8:12]!r} is not 'AVI '")
    (riff_size,) = struct.unpack_from("<I", buf, 4)
    end = 8 + riff_size
    if end > len(buf):
        raise TruncatedChunk(f"RIFF claims {riff_size} bytes, file has {len(buf) - 8}")

    avih = None
    streams = []  # (strh, strf) payloads
    frames_raw = []

    def walk_movi(s, e):
        for fourcc, body, size in _iter_chunks(buf, s, e):
            if fourcc == b"LIST" and buf[body:body + 4] == b"rec ":
                walk_movi(body + 4, body + size)
            elif fourcc == b"00db":
                frames_raw.append((body, size))

    for fourcc, body, size in _iter_chunks(buf, 12, end):
        if fourcc != b"LIST":
            continue
        kind = buf[body:body + 4]
        if kind == b"hdrl":
            for f2, b2, s2 in _iter_chunks(buf, body + 4, body + size):
                if f2 == b"avih":
                    avih = buf[b2:b2 + s2]
                elif f2 == b"LIST" and buf[b2:b2 + 4] == b"strl":
                    parts = {f3: buf[b3:b3 + s3] for f3, b3, s3 in _iter_chunks(buf, b2 + 4, b2 + s2)}
                    streams.append((parts.get(b"strh"), parts.get(b"strf")))
        elif kind == b"movi":
            walk_movi(body + 4, body + size)

    if avih is None or len(avih) < 40:
        raise TruncatedChunk("missing or short avih header")
    if len(streams) != 1:
        raise UnsupportedCodec(f"expected exactly one stream, found {len(streams)}")
    strh, strf = streams[0]
    if not strh or len(strh) < 48 or not strf or len(strf) < 40:
        raise TruncatedChunk("missing or short strh/strf")
    if strh[:4] != b"vids":
        raise UnsupportedCodec(f"stream type {strh[:4]!r} is not video")
    _, width, height, _, bits, compression = struct.unpack_from("<IiiHHI", strf)
    if compression != 0 or bits != 24:
        raise UnsupportedCodec(f"need uncompressed 24-bit DIB, got compression={compression} bits={bits}")
    if width < 1 or height == 0:
        raise DimensionMismatch(f"bad DIB size {width}x{height}")
    bottom_up = height > 0
    height = abs(height)

    usec = struct.unpack_from("<I", avih, 0)[0]
    scale, rate = struct.unpack_from("<II", strh, 20)
    if rate and scale and round(Fraction(1_000_000 * scale, rate)) == usec:
        # avih only has microsecond resolution; strh carries the exact rate
        fps = Fraction(rate, scale)
    elif usec:
        fps = Fraction(1_000_000, usec)
    else:
        fps = DEFAULT_FPS

    expected = _stride(width) * height
    if not frames_raw:
        raise TruncatedData("no '00db' frame chunks in movi")
    frames = []
    for body, size in frames_raw:
        if size != expected:
            raise DimensionMismatch(f"frame chunk of {size} bytes, header implies {expected}")
        frames.append(dib_to_frame(buf[body:body + size], width, height, bottom_up))
    return Clip(tuple(frames), fps)


def load_clip(path: os.PathLike | str) -> Clip:
    """Read an .avi file or a directory of PPM frames."""
    path = Path(path)
    if path.is_dir():
        return read_frame_dir(path)
    data = path.read_bytes()
    if data[:4] == b"RIFF":
        return read_avi(data)
    return Clip((read_ppm(data),))


def save_clip(clip: Clip, path: os.PathLike | str) -> Sequence[Path]:
    """Write to ``*.avi`` as AVI, anything else as a PPM frame directory."""
    path = Path(path)
    if path.suffix.lower() == ".avi":
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(write_avi(clip))
        return [path]
    return write_frame_dir(clip, path)
