"""Cover/stego fidelity: MSE, PSNR and change statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .frame_io import Clip, Frame

PEAK = 255


def mse(a: Frame, b: Frame) -> float:
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatch(f"{a.width}x{a.height} vs {b.width}x{b.height}")
    d = a.array().astype(np.int64) - b.array().astype(np.int64)
    # integer sum of squares, one division: exact up to float rounding of the quotient
    return int((d * d).sum()) / d.size


def psnr(mse_value: float) -> float:
    if mse_value < 0:
        raise ValueError("mse must be >= 0")
    if mse_value == 0:
        return math.inf
    return 10 * math.log10(PEAK * PEAK / mse_value)


@dataclass
class FidelityReport:
    per_frame_mse: list[float]
    per_frame_psnr: list[float]
    mean_psnr: float
    changed_byte_count: int
    max_abs_byte_delta: int

    @property
    def min_psnr(self) -> float:
        return min(self.per_frame_psnr)

    def items(self) -> dict:
        return {
            "frames": len(self.per_frame_mse),
            "per_frame_mse": self.per_frame_mse,
            "per_frame_psnr": self.per_frame_psnr,
            "mean_psnr": self.mean_psnr,
            "min_psnr": self.min_psnr,
            "changed_byte_count": self.changed_byte_count,
            "max_abs_byte_delta": self.max_abs_byte_delta,
        }

    def to_text(self) -> str:
        lines = []
        for k, v in self.items().items():
            if isinstance(v, list):
                v = ",".join(_fmt(x) for x in v)
            elif isinstance(v, float):
                v = _fmt(v)
            lines.append(f"{k}={v}")
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        rows = ["frame        mse       psnr_db"]
        for i, (m, p) in enumerate(zip(self.per_frame_mse, self.per_frame_psnr)):
            rows.append(f"{i:5d} {m:10.6f} {_fmt(p, 4):>13}")
        rows.append(f"mean psnr {_fmt(self.mean_psnr, 4)} dB, {self.changed_byte_count} bytes changed, "
                    f"max |delta| {self.max_abs_byte_delta}")
        return "\n".join(rows) + "\n"


def _fmt(x: float, digits: int = 6) -> str:
    return "inf" if math.isinf(x) else f"{x:.{digits}f}"


def compare(cover: Clip, stego: Clip) -> FidelityReport:
    if (cover.width, cover.height, cover.frame_count) != (stego.width, stego.height, stego.frame_count):
        raise DimensionMismatch("cover and stego clips differ in size or frame count")
    per_mse = [mse(a, b) for a, b in zip(cover.frames, stego.frames)]
    per_psnr = [psnr(m) for m in per_mse]
    # mean PSNR from the pooled MSE so a lossless frame doesn't make it infinite
    pooled = sum(per_mse) / len(per_mse)
    d = np.abs(cover.flat_bytes().astype(np.int16) - stego.flat_bytes().astype(np.int16))
    return FidelityReport(
        per_frame_mse=per_mse,
        per_frame_psnr=per_psnr,
        mean_psnr=psnr(pooled),
        changed_byte_count=int(np.count_nonzero(d)),
        max_abs_byte_delta=int(d.max()),
    )
