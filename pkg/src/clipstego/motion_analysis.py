"""Static/dynamic region detection over consecutive frames.

Three detectors are available: per-pixel gray difference, per-block
(mean, variance) comparison, and per-block color histogram distance. All
of them label frame t by comparing it with frame t+1; the last frame is
compared with its predecessor and a one-frame clip is entirely static.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .frame_io import Clip, Frame

STATIC = 0
DYNAMIC = 1


class Method(enum.IntEnum):
    PIXEL_DIFF = 1
    BLOCK_LIKELIHOOD = 2
    COLOR_HISTOGRAM = 3


@dataclass(frozen=True)
class AnalysisParams:
    method: Method = Method.PIXEL_DIFF
    diff_threshold: int = 2
    block_size: int = 8
    mean_tol: float = 2.0
    var_tol: float = 4.0
    hist_bins: int = 16
    hist_tol: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        if self.diff_threshold < 0:
            raise ValueError("diff_threshold must be >= 0")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if not 2 <= self.hist_bins <= 256:
            raise ValueError("hist_bins must be in [2, 256]")
        if min(self.mean_tol, self.var_tol, self.hist_tol) < 0:
            raise ValueError("tolerances must be >= 0")


class RegionMap:
    """Per-frame, per-pixel labels; ``mask`` is a bool array, True = DYNAMIC."""

    __slots__ = ("mask",)

    def __init__(self, mask: np.ndarray):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 3 or 0 in mask.shape:
            raise ValueError(f"mask must be (frames, height, width), got {mask.shape}")
        mask = mask.copy()
        mask.flags.writeable = False
        self.mask = mask

    @classmethod
    def all_static(cls, frame_count: int, height: int, width: int) -> "RegionMap":
        return cls(np.zeros((frame_count, height, width), dtype=bool))

    @property
    def frame_count(self) -> int:
        return self.mask.shape[0]

    @property
    def height(self) -> int:
        return self.mask.shape[1]

    @property
    def width(self) -> int:
        return self.mask.shape[2]

    def flat(self) -> np.ndarray:
        """Labels (0 static, 1 dynamic) in frame-major, row-major order."""
        return self.mask.reshape(-1).view(np.uint8)

    def static_count(self) -> int:
        return int(self.mask.size - np.count_nonzero(self.mask))

    def dynamic_count(self) -> int:
        return int(np.count_nonzero(self.mask))

    def __eq__(self, other):
        if not isinstance(other, RegionMap):
            return NotImplemented
        return self.mask.shape == other.mask.shape and bool(np.array_equal(self.mask, other.mask))

    def __hash__(self):
        return hash((self.mask.shape, self.mask.tobytes()))

    def __repr__(self):
        return (f"RegionMap({self.frame_count}x{self.height}x{self.width}, "
                f"dynamic={self.dynamic_count()})")


def grayscale(frame: Frame | np.ndarray) -> np.ndarray:
    """round(0.299 R + 0.587 G + 0.114 B), halves rounded up, as int64.

    Integer weights in thousandths keep the rounding exact.
    """
    px = frame.array() if isinstance(frame, Frame) else np.asarray(frame)
    px = px.astype(np.int64)
    return (299 * px[..., 0] + 587 * px[..., 1] + 114 * px[..., 2] + 500) // 1000


def _spread_pairs(pair_labels: np.ndarray, n: int) -> np.ndarray:
    """Expand labels of the n-1 pairs (t, t+1) onto all n frames."""
    if n == 1:
        return np.zeros((1,) + pair_labels.shape[1:], dtype=bool)
    return np.concatenate([pair_labels, pair_labels[-1:]], axis=0)


def pixel_diff_map(clip: Clip, params: AnalysisParams = AnalysisParams()) -> RegionMap:
    n = clip.frame_count
    if n == 1:
        return RegionMap.all_static(1, clip.height, clip.width)
    gray = grayscale(clip.array())
    dyn = np.abs(gray[1:] - gray[:-1]) > params.diff_threshold
    return RegionMap(_spread_pairs(dyn, n))


def _block_labels(height: int, width: int, block: int) -> tuple[np.ndarray, int, np.ndarray]:
    """Block id per pixel (row-major over blocks), block count, pixels per block."""
    by = np.arange(height) // block
    bx = np.arange(width) // block
    nbx = -(-width // block)
    labels = by[:, None] * nbx + bx[None, :]
    nblocks = int(labels.max()) + 1
    sizes = np.bincount(labels.ravel(), minlength=nblocks)
    return labels, nblocks, sizes


def _int_limit(tol: float, multiplier: np.ndarray) -> np.ndarray:
    """floor(tol * m) computed exactly, for comparing integer statistics."""
    t = Fraction(tol)
    uniq, inv = np.unique(multiplier, return_inverse=True)
    lim = np.array([(t * int(m)).__floor__() for m in uniq], dtype=np.int64)
    return lim[inv].reshape(np.shape(multiplier))


def _per_block_sum(values: np.ndarray, labels: np.ndarray, nblocks: int) -> np.ndarray:
    """Sum (frames, H, W) integer values per block -> (frames, nblocks) int64."""
    f = values.shape[0]
    offs = (np.arange(f)[:, None, None] * nblocks + labels[None]).ravel()
    # float64 bincount is exact while per-block sums stay below 2**53
    sums = np.bincount(offs, weights=values.ravel().astype(np.float64), minlength=f * nblocks)
    return np.rint(sums).astype(np.int64).reshape(f, nblocks)


def block_likelihood_map(clip: Clip, params: AnalysisParams = AnalysisParams()) -> RegionMap:
    n = clip.frame_count
    if n == 1:
        return RegionMap.all_static(1, clip.height, clip.width)
    labels, nblocks, sizes = _block_labels(clip.height, clip.width, params.block_size)
    gray = grayscale(clip.array())
    s1 = _per_block_sum(gray, labels, nblocks)
    s2 = _per_block_sum(gray * gray, labels, nblocks)
    cnt = sizes.astype(np.int64)
    # |mean_a - mean_b| <= tol  <=>  |S_a - S_b| <= tol * n
    dmean = np.abs(s1[1:] - s1[:-1])
    # n^2 * var = n Q - S^2, so compare against tol * n^2
    nv = cnt[None, :] * s2 - s1 * s1
    dvar = np.abs(nv[1:] - nv[:-1])
    ok = (dmean <= _int_limit(params.mean_tol, cnt)[None, :]) & \
         (dvar <= _int_limit(params.var_tol, cnt * cnt)[None, :])
    dyn = (~ok)[:, labels]
    return RegionMap(_spread_pairs(dyn, n))


def _histograms(arr: np.ndarray, labels: np.ndarray, nblocks: int, bins: int) -> np.ndarray:
    """Counts of shape (frames, nblocks, 3, bins)."""
    f = arr.shape[0]
    b = arr.astype(np.int64) * bins // 256  # (f, H, W, 3)
    key = (((np.arange(f)[:, None, None, None] * nblocks + labels[None, :, :, None]) * 3
            + np.arange(3)[None, None, None, :]) * bins + b)
    counts = np.bincount(key.ravel(), minlength=f * nblocks * 3 * bins)
    return counts.reshape(f, nblocks, 3, bins)


def histogram_map(clip: Clip, params: AnalysisParams = AnalysisParams()) -> RegionMap:
    n = clip.frame_count
    if n == 1:
        return RegionMap.all_static(1, clip.height, clip.width)
    labels, nblocks, sizes = _block_labels(clip.height, clip.width, params.block_size)
    hist = _histograms(clip.array(), labels, nblocks, params.hist_bins)
    l1 = np.abs(hist[1:] - hist[:-1]).sum(axis=3)  # (n-1, nblocks, 3)
    # L1 / (2 n) <= tol  <=>  L1 <= tol * 2n
    limit = _int_limit(params.hist_tol, 2 * sizes)
    ok = (l1 <= limit[None, :, None]).all(axis=2)
    dyn = (~ok)[:, labels]
    return RegionMap(_spread_pairs(dyn, n))


_DISPATCH = {
    Method.PIXEL_DIFF: pixel_diff_map,
    Method.BLOCK_LIKELIHOOD: block_likelihood_map,
    Method.COLOR_HISTOGRAM: histogram_map,
}


def analyze(clip: Clip, params: AnalysisParams = AnalysisParams()) -> RegionMap:
    return _DISPATCH[params.method](clip, params)


def write_mask_pgms(region: RegionMap, directory: os.PathLike | str) -> list[Path]:
    """Dump the map as P5 images, 255 = dynamic, 0 = static."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for t in range(region.frame_count):
        p = directory / f"mask_{t + 1:06d}.pgm"
        body = (region.mask[t].astype(np.uint8) * 255).tobytes()
        p.write_bytes(b"P5\n%d %d\n255\n" % (region.width, region.height) + body)
        out.append(p)
    return out
