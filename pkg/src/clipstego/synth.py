"""Deterministic test clips: a rectangle sliding over a still background."""

from __future__ import annotations

import numpy as np

from .frame_io import DEFAULT_FPS, Clip


def gen_test_clip(
    width: int,
    height: int,
    frames: int,
    block: tuple[int, int] = (8, 8),
    velocity: tuple[int, int] = (2, 0),
    seed: int = 0,
    start: tuple[int, int] = (0, 0),
    fps=DEFAULT_FPS,
) -> Clip:
    """Textured background in [0, 128) with a bright block in [192, 256).

    The block's top-left corner is ``start + t * velocity`` in frame t and
    is clipped at the frame edges. The value ranges keep every block pixel
    at least 64 gray levels away from every background pixel, so any
    frame-difference detector sees exactly the swept area.
    """
    bw, bh = block
    if width < bw or height < bh or frames < 1:
        raise ValueError("frame must be at least as large as the block and have >= 1 frame")
    rng = np.random.default_rng(seed)
    background = rng.integers(0, 128, size=(height, width, 3), dtype=np.uint8)
    color = rng.integers(192, 256, size=3, dtype=np.uint8)
    out = np.repeat(background[None], frames, axis=0)
    for t in range(frames):
        x = start[0] + t * velocity[0]
        y = start[1] + t * velocity[1]
        x0, x1 = max(x, 0), min(x + bw, width)
        y0, y1 = max(y, 0), min(y + bh, height)
        if x0 < x1 and y0 < y1:
            out[t, y0:y1, x0:x1] = color
    return Clip.from_array(out, fps)
