import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from clipstego.embedding import capacity, embed
from clipstego.errors import DimensionMismatch
from clipstego.frame_io import Clip, Frame
from clipstego.metrics import compare, mse, psnr
from conftest import random_clip, scene_clip


def mse_oracle(a, b):
    total = 0
    for x, y in zip(a.data, b.data):
        total += (x - y) ** 2
    return total / len(a.data)


class TestMse:
    def test_identical(self, rng):
        f = random_clip(rng, 1, 4, 4).frames[0]
        assert mse(f, f) == 0

    def test_single_pixel(self):
        assert mse(Frame(1, 1, bytes([100, 0, 0])), Frame(1, 1, bytes([102, 0, 0]))) == pytest.approx(4 / 3, rel=1e-12)

    def test_oracle(self, rng):
        for _ in range(20):
            c = random_clip(rng, 2, int(rng.integers(1, 9)), int(rng.integers(1, 9)))
            assert mse(*c.frames) == pytest.approx(mse_oracle(*c.frames), rel=1e-9)

    def test_dims(self):
        with pytest.raises(DimensionMismatch):
            mse(Frame(1, 1, bytes(3)), Frame(2, 1, bytes(6)))


class TestPsnr:
    def test_values(self):
        assert psnr(0) == math.inf
        assert psnr(1) == pytest.approx(48.1308, abs=1e-3)
        assert psnr(65025) == pytest.approx(0.0, abs=1e-12)

    def test_negative(self):
        with pytest.raises(ValueError):
            psnr(-1)

    @given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
    def test_strictly_decreasing(self, a, b):
        if a < b:
            assert psnr(a) > psnr(b)


class TestCompare:
    def test_self(self, rng):
        c = random_clip(rng, 3, 5, 5)
        r = compare(c, c)
        assert r.per_frame_mse == [0, 0, 0] and all(math.isinf(p) for p in r.per_frame_psnr)
        assert r.changed_byte_count == 0 and r.max_abs_byte_delta == 0
        assert "mean_psnr=inf" in r.to_text()

    def test_dynamic_only_bound(self, rng):
        c = scene_clip(rng, 4, 24, 24)
        cap = capacity(c)
        s, _ = embed(c, dynamic_payload=rng.bytes(cap.capacity_dynamic_bits // 8))
        r = compare(c, s)
        assert r.max_abs_byte_delta == 1
        assert all(m <= 1 for m in r.per_frame_mse)
        assert r.min_psnr >= 10 * math.log10(255 ** 2)

    def test_static_change_count(self, rng):
        c = scene_clip(rng, 4, 24, 24)
        s, rep = embed(c, static_payload=rng.bytes(60))
        r = compare(c, s)
        assert r.changed_byte_count <= 3 * rep.static_pixels_used + rep.reserved_bits

    def test_symmetric(self, rng):
        a, b = random_clip(rng, 2, 6, 6), random_clip(rng, 2, 6, 6)
        assert compare(a, b).per_frame_mse == compare(b, a).per_frame_mse

    def test_dims(self, rng):
        with pytest.raises(DimensionMismatch):
            compare(random_clip(rng, 2, 4, 4), random_clip(rng, 3, 4, 4))

    def test_table(self, rng):
        c = random_clip(rng, 2, 4, 4)
        s = random_clip(rng, 2, 4, 4)
        table = compare(c, s).to_table()
        assert table.splitlines()[0].split() == ["frame", "mse", "psnr_db"]
        assert len(table.splitlines()) == 4
