import sys
import zlib
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from clipstego.frame_io import Clip  # noqa: E402


def random_clip(rng, frames, height, width):
    return Clip.from_array(rng.integers(0, 256, (frames, height, width, 3), dtype=np.uint8))


def scene_clip(rng, frames, height, width, n_blocks=2, noise=1):
    """Still textured background, a few moving rectangles, small sensor noise."""
    bg = rng.integers(0, 256, (height, width, 3), dtype=np.int16)
    out = np.repeat(bg[None], frames, axis=0)
    for _ in range(n_blocks):
        bw = int(rng.integers(1, max(2, width // 3)))
        bh = int(rng.integers(1, max(2, height // 3)))
        x, y = int(rng.integers(0, width)), int(rng.integers(0, height))
        dx, dy = (int(v) for v in rng.integers(-2, 3, 2))
        color = rng.integers(0, 256, 3)
        for t in range(frames):
            xs, ys = (x + t * dx) % width, (y + t * dy) % height
            out[t, ys:ys + bh, xs:xs + bw] = color
    if noise:
        out = out + rng.integers(-noise, noise + 1, out.shape)
    return Clip.from_array(np.clip(out, 0, 255).astype(np.uint8))


@pytest.fixture
def rng(request):
    # stable per-test seed (str hash is salted per process)
    return np.random.default_rng(zlib.crc32(request.node.nodeid.encode()))


# --- acceptance summary ------------------------------------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test checks")


def pytest_runtest_makereport(item, call):
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    key = (m.args[0], m.args[1])
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        ok = call.excinfo is None
        _criteria[key] = _criteria.get(key, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), ok in sorted(_criteria.items()):
        terminalreporter.write_line(f"AC{n} {title}: {'PASS' if ok else 'FAIL'}")
