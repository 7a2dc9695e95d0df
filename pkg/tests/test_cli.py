import numpy as np
import pytest

from clipstego import cli
from clipstego.embedding import capacity, embed
from clipstego.extraction import extract
from clipstego.frame_io import load_clip, read_avi, read_frame_dir
from clipstego.keying import derive_key_material
from clipstego.metrics import compare
from clipstego.motion_analysis import AnalysisParams, Method, analyze
from clipstego.synth import gen_test_clip


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


@pytest.fixture
def clip_avi(tmp_path, capsys):
    path = tmp_path / "cover.avi"
    code, _, _ = run(capsys, "gen", "--width", 48, "--height", 32, "--frames", 6,
                     "--block", "8x8", "--velocity", "2,1", "--seed", 3, "--out", path)
    assert code == 0
    return path


class TestGen:
    def test_same_seed_same_files(self, tmp_path, capsys):
        for d in ("a", "b"):
            run(capsys, "gen", "--width", 16, "--height", 16, "--frames", 3, "--seed", 5, "--out", tmp_path / d)
        a = sorted((tmp_path / "a").iterdir())
        b = sorted((tmp_path / "b").iterdir())
        assert [p.name for p in a] == [p.name for p in b] == ["frame_000001.ppm", "frame_000002.ppm", "frame_000003.ppm"]
        assert all(x.read_bytes() == y.read_bytes() for x, y in zip(a, b))

    def test_zero_motion_all_static(self):
        c = gen_test_clip(32, 32, 5, (8, 8), (0, 0), seed=1)
        for m in Method:
            assert analyze(c, AnalysisParams(method=m)).dynamic_count() == 0

    def test_swept_region(self):
        w = h = 64
        n, bw, v = 8, 8, 2
        c = gen_test_clip(w, h, n, (bw, bw), (v, 0), seed=7, start=(4, 20))
        got = analyze(c, AnalysisParams()).mask

        def rect(t):
            m = np.zeros((h, w), bool)
            x = 4 + t * v
            m[20:20 + bw, max(x, 0):min(x + bw, w)] = True
            return m

        for t in range(n):
            u = t + 1 if t < n - 1 else t - 1
            assert np.array_equal(got[t], rect(t) ^ rect(u)), t

    def test_block_bigger_than_frame(self, tmp_path, capsys):
        code, _, err = run(capsys, "gen", "--width", 4, "--height", 4, "--frames", 2, "--block", "8x8", "--out", tmp_path)
        assert code == 1 and err


class TestAnalyzeCapacity:
    def test_analyze_with_masks(self, clip_avi, tmp_path, capsys):
        code, out, _ = run(capsys, "analyze", "--input-avi", clip_avi, "--method", "block",
                           "--block-size", 4, "--mask-out", tmp_path / "masks")
        assert code == 0
        report = kv(out)
        region = analyze(read_avi(clip_avi.read_bytes()), AnalysisParams(method=Method.BLOCK_LIKELIHOOD, block_size=4))
        assert int(report["dynamic_pixels"]) == region.dynamic_count()
        assert len(list((tmp_path / "masks").glob("*.pgm"))) == 6

    def test_capacity_matches_library(self, clip_avi, capsys):
        code, out, _ = run(capsys, "capacity", "--input-avi", clip_avi, "--key", "pw", "--method", "histogram")
        assert code == 0
        lib = capacity(read_avi(clip_avi.read_bytes()), AnalysisParams(method=Method.COLOR_HISTOGRAM), b"pw")
        assert out == lib.to_text()

    def test_capacity_all_static_formula(self, tmp_path, capsys):
        run(capsys, "gen", "--width", 20, "--height", 20, "--frames", 2, "--velocity", "0,0", "--out", tmp_path / "c")
        code, out, _ = run(capsys, "capacity", "--input-frames", tmp_path / "c", "--key", "pw")
        rep = kv(out)
        km = derive_key_material(b"pw")
        n_s = 800 - int(rep["reserved_pixels"])
        assert int(rep["capacity_static_bytes"]) == 3 * ((n_s - km.start_i) // km.step_d + 1)
        assert int(rep["capacity_dynamic_bits"]) == 0


class TestEmbedExtract:
    def test_end_to_end(self, clip_avi, tmp_path, capsys):
        secret = tmp_path / "secret.bin"
        secret.write_bytes(bytes(range(256)) * 3)
        dyn = tmp_path / "dyn.bin"
        dyn.write_bytes(b"dynamic part")
        stego = tmp_path / "stego.avi"
        code, out, err = run(capsys, "embed", "--input-avi", clip_avi, "--payload", secret,
                             "--payload-dynamic", dyn, "--key", "alpha", "--key-dynamic", "beta",
                             "--output", stego)
        assert code == 0, err
        assert kv(out)["static_bytes_used"] == "768"
        code, out, err = run(capsys, "extract", "--input-avi", stego, "--key", "alpha", "--key-dynamic", "beta",
                             "--out", tmp_path / "o1", "--out-dynamic", tmp_path / "o2", "--recheck")
        assert code == 0, err
        assert (tmp_path / "o1").read_bytes() == secret.read_bytes()
        assert (tmp_path / "o2").read_bytes() == b"dynamic part"
        assert "recheck_agreement=" in out

    def test_thin_wrapper(self, clip_avi, tmp_path, capsys):
        (tmp_path / "p").write_bytes(b"payload")
        run(capsys, "embed", "--input-avi", clip_avi, "--payload", tmp_path / "p", "--key", "k",
            "--method", "histogram", "--output", tmp_path / "frames")
        lib, _ = embed(read_avi(clip_avi.read_bytes()), AnalysisParams(method=Method.COLOR_HISTOGRAM),
                       b"payload", None, b"k")
        assert read_frame_dir(tmp_path / "frames") == lib

    def test_key_file(self, clip_avi, tmp_path, capsys):
        (tmp_path / "key").write_bytes(b"\x00\xffraw")
        (tmp_path / "p").write_bytes(b"payload")
        run(capsys, "embed", "--input-avi", clip_avi, "--payload", tmp_path / "p",
            "--key-file", tmp_path / "key", "--output", tmp_path / "s.avi")
        assert extract(load_clip(tmp_path / "s.avi"), b"\x00\xffraw").static_payload == b"payload"

    def test_wrong_key_exit_3(self, clip_avi, tmp_path, capsys):
        (tmp_path / "p").write_bytes(b"payload")
        run(capsys, "embed", "--input-avi", clip_avi, "--payload", tmp_path / "p", "--key", "right",
            "--output", tmp_path / "s.avi")
        code, _, err = run(capsys, "extract", "--input-avi", tmp_path / "s.avi", "--key", "wrong",
                           "--out", tmp_path / "o")
        assert code == 3 and "integrity" in err

    def test_capacity_exit_2(self, clip_avi, tmp_path, capsys):
        (tmp_path / "p").write_bytes(bytes(10 ** 6))
        code, _, err = run(capsys, "embed", "--input-avi", clip_avi, "--payload", tmp_path / "p",
                           "--output", tmp_path / "s.avi")
        assert code == 2 and "Secret Data size is more" in err

    def test_missing_input_exit_4(self, tmp_path, capsys):
        code, _, _ = run(capsys, "capacity", "--input-avi", tmp_path / "missing.avi")
        assert code == 4

    def test_bad_format_exit_4(self, tmp_path, capsys):
        (tmp_path / "x.avi").write_bytes(b"RIFF\x04\x00\x00\x00WAVE")
        code, _, _ = run(capsys, "analyze", "--input-avi", tmp_path / "x.avi")
        assert code == 4

    def test_no_payload_exit_1(self, clip_avi, tmp_path, capsys):
        code, _, _ = run(capsys, "embed", "--input-avi", clip_avi, "--output", tmp_path / "s.avi")
        assert code == 1


class TestUsage:
    def test_unknown_subcommand(self, capsys):
        code, _, err = run(capsys, "frobnicate")
        assert code == 1 and "usage" in err

    def test_inputs_mutually_exclusive(self, tmp_path, capsys):
        code, _, err = run(capsys, "analyze", "--input-avi", "a.avi", "--input-frames", tmp_path)
        assert code == 1

    def test_bad_param(self, clip_avi, capsys):
        code, _, _ = run(capsys, "analyze", "--input-avi", clip_avi, "--bins", 1)
        assert code == 1


def test_compare_and_convert(clip_avi, tmp_path, capsys):
    code, _, _ = run(capsys, "convert", "--input-avi", clip_avi, "--output", tmp_path / "frames")
    assert code == 0
    assert read_frame_dir(tmp_path / "frames") == read_avi(clip_avi.read_bytes())
    code, out, _ = run(capsys, "compare", "--cover", clip_avi, "--stego", tmp_path / "frames")
    assert code == 0 and kv(out)["changed_byte_count"] == "0"
    code, out, _ = run(capsys, "compare", "--cover", clip_avi, "--stego", tmp_path / "frames", "--table")
    assert out.startswith("frame")
