"""Command-line interface.

Exit status: 0 ok, 1 usage, 2 capacity, 3 integrity (wrong key or
corruption), 4 I/O or format.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import embedding, extraction, frame_io, metrics, motion_analysis
from .errors import CapacityError, FormatError, IntegrityError, StegoError
from .motion_analysis import AnalysisParams, Method
from .synth import gen_test_clip

log = logging.getLogger("clipstego")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CAPACITY = 2
EXIT_INTEGRITY = 3
EXIT_IO = 4

METHODS = {
    "pixel-diff": Method.PIXEL_DIFF,
    "block": Method.BLOCK_LIKELIHOOD,
    "histogram": Method.COLOR_HISTOGRAM,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _pair(text: str, sep: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split(sep)
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers separated by {sep!r}, got {text!r}")


def _add_inputs(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--input-avi", type=Path, metavar="F", help="uncompressed RGB24 AVI")
    g.add_argument("--input-frames", type=Path, metavar="DIR", help="directory of P6 PPM frames")


def _add_analysis(p: argparse.ArgumentParser) -> None:
    d = AnalysisParams()
    p.add_argument("--method", choices=sorted(METHODS), default="pixel-diff")
    p.add_argument("--threshold", type=int, default=d.diff_threshold, help="gray-level difference still counted as static")
    p.add_argument("--block-size", type=int, default=d.block_size)
    p.add_argument("--mean-tol", type=float, default=d.mean_tol)
    p.add_argument("--var-tol", type=float, default=d.var_tol)
    p.add_argument("--bins", type=int, default=d.hist_bins)
    p.add_argument("--hist-tol", type=float, default=d.hist_tol)


def _add_key(p: argparse.ArgumentParser, dynamic: bool = True) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--key", help="stego-key string")
    g.add_argument("--key-file", type=Path, help="stego-key as raw file bytes")
    if dynamic:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--key-dynamic", help="key for the dynamic payload (default: --key)")
        g.add_argument("--key-dynamic-file", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="clipstego", description="Hide data in uncompressed video clips.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("analyze", help="classify pixels as static or dynamic")
    _add_inputs(p)
    _add_analysis(p)
    p.add_argument("--mask-out", type=Path, metavar="DIR", help="write PGM masks (255 = dynamic)")

    p = sub.add_parser("capacity", help="report how much a clip can carry")
    _add_inputs(p)
    _add_analysis(p)
    _add_key(p, dynamic=False)

    p = sub.add_parser("embed", help="hide payload files in a clip")
    _add_inputs(p)
    _add_analysis(p)
    p.add_argument("--payload", type=Path, help="file for the static region")
    p.add_argument("--payload-dynamic", type=Path, help="file for the dynamic region")
    _add_key(p)
    p.add_argument("--output", type=Path, required=True, help="*.avi, or a directory for PPM frames")
    p.add_argument("--report", type=Path, help="write the embed report here instead of stdout")

    p = sub.add_parser("extract", help="recover payloads from a stego clip")
    _add_inputs(p)
    _add_key(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--out-dynamic", type=Path)
    p.add_argument("--recheck", action="store_true",
                   help="re-run detection on the stego clip and report agreement with the embedded map")

    p = sub.add_parser("compare", help="fidelity of a stego clip against its cover")
    p.add_argument("--cover", type=Path, required=True, help="AVI file or PPM frame directory")
    p.add_argument("--stego", type=Path, required=True)
    p.add_argument("--table", action="store_true", help="human-readable table instead of key=value")

    p = sub.add_parser("gen", help="write a synthetic clip with a moving block")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--block", type=lambda s: _pair(s, "x"), default=(8, 8), metavar="WxH")
    p.add_argument("--velocity", type=lambda s: _pair(s, ","), default=(2, 0), metavar="DX,DY")
    p.add_argument("--start", type=lambda s: _pair(s, ","), default=(0, 0), metavar="X,Y")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="*.avi, or a directory for PPM frames")

    p = sub.add_parser("convert", help="convert between AVI and PPM frame directories")
    _add_inputs(p)
    p.add_argument("--output", type=Path, required=True)
    return parser


def _params(args) -> AnalysisParams:
    try:
        return AnalysisParams(
            method=METHODS[args.method],
            diff_threshold=args.threshold,
            block_size=args.block_size,
            mean_tol=args.mean_tol,
            var_tol=args.var_tol,
            hist_bins=args.bins,
            hist_tol=args.hist_tol,
        )
    except ValueError as e:
        raise UsageError(str(e))


def _load(args) -> frame_io.Clip:
    if args.input_avi is not None:
        return frame_io.read_avi(args.input_avi.read_bytes())
    return frame_io.read_frame_dir(args.input_frames)


def _key(text: Optional[str], path: Optional[Path]) -> Optional[bytes]:
    if path is not None:
        return path.read_bytes()
    if text is not None:
        return text.encode("utf-8")
    return None


def _emit(text: str, path: Optional[Path] = None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def cmd_analyze(args) -> int:
    clip = _load(args)
    region = motion_analysis.analyze(clip, _params(args))
    if args.mask_out:
        motion_analysis.write_mask_pgms(region, args.mask_out)
    dyn = region.mask.reshape(region.frame_count, -1).sum(axis=1)
    lines = [
        f"method={args.method}",
        f"frames={region.frame_count}",
        f"width={region.width}",
        f"height={region.height}",
        f"static_pixels={region.static_count()}",
        f"dynamic_pixels={region.dynamic_count()}",
        "dynamic_pixels_per_frame=" + ",".join(str(int(d)) for d in dyn),
    ]
    _emit("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_capacity(args) -> int:
    clip = _load(args)
    report = embedding.capacity(clip, _params(args), _key(args.key, args.key_file))
    _emit(report.to_text())
    return EXIT_OK


def cmd_embed(args) -> int:
    if args.payload is None and args.payload_dynamic is None:
        raise UsageError("embed needs --payload and/or --payload-dynamic")
    clip = _load(args)
    static = args.payload.read_bytes() if args.payload else None
    dynamic = args.payload_dynamic.read_bytes() if args.payload_dynamic else None
    try:
        stego, report = embedding.embed(
            clip,
            _params(args),
            static_payload=static,
            dynamic_payload=dynamic,
            static_key=_key(args.key, args.key_file),
            dynamic_key=_key(args.key_dynamic, args.key_dynamic_file),
        )
    except CapacityError:
        raise
    except ValueError as e:
        raise UsageError(str(e))
    frame_io.save_clip(stego, args.output)
    _emit(report.to_text(), args.report)
    return EXIT_OK


def cmd_extract(args) -> int:
    clip = _load(args)
    static_key = _key(args.key, args.key_file)
    result = extraction.extract(clip, static_key, _key(args.key_dynamic, args.key_dynamic_file))
    args.out.write_bytes(result.static_payload)
    if args.out_dynamic is not None:
        args.out_dynamic.write_bytes(result.dynamic_payload)
    elif result.dynamic_payload:
        log.warning("dynamic payload of %d bytes present; pass --out-dynamic to save it",
                    len(result.dynamic_payload))
    lines = [
        f"method={result.method_name}",
        f"static_bytes={len(result.static_payload)}",
        f"dynamic_bytes={len(result.dynamic_payload)}",
    ]
    if args.recheck:
        # detection on the stego clip is only advisory: embedding perturbs the measured pixels
        try:
            params = AnalysisParams(method=Method(result.method))
            again = motion_analysis.analyze(clip, params)
            agree = float(np.mean(again.mask == result.map.mask))
            lines.append(f"recheck_agreement={agree:.6f}")
        except ValueError:
            lines.append("recheck_agreement=unavailable")
    _emit("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_compare(args) -> int:
    report = metrics.compare(frame_io.load_clip(args.cover), frame_io.load_clip(args.stego))
    _emit(report.to_table() if args.table else report.to_text())
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        clip = gen_test_clip(args.width, args.height, args.frames, args.block, args.velocity,
                             args.seed, args.start)
    except ValueError as e:
        raise UsageError(str(e))
    written = frame_io.save_clip(clip, args.out)
    _emit(f"wrote={len(written)}\nframes={clip.frame_count}\n")
    return EXIT_OK


def cmd_convert(args) -> int:
    frame_io.save_clip(_load(args), args.output)
    return EXIT_OK


COMMANDS = {
    "analyze": cmd_analyze,
    "capacity": cmd_capacity,
    "embed": cmd_embed,
    "extract": cmd_extract,
    "compare": cmd_compare,
    "gen": cmd_gen,
    "convert": cmd_convert,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"clipstego: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as e:
        print(f"clipstego: capacity: {e}", file=sys.stderr)
        return EXIT_CAPACITY
    except IntegrityError as e:
        print(f"clipstego: integrity: {e}", file=sys.stderr)
        return EXIT_INTEGRITY
    except (FormatError, OSError, StegoError) as e:
        print(f"clipstego: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
