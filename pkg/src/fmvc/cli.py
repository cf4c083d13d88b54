"""Command-line front end: encode, decode, metrics, and the FMSC rate sweep.

Exit codes: 0 ok, 2 configuration error, 3 bitstream error, 4 I/O or input
parsing error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import codec, metrics
from .errors import (
    BitstreamError,
    ConfigError,
    ContractViolation,
    FmvcError,
    IoError,
    ParseError,
    TruncatedStream,
    UnsupportedFormat,
)
from .foveation import (
    DEFAULT_CSF,
    DEFAULT_SCREEN_WIDTH_M,
    DEFAULT_VIEWING_DISTANCE_M,
    DisplayGeometry,
    FoveationMap,
    foveation_map,
    gaussian_map,
)
from .video_io import VideoSequence, read_y4m, write_y4m

DEFAULT_FMSC_DIVISORS = (10, 8, 6, 4, 3, 2)


@dataclass(frozen=True)
class EncodeConfig:
    """Validated run configuration shared by encode and sweep commands.

    fmsc_specs are 'H/k' or pixel strings; an empty tuple selects the
    contrast-sensitivity map instead of gaussians.
    """

    fmsc_specs: tuple[str, ...] = ()
    gaze_source: str = "center"  # 'center' or a gaze-track file path
    q_base: int = 4
    n_levels: int = 16
    screen_width_m: float = DEFAULT_SCREEN_WIDTH_M
    viewing_distance_m: float = DEFAULT_VIEWING_DISTANCE_M

    def __post_init__(self):
        if self.q_base < 1:
            raise ConfigError(f"base quantizer step must be >= 1, got {self.q_base}")
        if self.n_levels < 2:
            raise ConfigError(f"level count must be >= 2, got {self.n_levels}")
        if self.screen_width_m <= 0 or self.viewing_distance_m <= 0:
            raise ConfigError("screen width and viewing distance must be positive")
        for fmsc_spec in self.fmsc_specs:
            parse_fmsc(fmsc_spec, frame_height=1)  # syntax and positivity

    def geometry(self, width: int, height: int) -> DisplayGeometry:
        return DisplayGeometry(self.screen_width_m, self.viewing_distance_m, width, height)


def parse_fmsc(text: str, frame_height: int) -> tuple[float, int]:
    """Parse an FMSC flag: 'H/k' (height divisor) or a pixel count.

    Returns (sigma in pixels, code) where code is the divisor for H/k forms
    with integer k in [1, 255], else 0.
    """
    text = text.strip()
    if text.upper().startswith("H/"):
        try:
            divisor = float(text[2:])
        except ValueError:
            raise ConfigError(f"bad FMSC divisor in {text!r}") from None
        if divisor <= 0:
            raise ConfigError(f"FMSC divisor must be positive, got {text!r}")
        code = int(divisor) if divisor == int(divisor) and 1 <= divisor <= 255 else 0
        return frame_height / divisor, code
    try:
        pixels = float(text)
    except ValueError:
        raise ConfigError(f"FMSC must be 'H/k' or a pixel count, got {text!r}") from None
    if pixels <= 0:
        raise ConfigError(f"FMSC must be positive, got {text!r}")
    return pixels, 0


def read_gaze_track(text: str) -> list[tuple[int, int, int]]:
    """Parse 'frame_idx,x,y' rows with strictly increasing frame indices."""
    track = []
    prev_idx = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ParseError(f"expected 'frame_idx,x,y', got {raw!r}", line=lineno)
        try:
            idx, x, y = int(parts[0]), int(float(parts[1])), int(float(parts[2]))
        except ValueError:
            raise ParseError(f"non-numeric field in {raw!r}", line=lineno) from None
        if idx <= prev_idx:
            raise ParseError(f"frame indices must be strictly increasing, got {idx}", line=lineno)
        prev_idx = idx
        track.append((idx, x, y))
    return track


def densify_gaze(
    track: list[tuple[int, int, int]], frame_count: int, width: int, height: int
) -> list[tuple[int, int]]:
    """Per-frame gaze from a sparse track: hold the last row through gaps and
    past the end; frames before the first row take its gaze.  Coordinates are
    clamped into the frame."""
    if not track:
        raise ConfigError("gaze track contains no rows")
    gazes = []
    pos = 0
    current = (track[0][1], track[0][2])
    for frame in range(frame_count):
        while pos < len(track) and track[pos][0] <= frame:
            current = (track[pos][1], track[pos][2])
            pos += 1
        x = min(max(current[0], 0), width - 1)
        y = min(max(current[1], 0), height - 1)
        gazes.append((x, y))
    return gazes


def _resolve_gazes(gaze_arg: str, frame_count: int, width: int, height: int) -> list[tuple[int, int]]:
    if gaze_arg == "center":
        return [(width // 2, height // 2)] * frame_count
    try:
        with open(gaze_arg, "r", encoding="ascii") as fh:
            text = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read gaze track {gaze_arg!r}: {exc}") from exc
    try:
        track = read_gaze_track(text)
    except ParseError as exc:
        raise ConfigError(f"gaze track {gaze_arg!r}: {exc}") from exc
    return densify_gaze(track, frame_count, width, height)


def _build_maps(
    seq: VideoSequence,
    gazes: list[tuple[int, int]],
    fmsc_px: float | None,
    geom: DisplayGeometry,
) -> list[FoveationMap]:
    if fmsc_px is None:
        return [foveation_map(geom, g, DEFAULT_CSF) for g in gazes]
    return [gaussian_map(g, fmsc_px, seq.width, seq.height) for g in gazes]


def _read_sequence(path: str) -> VideoSequence:
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {path!r}: {exc}") from exc
    return read_y4m(data)


def _config_from_args(args, fmsc_specs: tuple[str, ...]) -> EncodeConfig:
    return EncodeConfig(
        fmsc_specs=fmsc_specs,
        gaze_source=args.gaze,
        q_base=getattr(args, "qbase", 4),
        screen_width_m=args.screen_width,
        viewing_distance_m=args.distance,
    )


def _encode_once(seq: VideoSequence, cfg: EncodeConfig, fmsc_spec: str | None):
    geom = cfg.geometry(seq.width, seq.height)
    gazes = _resolve_gazes(cfg.gaze_source, len(seq), seq.width, seq.height)
    if fmsc_spec is None:
        fmsc_px, code = None, 0
    else:
        fmsc_px, code = parse_fmsc(fmsc_spec, seq.height)
    maps = _build_maps(seq, gazes, fmsc_px, geom)
    sched = codec.QuantSchedule(n_levels=cfg.n_levels, q_base=cfg.q_base)
    return codec.encode_sequence(
        seq,
        maps,
        sched,
        codec.CodecConfig(),
        fmsc_codes=[code] * len(seq),
        screen_width_m=geom.screen_width_m,
        viewing_distance_m=geom.viewing_distance_m,
    )


def cmd_encode(args) -> int:
    seq = _read_sequence(args.input)
    cfg = _config_from_args(args, (args.fmsc,) if args.fmsc is not None else ())
    sbs, _ = _encode_once(seq, cfg, args.fmsc)
    data = sbs.to_bytes()
    try:
        with open(args.output, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise IoError(f"cannot write {args.output!r}: {exc}") from exc
    print(f"encoded {sbs.frame_count} frames {sbs.width}x{sbs.height} -> {len(data)} bytes")
    print(f"bpp {sbs.bpp():.6f}")
    for i, rec in enumerate(sbs.frames):
        print(f"frame {i}: {8 * len(rec.bitstream.payload)} bits")
    return 0


def cmd_decode(args) -> int:
    try:
        with open(args.input, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoError(f"cannot read {args.input!r}: {exc}") from exc
    sbs = codec.SequenceBitstream.from_bytes(data)
    seq = codec.decode_sequence(sbs)
    try:
        with open(args.output, "wb") as fh:
            count = write_y4m(seq, fh)
    except OSError as exc:
        raise IoError(f"cannot write {args.output!r}: {exc}") from exc
    print(f"decoded {len(seq)} frames {seq.width}x{seq.height} -> {count} bytes")
    return 0


# The foveation-weighted SSIM column is computed against the continuous
# (unquantized) sensitivity map; the CSV header records that choice.
_REPORT_PREAMBLE = "# fw_ssim weighted by the continuous foveation map"


def _frame_reports(
    ref_seq: VideoSequence,
    test_seq: VideoSequence,
    gazes: list[tuple[int, int]],
    geom: DisplayGeometry,
    per_frame_bits: list[int] | None,
    block_bits: list | None = None,
) -> list[metrics.QualityReport]:
    reports = []
    pixels = ref_seq.width * ref_seq.height
    for i, (ref, test) in enumerate(zip(ref_seq.frames, test_seq.frames)):
        fmap = foveation_map(geom, gazes[i], DEFAULT_CSF)
        smap = metrics.ssim_map(ref.y, test.y)
        bits_profile = ssim_profile = None
        if block_bits is not None and block_bits[i] is not None:
            bits_profile, ssim_profile = metrics.bits_ssim_profile(block_bits[i], smap)
        reports.append(
            metrics.QualityReport(
                frame_idx=i,
                bpp=per_frame_bits[i] / pixels if per_frame_bits else 0.0,
                mean_ssim=float(smap.mean()),
                fw_ssim=metrics.fw_ssim_from_map(smap, fmap),
                fwqi=metrics.fwqi_approx(ref.y, test.y, gazes[i], geom, DEFAULT_CSF),
                bits_profile=bits_profile,
                ssim_profile=ssim_profile,
            )
        )
    return reports


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc


def cmd_metrics(args) -> int:
    ref_seq = _read_sequence(args.ref)
    test_seq = _read_sequence(args.test)
    if (ref_seq.width, ref_seq.height, len(ref_seq)) != (
        test_seq.width,
        test_seq.height,
        len(test_seq),
    ):
        raise ConfigError("reference and test sequences disagree on geometry or length")
    cfg = _config_from_args(args, ())
    geom = cfg.geometry(ref_seq.width, ref_seq.height)
    gazes = _resolve_gazes(cfg.gaze_source, len(ref_seq), ref_seq.width, ref_seq.height)
    reports = _frame_reports(ref_seq, test_seq, gazes, geom, None)
    lines = [_REPORT_PREAMBLE, metrics.QualityReport.CSV_HEADER]
    lines += [r.csv_row() for r in reports]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def cmd_rd_sweep(args) -> int:
    seq = _read_sequence(args.input)
    specs = tuple(args.fmsc_set.split(",")) if args.fmsc_set else tuple(
        f"H/{k}" for k in DEFAULT_FMSC_DIVISORS
    )
    cfg = _config_from_args(args, specs)
    geom = cfg.geometry(seq.width, seq.height)
    gazes = _resolve_gazes(cfg.gaze_source, len(seq), seq.width, seq.height)

    rows = []
    for fmsc_spec in cfg.fmsc_specs:
        fmsc_px, _ = parse_fmsc(fmsc_spec, seq.height)
        sbs, recon = _encode_once(seq, cfg, fmsc_spec)
        bits = [8 * len(rec.bitstream.payload) for rec in sbs.frames]
        grids = [rec.bitstream.block_bits for rec in sbs.frames]
        reports = _frame_reports(seq, recon, gazes, geom, bits, grids)
        rows.append(
            (
                fmsc_px,
                sbs.bpp(),
                float(np.mean([r.mean_ssim for r in reports])),
                float(np.mean([r.fw_ssim for r in reports])),
                float(np.mean([r.fwqi for r in reports])),
            )
        )

    lines = [_REPORT_PREAMBLE, "fmsc,bpp,mean_ssim,fw_ssim,fwqi_approx"]
    lines += [
        f"{fmsc:.3f},{bpp:.6f},{ms:.6f},{fw:.6f},{fq:.6f}" for fmsc, bpp, ms, fw, fq in rows
    ]
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmvc",
        description="Gaze-contingent video codec and rate-distortion harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_geometry(p):
        p.add_argument("--screen-width", type=float, default=DEFAULT_SCREEN_WIDTH_M,
                       help="screen width in meters (default %(default)s)")
        p.add_argument("--distance", type=float, default=DEFAULT_VIEWING_DISTANCE_M,
                       help="viewing distance in meters (default %(default)s)")

    def add_gaze(p):
        p.add_argument("--gaze", default="center",
                       help="'center' or a CSV gaze track 'frame_idx,x,y'; short "
                            "tracks hold their last gaze through remaining frames")

    enc = sub.add_parser("encode", help="encode a .y4m file to a .fmvc bitstream")
    enc.add_argument("--input", required=True)
    enc.add_argument("--output", required=True)
    enc.add_argument("--fmsc", default=None,
                     help="gaussian map width: 'H/k' or pixels; omit to use the "
                          "contrast-sensitivity map")
    enc.add_argument("--qbase", type=int, default=4, help="base quantizer step (default 4)")
    add_gaze(enc)
    add_geometry(enc)
    enc.set_defaults(func=cmd_encode)

    dec = sub.add_parser("decode", help="decode a .fmvc bitstream to .y4m")
    dec.add_argument("--input", required=True)
    dec.add_argument("--output", required=True)
    dec.set_defaults(func=cmd_decode)

    met = sub.add_parser("metrics", help="quality report between two .y4m files")
    met.add_argument("--ref", required=True)
    met.add_argument("--test", required=True)
    met.add_argument("--out", default=None, help="CSV output path (default stdout)")
    add_gaze(met)
    add_geometry(met)
    met.set_defaults(func=cmd_metrics)

    sweep = sub.add_parser("rd-sweep", help="rate-distortion sweep over FMSC values")
    sweep.add_argument("--input", required=True)
    sweep.add_argument("--out", default=None, help="CSV output path (default stdout)")
    sweep.add_argument("--fmsc-set", default=None,
                       help="comma-separated FMSC specs (default H/10,H/8,H/6,H/4,H/3,H/2)")
    sweep.add_argument("--qbase", type=int, default=4)
    add_gaze(sweep)
    add_geometry(sweep)
    sweep.set_defaults(func=cmd_rd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BitstreamError as exc:
        print(f"bitstream error: {exc}", file=sys.stderr)
        return 3
    except (IoError, ParseError, UnsupportedFormat, TruncatedStream) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    except FmvcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
