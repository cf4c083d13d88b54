"""Residual codec: level-indexed quantization, entropy coding, bitstreams.

The coding path is integer-only end to end (transform, quantizer, entropy
code), so identical inputs produce byte-identical streams on any platform.
The decoder's output is bit-exactly the encoder's own reconstruction; both
sides share one reconstruction routine so the recurrent frame chain cannot
drift.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .allocation import block_levels
from .bitio import BitReader, BitWriter, signed_to_symbol, symbol_to_signed
from .displacement import (
    CATALOGUE,
    DisplacementField,
    residual_set,
    predicted_plane,
    select_displacement_per_block,
)
from .errors import BitstreamError, ContractViolation, UnsupportedVersion
from .foveation import FoveationMap, LevelMap, quantize_map
from .transform import BLOCK, forward_blocks, inverse_blocks, zigzag_scan, zigzag_unscan
from .video_io import Frame, FramePlane, VideoSequence, chroma_dims

MAGIC = b"FMVC"
VERSION = 1
_HEADER = struct.Struct("<4sHHHHHI3d")  # magic, version, W, H, fps, count, geometry
_FRAME_HEAD = struct.Struct("<HHBI")  # gaze_x, gaze_y, fmsc_code, payload bytes


@dataclass(frozen=True)
class QuantSchedule:
    """Per-level quantizer steps: geometric in the level, q_base at the top.

    steps[l] = max(1, round(q_base * 2**((n - 1 - l) / 2))) mirrors the
    exponential falloff of peripheral sensitivity, so each level buys a
    roughly equal perceptual increment.
    """

    n_levels: int = 16
    q_base: int = 4
    steps: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.n_levels < 2:
            raise ContractViolation(f"level count must be >= 2, got {self.n_levels}")
        if self.q_base < 1:
            raise ContractViolation(f"base step must be >= 1, got {self.q_base}")
        steps = tuple(
            max(1, int(self.q_base * 2.0 ** ((self.n_levels - 1 - l) / 2.0) + 0.5))
            for l in range(self.n_levels)
        )
        object.__setattr__(self, "steps", steps)

    def steps_array(self) -> np.ndarray:
        return np.asarray(self.steps, dtype=np.int64)


@dataclass(frozen=True)
class CodecConfig:
    """Encoder knobs; decoding needs none of them."""

    force_zero_displacement: bool = False


def _round_div_half_away(values: np.ndarray, steps: np.ndarray) -> np.ndarray:
    return np.sign(values) * ((2 * np.abs(values) + steps) // (2 * steps))


def quantize_coeffs(coeffs: np.ndarray, level: int, sched: QuantSchedule) -> np.ndarray:
    """Divide by the level's step, rounding half away from zero."""
    if not 0 <= level < sched.n_levels:
        raise ContractViolation(f"level {level} outside [0, {sched.n_levels - 1}]")
    c = np.asarray(coeffs, dtype=np.int64)
    return _round_div_half_away(c, np.int64(sched.steps[level]))


def dequantize_coeffs(qcoeffs: np.ndarray, level: int, sched: QuantSchedule) -> np.ndarray:
    if not 0 <= level < sched.n_levels:
        raise ContractViolation(f"level {level} outside [0, {sched.n_levels - 1}]")
    return np.asarray(qcoeffs, dtype=np.int64) * sched.steps[level]


# --- block entropy code ------------------------------------------------
# Zigzag-ordered values up to the last nonzero coefficient, each coded as
# exp-golomb of (signed symbol + 1); codeword 0 is the end-of-block marker.
# The +1 shift keeps in-run zero values distinguishable from the marker.


def entropy_encode_block(writer: BitWriter, qblock: np.ndarray) -> None:
    zz = zigzag_scan(qblock)
    nonzero = np.nonzero(zz)[0]
    if len(nonzero):
        for v in zz[: nonzero[-1] + 1].tolist():
            writer.write_ue(signed_to_symbol(v) + 1)
    writer.write_ue(0)


def entropy_decode_block(reader: BitReader) -> np.ndarray:
    values = []
    while True:
        symbol = reader.read_ue()
        if symbol == 0:
            break
        if len(values) >= 64:
            raise BitstreamError(
                "block carries more than 64 coefficients", byte_offset=reader.bit_position // 8
            )
        values.append(symbol_to_signed(symbol - 1))
    flat = np.zeros(64, dtype=np.int64)
    flat[: len(values)] = values
    return zigzag_unscan(flat)


# --- plane helpers ------------------------------------------------------


def _grid_dims(width: int, height: int) -> tuple[int, int]:
    return -(-height // BLOCK), -(-width // BLOCK)


def _to_blocks(plane: np.ndarray) -> np.ndarray:
    """Split a plane into (n_blocks, 8, 8), edge-replicating partial tiles."""
    h, w = plane.shape
    pad_h, pad_w = -h % BLOCK, -w % BLOCK
    if pad_h or pad_w:
        plane = np.pad(plane, ((0, pad_h), (0, pad_w)), mode="edge")
    nby, nbx = plane.shape[0] // BLOCK, plane.shape[1] // BLOCK
    return plane.reshape(nby, BLOCK, nbx, BLOCK).transpose(0, 2, 1, 3).reshape(-1, BLOCK, BLOCK)


def _from_blocks(blocks: np.ndarray, nby: int, nbx: int, height: int, width: int) -> np.ndarray:
    full = blocks.reshape(nby, nbx, BLOCK, BLOCK).transpose(0, 2, 1, 3)
    return full.reshape(nby * BLOCK, nbx * BLOCK)[:height, :width]


def _quantize_plane_blocks(coeffs: np.ndarray, levels_flat: np.ndarray, sched: QuantSchedule) -> np.ndarray:
    steps = sched.steps_array()[levels_flat][:, None, None]
    return _round_div_half_away(coeffs, steps)


def _encode_plane(
    writer: BitWriter,
    cur: np.ndarray,
    pred: np.ndarray,
    levels_grid: np.ndarray,
    sched: QuantSchedule,
    prefixes: np.ndarray | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Code one plane against its prediction; returns (qblocks, bits per block)."""
    residual = cur.astype(np.int64) - pred.astype(np.int64)
    coeffs = forward_blocks(_to_blocks(residual))
    levels_flat = levels_grid.reshape(-1)
    qblocks = _quantize_plane_blocks(coeffs, levels_flat, sched)

    bits = np.empty(len(qblocks), dtype=np.int64)
    for i, qb in enumerate(qblocks):
        start = writer.bit_length
        if prefixes is not None:
            writer.write_bits(int(prefixes[i]), 8)
        entropy_encode_block(writer, qb)
        bits[i] = writer.bit_length - start
    return qblocks, bits.reshape(levels_grid.shape)


def _reconstruct_plane(
    qblocks: np.ndarray,
    levels_grid: np.ndarray,
    sched: QuantSchedule,
    pred: np.ndarray,
    height: int,
    width: int,
) -> np.ndarray:
    """Shared encoder/decoder reconstruction; must stay bit-deterministic."""
    steps = sched.steps_array()[levels_grid.reshape(-1)][:, None, None]
    res_blocks = inverse_blocks(qblocks * steps)
    nby, nbx = levels_grid.shape
    residual = _from_blocks(res_blocks, nby, nbx, height, width)
    # Clamping the residual at +-255 never changes the clamped sum below,
    # because pred lies in [0, 255].
    residual = np.clip(residual, -255, 255)
    return np.clip(pred.astype(np.int64) + residual, 0, 255).astype(np.uint8)


def _chroma_block_map(n_luma: int, n_chroma: int) -> np.ndarray:
    """Chroma block -> covering luma block (top-left of the 2x2 it spans)."""
    return np.minimum(2 * np.arange(n_chroma), n_luma - 1)


def _chroma_grids(
    field: DisplacementField, levels_grid: np.ndarray, cw: int, ch: int
) -> tuple[DisplacementField, np.ndarray]:
    nby, nbx = levels_grid.shape
    cnby, cnbx = _grid_dims(cw, ch)
    rows = _chroma_block_map(nby, cnby)
    cols = _chroma_block_map(nbx, cnbx)
    cfield = DisplacementField(BLOCK, field.indices[np.ix_(rows, cols)])
    clevels = levels_grid[np.ix_(rows, cols)]
    return cfield, clevels


@dataclass(frozen=True, eq=False)
class FrameBitstream:
    """One coded frame: byte-aligned payload plus encoder-side bit accounting.

    block_bits is a luma-block grid; each chroma block's bits are split
    evenly among the luma blocks covering the same area, so the grid sums
    exactly to total_bits.  Both fields are None on parsed (received)
    frames, where only the payload is known.
    """

    payload: bytes
    block_bits: np.ndarray | None = None
    total_bits: int | None = None

    def __eq__(self, other):
        return isinstance(other, FrameBitstream) and self.payload == other.payload


def _spread_chroma_bits(block_bits: np.ndarray, chroma_bits: np.ndarray) -> None:
    """Distribute chroma block bits onto the luma-block grid, in place."""
    nby, nbx = block_bits.shape
    cnby, cnbx = chroma_bits.shape
    rows = 2 * np.arange(cnby)
    cols = 2 * np.arange(cnbx)
    row_span = np.where(rows + 1 < nby, 2, 1)
    col_span = np.where(cols + 1 < nbx, 2, 1)
    share = chroma_bits / (row_span[:, None] * col_span[None, :])
    for di in (0, 1):
        rr = rows + di
        rmask = rr < nby
        for dj in (0, 1):
            cc = cols + dj
            cmask = cc < nbx
            sub = share[np.ix_(rmask, cmask)]
            valid = (row_span[rmask, None] > di) & (col_span[None, cmask] > dj)
            block_bits[np.ix_(rr[rmask], cc[cmask])] += np.where(valid, sub, 0.0)


def encode_frame(
    cur: Frame,
    prev_recon: Frame,
    level_map: LevelMap,
    sched: QuantSchedule,
    cfg: CodecConfig = CodecConfig(),
) -> tuple[FrameBitstream, Frame]:
    """Code one frame against the previous reconstruction.

    Per luma block: pick the lowest-energy displacement, transform that
    residual, quantize at the block's foveation level, entropy-code.  Chroma
    reuses the luma choices with halved offsets.  Returns the bitstream and
    the reconstruction the decoder will reproduce bit-exactly.
    """
    w, h = cur.y.width, cur.y.height
    if (prev_recon.y.width, prev_recon.y.height) != (w, h):
        raise ContractViolation("current and previous frames disagree on dimensions")
    if (level_map.width, level_map.height) != (w, h):
        raise ContractViolation(
            f"level map is {level_map.width}x{level_map.height}, frame is {w}x{h}"
        )

    nby, nbx = _grid_dims(w, h)
    if cfg.force_zero_displacement:
        fld = DisplacementField.uniform(CATALOGUE[0], nby, nbx, BLOCK)
    else:
        fld = select_displacement_per_block(residual_set(cur.y, prev_recon.y), BLOCK)
    levels_grid = block_levels(level_map, BLOCK)

    writer = BitWriter()
    pred_y = predicted_plane(prev_recon.y.samples, fld)
    prefixes = (fld.indices.astype(np.uint8) << 4 | levels_grid.astype(np.uint8)).reshape(-1)
    q_y, bits_y = _encode_plane(writer, cur.y.samples, pred_y, levels_grid, sched, prefixes)
    recon_y = _reconstruct_plane(q_y, levels_grid, sched, pred_y, h, w)

    cw, ch = chroma_dims(w, h)
    cfield, clevels = _chroma_grids(fld, levels_grid, cw, ch)
    block_bits = bits_y.astype(np.float64)
    recon_chroma = []
    for cur_plane, prev_plane in ((cur.cb, prev_recon.cb), (cur.cr, prev_recon.cr)):
        pred_c = predicted_plane(prev_plane.samples, cfield, halve_offsets=True)
        q_c, bits_c = _encode_plane(writer, cur_plane.samples, pred_c, clevels, sched, None)
        recon_chroma.append(_reconstruct_plane(q_c, clevels, sched, pred_c, ch, cw))
        _spread_chroma_bits(block_bits, bits_c)

    recon = Frame(
        FramePlane(w, h, recon_y),
        FramePlane(cw, ch, recon_chroma[0]),
        FramePlane(cw, ch, recon_chroma[1]),
    )
    stream = FrameBitstream(writer.getvalue(), block_bits, int(writer.bit_length))
    return stream, recon


def _decode_plane(
    reader: BitReader,
    n_blocks: int,
    read_prefix: bool,
) -> tuple[np.ndarray | None, np.ndarray]:
    prefixes = np.empty(n_blocks, dtype=np.int64) if read_prefix else None
    qblocks = np.empty((n_blocks, BLOCK, BLOCK), dtype=np.int64)
    for i in range(n_blocks):
        if read_prefix:
            prefixes[i] = reader.read_bits(8)
        qblocks[i] = entropy_decode_block(reader)
    return prefixes, qblocks


def decode_frame(
    bits: FrameBitstream | bytes,
    prev_recon: Frame,
    sched: QuantSchedule,
) -> Frame:
    """Decode one frame; output is bit-identical to the encoder reconstruction."""
    payload = bits.payload if isinstance(bits, FrameBitstream) else bytes(bits)
    if len(payload) == 0:
        raise ContractViolation("frame payload records zero blocks")
    w, h = prev_recon.y.width, prev_recon.y.height
    nby, nbx = _grid_dims(w, h)
    reader = BitReader(payload)

    prefixes, q_y = _decode_plane(reader, nby * nbx, read_prefix=True)
    disp_idx = prefixes >> 4
    levels_flat = prefixes & 0x0F
    if disp_idx.max() >= len(CATALOGUE):
        raise BitstreamError(
            f"displacement index {int(disp_idx.max())} outside the catalogue",
            byte_offset=reader.bit_position // 8,
        )
    fld = DisplacementField(BLOCK, disp_idx.reshape(nby, nbx).astype(np.int8))
    levels_grid = levels_flat.reshape(nby, nbx)
    pred_y = predicted_plane(prev_recon.y.samples, fld)
    recon_y = _reconstruct_plane(q_y, levels_grid, sched, pred_y, h, w)

    cw, ch = chroma_dims(w, h)
    cnby, cnbx = _grid_dims(cw, ch)
    cfield, clevels = _chroma_grids(fld, levels_grid, cw, ch)
    recon_chroma = []
    for prev_plane in (prev_recon.cb, prev_recon.cr):
        _, q_c = _decode_plane(reader, cnby * cnbx, read_prefix=False)
        pred_c = predicted_plane(prev_plane.samples, cfield, halve_offsets=True)
        recon_chroma.append(_reconstruct_plane(q_c, clevels, sched, pred_c, ch, cw))

    return Frame(
        FramePlane(w, h, recon_y),
        FramePlane(cw, ch, recon_chroma[0]),
        FramePlane(cw, ch, recon_chroma[1]),
    )


# --- sequence container -------------------------------------------------


@dataclass(frozen=True)
class FrameRecord:
    gaze_x: int
    gaze_y: int
    fmsc_code: int
    bitstream: FrameBitstream


@dataclass(frozen=True, eq=False)
class SequenceBitstream:
    """Coded sequence: header, per-frame gaze records, per-frame payloads.

    The third geometry double is a parameter slot; it carries the quantizer
    base step so streams decode without out-of-band configuration.
    """

    width: int
    height: int
    fps_num: int
    fps_den: int
    screen_width_m: float
    viewing_distance_m: float
    q_base: int
    frames: tuple[FrameRecord, ...]

    def __post_init__(self):
        if len(self.frames) < 1:
            raise ContractViolation("a sequence bitstream must contain at least one frame")

    @property
    def frame_count(self) -> int:
        return len(self.frames)

    def payload_bits(self) -> int:
        return 8 * sum(len(f.bitstream.payload) for f in self.frames)

    def bpp(self) -> float:
        return self.payload_bits() / (self.width * self.height * self.frame_count)

    def to_bytes(self) -> bytes:
        parts = [
            _HEADER.pack(
                MAGIC,
                VERSION,
                self.width,
                self.height,
                self.fps_num,
                self.fps_den,
                self.frame_count,
                self.screen_width_m,
                self.viewing_distance_m,
                float(self.q_base),
            )
        ]
        for rec in self.frames:
            parts.append(
                _FRAME_HEAD.pack(rec.gaze_x, rec.gaze_y, rec.fmsc_code, len(rec.bitstream.payload))
            )
            parts.append(rec.bitstream.payload)
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "SequenceBitstream":
        if len(data) < _HEADER.size:
            raise BitstreamError("stream shorter than the sequence header", byte_offset=len(data))
        magic, version, w, h, fps_num, fps_den, count, screen_w, distance, reserved = _HEADER.unpack_from(
            data, 0
        )
        if magic != MAGIC:
            raise BitstreamError(f"bad magic {magic!r}, expected {MAGIC!r}", byte_offset=0)
        if version != VERSION:
            raise UnsupportedVersion(f"version {version} not supported", byte_offset=4)
        if w < 1 or h < 1 or fps_num < 1 or fps_den < 1 or count < 1:
            raise BitstreamError("header declares empty geometry or frame count", byte_offset=6)
        q_base = int(reserved)
        if q_base < 1 or q_base != reserved:
            raise BitstreamError(f"invalid quantizer base {reserved}", byte_offset=_HEADER.size - 8)

        offset = _HEADER.size
        frames = []
        for i in range(count):
            if offset + _FRAME_HEAD.size > len(data):
                raise BitstreamError(f"frame {i} header truncated", byte_offset=offset)
            gx, gy, fmsc_code, payload_len = _FRAME_HEAD.unpack_from(data, offset)
            offset += _FRAME_HEAD.size
            if offset + payload_len > len(data):
                raise BitstreamError(f"frame {i} payload truncated", byte_offset=offset)
            frames.append(
                FrameRecord(gx, gy, fmsc_code, FrameBitstream(data[offset : offset + payload_len]))
            )
            offset += payload_len
        if offset != len(data):
            raise BitstreamError(
                f"{len(data) - offset} trailing bytes after the last frame", byte_offset=offset
            )
        return cls(w, h, fps_num, fps_den, screen_w, distance, q_base, tuple(frames))

    def __eq__(self, other):
        return isinstance(other, SequenceBitstream) and self.to_bytes() == other.to_bytes()


def midgray_frame(width: int, height: int) -> Frame:
    """Synthetic reference used before the first coded frame."""
    return Frame.gray(width, height, 128)


def encode_sequence(
    seq: VideoSequence,
    maps: list[FoveationMap],
    sched: QuantSchedule,
    cfg: CodecConfig = CodecConfig(),
    fmsc_codes: list[int] | None = None,
    screen_width_m: float = 0.02,
    viewing_distance_m: float = 0.012,
) -> tuple[SequenceBitstream, VideoSequence]:
    """Code a whole sequence; returns the bitstream and the recon chain."""
    if len(maps) != len(seq):
        raise ContractViolation(f"{len(maps)} maps supplied for {len(seq)} frames")
    if fmsc_codes is None:
        fmsc_codes = [0] * len(seq)
    if len(fmsc_codes) != len(seq):
        raise ContractViolation("fmsc codes must match the frame count")

    w, h = seq.width, seq.height
    prev = midgray_frame(w, h)
    records = []
    recons = []
    for frame, fmap, code in zip(seq.frames, maps, fmsc_codes):
        if (fmap.width, fmap.height) != (w, h):
            raise ContractViolation("foveation map dimensions must match the sequence")
        level_map = quantize_map(fmap, sched.n_levels)
        stream, recon = encode_frame(frame, prev, level_map, sched, cfg)
        gx = min(max(int(round(fmap.gaze[0])), 0), w - 1)
        gy = min(max(int(round(fmap.gaze[1])), 0), h - 1)
        records.append(FrameRecord(gx, gy, int(code), stream))
        recons.append(recon)
        prev = recon

    sbs = SequenceBitstream(
        w, h, seq.fps_num, seq.fps_den, screen_width_m, viewing_distance_m, sched.q_base, tuple(records)
    )
    return sbs, VideoSequence(tuple(recons), seq.fps_num, seq.fps_den)


def decode_sequence(source: SequenceBitstream | bytes) -> VideoSequence:
    """Decode a sequence bitstream back into frames."""
    sbs = source if isinstance(source, SequenceBitstream) else SequenceBitstream.from_bytes(source)
    sched = QuantSchedule(q_base=sbs.q_base)
    prev = midgray_frame(sbs.width, sbs.height)
    frames = []
    for rec in sbs.frames:
        prev = decode_frame(rec.bitstream, prev, sched)
        frames.append(prev)
    return VideoSequence(tuple(frames), sbs.fps_num, sbs.fps_den)
