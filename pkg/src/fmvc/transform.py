"""Integer 8x8 block transform with an exact inverse.

A lifting realization of the 8-point DCT-II flowgraph: unnormalized
butterflies split even/odd halves (invertible because sums and differences
share parity), and every rotation is three fixed-point lifting shears, so
inverse(forward(x)) == x for any integer block regardless of constant
precision.  Arithmetic is integer-only, which keeps coded output
byte-identical across platforms.

Outputs approximate the true DCT-II scaled per 1-D index by
(sqrt(8), sqrt(2), 2, sqrt(2), sqrt(8), sqrt(2), 2, sqrt(2)); the 2-D gain
is the outer product (8 at DC).  Constants use 12-bit fixed point.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractViolation

BLOCK = 8

_FP = 12
_HALF = 1 << (_FP - 1)

# Even-half rotation by -pi/8 applied to (a3, a2), yielding (X2, -X6):
# P = round(-tan(theta/2) * 2^12), U = round(sin(theta) * 2^12).
_EVEN_P, _EVEN_U = 815, -1567

# Odd half: Givens cascade equal to the 4-point odd DCT basis over the
# differences o_i = x_i - x_{7-i}, normalized by 1/sqrt(2) (so the odd
# outputs carry gain sqrt(2) versus the orthonormal DCT).  Derived once by
# QR-factoring that orthogonal 4x4 into plane rotations; near-pi rotations
# are reduced by pair negations to keep the lifting constants small.
# Entries: ("rot", i, j, P, U) or ("neg", i, j), applied in order.
_ODD_OPS = (
    ("rot", 2, 3, 698, -1357),
    ("rot", 1, 2, 1303, -2367),
    ("neg", 1, 2),
    ("rot", 2, 3, -507, 998),
    ("neg", 2, 3),
    ("rot", 0, 1, -1742, 2951),
    ("rot", 1, 2, -1303, 2367),
    ("rot", 2, 3, -698, 1357),
)

# Conventional zigzag scan of an 8x8 block (row-major flat indices).
ZIGZAG = np.array(
    [
        0, 1, 8, 16, 9, 2, 3, 10,
        17, 24, 32, 25, 18, 11, 4, 5,
        12, 19, 26, 33, 40, 48, 41, 34,
        27, 20, 13, 6, 7, 14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36,
        29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46,
        53, 60, 61, 54, 47, 55, 62, 63,
    ],
    dtype=np.intp,
)
INVERSE_ZIGZAG = np.argsort(ZIGZAG)


def _rot_fwd(a, b, p, u):
    y1 = a + ((p * b + _HALF) >> _FP)
    y2 = b + ((u * y1 + _HALF) >> _FP)
    y3 = y1 + ((p * y2 + _HALF) >> _FP)
    return y3, y2


def _rot_inv(y3, y2, p, u):
    y1 = y3 - ((p * y2 + _HALF) >> _FP)
    b = y2 - ((u * y1 + _HALF) >> _FP)
    a = y1 - ((p * b + _HALF) >> _FP)
    return a, b


def _fwd8(x: np.ndarray) -> np.ndarray:
    """Forward transform along the last axis (length 8, int64)."""
    lo, hi = x[..., :4], x[..., 4:][..., ::-1]
    s = lo + hi
    o = [lo[..., i] - hi[..., i] for i in range(4)]

    a0 = s[..., 0] + s[..., 3]
    a1 = s[..., 1] + s[..., 2]
    a3 = s[..., 0] - s[..., 3]
    a2 = s[..., 1] - s[..., 2]
    x0 = a0 + a1
    x4 = a0 - a1
    x2, neg_x6 = _rot_fwd(a3, a2, _EVEN_P, _EVEN_U)

    for op in _ODD_OPS:
        if op[0] == "rot":
            _, i, j, p, u = op
            o[i], o[j] = _rot_fwd(o[i], o[j], p, u)
        else:
            _, i, j = op
            o[i], o[j] = -o[i], -o[j]

    return np.stack([x0, o[0], x2, o[1], x4, o[2], -neg_x6, o[3]], axis=-1)


def _inv8(c: np.ndarray) -> np.ndarray:
    """Exact inverse of _fwd8 along the last axis."""
    o = [c[..., 1], c[..., 3], c[..., 5], c[..., 7]]
    for op in reversed(_ODD_OPS):
        if op[0] == "rot":
            _, i, j, p, u = op
            o[i], o[j] = _rot_inv(o[i], o[j], p, u)
        else:
            _, i, j = op
            o[i], o[j] = -o[i], -o[j]

    a3, a2 = _rot_inv(c[..., 2], -c[..., 6], _EVEN_P, _EVEN_U)
    a0 = (c[..., 0] + c[..., 4]) >> 1  # forward butterflies share parity,
    a1 = (c[..., 0] - c[..., 4]) >> 1  # so these halvings are exact
    s = [(a0 + a3) >> 1, (a1 + a2) >> 1, (a1 - a2) >> 1, (a0 - a3) >> 1]

    out = np.empty(c.shape, dtype=np.int64)
    for i in range(4):
        out[..., i] = (s[i] + o[i]) >> 1
        out[..., 7 - i] = (s[i] - o[i]) >> 1
    return out


def forward_blocks(blocks: np.ndarray) -> np.ndarray:
    """Transform a batch shaped (..., 8, 8): rows first, then columns."""
    b = np.asarray(blocks, dtype=np.int64)
    if b.shape[-2:] != (BLOCK, BLOCK):
        raise ContractViolation(f"expected trailing 8x8 block axes, got {b.shape}")
    rows = _fwd8(b)
    return _fwd8(rows.swapaxes(-1, -2)).swapaxes(-1, -2)


def inverse_blocks(coeffs: np.ndarray) -> np.ndarray:
    """Exact inverse of forward_blocks (column pass undone first)."""
    c = np.asarray(coeffs, dtype=np.int64)
    if c.shape[-2:] != (BLOCK, BLOCK):
        raise ContractViolation(f"expected trailing 8x8 block axes, got {c.shape}")
    rows = _inv8(c.swapaxes(-1, -2)).swapaxes(-1, -2)
    return _inv8(rows)


def forward_transform(block: np.ndarray) -> np.ndarray:
    """Transform one 8x8 residual block (values in [-255, 255])."""
    b = np.asarray(block, dtype=np.int64)
    if b.shape != (BLOCK, BLOCK):
        raise ContractViolation(f"expected an 8x8 block, got shape {b.shape}")
    if b.min() < -255 or b.max() > 255:
        raise ContractViolation("residual block values must lie in [-255, 255]")
    return forward_blocks(b)


def inverse_transform(coeffs: np.ndarray) -> np.ndarray:
    """Invert one 8x8 coefficient block."""
    c = np.asarray(coeffs, dtype=np.int64)
    if c.shape != (BLOCK, BLOCK):
        raise ContractViolation(f"expected an 8x8 block, got shape {c.shape}")
    return inverse_blocks(c)


def zigzag_scan(block: np.ndarray) -> np.ndarray:
    """Flatten an 8x8 block in zigzag order."""
    return np.asarray(block).reshape(64)[ZIGZAG]


def zigzag_unscan(values: np.ndarray) -> np.ndarray:
    """Rebuild an 8x8 block from its zigzag-ordered values."""
    return np.asarray(values).reshape(64)[INVERSE_ZIGZAG].reshape(BLOCK, BLOCK)
