"""MSB-first bit stream writer/reader with order-0 exponential-Golomb codes."""

from __future__ import annotations

from .errors import BitstreamError

# Precomputed codewords for small symbols; the hot path is table lookups.
_UE_CACHE_SIZE = 1024


def ue_bits(symbol: int) -> str:
    """Exp-Golomb(k=0) codeword for an unsigned symbol, as a '01' string."""
    v = symbol + 1
    n = v.bit_length()
    return format(v, f"0{2 * n - 1}b")


_UE_CACHE = [ue_bits(i) for i in range(_UE_CACHE_SIZE)]


def signed_to_symbol(value: int) -> int:
    """Signed-to-unsigned mapping 0, +1, -1, +2, -2, ... -> 0, 1, 2, 3, 4, ..."""
    if value > 0:
        return 2 * value - 1
    return -2 * value


def symbol_to_signed(symbol: int) -> int:
    if symbol & 1:
        return (symbol + 1) >> 1
    return -(symbol >> 1)


class BitWriter:
    """Accumulates bits MSB-first; bytes are zero-padded at the end."""

    def __init__(self):
        self._parts: list[str] = []
        self._nbits = 0

    @property
    def bit_length(self) -> int:
        return self._nbits

    def write_bits(self, value: int, nbits: int) -> None:
        self._parts.append(format(value, f"0{nbits}b"))
        self._nbits += nbits

    def write_ue(self, symbol: int) -> None:
        code = _UE_CACHE[symbol] if symbol < _UE_CACHE_SIZE else ue_bits(symbol)
        self._parts.append(code)
        self._nbits += len(code)

    def getvalue(self) -> bytes:
        bits = "".join(self._parts)
        pad = -len(bits) % 8
        bits += "0" * pad
        if not bits:
            return b""
        return int(bits, 2).to_bytes(len(bits) // 8, "big")


class BitReader:
    """Reads an MSB-first bit stream; errors carry the current byte offset."""

    def __init__(self, data: bytes):
        self._nbits = len(data) * 8
        if data:
            self._bits = bin(int.from_bytes(data, "big"))[2:].zfill(self._nbits)
        else:
            self._bits = ""
        self._pos = 0

    @property
    def bit_position(self) -> int:
        return self._pos

    @property
    def bits_left(self) -> int:
        return self._nbits - self._pos

    def read_bits(self, nbits: int) -> int:
        end = self._pos + nbits
        if end > self._nbits:
            raise BitstreamError("bit stream exhausted", byte_offset=self._pos // 8)
        value = int(self._bits[self._pos : end], 2) if nbits else 0
        self._pos = end
        return value

    def read_ue(self) -> int:
        one = self._bits.find("1", self._pos)
        if one < 0:
            raise BitstreamError("unterminated exp-golomb codeword", byte_offset=self._pos // 8)
        zeros = one - self._pos
        end = one + zeros + 1
        if end > self._nbits:
            raise BitstreamError("truncated exp-golomb codeword", byte_offset=self._pos // 8)
        value = int(self._bits[one:end], 2)
        self._pos = end
        return value - 1
