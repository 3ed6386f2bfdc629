"""Pure-Python FLAC decoder.

Decodes the FLAC subset that music rips actually use: 8/16/24-bit streams,
mono or stereo, all four subframe types (constant, verbatim, fixed, LPC),
Rice/Rice2 residual coding with partitioning and escape codes, wasted bits,
and the four channel assignments (independent, left/side, right/side,
mid/side).  Frame header CRC-8 and frame CRC-16 are verified; any mismatch
or premature end of stream raises :class:`CorruptFile`.

No external decoder dependency: files are small relative to analysis cost
and determinism matters more than throughput here.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import CorruptFile, UnsupportedFormat

_BLOCK_SIZES = {1: 192, 2: 576, 3: 1152, 4: 2304, 5: 4608,
                8: 256, 9: 512, 10: 1024, 11: 2048, 12: 4096,
                13: 8192, 14: 16384, 15: 32768}

_SAMPLE_SIZES = {1: 8, 2: 12, 4: 16, 5: 20, 6: 24, 7: 32}


def _make_crc_table(poly: int, width: int) -> list[int]:
    mask = (1 << width) - 1
    top = 1 << (width - 1)
    table = []
    for byte in range(256):
        crc = byte << (width - 8)
        for _ in range(8):
            crc = ((crc << 1) ^ poly) & mask if crc & top else (crc << 1) & mask
        table.append(crc)
    return table


_CRC8_TABLE = _make_crc_table(0x07, 8)
_CRC16_TABLE = _make_crc_table(0x8005, 16)


def _crc8(data: bytes) -> int:
    crc = 0
    for b in data:
        crc = _CRC8_TABLE[crc ^ b]
    return crc


def _crc16(data: bytes) -> int:
    crc = 0
    for b in data:
        crc = _CRC16_TABLE[(crc >> 8) ^ b] ^ ((crc << 8) & 0xFFFF)
    return crc


class _Bits:
    """MSB-first bit reader over a bytes object."""

    __slots__ = ("data", "pos")

    def __init__(self, data: bytes, byte_pos: int = 0):
        self.data = data
        self.pos = byte_pos * 8

    def read(self, n: int) -> int:
        end = self.pos + n
        if end > len(self.data) * 8:
            raise CorruptFile("unexpected end of FLAC stream")
        first = self.pos >> 3
        last = (end + 7) >> 3
        chunk = int.from_bytes(self.data[first:last], "big")
        chunk >>= (last << 3) - end
        self.pos = end
        return chunk & ((1 << n) - 1)

    def read_signed(self, n: int) -> int:
        v = self.read(n)
        return v - (1 << n) if v & (1 << (n - 1)) else v

    def read_unary(self) -> int:
        count = 0
        data = self.data
        while True:
            byte_index = self.pos >> 3
            if byte_index >= len(data):
                raise CorruptFile("unexpected end of FLAC stream")
            rest = data[byte_index] & (0xFF >> (self.pos & 7))
            if rest == 0:
                step = 8 - (self.pos & 7)
                count += step
                self.pos += step
            else:
                zeros = (8 - (self.pos & 7)) - rest.bit_length()
                self.pos += zeros + 1
                return count + zeros

    def align(self) -> None:
        self.pos = (self.pos + 7) & ~7

    def byte_pos(self) -> int:
        return self.pos >> 3


def decode_flac(path: str | Path) -> tuple[list[np.ndarray], int]:
    """Decode a FLAC file to per-channel float arrays in [-1, 1] plus rate."""
    data = Path(path).read_bytes()
    if data[0:4] != b"fLaC":
        raise CorruptFile(f"{Path(path).name}: missing fLaC marker")

    bits = _Bits(data, 4)
    sample_rate = channels = bps = total_samples = None
    last_block = False
    while not last_block:
        last_block = bool(bits.read(1))
        block_type = bits.read(7)
        length = bits.read(24)
        if block_type == 0:
            if length != 34:
                raise CorruptFile("bad STREAMINFO length")
            bits.read(16)  # min block size
            bits.read(16)  # max block size
            bits.read(24)  # min frame size
            bits.read(24)  # max frame size
            sample_rate = bits.read(20)
            channels = bits.read(3) + 1
            bps = bits.read(5) + 1
            total_samples = bits.read(36)
            bits.read(128)  # md5
        else:
            bits.pos += length * 8
            if bits.pos > len(data) * 8:
                raise CorruptFile("metadata block overruns file")
    if sample_rate is None:
        raise CorruptFile("missing STREAMINFO block")
    if sample_rate == 0:
        raise CorruptFile("zero sample rate")
    if bps not in (8, 16, 24):
        raise UnsupportedFormat(f"{bps}-bit FLAC unsupported (need 8/16/24)")

    out = [[] for _ in range(channels)]
    decoded = 0
    while bits.byte_pos() < len(data):
        if total_samples and decoded >= total_samples:
            break
        block = _decode_frame(bits, data, channels, bps)
        for c in range(channels):
            out[c].extend(block[c])
        decoded += len(block[0])
    if total_samples and decoded < total_samples:
        raise CorruptFile(f"stream ends after {decoded} of {total_samples} samples")
    if total_samples:
        out = [ch[:total_samples] for ch in out]

    scale = float(1 << (bps - 1))
    return [np.asarray(ch, dtype=float) / scale for ch in out], sample_rate


def _read_coded_number(bits: _Bits) -> int:
    first = bits.read(8)
    ones = 0
    while ones < 8 and first & (0x80 >> ones):
        ones += 1
    if ones == 1 or ones == 8:
        raise CorruptFile("invalid frame number coding")
    if ones == 0:
        return first
    value = first & (0x7F >> ones)
    for _ in range(ones - 1):
        cont = bits.read(8)
        if cont & 0xC0 != 0x80:
            raise CorruptFile("invalid frame number continuation byte")
        value = (value << 6) | (cont & 0x3F)
    return value


def _decode_frame(bits: _Bits, data: bytes, n_channels: int, bps: int) -> list[list[int]]:
    frame_start = bits.byte_pos()
    if bits.read(14) != 0b11111111111110:
        raise CorruptFile("lost frame sync")
    bits.read(1)  # reserved
    bits.read(1)  # blocking strategy
    block_code = bits.read(4)
    rate_code = bits.read(4)
    chan_assign = bits.read(4)
    size_code = bits.read(3)
    bits.read(1)  # reserved

    _read_coded_number(bits)

    if block_code == 0:
        raise CorruptFile("reserved block size code")
    elif block_code == 6:
        block_size = bits.read(8) + 1
    elif block_code == 7:
        block_size = bits.read(16) + 1
    else:
        block_size = _BLOCK_SIZES[block_code]

    if rate_code == 12:
        bits.read(8)
    elif rate_code in (13, 14):
        bits.read(16)
    elif rate_code == 15:
        raise CorruptFile("invalid sample rate code")

    if size_code == 0:
        frame_bps = bps
    elif size_code in _SAMPLE_SIZES:
        frame_bps = _SAMPLE_SIZES[size_code]
    else:
        raise CorruptFile("reserved sample size code")

    header_end = bits.byte_pos()
    if _crc8(data[frame_start:header_end]) != bits.read(8):
        raise CorruptFile("frame header CRC-8 mismatch")

    if chan_assign <= 7:
        if chan_assign + 1 != n_channels:
            raise CorruptFile("frame channel count disagrees with STREAMINFO")
        samples = [_decode_subframe(bits, block_size, frame_bps)
                   for _ in range(n_channels)]
    elif chan_assign in (8, 9, 10):
        if n_channels != 2:
            raise CorruptFile("stereo decorrelation in non-stereo stream")
        extra = (0, 1) if chan_assign == 8 else (1, 0) if chan_assign == 9 else (0, 1)
        first = _decode_subframe(bits, block_size, frame_bps + extra[0])
        second = _decode_subframe(bits, block_size, frame_bps + extra[1])
        if chan_assign == 8:    # left/side
            left = first
            right = [l - s for l, s in zip(left, second)]
        elif chan_assign == 9:  # right/side
            right = second
            left = [r + s for r, s in zip(right, first)]
        else:                   # mid/side
            left, right = [], []
            for m, s in zip(first, second):
                m = (m << 1) | (s & 1)
                left.append((m + s) >> 1)
                right.append((m - s) >> 1)
        samples = [left, right]
    else:
        raise CorruptFile("reserved channel assignment")

    bits.align()
    crc_end = bits.byte_pos()
    if _crc16(data[frame_start:crc_end]) != bits.read(16):
        raise CorruptFile("frame CRC-16 mismatch")
    return samples


def _decode_subframe(bits: _Bits, block_size: int, bps: int) -> list[int]:
    if bits.read(1) != 0:
        raise CorruptFile("subframe padding bit set")
    sub_type = bits.read(6)
    wasted = 0
    if bits.read(1):
        wasted = bits.read_unary() + 1
        bps -= wasted
        if bps <= 0:
            raise CorruptFile("wasted bits exceed sample size")

    if sub_type == 0:
        value = bits.read_signed(bps)
        samples = [value] * block_size
    elif sub_type == 1:
        samples = [bits.read_signed(bps) for _ in range(block_size)]
    elif 8 <= sub_type <= 12:
        order = sub_type - 8
        samples = [bits.read_signed(bps) for _ in range(order)]
        residual = _decode_residual(bits, block_size, order)
        _restore_fixed(samples, residual, order)
    elif sub_type >= 32:
        order = sub_type - 31
        samples = [bits.read_signed(bps) for _ in range(order)]
        precision_code = bits.read(4)
        if precision_code == 15:
            raise CorruptFile("invalid LPC precision code")
        precision = precision_code + 1
        shift = bits.read_signed(5)
        if shift < 0:
            raise CorruptFile("negative LPC shift")
        coefs = [bits.read_signed(precision) for _ in range(order)]
        residual = _decode_residual(bits, block_size, order)
        for res in residual:
            acc = 0
            for j, c in enumerate(coefs):
                acc += c * samples[-1 - j]
            samples.append(res + (acc >> shift))
    else:
        raise CorruptFile(f"reserved subframe type {sub_type}")

    if wasted:
        samples = [s << wasted for s in samples]
    return samples


def _restore_fixed(samples: list[int], residual: list[int], order: int) -> None:
    if order == 0:
        samples.extend(residual)
    elif order == 1:
        for r in residual:
            samples.append(r + samples[-1])
    elif order == 2:
        for r in residual:
            samples.append(r + 2 * samples[-1] - samples[-2])
    elif order == 3:
        for r in residual:
            samples.append(r + 3 * samples[-1] - 3 * samples[-2] + samples[-3])
    else:
        for r in residual:
            samples.append(r + 4 * samples[-1] - 6 * samples[-2]
                           + 4 * samples[-3] - samples[-4])


def _decode_residual(bits: _Bits, block_size: int, predictor_order: int) -> list[int]:
    method = bits.read(2)
    if method > 1:
        raise CorruptFile("reserved residual coding method")
    param_bits = 4 if method == 0 else 5
    escape = (1 << param_bits) - 1
    partition_order = bits.read(4)
    partitions = 1 << partition_order
    if block_size % partitions != 0:
        raise CorruptFile("block size not divisible into partitions")
    residual: list[int] = []
    for p in range(partitions):
        count = (block_size >> partition_order) - (predictor_order if p == 0 else 0)
        if count < 0:
            raise CorruptFile("partition smaller than predictor order")
        param = bits.read(param_bits)
        if param == escape:
            raw = bits.read(5)
            if raw == 0:
                residual.extend([0] * count)
            else:
                residual.extend(bits.read_signed(raw) for _ in range(count))
        else:
            for _ in range(count):
                quotient = bits.read_unary()
                value = (quotient << param) | bits.read(param)
                residual.append((value >> 1) ^ -(value & 1))
    return residual
