"""Minimal FLAC encoder for test fixtures.

Writes valid FLAC streams with a chosen subframe strategy so the decoder's
constant / verbatim / fixed / LPC paths and the stereo decorrelation modes
can each be exercised.  CRCs are computed here bit-by-bit, independently of
the decoder's table-driven implementation.
"""

from __future__ import annotations


def crc8(data: bytes) -> int:
    crc = 0
    for byte in data:
        crc ^= byte
        for _ in range(8):
            crc = ((crc << 1) ^ 0x07) & 0xFF if crc & 0x80 else (crc << 1) & 0xFF
    return crc


def crc16(data: bytes) -> int:
    crc = 0
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x8005) & 0xFFFF if crc & 0x8000 else (crc << 1) & 0xFFFF
    return crc


class BitWriter:
    def __init__(self):
        self.buffer = bytearray()
        self.acc = 0
        self.nbits = 0

    def write(self, value: int, n: int):
        self.acc = (self.acc << n) | (value & ((1 << n) - 1))
        self.nbits += n
        while self.nbits >= 8:
            self.nbits -= 8
            self.buffer.append((self.acc >> self.nbits) & 0xFF)
        self.acc &= (1 << self.nbits) - 1

    def write_unary(self, q: int):
        while q >= 32:
            self.write(0, 32)
            q -= 32
        self.write(1, q + 1)

    def align(self):
        if self.nbits:
            self.write(0, 8 - self.nbits)

    def getvalue(self) -> bytes:
        assert self.nbits == 0
        return bytes(self.buffer)


_SIZE_CODE = {8: 1, 16: 4, 24: 6}


def _write_subframe(w: BitWriter, samples: list[int], bps: int, mode: str):
    w.write(0, 1)  # padding
    if mode == "constant":
        assert len(set(samples)) == 1
        w.write(0, 6)
        w.write(0, 1)  # no wasted bits
        w.write(samples[0], bps)
        return
    if mode == "verbatim":
        w.write(1, 6)
        w.write(0, 1)
        for s in samples:
            w.write(s, bps)
        return
    if mode.startswith("wasted"):
        # verbatim with k wasted bits: samples must be multiples of 2^k
        k = int(mode[-1])
        assert all(s % (1 << k) == 0 for s in samples)
        w.write(1, 6)
        w.write(1, 1)          # wasted-bits flag
        w.write(1, k)          # unary: k-1 zeros then a one
        for s in samples:
            w.write(s >> k, bps - k)
        return
    if mode.startswith("fixed"):
        order = int(mode[-1])
        w.write(0b001000 | order, 6)
        w.write(0, 1)
        for s in samples[:order]:
            w.write(s, bps)
        residual = _fixed_residual(samples, order)
        _write_residual(w, residual, order, len(samples))
        return
    if mode == "lpc1":
        # order-1 LPC with coefficient 1, shift 0: residual = diff, like fixed-1
        order = 1
        w.write(0b100000, 6)
        w.write(0, 1)
        w.write(samples[0], bps)
        w.write(14, 4)   # precision 15 bits
        w.write(0, 5)    # shift 0
        w.write(1, 15)   # coefficient +1
        residual = _fixed_residual(samples, 1)
        _write_residual(w, residual, 1, len(samples))
        return
    raise ValueError(mode)


def _fixed_residual(samples: list[int], order: int) -> list[int]:
    out = list(samples)
    for _ in range(order):
        out = [out[i] - out[i - 1] for i in range(1, len(out))]
    return out


def _write_residual(w: BitWriter, residual: list[int], order: int,
                    block_size: int, partition_order: int = 0):
    w.write(0, 2)  # 4-bit Rice parameters
    w.write(partition_order, 4)
    partitions = 1 << partition_order
    assert block_size % partitions == 0
    pos = 0
    for p in range(partitions):
        count = block_size // partitions - (order if p == 0 else 0)
        chunk = residual[pos:pos + count]
        pos += count
        param = _rice_parameter(chunk)
        w.write(param, 4)
        for v in chunk:
            u = (v << 1) if v >= 0 else (-v << 1) - 1
            w.write_unary(u >> param)
            if param:
                w.write(u, param)


def _rice_parameter(chunk: list[int]) -> int:
    if not chunk:
        return 0
    mean_abs = sum(abs(v) for v in chunk) / len(chunk)
    param = 0
    while (1 << param) < mean_abs + 1 and param < 14:
        param += 1
    return param


def write_flac(path, channels: list[list[int]], sample_rate: int, bps: int = 16,
               block_size: int = 1024, mode: str = "verbatim",
               stereo_mode: str = "independent", partition_order: int = 0):
    """Encode integer channel data as a FLAC file."""
    n = len(channels[0])
    assert all(len(c) == n for c in channels)
    out = bytearray(b"fLaC")

    info = BitWriter()
    info.write(block_size, 16)
    info.write(block_size, 16)
    info.write(0, 24)
    info.write(0, 24)
    info.write(sample_rate, 20)
    info.write(len(channels) - 1, 3)
    info.write(bps - 1, 5)
    info.write(n, 36)
    info.write(0, 128)  # md5 unset
    payload = info.getvalue()
    out += bytes([0x80, 0, 0, len(payload)]) + payload  # last-block STREAMINFO

    frame_index = 0
    for start in range(0, n, block_size):
        chunk = [c[start:start + block_size] for c in channels]
        out += _encode_frame(chunk, bps, frame_index, mode, stereo_mode,
                             partition_order)
        frame_index += 1
    with open(path, "wb") as fh:
        fh.write(bytes(out))


def _encode_frame(chunk: list[list[int]], bps: int, frame_index: int,
                  mode: str, stereo_mode: str, partition_order: int) -> bytes:
    n = len(chunk[0])
    assert frame_index < 128, "fixture streams stay below 128 frames"
    header = BitWriter()
    header.write(0b11111111111110, 14)
    header.write(0, 1)
    header.write(0, 1)  # fixed block size stream
    header.write(7, 4)  # 16-bit block size follows
    header.write(0, 4)  # rate from STREAMINFO
    if len(chunk) == 1:
        assignment = 0
    elif stereo_mode == "independent":
        assignment = 1
    elif stereo_mode == "left_side":
        assignment = 8
    elif stereo_mode == "right_side":
        assignment = 9
    elif stereo_mode == "mid_side":
        assignment = 10
    else:
        raise ValueError(stereo_mode)
    header.write(assignment, 4)
    header.write(_SIZE_CODE[bps], 3)
    header.write(0, 1)
    header.write(frame_index, 8)  # UTF-8 single byte
    header.write(n - 1, 16)
    header_bytes = header.getvalue()
    header_bytes += bytes([crc8(header_bytes)])

    body = BitWriter()
    if len(chunk) == 1 or stereo_mode == "independent":
        planes = [(c, bps) for c in chunk]
    else:
        left, right = chunk
        side = [l - r for l, r in zip(left, right)]
        if stereo_mode == "left_side":
            planes = [(left, bps), (side, bps + 1)]
        elif stereo_mode == "right_side":
            planes = [(side, bps + 1), (right, bps)]
        else:
            mid = [(l + r) >> 1 for l, r in zip(left, right)]
            planes = [(mid, bps), (side, bps + 1)]
    for samples, plane_bps in planes:
        if mode.startswith("fixed") or mode == "lpc1":
            _write_subframe_with_residual(body, samples, plane_bps, mode,
                                          partition_order)
        else:
            _write_subframe(body, samples, plane_bps, mode)
    body.align()

    frame = header_bytes + body.getvalue()
    return frame + crc16(frame).to_bytes(2, "big")


def _write_subframe_with_residual(w: BitWriter, samples: list[int], bps: int,
                                  mode: str, partition_order: int):
    if partition_order == 0:
        _write_subframe(w, samples, bps, mode)
        return
    order = 1 if mode == "lpc1" else int(mode[-1])
    w.write(0, 1)
    if mode == "lpc1":
        w.write(0b100000, 6)
        w.write(0, 1)
        w.write(samples[0], bps)
        w.write(14, 4)
        w.write(0, 5)
        w.write(1, 15)
    else:
        w.write(0b001000 | order, 6)
        w.write(0, 1)
        for s in samples[:order]:
            w.write(s, bps)
    residual = _fixed_residual(samples, order)
    _write_residual(w, residual, order, len(samples), partition_order)
