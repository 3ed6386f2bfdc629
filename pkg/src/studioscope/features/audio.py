"""Lossless audio decoding to float stereo signals.

Supported inputs: RIFF WAVE (16/24-bit PCM and 32-bit float) and FLAC.
Files are sniffed by magic bytes, not extension.  Mono inputs are
duplicated to both channels with a warning; more than two channels is
unsupported.
"""

from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import CorruptFile, MonoAudioWarning, UnsupportedFormat
from .flacdec import decode_flac

MIN_SAMPLE_RATE = 8000


@dataclass
class StereoSignal:
    """Two equally long channels of float samples in [-1, 1]."""

    left: np.ndarray
    right: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        self.left = np.asarray(self.left, dtype=float)
        self.right = np.asarray(self.right, dtype=float)
        if self.left.shape != self.right.shape or self.left.ndim != 1:
            raise ValueError("channels must be equal-length 1-D arrays")
        if self.sample_rate < MIN_SAMPLE_RATE:
            raise ValueError(f"sample_rate below {MIN_SAMPLE_RATE} Hz")

    def __len__(self) -> int:
        return len(self.left)

    @property
    def duration(self) -> float:
        return len(self.left) / self.sample_rate


def decode_audio(path: str | Path) -> StereoSignal:
    """Decode a WAV or FLAC file into a StereoSignal.

    Samples are normalized to [-1, 1] (integer PCM scaled by the sample
    width; float data clipped).  Raises :class:`UnsupportedFormat` for
    unknown containers, channel counts or sample widths, and
    :class:`CorruptFile` for truncated or malformed files.
    """
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            magic = fh.read(4)
    except OSError as exc:
        raise CorruptFile(f"cannot read {path}: {exc}") from exc
    if magic == b"RIFF":
        channels, rate = _decode_wav(path)
    elif magic == b"fLaC":
        channels, rate = decode_flac(path)
    else:
        raise UnsupportedFormat(f"{path.name}: not a RIFF WAVE or FLAC file")

    if rate < MIN_SAMPLE_RATE:
        raise UnsupportedFormat(f"{path.name}: sample rate {rate} Hz below {MIN_SAMPLE_RATE}")
    if len(channels) == 1:
        warnings.warn(f"{path.name}: mono input duplicated to both channels",
                      MonoAudioWarning, stacklevel=2)
        left, right = channels[0], channels[0].copy()
    elif len(channels) == 2:
        left, right = channels
    else:
        raise UnsupportedFormat(f"{path.name}: {len(channels)} channels (expected 1 or 2)")
    if left.size == 0:
        raise CorruptFile(f"{path.name}: no audio samples")
    return StereoSignal(left=left, right=right, sample_rate=rate)


def _decode_wav(path: Path) -> tuple[list[np.ndarray], int]:
    data = path.read_bytes()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptFile(f"{path.name}: bad RIFF header")
    pos = 12
    fmt = None
    fmt_body = b""
    payload = None
    while pos + 8 <= len(data):
        cid = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body_start = pos + 8
        if cid == b"fmt ":
            if body_start + 16 > len(data):
                raise CorruptFile(f"{path.name}: truncated fmt chunk")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
            fmt_body = data[body_start:body_start + size]
        elif cid == b"data":
            payload = data[body_start:body_start + size]
            if len(payload) < size:
                raise CorruptFile(f"{path.name}: data chunk truncated "
                                  f"({len(payload)} of {size} bytes)")
        pos = body_start + size + (size & 1)
    if fmt is None or payload is None:
        raise CorruptFile(f"{path.name}: missing fmt or data chunk")

    audio_format, n_channels, rate, _byte_rate, block_align, bits = fmt
    if audio_format == 0xFFFE and len(fmt_body) >= 26:
        # WAVE_FORMAT_EXTENSIBLE: actual format is the first word of the GUID
        (audio_format,) = struct.unpack_from("<H", fmt_body, 24)
    if n_channels < 1:
        raise CorruptFile(f"{path.name}: zero channels")

    if audio_format == 1 and bits == 16:
        samples = np.frombuffer(payload[:len(payload) - len(payload) % 2],
                                dtype="<i2").astype(float) / 32768.0
    elif audio_format == 1 and bits == 24:
        usable = len(payload) - len(payload) % 3
        raw = np.frombuffer(payload[:usable], dtype=np.uint8).reshape(-1, 3)
        vals = (raw[:, 0].astype(np.int32)
                | (raw[:, 1].astype(np.int32) << 8)
                | (raw[:, 2].astype(np.int32) << 16))
        vals = np.where(vals >= 1 << 23, vals - (1 << 24), vals)
        samples = vals.astype(float) / float(1 << 23)
    elif audio_format == 3 and bits == 32:
        samples = np.clip(np.frombuffer(payload[:len(payload) - len(payload) % 4],
                                        dtype="<f4").astype(float), -1.0, 1.0)
    else:
        raise UnsupportedFormat(
            f"{path.name}: WAVE format {audio_format} at {bits} bit unsupported "
            "(need 16/24-bit PCM or 32-bit float)")

    frames = samples.size // n_channels
    if frames * n_channels != samples.size:
        raise CorruptFile(f"{path.name}: sample count not divisible by channel count")
    deinterleaved = samples[:frames * n_channels].reshape(frames, n_channels)
    return [np.ascontiguousarray(deinterleaved[:, c]) for c in range(n_channels)], rate


def write_wav(path: str | Path, left: np.ndarray, right: np.ndarray | None,
              sample_rate: int, bits: int = 16) -> None:
    """Write a PCM16/PCM24/float32 WAV file (mono when ``right`` is None).

    Utility for synthesizing fixtures and spot-check exports; clips to
    [-1, 1] before quantizing.
    """
    left = np.clip(np.asarray(left, dtype=float), -1.0, 1.0)
    if right is None:
        interleaved = left
        n_channels = 1
    else:
        right = np.clip(np.asarray(right, dtype=float), -1.0, 1.0)
        interleaved = np.empty(left.size + right.size)
        interleaved[0::2] = left
        interleaved[1::2] = right
        n_channels = 2

    if bits == 16:
        audio_format = 1
        payload = (np.round(interleaved * 32767.0).astype("<i2")).tobytes()
    elif bits == 24:
        audio_format = 1
        vals = np.round(interleaved * float((1 << 23) - 1)).astype(np.int64)
        vals = np.where(vals < 0, vals + (1 << 24), vals).astype(np.uint32)
        raw = np.empty((vals.size, 3), dtype=np.uint8)
        raw[:, 0] = vals & 0xFF
        raw[:, 1] = (vals >> 8) & 0xFF
        raw[:, 2] = (vals >> 16) & 0xFF
        payload = raw.tobytes()
    elif bits == 32:
        audio_format = 3
        payload = interleaved.astype("<f4").tobytes()
    else:
        raise ValueError("bits must be 16, 24 or 32")

    block_align = n_channels * bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, audio_format, n_channels, sample_rate,
        sample_rate * block_align, block_align, bits,
        b"data", len(payload),
    )
    Path(path).write_bytes(header + payload)
