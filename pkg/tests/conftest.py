"""Shared fixtures: corpus CSV builders and synthesized audio."""

from __future__ import annotations

import csv
import zlib
import io

import numpy as np
import pytest

from studioscope.corpus import CSV_COLUMNS
from studioscope.features import StereoSignal

SR = 44100


def corpus_csv_text(rows: list[dict]) -> str:
    """Render corpus rows (dicts with schema keys) as CSV text."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(CSV_COLUMNS), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def make_row(track_id: str, **overrides) -> dict:
    # feature defaults vary deterministically with the id so no column is constant
    h = zlib.crc32(track_id.encode())
    row = {
        "track_id": track_id,
        "title": f"Title {track_id}",
        "artist": "Artist",
        "label": "Label",
        "nation": "G",
        "year": "1992",
        "style": "house",
        "bpm": f"{100 + (h % 800) / 10.0}",
        "phase_space": f"{0.2 + ((h >> 8) % 600) / 1000.0}",
        "channel_correlation": f"{-0.5 + ((h >> 16) % 1400) / 1000.0}",
        "crest_factor": f"{1.5 + ((h >> 24) % 40) / 10.0}",
    }
    row.update({k: str(v) for k, v in overrides.items()})
    return row


@pytest.fixture
def corpus_file(tmp_path):
    def _write(rows: list[dict], name: str = "corpus.csv"):
        path = tmp_path / name
        path.write_text(corpus_csv_text(rows), encoding="utf-8")
        return path
    return _write


def sine_stereo(freq: float = 440.0, seconds: float = 1.0, amplitude: float = 1.0,
                sr: int = SR, phase_right: float = 0.0) -> StereoSignal:
    t = np.arange(int(seconds * sr)) / sr
    left = amplitude * np.sin(2 * np.pi * freq * t)
    right = amplitude * np.sin(2 * np.pi * freq * t + phase_right)
    return StereoSignal(left=left, right=right, sample_rate=sr)


def click_track(bpm: float, seconds: float = 30.0, sr: int = SR) -> StereoSignal:
    """Unit clicks (3-sample decaying burst) on every beat of a steady grid."""
    n = int(seconds * sr)
    mono = np.zeros(n)
    period = 60.0 / bpm * sr
    beat = 0
    while True:
        start = int(round(beat * period))
        if start >= n - 3:
            break
        mono[start:start + 3] += np.array([0.9, 0.5, 0.2])
        beat += 1
    return StereoSignal(left=mono, right=mono.copy(), sample_rate=sr)


def silence(seconds: float = 30.0, sr: int = SR) -> StereoSignal:
    n = int(seconds * sr)
    return StereoSignal(left=np.zeros(n), right=np.zeros(n), sample_rate=sr)
