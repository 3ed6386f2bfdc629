"""Per-track feature extraction and the batch corpus driver.

A track is framed (4096-sample frames, 50% overlap by default), the three
frame-level meters run per frame, and the per-track value of each feature
is the median over frames where it is defined (NaN frames excluded).  Tempo
is estimated once on the whole signal.  Extraction is a pure function of
(file, config), so batch runs may process tracks in parallel; rows are
canonicalized by track_id before writing, keeping the output byte-identical
for any thread count.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..corpus import CSV_COLUMNS, FeatureVector, format_number
from ..errors import (
    ExtractionFailureWarning,
    InsufficientData,
    InvalidConfig,
    MissingMetadata,
    StudioscopeError,
    TooShort,
)
from .audio import StereoSignal, decode_audio
from .metering import channel_correlation, crest_factor, phase_space
from .tempo import estimate_bpm

MIN_FRAME_LENGTH = 256
MIN_FRAMES_PER_TRACK = 10

METADATA_COLUMNS = ("filename", "track_id", "title", "artist", "label",
                    "nation", "year", "style")


@dataclass(frozen=True)
class ExtractionConfig:
    frame_length: int = 4096
    hop_length: int = 2048
    box_grid: int = 16
    bpm_range: tuple[float, float] = (60.0, 200.0)
    seed: int = 0

    def validate(self) -> None:
        if self.frame_length < MIN_FRAME_LENGTH:
            raise InvalidConfig(f"frame_length must be >= {MIN_FRAME_LENGTH}")
        if not 0 < self.hop_length <= self.frame_length:
            raise InvalidConfig("hop_length must be in (0, frame_length]")
        if self.box_grid < 2:
            raise InvalidConfig("box_grid must be >= 2")
        if not self.bpm_range[0] < self.bpm_range[1]:
            raise InvalidConfig("bpm_range min must be below max")


@dataclass(frozen=True)
class FrameFeatures:
    """Raw meter readings for one analysis frame (NaN = undefined)."""

    frame_index: int
    phase_space: float
    channel_correlation: float
    crest_factor: float


def frame_count(n_samples: int, config: ExtractionConfig) -> int:
    if n_samples < config.frame_length:
        return 0
    return 1 + (n_samples - config.frame_length) // config.hop_length


def frame_features(signal: StereoSignal, config: ExtractionConfig,
                   counters: dict | None = None) -> list[FrameFeatures]:
    """Run the three frame meters over every full frame of the signal."""
    config.validate()
    out = []
    for i in range(frame_count(len(signal), config)):
        start = i * config.hop_length
        stop = start + config.frame_length
        left = signal.left[start:stop]
        right = signal.right[start:stop]
        out.append(FrameFeatures(
            frame_index=i,
            phase_space=phase_space(left, right, config.box_grid, counters),
            channel_correlation=channel_correlation(left, right),
            crest_factor=crest_factor(left, right),
        ))
    return out


def _defined_median(values: np.ndarray, name: str) -> float:
    defined = values[~np.isnan(values)]
    if defined.size == 0:
        raise InsufficientData(f"{name} undefined for every frame")
    return float(np.median(defined))


def track_features(signal: StereoSignal, config: ExtractionConfig) -> FeatureVector:
    """Median FrameFeatures plus the whole-signal tempo, as one vector."""
    config.validate()
    n = frame_count(len(signal), config)
    if n < MIN_FRAMES_PER_TRACK:
        raise TooShort(f"{n} frames < {MIN_FRAMES_PER_TRACK} "
                       f"(frame_length={config.frame_length}, hop={config.hop_length})")
    bpm = estimate_bpm(signal, config.bpm_range)
    frames = frame_features(signal, config)
    ps = np.array([f.phase_space for f in frames])
    cc = np.array([f.channel_correlation for f in frames])
    cf = np.array([f.crest_factor for f in frames])
    vector = FeatureVector(
        bpm=bpm,
        phase_space=_defined_median(ps, "phase_space"),
        channel_correlation=_defined_median(cc, "channel_correlation"),
        crest_factor=max(1.0, _defined_median(cf, "crest_factor")),
    )
    vector.validate()
    return vector


def read_metadata(path: str | Path) -> list[dict[str, str]]:
    path = Path(path)
    if not path.is_file():
        raise MissingMetadata(f"metadata file {path} not found")
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or set(reader.fieldnames) != set(METADATA_COLUMNS):
                raise MissingMetadata(
                    f"metadata header must be exactly {','.join(METADATA_COLUMNS)}")
            return [dict(row) for row in reader]
    except OSError as exc:
        raise MissingMetadata(f"cannot read metadata file {path}: {exc}") from exc


def _extract_one(audio_dir: Path, meta: dict[str, str],
                 config: ExtractionConfig) -> tuple[dict[str, str] | None, str | None]:
    """Returns (row, None) on success or (None, failure reason)."""
    filename = meta["filename"]
    try:
        nation = meta["nation"].strip()
        if nation not in ("G", "U"):
            raise InsufficientData(f"nation {nation!r} must be G or U")
        year = int(meta["year"])
        signal = decode_audio(audio_dir / filename)
        vector = track_features(signal, config)
    except (StudioscopeError, ValueError) as exc:
        return None, f"{filename}: {type(exc).__name__}: {exc}"
    row = {
        "track_id": meta["track_id"].strip(),
        "title": meta["title"],
        "artist": meta["artist"],
        "label": meta["label"],
        "nation": nation,
        "year": str(year),
        "style": meta["style"].strip(),
        "bpm": format_number(vector.bpm),
        "phase_space": format_number(vector.phase_space),
        "channel_correlation": format_number(vector.channel_correlation),
        "crest_factor": format_number(vector.crest_factor),
    }
    return row, None


def extract_corpus(audio_dir: str | Path, metadata: str | Path,
                   config: ExtractionConfig, out_csv: str | Path,
                   threads: int = 1) -> tuple[int, list[str]]:
    """Extract features for every metadata row; write the corpus CSV.

    Per-file failures are warnings, not fatal; only a missing or unreadable
    metadata file aborts the run.  Returns (rows written, failure reasons).
    """
    config.validate()
    audio_dir = Path(audio_dir)
    rows_meta = read_metadata(metadata)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(
                lambda m: _extract_one(audio_dir, m, config), rows_meta))
    else:
        results = [_extract_one(audio_dir, m, config) for m in rows_meta]

    rows: list[dict[str, str]] = []
    failures: list[str] = []
    seen: set[str] = set()
    for row, failure in results:
        if failure is not None:
            failures.append(failure)
            warnings.warn(failure, ExtractionFailureWarning, stacklevel=2)
            continue
        if not row["track_id"] or row["track_id"] in seen:
            failures.append(f"{row['track_id']!r}: duplicate or empty track_id")
            warnings.warn(failures[-1], ExtractionFailureWarning, stacklevel=2)
            continue
        seen.add(row["track_id"])
        rows.append(row)

    rows.sort(key=lambda r: r["track_id"])
    with open(out_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(CSV_COLUMNS), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return len(rows), failures
