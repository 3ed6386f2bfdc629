"""Corpus data model: ingestion, z-normalization, persistence.

A corpus row is one music track with metadata labels (nation, year, style)
and the per-track median of the four recording-studio features.  Feature
medians are z-normalized corpus-wide (population convention: divide by N)
so every column has mean 0 and standard deviation 1.

On-disk numbers use a canonical decimal format with 9 significant digits;
ingestion rounds incoming values to the same precision, which makes
ingest -> serialize -> ingest round-trips bit-identical.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple

import numpy as np
from scipy import stats as _scipy_stats

from .errors import (
    DegenerateColumn,
    DuplicateTrackId,
    EmptyCorpus,
    InsufficientData,
    MissingColumn,
    UnparsableRowWarning,
)

FEATURE_NAMES = ("bpm", "phase_space", "channel_correlation", "crest_factor")

NATIONS = ("G", "U")

CSV_COLUMNS = (
    "track_id", "title", "artist", "label", "nation", "year", "style",
    "bpm", "phase_space", "channel_correlation", "crest_factor",
)

#: Values this far outside a closed feature bound are snapped onto it
#: (floating-point slack); anything further out rejects the row.
_BOUND_SLACK = 1e-9


def canonical(x: float) -> float:
    """Round to the canonical on-disk precision (9 significant digits)."""
    return float(format(float(x), ".9g"))


def format_number(x: float) -> str:
    """Canonical decimal rendering of a feature value."""
    return format(float(x), ".9g")


@dataclass(frozen=True)
class FeatureVector:
    """Raw (unnormalized) per-track feature medians."""

    bpm: float
    phase_space: float
    channel_correlation: float
    crest_factor: float

    def as_array(self) -> np.ndarray:
        return np.array([self.bpm, self.phase_space,
                         self.channel_correlation, self.crest_factor])

    def validate(self) -> None:
        values = self.as_array()
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite feature value")
        if self.bpm <= 0:
            raise ValueError("bpm must be positive")
        if not 0.0 <= self.phase_space <= 1.0:
            raise ValueError("phase_space outside [0, 1]")
        if not -1.0 <= self.channel_correlation <= 1.0:
            raise ValueError("channel_correlation outside [-1, 1]")
        if self.crest_factor < 1.0:
            raise ValueError("crest_factor below 1")


@dataclass(frozen=True)
class TrackRecord:
    """One corpus row: metadata plus the raw feature medians."""

    track_id: str
    title: str
    artist: str
    label: str
    nation: str
    year: int
    style: str
    features: FeatureVector


class RowRejection(NamedTuple):
    row: int          # 1-based data row number (excluding header)
    reason: str


@dataclass
class NormalizedCorpus:
    """Immutable-by-convention corpus with z-scored feature matrix.

    ``feature_matrix[i]`` is the z-scored feature vector of ``records[i]``;
    ``means``/``stds`` (population convention) de-normalize it back to raw
    medians.
    """

    records: list[TrackRecord]
    feature_matrix: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    rejections: list[RowRejection] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def raw_matrix(self) -> np.ndarray:
        return np.array([r.features.as_array() for r in self.records])

    def denormalize(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z) * self.stds + self.means

    def nations(self) -> np.ndarray:
        return np.array([r.nation for r in self.records])

    def years(self) -> np.ndarray:
        return np.array([r.year for r in self.records], dtype=int)

    def styles(self) -> np.ndarray:
        return np.array([r.style for r in self.records])

    def track_ids(self) -> list[str]:
        return [r.track_id for r in self.records]


def normalize(raw_vectors: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Z-score every column of an N x 4 matrix (population std).

    Returns ``(z_matrix, means, stds)``.  Raises :class:`DegenerateColumn`
    when a column is constant, since its z-score is undefined.
    """
    raw = np.asarray(raw_vectors, dtype=float)
    if raw.ndim != 2 or raw.shape[0] < 2:
        raise InsufficientData("normalization needs at least 2 rows")
    means = raw.mean(axis=0)
    stds = raw.std(axis=0)  # population convention (divide by N)
    dead = np.flatnonzero(stds == 0.0)
    if dead.size:
        names = ", ".join(FEATURE_NAMES[i] if i < 4 else str(i) for i in dead)
        raise DegenerateColumn(f"constant column(s): {names}")
    z = (raw - means) / stds
    return z, means, stds


def _parse_feature(name: str, text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"{name} is not finite")
    value = canonical(value)
    low, high = {
        "bpm": (0.0, math.inf),
        "phase_space": (0.0, 1.0),
        "channel_correlation": (-1.0, 1.0),
        "crest_factor": (1.0, math.inf),
    }[name]
    if value < low - _BOUND_SLACK or value > high + _BOUND_SLACK:
        raise ValueError(f"{name}={value!r} outside [{low}, {high}]")
    value = min(max(value, low), high)
    if name == "bpm" and value <= 0:
        raise ValueError("bpm must be positive")
    return value


def _record_from_fields(fields: dict[str, object]) -> TrackRecord:
    track_id = str(fields["track_id"]).strip()
    if not track_id:
        raise ValueError("empty track_id")
    nation = str(fields["nation"]).strip()
    if nation not in NATIONS:
        raise ValueError(f"nation {nation!r} not one of {NATIONS}")
    try:
        year = int(str(fields["year"]).strip())
    except ValueError:
        raise ValueError(f"year {fields['year']!r} is not an integer") from None
    features = FeatureVector(*(
        _parse_feature(name, str(fields[name])) for name in FEATURE_NAMES
    ))
    features.validate()
    return TrackRecord(
        track_id=track_id,
        title=str(fields["title"]),
        artist=str(fields["artist"]),
        label=str(fields["label"]),
        nation=nation,
        year=year,
        style=str(fields["style"]).strip(),
        features=features,
    )


def _build_corpus(rows: Iterable[dict[str, object]]) -> NormalizedCorpus:
    records: list[TrackRecord] = []
    rejections: list[RowRejection] = []
    seen: set[str] = set()
    for row_no, fields in enumerate(rows, start=1):
        try:
            record = _record_from_fields(fields)
        except (ValueError, KeyError) as exc:
            rejections.append(RowRejection(row_no, str(exc)))
            warnings.warn(f"row {row_no} skipped: {exc}", UnparsableRowWarning,
                          stacklevel=3)
            continue
        if record.track_id in seen:
            raise DuplicateTrackId(f"duplicate track_id {record.track_id!r}")
        seen.add(record.track_id)
        records.append(record)
    if not records:
        raise EmptyCorpus("no valid rows")
    raw = np.array([r.features.as_array() for r in records])
    z, means, stds = normalize(raw)
    return NormalizedCorpus(records, z, means, stds, rejections)


def ingest_feature_table(path: str | Path, format: str | None = None,
                         write_sidecar: bool = False) -> NormalizedCorpus:
    """Ingest a precomputed feature table (CSV or JSON) into a corpus.

    The header must carry exactly the documented columns.  Unparsable rows
    are skipped with an :class:`UnparsableRowWarning` (counts kept in
    ``corpus.rejections``); duplicate track ids and an empty result are
    fatal.  With ``write_sidecar`` the normalization means/stds are written
    next to the input as ``<path>.norm.json``.
    """
    path = Path(path)
    if format is None:
        format = "json" if path.suffix.lower() == ".json" else "csv"
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")

    if format == "csv":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            if header is None:
                raise EmptyCorpus(f"{path} is empty")
            if set(header) != set(CSV_COLUMNS):
                missing = sorted(set(CSV_COLUMNS) - set(header))
                extra = sorted(set(header) - set(CSV_COLUMNS))
                raise MissingColumn(
                    f"schema mismatch in {path.name}: missing {missing}, unexpected {extra}")
            corpus = _build_corpus(reader)
    else:
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise MissingColumn(f"{path.name} is not valid JSON: {exc}") from exc
        if not isinstance(data, list):
            raise MissingColumn(f"{path.name}: expected a JSON array of objects")
        if not data:
            raise EmptyCorpus(f"{path} holds no records")
        corpus = _build_corpus(row if isinstance(row, dict) else {} for row in data)

    if write_sidecar:
        write_norm_sidecar(corpus, Path(str(path) + ".norm.json"))
    return corpus


def write_norm_sidecar(corpus: NormalizedCorpus, path: str | Path) -> None:
    """Write the means/stds needed to de-normalize the corpus."""
    payload = {
        "features": list(FEATURE_NAMES),
        "means": [float(x) for x in corpus.means],
        "stds": [float(x) for x in corpus.stds],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def save_corpus(corpus: NormalizedCorpus, path: str | Path,
                write_sidecar: bool = True) -> None:
    """Serialize raw medians + metadata as canonical CSV (sorted by track_id)."""
    path = Path(path)
    records = sorted(corpus.records, key=lambda r: r.track_id)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow([
                r.track_id, r.title, r.artist, r.label, r.nation, str(r.year),
                r.style,
                format_number(r.features.bpm),
                format_number(r.features.phase_space),
                format_number(r.features.channel_correlation),
                format_number(r.features.crest_factor),
            ])
    if write_sidecar:
        write_norm_sidecar(corpus, Path(str(path) + ".norm.json"))


class CorrelationResult(NamedTuple):
    matrix: np.ndarray        # 4x4 Pearson r, unit diagonal
    p_values: np.ndarray      # two-sided t-test p per pair (diagonal 0)
    significant: np.ndarray   # bool, Bonferroni-corrected over the 6 pairs


def feature_correlations(corpus: NormalizedCorpus | np.ndarray,
                         alpha: float = 0.05) -> CorrelationResult:
    """Pairwise Pearson correlations between the four features.

    Significance is a two-sided t-test on r at ``alpha``, Bonferroni-corrected
    over the 6 distinct pairs.  The features are expected to be mutually
    uncorrelated; this lets an analysis run verify that prerequisite.
    """
    if isinstance(corpus, NormalizedCorpus):
        matrix = corpus.feature_matrix
    else:
        matrix = np.asarray(corpus, dtype=float)
    n, k = matrix.shape
    if n < 3:
        raise InsufficientData("correlation test needs at least 3 rows")
    corr = np.corrcoef(matrix, rowvar=False)
    corr = np.clip(corr, -1.0, 1.0)
    np.fill_diagonal(corr, 1.0)
    pvals = np.zeros_like(corr)
    for i in range(k):
        for j in range(i + 1, k):
            r = corr[i, j]
            if abs(r) >= 1.0:
                p = 0.0
            else:
                t = r * math.sqrt((n - 2) / (1.0 - r * r))
                p = 2.0 * _scipy_stats.t.sf(abs(t), n - 2)
            pvals[i, j] = pvals[j, i] = p
    m = k * (k - 1) // 2
    significant = (pvals < alpha / m) & ~np.eye(k, dtype=bool)
    return CorrelationResult(corr, pvals, significant)
