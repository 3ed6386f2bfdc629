"""Track-level extraction and the batch corpus driver."""

import csv
import math

import numpy as np
import pytest

from studioscope.corpus import ingest_feature_table
from studioscope.errors import (
    EmptyCorpus,
    ExtractionFailureWarning,
    MissingMetadata,
    TooShort,
)
from studioscope.features import (
    ExtractionConfig,
    StereoSignal,
    extract_corpus,
    frame_features,
    track_features,
    write_wav,
)

SR = 44100


def _gated_sine(seconds=12.0, gate_period=0.5, sr=SR):
    """Sine bursts on a steady 0.5 s grid: every gate-aligned frame is identical."""
    t = np.arange(int(seconds * sr)) / sr
    tone = np.sin(2 * np.pi * 441.0 * t)
    gate = (t % gate_period) < gate_period / 2
    mono = tone * gate
    return StereoSignal(left=mono, right=mono.copy(), sample_rate=sr)


def _alternating_phase_clicks(frames=24, sr=SR):
    """One click per 0.5 s frame; odd frames carry an anti-phase click."""
    frame_len = sr // 2
    n = frames * frame_len
    left = np.zeros(n)
    right = np.zeros(n)
    for i in range(frames):
        start = i * frame_len + 100
        burst = np.array([0.9, 0.6, 0.3, 0.15])
        left[start:start + 4] = burst
        right[start:start + 4] = burst if i % 2 == 0 else -burst
    return StereoSignal(left=left, right=right, sample_rate=sr), frame_len


def test_identical_frames_give_single_frame_crest():
    signal = _gated_sine()
    config = ExtractionConfig(frame_length=SR // 2, hop_length=SR // 2)
    frames = frame_features(signal, config)
    crests = {round(f.crest_factor, 12) for f in frames}
    assert len(crests) == 1
    vector = track_features(signal, config)
    assert vector.crest_factor == pytest.approx(frames[0].crest_factor, rel=1e-12)
    assert vector.bpm == pytest.approx(120.0, abs=0.5)


def test_alternating_correlation_median_is_zero():
    signal, frame_len = _alternating_phase_clicks(frames=24)
    config = ExtractionConfig(frame_length=frame_len, hop_length=frame_len)
    frames = frame_features(signal, config)
    correlations = [f.channel_correlation for f in frames]
    assert sorted(set(round(c, 9) for c in correlations)) == [-1.0, 1.0]
    vector = track_features(signal, config)
    assert vector.channel_correlation == pytest.approx(0.0, abs=1e-12)


def test_too_few_frames_rejected():
    t = np.arange(SR) / SR
    mono = np.sin(2 * np.pi * 220 * t)
    signal = StereoSignal(left=mono, right=mono.copy(), sample_rate=SR)
    with pytest.raises(TooShort):
        track_features(signal, ExtractionConfig(frame_length=SR, hop_length=SR))


def test_undefined_frames_excluded_from_median():
    # half the frames silent: crest/correlation medians use defined frames only
    signal, frame_len = _alternating_phase_clicks(frames=24)
    silent = np.zeros(6 * frame_len)
    padded = StereoSignal(
        left=np.concatenate([signal.left, silent]),
        right=np.concatenate([signal.right, silent]),
        sample_rate=SR)
    config = ExtractionConfig(frame_length=frame_len, hop_length=frame_len)
    frames = frame_features(padded, config)
    assert sum(math.isnan(f.crest_factor) for f in frames) == 6
    vector = track_features(padded, config)
    assert vector.crest_factor >= 1.0


# ---------------------------------------------------------------------------
# batch driver


def _click_mono(bpm: float, seconds: float, sr: int, peak: float) -> np.ndarray:
    n = int(seconds * sr)
    mono = np.zeros(n)
    period = 60.0 / bpm * sr
    k = 0
    while int(round(k * period)) < n - 4:
        start = int(round(k * period))
        mono[start:start + 3] = [peak, peak * 0.6, peak * 0.2]
        k += 1
    return mono


@pytest.fixture
def audio_tree(tmp_path):
    sr = 22050
    audio_dir = tmp_path / "audio"
    audio_dir.mkdir()
    specs = [("a.wav", 118.0, 0.9, 0.05, -0.6), ("b.wav", 126.0, 0.7, 0.2, 0.1),
             ("c.wav", 134.0, 0.5, 0.45, 0.8)]
    for name, bpm, peak, width, balance in specs:
        mono = _click_mono(bpm, 8.0, sr, peak)
        t = np.arange(mono.size) / sr
        pad = width * np.sin(2 * np.pi * (97.0 + 100 * width) * t)
        left = np.clip(mono + pad, -1, 1)
        right = np.clip(mono + balance * pad, -1, 1)
        write_wav(audio_dir / name, left, right, sr)
    (audio_dir / "broken.wav").write_bytes(b"RIFF\x10\x00\x00\x00WAVEjunk")
    meta = tmp_path / "meta.csv"
    rows = ["filename,track_id,title,artist,label,nation,year,style"]
    for i, (name, *_rest) in enumerate(specs):
        rows.append(f"{name},T{i:02d},Song {i},Artist,Label,G,199{i},house")
    rows.append("broken.wav,T99,Broken,Artist,Label,U,1994,acid house")
    meta.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return audio_dir, meta


def test_extract_corpus_with_one_corrupt_file(audio_tree, tmp_path):
    audio_dir, meta = audio_tree
    out = tmp_path / "corpus.csv"
    config = ExtractionConfig()
    with pytest.warns(ExtractionFailureWarning, match="broken.wav"):
        n, failures = extract_corpus(audio_dir, meta, config, out)
    assert n == 3
    assert len(failures) == 1
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["track_id"] for r in rows] == ["T00", "T01", "T02"]
    for row, bpm in zip(rows, (118.0, 126.0, 134.0)):
        assert float(row["bpm"]) == pytest.approx(bpm, abs=1.0)
    corpus = ingest_feature_table(out)
    assert len(corpus) == 3


def test_extract_corpus_rerun_is_byte_identical(audio_tree, tmp_path):
    audio_dir, meta = audio_tree
    out1 = tmp_path / "one.csv"
    out2 = tmp_path / "two.csv"
    config = ExtractionConfig()
    with pytest.warns(ExtractionFailureWarning):
        extract_corpus(audio_dir, meta, config, out1)
    with pytest.warns(ExtractionFailureWarning):
        extract_corpus(audio_dir, meta, config, out2, threads=4)
    assert out1.read_bytes() == out2.read_bytes()


def test_extract_corpus_missing_metadata(tmp_path):
    with pytest.raises(MissingMetadata):
        extract_corpus(tmp_path, tmp_path / "nothing.csv", ExtractionConfig(),
                       tmp_path / "out.csv")


def test_extract_empty_metadata_yields_empty_corpus(tmp_path):
    meta = tmp_path / "meta.csv"
    meta.write_text("filename,track_id,title,artist,label,nation,year,style\n",
                    encoding="utf-8")
    out = tmp_path / "corpus.csv"
    n, failures = extract_corpus(tmp_path, meta, ExtractionConfig(), out)
    assert n == 0 and not failures
    with pytest.raises(EmptyCorpus):
        ingest_feature_table(out)
