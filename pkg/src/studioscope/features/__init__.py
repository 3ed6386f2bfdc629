"""Stereo audio decoding and recording-studio feature extraction."""

from .audio import StereoSignal, decode_audio, write_wav
from .extract import (
    ExtractionConfig,
    FrameFeatures,
    extract_corpus,
    frame_features,
    track_features,
)
from .metering import channel_correlation, crest_factor, phase_space
from .tempo import estimate_bpm, onset_envelope

__all__ = [
    "StereoSignal",
    "decode_audio",
    "write_wav",
    "ExtractionConfig",
    "FrameFeatures",
    "extract_corpus",
    "frame_features",
    "track_features",
    "channel_correlation",
    "crest_factor",
    "phase_space",
    "estimate_bpm",
    "onset_envelope",
]
