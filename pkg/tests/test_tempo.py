"""Tempo estimation: synthesized click tracks with known ground truth."""

import numpy as np
import pytest

from studioscope.errors import NoBeat, TooShort
from studioscope.features import estimate_bpm

from conftest import SR, click_track, silence, sine_stereo


@pytest.mark.parametrize("bpm,tol", [
    (90.0, 1.0),
    (120.0, 0.5),
    (128.0, 1.0),
    (174.0, 1.0),
])
def test_click_track_recovered(bpm, tol):
    signal = click_track(bpm, seconds=30.0)
    assert estimate_bpm(signal) == pytest.approx(bpm, abs=tol)


def test_silence_has_no_beat():
    with pytest.raises(NoBeat):
        estimate_bpm(silence(seconds=30.0))


def test_pure_tone_has_no_beat():
    # constant spectrum -> flux only at onset -> no periodic autocorrelation
    with pytest.raises(NoBeat):
        estimate_bpm(sine_stereo(freq=220.0, seconds=10.0))


def test_short_signal_rejected():
    with pytest.raises(TooShort):
        estimate_bpm(click_track(120.0, seconds=3.0))


def test_estimate_is_deterministic():
    signal = click_track(133.0, seconds=20.0)
    assert estimate_bpm(signal) == estimate_bpm(signal)


def test_octave_rule_doubles_slow_estimate():
    # clicks at 70 bpm with equal-energy off-beat clicks halfway: the
    # fundamental autocorrelation peak sits at 140 bpm-lag as well
    sr = SR
    n = 30 * sr
    mono = np.zeros(n)
    period = 60.0 / 70.0 * sr
    beat = 0
    while True:
        start = int(round(beat * period / 2.0))
        if start >= n - 3:
            break
        mono[start:start + 3] += [0.9, 0.5, 0.2]
        beat += 1
    from studioscope.features import StereoSignal
    signal = StereoSignal(left=mono, right=mono.copy(), sample_rate=sr)
    assert estimate_bpm(signal) == pytest.approx(140.0, abs=1.0)


def test_custom_bpm_range_respected():
    signal = click_track(120.0, seconds=20.0)
    # restricting the range to halves forces the 60 bpm alias
    assert estimate_bpm(signal, (40.0, 80.0)) == pytest.approx(60.0, abs=0.5)
