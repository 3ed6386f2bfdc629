"""Frame-level stereo metering: crest factor, channel correlation, phase space.

All three return a single value per analysis frame.  Degenerate frames
(digital silence, constant channels) yield NaN as the undefined marker;
callers exclude NaN frames from per-track medians.
"""

from __future__ import annotations

import math

import numpy as np


def crest_factor(frame_left: np.ndarray, frame_right: np.ndarray) -> float:
    """Peak over RMS of the two channels taken together.

    Peak is max(|sample|) across both channels; RMS is taken over both
    channels interleaved.  Silent frames return NaN.  The ratio is linear
    (not dB) and always >= 1 for non-silent input.
    """
    both = np.concatenate([np.asarray(frame_left, dtype=float),
                           np.asarray(frame_right, dtype=float)])
    if both.size == 0:
        raise ValueError("empty frame")
    peak = np.max(np.abs(both))
    rms = math.sqrt(float(np.mean(both * both)))
    if rms == 0.0:
        return math.nan
    return float(peak) / rms


def channel_correlation(frame_left: np.ndarray, frame_right: np.ndarray) -> float:
    """Pearson correlation between left and right within one frame.

    +1 for identical channels (mono), -1 for anti-phase; NaN when either
    channel has zero variance within the frame.
    """
    left = np.asarray(frame_left, dtype=float)
    right = np.asarray(frame_right, dtype=float)
    if left.size == 0:
        raise ValueError("empty frame")
    # exact constancy check: float accumulation never makes a varying
    # channel's variance exactly zero, but a DC channel must yield NaN
    if left.min() == left.max() or right.min() == right.max():
        return math.nan
    dl = left - left.mean()
    dr = right - right.mean()
    var_l = float(np.dot(dl, dl))
    var_r = float(np.dot(dr, dr))
    if var_l == 0.0 or var_r == 0.0:
        return math.nan
    r = float(np.dot(dl, dr)) / math.sqrt(var_l * var_r)
    return min(1.0, max(-1.0, r))


def phase_space(frame_left: np.ndarray, frame_right: np.ndarray,
                box_grid: int, counters: dict | None = None) -> float:
    """Box-counting occupancy of the frame's phase-scope point cloud.

    Each sample pair is plotted as (mid, side) = ((L+R)/2, (L-R)/2), the
    45-degree rotated goniometer convention.  [-1, 1]^2 is partitioned into
    ``box_grid`` x ``box_grid`` boxes and the occupied fraction returned, so
    the score lies in (0, 1].  Samples outside [-1, 1] are clamped; when
    ``counters`` is given, ``counters["clamped"]`` accumulates how many.
    """
    if box_grid < 2:
        raise ValueError("box_grid must be >= 2")
    left = np.asarray(frame_left, dtype=float)
    right = np.asarray(frame_right, dtype=float)
    if left.size == 0:
        raise ValueError("empty frame")
    mid = (left + right) / 2.0
    side = (left - right) / 2.0
    out_of_range = int(np.count_nonzero((np.abs(mid) > 1.0) | (np.abs(side) > 1.0)))
    if out_of_range and counters is not None:
        counters["clamped"] = counters.get("clamped", 0) + out_of_range
    mid = np.clip(mid, -1.0, 1.0)
    side = np.clip(side, -1.0, 1.0)
    g = int(box_grid)
    ix = np.minimum((mid + 1.0) * 0.5 * g, g - 1).astype(np.int64)
    iy = np.minimum((side + 1.0) * 0.5 * g, g - 1).astype(np.int64)
    occupied = np.unique(iy * g + ix).size
    return occupied / float(g * g)
