"""
Smoothing, differentiation, standardization and level-crossing primitives.

All functions are pure: they return new SampledSignal instances or arrays and
never modify their inputs.
"""

from __future__ import annotations

from enum import Enum
from typing import NamedTuple

import numpy as np
from cachetools import LRUCache, cached
from scipy.signal import savgol_coeffs, savgol_filter
from scipy.stats import zscore as _scipy_zscore

from core.errors import DegenerateSeriesError, InvalidInputError, InvalidParameterError
from waveform.signal import SampledSignal


class Direction(str, Enum):
    """Sense of a level crossing."""

    RISING = "rising"
    FALLING = "falling"


class Crossing(NamedTuple):
    """A level crossing located by linear interpolation."""

    time: float  # seconds from the first sample
    direction: Direction


def window_samples(window_ms: float, fs: float) -> int:
    """Convert a window length in milliseconds to an odd sample count."""
    count = int(round(window_ms * fs / 1000.0))
    if count % 2 == 0:
        count += 1
    return count


@cached(cache=LRUCache(maxsize=4096))
def _edge_coefficients(length: int, poly_order: int, pos: int) -> np.ndarray:
    """Least-squares weights evaluating a local polynomial fit at `pos`."""
    order = min(poly_order, length - 1)
    coeffs = savgol_coeffs(length, order, pos=pos, use="dot")
    coeffs.setflags(write=False)
    return coeffs


def smooth(
    signal: SampledSignal,
    window_ms: float = 51.0,
    poly_order: int = 3,
) -> SampledSignal:
    """
    Savitzky-Golay smoothing with zero phase lag.

    Interior samples use the symmetric window. The first and last half-window
    samples use shrunken asymmetric windows covering only the samples that exist,
    so the output keeps the input length and alignment.

    Raises:
        InvalidParameterError: If the window spans fewer than poly_order + 2 samples.
    """
    if poly_order < 0:
        raise InvalidParameterError("poly_order must be >= 0")
    window = window_samples(window_ms, signal.fs)
    if window < poly_order + 2:
        raise InvalidParameterError(
            f"smoothing window of {window_ms} ms is {window} samples at {signal.fs} Hz; "
            f"order {poly_order} needs at least {poly_order + 2}"
        )

    x = signal.samples
    n = x.size
    half = window // 2
    if n >= window:
        out = savgol_filter(x, window, poly_order, mode="constant")
        edge = [*range(half), *range(n - half, n)]
    else:
        out = np.empty(n)
        edge = list(range(n))

    for i in edge:
        lo = max(0, i - half)
        hi = min(n - 1, i + half)
        coeffs = _edge_coefficients(hi - lo + 1, poly_order, i - lo)
        out[i] = float(np.dot(coeffs, x[lo : hi + 1]))
    return signal.with_samples(out)


def derivative(signal: SampledSignal) -> SampledSignal:
    """
    First time-derivative in units per second.

    Central differences in the interior, one-sided differences at both ends.

    Raises:
        InvalidInputError: If the signal has fewer than 3 samples.
    """
    if len(signal) < 3:
        raise InvalidInputError("derivative needs at least 3 samples")
    return signal.with_samples(np.gradient(signal.samples, 1.0 / signal.fs))


def zscore(series: np.ndarray) -> np.ndarray:
    """
    Standardize to zero mean and unit sample standard deviation.

    Raises:
        InvalidInputError: If fewer than 2 values are given.
        DegenerateSeriesError: If the series has zero variance.
    """
    values = np.asarray(series, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise InvalidInputError("zscore needs a 1-D series of length >= 2")
    if not np.all(np.isfinite(values)):
        raise InvalidInputError("zscore needs finite values")
    if np.ptp(values) == 0 or np.std(values, ddof=1) == 0:
        raise DegenerateSeriesError("series has zero variance")
    return np.asarray(_scipy_zscore(values, ddof=1), dtype=np.float64)


def level_crossings(
    signal: SampledSignal,
    level: float,
    search: tuple[int, int],
) -> list[Crossing]:
    """
    Locate where the signal crosses `level` inside samples [start, stop).

    Each crossing is interpolated linearly between its bracketing samples. A
    sample sitting exactly on the level counts as "at or above". A touch that
    reaches the level and turns back without crossing is not reported.

    Raises:
        InvalidInputError: If the interval is empty or outside the signal.
    """
    start, stop = int(search[0]), int(search[1])
    if stop <= start:
        raise InvalidInputError(f"empty search interval [{start}, {stop})")
    if start < 0 or stop > len(signal):
        raise InvalidInputError(f"search interval [{start}, {stop}) outside signal")

    segment = signal.samples[start:stop] - level
    if segment.size < 2:
        return []
    above = segment >= 0
    change = np.flatnonzero(above[1:] != above[:-1])
    if change.size == 0:
        return []

    a = segment[change]
    b = segment[change + 1]
    positions = change + a / (a - b)
    directions = np.where(above[change + 1], 1, -1)

    keep = np.ones(change.size, dtype=bool)
    same = np.flatnonzero(positions[1:] == positions[:-1])
    keep[same] = False
    keep[same + 1] = False

    return [
        Crossing(
            time=(start + float(pos)) / signal.fs,
            direction=Direction.RISING if sign > 0 else Direction.FALLING,
        )
        for pos, sign, kept in zip(positions, directions, keep)
        if kept
    ]
