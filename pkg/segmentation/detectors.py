"""
ECG R-peak and PPG pulse-onset detectors.

R peaks: band-limited energy detector (band-pass, differentiate, square, moving
integration, adaptive threshold against the running median of accepted peaks),
then refined onto the raw ECG maximum.

Onsets: prominent minima of a more heavily smoothed PPG, optionally anchored to
the post-R window in which a pulse can arrive, then refined by a local model fit
on the raw PPG.
"""

from __future__ import annotations

from bisect import bisect_left
from collections import deque
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares
from scipy.signal import butter, find_peaks, sosfiltfilt

from core.config import AnalysisDefaults
from core.errors import InvalidInputError, InvalidParameterError
from core.models import DiagnosticLog
from waveform.filters import smooth
from waveform.signal import SampledSignal


def _require_duration(signal: SampledSignal, what: str) -> None:
    if signal.duration < AnalysisDefaults.MIN_RECORD_SECONDS:
        raise InvalidInputError(
            f"{what} needs at least {AnalysisDefaults.MIN_RECORD_SECONDS:g} s of samples "
            f"(got {signal.duration:.3f} s)"
        )


def _ms(value_ms: float, fs: float) -> int:
    return max(1, int(round(value_ms * fs / 1000.0)))


def _refine(raw: np.ndarray, index: int, half: int) -> int:
    """Move to the raw maximum within +/- half samples until it stops moving."""
    current = index
    for _ in range(8):
        lo = max(0, current - half)
        hi = min(raw.size, current + half + 1)
        best = lo + int(np.argmax(raw[lo:hi]))
        if best == current:
            break
        current = best
    return current


def _fit_foot(raw: np.ndarray, smoothed: np.ndarray, valley: int, fs: float) -> int:
    """
    Foot of one pulse from a local model fit on the raw PPG.

    Over [valley - 80 ms, steepest upstroke] the raw samples are fitted with a
    line (the previous pulse's decay) plus a Gaussian rise, and the model's
    minimum on the sample grid is the foot. Returns `valley` when the fit fails
    or lands more than 40 ms away.
    """
    n = raw.size
    top = min(n, valley + _ms(AnalysisDefaults.ONSET_PEAK_SEARCH_MS, fs) + 1)
    if top - valley < 3:
        return valley
    peak = valley + 1 + int(np.argmax(smoothed[valley + 1 : top]))
    if peak - valley < 2:
        return valley
    upstroke = valley + 1 + int(np.argmax(np.gradient(smoothed[valley : peak + 1])[1:-1]))

    lo = max(0, valley - _ms(AnalysisDefaults.ONSET_FIT_LOOKBACK_MS, fs))
    y = raw[lo : upstroke + 1]
    if y.size < 6:
        return valley
    t = (np.arange(lo, upstroke + 1) - valley) / fs
    rise = max(float(y[-1] - raw[valley]), np.finfo(float).eps)
    width = float(np.clip(t[-1] / 2.0, 0.002, 0.25))
    start = np.array([raw[valley], 0.0, rise / 0.6, t[-1] + width, width])
    lower = np.array([-np.inf, -np.inf, 0.0, t[0], 0.001])
    upper = np.array([np.inf, np.inf, np.inf, t[-1] + 0.5, 0.5])

    def model(p: np.ndarray) -> np.ndarray:
        level, trend, amplitude, center, sd = p
        return level + trend * t + amplitude * np.exp(-0.5 * ((t - center) / sd) ** 2)

    try:
        fit = least_squares(lambda p: model(p) - y, start, bounds=(lower, upper), x_scale="jac")
    except ValueError:
        return valley
    if not fit.success:
        return valley
    foot = lo + int(np.argmin(model(fit.x)))
    if abs(foot - valley) > _ms(AnalysisDefaults.ONSET_REFINE_MAX_MS, fs):
        return valley
    return foot


def _valleys(x: np.ndarray, fs: float, distance: int, prominence: float) -> np.ndarray:
    """
    Prominent minima of `x`, with flat bottoms reported at their last sample.

    The signal is padded with its maximum so a flat stretch touching either
    end still counts as a valley; minima on the first or last sample are
    dropped. A valley must be followed by a rise of `prominence` within the
    peak search span, so the trough after a final pulse is not a foot. Of
    valleys closer than `distance`, the deeper one wins.
    """
    padded = np.pad(x, 1, mode="constant", constant_values=float(np.max(x)))
    _, props = find_peaks(-padded, prominence=prominence, plateau_size=1)
    found = props["right_edges"] - 1
    span = _ms(AnalysisDefaults.ONSET_PEAK_SEARCH_MS, fs)
    found = [
        int(v)
        for v in found
        if 0 < v < x.size - 1 and float(np.max(x[v : v + span + 1])) - float(x[v]) >= prominence
    ]
    kept: list[int] = []
    for v in sorted(found, key=lambda i: (x[i], i)):
        pos = bisect_left(kept, v)
        if pos > 0 and v - kept[pos - 1] < distance:
            continue
        if pos < len(kept) and kept[pos] - v < distance:
            continue
        kept.insert(pos, v)
    return np.asarray(kept, dtype=np.int64)


def detect_r_peaks(
    ecg: SampledSignal,
    *,
    refractory_ms: float = AnalysisDefaults.R_REFRACTORY_MS,
    threshold_ratio: float = AnalysisDefaults.R_THRESHOLD_RATIO,
    integration_ms: float = AnalysisDefaults.R_INTEGRATION_MS,
    band_hz: tuple[float, float] = AnalysisDefaults.R_BAND_HZ,
    diagnostics: DiagnosticLog | None = None,
) -> list[int]:
    """
    Detect R peaks in a single-lead ECG.

    Returns:
        Strictly increasing sample indices, each the raw-ECG maximum within
        +/-25 ms of itself, at least `refractory_ms` apart. An empty list (with a
        `no_r_peaks` diagnostic) when nothing QRS-like is present.

    Raises:
        InvalidInputError: If the ECG is shorter than 2 s.
        InvalidParameterError: If the band does not fit below the Nyquist rate.
    """
    _require_duration(ecg, "R-peak detection")
    fs = ecg.fs
    if band_hz[1] >= fs / 2:
        raise InvalidParameterError(f"QRS band {band_hz} Hz needs a sampling rate above {2 * band_hz[1]:g} Hz")

    raw = ecg.samples
    sos = butter(2, band_hz, btype="bandpass", fs=fs, output="sos")
    filtered = sosfiltfilt(sos, raw - np.median(raw))
    energy = np.gradient(filtered) ** 2
    window = _ms(integration_ms, fs)
    integrated = np.convolve(energy, np.ones(window) / window, mode="same")

    scale = float(np.max(integrated))
    if not np.isfinite(scale) or scale <= np.finfo(float).tiny:
        if diagnostics is not None:
            diagnostics.add("no_r_peaks", "ECG carries no QRS energy", channel=ecg.label)
        return []

    refractory = _ms(refractory_ms, fs)
    candidates, props = find_peaks(integrated, distance=refractory, height=1e-6 * scale)
    heights = props["peak_heights"]

    history: deque[float] = deque([float(np.percentile(integrated, 98))], maxlen=AnalysisDefaults.R_HISTORY)
    accepted: list[int] = []
    for index, height in zip(candidates, heights):
        if height >= threshold_ratio * float(np.median(history)):
            accepted.append(int(index))
            history.append(float(height))

    half = _ms(AnalysisDefaults.R_REFINE_MS, fs)
    refined = sorted({_refine(raw, index, half) for index in accepted})

    peaks: list[int] = []
    for index in refined:
        if peaks and index - peaks[-1] < refractory:
            if raw[index] > raw[peaks[-1]]:
                peaks[-1] = index
            continue
        peaks.append(index)

    if not peaks and diagnostics is not None:
        diagnostics.add("no_r_peaks", "no QRS complex passed the adaptive threshold", channel=ecg.label)
    return peaks


def detect_pulse_onsets(
    ppg: SampledSignal,
    *,
    r_peaks: Sequence[int] | None = None,
    window_ms: float = AnalysisDefaults.ONSET_SMOOTHING_WINDOW_MS,
    poly_order: int = AnalysisDefaults.SMOOTHING_POLY_ORDER,
    min_distance_ms: float = AnalysisDefaults.ONSET_MIN_DISTANCE_MS,
    prominence_ratio: float = AnalysisDefaults.ONSET_PROMINENCE_RATIO,
    pair_window_ms: tuple[float, float] = AnalysisDefaults.PAIR_WINDOW_MS,
    refine: bool = True,
    diagnostics: DiagnosticLog | None = None,
) -> list[int]:
    """
    Detect the foot (valley) of every PPG pulse.

    Coarse feet are prominent minima of the heavily smoothed PPG. When
    `r_peaks` is given, only the first valley inside each 50-700 ms post-R
    window is kept, which rejects diastolic ripple between pulses. With
    `refine`, each foot then moves to the minimum of a line-plus-Gaussian model
    fitted to the raw upstroke, which removes the smoothing bias and most of
    the noise.

    Returns:
        Strictly increasing sample indices at least `min_distance_ms` apart.

    Raises:
        InvalidInputError: If the PPG is shorter than 2 s.
    """
    _require_duration(ppg, "onset detection")
    fs = ppg.fs
    x = smooth(ppg, window_ms, poly_order).samples
    spread = float(np.percentile(x, 95) - np.percentile(x, 5))
    if np.ptp(x) == 0 or spread <= 0:
        if diagnostics is not None:
            diagnostics.add("no_onsets", "PPG has no pulsatile component", channel=ppg.label)
        return []

    # Snap rounding-level ripple so flat stretches stay flat.
    quantum = spread * 1e-9
    x = np.round(x / quantum) * quantum
    distance = _ms(min_distance_ms, fs)
    onsets = [int(v) for v in _valleys(x, fs, distance, prominence_ratio * spread)]

    if r_peaks is not None:
        lo, hi = (_ms(ms, fs) for ms in pair_window_ms)
        positions = np.asarray(onsets, dtype=np.int64)
        anchored: set[int] = set()
        for r in r_peaks:
            start = int(np.searchsorted(positions, r + lo, side="left"))
            if start < positions.size and positions[start] <= r + hi:
                anchored.add(int(positions[start]))
        onsets = sorted(anchored)

    if refine:
        refined: list[int] = []
        for foot in sorted(_fit_foot(ppg.samples, x, v, fs) for v in onsets):
            if refined and foot - refined[-1] < distance:
                if x[foot] < x[refined[-1]]:
                    refined[-1] = foot
                continue
            refined.append(foot)
        onsets = refined

    if not onsets and diagnostics is not None:
        diagnostics.add("no_onsets", "no pulse foot passed the prominence threshold", channel=ppg.label)
    return onsets
