"""
Per-family feature computations.

Every function returns a float array of its family's length with NaN where a
value is missing (an invalid fiducial, a zero denominator, no level crossing).
PPG-derived families read the smoothed channels.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import cumulative_trapezoid

from core.models import Beat
from features.catalog import (
    AREA_PAIRS,
    FIDUCIAL_PAIRS,
    PI_DPPG_POINTS,
    PI_PPG_POINTS,
    PI_SDPPG_POINTS,
    PW_FIDUCIAL_LEVELS,
    PW_LEVELS,
)
from fiducials.points import DICROTIC_NOTCH, FiducialSet
from waveform.filters import Direction, level_crossings
from waveform.signal import SampledSignal


def _ratio(num: float, den: float) -> float:
    if den == 0 or not np.isfinite(num) or not np.isfinite(den):
        return np.nan
    return num / den


def ptt_features(fids: FiducialSet, beat: Beat, fs: float) -> np.ndarray:
    """PTT_k = t(FP_k) - t(R peak), k = 1..10."""
    out = np.full(10, np.nan)
    for k in range(1, 11):
        if fids.is_valid(k):
            out[k - 1] = (fids.fp[k - 1] - beat.r_peak) / fs
    return out


def td_features(fids: FiducialSet, beat: Beat, fs: float) -> np.ndarray:
    """RRI followed by t(FP_j) - t(FP_i) for the 55 pairs in lexicographic order."""
    out = np.full(1 + len(FIDUCIAL_PAIRS), np.nan)
    out[0] = beat.rri
    for n, (i, j) in enumerate(FIDUCIAL_PAIRS, start=1):
        if fids.all_valid(i, j):
            out[n] = (fids.fp[j - 1] - fids.fp[i - 1]) / fs
    return out


def pulse_width(ppg: SampledSignal, fids: FiducialSet, level: float) -> float:
    """
    Width of the pulse at an absolute level.

    Uses the last upward crossing in [FP1, FP5] and the first downward crossing
    in [FP5, FP11]; NaN when the level is at or above the peak or a crossing is
    missing.
    """
    f1, f5, f11 = fids.fp[0], fids.fp[4], fids.fp[10]
    if not level < ppg.samples[f5]:
        return np.nan
    rising = [c for c in level_crossings(ppg, level, (f1, f5 + 1)) if c.direction is Direction.RISING]
    falling = [c for c in level_crossings(ppg, level, (f5, f11 + 1)) if c.direction is Direction.FALLING]
    if not rising or not falling:
        return np.nan
    return falling[0].time - rising[-1].time


def pw_features(ppg: SampledSignal, fids: FiducialSet) -> np.ndarray:
    """Widths at 50/60/70% of the amplitude, then at the levels of FP2,3,4,6,7,8,9."""
    out = np.full(len(PW_LEVELS) + len(PW_FIDUCIAL_LEVELS), np.nan)
    if not fids.all_valid(1, 5, 11):
        return out
    x = ppg.samples
    base = x[fids.fp[0]]
    amplitude = x[fids.fp[4]] - base
    if amplitude <= 0:
        return out
    for n, fraction in enumerate(PW_LEVELS):
        out[n] = pulse_width(ppg, fids, base + fraction * amplitude)
    for n, k in enumerate(PW_FIDUCIAL_LEVELS, start=len(PW_LEVELS)):
        if fids.is_valid(k):
            out[n] = pulse_width(ppg, fids, x[fids.fp[k - 1]])
    return out


def am_features(ppg: SampledSignal, fids: FiducialSet) -> np.ndarray:
    """Signed PPG(FP_j) - PPG(FP_i) for the 55 pairs."""
    x = ppg.samples
    out = np.full(len(FIDUCIAL_PAIRS), np.nan)
    for n, (i, j) in enumerate(FIDUCIAL_PAIRS):
        if fids.all_valid(i, j):
            out[n] = x[fids.fp[j - 1]] - x[fids.fp[i - 1]]
    return out


def pi_features(
    ppg: SampledSignal,
    dppg: SampledSignal,
    sdppg: SampledSignal,
    fids: FiducialSet,
) -> np.ndarray:
    """Channel intensities at fiducials: PPG at FP1..10, dPPG at 1,3,8, sdPPG at 2,4,7,8,9,10."""
    plan = (
        [(ppg.samples, k) for k in PI_PPG_POINTS]
        + [(dppg.samples, k) for k in PI_DPPG_POINTS]
        + [(sdppg.samples, k) for k in PI_SDPPG_POINTS]
    )
    out = np.full(len(plan), np.nan)
    for n, (channel, k) in enumerate(plan):
        if fids.is_valid(k):
            out[n] = channel[fids.fp[k - 1]]
    return out


def _cumulative_area(ppg: SampledSignal, fids: FiducialSet) -> np.ndarray:
    """Running integral of PPG - PPG(FP1) from FP1 to FP11, one value per sample."""
    f1, f11 = fids.fp[0], fids.fp[10]
    y = ppg.samples[f1 : f11 + 1] - ppg.samples[f1]
    return cumulative_trapezoid(y, dx=1.0 / ppg.fs, initial=0.0)


def _area(cumulative: np.ndarray, fids: FiducialSet, i: int, j: int) -> float:
    f1 = fids.fp[0]
    return float(cumulative[fids.fp[j - 1] - f1] - cumulative[fids.fp[i - 1] - f1])


def ar_features(ppg: SampledSignal, fids: FiducialSet, fs: float | None = None) -> np.ndarray:
    """
    Trapezoidal area of PPG - PPG(FP1) between FP_i and FP_j for the 54 pairs.

    The pair (FP1, FP11) is omitted: it is the sum of the consecutive-pair areas.
    `fs` defaults to the signal's own rate.
    """
    if fs is not None and fs != ppg.fs:
        ppg = SampledSignal(ppg.samples, fs, ppg.label)
    out = np.full(len(AREA_PAIRS), np.nan)
    if not fids.all_valid(1, 11):
        return out
    cumulative = _cumulative_area(ppg, fids)
    for n, (i, j) in enumerate(AREA_PAIRS):
        if fids.all_valid(i, j):
            out[n] = _area(cumulative, fids, i, j)
    return out


def ri_features(
    ppg: SampledSignal,
    dppg: SampledSignal,
    sdppg: SampledSignal,
    fids: FiducialSet,
    beat: Beat,
    *,
    ppg_raw: SampledSignal | None = None,
) -> np.ndarray:
    """
    The 18 relative indices (see features.catalog for the list).

    The perfusion index uses `ppg_raw` (unsmoothed, DC preserved) when given.
    """
    out = np.full(18, np.nan)
    if not fids.all_valid(1, 5):
        return out
    x = ppg.samples
    fs = ppg.fs
    p = {k: x[fids.fp[k - 1]] for k in range(1, 12) if fids.is_valid(k)}
    t = {k: fids.fp[k - 1] / fs for k in range(1, 12) if fids.is_valid(k)}
    amplitude = p[5] - p[1]
    if amplitude <= 0:
        return out
    notch = DICROTIC_NOTCH

    out[0] = _ratio(t[5] - t[1], beat.rri)
    if 11 in t:
        out[1] = _ratio(t[5] - t[1], t[11] - t[1])
    if notch in t:
        out[2] = _ratio(t[notch] - t[1], beat.rri)
        out[3] = (p[notch] - p[1]) / amplitude
    if notch in p and 11 in p:
        slope = (p[11] - p[1]) / (t[11] - t[1])
        baseline_notch = p[1] + slope * (t[notch] - t[1])
        baseline_peak = p[1] + slope * (t[5] - t[1])
        out[4] = _ratio(p[notch] - baseline_notch, p[5] - baseline_peak)
    if 6 in p:
        out[5] = (p[5] - p[6]) / amplitude
    if notch in t and 11 in t:
        cumulative = _cumulative_area(ppg, fids)
        out[6] = _ratio(_area(cumulative, fids, notch, 11), _area(cumulative, fids, 1, notch))
    if fids.is_valid(3):
        out[7] = _ratio(amplitude, dppg.samples[fids.fp[2]])

    sd = {k: sdppg.samples[fids.fp[k - 1]] for k in (2, 4, 6, 7, 9) if fids.is_valid(k)}
    if 2 in sd:
        a = sd[2]
        for n, k in enumerate((4, 6, 7, 9), start=8):
            if k in sd:
                out[n] = _ratio(sd[k], a)
        if all(k in sd for k in (4, 6, 7)):
            out[12] = _ratio(sd[6] + sd[7] - sd[4], a)
            out[13] = -out[12]
            if 9 in sd:
                out[14] = _ratio(sd[4] - sd[6] - sd[7] - sd[9], a)

    out[15] = _ratio(p[5], p[1])
    if 11 in t:
        raw = (ppg_raw if ppg_raw is not None else ppg).samples
        dc = float(np.mean(raw[fids.fp[0] : fids.fp[10]]))
        out[16] = _ratio(100.0 * amplitude, dc)
    if notch in t and 11 in t and fids.fp[10] - fids.fp[notch - 1] >= 2:
        reflected = float(np.max(x[fids.fp[notch - 1] + 1 : fids.fp[10]]))
        out[17] = (reflected - p[1]) / amplitude
    return out
