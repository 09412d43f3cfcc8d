"""Pair R peaks with PPG pulse onsets into cardiac cycles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from core.config import AnalysisDefaults, RunConfig
from core.models import Beat, DiagnosticLog, Segment
from segmentation.detectors import detect_pulse_onsets, detect_r_peaks
from waveform.signal import SampledSignal


def pair_beats(
    r_peaks: Sequence[int],
    onsets: Sequence[int],
    fs: float,
    *,
    pair_window_ms: tuple[float, float] = AnalysisDefaults.PAIR_WINDOW_MS,
    rri_range_s: tuple[float, float] = AnalysisDefaults.RRI_RANGE_S,
    diagnostics: DiagnosticLog | None = None,
) -> list[Beat]:
    """
    Build beats from sorted R-peak and onset indices.

    Each R peak takes the first unused onset 50-700 ms after it; the beat ends at
    the following onset, which must itself fall no later than the next R peak's
    window. R peaks without a next R peak, a paired onset or a next onset are
    skipped and counted. Beats whose RRI falls outside the plausibility gate are
    kept with plausible=False.
    """
    r = np.asarray(r_peaks, dtype=np.int64)
    o = np.asarray(onsets, dtype=np.int64)
    lo = max(1, int(round(pair_window_ms[0] * fs / 1000.0)))
    hi = int(round(pair_window_ms[1] * fs / 1000.0))

    beats: list[Beat] = []
    unpaired = 0
    no_next = 0
    implausible = 0
    next_free = 0  # onsets before this position are used or passed
    for k in range(r.size - 1):
        r_k = int(r[k])
        r_next = int(r[k + 1])
        pos = int(np.searchsorted(o, r_k + lo, side="left"))
        pos = max(pos, next_free)
        if pos >= o.size or o[pos] > r_k + hi:
            unpaired += 1
            continue
        if pos + 1 >= o.size or o[pos + 1] > r_next + hi:
            no_next += 1
            next_free = pos + 1
            continue
        next_free = pos + 1
        rri = (r_next - r_k) / fs
        plausible = rri_range_s[0] <= rri <= rri_range_s[1]
        implausible += 0 if plausible else 1
        beats.append(
            Beat(
                r_peak=r_k,
                onset=int(o[pos]),
                next_onset=int(o[pos + 1]),
                rri=rri,
                plausible=plausible,
            )
        )

    if diagnostics is not None:
        if r.size:
            unpaired += 1  # the last R peak has no successor
        if unpaired:
            diagnostics.add(
                "unpaired_r_peaks",
                f"{unpaired} R peaks had no onset in the pairing window or no next R peak",
                count=unpaired,
            )
        if no_next:
            diagnostics.add(
                "missing_next_onset",
                f"{no_next} beats lacked a following onset",
                count=no_next,
            )
        if implausible:
            diagnostics.add(
                "implausible_rri",
                f"{implausible} beats have an RRI outside {rri_range_s[0]}-{rri_range_s[1]} s",
                count=implausible,
            )
    return beats


def assign_segments(beats: Sequence[Beat], segments: Sequence[Segment]) -> list[Beat]:
    """Label each beat with the segment containing its R peak (None if none)."""
    labeled: list[Beat] = []
    for beat in beats:
        name = next((s.name for s in segments if s.contains(beat.r_peak)), None)
        labeled.append(beat.model_copy(update={"segment": name}))
    return labeled


@dataclass
class Segmentation:
    """Detector outputs for one record."""

    r_peaks: list[int]
    onsets: list[int]
    beats: list[Beat]
    diagnostics: DiagnosticLog = field(default_factory=DiagnosticLog)


def segment_record(
    ecg: SampledSignal,
    ppg: SampledSignal,
    config: RunConfig | None = None,
    segments: Sequence[Segment] = (),
) -> Segmentation:
    """Detect R peaks and onsets, pair them and label segments."""
    config = config or RunConfig()
    diagnostics = DiagnosticLog()
    pair_window = (config.pair_min_ms, config.pair_max_ms)
    r_peaks = detect_r_peaks(
        ecg,
        refractory_ms=config.r_refractory_ms,
        threshold_ratio=config.r_threshold_ratio,
        diagnostics=diagnostics,
    )
    onsets = detect_pulse_onsets(
        ppg,
        r_peaks=r_peaks if r_peaks else None,
        window_ms=config.onset_window_ms,
        poly_order=config.poly_order,
        pair_window_ms=pair_window,
        diagnostics=diagnostics,
    )
    beats = pair_beats(
        r_peaks,
        onsets,
        ecg.fs,
        pair_window_ms=pair_window,
        rri_range_s=(config.rri_min_s, config.rri_max_s),
        diagnostics=diagnostics,
    )
    if segments:
        beats = assign_segments(beats, segments)
    return Segmentation(r_peaks=r_peaks, onsets=onsets, beats=beats, diagnostics=diagnostics)
