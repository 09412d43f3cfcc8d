"""Per-beat reference blood pressure from the arterial waveform."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from core.errors import InvalidInputError
from core.models import Beat, BeatBP, DiagnosticLog
from waveform.signal import SampledSignal


def beat_bp(abp: SampledSignal, beat: Beat) -> BeatBP:
    """
    SBP, DBP, MBP and PP over the beat window [onset, next_onset).

    MBP is the time average of the waveform over the window (not DBP + PP/3).
    A window with no pulse pressure is returned flagged degenerate.

    Raises:
        InvalidInputError: If the window does not fit inside the waveform.
    """
    lo, hi = beat.onset, beat.next_onset
    if lo < 0 or hi > len(abp) or hi - lo < 1:
        raise InvalidInputError(f"beat window [{lo}, {hi}) outside ABP of {len(abp)} samples")
    window = abp.samples[lo:hi]
    sbp = float(np.max(window))
    dbp = float(np.min(window))
    # the sample mean can round just outside the extrema on flat windows
    mbp = float(np.clip(np.mean(window), dbp, sbp))
    pp = sbp - dbp
    return BeatBP(sbp=sbp, dbp=dbp, mbp=mbp, pp=pp, degenerate=pp <= 0)


def bp_series(
    abp: SampledSignal,
    beats: Sequence[Beat],
    diagnostics: DiagnosticLog | None = None,
) -> list[BeatBP]:
    """beat_bp for every beat, noting degenerate windows."""
    values = [beat_bp(abp, beat) for beat in beats]
    degenerate = sum(1 for bp in values if bp.degenerate)
    if degenerate and diagnostics is not None:
        diagnostics.add(
            "degenerate_bp",
            f"{degenerate} beats have no pulse pressure and are excluded from association",
            count=degenerate,
        )
    return values
