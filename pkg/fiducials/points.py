"""
PPG fiducial points FP1..FP11 of one beat.

    FP1  PPG_valley        FP7  sdPPG_d
    FP2  sdPPG_a           FP8  dPPG_valley
    FP3  dPPG_peak         FP9  sdPPG_e (dicrotic notch surrogate)
    FP4  sdPPG_b           FP10 sdPPG_f
    FP5  PPG_peak          FP11 PPG_valley_next
    FP6  sdPPG_c
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from core.errors import InvalidInputError
from core.models import Beat
from waveform.channels import SignalBundle
from waveform.signal import SampledSignal

FIDUCIAL_COUNT = 11

FIDUCIAL_NAMES: tuple[str, ...] = (
    "PPG_valley",
    "sdPPG_a",
    "dPPG_peak",
    "sdPPG_b",
    "PPG_peak",
    "sdPPG_c",
    "sdPPG_d",
    "dPPG_valley",
    "sdPPG_e",
    "sdPPG_f",
    "PPG_valley_next",
)

DICROTIC_NOTCH = 9


@dataclass(frozen=True)
class FiducialSet:
    """
    Sample indices of FP1..FP11 (1-based access) with per-point validity.

    Invalid points keep index -1. Valid points are strictly increasing.
    """

    fp: tuple[int, ...]
    valid: tuple[bool, ...]

    def __post_init__(self) -> None:
        """Eleven points, strictly ordered where valid."""
        if len(self.fp) != FIDUCIAL_COUNT or len(self.valid) != FIDUCIAL_COUNT:
            raise InvalidInputError("a fiducial set has exactly 11 points")
        present = [i for i, ok in zip(self.fp, self.valid) if ok]
        if any(b <= a for a, b in zip(present, present[1:])):
            raise InvalidInputError(f"valid fiducials must be strictly increasing: {self.fp}")

    def index(self, k: int) -> int:
        """Sample index of FP<k>; raises if FP<k> is invalid."""
        if not self.is_valid(k):
            raise InvalidInputError(f"FP{k} is not valid for this beat")
        return self.fp[k - 1]

    def is_valid(self, k: int) -> bool:
        """Validity of FP<k> (1-based)."""
        return self.valid[k - 1]

    def all_valid(self, *points: int) -> bool:
        """True when every listed FP is valid."""
        return all(self.valid[k - 1] for k in points)

    @property
    def is_complete(self) -> bool:
        """All eleven points found."""
        return all(self.valid)

    def without(self, *points: int) -> "FiducialSet":
        """Copy with the listed points marked invalid."""
        fp = list(self.fp)
        valid = list(self.valid)
        for k in points:
            fp[k - 1] = -1
            valid[k - 1] = False
        return FiducialSet(tuple(fp), tuple(valid))

    @classmethod
    def from_points(cls, points: dict[int, int]) -> "FiducialSet":
        """Build from {fp_number: sample_index}; unlisted points are invalid."""
        fp = tuple(int(points.get(k, -1)) for k in range(1, FIDUCIAL_COUNT + 1))
        valid = tuple(k in points for k in range(1, FIDUCIAL_COUNT + 1))
        return cls(fp, valid)


def _is_local_max(x: np.ndarray, i: int) -> bool:
    return 0 < i < x.size - 1 and x[i] > x[i - 1] and x[i] >= x[i + 1]


def _is_local_min(x: np.ndarray, i: int) -> bool:
    return 0 < i < x.size - 1 and x[i] < x[i - 1] and x[i] <= x[i + 1]


def _first(x: np.ndarray, lo: int, hi: int, test, sign: int = 0) -> int | None:
    """First i in [lo, hi] passing `test` (and with the required sign, if any)."""
    for i in range(max(lo, 1), min(hi, x.size - 2) + 1):
        if test(x, i) and (sign == 0 or np.sign(x[i]) == sign):
            return i
    return None


def locate_fiducials(
    ppg_signal: SampledSignal,
    dppg_signal: SampledSignal,
    sdppg_signal: SampledSignal,
    beat: Beat,
) -> FiducialSet:
    """
    Locate FP1..FP11 within one beat.

    FP1/FP11 are the beat's onsets; FP5 the PPG maximum between them; FP3 the
    dPPG maximum before FP5; FP8 the dPPG minimum after FP5. FP2 is the first
    positive sdPPG maximum in (FP1, FP3), FP4 the first negative sdPPG minimum in
    (FP3, FP5). After FP5 the sdPPG waves c, d, e, f alternate max/min/max/min:
    c and d before FP8, e and f after it. Without a c wave the pulse has no
    dicrotic structure and FP6-FP10 are all invalid.

    Raises:
        InvalidInputError: If the channels disagree or the beat does not fit
            inside them.
    """
    channels = (ppg_signal, dppg_signal, sdppg_signal)
    if len({len(c) for c in channels}) != 1 or len({c.fs for c in channels}) != 1:
        raise InvalidInputError("PPG, dPPG and sdPPG must share length and rate")
    ppg = ppg_signal.samples
    dppg = dppg_signal.samples
    sdppg = sdppg_signal.samples
    f1, f11 = beat.onset, beat.next_onset
    if f1 < 0 or f11 >= ppg.size:
        raise InvalidInputError(f"beat [{f1}, {f11}] outside signal of {ppg.size} samples")
    if f11 - f1 < 2:
        raise InvalidInputError("beat too short to hold a pulse peak")

    points: dict[int, int] = {1: f1, 11: f11}

    f5 = f1 + 1 + int(np.argmax(ppg[f1 + 1 : f11]))
    points[5] = f5

    if f5 - f1 >= 2:
        f3 = f1 + 1 + int(np.argmax(dppg[f1 + 1 : f5]))
        points[3] = f3
        a = _first(sdppg, f1 + 1, f3 - 1, _is_local_max, sign=1)
        if a is not None:
            points[2] = a
        b = _first(sdppg, f3 + 1, f5 - 1, _is_local_min, sign=-1)
        if b is not None:
            points[4] = b

    if f11 - f5 >= 2:
        f8 = f5 + 1 + int(np.argmin(dppg[f5 + 1 : f11]))
        c = _first(sdppg, f5 + 1, f8 - 1, _is_local_max)
        if c is not None:
            points[6] = c
            points[8] = f8
            d = _first(sdppg, c + 1, f8 - 1, _is_local_min)
            if d is not None:
                points[7] = d
            e = _first(sdppg, f8 + 1, f11 - 1, _is_local_max)
            if e is not None:
                points[9] = e
                f = _first(sdppg, e + 1, f11 - 1, _is_local_min)
                if f is not None:
                    points[10] = f

    # Keep only points that continue a strictly increasing chain.
    ordered: dict[int, int] = {}
    last = -1
    for k in range(1, FIDUCIAL_COUNT + 1):
        if k in points and points[k] > last:
            ordered[k] = points[k]
            last = points[k]
    return FiducialSet.from_points(ordered)


def locate_in_bundle(signals: SignalBundle, beat: Beat) -> FiducialSet:
    """locate_fiducials on the smoothed channels of a SignalBundle."""
    return locate_fiducials(signals.ppg, signals.dppg, signals.sdppg, beat)
