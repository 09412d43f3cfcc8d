"""
Deterministic synthetic ECG / PPG / ABP records with planted ground truth.

Generation order (fixed, so a seed reproduces every sample bitwise):

1. R-peak times at integer samples from the heart-rate profile.
2. Per-beat BP: DBP and pulse pressure vary around their base, SBP and MBP
   follow. An MBP tie bends the per-beat MBP fraction instead.
3. Per-beat pulse-shape jitter, widened inside the drug segment, then the
   coupling noise draws.
4. Clean ECG, and a clean PPG with a virtual pulse before the first R peak so
   the first pulse has a foot.
5. The pulse parameter of each coupled feature is adjusted beat by beat until
   the feature, measured by the analysis pipeline at the planted beat windows,
   equals base * (1 + gain * zscore(component) + noise).
6. ABP whose extremes and time average over each planted beat window hit that
   beat's BP, with flat guards at the window edges.
7. Optional measurement noise on ECG and PPG.

Planted onsets and apexes are the minimum and maximum of the clean PPG around
each pulse; the planted upstroke is the steepest clean-PPG sample between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from core.config import RunConfig
from core.errors import ConfigError, DegenerateSeriesError, InvalidInputError
from core.models import Beat, BeatBP, BPComponent, Segment
from features.catalog import Family, feature
from features.vector import extract_all
from fiducials.points import locate_in_bundle
from synth.config import MBP_FRACTION_RANGE, SEGMENT_LABELS, Coupling, Knob, SynthConfig
from waveform.channels import derive_channels
from waveform.filters import zscore
from waveform.signal import SampledSignal

FIRST_BEAT_S = 0.4
"""Time of the first R peak."""

# Gaussian lobes are evaluated within this many sd of their centre.
_SUPPORT_SD = 8.0

# Systolic lobe centre, diastolic centre and width, and f-lobe centre, in units
# of the (jittered) systolic width.
_SYSTOLIC_CENTER = 3.0
_DIASTOLIC_CENTER = 5.14
_DIASTOLIC_WIDTH = 1.14
_F_WAVE_CENTER = 12.14
_RUNOFF_CENTER = 0.62  # fraction of the beat period
_RUNOFF_WIDTH = 0.25

# Monophasic pulses: one broad late lobe, no dicrotic structure.
_MONOPHASIC_RATIO = 0.35
_MONOPHASIC_CENTER = 4.5
_MONOPHASIC_WIDTH = 1.5

# ECG waves: (amplitude mV, offset from R s, sd s)
_ECG_WAVES: tuple[tuple[float, float, float], ...] = (
    (0.15, -0.16, 0.020),  # P
    (1.0, 0.0, 0.008),  # QRS
    (0.3, 0.25, 0.040),  # T
)

_PEAK_FRACTION = 0.3
"""Position of the systolic pressure peak within the pressure pulse."""

_GUARD_S = 0.015
"""Flat ABP stretch on each side of a beat boundary."""

# Onsets are searched from the foot minus this much (or 20% of the period).
_ONSET_LOOKBACK_S = 0.1
# A beat is planted only if the next pulse's foot leaves this much record.
_TAIL_MARGIN_S = 0.15

_MAX_ROUNDS = 8
_RELATIVE_TOLERANCE = 1e-9
_FIRST_STEP: dict[Knob, float] = {
    Knob.WIDTH: math.log(1.05),
    Knob.AMPLITUDE: math.log(1.05),
    Knob.DIASTOLIC_RATIO: math.log(1.05),
    Knob.TRANSIT_DELAY: 0.005,
}
_KNOB_FIELDS: dict[Knob, str] = {
    Knob.WIDTH: "width",
    Knob.AMPLITUDE: "amplitude",
    Knob.DIASTOLIC_RATIO: "ratio",
    Knob.TRANSIT_DELAY: "delay",
}
_SAMPLED_FAMILIES = frozenset({Family.PTT, Family.TD})


class TruthBeat(BaseModel):
    """Planted values of one beat the analysis pipeline also sees."""

    model_config = ConfigDict(frozen=True)

    r_peak: int
    onset: int
    next_onset: int
    apex: Optional[int] = None
    upstroke: Optional[int] = None
    bp: BeatBP
    drivers: dict[str, float] = Field(default_factory=dict)
    """Coupled features as measured on the clean record."""
    targets: dict[str, float] = Field(default_factory=dict)
    """Values the couplings asked for."""
    segment: Optional[str] = None


class GroundTruth(BaseModel):
    """Everything planted in a synthetic record."""

    fs: float
    r_peaks: list[int]
    beats: list[TruthBeat]
    segments: list[Segment] = Field(default_factory=list)
    planted: list[BPComponent] = Field(default_factory=list)
    calibration_error: dict[str, float] = Field(default_factory=dict)
    """Largest |driver - target| per coupled feature, relative to |target|."""

    def bp_values(self, component: BPComponent) -> np.ndarray:
        """Per-beat values of one BP component."""
        return np.array([b.bp.component(component) for b in self.beats], dtype=np.float64)

    def driver_values(self, name: str) -> np.ndarray:
        """Per-beat values of one coupled feature."""
        return np.array([b.drivers.get(name, np.nan) for b in self.beats], dtype=np.float64)

    def target_values(self, name: str) -> np.ndarray:
        """Per-beat values a coupling asked for."""
        return np.array([b.targets.get(name, np.nan) for b in self.beats], dtype=np.float64)


@dataclass(frozen=True)
class _Pulses:
    """Per-beat pulse parameters; row 0 is the virtual pulse before the first R peak."""

    starts: np.ndarray  # R-peak samples; row 0 may be negative
    periods: np.ndarray
    width: np.ndarray
    amplitude: np.ndarray
    ratio: np.ndarray
    runoff: np.ndarray
    delay: np.ndarray

    def knob(self, knob: Knob) -> np.ndarray:
        return getattr(self, _KNOB_FIELDS[knob])

    def with_knob(self, knob: Knob, values: np.ndarray) -> "_Pulses":
        return replace(self, **{_KNOB_FIELDS[knob]: values})

    def feet(self, fs: float) -> np.ndarray:
        return self.starts / fs + self.delay


@dataclass(frozen=True)
class _Landmarks:
    """Clean-PPG landmarks per real beat; -1 where the pulse leaves the record."""

    onset: np.ndarray
    apex: np.ndarray
    upstroke: np.ndarray


def _add_gaussian(out: np.ndarray, fs: float, amplitude: float, center: float, sd: float) -> None:
    lo = max(0, int(math.floor((center - _SUPPORT_SD * sd) * fs)))
    hi = min(out.size, int(math.ceil((center + _SUPPORT_SD * sd) * fs)) + 1)
    if lo >= hi:
        return
    t = np.arange(lo, hi) / fs
    out[lo:hi] += amplitude * np.exp(-0.5 * ((t - center) / sd) ** 2)


def _r_peaks(config: SynthConfig, n: int) -> np.ndarray:
    peaks: list[int] = []
    t = FIRST_BEAT_S
    while True:
        r = int(round(t * config.fs))
        if r >= n:
            break
        peaks.append(r)
        t = r / config.fs + 60.0 / config.heart_rate_at(r / config.fs)
    return np.asarray(peaks, dtype=np.int64)


def _drug_bounds(config: SynthConfig, n: int) -> Optional[tuple[int, int]]:
    if config.drug is None:
        return None
    return int(round(config.drug.start_fraction * n)), int(round(config.drug.end_fraction * n))


def _drug_level(r_peaks: np.ndarray, bounds: Optional[tuple[int, int]]) -> np.ndarray:
    """sin^2 bump over the drug segment, zero elsewhere."""
    level = np.zeros(r_peaks.size)
    if bounds is None:
        return level
    start, end = bounds
    inside = (r_peaks >= start) & (r_peaks < end)
    level[inside] = np.sin(np.pi * (r_peaks[inside] - start) / (end - start)) ** 2
    return level


def _segments(n: int, bounds: Optional[tuple[int, int]]) -> list[Segment]:
    if bounds is None:
        return []
    start, end = bounds
    edges = (0, start, end, n)
    return [
        Segment(name=label, start=edges[i], end=edges[i + 1])
        for i, label in enumerate(SEGMENT_LABELS)
    ]


def _unit_pulse(length: int) -> np.ndarray:
    """Raised-cosine rise to 1 at the peak fraction, raised-cosine fall after it."""
    j = np.arange(length, dtype=np.float64)
    peak = max(1, int(round(_PEAK_FRACTION * length)))
    return np.where(
        j <= peak,
        0.5 * (1.0 - np.cos(np.pi * j / peak)),
        0.5 * (1.0 + np.cos(np.pi * (j - peak) / (length - peak))),
    )


def pressure_shape(length: int, mean_fraction: float) -> np.ndarray:
    """
    Unit pressure pulse over `length` samples.

    Starts at 0, peaks at exactly 1 near 30% of the window and averages
    `mean_fraction`: a raised-cosine pulse u raised to the power that sets the
    mean.

    Raises:
        ConfigError: If the window is too short or the mean cannot be reached.
    """
    if length < 4:
        raise ConfigError(f"beat window of {length} samples is too short for a pressure pulse")
    u = _unit_pulse(length)

    def excess(power: float) -> float:
        return float(np.mean(u**power)) - mean_fraction

    lo, hi = 1e-3, 1e3
    if not excess(hi) < 0.0 < excess(lo):
        raise ConfigError(f"MBP fraction {mean_fraction} unreachable for a {length}-sample window")
    power = brentq(excess, lo, hi, xtol=1e-14, rtol=1e-14)
    return u**power


def _standardized(values: np.ndarray, groups: list[Optional[str]], name: str) -> np.ndarray:
    """zscore within each group."""
    z = np.zeros(values.size)
    labels = np.asarray([g if g is not None else "" for g in groups])
    for label in sorted(set(labels.tolist())):
        chosen = labels == label
        try:
            z[chosen] = zscore(values[chosen])
        except (DegenerateSeriesError, InvalidInputError) as exc:
            where = f" in segment {label!r}" if label else ""
            raise ConfigError(f"{name} does not vary{where}: {exc}") from exc
    return z


def _draw_bp(
    config: SynthConfig, r_peaks: np.ndarray, n: int, level: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-beat (dbp, pp, mbp fraction)."""
    bp = config.bp
    count = r_peaks.size
    base_dbp, base_pp = bp.at(r_peaks / n)
    if config.drug is not None:
        base_dbp = base_dbp - config.drug.dbp_drop * level
        base_pp = base_pp - config.drug.pp_drop * level
    d_dbp = bp.dbp_sd * np.clip(rng.standard_normal(count), -2.5, 2.5)
    d_pp = bp.pp_sd * np.clip(rng.standard_normal(count), -2.5, 2.5)
    dbp = base_dbp + d_dbp
    pp = base_pp + d_pp
    if np.any(dbp <= 0) or np.any(pp <= 0):
        raise ConfigError("BP variation drives DBP or pulse pressure to non-positive values")

    phi = np.full(count, bp.mbp_fraction)
    tie = config.mbp_tie
    if tie is None:
        return dbp, pp, phi
    # MBP follows the tied component's beat-to-beat variation by least squares;
    # the base trends stay where the drug and ramps put them.
    driven = {BPComponent.SBP: d_dbp + d_pp, BPComponent.DBP: d_dbp, BPComponent.PP: d_pp}[tie.component]
    natural = d_dbp + bp.mbp_fraction * d_pp
    centred = driven - driven.mean()
    spread = float(np.dot(centred, centred))
    if spread == 0.0:
        raise ConfigError(f"cannot tie MBP to {tie.component.value}: it does not vary beat to beat")
    beta = float(np.dot(natural - natural.mean(), centred)) / spread
    phi = phi + (beta * driven - natural) / pp
    lo, hi = MBP_FRACTION_RANGE
    if np.any(phi < lo) or np.any(phi > hi):
        raise ConfigError(
            f"tying MBP to {tie.component.value} needs MBP fractions outside {lo}-{hi}; "
            "lower dbp_sd or raise the base pulse pressure"
        )
    return dbp, pp, phi


def _render_ppg(config: SynthConfig, n: int, pulses: _Pulses) -> np.ndarray:
    fs = config.fs
    pulse = config.pulse
    ppg = np.full(n, pulse.dc_offset)
    feet = pulses.feet(fs)
    for k in range(feet.size):
        foot = feet[k]
        w = pulses.width[k]
        amplitude = pulses.amplitude[k]
        _add_gaussian(ppg, fs, amplitude, foot + _SYSTOLIC_CENTER * w, w)
        if pulse.dicrotic:
            _add_gaussian(ppg, fs, amplitude * pulses.ratio[k], foot + _DIASTOLIC_CENTER * w, _DIASTOLIC_WIDTH * w)
            _add_gaussian(ppg, fs, pulse.f_wave_amplitude, foot + _F_WAVE_CENTER * w, pulse.f_wave_width_s)
        else:
            _add_gaussian(ppg, fs, amplitude * _MONOPHASIC_RATIO, foot + _MONOPHASIC_CENTER * w, _MONOPHASIC_WIDTH * w)
        period = pulses.periods[k]
        _add_gaussian(ppg, fs, pulses.runoff[k], foot + _RUNOFF_CENTER * period, _RUNOFF_WIDTH * period)
    if config.noise.baseline_amplitude > 0:
        ppg += config.noise.baseline_amplitude * np.sin(2.0 * np.pi * config.noise.baseline_hz * np.arange(n) / fs)
    return ppg


def _landmarks(ppg: np.ndarray, fs: float, pulses: _Pulses) -> _Landmarks:
    n = ppg.size
    slope = np.gradient(ppg)
    feet = pulses.feet(fs)[1:]
    widths = pulses.width[1:]
    periods = pulses.periods[1:]
    count = feet.size
    onset = np.full(count, -1, dtype=np.int64)
    apex = np.full(count, -1, dtype=np.int64)
    upstroke = np.full(count, -1, dtype=np.int64)
    for k in range(count):
        lo = int(round((feet[k] - min(_ONSET_LOOKBACK_S, 0.2 * periods[k])) * fs))
        mid = int(round((feet[k] + 2.0 * widths[k]) * fs)) + 1
        top = min(n, int(round((feet[k] + 6.0 * widths[k]) * fs)) + 1)
        if lo < 0 or mid > n:
            continue
        o = lo + int(np.argmin(ppg[lo:mid]))
        a = o + int(np.argmax(ppg[o:top]))
        if a - o < 2:
            continue
        onset[k] = o
        apex[k] = a
        upstroke[k] = o + 1 + int(np.argmax(slope[o + 1 : a]))
    return _Landmarks(onset=onset, apex=apex, upstroke=upstroke)


def _planted_indices(config: SynthConfig, n: int, r_peaks: np.ndarray, marks: _Landmarks) -> list[int]:
    """Beats whose window and next foot sit well inside the record."""
    margin = _TAIL_MARGIN_S * config.fs
    return [
        k
        for k in range(r_peaks.size - 1)
        if marks.onset[k] >= 0 and marks.onset[k + 1] >= 0 and marks.onset[k + 1] + margin < n
    ]


def _beats(
    config: SynthConfig,
    r_peaks: np.ndarray,
    marks: _Landmarks,
    indices: list[int],
    groups: list[Optional[str]],
) -> dict[int, Beat]:
    fs = config.fs
    run = RunConfig()
    beats: dict[int, Beat] = {}
    for k in indices:
        onset, next_onset = int(marks.onset[k]), int(marks.onset[k + 1])
        if onset < 0 or next_onset < 0:
            raise ConfigError(f"the pulse of beat {k} left the record")
        lag_ms = (onset - int(r_peaks[k])) * 1000.0 / fs
        if not run.pair_min_ms <= lag_ms <= run.pair_max_ms:
            raise ConfigError(
                f"beat {k} onset lands {lag_ms:.0f} ms after its R peak, "
                f"outside {run.pair_min_ms:.0f}-{run.pair_max_ms:.0f} ms"
            )
        beats[k] = Beat(
            r_peak=int(r_peaks[k]),
            onset=onset,
            next_onset=next_onset,
            rri=float(r_peaks[k + 1] - r_peaks[k]) / fs,
            segment=groups[k],
        )
    return beats


def _measure(ppg: np.ndarray, fs: float, beats: dict[int, Beat], names: list[str], count: int) -> dict[str, np.ndarray]:
    """Coupled features as the analysis pipeline reads them at the given beat windows."""
    run = RunConfig()
    bundle = derive_channels(SampledSignal(ppg, fs, "ppg"), run.smoothing_window_ms, run.poly_order)
    indices = {name: feature(name).index for name in names}
    values = {name: np.full(count, np.nan) for name in names}
    for k, beat in beats.items():
        vector = extract_all(bundle, locate_in_bundle(bundle, beat), beat)
        for name, index in indices.items():
            values[name][k] = vector[index]
    return values


def _forward(knob: Knob, values: np.ndarray) -> np.ndarray:
    return values.copy() if knob is Knob.TRANSIT_DELAY else np.log(values)


def _backward(knob: Knob, x: np.ndarray) -> np.ndarray:
    return x.copy() if knob is Knob.TRANSIT_DELAY else np.exp(x)


@dataclass
class _Search:
    """Secant search state of one coupled feature over all beats."""

    coupling: Coupling
    target: np.ndarray
    x: np.ndarray
    best_x: np.ndarray
    best_error: np.ndarray
    sampled: bool
    previous: Optional[tuple[np.ndarray, np.ndarray]] = None
    slope: Optional[np.ndarray] = None

    def advance(self, measured: np.ndarray, active: np.ndarray, fs: float) -> bool:
        """Record a round's measurements; step open beats and return True while any remain open."""
        error = np.where(active, np.abs(measured - self.target), 0.0)
        better = error < self.best_error
        self.best_x[better] = self.x[better]
        self.best_error[better] = error[better]
        tolerance = 0.5 / fs if self.sampled else _RELATIVE_TOLERANCE * np.abs(self.target)
        still_open = active & (error > tolerance)
        if not still_open.any():
            return False

        first = _FIRST_STEP[self.coupling.knob]
        if self.previous is None:
            step = np.full(self.x.size, first)
        else:
            slope = self.slope
            if slope is None:
                x0, y0 = self.previous
                with np.errstate(divide="ignore", invalid="ignore"):
                    slope = (measured - y0) / (self.x - x0)
                # Sampled features only resolve the first, coarse step.
                if self.sampled:
                    self.slope = slope
            usable = np.isfinite(slope) & (slope != 0.0)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(usable, (self.target - measured) / np.where(usable, slope, 1.0), first)
        self.previous = (self.x.copy(), measured.copy())
        self.x = self.x + np.where(still_open, step, 0.0)
        return True


def _calibrate(
    config: SynthConfig,
    n: int,
    pulses: _Pulses,
    r_peaks: np.ndarray,
    indices: list[int],
    groups: list[Optional[str]],
    targets: dict[str, np.ndarray],
) -> tuple[_Pulses, np.ndarray, _Landmarks, dict[int, Beat], dict[str, np.ndarray]]:
    """
    Set each coupled feature's pulse parameter per beat so the feature hits its target.

    Multiplicative parameters are searched in log space, the transit delay
    directly. Each round re-renders the PPG and re-measures every planted beat,
    so neighbouring pulses that overlap are accounted for.
    """
    fs = config.fs
    count = r_peaks.size
    active = np.zeros(count, dtype=bool)
    active[indices] = True
    searches: list[_Search] = []
    for coupling in config.drivers:
        x = _forward(coupling.knob, pulses.knob(coupling.knob)[1:])
        searches.append(
            _Search(
                coupling=coupling,
                target=targets[coupling.feature],
                x=x,
                best_x=x.copy(),
                best_error=np.full(count, np.inf),
                sampled=feature(coupling.feature).family in _SAMPLED_FAMILIES,
            )
        )
    names = [s.coupling.feature for s in searches]

    def render(use_best: bool) -> tuple[_Pulses, np.ndarray, _Landmarks, dict[int, Beat], dict[str, np.ndarray]]:
        current = pulses
        for search in searches:
            knob = search.coupling.knob
            values = current.knob(knob).copy()
            values[1:] = _backward(knob, search.best_x if use_best else search.x)
            current = current.with_knob(knob, values)
        ppg = _render_ppg(config, n, current)
        marks = _landmarks(ppg, fs, current)
        beats = _beats(config, r_peaks, marks, indices, groups)
        measured = _measure(ppg, fs, beats, names, count)
        for name in names:
            lost = active & ~np.isfinite(measured[name])
            if lost.any():
                raise ConfigError(f"{name} cannot be measured on beat {int(np.flatnonzero(lost)[0])}")
        return current, ppg, marks, beats, measured

    for _ in range(_MAX_ROUNDS):
        result = render(use_best=False)
        measured = result[4]
        still_open = [search.advance(measured[search.coupling.feature], active, fs) for search in searches]
        if not any(still_open):
            return result
    return render(use_best=True)


def _guarded_beat(
    length: int, guard: int, start: float, dbp: float, pp: float, end: float, mbp: float
) -> np.ndarray:
    """
    One ABP beat window: a flat guard at `start`, a ramp down to `dbp`, the
    pressure pulse, a ramp up to `end` and a flat guard at `end`. The window
    mean is `mbp`.
    """
    middle = length - 4 * guard
    if middle < 4:
        raise ConfigError(f"beat window of {length} samples is too short for a pressure pulse")
    head = np.linspace(start, dbp, guard + 2)[1:-1]
    tail = np.linspace(dbp, end, guard + 2)[1:-1]
    fixed = guard * start + head.sum() + tail.sum() + guard * end + middle * dbp
    fraction = (length * mbp - fixed) / (pp * middle)
    return np.concatenate(
        [
            np.full(guard, start),
            head,
            dbp + pp * pressure_shape(middle, fraction),
            tail,
            np.full(guard, end),
        ]
    )


def _render_abp(
    n: int, fs: float, beats: dict[int, Beat], dbp: np.ndarray, pp: np.ndarray, phi: np.ndarray
) -> np.ndarray:
    """
    ABP over the planted beats. Boundary guards hold the higher of the two
    neighbouring diastolic pressures, so a window read a few samples off still
    sees the same minimum, maximum and (nearly) the same mean.
    """
    guard = max(1, int(round(_GUARD_S * fs)))
    keys = sorted(beats)
    abp = np.full(n, np.nan)
    for k in keys:
        beat = beats[k]
        start = max(dbp[k - 1], dbp[k]) if k - 1 in beats else dbp[k]
        end = max(dbp[k], dbp[k + 1])
        if max(start, end) > dbp[k] + pp[k]:
            raise ConfigError(f"DBP jumps by more than the pulse pressure around beat {k}; lower dbp_sd")
        abp[beat.onset : beat.next_onset] = _guarded_beat(
            beat.next_onset - beat.onset, guard, start, dbp[k], pp[k], end, dbp[k] + phi[k] * pp[k]
        )
    # Outside the planted windows the pressure holds its nearest guard level.
    return pd.Series(abp).ffill().bfill().to_numpy()


def generate_record(
    config: SynthConfig,
) -> tuple[SampledSignal, SampledSignal, SampledSignal, GroundTruth]:
    """
    Generate one synchronized ECG / PPG / ABP record.

    Returns:
        (ecg, ppg, abp, truth). Identical configs give bitwise identical output.

    Raises:
        ConfigError: If the pulse shape, the BP variation or the couplings are
            infeasible (non-positive widths or BP, a component that never
            varies, a feature the pipeline cannot measure, an onset outside the
            pairing window).
    """
    fs = config.fs
    n = int(round(config.duration_s * fs))
    rng = np.random.default_rng(config.seed)
    r_peaks = _r_peaks(config, n)
    count = r_peaks.size
    if count < 3:
        raise ConfigError("record too short to hold three beats")
    periods = np.append(np.diff(r_peaks) / fs, 60.0 / config.heart_rate_at(r_peaks[-1] / fs))

    bounds = _drug_bounds(config, n)
    level = _drug_level(r_peaks, bounds)
    segments = _segments(n, bounds)
    groups: list[Optional[str]] = [
        next((s.name for s in segments if s.contains(int(r))), None) for r in r_peaks
    ]

    dbp, pp, phi = _draw_bp(config, r_peaks, n, level, rng)
    components = {
        BPComponent.SBP: dbp + pp,
        BPComponent.DBP: dbp,
        BPComponent.MBP: dbp + phi * pp,
        BPComponent.PP: pp,
    }

    def jitter(sd: float) -> np.ndarray:
        return sd * np.clip(rng.standard_normal(count), -2.5, 2.5)

    pulse = config.pulse
    widening = np.ones(count)
    if config.drug is not None:
        widening += config.drug.width_gain * level
    base_width = pulse.systolic_width_s * widening
    width = base_width * (1.0 + jitter(config.jitter.width))
    amplitude = pulse.systolic_amplitude * (1.0 + jitter(config.jitter.systolic_amplitude))
    ratio = pulse.diastolic_ratio * (1.0 + jitter(config.jitter.diastolic_ratio))
    runoff = pulse.runoff_amplitude * (1.0 + jitter(config.jitter.runoff))
    delay = config.transit_delay_s + jitter(config.jitter.transit_delay_s)
    if np.any(width <= 0) or np.any(amplitude <= 0) or np.any(ratio <= 0) or np.any(runoff < 0):
        raise ConfigError("pulse jitter produced a non-positive width or amplitude")
    if np.any(delay <= 0):
        raise ConfigError("transit delay jitter produced a non-positive delay")
    drivers = config.drivers
    coupling_noise = {c.feature: rng.standard_normal(count) for c in drivers}

    def with_virtual(head: float, values: np.ndarray) -> np.ndarray:
        return np.concatenate([[head], values])

    starts = with_virtual(r_peaks[0] - round(periods[0] * fs), r_peaks.astype(np.float64))
    all_periods = with_virtual(periods[0], periods)
    reference = _Pulses(
        starts=starts,
        periods=all_periods,
        width=with_virtual(pulse.systolic_width_s, base_width),
        amplitude=np.full(count + 1, pulse.systolic_amplitude),
        ratio=np.full(count + 1, pulse.diastolic_ratio),
        runoff=np.full(count + 1, pulse.runoff_amplitude),
        delay=np.full(count + 1, config.transit_delay_s),
    )
    pulses = _Pulses(
        starts=starts,
        periods=all_periods,
        width=with_virtual(pulse.systolic_width_s, width),
        amplitude=with_virtual(pulse.systolic_amplitude, amplitude),
        ratio=with_virtual(pulse.diastolic_ratio, ratio),
        runoff=with_virtual(pulse.runoff_amplitude, runoff),
        delay=with_virtual(config.transit_delay_s, delay),
    )

    # Clean ECG
    ecg = np.zeros(n)
    for r in r_peaks:
        for wave_amplitude, offset, sd in _ECG_WAVES:
            _add_gaussian(ecg, fs, wave_amplitude, r / fs + offset, sd)

    # Planted beats come from the un-jittered pulse train, which also gives
    # every coupled feature its per-beat base value.
    reference_ppg = _render_ppg(config, n, reference)
    reference_marks = _landmarks(reference_ppg, fs, reference)
    indices = _planted_indices(config, n, r_peaks, reference_marks)
    if len(indices) < 3:
        raise ConfigError(f"only {len(indices)} complete beats in the synthetic record")

    names = [c.feature for c in drivers]
    targets: dict[str, np.ndarray] = {}
    if drivers:
        reference_beats = _beats(config, r_peaks, reference_marks, indices, groups)
        base = _measure(reference_ppg, fs, reference_beats, names, count)
        gain_scale = np.ones(count)
        if config.drug is not None:
            gain_scale[np.array([g == SEGMENT_LABELS[1] for g in groups])] = config.drug.coupling_gain_factor
        for coupling in drivers:
            z = _standardized(components[coupling.component], groups, f"BP component {coupling.component.value}")
            relative = coupling.gain * gain_scale * z + coupling.noise_std * coupling_noise[coupling.feature]
            targets[coupling.feature] = base[coupling.feature] * (1.0 + relative)
            # Searches start from the un-jittered value on planted beats.
            values = pulses.knob(coupling.knob).copy()
            rows = np.asarray(indices) + 1
            values[rows] = reference.knob(coupling.knob)[rows]
            pulses = pulses.with_knob(coupling.knob, values)
        pulses, ppg, marks, beats, achieved = _calibrate(config, n, pulses, r_peaks, indices, groups, targets)
    else:
        ppg = _render_ppg(config, n, pulses)
        marks = _landmarks(ppg, fs, pulses)
        beats = _beats(config, r_peaks, marks, indices, groups)
        achieved = {}

    if np.any(pulses.delay <= 0):
        raise ConfigError("couplings drive the transit delay to non-positive values; lower the gains")

    abp = _render_abp(n, fs, beats, dbp, pp, phi)

    truth_beats: list[TruthBeat] = []
    for k in indices:
        beat = beats[k]
        sbp_k = float(dbp[k] + pp[k])
        dbp_k = float(dbp[k])
        pp_k = sbp_k - dbp_k
        truth_beats.append(
            TruthBeat(
                r_peak=beat.r_peak,
                onset=beat.onset,
                next_onset=beat.next_onset,
                apex=int(marks.apex[k]),
                upstroke=int(marks.upstroke[k]),
                bp=BeatBP(sbp=sbp_k, dbp=dbp_k, mbp=dbp_k + float(phi[k]) * pp_k, pp=pp_k),
                drivers={name: float(achieved[name][k]) for name in names},
                targets={name: float(targets[name][k]) for name in names},
                segment=groups[k],
            )
        )
    rows = np.asarray(indices)
    calibration_error = {
        name: float(np.max(np.abs(achieved[name][rows] - targets[name][rows]) / np.abs(targets[name][rows])))
        for name in names
    }

    # Measurement noise
    if config.noise.snr_db is not None:
        scale = 10.0 ** (config.noise.snr_db / 20.0)
        ecg = ecg + rng.normal(0.0, float(np.std(ecg)) / scale, n)
        ppg = ppg + rng.normal(0.0, float(np.std(ppg)) / scale, n)

    truth = GroundTruth(
        fs=fs,
        r_peaks=[int(r) for r in r_peaks],
        beats=truth_beats,
        segments=segments,
        planted=sorted({c.component for c in config.couplings}, key=lambda c: c.value),
        calibration_error=calibration_error,
    )
    return (
        SampledSignal(ecg, fs, "ecg"),
        SampledSignal(ppg, fs, "ppg"),
        SampledSignal(abp, fs, "abp"),
        truth,
    )
