"""
Synthetic record configuration.

A record is a train of beats at a (possibly ramping) heart rate. Per-beat BP is
drawn first: DBP and pulse pressure vary around a (possibly ramping) base, SBP
and MBP follow from them. Each PPG pulse is a systolic Gaussian, a delayed
diastolic Gaussian, a broad run-off lobe and a small late lobe that plants the
sdPPG f wave. Per-beat jitter of the pulse shape gives every feature natural
variation; a coupling then sets one morphology knob per beat so that its
feature follows a BP component.
"""

from __future__ import annotations

import json
import math
from enum import Enum
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from core.errors import ConfigError, InvalidInputError
from core.models import BPComponent
from features.catalog import Family, feature

SEGMENT_LABELS: tuple[str, str, str] = ("rest-aortic", "nitroglycerin", "rest-radial")
"""Labels of the three drug-mode segments, in record order."""

MBP_FRACTION_RANGE: tuple[float, float] = (0.3, 0.48)
"""Allowed (MBP - DBP) / PP on the generated waveform, per beat."""


class Knob(str, Enum):
    """Per-beat pulse parameter a coupling adjusts."""

    WIDTH = "width"
    AMPLITUDE = "amplitude"
    TRANSIT_DELAY = "transit_delay"
    DIASTOLIC_RATIO = "diastolic_ratio"


FAMILY_KNOBS: dict[Family, Knob] = {
    Family.PTT: Knob.TRANSIT_DELAY,
    Family.TD: Knob.WIDTH,
    Family.PW: Knob.WIDTH,
    Family.AM: Knob.AMPLITUDE,
    Family.PI: Knob.AMPLITUDE,
    Family.AR: Knob.AMPLITUDE,
    Family.RI: Knob.DIASTOLIC_RATIO,
}


def knob_for(name: str) -> Knob:
    """
    Pulse parameter that moves a feature.

    Raises:
        InvalidInputError: For features no pulse parameter controls (the R-R interval).
    """
    spec = feature(name)
    if not spec.fiducials:
        raise InvalidInputError(f"feature {spec.name} does not depend on the pulse shape")
    return FAMILY_KNOBS[spec.family]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class PulseShape(_Strict):
    """Mean pulse morphology (amplitudes in PPG units, times in seconds)."""

    systolic_amplitude: float = Field(default=1.0, gt=0)
    systolic_width_s: float = Field(default=0.035, gt=0)
    diastolic_ratio: float = Field(default=0.7, gt=0)
    runoff_amplitude: float = Field(default=0.5, ge=0)
    f_wave_amplitude: float = Field(default=0.12, ge=0)
    f_wave_width_s: float = Field(default=0.03, gt=0)
    dicrotic: bool = True
    dc_offset: float = 2.0


class Jitter(_Strict):
    """Relative per-beat standard deviations (transit delay in seconds), clipped at 2.5 sd."""

    width: float = Field(default=0.06, ge=0)
    systolic_amplitude: float = Field(default=0.08, ge=0)
    diastolic_ratio: float = Field(default=0.05, ge=0)
    runoff: float = Field(default=0.10, ge=0)
    transit_delay_s: float = Field(default=0.006, ge=0)


class BaseBP(_Strict):
    """
    Per-beat BP (mmHg): base values, optionally ramping over the record, plus
    independent beat-to-beat variation of DBP and pulse pressure.
    """

    dbp: float = Field(default=80.0, gt=0)
    pp: float = Field(default=45.0, gt=0)
    dbp_end: Optional[float] = Field(default=None, gt=0)
    pp_end: Optional[float] = Field(default=None, gt=0)
    dbp_sd: float = Field(default=1.0, ge=0)
    pp_sd: float = Field(default=8.0, ge=0)
    mbp_fraction: float = Field(default=0.4, ge=MBP_FRACTION_RANGE[0], le=MBP_FRACTION_RANGE[1])
    """MBP = DBP + mbp_fraction * PP on the generated waveform."""

    def at(self, fraction: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Base (dbp, pp) at fractions 0..1 of the record."""
        dbp_end = self.dbp if self.dbp_end is None else self.dbp_end
        pp_end = self.pp if self.pp_end is None else self.pp_end
        return self.dbp + (dbp_end - self.dbp) * fraction, self.pp + (pp_end - self.pp) * fraction


class Coupling(_Strict):
    """
    feature = base * (1 + gain * zscore(component) + N(0, noise_std)), per beat.

    `base` is the feature of the beat's un-jittered pulse, so `gain` is the
    relative change per standard deviation of the component. A second coupling
    of an already coupled feature must target MBP: MBP then follows the first
    component through the per-beat MBP fraction and only the sign of `gain`
    (which must match) is used.
    """

    feature: str
    component: BPComponent
    gain: float
    noise_std: float = Field(default=0.0, ge=0)

    @field_validator("feature", mode="before")
    @classmethod
    def canonical_feature(cls, value: Any) -> str:
        """Accept a catalog index or name; store the name."""
        try:
            return feature(value).name
        except InvalidInputError as exc:
            raise ValueError(str(exc)) from exc

    @field_validator("gain")
    @classmethod
    def finite_gain(cls, value: float) -> float:
        """Gains must be finite."""
        if not math.isfinite(value):
            raise ValueError("coupling gain must be finite")
        return value

    @property
    def knob(self) -> Knob:
        """Pulse parameter this coupling drives."""
        return knob_for(self.feature)


class DrugEffect(_Strict):
    """
    Mid-record drug segment.

    Pulse widening and BP drops follow a sin^2 bump over the segment; coupling
    gains are multiplied by `coupling_gain_factor` throughout it.
    """

    start_fraction: float = Field(default=1 / 3, gt=0, lt=1)
    end_fraction: float = Field(default=2 / 3, gt=0, lt=1)
    width_gain: float = Field(default=0.15, ge=0, le=0.3)
    dbp_drop: float = Field(default=10.0, ge=0)
    pp_drop: float = Field(default=0.0, ge=0)
    coupling_gain_factor: float = Field(default=1.5, gt=0)

    @model_validator(mode="after")
    def check_order(self) -> "DrugEffect":
        """The segment must have positive length."""
        if self.end_fraction <= self.start_fraction:
            raise ValueError("drug end_fraction must exceed start_fraction")
        return self


class Noise(_Strict):
    """Additive measurement noise on ECG and PPG; ABP stays clean."""

    snr_db: Optional[float] = None
    baseline_amplitude: float = Field(default=0.0, ge=0)
    """Respiratory baseline sinusoid on the PPG, in PPG units."""
    baseline_hz: float = Field(default=0.25, gt=0)


def _default_couplings() -> list[Coupling]:
    return [
        Coupling(feature="PW50", component=BPComponent.SBP, gain=-0.06),
        Coupling(feature="AM_3_4", component=BPComponent.DBP, gain=0.08),
    ]


class SynthConfig(_Strict):
    """Everything needed to generate one synthetic record deterministically."""

    seed: int = 0
    fs: float = Field(default=1000.0, ge=250.0)
    duration_s: float = Field(default=60.0, ge=2.0)
    heart_rate_bpm: float = Field(default=75.0, ge=30.0, le=180.0)
    heart_rate_end_bpm: Optional[float] = Field(default=None, ge=30.0, le=180.0)
    """When set, the heart rate ramps linearly to this value over the record."""
    transit_delay_s: float = Field(default=0.25, gt=0, lt=0.6)
    pulse: PulseShape = Field(default_factory=PulseShape)
    jitter: Jitter = Field(default_factory=Jitter)
    bp: BaseBP = Field(default_factory=BaseBP)
    couplings: list[Coupling] = Field(default_factory=_default_couplings)
    drug: Optional[DrugEffect] = None
    noise: Noise = Field(default_factory=Noise)

    @model_validator(mode="after")
    def check_couplings(self) -> "SynthConfig":
        """
        Each coupled feature owns one pulse parameter. A feature may appear a
        second time only to tie MBP to its first component, once per record.
        """
        drivers: dict[str, Coupling] = {}
        owners: dict[Knob, str] = {}
        tied: Optional[str] = None
        for coupling in self.couplings:
            first = drivers.get(coupling.feature)
            if first is None:
                try:
                    knob = coupling.knob
                except InvalidInputError as exc:
                    raise ValueError(str(exc)) from exc
                if knob in owners:
                    raise ValueError(
                        f"{coupling.feature} and {owners[knob]} would both set the pulse {knob.value}"
                    )
                owners[knob] = coupling.feature
                drivers[coupling.feature] = coupling
                continue
            if coupling.component is not BPComponent.MBP or first.component is BPComponent.MBP:
                raise ValueError(
                    f"{coupling.feature} is already coupled to {first.component.value}; "
                    "a second coupling can only tie MBP to it"
                )
            if tied is not None:
                raise ValueError(f"MBP is already tied to {tied}")
            if math.copysign(1.0, coupling.gain) != math.copysign(1.0, first.gain):
                raise ValueError(f"the MBP tie of {coupling.feature} must keep the sign of its first gain")
            tied = coupling.feature
        return self

    @property
    def drivers(self) -> list[Coupling]:
        """First coupling of each coupled feature, in config order."""
        seen: dict[str, Coupling] = {}
        for coupling in self.couplings:
            seen.setdefault(coupling.feature, coupling)
        return list(seen.values())

    @property
    def mbp_tie(self) -> Optional[Coupling]:
        """The driver MBP is tied to, if any."""
        drivers = {c.feature: c for c in self.drivers}
        for coupling in self.couplings:
            if drivers[coupling.feature] is not coupling:
                return drivers[coupling.feature]
        return None

    def heart_rate_at(self, t: float) -> float:
        """Heart rate (bpm) at time t."""
        if self.heart_rate_end_bpm is None:
            return self.heart_rate_bpm
        fraction = min(max(t / self.duration_s, 0.0), 1.0)
        return self.heart_rate_bpm + fraction * (self.heart_rate_end_bpm - self.heart_rate_bpm)

    @classmethod
    def from_mapping(cls, raw: object, *, source: str = "<mapping>") -> "SynthConfig":
        """Validate a mapping, converting validation failures to ConfigError."""
        if not isinstance(raw, dict):
            raise ConfigError(f"synth config {source} must be a JSON object")
        try:
            return cls.model_validate(raw)
        except ValidationError as exc:
            raise ConfigError(f"invalid synth config {source}: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "SynthConfig":
        """
        Load from a JSON file.

        Raises:
            ConfigError: If the file is unreadable, not JSON, or fails validation.
        """
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read synth config {path}: {exc}") from exc
        return cls.from_mapping(raw, source=str(path))

    def with_overrides(self, **updates: Any) -> "SynthConfig":
        """Copy with top-level fields replaced (None values ignored), re-validated."""
        data = self.model_dump()
        data.update({key: value for key, value in updates.items() if value is not None})
        return type(self).from_mapping(data, source="overrides")
