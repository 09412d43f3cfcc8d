"""
Core Pydantic models for pulse-features.

Design principles:
- Every per-beat and per-cell record is explicitly typed and validated
- Missing data is first-class (flags and diagnostics, never silent drops)
- Deterministic serialization (result files are byte-identical across runs)

Large numeric arrays (signals, feature vectors) live in frozen dataclasses next to
the code that produces them; the models here are the small structured records.
"""

from __future__ import annotations

from datetime import datetime, timezone

UTC = timezone.utc
from enum import Enum
from typing import Any, Optional
from uuid import uuid4

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def utc_now() -> datetime:
    """Return a timezone-aware UTC timestamp."""
    return datetime.now(UTC)


# ============================================================================
# Enums
# ============================================================================

class BPComponent(str, Enum):
    """Blood-pressure component a feature is scored against."""
    SBP = "SBP"
    DBP = "DBP"
    MBP = "MBP"
    PP = "PP"


class RunStatus(str, Enum):
    """Status of a pipeline run."""
    RUNNING = "RUNNING"
    COMPLETED = "COMPLETED"
    FAILED = "FAILED"


# ============================================================================
# Diagnostics
# ============================================================================

class Diagnostic(BaseModel):
    """
    A recoverable anomaly noticed by a library function.

    Example:
      code = "unpaired_r_peaks"
      message = "3 R peaks had no pulse onset 50-700 ms later"
      context = {"count": 3}
    """
    code: str
    message: str
    context: dict[str, Any] = Field(default_factory=dict)


class DiagnosticLog(list):
    """Ordered collection of diagnostics with a convenience constructor."""

    def add(self, code: str, message: str, **context: Any) -> Diagnostic:
        """Append and return a new diagnostic."""
        diagnostic = Diagnostic(code=code, message=message, context=context)
        self.append(diagnostic)
        return diagnostic

    def codes(self) -> list[str]:
        """Codes in insertion order."""
        return [item.code for item in self]


# ============================================================================
# Beats and reference BP
# ============================================================================

class Beat(BaseModel):
    """
    One cardiac cycle: the R peak that launched it and the pulse it produced.

    Indices are samples into the (shared-clock) ECG and PPG channels.
    """
    model_config = ConfigDict(frozen=True)

    r_peak: int = Field(ge=0)
    onset: int = Field(ge=0)  # FP1
    next_onset: int = Field(ge=0)  # FP11
    rri: float = Field(gt=0)  # seconds to the next R peak
    plausible: bool = True
    segment: Optional[str] = None

    @model_validator(mode="after")
    def check_order(self) -> "Beat":
        """The pulse arrives after its R wave and ends after it starts."""
        if self.onset <= self.r_peak:
            raise ValueError("onset must come after r_peak")
        if self.next_onset <= self.onset:
            raise ValueError("next_onset must come after onset")
        return self


class BeatBP(BaseModel):
    """Per-beat reference pressures in mmHg."""
    model_config = ConfigDict(frozen=True)

    sbp: float
    dbp: float
    mbp: float
    pp: float
    degenerate: bool = False  # pp <= 0, excluded from association

    @model_validator(mode="after")
    def check_consistency(self) -> "BeatBP":
        """dbp <= mbp <= sbp and pp = sbp - dbp."""
        if not (self.dbp <= self.mbp <= self.sbp):
            raise ValueError("expected dbp <= mbp <= sbp")
        if self.pp != self.sbp - self.dbp:
            raise ValueError("pp must equal sbp - dbp")
        if self.pp <= 0 and not self.degenerate:
            raise ValueError("non-positive pulse pressure must be flagged degenerate")
        return self

    def component(self, component: BPComponent) -> float:
        """Value of one BP component."""
        return float(getattr(self, component.value.lower()))


class Segment(BaseModel):
    """A labeled sample range [start, end) of a record."""
    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    start: int = Field(ge=0)
    end: int

    @model_validator(mode="after")
    def check_range(self) -> "Segment":
        """Segments are non-empty."""
        if self.end <= self.start:
            raise ValueError(f"segment {self.name!r} has end <= start")
        return self

    def contains(self, index: int) -> bool:
        """True when a sample index falls inside the segment."""
        return self.start <= index < self.end


# ============================================================================
# Association and ranking
# ============================================================================

class AssociationCell(BaseModel):
    """Scores of one (feature, BP component) pair."""
    model_config = ConfigDict(frozen=True)

    feature_index: int = Field(ge=1, le=222)
    component: BPComponent
    cc: float = Field(ge=-1.0, le=1.0)
    cse_raw: float = Field(ge=0.0)
    cse_norm: float = Field(ge=0.0, le=1.0)
    mi_raw: float = Field(ge=0.0)
    mi_norm: float = Field(ge=0.0, le=1.0)
    n_beats: int = Field(ge=1)


class MetricWeights(BaseModel):
    """Borda weights per metric."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    cc: float = Field(default=1.0, ge=0.0)
    mi: float = Field(default=1.0, ge=0.0)
    cse: float = Field(default=1.0, ge=0.0)

    @model_validator(mode="after")
    def check_any_weight(self) -> "MetricWeights":
        """At least one metric must count."""
        if self.cc + self.mi + self.cse <= 0:
            raise ValueError("at least one ranking weight must be positive")
        return self


class RankingEntry(BaseModel):
    """One row of a ranking table."""
    model_config = ConfigDict(frozen=True)

    position: int = Field(ge=1)
    feature_index: int = Field(ge=1, le=222)
    feature_name: str
    cc: float
    cse_norm: float
    mi_norm: float
    cc_rank: int = Field(ge=1)
    mi_rank: int = Field(ge=1)
    cse_rank: int = Field(ge=1)
    score: float


class RankingTable(BaseModel):
    """Ordered feature ranking for one BP component."""
    component: BPComponent
    entries: list[RankingEntry] = Field(default_factory=list)
    weights: MetricWeights = Field(default_factory=MetricWeights)

    @field_validator("entries")
    @classmethod
    def check_sorted(cls, v: list[RankingEntry]) -> list[RankingEntry]:
        """Entries are sorted by (score, feature_index)."""
        keys = [(entry.score, entry.feature_index) for entry in v]
        if keys != sorted(keys):
            raise ValueError("ranking entries must be sorted by score then feature index")
        return v

    @property
    def k(self) -> int:
        """Number of rows."""
        return len(self.entries)


# ============================================================================
# Run summary
# ============================================================================

class RunSummary(BaseModel):
    """
    Summary of one pipeline run (counts, status, diagnostics).

    Kept out of result files' numeric tables; written as summary.json without
    timestamps so repeated runs stay byte-identical.
    """
    id: str = Field(default_factory=lambda: str(uuid4()))
    record: str

    started_at: datetime = Field(default_factory=utc_now)
    ended_at: Optional[datetime] = None
    status: RunStatus = RunStatus.RUNNING
    error_message: Optional[str] = None

    r_peaks_detected: int = 0
    onsets_detected: int = 0
    beats_paired: int = 0
    beats_implausible: int = 0
    beats_used: int = 0
    beats_dropped: int = 0
    fiducials_invalid: int = 0
    association_skipped: Optional[str] = None
    segments: list[str] = Field(default_factory=list)
    metric_agreement: dict[str, dict[str, Optional[float]]] = Field(default_factory=dict)
    diagnostics: list[Diagnostic] = Field(default_factory=list)

    def to_report(self) -> dict[str, Any]:
        """Deterministic view of the summary (no ids or timestamps)."""
        return self.model_dump(
            mode="json",
            exclude={"id", "started_at", "ended_at"},
        )
