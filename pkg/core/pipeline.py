"""
End-to-end analysis of one record.

Stages, in order:
1. segmentation: R peaks, pulse onsets, beats (segment labels attached)
2. fiducials: FP1..FP11 per beat on the smoothed PPG channels
3. features: 222 values per beat
4. reference: per-beat SBP/DBP/MBP/PP from the ABP channel
5. association: 222 x 4 CC/CSE/MI sweep (whole record or per segment)
6. ranking: Borda fusion per component

Stages 4-6 are skipped, with a notice, when the record has no ABP or too few
usable beats. Recoverable anomalies travel as diagnostics on the summary and
are forwarded as structured warning events.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

UTC = timezone.utc
from typing import Optional
from uuid import uuid4

from association.sweep import (
    AssociationResult,
    associate_all,
    associate_segments,
    average_results,
    metric_agreement,
)
from core.config import RunConfig
from core.errors import ConfigError
from core.models import Beat, BeatBP, BPComponent, DiagnosticLog, RankingTable, RunStatus, RunSummary
from core.structured_logging import emit_diagnostics, emit_json_event
from features.vector import FeatureVector, extract_all
from fiducials.points import FiducialSet, locate_in_bundle
from ranking.borda import rank_all
from reference.bp import bp_series
from segmentation.pairing import segment_record
from storage.records import Record
from waveform.channels import SignalBundle, derive_channels

NO_ABP = "no ABP channel in record"
TOO_FEW_BEATS = "too few usable beats"
NOT_REQUESTED = "association not requested"


@dataclass
class PipelineResult:
    """Everything one run produced, aligned per beat where applicable."""

    record: Record
    config: RunConfig
    summary: RunSummary
    signals: SignalBundle
    r_peaks: list[int]
    onsets: list[int]
    beats: list[Beat]
    fiducials: list[FiducialSet]
    features: list[FeatureVector]
    bps: Optional[list[BeatBP]] = None
    used: list[bool] = field(default_factory=list)
    association: Optional[AssociationResult] = None
    segment_associations: dict[str, AssociationResult] = field(default_factory=dict)
    rankings: dict[BPComponent, RankingTable] = field(default_factory=dict)

    @property
    def association_skipped(self) -> Optional[str]:
        """Why association did not run, if it did not."""
        return self.summary.association_skipped

    @property
    def insufficient_data(self) -> bool:
        """True when association was skipped for lack of beats."""
        return (self.summary.association_skipped or "").startswith(TOO_FEW_BEATS)


def _emit_pipeline_event(event_type: str, *, run_id: str, record: str, **payload: object) -> None:
    """Emit a structured pipeline event."""
    emit_json_event(
        event_type=event_type,
        run_id=run_id,
        record=record,
        component="pipeline",
        **payload,
    )


def _select_beats(beats: list[Beat], bps: list[BeatBP], config: RunConfig) -> list[bool]:
    return [
        (beat.plausible or config.include_implausible) and not bp.degenerate
        for beat, bp in zip(beats, bps)
    ]


def run_pipeline(
    record: Record,
    config: RunConfig | None = None,
    *,
    run_id: str | None = None,
    emit_events: bool = True,
    associate: bool = True,
) -> PipelineResult:
    """
    Run every stage on one record.

    Args:
        record: Parsed record (ABP optional).
        config: Analysis parameters; defaults when None.
        run_id: Correlates log events; generated when None.
        emit_events: Emit structured stage events on stdout.
        associate: Run association and ranking; False stops after BP.

    Returns:
        PipelineResult with a COMPLETED summary. Association and ranking are
        empty when skipped; `summary.association_skipped` says why.

    Raises:
        ConfigError: If `config.segments` names a segment the record lacks.
        PulseFeatError: On unusable input (too short, inconsistent channels).
    """
    config = config or RunConfig()
    run_id = run_id or str(uuid4())
    summary = RunSummary(id=run_id, record=record.name)
    diagnostics = DiagnosticLog()

    def event(event_type: str, **payload: object) -> None:
        if emit_events:
            _emit_pipeline_event(event_type, run_id=run_id, record=record.name, **payload)

    try:
        if config.segments is not None:
            unknown = [name for name in config.segments if name not in {s.name for s in record.segments}]
            if unknown:
                raise ConfigError(f"record {record.name!r} has no segments {unknown}")

        segmentation = segment_record(record.ecg, record.ppg, config, record.segments)
        diagnostics.extend(segmentation.diagnostics)
        beats = segmentation.beats
        summary.r_peaks_detected = len(segmentation.r_peaks)
        summary.onsets_detected = len(segmentation.onsets)
        summary.beats_paired = len(beats)
        summary.beats_implausible = sum(1 for b in beats if not b.plausible)
        event(
            "pipeline_stage_completed",
            stage="segmentation",
            r_peaks=summary.r_peaks_detected,
            onsets=summary.onsets_detected,
            beats=summary.beats_paired,
        )

        signals = derive_channels(record.ppg, config.smoothing_window_ms, config.poly_order)
        fiducials = [locate_in_bundle(signals, beat) for beat in beats]
        summary.fiducials_invalid = sum(1 for f in fiducials if not f.is_complete)
        if summary.fiducials_invalid:
            diagnostics.add(
                "fiducials_invalid",
                f"{summary.fiducials_invalid} beats have at least one invalid fiducial",
                count=summary.fiducials_invalid,
            )
        features = [extract_all(signals, fids, beat) for fids, beat in zip(fiducials, beats)]
        event("pipeline_stage_completed", stage="features", beats=len(features))

        result = PipelineResult(
            record=record,
            config=config,
            summary=summary,
            signals=signals,
            r_peaks=segmentation.r_peaks,
            onsets=segmentation.onsets,
            beats=beats,
            fiducials=fiducials,
            features=features,
        )

        if record.abp is None:
            summary.association_skipped = NO_ABP
            event("pipeline_stage_skipped", stage="association", reason=NO_ABP)
        else:
            bps = bp_series(record.abp, beats, diagnostics)
            used = _select_beats(beats, bps, config)
            result.bps = bps
            result.used = used
            summary.beats_used = sum(used)
            summary.beats_dropped = len(beats) - summary.beats_used
            if not associate:
                summary.association_skipped = NOT_REQUESTED
            elif summary.beats_used < config.min_beats:
                summary.association_skipped = (
                    f"{TOO_FEW_BEATS}: {summary.beats_used} < {config.min_beats}"
                )
                diagnostics.add("association_skipped", summary.association_skipped, beats=summary.beats_used)
                event("pipeline_stage_skipped", stage="association", reason=summary.association_skipped)
            else:
                chosen = [k for k, ok in enumerate(used) if ok]
                vectors = [features[k] for k in chosen]
                values = [bps[k] for k in chosen]
                if config.segments is not None:
                    summary.segments = list(config.segments)
                    per_segment = associate_segments(
                        vectors, values, [beats[k] for k in chosen], config.segments, config
                    )
                    for name, part in per_segment.items():
                        for diagnostic in part.diagnostics:
                            diagnostics.add(diagnostic.code, f"[{name}] {diagnostic.message}", **diagnostic.context)
                    result.segment_associations = per_segment
                    result.association = average_results(per_segment)
                else:
                    result.association = associate_all(vectors, values, config)
                    diagnostics.extend(result.association.diagnostics)
                event("pipeline_stage_completed", stage="association", cells=len(result.association))

                result.rankings = rank_all(result.association, config.weights, diagnostics)
                summary.metric_agreement = {
                    c.value: metric_agreement(result.association, c) for c in BPComponent
                }
                event(
                    "pipeline_stage_completed",
                    stage="ranking",
                    ranked={c.value: table.k for c, table in result.rankings.items()},
                )

        summary.diagnostics = list(diagnostics)
        summary.status = RunStatus.COMPLETED
        summary.ended_at = datetime.now(UTC)
        if emit_events:
            emit_diagnostics(diagnostics, run_id=run_id, record=record.name, component="pipeline")
        return result

    except Exception as exc:
        summary.status = RunStatus.FAILED
        summary.error_message = str(exc)
        summary.ended_at = datetime.now(UTC)
        event(
            "pipeline_run_error",
            stage="run",
            error_type=type(exc).__name__,
            error=str(exc),
        )
        raise
