"""Command-line entrypoint for pulse-features."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence
from uuid import uuid4

from association.sweep import metric_agreement
from core.config import AnalysisDefaults, RunConfig
from core.errors import ConfigError, DataError, ExitCode, InsufficientDataError, InvalidInputError, PulseFeatError
from core.models import BPComponent, DiagnosticLog
from core.pipeline import run_pipeline
from core.structured_logging import emit_diagnostics, emit_json_event
from ranking.borda import rank_all
from ranking.consistency import consistency, profile_similarity
from storage.atomic import atomic_write_csv, atomic_write_text
from storage.records import Record, parse_record, write_record
from storage.results import (
    catalog_frame,
    catalog_markdown,
    comparison_payload,
    dump_json,
    emit_features,
    emit_results,
    ranking_payload,
    read_association,
    write_comparison,
    write_ranking,
)
from synth.config import SynthConfig
from synth.generator import generate_record

VERSION = "0.1.0"
ALL_SEGMENTS = "all"


def _resolve_command_run_id(args: argparse.Namespace) -> str:
    """Resolve run_id from CLI args or create one for command-level tracing."""
    explicit = getattr(args, "run_id", None)
    if explicit:
        return str(explicit)
    return str(uuid4())


def _emit_cli_event(
    event_type: str,
    *,
    run_id: str,
    command: str,
    **payload: Any,
) -> str:
    """Emit one structured CLI event line with standard fields."""
    return emit_json_event(
        event_type=event_type,
        run_id=run_id,
        command=command,
        **payload,
    )


def _run_config(args: argparse.Namespace, record: Optional[Record] = None) -> RunConfig:
    """RunConfig from --config, with command-line overrides applied and re-validated."""
    config = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    overrides: dict[str, Any] = {}
    if getattr(args, "top_k", None) is not None:
        overrides["top_k"] = args.top_k
    if getattr(args, "threads", None) is not None:
        overrides["threads"] = args.threads
    segments = getattr(args, "segments", None)
    if segments:
        if segments == ALL_SEGMENTS:
            if record is None or not record.segments:
                raise ConfigError("--segments all needs a record with labeled segments")
            overrides["segments"] = [s.name for s in record.segments]
        else:
            overrides["segments"] = [name.strip() for name in segments.split(",") if name.strip()]
    if not overrides:
        return config
    return RunConfig.from_mapping({**config.model_dump(), **overrides}, source="command line")


def _read_summary(outdir: Path) -> dict[str, Any]:
    path = outdir / "summary.json"
    if not path.exists():
        return {}
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise DataError(f"{path} must hold a JSON object")
    return raw


# ============================================================================
# Commands
# ============================================================================

def _cmd_synth(args: argparse.Namespace) -> int:
    """Generate a synthetic record (and optionally its ground truth)."""
    run_id = _resolve_command_run_id(args)
    config = SynthConfig.from_file(args.config) if args.config else SynthConfig()
    overrides: dict[str, Any] = {
        "seed": args.seed,
        "duration_s": args.duration,
        "heart_rate_bpm": args.heart_rate,
    }
    if args.snr_db is not None:
        overrides["noise"] = {**config.noise.model_dump(), "snr_db": args.snr_db}
    if args.drug and config.drug is None:
        overrides["drug"] = {}
    config = config.with_overrides(**overrides)

    ecg, ppg, abp, truth = generate_record(config)
    output = write_record(args.out, ecg, ppg, abp, truth.segments)
    truth_path = None
    if args.truth:
        truth_path = atomic_write_text(args.truth, dump_json(truth.model_dump(mode="json")))
    _emit_cli_event(
        "cli_synth_completed",
        run_id=run_id,
        command="synth",
        output=str(output),
        truth=str(truth_path) if truth_path else None,
        seed=config.seed,
        fs=config.fs,
        samples=len(ecg),
        beats=len(truth.beats),
        segments=[s.name for s in truth.segments],
        planted=[c.value for c in truth.planted],
    )
    return 0


def _cmd_extract(args: argparse.Namespace) -> int:
    """Segment beats and write features.csv, beats.csv and bp.csv."""
    run_id = _resolve_command_run_id(args)
    record = parse_record(args.record)
    config = _run_config(args, record)
    result = run_pipeline(record, config, run_id=run_id, associate=False)
    written = emit_features(result, args.out)
    _emit_cli_event(
        "cli_extract_completed",
        run_id=run_id,
        command="extract",
        record=record.name,
        outdir=str(args.out),
        beats=result.summary.beats_paired,
        fiducials_invalid=result.summary.fiducials_invalid,
        has_abp=record.abp is not None,
        files=[str(path) for path in written],
    )
    return 0


def _cmd_analyze(args: argparse.Namespace) -> int:
    """Run the full pipeline on one record and write every result file."""
    run_id = _resolve_command_run_id(args)
    record = parse_record(args.record)
    config = _run_config(args, record)
    result = run_pipeline(record, config, run_id=run_id)
    written = emit_results(result, args.out)
    if result.insufficient_data:
        raise InsufficientDataError(str(result.association_skipped))
    leaders = {
        component.value: (table.entries[0].feature_name if table.entries else None)
        for component, table in result.rankings.items()
    }
    _emit_cli_event(
        "cli_analyze_completed",
        run_id=run_id,
        command="analyze",
        record=record.name,
        outdir=str(args.out),
        beats_used=result.summary.beats_used,
        beats_dropped=result.summary.beats_dropped,
        association_skipped=result.association_skipped,
        segments=result.summary.segments,
        top_feature=leaders,
        files=len(written),
    )
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    """Re-rank an analysis directory's association.csv and rewrite ranking.json / report.md."""
    run_id = _resolve_command_run_id(args)
    source = Path(args.outdir)
    assoc = read_association(source / "association.csv")
    summary = _read_summary(source)
    config = _run_config(args)
    diagnostics = DiagnosticLog()
    rankings = rank_all(assoc, config.weights, diagnostics)
    payload = ranking_payload(
        record=str(summary.get("record") or source.name),
        rankings=rankings,
        k=config.top_k,
        weights=config.weights,
        agreement={c.value: metric_agreement(assoc, c) for c in BPComponent},
        segments=list(summary.get("segments") or []),
    )
    target = Path(args.out) if args.out else source
    written = write_ranking(target, payload)
    emit_diagnostics(diagnostics, run_id=run_id, command="report")
    _emit_cli_event(
        "cli_report_completed",
        run_id=run_id,
        command="report",
        source=str(source),
        outdir=str(target),
        cells=len(assoc),
        top_k=config.top_k,
        files=[str(path) for path in written],
    )
    return 0


def _cmd_catalog(args: argparse.Namespace) -> int:
    """Write the 222-row feature catalog as CSV or Markdown."""
    run_id = _resolve_command_run_id(args)
    if args.out:
        if args.format == "markdown":
            output = atomic_write_text(args.out, catalog_markdown())
        else:
            output = atomic_write_csv(args.out, catalog_frame())
        _emit_cli_event("cli_catalog_completed", run_id=run_id, command="catalog", format=args.format, output=str(output))
        return 0

    # Catalog text owns stdout here; the completion event goes to stderr.
    if args.format == "markdown":
        sys.stdout.write(catalog_markdown())
    else:
        catalog_frame().to_csv(sys.stdout, index=False, lineterminator="\n")
    _emit_cli_event(
        "cli_catalog_completed",
        run_id=run_id,
        command="catalog",
        format=args.format,
        output="-",
        stream=sys.stderr,
    )
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    """Compare CC profiles across analysis directories or across one directory's segments."""
    run_id = _resolve_command_run_id(args)
    dirs = [Path(d) for d in args.outdirs]
    if args.segments:
        if len(dirs) != 1:
            raise InvalidInputError("--segments compares the segments of exactly one directory")
        source = dirs[0]
        names = list(_read_summary(source).get("segments") or [])
        if not names:
            prefix = "association__"
            names = sorted(p.stem[len(prefix) :] for p in source.glob(f"{prefix}*.csv"))
        profiles = {name: read_association(source / f"association__{name}.csv") for name in names}
    else:
        labels = [d.name for d in dirs]
        if len(set(labels)) != len(labels):
            labels = [str(d) for d in dirs]
        profiles = {label: read_association(d / "association.csv") for label, d in zip(labels, dirs)}

    component = BPComponent(args.component)
    report = consistency(profiles, component, args.min_abs_cc)
    similarity = profile_similarity(profiles, component)
    output = write_comparison(Path(args.out), comparison_payload(report, similarity))
    _emit_cli_event(
        "cli_compare_completed",
        run_id=run_id,
        command="compare",
        component=component.value,
        labels=report.labels,
        output=str(output),
        consistent=len(report.consistent_features),
        incomplete=len(report.incomplete),
    )
    return 0


# ============================================================================
# Parser
# ============================================================================

def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Run config JSON (unknown keys are rejected)")
    parser.add_argument("--run-id", help="Optional explicit run ID for logging")


def build_parser() -> argparse.ArgumentParser:
    """Create argument parser for the pulsefeat CLI."""
    parser = argparse.ArgumentParser(
        prog="pulsefeat",
        description="Beat-wise ECG/PPG features and their association with blood pressure",
    )
    parser.add_argument("--version", action="version", version=f"pulsefeat {VERSION}")

    subparsers = parser.add_subparsers(dest="command")

    synth_parser = subparsers.add_parser("synth", help="Generate a seeded synthetic ECG/PPG/ABP record")
    synth_parser.add_argument("--config", help="Synthetic record config JSON")
    synth_parser.add_argument("--seed", type=int, help="Random seed (overrides the config)")
    synth_parser.add_argument("--duration", type=float, help="Record length in seconds")
    synth_parser.add_argument("--heart-rate", type=float, help="Heart rate in beats per minute")
    synth_parser.add_argument("--snr-db", type=float, help="ECG/PPG signal-to-noise ratio in dB")
    synth_parser.add_argument(
        "--drug",
        action="store_true",
        help="Add the mid-record drug segment (rest / nitroglycerin / rest labels)",
    )
    synth_parser.add_argument("--out", required=True, help="Output record CSV path")
    synth_parser.add_argument("--truth", help="Optional ground-truth JSON path")
    synth_parser.add_argument("--run-id", help="Optional explicit run ID for logging")
    synth_parser.set_defaults(func=_cmd_synth)

    extract_parser = subparsers.add_parser("extract", help="Segment beats and extract the 222 features")
    extract_parser.add_argument("record", help="Record CSV path")
    extract_parser.add_argument("--out", required=True, help="Output directory")
    _add_run_options(extract_parser)
    extract_parser.set_defaults(func=_cmd_extract)

    analyze_parser = subparsers.add_parser("analyze", help="Features, BP, association and ranking for one record")
    analyze_parser.add_argument("record", help="Record CSV path")
    analyze_parser.add_argument("--out", required=True, help="Output directory")
    analyze_parser.add_argument(
        "--segments",
        help=f"Comma-separated segment labels to analyze separately, or '{ALL_SEGMENTS}'",
    )
    analyze_parser.add_argument("--top-k", type=int, help="Rows per component in ranking.json")
    analyze_parser.add_argument("--threads", type=int, help="Cap on association worker threads")
    _add_run_options(analyze_parser)
    analyze_parser.set_defaults(func=_cmd_analyze)

    report_parser = subparsers.add_parser("report", help="Re-rank an analysis directory and rewrite its report")
    report_parser.add_argument("outdir", help="Directory written by 'analyze'")
    report_parser.add_argument("--top-k", type=int, help="Rows per component in ranking.json")
    report_parser.add_argument("--out", help="Write ranking.json/report.md here instead of OUTDIR")
    _add_run_options(report_parser)
    report_parser.set_defaults(func=_cmd_report)

    catalog_parser = subparsers.add_parser("catalog", help="Print the 222-feature catalog")
    catalog_parser.add_argument("--format", choices=("csv", "markdown"), default="csv", help="Output format")
    catalog_parser.add_argument("--out", help="Output path (stdout when omitted)")
    catalog_parser.set_defaults(func=_cmd_catalog)

    compare_parser = subparsers.add_parser(
        "compare",
        help="Cross-record or cross-segment consistency of feature/BP correlations",
    )
    compare_parser.add_argument("outdirs", nargs="+", help="Directories written by 'analyze'")
    compare_parser.add_argument(
        "--component",
        choices=[c.value for c in BPComponent],
        default=BPComponent.SBP.value,
        help="BP component to compare",
    )
    compare_parser.add_argument(
        "--segments",
        action="store_true",
        help="Compare the per-segment results of a single directory",
    )
    compare_parser.add_argument(
        "--min-abs-cc",
        type=float,
        default=AnalysisDefaults.CONSISTENCY_MIN_ABS_CC,
        help="Smallest |CC| a consistent feature needs in every profile",
    )
    compare_parser.add_argument("--out", required=True, help="Output comparison JSON path")
    compare_parser.add_argument("--run-id", help="Optional explicit run ID for logging")
    compare_parser.set_defaults(func=_cmd_compare)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Execute CLI and return process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not hasattr(args, "func"):
        parser.print_help()
        return int(ExitCode.OK)

    try:
        return int(args.func(args))
    except Exception as exc:
        code = exc.exit_code if isinstance(exc, PulseFeatError) else ExitCode.GENERIC
        _emit_cli_event(
            "cli_error",
            run_id=_resolve_command_run_id(args),
            command=str(getattr(args, "command", "unknown")),
            level="error",
            error_type=type(exc).__name__,
            error=str(exc),
            exit_code=int(code),
        )
        return int(code)


def cli() -> None:
    """Console-script entrypoint."""
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
