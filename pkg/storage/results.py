"""
Result files of an analysis run.

    features.csv                 one row per beat: ids, 222 features, missing mask
    beats.csv                    beat boundaries and fiducial sample indices
    bp.csv                       per-beat reference BP
    association.csv              populated (feature, component) cells
    association__<segment>.csv   per-segment cells (segment runs only)
    ranking.json                 top-k per component (schemas/ranking.schema.json)
    plotdata/<COMPONENT>.csv     CC / CSE / MI against feature index
    summary.json                 counts and diagnostics

No file carries a timestamp or run id, so repeated runs are byte-identical.
Floats are written with 17 significant digits and read back exactly.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any, Mapping, Optional, Sequence

import jsonschema
import numpy as np
import pandas as pd

from association.sweep import COMPONENTS, AssociationResult
from core.errors import DataError
from core.models import AssociationCell, BPComponent, MetricWeights, RankingTable
from features.catalog import CATALOG, FEATURE_COUNT, feature
from features.vector import FeatureVector
from fiducials.points import FIDUCIAL_COUNT
from ranking.borda import top_k
from ranking.consistency import ConsistencyReport
from storage.atomic import atomic_write_csv, atomic_write_text

if TYPE_CHECKING:
    from core.pipeline import PipelineResult

PROJECT_ROOT = Path(__file__).resolve().parent.parent
SCHEMAS_DIR = PROJECT_ROOT / "schemas"
RANKING_SCHEMA = json.loads((SCHEMAS_DIR / "ranking.schema.json").read_text(encoding="utf-8"))
COMPARISON_SCHEMA = json.loads((SCHEMAS_DIR / "comparison.schema.json").read_text(encoding="utf-8"))

ASSOCIATION_COLUMNS: tuple[str, ...] = (
    "feature_index",
    "feature_name",
    "component",
    "cc",
    "cse_raw",
    "cse_norm",
    "mi_raw",
    "mi_norm",
    "n_beats",
)
FEATURE_NAMES: tuple[str, ...] = tuple(spec.name for spec in CATALOG)
MASK_COLUMN = "missing_mask"


def dump_json(payload: Any) -> str:
    """Deterministic JSON text with a trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=True) + "\n"


def write_json(path: Path, payload: Any, schema: Mapping[str, Any] | None = None) -> Path:
    """
    Validate (when a schema is given) and write JSON atomically.

    Raises:
        ValueError: If the payload does not match the schema.
    """
    if schema is not None:
        try:
            jsonschema.validate(payload, schema)
        except jsonschema.ValidationError as exc:
            raise ValueError(f"{path.name} failed schema validation: {exc.message}") from exc
    return atomic_write_text(path, dump_json(payload))


# ============================================================================
# Tables
# ============================================================================

def features_frame(result: PipelineResult) -> pd.DataFrame:
    """Beats x (ids + 222 features + missing mask)."""
    values = np.vstack([v.values for v in result.features]) if result.features else np.empty((0, FEATURE_COUNT))
    frame = pd.DataFrame(values, columns=list(FEATURE_NAMES))
    frame.insert(0, "beat", np.arange(len(result.beats), dtype=np.int64))
    frame.insert(1, "r_peak", [b.r_peak for b in result.beats])
    frame.insert(2, "segment", [b.segment or "" for b in result.beats])
    frame[MASK_COLUMN] = ["".join("1" if m else "0" for m in v.missing) for v in result.features]
    return frame


def beats_frame(result: PipelineResult) -> pd.DataFrame:
    """Beat boundaries, plausibility and fiducial indices (blank when invalid)."""
    rows: list[dict[str, Any]] = []
    for n, (beat, fids) in enumerate(zip(result.beats, result.fiducials)):
        row: dict[str, Any] = {
            "beat": n,
            "r_peak": beat.r_peak,
            "onset": beat.onset,
            "next_onset": beat.next_onset,
            "rri": beat.rri,
            "plausible": beat.plausible,
            "segment": beat.segment or "",
            "used": result.used[n] if result.used else False,
        }
        for k in range(1, FIDUCIAL_COUNT + 1):
            row[f"FP{k}"] = fids.fp[k - 1] if fids.is_valid(k) else None
        rows.append(row)
    frame = pd.DataFrame(rows)
    for k in range(1, FIDUCIAL_COUNT + 1):
        if f"FP{k}" in frame:
            frame[f"FP{k}"] = frame[f"FP{k}"].astype("Int64")
    return frame


def bp_frame(result: PipelineResult) -> pd.DataFrame:
    """Per-beat SBP, DBP, MBP, PP and the degenerate flag."""
    bps = result.bps or []
    return pd.DataFrame(
        {
            "beat": np.arange(len(bps), dtype=np.int64),
            "sbp": [bp.sbp for bp in bps],
            "dbp": [bp.dbp for bp in bps],
            "mbp": [bp.mbp for bp in bps],
            "pp": [bp.pp for bp in bps],
            "degenerate": [bp.degenerate for bp in bps],
        }
    )


def association_frame(assoc: AssociationResult) -> pd.DataFrame:
    """One row per populated cell, by feature index then component."""
    rows = [
        {
            "feature_index": cell.feature_index,
            "feature_name": feature(cell.feature_index).name,
            "component": cell.component.value,
            "cc": cell.cc,
            "cse_raw": cell.cse_raw,
            "cse_norm": cell.cse_norm,
            "mi_raw": cell.mi_raw,
            "mi_norm": cell.mi_norm,
            "n_beats": cell.n_beats,
        }
        for cell in assoc.ordered()
    ]
    return pd.DataFrame(rows, columns=list(ASSOCIATION_COLUMNS))


def plot_frame(assoc: AssociationResult, component: BPComponent) -> pd.DataFrame:
    """All 222 indices with CC / CSE / MI for one component; blank where missing."""
    rows = []
    for spec in CATALOG:
        cell = assoc.cell(spec.index, component)
        rows.append(
            {
                "feature_index": spec.index,
                "feature_name": spec.name,
                "family": spec.family.value,
                "cc": cell.cc if cell else np.nan,
                "cse_norm": cell.cse_norm if cell else np.nan,
                "mi_norm": cell.mi_norm if cell else np.nan,
            }
        )
    return pd.DataFrame(rows)


def catalog_frame() -> pd.DataFrame:
    """The 222-row feature table."""
    return pd.DataFrame(
        [
            {
                "index": spec.index,
                "family": spec.family.value,
                "name": spec.name,
                "description": spec.description,
                "dependencies": " ".join(sorted(spec.dependencies, key=_dependency_order)),
                "units": spec.units,
            }
            for spec in CATALOG
        ]
    )


def _dependency_order(label: str) -> tuple[int, int]:
    return (0, 0) if not label.startswith("FP") else (1, int(label[2:]))


def catalog_markdown() -> str:
    """The feature table as a Markdown document."""
    lines = [
        "# Feature catalog",
        "",
        "| index | family | name | dependencies | units | description |",
        "|------:|--------|------|--------------|-------|-------------|",
    ]
    for row in catalog_frame().itertuples(index=False):
        lines.append(
            f"| {row.index} | {row.family} | `{row.name}` | {row.dependencies} | {row.units} | {row.description} |"
        )
    return "\n".join(lines) + "\n"


# ============================================================================
# ranking.json
# ============================================================================

def ranking_payload(
    record: str,
    rankings: Mapping[BPComponent, RankingTable],
    k: int,
    weights: MetricWeights,
    agreement: Mapping[str, Mapping[str, Optional[float]]],
    segments: Sequence[str] = (),
) -> dict[str, Any]:
    """Build the ranking.json document."""
    return {
        "record": record,
        "top_k": k,
        "weights": weights.model_dump(mode="json"),
        "segments": list(segments),
        "components": {
            component.value: {
                "n_ranked": table.k,
                "entries": [entry.model_dump(mode="json") for entry in top_k(table, k).entries],
            }
            for component, table in rankings.items()
        },
        "metric_agreement": {name: dict(values) for name, values in agreement.items()},
    }


def report_markdown(payload: Mapping[str, Any]) -> str:
    """Top-k tables per component as Markdown."""
    lines = [f"# Feature ranking: {payload['record']}", ""]
    if payload["segments"]:
        lines += [f"Averaged over segments: {', '.join(payload['segments'])}", ""]
    for component in (c.value for c in COMPONENTS):
        block = payload["components"].get(component)
        if block is None:
            continue
        lines += [f"## {component}", ""]
        if not block["entries"]:
            lines += ["No populated cells.", ""]
            continue
        lines += [
            "| # | index | feature | CC | CSE | MI | score |",
            "|--:|------:|---------|---:|----:|---:|------:|",
        ]
        for entry in block["entries"]:
            lines.append(
                f"| {entry['position']} | {entry['feature_index']} | `{entry['feature_name']}` "
                f"| {entry['cc']:.3f} | {entry['cse_norm']:.3f} | {entry['mi_norm']:.3f} | {entry['score']:g} |"
            )
        lines.append("")
    return "\n".join(lines)


def write_ranking(outdir: Path, payload: dict[str, Any]) -> list[Path]:
    """ranking.json (schema-checked) and report.md."""
    return [
        write_json(outdir / "ranking.json", payload, RANKING_SCHEMA),
        atomic_write_text(outdir / "report.md", report_markdown(payload)),
    ]


def comparison_payload(
    report: ConsistencyReport,
    similarity: Mapping[str, Mapping[str, Optional[float]]],
) -> dict[str, Any]:
    """Build the comparison.json document."""
    payload = report.model_dump(mode="json")
    payload["similarity"] = {left: dict(row) for left, row in similarity.items()}
    return payload


def write_comparison(path: Path, payload: dict[str, Any]) -> Path:
    """Schema-checked comparison.json."""
    return write_json(path, payload, COMPARISON_SCHEMA)


# ============================================================================
# Emission
# ============================================================================

def _segment_filename(stem: str, segment: str) -> str:
    return f"{stem}__{segment}.csv"


def emit_features(result: PipelineResult, outdir: str | Path) -> list[Path]:
    """features.csv, beats.csv and (with ABP) bp.csv."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        atomic_write_csv(out / "features.csv", features_frame(result)),
        atomic_write_csv(out / "beats.csv", beats_frame(result)),
    ]
    if result.bps is not None:
        written.append(atomic_write_csv(out / "bp.csv", bp_frame(result)))
    written.append(write_json(out / "summary.json", result.summary.to_report()))
    return written


def emit_results(result: PipelineResult, outdir: str | Path) -> list[Path]:
    """
    Write every result file of a run.

    Returns:
        Paths written, in a fixed order.

    Raises:
        OSError: If the output directory cannot be written.
        ValueError: If ranking.json fails schema validation.
    """
    out = Path(outdir)
    written = emit_features(result, out)
    assoc = result.association
    if assoc is None:
        return written

    written.append(atomic_write_csv(out / "association.csv", association_frame(assoc)))
    for name, part in result.segment_associations.items():
        written.append(atomic_write_csv(out / _segment_filename("association", name), association_frame(part)))

    plots = out / "plotdata"
    for component in COMPONENTS:
        written.append(atomic_write_csv(plots / f"{component.value}.csv", plot_frame(assoc, component)))
        for name, part in result.segment_associations.items():
            written.append(
                atomic_write_csv(plots / _segment_filename(component.value, name), plot_frame(part, component))
            )

    payload = ranking_payload(
        record=result.record.name,
        rankings=result.rankings,
        k=result.config.top_k,
        weights=result.config.weights,
        agreement=result.summary.metric_agreement,
        segments=result.summary.segments,
    )
    written.extend(write_ranking(out, payload))
    return written


# ============================================================================
# Readers
# ============================================================================

def read_association(path: str | Path) -> AssociationResult:
    """
    Load association.csv.

    Raises:
        DataError: If the file is missing columns or holds invalid cells.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    missing = [c for c in ASSOCIATION_COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{path} lacks columns {missing}")
    cells = []
    for row in frame.itertuples(index=False):
        try:
            cells.append(
                AssociationCell(
                    feature_index=int(row.feature_index),
                    component=BPComponent(row.component),
                    cc=float(row.cc),
                    cse_raw=float(row.cse_raw),
                    cse_norm=float(row.cse_norm),
                    mi_raw=float(row.mi_raw),
                    mi_norm=float(row.mi_norm),
                    n_beats=int(row.n_beats),
                )
            )
        except ValueError as exc:
            raise DataError(f"{path}: invalid association row {tuple(row)}: {exc}") from exc
    return AssociationResult.from_cells(cells)


def read_features(path: str | Path) -> list[FeatureVector]:
    """
    Load features.csv back into feature vectors.

    Raises:
        DataError: If the file lacks feature columns.
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip", keep_default_na=True, dtype={MASK_COLUMN: str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    missing = [name for name in FEATURE_NAMES if name not in frame.columns]
    if missing:
        raise DataError(f"{path} lacks {len(missing)} feature columns (first: {missing[0]})")
    values = frame[list(FEATURE_NAMES)].to_numpy(dtype=np.float64)
    return [FeatureVector(row) for row in values]
