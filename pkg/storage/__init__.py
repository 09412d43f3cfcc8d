"""Record files and result emission."""

from storage.atomic import atomic_open, atomic_write_csv, atomic_write_text
from storage.records import Record, format_segments, parse_record, parse_segments, write_record
from storage.results import (
    catalog_frame,
    catalog_markdown,
    comparison_payload,
    emit_features,
    emit_results,
    ranking_payload,
    read_association,
    read_features,
    write_comparison,
    write_ranking,
)

__all__ = [
    "Record",
    "atomic_open",
    "atomic_write_csv",
    "atomic_write_text",
    "catalog_frame",
    "catalog_markdown",
    "comparison_payload",
    "emit_features",
    "emit_results",
    "format_segments",
    "parse_record",
    "parse_segments",
    "ranking_payload",
    "read_association",
    "read_features",
    "write_comparison",
    "write_ranking",
    "write_record",
]
