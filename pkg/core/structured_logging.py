"""Shared structured JSON logging helpers."""

from __future__ import annotations

import json
import sys
from datetime import datetime, timezone

UTC = timezone.utc
from typing import Any, Iterable, TextIO

from core.models import Diagnostic


def emit_json_event(
    event_type: str,
    *,
    run_id: str | None,
    level: str = "info",
    stream: TextIO | None = None,
    **payload: Any,
) -> str:
    """Emit one JSON event line (stdout by default) and return the rendered line."""
    event: dict[str, Any] = {
        "event_type": event_type,
        "level": level,
        "timestamp": datetime.now(UTC).isoformat(),
        "run_id": run_id,
    }
    event.update(payload)
    line = json.dumps(event, ensure_ascii=True, sort_keys=True, default=str)
    print(line, file=stream if stream is not None else sys.stdout)
    return line


def emit_diagnostics(
    diagnostics: Iterable[Diagnostic],
    *,
    run_id: str | None,
    **payload: Any,
) -> int:
    """Forward collected diagnostics as warning events. Returns how many were emitted."""
    count = 0
    for diagnostic in diagnostics:
        emit_json_event(
            "pipeline_diagnostic",
            run_id=run_id,
            level="warning",
            code=diagnostic.code,
            message=diagnostic.message,
            context=diagnostic.context,
            **payload,
        )
        count += 1
    return count
