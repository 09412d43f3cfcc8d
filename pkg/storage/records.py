"""
Record files: a `# key=value` header block followed by CSV rows.

    # fs=1000
    # channels=ecg,ppg,abp
    # units=mV,a.u.,mmHg
    # segments=rest-aortic:0:20000;nitroglycerin:20000:40000;rest-radial:40000:60000
    t,ecg,ppg,abp
    0,0.0012,2.0003,80
    ...

`fs` is required; ABP is optional. Segment bounds are sample indices with an
exclusive end. Values are written with 17 significant digits, so a
write-then-parse cycle reproduces every sample bitwise.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import DataError, InvalidInputError, RecordParseError
from core.models import Segment
from storage.atomic import atomic_open
from waveform.signal import SampledSignal

REQUIRED_CHANNELS: tuple[str, ...] = ("ecg", "ppg")
OPTIONAL_CHANNELS: tuple[str, ...] = ("abp",)
DEFAULT_UNITS: dict[str, str] = {"ecg": "mV", "ppg": "a.u.", "abp": "mmHg"}
TIME_TOLERANCE = 1e-6
"""Allowed relative deviation of each time step from 1/fs."""


@dataclass(frozen=True)
class Record:
    """Parsed record: synchronized channels plus labeled segments."""

    ecg: SampledSignal
    ppg: SampledSignal
    abp: Optional[SampledSignal] = None
    segments: tuple[Segment, ...] = ()
    name: str = "record"
    units: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_UNITS))

    @property
    def fs(self) -> float:
        """Shared sampling rate."""
        return self.ecg.fs

    def __len__(self) -> int:
        return len(self.ecg)

    def segment(self, name: str) -> Segment:
        """Segment by name."""
        for segment in self.segments:
            if segment.name == name:
                return segment
        raise InvalidInputError(f"record {self.name!r} has no segment {name!r}")


def format_segments(segments: Sequence[Segment]) -> str:
    """Header form `name:start:end;...`."""
    return ";".join(f"{s.name}:{s.start}:{s.end}" for s in segments)


def parse_segments(text: str, n_samples: int, *, path: str | None = None, line: int | None = None) -> tuple[Segment, ...]:
    """
    Parse `name:start:end;...`.

    Raises:
        RecordParseError: On malformed entries, duplicate names, or bounds
            outside the record.
    """
    segments: list[Segment] = []
    for item in filter(None, (part.strip() for part in text.split(";"))):
        name, sep, bounds = item.partition(":")
        start_text, sep2, end_text = bounds.partition(":")
        if not (sep and sep2 and name):
            raise RecordParseError(f"segment {item!r} is not name:start:end", path=path, line=line)
        try:
            segment = Segment(name=name, start=int(start_text), end=int(end_text))
        except ValueError as exc:
            raise RecordParseError(f"segment {item!r}: {exc}", path=path, line=line) from exc
        if segment.end > n_samples:
            raise RecordParseError(
                f"segment {name!r} ends at {segment.end}, past the {n_samples} samples", path=path, line=line
            )
        if any(s.name == name for s in segments):
            raise RecordParseError(f"duplicate segment {name!r}", path=path, line=line)
        segments.append(segment)
    return tuple(segments)


def write_record(
    path: str | Path,
    ecg: SampledSignal,
    ppg: SampledSignal,
    abp: SampledSignal | None = None,
    segments: Sequence[Segment] = (),
    units: dict[str, str] | None = None,
) -> Path:
    """
    Write channels (and segments) as a record file, atomically.

    Raises:
        InvalidInputError: If channels differ in length or rate.
    """
    channels = {"ecg": ecg, "ppg": ppg}
    if abp is not None:
        channels["abp"] = abp
    if len({len(s) for s in channels.values()}) != 1 or len({s.fs for s in channels.values()}) != 1:
        raise InvalidInputError("record channels must share length and sampling rate")
    units = {**DEFAULT_UNITS, **(units or {})}
    fs = ecg.fs
    frame = pd.DataFrame({"t": np.arange(len(ecg)) / fs, **{k: s.samples for k, s in channels.items()}})
    header = [
        f"# fs={fs:.17g}",
        f"# channels={','.join(channels)}",
        f"# units={','.join(units[k] for k in channels)}",
    ]
    if segments:
        header.append(f"# segments={format_segments(segments)}")
    with atomic_open(path) as handle:
        handle.write("\n".join(header) + "\n")
        frame.to_csv(handle, index=False, float_format="%.17g", lineterminator="\n")
    return Path(path)


def _read_header(lines: list[str], path: str) -> tuple[dict[str, tuple[str, int]], int]:
    header: dict[str, tuple[str, int]] = {}
    count = 0
    for number, raw in enumerate(lines, start=1):
        if not raw.startswith("#"):
            break
        count = number
        body = raw[1:].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        if not sep or not key.strip():
            raise RecordParseError(f"header line is not key=value: {raw!r}", path=path, line=number)
        header[key.strip()] = (value.strip(), number)
    return header, count


def _column_values(frame: pd.DataFrame, column: str, first_line: int, path: str) -> np.ndarray:
    values = np.empty(len(frame))
    for row, text in enumerate(frame[column].tolist()):
        try:
            values[row] = float(text)
        except (TypeError, ValueError):
            raise RecordParseError(
                f"column {column!r}: {text!r} is not a number", path=path, line=first_line + row
            ) from None
        if not np.isfinite(values[row]):
            raise RecordParseError(f"column {column!r}: non-finite value {text!r}", path=path, line=first_line + row)
    return values


def parse_record(path: str | Path) -> Record:
    """
    Read and validate a record file.

    Raises:
        RecordParseError: Missing or malformed header keys, missing channels,
            bad rows, non-finite values or non-uniform timestamps, with the
            offending line number.
    """
    path = Path(path)
    where = str(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise RecordParseError(f"cannot read record: {exc}", path=where) from exc
    lines = text.split("\n")
    header, header_lines = _read_header(lines, where)
    column_line = header_lines + 1

    if "fs" not in header:
        raise RecordParseError("header lacks fs=<Hz>", path=where, line=1)
    fs_text, fs_line = header["fs"]
    try:
        fs = float(fs_text)
    except ValueError:
        raise RecordParseError(f"fs={fs_text!r} is not a number", path=where, line=fs_line) from None
    if not np.isfinite(fs) or fs <= 0:
        raise RecordParseError(f"fs must be positive, got {fs_text}", path=where, line=fs_line)

    body = "\n".join(lines[header_lines:]).rstrip("\n")
    try:
        frame = pd.read_csv(
            io.StringIO(body), dtype=str, keep_default_na=False, skip_blank_lines=False, skipinitialspace=True
        )
    except pd.errors.EmptyDataError:
        raise RecordParseError("record has no column header", path=where, line=column_line) from None
    except pd.errors.ParserError:
        width = len(lines[header_lines].split(",")) if header_lines < len(lines) else 0
        bad = next(
            (
                n
                for n, raw in enumerate(lines[header_lines + 1 :], start=column_line + 1)
                if raw and len(raw.split(",")) != width
            ),
            column_line,
        )
        raise RecordParseError(f"row does not have {width} fields", path=where, line=bad) from None
    columns = [c.strip() for c in frame.columns]
    frame.columns = columns
    declared = header.get("channels")
    if declared is not None:
        names = [c.strip() for c in declared[0].split(",") if c.strip()]
        missing = [c for c in names if c not in columns]
        if missing:
            raise RecordParseError(f"declared channels {missing} have no column", path=where, line=column_line)
    for required in ("t", *REQUIRED_CHANNELS):
        if required not in columns:
            raise RecordParseError(f"missing column {required!r}", path=where, line=column_line)
    if len(frame) < 2:
        raise RecordParseError("record needs at least two rows", path=where, line=column_line + 1)

    first = column_line + 1
    t = _column_values(frame, "t", first, where)
    step = np.diff(t)
    off = np.abs(step * fs - 1.0) > TIME_TOLERANCE
    if np.any(off):
        row = int(np.argmax(off)) + 1
        raise RecordParseError(
            f"timestamp {t[row]!r} breaks the uniform 1/fs spacing", path=where, line=first + row
        )

    signals: dict[str, SampledSignal] = {}
    for name in (*REQUIRED_CHANNELS, *OPTIONAL_CHANNELS):
        if name in columns:
            try:
                signals[name] = SampledSignal(_column_values(frame, name, first, where), fs, name)
            except RecordParseError:
                raise
            except (DataError, InvalidInputError) as exc:
                raise RecordParseError(f"channel {name!r}: {exc}", path=where) from exc

    segments: tuple[Segment, ...] = ()
    if "segments" in header:
        seg_text, seg_line = header["segments"]
        segments = parse_segments(seg_text, len(frame), path=where, line=seg_line)

    units = dict(DEFAULT_UNITS)
    if "units" in header and declared is not None:
        names = [c.strip() for c in declared[0].split(",") if c.strip()]
        values = [u.strip() for u in header["units"][0].split(",")]
        if len(values) != len(names):
            raise RecordParseError(
                "units and channels have different counts", path=where, line=header["units"][1]
            )
        units.update(zip(names, values))

    return Record(
        ecg=signals["ecg"],
        ppg=signals["ppg"],
        abp=signals.get("abp"),
        segments=segments,
        name=path.stem,
        units=units,
    )
