"""Atomic file writes: temp file in the destination directory, then os.replace."""

from __future__ import annotations

import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, TextIO

import pandas as pd


@contextmanager
def atomic_open(path: str | Path) -> Iterator[TextIO]:
    """
    Open a text handle whose content replaces `path` only if the block succeeds.

    Parent directories are created. Output is UTF-8 with LF line endings.
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            yield handle
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise


def atomic_write_text(path: str | Path, text: str) -> Path:
    """Write text atomically and return the path."""
    with atomic_open(path) as handle:
        handle.write(text)
    return Path(path)


def atomic_write_csv(path: str | Path, frame: pd.DataFrame) -> Path:
    """Write a frame as CSV with lossless float formatting; missing values are blank."""
    with atomic_open(path) as handle:
        frame.to_csv(handle, index=False, float_format="%.17g", na_rep="", lineterminator="\n")
    return Path(path)
