"""Small helpers for line-oriented UTF-8 text inputs and sinks."""

from __future__ import annotations

import io
import os
from contextlib import contextmanager
from typing import Iterable, Iterator


def describe_source(source) -> str | None:
    """A printable name for a path or stream, for error messages."""
    if isinstance(source, (str, os.PathLike)):
        return str(source)
    return getattr(source, "name", None)


def iter_numbered_lines(source) -> Iterator[tuple[int, str]]:
    """Yield (1-based line number, line without trailing newline).

    ``source`` may be a filesystem path, an open text stream, or any
    iterable of strings.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                yield lineno, line.rstrip("\r\n")
        return
    lines: Iterable[str] = source
    for lineno, line in enumerate(lines, start=1):
        yield lineno, line.rstrip("\r\n")


@contextmanager
def open_text_sink(sink):
    """Yield a writable text handle for a path or pass an open stream through."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8", newline="\n") as handle:
            yield handle
    elif isinstance(sink, io.TextIOBase) or hasattr(sink, "write"):
        yield sink
    else:
        raise TypeError(f"unsupported sink type: {type(sink)!r}")
