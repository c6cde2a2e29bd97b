"""Shared utility functions for parsing flags and writing output files."""

import hashlib
import os
import tempfile
from contextlib import contextmanager
from fractions import Fraction
from typing import Iterator, List


def parse_int_list(csv_string, *, name: str = "value") -> List[int]:
    """Parse comma-separated integers (or a list of them) into a list of ints.

    Whitespace around items is ignored and empty items are skipped.
    """
    if csv_string is None or csv_string == "":
        return []
    if isinstance(csv_string, str):
        items = csv_string.split(",")
    else:
        items = csv_string
    result = []
    for item in items:
        text = str(item).strip()
        if not text:
            continue
        try:
            result.append(int(text))
        except ValueError:
            raise ValueError(f"{name}: {text!r} is not an integer") from None
    return result


def parse_fraction(text) -> Fraction:
    """Exact rational from "p/q", an integer, or a decimal string."""
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"{text!r} is not a rational number") from None


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@contextmanager
def atomic_output(path: str) -> Iterator[str]:
    """Yield a temporary path next to `path`; it replaces `path` only on success."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", suffix=os.path.splitext(path)[1], dir=directory)
    os.close(fd)
    try:
        yield tmp
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    with atomic_output(path) as tmp:
        with open(tmp, "w", encoding="utf-8", newline="") as f:
            f.write(text)
