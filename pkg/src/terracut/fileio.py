"""Deterministic file primitives: atomic writes, float formatting, CSV/JSON.

All emitters route through these helpers so that identical in-memory state
produces byte-identical files on every platform.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile
from pathlib import Path

from .errors import ParseError

# 12 significant digits: floats survive a write/read round trip to ~1e-12
# relative error, and the text is locale- and platform-stable.
FLOAT_FMT = "%.12g"


def fmt_float(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # normalize -0.0
    return FLOAT_FMT % x


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    """Write via a temp file in the target directory, then rename into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_csv(path: str | Path, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    atomic_write_text(path, buf.getvalue())


def read_csv(path: str | Path) -> tuple[list[str], list[list[str]]]:
    """Read a CSV into (header, rows), enforcing a rectangular shape."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise ParseError(f"{path}: empty file") from None
            rows = list(reader)
    except OSError:
        raise
    width = len(header)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ParseError(
                f"{path}: line {i + 2} has {len(row)} fields, expected {width}"
            )
    return header, rows


def parse_float(text: str, context: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"{context}: not a number: {text!r}") from None
    if not (value == value and abs(value) != float("inf")):
        raise ParseError(f"{context}: non-finite value {text!r}")
    return value


def write_json(path: str | Path, obj) -> None:
    atomic_write_text(path, json_dumps(obj))


def json_dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def read_json(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON: {exc}") from None


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()
