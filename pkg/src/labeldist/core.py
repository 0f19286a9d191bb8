"""Labeled-array data model and the PGM/CSV file formats shared by every module.

A labeled array is an M x N grid of non-negative integer label ids. Label ids
are arbitrary (not necessarily contiguous or zero-based) and a "region" is
simply the set of pixels sharing one id; no connectivity analysis is done
anywhere in this package.
"""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "LabeledArray",
    "LabelInventory",
    "ParseError",
    "RangeError",
    "ShapeMismatchError",
    "inventory",
    "load_array",
    "save_array",
]

_WHITESPACE = b" \t\n\r\x0b\x0c"


class ParseError(ValueError):
    """A file could not be decoded. `offset` is the byte position of the problem."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class RangeError(ValueError):
    """A label value does not fit the requested output format."""


class ShapeMismatchError(ValueError):
    """Two arrays that must share a shape do not."""


class LabeledArray:
    """Immutable M x N grid of non-negative integer labels.

    The backing numpy array is copied on construction and marked read-only;
    perturbations and file loads always produce new instances, so values can
    be shared freely across threads.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.asarray(data)
        if arr.ndim != 2:
            raise ValueError(f"labeled array must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"labeled array must be at least 1x1, got {arr.shape}")
        if not np.issubdtype(arr.dtype, np.integer):
            raise ValueError(f"labels must be integers, got dtype {arr.dtype}")
        if arr.min() < 0:
            raise ValueError("labels must be non-negative")
        arr = arr.astype(np.int64, copy=True)
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def from_flat(cls, rows: int, cols: int, labels) -> "LabeledArray":
        flat = np.asarray(labels)
        if flat.size != rows * cols:
            raise ValueError(f"expected {rows * cols} labels, got {flat.size}")
        return cls(flat.reshape(rows, cols))

    @property
    def data(self) -> np.ndarray:
        """Read-only (rows, cols) int64 view of the labels."""
        return self._data

    @property
    def rows(self) -> int:
        return self._data.shape[0]

    @property
    def cols(self) -> int:
        return self._data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._data.shape

    @property
    def size(self) -> int:
        return self._data.size

    @property
    def labels(self) -> np.ndarray:
        """Row-major flat view of the labels."""
        return self._data.reshape(-1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LabeledArray):
            return NotImplemented
        return bool(np.array_equal(self._data, other._data))

    def __hash__(self):
        return hash((self.shape, self._data.tobytes()))

    def __repr__(self) -> str:
        return f"LabeledArray({self.rows}x{self.cols}, {len(np.unique(self._data))} labels)"


@dataclass(frozen=True)
class LabelInventory:
    """Distinct labels of an array (ascending) and their pixel counts."""

    distinct_labels: tuple[int, ...]
    counts: dict[int, int]

    def __len__(self) -> int:
        return len(self.distinct_labels)


def inventory(arr: LabeledArray) -> LabelInventory:
    """Count every distinct label present in `arr`."""
    values, counts = np.unique(arr.data, return_counts=True)
    return LabelInventory(
        distinct_labels=tuple(int(v) for v in values),
        counts={int(v): int(c) for v, c in zip(values, counts)},
    )


def require_same_shape(a: LabeledArray, b: LabeledArray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")


# ---------------------------------------------------------------------------
# file formats


def _infer_format(path: Path, format: str | None) -> str:
    if format is not None:
        fmt = format.lower()
    else:
        fmt = path.suffix.lower().lstrip(".")
    if fmt not in ("pgm", "csv"):
        raise ValueError(f"unsupported format {fmt!r} (expected 'pgm' or 'csv')")
    return fmt


def load_array(path, format: str | None = None) -> LabeledArray:
    """Load a labeled array from a binary PGM (P5) or headerless CSV file.

    Raises ParseError (with the byte offset of the problem) on malformed
    input, FileNotFoundError/OSError on I/O failure.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    data = path.read_bytes()
    if fmt == "pgm":
        return _parse_pgm(data)
    return _parse_csv(data)


def save_array(arr: LabeledArray, path, format: str | None = None, maxval: int | None = None) -> None:
    """Write `arr` so that load_array round-trips it exactly.

    PGM: 8-bit (maxval 255) when all labels fit, otherwise 16-bit big-endian
    (maxval 65535). Pass `maxval` to pin the variant; labels above it raise
    RangeError. CSV has no range limit. Files are written atomically.
    """
    path = Path(path)
    fmt = _infer_format(path, format)
    if fmt == "pgm":
        payload = _encode_pgm(arr, maxval)
    else:
        payload = _encode_csv(arr)
    _write_atomic(path, payload)


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- PGM (netpbm P5, binary) ------------------------------------------------


class _HeaderScanner:
    """Tokenizer for the PGM ASCII header; tracks byte offsets and skips # comments."""

    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.pos = pos

    def skip_separators(self) -> None:
        data = self.data
        while self.pos < len(data):
            byte = data[self.pos : self.pos + 1]
            if byte in (b"#",):
                nl = data.find(b"\n", self.pos)
                self.pos = len(data) if nl < 0 else nl + 1
            elif byte in _WHITESPACE:
                self.pos += 1
            else:
                return

    def read_int(self, what: str) -> int:
        self.skip_separators()
        start = self.pos
        data = self.data
        while self.pos < len(data) and data[self.pos : self.pos + 1] not in _WHITESPACE:
            self.pos += 1
        token = data[start : self.pos]
        if not token:
            raise ParseError(f"missing {what} in PGM header", start)
        try:
            value = int(token)
        except ValueError:
            raise ParseError(f"bad {what} {token!r} in PGM header", start) from None
        if value < 0:
            raise ParseError(f"negative {what} in PGM header", start)
        return value


def _parse_pgm(data: bytes) -> LabeledArray:
    if data[:2] != b"P5":
        raise ParseError(f"not a binary PGM (magic {data[:2]!r}, expected b'P5')", 0)
    scan = _HeaderScanner(data, 2)
    cols = scan.read_int("width")
    rows = scan.read_int("height")
    maxval = scan.read_int("maxval")
    if cols < 1 or rows < 1:
        raise ParseError(f"bad PGM dimensions {cols}x{rows}", 2)
    if not 1 <= maxval <= 65535:
        raise ParseError(f"PGM maxval {maxval} outside [1, 65535]", 2)
    # exactly one whitespace byte separates the header from the raster
    if scan.pos >= len(data) or data[scan.pos : scan.pos + 1] not in _WHITESPACE:
        raise ParseError("missing whitespace after PGM maxval", scan.pos)
    start = scan.pos + 1
    width = 2 if maxval > 255 else 1
    expected = rows * cols * width
    payload = data[start : start + expected]
    if len(payload) < expected:
        raise ParseError(
            f"truncated PGM payload: expected {expected} bytes, got {len(payload)}",
            start + len(payload),
        )
    dtype = ">u2" if width == 2 else np.uint8
    values = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    if values.max(initial=0) > maxval:
        bad = int(np.argmax(values > maxval))
        raise ParseError(
            f"sample {int(values[bad])} exceeds PGM maxval {maxval}",
            start + bad * width,
        )
    return LabeledArray(values.reshape(rows, cols))


def _encode_pgm(arr: LabeledArray, maxval: int | None) -> bytes:
    top = int(arr.data.max())
    if maxval is None:
        maxval = 255 if top <= 255 else 65535
    if not 1 <= maxval <= 65535:
        raise RangeError(f"PGM maxval must be in [1, 65535], got {maxval}")
    if top > maxval:
        raise RangeError(f"label {top} exceeds PGM maxval {maxval}")
    header = f"P5\n{arr.cols} {arr.rows}\n{maxval}\n".encode("ascii")
    if maxval > 255:
        body = arr.data.astype(">u2").tobytes()
    else:
        body = arr.data.astype(np.uint8).tobytes()
    return header + body


# -- CSV (headerless, comma-separated decimal integers) ---------------------


def _parse_csv(data: bytes) -> LabeledArray:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError("CSV is not valid UTF-8", exc.start) from None
    rows: list[list[int]] = []
    offset = 0
    width = None
    for line in text.split("\n"):
        stripped = line.strip("\r")
        if stripped == "":
            offset += len(line.encode("utf-8")) + 1
            continue
        cells = stripped.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(
                f"ragged CSV row: expected {width} values, got {len(cells)}", offset
            )
        row = []
        for cell in cells:
            try:
                value = int(cell.strip())
            except ValueError:
                raise ParseError(f"bad CSV value {cell.strip()!r}", offset) from None
            if value < 0:
                raise ParseError(f"negative label {value}", offset)
            row.append(value)
        rows.append(row)
        offset += len(line.encode("utf-8")) + 1
    if not rows:
        raise ParseError("empty CSV file", 0)
    return LabeledArray(rows)


def _encode_csv(arr: LabeledArray) -> bytes:
    lines = [",".join(str(int(v)) for v in row) for row in arr.data]
    return ("\n".join(lines) + "\n").encode("ascii")
