"""Delimited tables, the binary matrix format, and binary PGM images.

Binary matrix layout (little-endian)::

    8 bytes  magic b"SMBLGRAM"
    u64      n
    n*n f64  entries, row-major
"""

from __future__ import annotations

import csv
import logging
import math
import struct
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .data import DataMatrix
from .errors import DataError

logger = logging.getLogger(__name__)

MAGIC = b"SMBLGRAM"


def _delimiter_for(path, delimiter: Optional[str]) -> str:
    if delimiter is not None:
        return delimiter
    suffix = Path(path).suffix.lower()
    return "\t" if suffix in (".tsv", ".tab") else ","


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def ingest_table(path, header: Optional[bool] = None, row_names: Optional[bool] = None,
                 delimiter: Optional[str] = None) -> DataMatrix:
    """Read a delimited numeric table, rows are objects.

    ``header`` and ``row_names`` are detected from non-numeric cells when left
    as ``None``. Tab-separated input is chosen by a ``.tsv``/``.tab``
    extension. Numbers are parsed with :func:`float`, so the decimal
    separator is always a dot.
    """
    delim = _delimiter_for(path, delimiter)
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh, delimiter=delim)]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: file is empty")
    rows = [[c.strip() for c in r] for r in rows]

    if row_names is None:
        body = rows[1:] if len(rows) > 1 else rows
        row_names = all(not _is_number(r[0]) for r in body)
    if header is None:
        first = rows[0][1:] if row_names else rows[0]
        header = any(not _is_number(c) for c in first) or (row_names and rows[0][0] == "")
    feature_names = None
    if header:
        head = rows[0]
        rows = rows[1:]
        feature_names = head[1:] if row_names else head
        if not rows:
            raise DataError(f"{path}: header but no data rows")
    width = len(rows[0])
    object_names = [] if row_names else None
    values = np.empty((len(rows), width - (1 if row_names else 0)))
    offset = 1 + int(bool(header))  # 1-based line numbers in messages
    for i, r in enumerate(rows):
        if len(r) != width:
            raise DataError(f"{path}: row {i + offset} has {len(r)} fields, expected {width}")
        cells = r
        if row_names:
            object_names.append(r[0])
            cells = r[1:]
        for j, c in enumerate(cells):
            try:
                v = float(c)
            except ValueError:
                raise DataError(f"{path}: non-numeric cell {c!r} at row {i + offset}, column {j + 1}") from None
            if not math.isfinite(v):
                raise DataError(f"{path}: non-finite cell {c!r} at row {i + offset}, column {j + 1}")
            values[i, j] = v
    if values.shape[1] == 0:
        raise DataError(f"{path}: no numeric columns")
    if feature_names is not None and len(feature_names) != values.shape[1]:
        raise DataError(f"{path}: header has {len(feature_names)} names for {values.shape[1]} columns")
    logger.info("read %s: %d objects x %d features (header=%s, row names=%s)",
                path, values.shape[0], values.shape[1], bool(header), bool(row_names))
    return DataMatrix(values, feature_names, object_names)


def write_matrix(matrix, path, format: str = "csv", labels: Optional[Sequence[str]] = None,
                 column_labels: Optional[Sequence[str]] = None, delimiter: Optional[str] = None) -> None:
    """Write a matrix as delimited text (shortest round-trip floats) or binary."""
    A = np.asarray(matrix, dtype=np.float64)
    if A.ndim != 2 or A.size == 0:
        raise DataError(f"nothing to write: matrix has shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DataError("refusing to write a matrix with non-finite entries")
    try:
        if format == "binary":
            if A.shape[0] != A.shape[1]:
                raise DataError("binary format holds square matrices only")
            with open(path, "wb") as fh:
                fh.write(MAGIC)
                fh.write(struct.pack("<Q", A.shape[0]))
                fh.write(np.ascontiguousarray(A, dtype="<f8").tobytes())
            return
        if format != "csv":
            raise DataError(f"unknown matrix format {format!r}")
        delim = _delimiter_for(path, delimiter)
        if labels is not None and column_labels is None and A.shape[0] == A.shape[1]:
            column_labels = labels
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, delimiter=delim, lineterminator="\n")
            if column_labels is not None:
                w.writerow(([""] if labels is not None else []) + list(column_labels))
            for i, row in enumerate(A):
                cells = [repr(float(v)) for v in row]
                w.writerow(([labels[i]] if labels is not None else []) + cells)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def read_binary_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC or len(blob) < 16:
        raise DataError(f"{path}: not a binary matrix file")
    (n,) = struct.unpack("<Q", blob[8:16])
    body = blob[16:]
    if len(body) != 8 * n * n:
        raise DataError(f"{path}: expected {8 * n * n} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<f8").reshape(n, n).astype(np.float64)


def read_matrix(path) -> np.ndarray:
    """Read a matrix written by :func:`write_matrix`, detecting the format."""
    try:
        with open(path, "rb") as fh:
            head = fh.read(8)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if head == MAGIC:
        return read_binary_matrix(path)
    return ingest_table(path).values


# --- PGM --------------------------------------------------------------------

def _pgm_tokens(blob: bytes, count: int):
    """Header tokens of a PNM file, skipping comments; returns tokens and data offset."""
    tokens = []
    pos = 0
    while len(tokens) < count:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos:pos + 1] == b"#":
            while pos < len(blob) and blob[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataError("truncated PGM header")
        tokens.append(blob[start:pos])
    return tokens, pos + 1  # exactly one whitespace byte before raster


def read_pgm(path) -> np.ndarray:
    """Binary (P5, maxval <= 255) greyscale image as floats in [0, 1]."""
    with open(path, "rb") as fh:
        blob = fh.read()
    tokens, offset = _pgm_tokens(blob, 4)
    if tokens[0] != b"P5":
        raise DataError(f"{path}: not a binary PGM (P5) file")
    try:
        W, H, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise DataError(f"{path}: malformed PGM header") from None
    if not 0 < maxval <= 255:
        raise DataError(f"{path}: only 8-bit PGM is supported (maxval={maxval})")
    raster = blob[offset:offset + W * H]
    if len(raster) != W * H:
        raise DataError(f"{path}: truncated raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(H, W) / float(maxval)


def write_pgm(pixels, path) -> None:
    """Write floats in [0, 1] as an 8-bit P5 image, mapping p to round(255 p)."""
    px = np.clip(np.asarray(pixels, dtype=np.float64), 0.0, 1.0)
    if px.ndim != 2 or px.size == 0:
        raise DataError(f"image must be a non-empty 2-D array, got shape {px.shape}")
    H, W = px.shape
    raster = np.rint(px * 255.0).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{W} {H}\n255\n".encode("ascii"))
        fh.write(raster.tobytes())


def quantize(pixels) -> np.ndarray:
    """Pixel values as they survive a PGM round trip."""
    return np.rint(np.clip(np.asarray(pixels, dtype=np.float64), 0, 1) * 255.0) / 255.0
