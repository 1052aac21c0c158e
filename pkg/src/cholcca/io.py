"""Reading and writing data matrices, dense CSV matrices and sparse triplet files."""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

from .cov import DataMatrix
from .errors import InputError

__all__ = [
    "read_data_csv",
    "read_matrix",
    "parse_triplets",
    "format_triplets",
    "format_dense_csv",
    "read_text",
    "write_text",
]


def read_text(path):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def write_text(path, text):
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror or exc}") from None


def _is_number(tok):
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _csv_rows(text):
    return [r for r in csv.reader(_io.StringIO(text)) if r and any(c.strip() for c in r)]


def read_data_csv(text):
    """Observations-by-variables CSV. A first row with any non-numeric cell is a header."""
    rows = _csv_rows(text)
    if not rows:
        raise InputError("data file is empty")
    names = None
    if not all(_is_number(c.strip()) for c in rows[0]):
        names = tuple(c.strip() for c in rows[0])
        rows = rows[1:]
    if not rows:
        raise InputError("data file has a header but no observations")
    width = len(rows[0])
    values = np.empty((len(rows), width))
    for k, r in enumerate(rows):
        line = k + (2 if names else 1)
        if len(r) != width:
            raise InputError(f"line {line}: expected {width} columns, found {len(r)}")
        try:
            values[k] = [float(c) for c in r]
        except ValueError:
            raise InputError(f"line {line}: non-numeric entry") from None
    return DataMatrix(values, names)


def parse_triplets(text, p=None):
    """Symmetric matrix from ``i j value`` lines (1-based).

    Lines starting with ``%`` are comments; a comment of the form
    ``% p <count>`` fixes the dimension, otherwise the largest index is used.
    Each off-diagonal entry may be given once (either triangle) or twice
    with the same value.
    """
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%"):
            toks = line.lstrip("%").split()
            if len(toks) == 2 and toks[0] == "p" and p is None:
                try:
                    p = int(toks[1])
                except ValueError:
                    raise InputError(f"line {lineno}: bad dimension comment") from None
            continue
        toks = line.split()
        if len(toks) != 3:
            raise InputError(f"line {lineno}: expected 'i j value'")
        try:
            i, j, v = int(toks[0]), int(toks[1]), float(toks[2])
        except ValueError:
            raise InputError(f"line {lineno}: expected 'i j value'") from None
        if i < 1 or j < 1:
            raise InputError(f"line {lineno}: indices are 1-based")
        entries.append((lineno, i - 1, j - 1, v))
    if p is None:
        p = 1 + max((max(i, j) for _, i, j, _ in entries), default=-1)
    if p < 1:
        raise InputError("triplet file has no entries")
    out = np.zeros((p, p))
    seen = {}
    for lineno, i, j, v in entries:
        if i >= p or j >= p:
            raise InputError(f"line {lineno}: index exceeds dimension {p}")
        key = (max(i, j), min(i, j))
        if key in seen and seen[key] != v:
            raise InputError(f"line {lineno}: conflicting values for entry ({key[0] + 1}, {key[1] + 1})")
        seen[key] = v
        out[i, j] = out[j, i] = v
    return out


def format_triplets(m, comment=None, atol=0.0, pattern=None):
    """Lower triangle (with diagonal) of a symmetric matrix as ``i j value`` lines.

    With a boolean ``pattern`` only the diagonal and the positions it marks
    are written; everything else is an implicit zero.
    """
    m = np.asarray(m, dtype=float)
    p = m.shape[0]
    keep = np.ones((p, p), dtype=bool) if pattern is None else np.asarray(pattern, dtype=bool)
    lines = []
    if comment:
        lines.extend(f"% {c}" for c in comment.splitlines())
    lines.append(f"% p {p}")
    for i in range(p):
        for j in range(i + 1):
            v = m[i, j]
            if i == j or (keep[i, j] and abs(v) > atol):
                lines.append(f"{i + 1} {j + 1} {v:.17g}")
    return "\n".join(lines) + "\n"


def format_dense_csv(m, header=None):
    m = np.asarray(m, dtype=float)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header is not None:
        w.writerow(header)
    for row in m:
        w.writerow([f"{v:.17g}" for v in row])
    return buf.getvalue()


def read_matrix(text):
    """Square matrix from dense CSV or, when the first line starts with ``%``, triplets."""
    stripped = text.lstrip()
    if not stripped:
        raise InputError("matrix file is empty")
    if stripped.startswith("%"):
        return parse_triplets(text)
    data = read_data_csv(text)
    if data.n != data.p:
        raise InputError(f"matrix file is {data.n}x{data.p}, expected a square matrix")
    return data.values
