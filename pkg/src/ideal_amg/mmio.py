"""Matrix Market reader and writer for dense real matrices.

Supported headers::

    %%MatrixMarket matrix array      real|integer  general|symmetric|skew-symmetric
    %%MatrixMarket matrix coordinate real|integer  general|symmetric|skew-symmetric

Coordinate duplicates are summed; symmetric storage is expanded.
"""

from __future__ import annotations

import io
import os

import numpy as np

from .errors import IoError, ParseError, UnsupportedField
from .linalg import as_matrix

__all__ = ["read_matrix_market", "write_matrix_market", "parse_matrix_market"]

_FORMATS = ("array", "coordinate")
_FIELDS = ("real", "integer", "double")
_SYMMETRIES = ("general", "symmetric", "skew-symmetric")


def _column(raw, token, start=0):
    return raw.index(token, start) + 1


def _parse_numbers(raw, lineno, count, kinds):
    tokens = raw.split()
    if len(tokens) != count:
        raise ParseError(f"expected {count} fields, found {len(tokens)}", lineno)
    out = []
    pos = 0
    for tok, kind in zip(tokens, kinds):
        col = _column(raw, tok, pos)
        pos = col - 1 + len(tok)
        try:
            val = int(tok) if kind is int else float(tok)
        except ValueError:
            raise ParseError(f"cannot parse {tok!r} as {kind.__name__}", lineno, col) from None
        if kind is float and not np.isfinite(val):
            raise ParseError(f"non-finite value {tok!r}", lineno, col)
        out.append(val)
    return out


def parse_matrix_market(text):
    """Parse Matrix Market text into a dense float64 array."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("empty file: missing %%MatrixMarket banner", 1)
    banner = lines[0].split()
    if banner[0].lower() != "%%matrixmarket" or len(banner) != 5:
        raise ParseError("malformed banner; expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1, 1)
    obj, fmt, fld, sym = (t.lower() for t in banner[1:])
    if obj != "matrix":
        raise ParseError(f"unsupported object {obj!r}", 1, _column(lines[0], banner[1]))
    if fmt not in _FORMATS:
        raise ParseError(f"unsupported format {fmt!r}", 1, _column(lines[0], banner[2]))
    if fld in ("complex", "pattern") or sym == "hermitian":
        raise UnsupportedField(f"field {fld!r} / symmetry {sym!r} is not supported (real only)")
    if fld not in _FIELDS:
        raise ParseError(f"unknown field {fld!r}", 1, _column(lines[0], banner[3]))
    if sym not in _SYMMETRIES:
        raise ParseError(f"unknown symmetry {sym!r}", 1, _column(lines[0], banner[4]))

    body = [(i + 1, ln) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", len(lines))
    size_no, size_line = body[0]
    entries = body[1:]

    if fmt == "array":
        rows, cols = _parse_numbers(size_line, size_no, 2, (int, int))
        if rows < 0 or cols < 0:
            raise ParseError("negative dimension", size_no)
        if sym != "general" and rows != cols:
            raise ParseError(f"{sym} matrix must be square", size_no)
        if sym == "general":
            positions = [(i, j) for j in range(cols) for i in range(rows)]
        elif sym == "symmetric":
            positions = [(i, j) for j in range(cols) for i in range(j, rows)]
        else:
            positions = [(i, j) for j in range(cols) for i in range(j + 1, rows)]
        values = []
        for lineno, raw in entries:
            for tok in raw.split():
                try:
                    values.append(float(tok))
                except ValueError:
                    raise ParseError(f"cannot parse {tok!r} as float", lineno, _column(raw, tok)) from None
        if len(values) != len(positions):
            where = entries[-1][0] if entries else size_no
            raise ParseError(f"expected {len(positions)} values, found {len(values)}", where)
        out = np.zeros((rows, cols))
        for (i, j), v in zip(positions, values):
            out[i, j] = v
            if sym == "symmetric":
                out[j, i] = v
            elif sym == "skew-symmetric":
                out[j, i] = -v
    else:
        rows, cols, nnz = _parse_numbers(size_line, size_no, 3, (int, int, int))
        if min(rows, cols, nnz) < 0:
            raise ParseError("negative size", size_no)
        if len(entries) != nnz:
            where = entries[-1][0] if entries else size_no
            raise ParseError(f"expected {nnz} entries, found {len(entries)}", where)
        out = np.zeros((rows, cols))
        for lineno, raw in entries:
            i, j, v = _parse_numbers(raw, lineno, 3, (int, int, float))
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise ParseError(f"index ({i}, {j}) outside {rows}x{cols}", lineno)
            out[i - 1, j - 1] += v
            if i != j and sym == "symmetric":
                out[j - 1, i - 1] += v
            elif i != j and sym == "skew-symmetric":
                out[j - 1, i - 1] -= v
    if not np.all(np.isfinite(out)):
        raise ParseError("non-finite values after assembly", size_no)
    return out


def read_matrix_market(path):
    """Read a ``.mtx`` file (path or text stream) into a dense array."""
    if isinstance(path, io.TextIOBase):
        return parse_matrix_market(path.read())
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    return parse_matrix_market(text)


def write_matrix_market(path, matrix, fmt="array", comment=None):
    """Write ``matrix`` in ``array`` or ``coordinate`` (general) format.

    Values use the shortest decimal string that round-trips exactly.
    """
    m = as_matrix(matrix)
    rows, cols = m.shape
    out = [f"%%MatrixMarket matrix {fmt} real general"]
    if comment:
        out.extend("% " + ln for ln in comment.splitlines())
    if fmt == "array":
        out.append(f"{rows} {cols}")
        out.extend(repr(float(v)) for v in m.T.reshape(-1))
    elif fmt == "coordinate":
        nz = [(i, j) for j in range(cols) for i in range(rows) if m[i, j] != 0.0]
        out.append(f"{rows} {cols} {len(nz)}")
        out.extend(f"{i + 1} {j + 1} {float(m[i, j])!r}" for i, j in nz)
    else:
        raise ValueError(f"unknown Matrix Market format {fmt!r}")
    text = "\n".join(out) + "\n"
    if hasattr(path, "write"):
        path.write(text)
        return
    try:
        with open(os.fspath(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
