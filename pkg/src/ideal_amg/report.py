"""Versioned JSON reports.

Documents are written with sorted keys, UTF-8 and LF line endings, so the
same inputs always produce the same bytes.  Floats are written with
``repr`` (shortest exact decimal), which round-trips bit for bit.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import IoError

__all__ = ["SCHEMA_VERSION", "ReportDocument", "to_jsonable", "digest", "write_report",
           "read_report", "dumps"]

SCHEMA_VERSION = 1


def to_jsonable(obj):
    """Convert dataclasses, numpy scalars and arrays to plain JSON types."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _check_finite(obj, path="report"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError(f"{path} is not finite ({obj})")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_finite(v, f"{path}[{i}]")


def digest(matrix):
    """SHA-256 of a matrix's shape and float64 little-endian entries."""
    arr = np.ascontiguousarray(np.asarray(matrix, dtype="<f8"))
    h = hashlib.sha256()
    h.update(repr(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()


@dataclass
class ReportDocument:
    command: str
    inputs: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    measures: Optional[dict] = None
    classification: Optional[dict] = None
    solve: Optional[dict] = None
    results: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def __post_init__(self):
        for name in ("measures", "classification", "solve"):
            val = getattr(self, name)
            if val is not None and not isinstance(val, dict):
                setattr(self, name, to_jsonable(val))
        self.results = to_jsonable(self.results)
        self.verdicts = to_jsonable(self.verdicts)
        _check_finite(to_jsonable(self))

    def to_dict(self):
        return to_jsonable(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    @property
    def passed(self):
        return all(v == "PASS" for v in self.verdicts.values())


def dumps(doc):
    return json.dumps(doc.to_dict(), sort_keys=True, indent=2, allow_nan=False,
                      ensure_ascii=False) + "\n"


def write_report(doc, path):
    text = dumps(doc)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write report {path}: {exc}") from exc


def read_report(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read report {path}: {exc}") from exc
    return ReportDocument.from_dict(data)
