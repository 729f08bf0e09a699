"""Experiment records and their CSV/JSON serializations."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__


def to_plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and rationals to JSON-friendly values."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if isinstance(value, Fraction):
        return str(value)
    return value


@dataclass
class ExperimentReport:
    """Parameter-stamped result of one experiment."""

    name: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    stats: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    passed: dict = field(default_factory=dict)
    version: str = __version__

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def to_dict(self) -> dict:
        return to_plain(asdict(self))

    def to_json(self, **extra) -> str:
        body = self.to_dict()
        body.update(to_plain(extra))
        return json.dumps(body, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        data = json.loads(text)
        known = {k: data[k] for k in ("name", "params", "seed", "stats", "thresholds", "passed", "version")
                 if k in data}
        return cls(**known)


SAMPLE_HEADER = ["sample_index", "x_numerator", "x_precision", "value"]
TRACE_HEADER = ["x_numerator", "x_precision", "N", "value"]


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def samples_csv(points, values) -> str:
    """``sample_index,x_numerator,x_precision,value`` rows."""
    return _csv(SAMPLE_HEADER, ((r, p.X, p.P, v) for r, (p, v) in enumerate(zip(points, values))))


def trace_csv(rows: Iterable[tuple]) -> str:
    """``x_numerator,x_precision,N,value`` rows from ``(point, N, value)``."""
    return _csv(TRACE_HEADER, ((p.X, p.P, N, v) for p, N, v in rows))


def read_samples_csv(text: str) -> list[tuple[int, int, int, float]]:
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != SAMPLE_HEADER:
        raise ValueError("not a sample dump")
    return [(int(a), int(b), int(c), float(d)) for a, b, c, d in rows[1:]]


def commented(header: dict, body: str) -> str:
    """Prefix a CSV body with ``#`` lines carrying configuration and version."""
    lines = ["# " + line for line in json.dumps(to_plain(header), sort_keys=True).splitlines()]
    return "\n".join(lines) + "\n" + body
