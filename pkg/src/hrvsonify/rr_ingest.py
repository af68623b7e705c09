"""Parsing and validation of RR-interval records.

Text records hold one interval per line, or two fields per line where
the second field is the interval (the first being cumulative time).
Lines starting with '#' are comments. Both whitespace and commas work
as delimiters. The canonical internal unit is milliseconds.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .errors import ConfigError, DataError

# Physiological plausibility gate applied before NN-interval metrics.
DEFAULT_RR_MIN_MS = 300.0
DEFAULT_RR_MAX_MS = 2000.0

_UNIT_ALIASES = {
    "s": 1000.0,
    "sec": 1000.0,
    "seconds": 1000.0,
    "ms": 1.0,
    "milliseconds": 1.0,
}


@dataclass(frozen=True)
class RRSeries:
    """An ordered, validated sequence of inter-beat intervals in ms."""

    intervals_ms: tuple[float, ...]
    label: str = ""
    source_path: str | None = None

    def __post_init__(self):
        if len(self.intervals_ms) < 2:
            raise DataError(
                f"RR series '{self.label}' has {len(self.intervals_ms)} "
                "interval(s); at least 2 are required"
            )
        for i, v in enumerate(self.intervals_ms):
            if not math.isfinite(v) or v <= 0:
                raise DataError(
                    f"RR series '{self.label}': interval {i} is {v!r}; "
                    "intervals must be finite and positive"
                )

    def __len__(self):
        return len(self.intervals_ms)

    @property
    def duration_ms(self) -> float:
        return sum(self.intervals_ms)


def parse_rr_file(path: str | os.PathLike, unit: str = "ms",
                  label: str = "") -> RRSeries:
    """Read a text RR record and return a validated series in ms.

    ``unit`` is the unit of the values in the file ('s' or 'ms', long
    forms accepted). Raises DataError with a line number on malformed
    or non-positive values.
    """
    try:
        scale = _UNIT_ALIASES[unit.lower()]
    except KeyError:
        raise ConfigError(f"unknown RR unit {unit!r}; expected 's' or 'ms'")
    label = label or os.path.splitext(os.path.basename(os.fspath(path)))[0]

    intervals: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.replace(",", " ").split()
            if len(fields) not in (1, 2):
                raise DataError(
                    f"{path}:{lineno}: expected 1 or 2 fields, got {len(fields)}"
                )
            token = fields[-1]  # two-column form: (cumulative time, interval)
            try:
                value = float(token)
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric value {token!r}")
            if not math.isfinite(value) or value <= 0:
                raise DataError(
                    f"{path}:{lineno}: non-positive interval {value!r}"
                )
            intervals.append(value * scale)

    if len(intervals) < 2:
        raise DataError(
            f"{path}: only {len(intervals)} valid interval(s); need at least 2"
        )
    return RRSeries(tuple(intervals), label=label,
                    source_path=os.fspath(path))


def filter_artifacts(series: RRSeries,
                     lo_ms: float = DEFAULT_RR_MIN_MS,
                     hi_ms: float = DEFAULT_RR_MAX_MS) -> tuple[RRSeries, int]:
    """Drop intervals outside [lo_ms, hi_ms]; return (filtered, n_removed).

    Idempotent; preserves the label and relative order.
    """
    if not (0 < lo_ms < hi_ms):
        raise ConfigError(
            f"artifact bounds must satisfy 0 < lo < hi, got ({lo_ms}, {hi_ms})"
        )
    kept = tuple(v for v in series.intervals_ms if lo_ms <= v <= hi_ms)
    removed = len(series.intervals_ms) - len(kept)
    if len(kept) < 2:
        raise DataError(
            f"RR series '{series.label}': fewer than 2 intervals remain "
            f"after artifact filtering ({removed} removed)"
        )
    return (RRSeries(kept, label=series.label,
                     source_path=series.source_path), removed)


def write_rr_file(series: RRSeries, path: str | os.PathLike) -> None:
    """Write the canonical one-interval-per-line ms text form.

    Values are written with repr so parse_rr_file round-trips exactly.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# rr intervals (ms) for {series.label}\n")
        for v in series.intervals_ms:
            fh.write(f"{v!r}\n")
