"""Time-domain HRV metrics: AVNN, SDNN, RMSSD, pNNx.

Metrics are computed over whole records or over sliding windows defined
by cumulative time, so window duration stays comparable across heart
rates. SDNN uses the sample (N-1) standard deviation. pNNx counts
successive differences of at least x ms (inclusive); a strict '>'
variant is available via the ``strict`` flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .rr_ingest import RRSeries

FEATURE_ORDER = ("avnn", "sdnn", "rmssd", "pnnx")

DEFAULT_PNN_X_MS = 50.0
DEFAULT_WINDOW_MS = 60_000.0
DEFAULT_HOP_MS = 30_000.0


@dataclass(frozen=True)
class FeatureVector:
    avnn_ms: float
    sdnn_ms: float
    rmssd_ms: float
    pnnx_pct: float
    window_start_ms: float
    window_len_ms: float
    record_label: str

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.avnn_ms, self.sdnn_ms, self.rmssd_ms, self.pnnx_pct)


@dataclass(frozen=True)
class FeatureMatrix:
    """Rows of HRV feature vectors sharing one pNNx threshold."""

    rows: tuple[FeatureVector, ...]
    pnnx_threshold_ms: float = DEFAULT_PNN_X_MS

    def __post_init__(self):
        if not self.rows:
            raise DataError("feature matrix has no rows")

    def __len__(self):
        return len(self.rows)

    def to_array(self) -> np.ndarray:
        return np.array([r.as_tuple() for r in self.rows], dtype=float)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(r.record_label for r in self.rows)


def _intervals(rr) -> np.ndarray:
    x = np.asarray(rr.intervals_ms if isinstance(rr, RRSeries) else rr,
                   dtype=float)
    if x.size < 2:
        raise DataError("need at least 2 intervals")
    return x


def avnn(rr) -> float:
    """Mean of the intervals, ms."""
    return float(np.mean(_intervals(rr)))


def sdnn(rr) -> float:
    """Sample standard deviation (N-1 divisor) of the intervals, ms."""
    return float(np.std(_intervals(rr), ddof=1))


def rmssd(rr) -> float:
    """Root mean square of successive interval differences, ms."""
    d = np.diff(_intervals(rr))
    return float(np.sqrt(np.mean(d * d)))


def pnnx(rr, x_ms: float = DEFAULT_PNN_X_MS, strict: bool = False) -> float:
    """Percentage of successive pairs differing by at least x_ms.

    ``strict=True`` switches to the conventional '>' comparison.
    """
    if x_ms <= 0:
        raise ConfigError(f"pNNx threshold must be positive, got {x_ms}")
    d = np.abs(np.diff(_intervals(rr)))
    hits = (d > x_ms) if strict else (d >= x_ms)
    return float(100.0 * np.mean(hits))


def record_features(rr: RRSeries, x_ms: float = DEFAULT_PNN_X_MS,
                    strict: bool = False) -> FeatureVector:
    """All four metrics over a whole record as a single row."""
    return FeatureVector(
        avnn_ms=avnn(rr),
        sdnn_ms=sdnn(rr),
        rmssd_ms=rmssd(rr),
        pnnx_pct=pnnx(rr, x_ms, strict),
        window_start_ms=0.0,
        window_len_ms=rr.duration_ms,
        record_label=rr.label,
    )


def windowed_features(rr: RRSeries,
                      window_ms: float = DEFAULT_WINDOW_MS,
                      hop_ms: float = DEFAULT_HOP_MS,
                      x_ms: float = DEFAULT_PNN_X_MS,
                      strict: bool = False) -> FeatureMatrix:
    """Sliding-window feature rows over cumulative time.

    Windows start at 0, hop_ms, 2*hop_ms, ...; an interval belongs to a
    window if its onset time falls in [start, start + window_ms). A
    trailing window whose data span is window_ms/2 or less is dropped.
    """
    if window_ms < 10_000:
        raise ConfigError(f"window must be >= 10 s, got {window_ms} ms")
    if not (0 < hop_ms <= window_ms):
        raise ConfigError(f"hop must be in (0, window], got {hop_ms} ms")

    x = _intervals(rr)
    onsets = np.concatenate([[0.0], np.cumsum(x)[:-1]])
    total = float(np.sum(x))

    rows: list[FeatureVector] = []
    start = 0.0
    while start < total:
        if total - start <= window_ms / 2:
            break  # trailing partial window, too short to be representative
        sel = x[(onsets >= start) & (onsets < start + window_ms)]
        if sel.size >= 2:
            rows.append(FeatureVector(
                avnn_ms=avnn(sel),
                sdnn_ms=sdnn(sel),
                rmssd_ms=rmssd(sel),
                pnnx_pct=pnnx(sel, x_ms, strict),
                window_start_ms=start,
                window_len_ms=min(window_ms, total - start),
                record_label=rr.label,
            ))
        start += hop_ms

    if not rows:
        raise DataError(
            f"record '{rr.label}' ({total:.0f} ms) produced no windows "
            f"for window={window_ms} ms, hop={hop_ms} ms"
        )
    return FeatureMatrix(tuple(rows), pnnx_threshold_ms=x_ms)


def concat_features(matrices) -> FeatureMatrix:
    """Stack per-record feature matrices; thresholds must agree."""
    matrices = list(matrices)
    if not matrices:
        raise DataError("no feature matrices to concatenate")
    thresholds = {m.pnnx_threshold_ms for m in matrices}
    if len(thresholds) != 1:
        raise DataError(f"mixed pNNx thresholds: {sorted(thresholds)}")
    rows = tuple(r for m in matrices for r in m.rows)
    return FeatureMatrix(rows, pnnx_threshold_ms=thresholds.pop())
