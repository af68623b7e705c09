"""DFT magnitude spectrograms and PNG rendering.

Frames are Hann-windowed, magnitudes expressed in dB relative to full
scale (a full-scale sine peaks near 0 dBFS) and clamped at a floor.
Images put time on the X axis (left to right), frequency on the Y axis
(low at the bottom), magnitude through a fixed monotone colour ramp.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.ndimage import median_filter

from .errors import ConfigError, DataError
from .sonifier import AudioBuffer

DEFAULT_DFT_SIZE = 2048
DEFAULT_HOP = 512
DEFAULT_FLOOR_DB = -90.0

# Monotone colour ramp anchors (position in [0,1] -> RGB). Magnitude is
# mapped linearly from floor_db..0 dBFS onto ramp index 0..255; a larger
# magnitude always gets a larger index. The full 256-entry lookup table
# is linear interpolation between these anchors.
COLORMAP_ANCHORS = (
    (0.00, (0, 0, 4)),
    (0.25, (87, 16, 110)),
    (0.50, (188, 55, 84)),
    (0.75, (249, 142, 9)),
    (1.00, (252, 255, 164)),
)


def _build_lut() -> np.ndarray:
    pos = np.array([p for p, _ in COLORMAP_ANCHORS])
    rgb = np.array([c for _, c in COLORMAP_ANCHORS], dtype=float)
    t = np.linspace(0.0, 1.0, 256)
    lut = np.stack([np.interp(t, pos, rgb[:, ch]) for ch in range(3)], axis=1)
    return np.round(lut).astype(np.uint8)


COLOR_LUT = _build_lut()


@dataclass(frozen=True)
class Spectrogram:
    frames: np.ndarray        # (n_frames, n_bins) magnitudes in dBFS
    frame_hop_s: float
    bin_hz: float
    sample_rate_hz: int
    floor_db: float

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_bins(self) -> int:
        return self.frames.shape[1]


def compute_spectrogram(buffer: AudioBuffer,
                        dft_size: int = DEFAULT_DFT_SIZE,
                        hop: int = DEFAULT_HOP,
                        window: str = "hann",
                        floor_db: float = DEFAULT_FLOOR_DB) -> Spectrogram:
    """Hann-windowed DFT magnitude frames in dBFS, clamped at floor_db."""
    if dft_size < 256 or dft_size & (dft_size - 1):
        raise ConfigError(f"dft_size must be a power of two >= 256, "
                          f"got {dft_size}")
    if not 0 < hop <= dft_size:
        raise ConfigError(f"hop must be in (0, dft_size], got {hop}")
    if window != "hann":
        raise ConfigError(f"unsupported window {window!r}")
    x = np.asarray(buffer.samples, dtype=float)
    if x.size < dft_size:
        raise DataError(f"buffer ({x.size} samples) shorter than one "
                        f"DFT frame ({dft_size})")

    win = np.hanning(dft_size)
    scale = win.sum() / 2.0  # full-scale sine -> ~0 dBFS at its bin
    n_frames = (x.size - dft_size) // hop + 1
    starts = np.arange(n_frames) * hop
    frames = x[starts[:, None] + np.arange(dft_size)] * win
    mags = np.abs(np.fft.rfft(frames, axis=1)) / scale
    db = 20.0 * np.log10(np.maximum(mags, 1e-300))
    db = np.maximum(db, floor_db)

    return Spectrogram(
        frames=db,
        frame_hop_s=hop / buffer.sample_rate_hz,
        bin_hz=buffer.sample_rate_hz / dft_size,
        sample_rate_hz=buffer.sample_rate_hz,
        floor_db=floor_db,
    )


def _nearest_indices(n_src: int, n_dst: int) -> np.ndarray:
    return np.minimum(((np.arange(n_dst) + 0.5) * n_src / n_dst).astype(int),
                      n_src - 1)


def render_png(spec: Spectrogram, path: str | os.PathLike,
               height_px: int = 300, width_px: int = 900) -> None:
    """Write an 8-bit RGB PNG plus a sidecar text file of axis extents.

    Pixel column 0 is the first frame; the bottom pixel row is the
    lowest frequency bin. The frame grid is resampled to the requested
    size with nearest-neighbour indexing so output is bit-reproducible.
    """
    if height_px < 1 or width_px < 1:
        raise ConfigError("image dimensions must be positive")
    t = (spec.frames - spec.floor_db) / (0.0 - spec.floor_db)
    idx = np.clip(np.round(t * 255), 0, 255).astype(np.uint8)

    cols = _nearest_indices(spec.n_frames, width_px)
    rows = _nearest_indices(spec.n_bins, height_px)
    grid = idx[cols[:, None], rows[None, :]]      # (width, height)
    rgb = COLOR_LUT[grid.T[::-1]]                 # flip: low freq at bottom

    Image.fromarray(rgb, mode="RGB").save(os.fspath(path), format="PNG")

    extent_t = (spec.n_frames - 1) * spec.frame_hop_s
    extent_f = (spec.n_bins - 1) * spec.bin_hz
    with open(os.fspath(path) + ".txt", "w", encoding="utf-8") as fh:
        fh.write(f"x_axis: time 0 .. {extent_t:.6g} s\n")
        fh.write(f"y_axis: frequency 0 .. {extent_f:.6g} Hz\n")
        fh.write(f"z_axis: magnitude {spec.floor_db:.6g} .. 0 dBFS\n")


def fundamental_track(spec: Spectrogram, f0_min_hz: float, f0_max_hz: float,
                      max_hz: float = 4000.0, smooth: int = 7) -> np.ndarray:
    """Per-frame fundamental-peak bin index.

    The fundamental is found as the harmonic spacing of each frame:
    the lag (in bins) maximizing the autocorrelation of the mean-removed
    linear power spectrum below ``max_hz``. This is insensitive to
    spectral tilt from formant filtering. A ``smooth``-frame median
    filter suppresses single-frame outliers at segment boundaries,
    where one frame straddles two pitches.
    """
    nb = min(spec.n_bins, max(2, int(max_hz / spec.bin_hz)))
    power = 10.0 ** (spec.frames[:, :nb] / 10.0)
    power = power - power.mean(axis=1, keepdims=True)
    lo = max(1, int(round(f0_min_hz / spec.bin_hz)))
    hi = min(nb - 1, int(round(f0_max_hz / spec.bin_hz)))
    if hi < lo:
        raise ConfigError("fundamental search range is empty")
    lags = np.arange(lo, hi + 1)
    out = np.empty(spec.n_frames, dtype=int)
    for fr in range(spec.n_frames):
        row = power[fr]
        score = np.array([np.dot(row[:-l], row[l:]) for l in lags])
        out[fr] = lags[np.argmax(score)]
    if smooth > 1:
        out = median_filter(out, size=smooth, mode="nearest")
    return out
