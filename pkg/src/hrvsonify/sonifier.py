"""Vocal-formant sonification of a feature series.

A band-limited impulse train (equal-amplitude cosine harmonics below
0.45 * sample rate) is driven through four second-order Butterworth
bandpass sections in series. The normalized data value controls both
the fundamental frequency and an alpha parameter that linearly
interpolates the filter bank between an 'a' and an 'i' tenor vowel.
Filter parameters are interpolated and the sections redesigned per
64-sample block; coefficients are never interpolated directly, which
keeps every section stable for any alpha.
"""

from __future__ import annotations

import math
import os
import wave
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, DataError

DEFAULT_SAMPLE_RATE = 44_100
HARMONIC_CUTOFF = 0.45          # harmonics kept while k*f0 < 0.45*fs
CONTROL_BLOCK = 64              # samples per coefficient redesign
PEAK_TARGET = 0.89              # ~ -1 dBFS headroom after filtering


@dataclass(frozen=True)
class Formant:
    center_hz: float
    bandwidth_hz: float
    gain_db: float


@dataclass(frozen=True)
class VowelState:
    """Four formants with strictly increasing center frequencies."""

    formants: tuple[Formant, Formant, Formant, Formant]

    def __post_init__(self):
        if len(self.formants) != 4:
            raise ConfigError(f"expected 4 formants, got {len(self.formants)}")
        centers = [f.center_hz for f in self.formants]
        if any(c <= 0 for c in centers) or centers != sorted(set(centers)):
            raise ConfigError(
                f"formant centers must be positive and strictly "
                f"increasing, got {centers}"
            )
        if any(f.bandwidth_hz <= 0 for f in self.formants):
            raise ConfigError("formant bandwidths must be positive")


# Tenor vowel tables from the standard published vocal formant data;
# configuration defaults, overridable via the vowel-table file.
TENOR_A = VowelState((
    Formant(650.0, 80.0, 0.0),
    Formant(1080.0, 90.0, -6.0),
    Formant(2650.0, 120.0, -7.0),
    Formant(2900.0, 130.0, -8.0),
))
TENOR_I = VowelState((
    Formant(290.0, 40.0, 0.0),
    Formant(1870.0, 90.0, -15.0),
    Formant(2800.0, 100.0, -18.0),
    Formant(3250.0, 120.0, -20.0),
))


@dataclass(frozen=True)
class SonificationConfig:
    sample_rate_hz: int = DEFAULT_SAMPLE_RATE
    seg_dur_s: float = 0.5
    f0_min_hz: float = 110.0
    f0_max_hz: float = 440.0
    vowel_a: VowelState = TENOR_A
    vowel_i: VowelState = TENOR_I
    glide_ms: float = 30.0

    def __post_init__(self):
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample rate must be positive")
        if self.seg_dur_s <= 0:
            raise ConfigError("segment duration must be positive")
        if not (0 < self.f0_min_hz < self.f0_max_hz):
            raise ConfigError(
                f"need 0 < f0_min < f0_max, got "
                f"({self.f0_min_hz}, {self.f0_max_hz})"
            )
        nyq = self.sample_rate_hz / 2
        for vowel in (self.vowel_a, self.vowel_i):
            if vowel.formants[-1].center_hz >= nyq:
                raise ConfigError("formant center at or above Nyquist")
        # Keep the fundamental below the first formant of the 'a' end of
        # the interpolation so the source spectrum feeds the resonances.
        first = self.vowel_a.formants[0].center_hz
        if self.f0_max_hz >= first:
            raise ConfigError(
                f"f0_max ({self.f0_max_hz}) must stay below the first "
                f"'a' formant ({first})"
            )
        if self.glide_ms < 0:
            raise ConfigError("glide time cannot be negative")


@dataclass(frozen=True)
class AudioBuffer:
    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.samples)):
            raise DataError("audio buffer contains non-finite samples")

    def __len__(self):
        return len(self.samples)


def normalize_series(values) -> np.ndarray:
    """Min-max scale to [0, 1]; a constant series maps to all 0.5."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise DataError("cannot normalize an empty series")
    if not np.all(np.isfinite(v)):
        raise DataError("series contains non-finite values")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full(v.shape, 0.5)
    return (v - lo) / (hi - lo)


def map_controls(v: float, config: SonificationConfig) -> tuple[float, float]:
    """One normalized value -> (fundamental Hz, vowel interpolation alpha)."""
    f0 = config.f0_min_hz + v * (config.f0_max_hz - config.f0_min_hz)
    return f0, v


def interpolate_vowel(alpha: float, a: VowelState, i: VowelState) -> VowelState:
    """Per-formant linear interpolation of center, bandwidth and gain."""
    lerp = lambda p, q: (1.0 - alpha) * p + alpha * q
    return VowelState(tuple(
        Formant(lerp(fa.center_hz, fi.center_hz),
                lerp(fa.bandwidth_hz, fi.bandwidth_hz),
                lerp(fa.gain_db, fi.gain_db))
        for fa, fi in zip(a.formants, i.formants)
    ))


def harmonic_count(f0_hz: float, sample_rate_hz: int) -> int:
    """Number of harmonics k with k*f0 strictly below 0.45 * fs."""
    limit = HARMONIC_CUTOFF * sample_rate_hz
    if not 0 < f0_hz < limit:
        raise DataError(f"f0 {f0_hz} Hz out of range (0, {limit})")
    k = int(limit / f0_hz)
    if k * f0_hz >= limit:  # exact multiple: strict inequality excludes it
        k -= 1
    return k


class PulseOscillator:
    """Band-limited impulse train with phase continuity across blocks.

    The equal-amplitude harmonic sum is evaluated in closed form via
    the Dirichlet kernel: sum_{k=1..K} cos(k t) =
    sin((K + 1/2) t) / (2 sin(t/2)) - 1/2, normalized by K.
    """

    def __init__(self, sample_rate_hz: int = DEFAULT_SAMPLE_RATE):
        self.sample_rate_hz = sample_rate_hz
        self.phase = 0.0  # radians, wrapped to [0, 2*pi)

    def render(self, f0_hz: float, n_samples: int) -> np.ndarray:
        k = harmonic_count(f0_hz, self.sample_rate_hz)
        step = 2.0 * math.pi * f0_hz / self.sample_rate_hz
        theta = np.mod(self.phase + step * np.arange(n_samples), 2.0 * math.pi)
        half = np.sin(theta / 2.0)
        safe = np.abs(half) > 1e-9
        out = np.full(n_samples, float(k))  # limit of the sum as theta -> 0
        num = np.sin((k + 0.5) * theta[safe])
        out[safe] = num / (2.0 * half[safe]) - 0.5
        self.phase = math.fmod(self.phase + step * n_samples, 2.0 * math.pi)
        return out / k


def pulse_oscillator(f0_hz: float, n_samples: int,
                     sample_rate_hz: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    """One-shot render starting from zero phase."""
    return PulseOscillator(sample_rate_hz).render(f0_hz, n_samples)


def design_bandpass(center_hz: float, bandwidth_hz: float,
                    sample_rate_hz: int) -> tuple[np.ndarray, np.ndarray]:
    """Second-order Butterworth bandpass biquad (unity peak gain).

    Bilinear transform of H(s) = (w0/Q) s / (s^2 + (w0/Q) s + w0^2)
    with Q = center / bandwidth.
    """
    if not 0 < center_hz < sample_rate_hz / 2:
        raise ConfigError(f"bandpass center {center_hz} Hz out of range")
    w0 = 2.0 * math.pi * center_hz / sample_rate_hz
    q = center_hz / bandwidth_hz
    alpha = math.sin(w0) / (2.0 * q)
    a0 = 1.0 + alpha
    b = np.array([alpha, 0.0, -alpha]) / a0
    a = np.array([1.0, -2.0 * math.cos(w0) / a0, (1.0 - alpha) / a0])
    return b, a


def section_poles(a: np.ndarray) -> np.ndarray:
    """Poles of a biquad denominator [1, a1, a2]."""
    return np.roots(a)


class FormantCascade:
    """Four series bandpass sections with state carried across blocks."""

    def __init__(self, sample_rate_hz: int = DEFAULT_SAMPLE_RATE):
        self.sample_rate_hz = sample_rate_hz
        self._vowel = None
        self._sections = []                     # [(b, a, linear_gain)]
        self._state = [np.zeros(2) for _ in range(4)]

    def _design(self, vowel: VowelState):
        self._sections = []
        for f in vowel.formants:
            b, a = design_bandpass(f.center_hz, f.bandwidth_hz,
                                   self.sample_rate_hz)
            if np.any(np.abs(section_poles(a)) >= 1.0):
                raise RuntimeError(
                    f"unstable bandpass section at {f.center_hz} Hz"
                )
            self._sections.append((b, a, 10.0 ** (f.gain_db / 20.0)))
        self._vowel = vowel

    def process(self, block: np.ndarray, vowel: VowelState) -> np.ndarray:
        if vowel != self._vowel:
            self._design(vowel)
        y = block
        for j, (b, a, gain) in enumerate(self._sections):
            y, self._state[j] = lfilter(b, a, y, zi=self._state[j])
            y = y * gain
        return y


def formant_filter(samples, vowel: VowelState,
                   sample_rate_hz: int = DEFAULT_SAMPLE_RATE) -> np.ndarray:
    """Run a block through the cascade from zero filter state."""
    cascade = FormantCascade(sample_rate_hz)
    return cascade.process(np.asarray(samples, dtype=float), vowel)


def _control_curve(targets: np.ndarray, n_seg: int, n_total: int,
                   glide_samples: int) -> np.ndarray:
    """Per-sample control from per-segment targets with linear glide
    at each segment boundary."""
    glide = min(glide_samples, n_seg)
    xp = [0.0]
    fp = [targets[0]]
    for j in range(1, len(targets)):
        s = j * n_seg
        xp += [float(s), float(s + glide)]
        fp += [targets[j - 1], targets[j]]
    return np.interp(np.arange(n_total), xp, fp)


def render_sonification(values, config: SonificationConfig) -> AudioBuffer:
    """Render a feature series to mono audio.

    Each value holds one segment of seg_dur_s; f0 and vowel alpha glide
    linearly into each new segment over glide_ms.
    """
    norm = normalize_series(values)
    fs = config.sample_rate_hz
    n_seg = round(config.seg_dur_s * fs)
    n_total = round(len(norm) * config.seg_dur_s * fs)
    if n_seg < 1 or n_total < 1:
        raise ConfigError("segment duration too short for the sample rate")

    f0_t = np.array([map_controls(v, config)[0] for v in norm])
    alpha_t = np.asarray(norm, dtype=float)
    glide_samples = round(config.glide_ms * fs / 1000.0)
    f0 = _control_curve(f0_t, n_seg, n_total, glide_samples)
    alpha = _control_curve(alpha_t, n_seg, n_total, glide_samples)

    osc = PulseOscillator(fs)
    cascade = FormantCascade(fs)
    out = np.empty(n_total)
    for start in range(0, n_total, CONTROL_BLOCK):
        stop = min(start + CONTROL_BLOCK, n_total)
        block = osc.render(float(f0[start]), stop - start)
        vowel = interpolate_vowel(float(alpha[start]),
                                  config.vowel_a, config.vowel_i)
        out[start:stop] = cascade.process(block, vowel)

    peak = np.max(np.abs(out))
    if peak > 0:
        out *= PEAK_TARGET / peak
    return AudioBuffer(samples=out, sample_rate_hz=fs)


def write_wav(buffer: AudioBuffer, path: str | os.PathLike) -> None:
    """Mono 16-bit signed little-endian PCM; samples clamped to [-1, 1]
    then rounded (full-scale 1.0 -> 32767, -1.0 -> -32768)."""
    clamped = np.clip(buffer.samples, -1.0, 1.0)
    q = np.clip(np.round(clamped * 32768.0), -32768, 32767).astype("<i2")
    with wave.open(os.fspath(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(buffer.sample_rate_hz)
        wf.writeframes(q.tobytes())


def read_wav(path: str | os.PathLike) -> AudioBuffer:
    """Read a mono 16-bit PCM WAV back into floats in [-1, 1)."""
    with wave.open(os.fspath(path), "rb") as wf:
        if wf.getnchannels() != 1 or wf.getsampwidth() != 2:
            raise DataError(f"{path}: expected mono 16-bit PCM")
        raw = wf.readframes(wf.getnframes())
        rate = wf.getframerate()
    samples = np.frombuffer(raw, dtype="<i2").astype(float) / 32768.0
    return AudioBuffer(samples=samples, sample_rate_hz=rate)
