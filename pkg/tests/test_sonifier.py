import struct
import wave

import numpy as np
import pytest

from hrvsonify import (
    AudioBuffer,
    DataError,
    Formant,
    FormantCascade,
    PulseOscillator,
    SonificationConfig,
    VowelState,
    formant_filter,
    interpolate_vowel,
    map_controls,
    normalize_series,
    pulse_oscillator,
    read_wav,
    render_sonification,
    write_wav,
)
from hrvsonify.errors import ConfigError
from hrvsonify.sonifier import (
    TENOR_A,
    TENOR_I,
    design_bandpass,
    harmonic_count,
    section_poles,
)

FS = 44100


# normalize / map / interpolate ----------------------------------------------

def test_normalize_linear():
    assert normalize_series([800, 900, 1000]) == pytest.approx([0, 0.5, 1])


def test_normalize_constant_maps_to_half():
    assert normalize_series([5, 5, 5]) == pytest.approx([0.5, 0.5, 0.5])


def test_normalize_identity_range():
    assert normalize_series([0, 1]) == pytest.approx([0, 1])


def test_normalize_rejects_empty_and_nan():
    with pytest.raises(DataError):
        normalize_series([])
    with pytest.raises(DataError):
        normalize_series([1.0, float("nan")])


@pytest.mark.parametrize("v,f0,alpha", [(0.0, 110.0, 0.0),
                                        (1.0, 440.0, 1.0),
                                        (0.5, 275.0, 0.5)])
def test_map_controls_endpoints(v, f0, alpha):
    cfg = SonificationConfig()
    assert map_controls(v, cfg) == pytest.approx((f0, alpha))


def test_interpolate_vowel_endpoints():
    assert interpolate_vowel(0.0, TENOR_A, TENOR_I) == TENOR_A
    assert interpolate_vowel(1.0, TENOR_A, TENOR_I) == TENOR_I


def test_interpolate_vowel_midpoint():
    mid = interpolate_vowel(0.5, TENOR_A, TENOR_I)
    assert mid.formants[0].center_hz == pytest.approx((650 + 290) / 2)
    assert mid.formants[0].bandwidth_hz == pytest.approx((80 + 40) / 2)


def test_vowel_state_validation():
    with pytest.raises(ConfigError):
        VowelState((Formant(650, 80, 0), Formant(500, 90, 0),
                    Formant(2650, 120, 0), Formant(2900, 130, 0)))
    with pytest.raises(ConfigError):
        VowelState((Formant(650, -1, 0), Formant(1080, 90, 0),
                    Formant(2650, 120, 0), Formant(2900, 130, 0)))


def test_sonification_config_validation():
    with pytest.raises(ConfigError):
        SonificationConfig(f0_min_hz=440, f0_max_hz=110)
    with pytest.raises(ConfigError):
        SonificationConfig(f0_max_hz=700)  # above the first 'a' formant
    with pytest.raises(ConfigError):
        SonificationConfig(seg_dur_s=0.0)


# oscillator ------------------------------------------------------------------

def test_harmonic_count_single_harmonic():
    assert harmonic_count(11025.0, FS) == 1


def test_harmonic_count_110hz():
    # k*110 < 19845 holds up to k=180
    assert harmonic_count(110.0, FS) == 180


def test_harmonic_count_exact_multiple_excluded():
    # 0.45*fs = 19845 = 2205*9; strict inequality drops the 9th harmonic
    assert harmonic_count(2205.0, FS) == 8


def test_oscillator_single_harmonic_is_cosine():
    y = pulse_oscillator(11025.0, 64, FS)
    n = np.arange(64)
    assert np.allclose(y, np.cos(2 * np.pi * 11025.0 * n / FS), atol=1e-9)


def test_oscillator_matches_naive_harmonic_sum():
    for f0 in (110.0, 237.5, 523.25):
        y = pulse_oscillator(f0, 1024, FS)
        k = harmonic_count(f0, FS)
        n = np.arange(1024)
        naive = sum(np.cos(2 * np.pi * f0 * h * n / FS)
                    for h in range(1, k + 1)) / k
        assert np.max(np.abs(y - naive)) < 1e-9


def test_oscillator_band_limited():
    y = pulse_oscillator(137.0, 1 << 16, FS)
    win = np.hanning(y.size)
    spectrum = np.abs(np.fft.rfft(y * win))
    freqs = np.fft.rfftfreq(y.size, 1.0 / FS)
    above = spectrum[freqs > 0.45 * FS + 50]
    assert 20 * np.log10(above.max() / spectrum.max()) < -60


def test_oscillator_phase_continuity():
    osc = PulseOscillator(FS)
    a = osc.render(220.0, 100)
    b = osc.render(220.0, 100)
    whole = pulse_oscillator(220.0, 200, FS)
    assert np.allclose(np.concatenate([a, b]), whole, atol=1e-9)


def test_oscillator_rejects_out_of_range():
    with pytest.raises(DataError):
        pulse_oscillator(0.0, 10, FS)
    with pytest.raises(DataError):
        pulse_oscillator(0.5 * FS, 10, FS)


# filters ---------------------------------------------------------------------

def test_bandpass_section_response():
    center, bw = 1000.0, 100.0
    b, a = design_bandpass(center, bw, FS)
    t = np.arange(FS) / FS
    for freq, check in ((center, "pass"), (center + 12 * bw, "stop")):
        x = np.sin(2 * np.pi * freq * t)
        from scipy.signal import lfilter
        y = lfilter(b, a, x)[FS // 2:]  # steady state
        ratio = 20 * np.log10(np.max(np.abs(y)))
        if check == "pass":
            assert abs(ratio) < 0.1  # unity passband gain
        else:
            assert ratio < -20


def test_bandpass_rejects_bad_center():
    with pytest.raises(ConfigError):
        design_bandpass(FS, 100.0, FS)


def test_formant_filter_zero_input():
    y = formant_filter(np.zeros(512), TENOR_A, FS)
    assert np.allclose(y, 0.0)


def test_formant_filter_noise_peaks_at_formants():
    rng = np.random.default_rng(7)
    noise = rng.standard_normal(1 << 20)
    out = formant_filter(noise, TENOR_A, FS)
    dft = 1024
    bin_hz = FS / dft
    win = np.hanning(dft)
    n_frames = out.size // dft
    acc = np.zeros(dft // 2 + 1)
    for i in range(n_frames):
        acc += np.abs(np.fft.rfft(out[i * dft:(i + 1) * dft] * win)) ** 2
    interior = np.arange(1, acc.size - 1)
    local_max = interior[(acc[interior] > acc[interior - 1])
                         & (acc[interior] >= acc[interior + 1])]
    for f in TENOR_A.formants:
        cbin = round(f.center_hz / bin_hz)
        assert np.min(np.abs(local_max - cbin)) <= 1, f.center_hz


def test_filter_stability_over_alpha_sweep():
    rng = np.random.default_rng(0)
    for alpha in rng.random(1000):
        vowel = interpolate_vowel(float(alpha), TENOR_A, TENOR_I)
        for f in vowel.formants:
            _, a = design_bandpass(f.center_hz, f.bandwidth_hz, FS)
            assert np.all(np.abs(section_poles(a)) < 1.0 - 1e-9)


def test_cascade_state_continuity():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(512)
    cascade = FormantCascade(FS)
    split = np.concatenate([cascade.process(x[:200], TENOR_A),
                            cascade.process(x[200:], TENOR_A)])
    whole = formant_filter(x, TENOR_A, FS)
    assert np.allclose(split, whole, atol=1e-12)


# rendering -------------------------------------------------------------------

def test_render_duration_contract():
    cfg = SonificationConfig()
    buf = render_sonification(np.arange(10.0), cfg)
    assert len(buf) == 220500
    for n in (1, 3, 7):
        buf = render_sonification(np.arange(float(n)), cfg)
        assert abs(len(buf) - round(n * cfg.seg_dur_s * FS)) <= 1


def test_render_bounded_and_finite():
    rng = np.random.default_rng(6)
    buf = render_sonification(rng.normal(size=12), SonificationConfig())
    assert np.all(np.isfinite(buf.samples))
    assert np.max(np.abs(buf.samples)) <= 1.0
    assert np.max(np.abs(buf.samples)) == pytest.approx(0.89, abs=1e-9)


def test_render_deterministic():
    vals = [800.0, 950.0, 700.0, 1100.0]
    cfg = SonificationConfig()
    a = render_sonification(vals, cfg)
    b = render_sonification(vals, cfg)
    assert np.array_equal(a.samples, b.samples)


def test_render_constant_series_fundamental_at_midpoint():
    cfg = SonificationConfig(seg_dur_s=0.25)
    buf = render_sonification([5.0] * 8, cfg)
    # constant series normalizes to 0.5 -> f0 at the range midpoint
    expected_f0 = 0.5 * (cfg.f0_min_hz + cfg.f0_max_hz)
    seg = buf.samples[FS // 4: FS // 2]
    spectrum = np.abs(np.fft.rfft(seg * np.hanning(seg.size)))
    freqs = np.fft.rfftfreq(seg.size, 1.0 / FS)
    low = freqs < 1.5 * expected_f0
    peak = freqs[low][np.argmax(spectrum[low])]
    assert abs(peak - expected_f0) < 2 * FS / seg.size


# wav io ----------------------------------------------------------------------

def test_write_wav_header_fields(tmp_path):
    buf = AudioBuffer(np.zeros(FS), FS)
    dest = tmp_path / "silence.wav"
    write_wav(buf, dest)
    raw = dest.read_bytes()
    assert raw[0:4] == b"RIFF" and raw[8:12] == b"WAVE"
    with wave.open(str(dest), "rb") as wf:
        assert wf.getnchannels() == 1
        assert wf.getsampwidth() == 2
        assert wf.getframerate() == FS
        assert wf.getnframes() == FS
        data = wf.readframes(FS)
    assert len(data) == 2 * FS
    assert data == b"\x00" * (2 * FS)


def test_write_wav_quantization_endpoints(tmp_path):
    buf = AudioBuffer(np.array([1.0, -1.0, 0.0]), FS)
    dest = tmp_path / "ends.wav"
    write_wav(buf, dest)
    with wave.open(str(dest), "rb") as wf:
        vals = struct.unpack("<3h", wf.readframes(3))
    assert vals == (32767, -32768, 0)


def test_wav_round_trip_exact(tmp_path):
    rng = np.random.default_rng(14)
    samples = rng.uniform(-1, 1, size=2000)
    dest = tmp_path / "rt.wav"
    write_wav(AudioBuffer(samples, FS), dest)
    back = read_wav(dest)
    assert back.sample_rate_hz == FS
    # re-quantizing the read samples reproduces the stored words exactly
    q1 = np.clip(np.round(np.clip(samples, -1, 1) * 32768.0),
                 -32768, 32767)
    q2 = np.round(back.samples * 32768.0)
    assert np.array_equal(q1, q2)
