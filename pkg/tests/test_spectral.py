import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from echoregen.spectral import (
    Frame,
    SpectralError,
    Spectrogram,
    StftConfig,
    Waveform,
    frame_stream,
    istft,
    read_wav,
    sqrt_hann_window,
    stft,
    write_wav,
)


def direct_dft_frame(x, window, fft_len):
    """Oracle: one-sided DFT of a windowed frame by explicit summation."""
    xw = np.zeros(fft_len)
    xw[: len(window)] = x[: len(window)] * window
    n = np.arange(fft_len)
    out = np.empty(fft_len // 2 + 1, dtype=complex)
    for f in range(fft_len // 2 + 1):
        out[f] = np.sum(xw * np.exp(-2j * np.pi * f * n / fft_len))
    return out


def test_cola_window_square_sum_constant():
    c = StftConfig()
    acc = np.zeros(c.win_len * 8)
    for k in range((len(acc) - c.win_len) // c.hop + 1):
        acc[k * c.hop : k * c.hop + c.win_len] += c.window**2
    interior = acc[c.win_len : -c.win_len]
    assert np.max(np.abs(interior - 1.0)) < 1e-10


def test_stft_zero_input():
    w = Waveform(np.zeros(1600))
    s = stft(w)
    assert s.bins.shape == (161, 9)
    assert np.all(s.bins == 0)


def test_stft_impulse_flat_magnitude():
    c = StftConfig()
    for pos in (0, 7):
        x = np.zeros(1600)
        x[pos] = 1.0
        s = stft(Waveform(x), c)
        mags = np.abs(s.bins[:, 0])
        assert np.allclose(mags, c.window[pos], atol=1e-12)


def test_stft_sine_peak_bin_and_dft_oracle():
    c = StftConfig()
    t = np.arange(16000) / 16000.0
    w = Waveform(np.sin(2 * np.pi * 1000.0 * t))
    s = stft(w, c)
    # 1 kHz at fft_len 320 / 16 kHz lands exactly on bin 20
    for k in range(s.n_frames):
        assert np.argmax(np.abs(s.bins[:, k])) == 20
    # spot-check a few frames against a direct DFT
    for k in (0, 3, 50):
        seg = w.samples[k * c.hop : k * c.hop + c.win_len]
        oracle = direct_dft_frame(seg, c.window, c.fft_len)
        assert np.max(np.abs(s.bins[:, k] - oracle)) < 1e-8


def test_stft_rejects_short_input():
    with pytest.raises(SpectralError, match="shorter than one window"):
        stft(Waveform(np.zeros(100)))


def test_stft_frame_count_formula():
    c = StftConfig()
    for n in (320, 480, 1600, 1601, 1759):
        w = Waveform(np.zeros(n))
        assert stft(w, c).n_frames == 1 + (n - c.win_len) // c.hop


def test_istft_roundtrip_white_noise():
    rng = np.random.default_rng(0)
    w = Waveform(rng.standard_normal(4000) * 0.3)
    c = StftConfig()
    rec = istft(stft(w, c))
    interior = slice(c.win_len, len(w) - c.win_len)
    assert np.max(np.abs(rec.samples[interior] - w.samples[interior])) < 1e-6


def test_istft_zero():
    s = Spectrogram(np.zeros((161, 5), dtype=complex), StftConfig())
    assert np.all(istft(s).samples == 0)


def test_istft_single_frame_reproduces_windowed_content():
    rng = np.random.default_rng(1)
    c = StftConfig()
    x = rng.standard_normal(c.win_len)
    s = stft(Waveform(x), c)
    assert s.n_frames == 1
    rec = istft(s).samples
    # normalization divides by window**2, so content returns wherever the
    # window is meaningfully nonzero
    mask = c.window**2 > 1e-6
    assert np.max(np.abs(rec[mask] - x[mask])) < 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_stft_linearity(seed):
    rng = np.random.default_rng(seed)
    w1 = rng.standard_normal(800)
    w2 = rng.standard_normal(800)
    a, b = rng.uniform(-2, 2, size=2)
    c = StftConfig()
    lhs = stft(Waveform(a * w1 + b * w2), c).bins
    rhs = a * stft(Waveform(w1), c).bins + b * stft(Waveform(w2), c).bins
    assert np.max(np.abs(lhs - rhs)) < 1e-9


def test_frame_stream_matches_stft_columns():
    rng = np.random.default_rng(2)
    w = Waveform(rng.standard_normal(1600))
    c = StftConfig()
    s = stft(w, c)
    frames = list(frame_stream(w, c))
    assert [f.index for f in frames] == list(range(9))
    for f in frames:
        assert np.array_equal(f.bins, s.bins[:, f.index])


def test_frame_stream_drops_partial_tail():
    c = StftConfig()
    frames = list(frame_stream(Waveform(np.zeros(1600 + 100)), c))
    assert len(frames) == 9


def test_parseval_consistency():
    rng = np.random.default_rng(3)
    c = StftConfig()
    x = rng.standard_normal(c.win_len)
    s = stft(Waveform(x), c)
    full = np.concatenate([s.bins[:, 0], np.conj(s.bins[-2:0:-1, 0])])
    freq_energy = np.sum(np.abs(full) ** 2) / c.fft_len
    time_energy = np.sum((x * c.window) ** 2)
    assert abs(freq_energy - time_energy) < 1e-9 * max(time_energy, 1.0)


def test_config_invariants():
    with pytest.raises(SpectralError):
        StftConfig(win_len=320, hop=150)
    with pytest.raises(SpectralError):
        StftConfig(win_len=320, hop=160, fft_len=256)
    assert StftConfig().n_bins == 161


def test_sqrt_hann_is_periodic():
    w = sqrt_hann_window(320)
    assert w[0] == 0.0
    # periodic (DFT-even) symmetry: w[k] == w[320 - k]
    assert np.allclose(w[1:] ** 2, (w[1:] ** 2)[::-1])


def test_waveform_rejects_nonfinite():
    with pytest.raises(SpectralError):
        Waveform(np.array([0.0, np.nan]))


def test_wav_roundtrip_and_rejections(tmp_path):
    rng = np.random.default_rng(4)
    w = Waveform(rng.uniform(-0.5, 0.5, 1600))
    p = tmp_path / "x.wav"
    write_wav(p, w)
    back = read_wav(p)
    assert back.sample_rate == 16000
    assert np.max(np.abs(back.samples - w.samples)) < 1.0 / 32768

    import wave as wave_mod

    bad = tmp_path / "stereo.wav"
    with wave_mod.open(str(bad), "wb") as f:
        f.setnchannels(2)
        f.setsampwidth(2)
        f.setframerate(16000)
        f.writeframes(b"\x00" * 400)
    with pytest.raises(SpectralError, match="mono"):
        read_wav(bad)

    bad_rate = tmp_path / "rate.wav"
    with wave_mod.open(str(bad_rate), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(8000)
        f.writeframes(b"\x00" * 400)
    with pytest.raises(SpectralError, match="8000"):
        read_wav(bad_rate)

    with pytest.raises(SpectralError, match="cannot read"):
        read_wav(tmp_path / "missing.wav")


def test_frame_type_checks():
    f = Frame(bins=np.zeros(161, dtype=complex), index=0)
    assert f.bins.dtype == np.complex128
