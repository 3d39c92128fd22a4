"""Time-frequency front end: framing, STFT/ISTFT, and WAV I/O.

All processing runs at 16 kHz mono. The default transform uses a 320-sample
(20 ms) periodic square-root Hann window with 50% overlap, which satisfies
COLA exactly, so analysis -> synthesis is an identity on interior samples.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SAMPLE_RATE = 16000


class SpectralError(ValueError):
    """Raised for malformed signals, configs, or WAV files."""


@dataclass
class Waveform:
    """Mono time-domain signal, nominal amplitude range [-1, 1]."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise SpectralError(f"waveform must be 1-D, got shape {self.samples.shape}")
        if self.sample_rate <= 0:
            raise SpectralError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise SpectralError("waveform contains non-finite samples")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def sqrt_hann_window(win_len: int) -> np.ndarray:
    """Periodic Hann raised to 1/2; used for both analysis and synthesis."""
    n = np.arange(win_len)
    hann = 0.5 * (1.0 - np.cos(2.0 * np.pi * n / win_len))
    return np.sqrt(hann)


@dataclass
class StftConfig:
    win_len: int = 320
    hop: int = 160
    fft_len: int = 320
    window: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.win_len <= 0 or self.hop <= 0:
            raise SpectralError("win_len and hop must be positive")
        if self.win_len % self.hop != 0:
            raise SpectralError(f"hop {self.hop} must divide win_len {self.win_len}")
        if self.fft_len < self.win_len:
            raise SpectralError(f"fft_len {self.fft_len} < win_len {self.win_len}")
        if self.window is None:
            self.window = sqrt_hann_window(self.win_len)
        self.window = np.asarray(self.window, dtype=np.float64)
        if self.window.shape != (self.win_len,):
            raise SpectralError("window length must equal win_len")

    @property
    def n_bins(self) -> int:
        return self.fft_len // 2 + 1

    def n_frames(self, n_samples: int) -> int:
        if n_samples < self.win_len:
            raise SpectralError(
                f"input of {n_samples} samples is shorter than one window ({self.win_len})"
            )
        return 1 + (n_samples - self.win_len) // self.hop


@dataclass
class Spectrogram:
    """One-sided complex T-F representation, bins shaped (F, N)."""

    bins: np.ndarray
    config: StftConfig

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.complex128)
        if self.bins.ndim != 2:
            raise SpectralError(f"bins must be 2-D, got shape {self.bins.shape}")
        if self.bins.shape[0] != self.config.n_bins:
            raise SpectralError(
                f"bin count {self.bins.shape[0]} inconsistent with config "
                f"({self.config.n_bins} expected)"
            )
        if not np.all(np.isfinite(self.bins)):
            raise SpectralError("spectrogram contains non-finite bins")

    @property
    def n_frames(self) -> int:
        return self.bins.shape[1]


@dataclass
class Frame:
    """One analysis frame: complex bins of length F plus its frame index."""

    bins: np.ndarray
    index: int

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=np.complex128)
        if self.bins.ndim != 1:
            raise SpectralError("frame bins must be 1-D")


def stft(w: Waveform, c: StftConfig | None = None) -> Spectrogram:
    """Analysis transform. Frames of win_len every hop samples, no padding;
    a trailing remainder shorter than a full window is dropped."""
    c = c or StftConfig()
    n = c.n_frames(len(w))
    idx = np.arange(c.win_len)[None, :] + c.hop * np.arange(n)[:, None]
    frames = w.samples[idx] * c.window[None, :]
    bins = np.fft.rfft(frames, n=c.fft_len, axis=1).T
    return Spectrogram(bins=bins, config=c)


def istft(s: Spectrogram) -> Waveform:
    """Synthesis by windowed overlap-add, normalized by the window-square
    overlap sum; exact COLA makes interior reconstruction an identity."""
    c = s.config
    n = s.n_frames
    out_len = c.win_len + (n - 1) * c.hop
    frames = np.fft.irfft(s.bins.T, n=c.fft_len, axis=1)[:, : c.win_len]
    frames = frames * c.window[None, :]
    out = np.zeros(out_len)
    wsum = np.zeros(out_len)
    for k in range(n):
        out[k * c.hop : k * c.hop + c.win_len] += frames[k]
        wsum[k * c.hop : k * c.hop + c.win_len] += c.window**2
    nz = wsum > 1e-10
    out[nz] /= wsum[nz]
    return Waveform(samples=out)


def frame_stream(w: Waveform, c: StftConfig | None = None):
    """Yield Frames identical to the columns of stft(w, c), in order."""
    c = c or StftConfig()
    n = c.n_frames(len(w))
    for k in range(n):
        seg = w.samples[k * c.hop : k * c.hop + c.win_len] * c.window
        yield Frame(bins=np.fft.rfft(seg, n=c.fft_len), index=k)


def read_wav(path: str | Path) -> Waveform:
    """Read 16-bit PCM mono 16 kHz WAV; anything else is rejected."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as f:
            n_channels = f.getnchannels()
            sampwidth = f.getsampwidth()
            rate = f.getframerate()
            raw = f.readframes(f.getnframes())
    except (OSError, wave.Error) as e:
        raise SpectralError(f"cannot read WAV {path}: {e}") from e
    if n_channels != 1:
        raise SpectralError(f"{path}: expected mono, got {n_channels} channels")
    if sampwidth != 2:
        raise SpectralError(f"{path}: expected 16-bit PCM, got {8 * sampwidth}-bit")
    if rate != SAMPLE_RATE:
        raise SpectralError(f"{path}: expected {SAMPLE_RATE} Hz, got {rate} Hz")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return Waveform(samples=samples, sample_rate=rate)


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write 16-bit PCM mono WAV; values are clipped to [-1, 1)."""
    if w.sample_rate != SAMPLE_RATE:
        raise SpectralError(f"only {SAMPLE_RATE} Hz output is supported")
    pcm = np.clip(np.round(w.samples * 32768.0), -32768, 32767).astype("<i2")
    path = Path(path)
    try:
        with wave.open(str(path), "wb") as f:
            f.setnchannels(1)
            f.setsampwidth(2)
            f.setframerate(w.sample_rate)
            f.writeframes(pcm.tobytes())
    except OSError as e:
        raise SpectralError(f"cannot write WAV {path}: {e}") from e
