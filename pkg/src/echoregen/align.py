"""Far-end-to-echo delay estimation and compensation.

Uses generalized cross-correlation with the phase transform, which is
robust to the spectral coloring the room response puts on the echo. The
delay is estimated once per utterance; the aligned far-end signal feeds
the far-guided noise of the diffusion stages.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import SAMPLE_RATE, Waveform

MAX_LAG = 9600  # 600 ms at 16 kHz


@dataclass
class DelayEstimate:
    lag: int
    confidence: float

    def __post_init__(self):
        if abs(self.lag) > MAX_LAG:
            raise ValueError(f"lag {self.lag} exceeds +-{MAX_LAG} samples")
        self.confidence = float(np.clip(self.confidence, 0.0, 1.0))


def estimate_delay(mic: Waveform, far: Waveform, max_lag: int = MAX_LAG) -> DelayEstimate:
    """GCC-PHAT lag of the far-end signal inside the mic signal.

    Positive lag means the echo arrives after the reference. Confidence is
    the prominence of the main correlation peak over the strongest
    competitor outside its immediate neighborhood.
    """
    if len(mic) < SAMPLE_RATE or len(far) < SAMPLE_RATE:
        raise ValueError("delay estimation needs at least 1 s of both signals")
    if np.mean(mic.samples**2) < 1e-10 or np.mean(far.samples**2) < 1e-10:
        return DelayEstimate(lag=0, confidence=0.0)

    n = len(mic.samples) + len(far.samples)
    nfft = 1 << (n - 1).bit_length()
    spec = np.fft.rfft(mic.samples, nfft) * np.conj(np.fft.rfft(far.samples, nfft))
    mag = np.abs(spec)
    spec = np.where(mag > 1e-12, spec / np.maximum(mag, 1e-12), 0.0)
    cc = np.fft.irfft(spec, nfft)
    cc = np.concatenate([cc[-max_lag:], cc[: max_lag + 1]])  # lags -max..+max

    peak_idx = int(np.argmax(np.abs(cc)))
    lag = peak_idx - max_lag
    peak = abs(cc[peak_idx])
    if peak <= 0:
        return DelayEstimate(lag=0, confidence=0.0)
    guard = 16
    masked = np.abs(cc).copy()
    masked[max(0, peak_idx - guard) : peak_idx + guard + 1] = 0.0
    runner_up = float(np.max(masked))
    confidence = 1.0 - runner_up / peak
    return DelayEstimate(lag=lag, confidence=confidence)


def align_far(far: Waveform, d: DelayEstimate) -> Waveform:
    """Shift far by the estimated lag, zero padded to the same length."""
    out = np.zeros_like(far.samples)
    k = d.lag
    n = len(far.samples)
    if k >= 0:
        if k < n:
            out[k:] = far.samples[: n - k]
    else:
        if -k < n:
            out[: n + k] = far.samples[-k:]
    return Waveform(out, far.sample_rate)
