import numpy as np
import pytest

from echoregen.align import DelayEstimate, align_far, estimate_delay
from echoregen.echosim import (
    RoomSpec,
    ScenarioSpec,
    image_method_rir,
    mix_scenario,
    pink_noise,
    synth_speech,
)
from echoregen.spectral import SAMPLE_RATE, Waveform


def test_known_shift_recovered():
    rng = np.random.default_rng(0)
    far = Waveform(rng.standard_normal(32000) * 0.1)
    mic = align_far(far, DelayEstimate(lag=800, confidence=1.0))
    d = estimate_delay(mic, far)
    assert abs(d.lag - 800) <= 2
    assert d.confidence > 0.5


def test_uncorrelated_low_confidence():
    rng = np.random.default_rng(1)
    far = Waveform(rng.standard_normal(24000) * 0.1)
    mic = Waveform(rng.standard_normal(24000) * 0.1)
    d = estimate_delay(mic, far)
    assert d.confidence < 0.2


def test_identical_signals():
    rng = np.random.default_rng(2)
    x = Waveform(rng.standard_normal(20000) * 0.1)
    d = estimate_delay(x, x)
    assert d.lag == 0
    assert d.confidence > 0.8


def test_silent_input_zero_confidence():
    silent = Waveform(np.zeros(16000))
    loud = Waveform(np.ones(16000) * 0.1)
    d = estimate_delay(silent, loud)
    assert d.lag == 0 and d.confidence == 0.0


def test_requires_one_second():
    short = Waveform(np.zeros(8000))
    with pytest.raises(ValueError, match="1 s"):
        estimate_delay(short, short)


def test_align_far_identity_and_shift():
    rng = np.random.default_rng(3)
    x = Waveform(rng.standard_normal(1000))
    same = align_far(x, DelayEstimate(lag=0, confidence=1.0))
    assert np.array_equal(same.samples, x.samples)

    fwd = align_far(x, DelayEstimate(lag=160, confidence=1.0))
    assert np.all(fwd.samples[:160] == 0)
    assert np.array_equal(fwd.samples[160:], x.samples[:-160])

    back = align_far(fwd, DelayEstimate(lag=-160, confidence=1.0))
    assert np.array_equal(back.samples[:-160], x.samples[:-160])
    assert np.all(back.samples[-160:] == 0)


def test_recovery_on_synthetic_fest_conversations():
    """Echo-path ground truth = playback delay + direct propagation."""
    hits = 0
    cases = 0
    for seed, delay_ms, ser in [
        (10, 0.0, 0.0), (11, 50.0, -10.0), (12, 120.0, 5.0), (13, 250.0, 0.0),
        (14, 400.0, -5.0), (15, 540.0, 10.0), (16, 30.0, -10.0), (17, 580.0, 0.0),
        (18, 5.0, 3.0), (19, 330.0, -8.0), (20, 220.0, 12.0), (21, 90.0, 0.0),
    ]:
        rng = np.random.default_rng(seed)
        n = 2 * SAMPLE_RATE
        near = synth_speech(rng, n)
        far = synth_speech(rng, n)
        noise = pink_noise(rng, n)
        room = RoomSpec((5.0, 4.0, 3.0), (1.5, 1.2, 1.1), (3.4, 2.8, 1.6), 0.25)
        rir = image_method_rir(room)
        spec = ScenarioSpec(kind="FEST", delay_ms=delay_ms, snr_db=40.0, ser_db=ser)
        conv = mix_scenario(near, far, rir, spec, noise)
        d = estimate_delay(conv.mic, conv.far)
        direct = np.linalg.norm(
            np.array(room.src_pos) - np.array(room.mic_pos)
        ) / 343.0
        truth = int(round(delay_ms * SAMPLE_RATE / 1000.0 + direct * SAMPLE_RATE))
        cases += 1
        if abs(d.lag - truth) <= 2:
            hits += 1
    assert hits / cases >= 0.95, f"only {hits}/{cases} recovered"


def test_lag_bound_enforced():
    with pytest.raises(ValueError, match="exceeds"):
        DelayEstimate(lag=20000, confidence=0.5)
