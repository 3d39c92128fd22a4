"""Synthetic conversation generator for echo-cancellation experiments.

Builds double-talk scenes from surrogate speech: a shoebox room impulse
response (image method), playback delay, loudspeaker nonlinearity, SNR/SER
mixing, optional time-variant echo-path changes, and FEST/NEST/DT scenario
splitting. Every draw is reproducible from a root seed plus item index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import fftconvolve, lfilter

from .spectral import SAMPLE_RATE, Waveform, write_wav

SPEED_OF_SOUND = 343.0

RT60_RANGES = [(0.05, 0.3), (0.3, 0.6), (0.6, 1.0), (1.0, 1.5)]
RT60_WEIGHTS = [0.6, 0.3, 0.08, 0.02]
DELAY_RANGES_MS = [(-20.0, 0.0), (0.0, 200.0), (200.0, 400.0), (400.0, 600.0)]
# printed weights sum to 1.10; renormalized to preserve the proportions
DELAY_WEIGHTS = [w / 1.10 for w in (0.05, 0.6, 0.4, 0.05)]
SNR_RANGES_DB = [(0.0, 10.0), (10.0, 20.0), (20.0, 30.0), (30.0, 40.0)]
SNR_WEIGHTS = [0.1, 0.1, 0.3, 0.5]
SER_RANGES_DB = [(-10.0, 0.0), (0.0, 10.0), (10.0, 30.0), (30.0, 40.0)]
SER_WEIGHTS = [0.1, 0.5, 0.3, 0.1]

SCENARIOS = ("FEST", "NEST", "DT")
ROLES = ("near", "far", "echo", "mic")


class EchosimError(ValueError):
    """Raised for infeasible rooms, degenerate mixes, or bad parameters."""


@dataclass
class RoomSpec:
    dims: tuple[float, float, float]
    src_pos: tuple[float, float, float]
    mic_pos: tuple[float, float, float]
    rt60: float

    def __post_init__(self):
        dims = np.asarray(self.dims, dtype=float)
        src = np.asarray(self.src_pos, dtype=float)
        mic = np.asarray(self.mic_pos, dtype=float)
        if np.any(src <= 0) or np.any(src >= dims):
            raise EchosimError(f"source {self.src_pos} not strictly inside room {self.dims}")
        if np.any(mic <= 0) or np.any(mic >= dims):
            raise EchosimError(f"mic {self.mic_pos} not strictly inside room {self.dims}")
        if np.linalg.norm(src - mic) < 0.5:
            raise EchosimError("source-mic distance must be at least 0.5 m")
        if not 0.05 <= self.rt60 <= 1.5:
            raise EchosimError(f"rt60 {self.rt60} outside [0.05, 1.5] s")


@dataclass
class ScenarioSpec:
    kind: str = "DT"
    delay_ms: float = 0.0
    snr_db: float = 30.0
    ser_db: float = 0.0
    nonlinearity: tuple = ("none",)
    time_variant: tuple = ("none",)

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise EchosimError(f"unknown scenario kind {self.kind!r}")
        if not -20.0 <= self.delay_ms <= 600.0:
            raise EchosimError(f"delay {self.delay_ms} ms outside [-20, 600]")
        if not 0.0 <= self.snr_db <= 40.0:
            raise EchosimError(f"snr {self.snr_db} dB outside [0, 40]")
        if not -10.0 <= self.ser_db <= 40.0:
            raise EchosimError(f"ser {self.ser_db} dB outside [-10, 40]")


@dataclass
class Conversation:
    near: Waveform
    far: Waveform
    echo: Waveform
    mic: Waveform
    spec: ScenarioSpec
    room: RoomSpec | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.near)
        if not (len(self.far) == len(self.echo) == len(self.mic) == n):
            raise EchosimError("conversation waveforms must share one length")


def _categorical_uniform(rng: np.random.Generator, ranges, weights) -> float:
    idx = rng.choice(len(ranges), p=np.asarray(weights) / np.sum(weights))
    lo, hi = ranges[idx]
    return float(rng.uniform(lo, hi))


def sample_rt60(rng: np.random.Generator) -> float:
    return _categorical_uniform(rng, RT60_RANGES, RT60_WEIGHTS)


def sample_delay(rng: np.random.Generator) -> float:
    return _categorical_uniform(rng, DELAY_RANGES_MS, DELAY_WEIGHTS)


def sample_snr(rng: np.random.Generator) -> float:
    return _categorical_uniform(rng, SNR_RANGES_DB, SNR_WEIGHTS)


def sample_ser(rng: np.random.Generator) -> float:
    return _categorical_uniform(rng, SER_RANGES_DB, SER_WEIGHTS)


def sample_nonlinearity(rng: np.random.Generator) -> tuple:
    kind = rng.choice(["none", "arctan", "polynomial"])
    if kind == "arctan":
        return ("arctan", float(rng.uniform(1.0, 10.0)))
    if kind == "polynomial":
        c1 = float(rng.uniform(0.8, 1.0))
        c2 = float(rng.uniform(-0.3, 0.3))
        c3 = float(rng.uniform(-0.3, 0.3))
        return ("polynomial", c1, c2, c3)
    return ("none",)


def min_feasible_rt60(dims) -> float:
    """Sabine bound: absorption hits 1 when rt60 = 0.161 V / S."""
    lx, ly, lz = dims
    volume = lx * ly * lz
    surface = 2.0 * (lx * ly + lx * lz + ly * lz)
    return 0.161 * volume / surface


def _image_sum(dims, src, mic, beta, max_dist, n_taps, max_order, sample_rate, c):
    """Scatter all image-source arrivals within max_dist into a tap buffer."""
    # full windowed-sinc placement for the early part; dense late images get
    # nearest-sample taps, which leaves the energy-decay curve unchanged
    sinc_cutoff = 40.0
    half = 40  # sinc support: +-40 samples
    sinc_n = np.arange(-half, half + 1)
    h = np.zeros(n_taps + 2 * half + 2)

    counts = np.ceil(max_dist / (2.0 * dims)).astype(int)
    if max_order is not None:
        counts = np.minimum(counts, max_order)
    ry = np.arange(-counts[1], counts[1] + 1)
    rz = np.arange(-counts[2], counts[2] + 1)
    pg = np.array([(px, py, pz) for px in (0, 1) for py in (0, 1) for pz in (0, 1)])

    for rx in range(-counts[0], counts[0] + 1):
        r = np.stack(np.meshgrid(np.array([rx]), ry, rz, indexing="ij"), axis=-1).reshape(-1, 3)
        # image = (1-2p)*src + 2r*L for each of the 8 parities
        img = (1.0 - 2.0 * pg[None, :, :]) * src[None, None, :] + 2.0 * r[:, None, :] * dims
        dist = np.linalg.norm(img - mic[None, None, :], axis=-1).reshape(-1)
        n_refl = (
            (np.abs(r[:, None, :] - pg[None, :, :]) + np.abs(r[:, None, :]))
            .sum(axis=-1)
            .reshape(-1)
        )
        keep = dist <= max_dist
        if max_order is not None:
            keep &= n_refl <= max_order
        dist, n_refl = dist[keep], n_refl[keep]
        if dist.size == 0:
            continue
        amp = (beta**n_refl) / (4.0 * np.pi * dist)
        delays = dist * sample_rate / c

        near_field = dist <= sinc_cutoff
        if np.any(near_field):
            d_n, a_n = delays[near_field], amp[near_field]
            base = np.floor(d_n).astype(int)
            frac = d_n - base
            arg = sinc_n[None, :] - frac[:, None]
            taps = a_n[:, None] * np.sinc(arg) * 0.5 * (1.0 + np.cos(np.pi * arg / (half + 1)))
            pos = base[:, None] + sinc_n[None, :] + half
            np.add.at(h, pos.reshape(-1), taps.reshape(-1))
        far_field = ~near_field
        if np.any(far_field):
            pos = np.round(delays[far_field]).astype(int) + half
            np.add.at(h, pos, amp[far_field])

    return h[half : half + n_taps]


def image_method_rir(
    room: RoomSpec,
    max_order: int | None = None,
    sample_rate: int = SAMPLE_RATE,
    c: float = SPEED_OF_SOUND,
) -> Waveform:
    """Shoebox room impulse response via the mirror-image source sum.

    Wall reflectivity starts from inverting Sabine's decay formula for the
    requested rt60 and is then corrected against the realized Schroeder
    curve (the raw image sum decays slower than the diffuse-field estimate
    once axial image families dominate). Infeasible rooms (Sabine
    absorption > 1) are rejected. Taps are placed with an 81-point
    Hann-windowed sinc fractional delay.
    """
    dims = np.asarray(room.dims, dtype=float)
    src = np.asarray(room.src_pos, dtype=float)
    mic = np.asarray(room.mic_pos, dtype=float)
    volume = float(np.prod(dims))
    surface = 2.0 * (dims[0] * dims[1] + dims[0] * dims[2] + dims[1] * dims[2])

    sabine_alpha = 0.161 * volume / (room.rt60 * surface)
    if sabine_alpha > 1.0:
        raise EchosimError(
            f"rt60 {room.rt60:.3f} s infeasible for room {room.dims} "
            f"(Sabine absorption {sabine_alpha:.2f} > 1)"
        )
    beta = float(np.sqrt(1.0 - sabine_alpha))

    direct_dist = float(np.linalg.norm(src - mic))
    offset_s = direct_dist / c
    tail_s = 1.45 * room.rt60 + offset_s
    n_taps = int(np.ceil(tail_s * sample_rate)) + 81
    max_dist = tail_s * c

    h = _image_sum(dims, src, mic, beta, max_dist, n_taps, max_order, sample_rate, c)
    for _ in range(3):
        decay = schroeder_decay_db(Waveform(h))
        hit = np.nonzero(decay < -60.0)[0]
        t_meas = (hit[0] / sample_rate if hit.size else tail_s) - offset_s
        if t_meas < 0.02 or abs(t_meas - room.rt60) <= 0.08 * room.rt60:
            break
        # energy decays like beta^(2k): raising beta to t_meas/rt60 rescales
        # the decay time by rt60/t_meas
        beta = float(np.clip(beta ** (t_meas / room.rt60), 1e-6, 0.999999))
        h = _image_sum(dims, src, mic, beta, max_dist, n_taps, max_order, sample_rate, c)

    return Waveform(samples=h)


def schroeder_decay_db(rir: Waveform) -> np.ndarray:
    """Reverse-cumulative energy curve in dB relative to total energy."""
    e = rir.samples**2
    tail = np.cumsum(e[::-1])[::-1]
    total = tail[0]
    if total <= 0:
        raise EchosimError("cannot measure decay of an all-zero impulse response")
    return 10.0 * np.log10(np.maximum(tail / total, 1e-30))


def apply_nonlinearity(x: Waveform, spec: ScenarioSpec | tuple) -> Waveform:
    nl = spec.nonlinearity if isinstance(spec, ScenarioSpec) else spec
    kind = nl[0]
    if kind == "none":
        return Waveform(x.samples.copy(), x.sample_rate)
    if kind == "arctan":
        gain = nl[1]
        return Waveform((2.0 / np.pi) * np.arctan(gain * x.samples), x.sample_rate)
    if kind == "polynomial":
        c1, c2, c3 = nl[1], nl[2], nl[3]
        s = x.samples
        return Waveform(c1 * s + c2 * s**2 + c3 * s**3, x.sample_rate)
    raise EchosimError(f"unknown nonlinearity {kind!r}")


def _shift(x: np.ndarray, k: int) -> np.ndarray:
    """Shift right by k samples (left for negative k), zero padded."""
    out = np.zeros_like(x)
    if k >= 0:
        if k < len(x):
            out[k:] = x[: len(x) - k]
    else:
        if -k < len(x):
            out[: len(x) + k] = x[-k:]
    return out


def _power(x: np.ndarray) -> float:
    return float(np.mean(x**2))


def _render_echo(far: np.ndarray, rir: np.ndarray, spec: ScenarioSpec, gain: float) -> np.ndarray:
    delay_samples = int(round(spec.delay_ms * SAMPLE_RATE / 1000.0))
    driven = apply_nonlinearity(Waveform(_shift(far, delay_samples)), spec).samples
    return gain * fftconvolve(driven, rir)[: len(far)]


def mix_scenario(
    near: Waveform,
    far: Waveform,
    rir: Waveform,
    spec: ScenarioSpec,
    noise: Waveform,
    rng: np.random.Generator | None = None,
    room: RoomSpec | None = None,
) -> Conversation:
    """Assemble mic = near + echo + noise at the requested SER/SNR.

    Gains are fitted on the full double-talk mix; FEST then zeroes the
    near signal and NEST zeroes the far/echo pair, so power ratios stay
    referenced to the conversation's near-end speech. If the mix would
    clip 16-bit range, near/echo/noise are attenuated together (ratios
    preserved); the far reference is never rescaled, so the echo can be
    regenerated exactly from it through the nonlinearity.
    """
    n = len(near)
    if len(far) != n:
        raise EchosimError("near and far must have equal length")
    delay_samples = int(round(spec.delay_ms * SAMPLE_RATE / 1000.0))
    if abs(delay_samples) >= n:
        raise EchosimError("delay exceeds signal length")

    p_near = _power(near.samples)
    if p_near <= 1e-12:
        raise EchosimError("near signal has no power; SER/SNR are undefined")

    echo_unit = _render_echo(far.samples, rir.samples, spec, gain=1.0)
    p_echo = _power(echo_unit)
    if p_echo <= 1e-14:
        raise EchosimError("echo path produced no power; SER is undefined")
    echo_gain = float(np.sqrt(p_near / (p_echo * 10.0 ** (spec.ser_db / 10.0))))

    noise_s = noise.samples
    if len(noise_s) < n:
        reps = int(np.ceil(n / len(noise_s)))
        noise_s = np.tile(noise_s, reps)
    if rng is not None and len(noise_s) > n:
        start = int(rng.integers(0, len(noise_s) - n + 1))
        noise_s = noise_s[start : start + n]
    noise_s = noise_s[:n]
    p_noise = _power(noise_s)
    if p_noise <= 1e-14:
        raise EchosimError("noise signal has no power; SNR is undefined")
    noise_gain = float(np.sqrt(p_near / (p_noise * 10.0 ** (spec.snr_db / 10.0))))

    peak = float(np.max(np.abs(near.samples + echo_gain * echo_unit + noise_gain * noise_s)))
    scale = 0.98 / peak if peak > 0.98 else 1.0

    near_out = scale * near.samples
    far_out = far.samples.copy()
    echo = scale * echo_gain * echo_unit
    noise_scaled = scale * noise_gain * noise_s
    if spec.kind == "FEST":
        near_out = np.zeros(n)
    elif spec.kind == "NEST":
        far_out = np.zeros(n)
        echo = np.zeros(n)
    mic = near_out + echo + noise_scaled

    meta = {
        "rir": rir.samples.copy(),
        "echo_gain": scale * echo_gain,
        "noise": noise_scaled,
        "scale": scale,
    }
    return Conversation(
        near=Waveform(near_out),
        far=Waveform(far_out),
        echo=Waveform(echo),
        mic=Waveform(mic),
        spec=spec,
        room=room,
        meta=meta,
    )


def time_variant_perturb(conv: Conversation, rng: np.random.Generator) -> Conversation:
    """Apply the scenario's time-variant change and rebuild the mix.

    cut_insert removes or silences a 10-200 ms span of the near or far
    signal, leaving the other untouched, which skews their alignment from
    that point on; rir_switch splices the echo to a second impulse response
    at a frame boundary. The mic is recomposed afterwards so the additive
    identity always holds.
    """
    tv = conv.spec.time_variant
    kind = tv[0]
    if kind == "none":
        return conv
    if kind == "cut_insert":
        len_ms, prob = tv[1], tv[2]
        if not 0.0 <= prob <= 0.10:
            raise EchosimError(f"cut_insert probability {prob} outside [0, 0.10]")
        if rng.uniform() >= prob:
            return conv
        seg = int(round(len_ms * SAMPLE_RATE / 1000.0))
        near_s, far_s = conv.near.samples.copy(), conv.far.samples.copy()
        target = rng.choice(["near", "far"])
        op = rng.choice(["cut", "insert"])
        sig = near_s if target == "near" else far_s
        offset = int(rng.integers(0, max(1, len(sig) - seg)))
        if op == "cut":
            sig = np.delete(sig, slice(offset, offset + seg))
        else:
            sig = np.insert(sig, offset, np.zeros(seg))
        if target == "near":
            near_s = sig
        else:
            far_s = sig
        n = min(len(near_s), len(far_s))
        near_s, far_s = near_s[:n], far_s[:n]
        echo = _render_echo(far_s, conv.meta["rir"], conv.spec, conv.meta["echo_gain"])
        noise = conv.meta["noise"][:n]
        if conv.spec.kind == "FEST":
            near_s = np.zeros(n)
        if conv.spec.kind == "NEST":
            far_s, echo = np.zeros(n), np.zeros(n)
        meta = dict(conv.meta)
        meta["noise"] = noise
        meta["perturbation"] = (op, target, offset, seg)
        return Conversation(
            near=Waveform(near_s),
            far=Waveform(far_s),
            echo=Waveform(echo),
            mic=Waveform(near_s + echo + noise),
            spec=conv.spec,
            room=conv.room,
            meta=meta,
        )
    if kind == "rir_switch":
        frame = int(tv[1])
        if "rir_b" not in conv.meta:
            raise EchosimError("rir_switch requires a second impulse response in meta['rir_b']")
        boundary = min(frame * 160, len(conv.far))
        echo_a = _render_echo(conv.far.samples, conv.meta["rir"], conv.spec, conv.meta["echo_gain"])
        echo_b = _render_echo(
            conv.far.samples, conv.meta["rir_b"], conv.spec, conv.meta["echo_gain"]
        )
        echo = np.concatenate([echo_a[:boundary], echo_b[boundary:]])
        if conv.spec.kind == "NEST":
            echo = np.zeros_like(echo)
        noise = conv.meta["noise"]
        meta = dict(conv.meta)
        meta["switch_boundary"] = boundary
        return Conversation(
            near=conv.near,
            far=conv.far,
            echo=Waveform(echo),
            mic=Waveform(conv.near.samples + echo + noise),
            spec=conv.spec,
            room=conv.room,
            meta=meta,
        )
    raise EchosimError(f"unknown time-variant kind {kind!r}")


def synth_speech(rng: np.random.Generator, n_samples: int) -> Waveform:
    """Surrogate talker: pulse-plus-noise excitation through slowly varying
    formant resonators, gated by a syllabic on/off envelope."""
    sr = SAMPLE_RATE
    out = np.zeros(n_samples)
    pos = 0
    while pos < n_samples:
        burst = int(rng.integers(int(0.12 * sr), int(0.35 * sr)))
        gap = int(rng.integers(int(0.04 * sr), int(0.18 * sr)))
        end = min(pos + burst, n_samples)
        seg_len = end - pos
        if seg_len > 80:
            pitch = rng.uniform(80.0, 220.0)
            period = max(2, int(sr / pitch))
            exc = np.zeros(seg_len)
            exc[::period] = 1.0
            exc += 0.25 * rng.standard_normal(seg_len)
            seg = exc
            for lo, hi in ((280.0, 900.0), (1000.0, 2200.0), (2300.0, 3400.0)):
                f0 = rng.uniform(lo, hi)
                bw = rng.uniform(60.0, 200.0)
                rho = np.exp(-np.pi * bw / sr)
                a = [1.0, -2.0 * rho * np.cos(2.0 * np.pi * f0 / sr), rho**2]
                seg = lfilter([1.0 - rho], a, seg)
            ramp = min(160, seg_len // 4)
            env = np.ones(seg_len)
            env[:ramp] = np.linspace(0.0, 1.0, ramp)
            env[-ramp:] = np.linspace(1.0, 0.0, ramp)
            out[pos:end] = seg * env
        pos = end + gap
    rms = np.sqrt(np.mean(out**2))
    if rms > 0:
        out *= 0.08 / rms
    return Waveform(np.clip(out, -0.99, 0.99))


def pink_noise(rng: np.random.Generator, n_samples: int) -> Waveform:
    """Approximate 1/f noise (Kellet's 3-pole IIR shaping of white noise)."""
    b = [0.049922035, -0.095993537, 0.050612699, -0.004408786]
    a = [1.0, -2.494956002, 2.017265875, -0.522189400]
    x = lfilter(b, a, rng.standard_normal(n_samples + 1600))[1600:]
    rms = np.sqrt(np.mean(x**2))
    return Waveform(0.05 * x / rms)


def _load_pool(directory: str | Path | None):
    if directory is None:
        return None
    paths = sorted(Path(directory).glob("*.wav"))
    if not paths:
        raise EchosimError(f"no WAV files found in {directory}")
    return paths


def _draw_signal(rng, pool, n_samples, synth_fn):
    from .spectral import read_wav

    if pool is None:
        return synth_fn(rng, n_samples)
    path = pool[int(rng.integers(0, len(pool)))]
    w = read_wav(path)
    if len(w) < n_samples:
        reps = int(np.ceil(n_samples / len(w)))
        return Waveform(np.tile(w.samples, reps)[:n_samples])
    start = int(rng.integers(0, len(w) - n_samples + 1))
    return Waveform(w.samples[start : start + n_samples])


def sample_room(rng: np.random.Generator, rt60: float, max_tries: int = 200) -> RoomSpec:
    """Draw a feasible room for the requested rt60: dims uniform on
    [3,8]x[3,8]x[2.5,4] m, positions 0.5 m off the walls, src-mic >= 0.5 m."""
    for _ in range(max_tries):
        dims = np.array(
            [rng.uniform(3.0, 8.0), rng.uniform(3.0, 8.0), rng.uniform(2.5, 4.0)]
        )
        if min_feasible_rt60(dims) > rt60:
            continue
        src = np.array([rng.uniform(0.5, d - 0.5) for d in dims])
        mic = np.array([rng.uniform(0.5, d - 0.5) for d in dims])
        if np.linalg.norm(src - mic) < 0.5:
            continue
        return RoomSpec(dims=tuple(dims), src_pos=tuple(src), mic_pos=tuple(mic), rt60=rt60)
    raise EchosimError(f"could not find a feasible room for rt60 {rt60:.3f} s")


def _synth_one(i: int, seed: int, duration_s: float, speech_pool, noise_pool):
    rng = np.random.default_rng([seed, i])
    n = int(duration_s * SAMPLE_RATE)
    near = _draw_signal(rng, speech_pool, n, synth_speech)
    far = _draw_signal(rng, speech_pool, n, synth_speech)
    noise = _draw_signal(rng, noise_pool, n, pink_noise)

    rt60 = sample_rt60(rng)
    while True:
        try:
            room = sample_room(rng, rt60)
            break
        except EchosimError:
            rt60 = sample_rt60(rng)
    rir = image_method_rir(room)
    base = ScenarioSpec(
        kind="DT",
        delay_ms=sample_delay(rng),
        snr_db=sample_snr(rng),
        ser_db=sample_ser(rng),
        nonlinearity=sample_nonlinearity(rng),
        time_variant=("cut_insert", float(rng.uniform(10.0, 200.0)), 0.10),
    )
    perturb_rng_state = rng.bit_generator.state
    convs = {}
    for kind in SCENARIOS:
        spec_k = ScenarioSpec(
            kind=kind,
            delay_ms=base.delay_ms,
            snr_db=base.snr_db,
            ser_db=base.ser_db,
            nonlinearity=base.nonlinearity,
            time_variant=base.time_variant,
        )
        conv = mix_scenario(near, far, rir, spec_k, noise, room=room)
        # one shared perturbation decision per conversation triple
        prng = np.random.default_rng()
        prng.bit_generator.state = perturb_rng_state
        convs[kind] = time_variant_perturb(conv, prng)
    row = {
        "conv_id": i,
        "rt60_s": round(rt60, 6),
        "delay_ms": round(base.delay_ms, 6),
        "snr_db": round(base.snr_db, 6),
        "ser_db": round(base.ser_db, 6),
        "nonlinearity": list(base.nonlinearity),
        "room_dims": [round(d, 6) for d in room.dims],
        "seed": seed,
        "perturbed": "perturbation" in convs["DT"].meta,
    }
    return convs, row


def synth_dataset(
    n_conversations: int,
    seed: int,
    out_dir: str | Path,
    duration_s: float = 3.0,
    speech_dir: str | Path | None = None,
    noise_dir: str | Path | None = None,
    jobs: int = 1,
) -> list[dict]:
    """Write near/far/echo/mic WAVs for each scenario of each conversation
    plus a JSONL manifest; reruns with the same seed are byte-identical."""
    if n_conversations <= 0:
        raise EchosimError("n_conversations must be positive")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot create output directory {out_dir}: {e}") from e
    speech_pool = _load_pool(speech_dir)
    noise_pool = _load_pool(noise_dir)

    args = [(i, seed, duration_s, speech_pool, noise_pool) for i in range(n_conversations)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_synth_one_star, args))
    else:
        results = [_synth_one(*a) for a in args]

    manifest = []
    try:
        with open(out_dir / "manifest.jsonl", "w", encoding="utf-8") as mf:
            for convs, row in results:
                for kind in SCENARIOS:
                    conv = convs[kind]
                    for role in ROLES:
                        path = out_dir / f"{row['conv_id']:04d}_{kind}_{role}.wav"
                        write_wav(path, getattr(conv, role))
                    line = dict(row)
                    line["scenario"] = kind
                    manifest.append(line)
                    mf.write(json.dumps(line, sort_keys=True) + "\n")
    except OSError as e:
        raise OSError(f"cannot write dataset under {out_dir}: {e}") from e
    return manifest


def _synth_one_star(a):
    return _synth_one(*a)


def load_manifest(path: str | Path) -> list[dict]:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.jsonl"
    if not path.exists():
        raise OSError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as f:
        return [json.loads(line) for line in f if line.strip()]
