"""Initial echo predictors: a per-bin multi-block NLMS filter and an
optional small learned mask, plus the residual decomposition that the
regeneration stage consumes.

The NLMS filter is the default: K taps per frequency bin cover ~100 ms of
echo tail at the default hop. The mask network is the trainable variant
exercised by the supervised half of the combined training loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn

from .spectral import Frame


@dataclass
class NlmsState:
    """Single-stream adaptive filter state; one instance per audio stream."""

    n_bins: int = 161
    n_blocks: int = 10
    mu: float = 0.5
    eps: float = 1e-6
    taps: np.ndarray = field(default=None, repr=False)
    far_history: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.mu < 2.0:
            raise ValueError(f"mu {self.mu} outside [0, 2)")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.taps is None:
            self.taps = np.zeros((self.n_bins, self.n_blocks), dtype=np.complex128)
        if self.far_history is None:
            self.far_history = np.zeros((self.n_bins, self.n_blocks), dtype=np.complex128)
        if self.taps.shape != (self.n_bins, self.n_blocks):
            raise ValueError("taps shape mismatch")


def nlms_step(state: NlmsState, mic_frame: Frame, far_frame: Frame) -> tuple[Frame, NlmsState]:
    """One frame of echo prediction and normalized-LMS adaptation.

    Returns the near-end estimate (mic minus predicted echo) and the
    updated state (mutated in place).
    """
    mic = np.asarray(mic_frame.bins if isinstance(mic_frame, Frame) else mic_frame)
    far = np.asarray(far_frame.bins if isinstance(far_frame, Frame) else far_frame)
    if mic.shape != (state.n_bins,) or far.shape != (state.n_bins,):
        raise ValueError("frame size does not match filter state")

    state.far_history[:, 1:] = state.far_history[:, :-1]
    state.far_history[:, 0] = far

    echo_hat = np.sum(state.taps * state.far_history, axis=1)
    err = mic - echo_hat
    norm = np.sum(np.abs(state.far_history) ** 2, axis=1) + state.eps
    state.taps += state.mu * np.conj(state.far_history) * err[:, None] / norm[:, None]

    index = mic_frame.index if isinstance(mic_frame, Frame) else -1
    return Frame(bins=err, index=index), state


def nlms_run(mic_bins: np.ndarray, far_bins: np.ndarray, state: NlmsState | None = None):
    """Run NLMS over aligned spectrogram columns; returns (s_hat bins, state)."""
    n_bins, n_frames = mic_bins.shape
    state = state or NlmsState(n_bins=n_bins)
    out = np.empty_like(mic_bins)
    for k in range(n_frames):
        frame, state = nlms_step(state, Frame(mic_bins[:, k], k), Frame(far_bins[:, k], k))
        out[:, k] = frame.bins
    return out, state


class MaskNet(nn.Module):
    """Per-bin sigmoid mask from log-magnitudes of mic and aligned far."""

    def __init__(self, hidden: int = 12, kernel: int = 5):
        super().__init__()
        pad = kernel // 2
        self.net = nn.Sequential(
            nn.Conv1d(2, hidden, kernel, padding=pad),
            nn.SiLU(),
            nn.Conv1d(hidden, hidden, kernel, padding=pad),
            nn.SiLU(),
            nn.Conv1d(hidden, 1, kernel, padding=pad),
        )

    def forward(self, log_mic: torch.Tensor, log_far: torch.Tensor) -> torch.Tensor:
        x = torch.stack([log_mic, log_far], dim=-2)  # (..., 2, F)
        return torch.sigmoid(self.net(x)).squeeze(-2)


@dataclass
class MaskNetParams:
    module: MaskNet

    @property
    def n_params(self) -> int:
        return sum(p.numel() for p in self.module.parameters())


def new_mask_params(hidden: int = 12, seed: int = 0) -> MaskNetParams:
    torch.manual_seed(seed)
    return MaskNetParams(module=MaskNet(hidden=hidden))


def mask_forward(params: MaskNetParams, mic_frame, far_frame) -> Frame:
    """Apply the learned mask: s_hat = mask * mic, mask in [0, 1] per bin."""
    mic = np.asarray(mic_frame.bins if isinstance(mic_frame, Frame) else mic_frame)
    far = np.asarray(far_frame.bins if isinstance(far_frame, Frame) else far_frame)
    mask = mask_tensor(
        params,
        torch.from_numpy(np.abs(mic)).to(torch.get_default_dtype()),
        torch.from_numpy(np.abs(far)).to(torch.get_default_dtype()),
    )
    shat = mask.detach().numpy().astype(np.float64) * mic
    index = mic_frame.index if isinstance(mic_frame, Frame) else -1
    return Frame(bins=shat, index=index)


def mask_tensor(params: MaskNetParams, mic_mag: torch.Tensor, far_mag: torch.Tensor):
    """Differentiable mask from magnitude tensors shaped (..., F)."""
    return params.module(torch.log(mic_mag + 1e-8), torch.log(far_mag + 1e-8))


@dataclass
class ResidualDecomposition:
    """Split of the prediction error into target distortion and residual
    corruption, with the residues the regeneration model cares about."""

    s_dis: np.ndarray
    z_resid: np.ndarray
    r_s: np.ndarray
    r_h: np.ndarray

    def __post_init__(self):
        if not np.allclose(self.r_s, self.s_dis - self.z_resid, atol=1e-12):
            raise ValueError("r_s must equal s_dis - z_resid")


def decompose_residuals(s: np.ndarray, s_hat: np.ndarray, h: np.ndarray) -> ResidualDecomposition:
    """Decompose s_hat = s - s_dis + z' with a deterministic split: s_dis is
    the per-frame component of (s - s_hat) collinear with s, z' the rest."""
    if not (s.shape == s_hat.shape == h.shape):
        raise ValueError(f"shape mismatch: {s.shape}, {s_hat.shape}, {h.shape}")
    err = s - s_hat  # equals s_dis - z' by construction
    denom = np.sum(np.abs(s) ** 2, axis=0)
    coef = np.zeros(s.shape[1], dtype=np.complex128)
    nz = denom > 1e-14
    coef[nz] = np.sum(err[:, nz] * np.conj(s[:, nz]), axis=0) / denom[nz]
    s_dis = coef[None, :] * s
    z_resid = s_dis - err
    return ResidualDecomposition(s_dis=s_dis, z_resid=z_resid, r_s=err.copy(), r_h=h - s_hat)
