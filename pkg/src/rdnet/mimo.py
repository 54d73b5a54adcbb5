"""De-interleaving of Doppler-multiplexed Tx replicas into aligned channels.

This is the deterministic gather that the trainable dilated layer of the
pre-encoder generalizes.  Conventions, fixed once for all oracle tests:

* Transmitter group t (1-based) reads the input (t-1) * delta Doppler bins
  ahead, circularly: group 1 is the identity.  A reflector whose base Doppler
  bin is D (replicas at D + k*delta, k = 1..n_tx) therefore has all its
  replicas aligned at output Doppler index (D + delta) mod b_d, the k = 1
  replica position.
* Complex values enter the real network as stacked real/imaginary channels:
  input channel 2*rho (+1) is the real (imaginary) part of receiver rho, and
  output channel 2*((t-1)*n_rx + rho) (+1) likewise within group t.

The same gather is expressible as a dilated convolution with a 1 x n_tx
kernel, dilation delta, circular padding on the right, and one-hot weights;
atrous_equivalence_weights emits exactly those weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ValidatedConfig
from .errors import ConfigMismatch


@dataclass
class DeinterleavedTensor:
    """Real array (2 * n_tx * n_rx, b_r, b_d) of aligned replica channels."""

    data: np.ndarray
    config: ValidatedConfig


def stack_real_imag(data: np.ndarray) -> np.ndarray:
    """(b_r, b_d, n_rx) complex -> (2 * n_rx, b_r, b_d) real channels."""
    b_r, b_d, n_rx = data.shape
    out = np.empty((2 * n_rx, b_r, b_d), dtype=data.real.dtype)
    moved = np.moveaxis(data, 2, 0)        # (n_rx, b_r, b_d)
    out[0::2] = moved.real
    out[1::2] = moved.imag
    return out


def deinterleave(rd) -> DeinterleavedTensor:
    """Gather the n_tx replica groups into 2 * n_tx * n_rx aligned channels."""
    cfg = rd.config
    expected = (cfg.b_r, cfg.b_d, cfg.n_rx)
    if rd.data.shape != expected:
        raise ConfigMismatch(f"rd shape {rd.data.shape} != {expected} for config")
    stacked = stack_real_imag(rd.data)     # (2*n_rx, b_r, b_d)
    n_ch = 2 * cfg.n_rx
    out = np.empty((cfg.n_tx * n_ch, cfg.b_r, cfg.b_d), dtype=stacked.dtype)
    for g in range(cfg.n_tx):
        # group g+1 reads g*delta bins ahead on the circular Doppler axis
        out[g * n_ch:(g + 1) * n_ch] = np.roll(
            stacked, -g * cfg.dilation, axis=2)
    return DeinterleavedTensor(data=out, config=cfg)


def atrous_equivalence_weights(config: ValidatedConfig) -> np.ndarray:
    """One-hot kernel bank reproducing deinterleave as a dilated convolution.

    Shape (2 * n_tx * n_rx, 2 * n_rx, 1, n_tx): output channel
    2*((t-1)*n_rx + rho) + c takes input channel 2*rho + c at kernel tap
    t-1.  Apply with dilation (1, delta), stride 1, circular padding
    (0, (n_tx - 1) * delta) on the right of the Doppler axis.
    """
    n_ch = 2 * config.n_rx
    w = np.zeros((config.n_tx * n_ch, n_ch, 1, config.n_tx))
    for g in range(config.n_tx):
        for c in range(n_ch):
            w[g * n_ch + c, c, 0, g] = 1.0
    return w
