"""Synthetic dataset generation and loading for training/evaluation.

A dataset directory holds one config.json plus paired files per frame:
NNNNN.rdt (raw ADC, complex64) and NNNNN.json (the scene that produced it).

The network input is the RD transform of the frame (rectangular window)
as stacked real/imaginary channels, scaled by 1/sqrt(b_r * b_d) so unit
reflectors produce order-one peak values.
"""

from __future__ import annotations

import os
import re
from typing import List, Sequence, Tuple

import numpy as np

from .config import ValidatedConfig, config_to_json, load_config, validate
from .dsp import range_doppler_transform
from .errors import FormatError
from .mimo import stack_real_imag
from .nn.targets import encode_ground_truth
from .simulate import (AdcFrame, PointTarget, Scene, load_scene, scene_to_json,
                       synthesize_adc)
from .tensorfile import atomic_write_text, read_tensor, write_tensor


def nn_input(frame: AdcFrame) -> np.ndarray:
    """(2 * n_rx, b_r, b_d) float32 network input for one frame.

    Hann-windowed on both FFT axes: the rectangular window's -13 dB
    sidelobes put target-correlated structure all over the map, and the
    detection head happily learns to fire on it.
    """
    rd = range_doppler_transform(frame, window="hann")
    scale = 1.0 / np.sqrt(frame.config.b_r * frame.config.b_d)
    return (stack_real_imag(rd.data) * scale).astype(np.float32)


def random_scene(rng: np.random.Generator, config: ValidatedConfig,
                 max_targets: int = 2, noise_sigma: float = 0.0,
                 range_band: Tuple[float, float] = (3.0, 14.0),
                 azimuth_band: float = 55.0) -> Scene:
    """Scene of 1..max_targets well-separated targets.

    Velocities are drawn inside the Doppler-division unambiguous window
    |v| < d_max / (2 * n_tx) with a safety margin, and targets keep at
    least two detection cells of separation on range or azimuth.
    """
    from .nn.targets import detection_grid

    _, _, cell_r, cell_a = detection_grid(config)
    v_max = 0.7 * config.d_max / (2.0 * config.n_tx)
    n = int(rng.integers(1, max_targets + 1))
    targets: List[PointTarget] = []
    tries = 0
    while len(targets) < n and tries < 100:
        tries += 1
        cand = PointTarget(
            range=float(rng.uniform(*range_band)),
            velocity=float(rng.uniform(-v_max, v_max)),
            azimuth=float(rng.uniform(-azimuth_band, azimuth_band)),
            elevation=0.0,
            amplitude=float(rng.uniform(0.7, 1.5)),
        )
        if all(abs(cand.range - t.range) > 2.0 * cell_r
               or abs(cand.azimuth - t.azimuth) > 2.0 * cell_a
               for t in targets):
            targets.append(cand)
    return Scene(targets=tuple(targets), noise_sigma=noise_sigma,
                 seed=int(rng.integers(0, 2 ** 31)))


def random_scenes(n_frames: int, config: ValidatedConfig, seed: int = 0,
                  **kwargs) -> List[Scene]:
    rng = np.random.default_rng(seed)
    return [random_scene(rng, config, **kwargs) for _ in range(n_frames)]


def training_arrays(scenes: Sequence[Scene], config: ValidatedConfig,
                    azimuth_neighbors: float = 0.0):
    """(x, clas, reg, seg) stacked float32 arrays for the whole frame list.

    azimuth_neighbors is forwarded to encode_ground_truth; leave it at 0
    for strict one-hot labels.
    """
    xs, clas, reg, seg = [], [], [], []
    for scene in scenes:
        frame = synthesize_adc(scene, config)
        xs.append(nn_input(frame))
        gt = encode_ground_truth(scene, config,
                                 azimuth_neighbors=azimuth_neighbors)
        clas.append(gt.clas)
        reg.append(gt.reg)
        seg.append(gt.seg)
    return (np.stack(xs), np.stack(clas), np.stack(reg), np.stack(seg))


def write_dataset(directory, scenes: Sequence[Scene],
                  config: ValidatedConfig) -> None:
    os.makedirs(directory, exist_ok=True)
    atomic_write_text(os.path.join(directory, "config.json"),
                      config_to_json(config))
    for i, scene in enumerate(scenes):
        stem = os.path.join(directory, f"{i:05d}")
        frame = synthesize_adc(scene, config)
        write_tensor(stem + ".rdt", frame.samples.astype(np.complex64))
        atomic_write_text(stem + ".json", scene_to_json(scene))


_STEM_RE = re.compile(r"^(\d+)\.rdt$")


def load_dataset(directory) -> Tuple[ValidatedConfig, List[Tuple[AdcFrame, Scene]]]:
    """Read config.json and every NNNNN.rdt / NNNNN.json pair, sorted."""
    config = validate(load_config(os.path.join(directory, "config.json")))
    stems = sorted(
        m.group(1) for m in (_STEM_RE.match(f) for f in os.listdir(directory))
        if m)
    if not stems:
        raise FormatError(f"no NNNNN.rdt frames in {directory}")
    pairs = []
    for stem in stems:
        samples = read_tensor(os.path.join(directory, stem + ".rdt"))
        expected = (config.n_rx, config.b_d, config.b_r)
        if samples.shape != expected:
            raise FormatError(
                f"{stem}.rdt shape {samples.shape} != {expected}")
        scene = load_scene(os.path.join(directory, stem + ".json"))
        pairs.append((AdcFrame(samples=samples.astype(np.complex128),
                               config=config), scene))
    return config, pairs


def arrays_from_pairs(pairs, config: ValidatedConfig):
    xs, clas, reg, seg = [], [], [], []
    for frame, scene in pairs:
        xs.append(nn_input(frame))
        gt = encode_ground_truth(scene, config)
        clas.append(gt.clas)
        reg.append(gt.reg)
        seg.append(gt.seg)
    return (np.stack(xs), np.stack(clas), np.stack(reg), np.stack(seg))
