"""Synthetic FMCW MIMO frames for scenes of point targets.

Signal model
------------
All transmitters emit simultaneously; transmitter t (1-based) advances its
phase by t * delta_phi per chirp, which displaces its echo by t * dilation
Doppler bins.  A point target at range R, radial velocity v, azimuth a and
elevation e therefore contributes, on receiver r, chirp c, fast-time sample s:

    amplitude * steering(t, r, a, e)
              * exp(j 2 pi (range_bin * s / b_r + (doppler_bin + t * delta) * c / b_d))

summed over t = 1..n_tx, where range_bin = R / range_res and
doppler_bin = v / doppler_res are real-valued (off-grid targets produce
spectral leakage on purpose).  Circular Gaussian noise of standard deviation
noise_sigma is added per complex sample.

After the Doppler axis of the processed tensor is centered (bin 0 = most
negative velocity), the replicas of one reflector land at

    (round(R / range_res), (b_d/2 + round(v / doppler_res) + k * delta) mod b_d)

for k = 1..n_tx; expected_rd_positions returns exactly these cells.

Array geometry
--------------
Uniform linear array with half-wavelength virtual spacing: transmitter t sits
at (t-1) * n_rx half-wavelengths, receiver r at (r-1), so virtual antenna
u = (t-1) * n_rx + (r-1) sees azimuth phase exp(j pi u sin(a)).  Odd-indexed
transmitters are raised by half a wavelength, giving the elevation factor
exp(j pi w_t sin(e)) with w_t = (t-1) mod 2.  The calibration matrix used by
the DSP stage is generated from the same expressions.

Frames are reproducible: the noise generator is numpy's default PCG64 seeded
with scene.seed, so identical scenes give byte-identical frames anywhere.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .config import ValidatedConfig
from .errors import InvalidScene

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PointTarget:
    range: float
    """Radial distance in meters, 0 <= range < max_range."""
    velocity: float
    """Signed radial velocity in m/s, |velocity| < d_max / 2."""
    azimuth: float
    """Degrees from boresight, within +- azimuth_fov / 2."""
    elevation: float = 0.0
    """Degrees from the horizontal plane."""
    amplitude: float = 1.0
    """Linear reflectivity, >= 0."""


@dataclass(frozen=True)
class Scene:
    targets: Tuple[PointTarget, ...] = ()
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(self.targets))


@dataclass
class AdcFrame:
    """Raw ADC samples, shape (n_rx, b_d chirps, b_r fast-time samples)."""

    samples: np.ndarray
    config: ValidatedConfig


def check_scene(scene: Scene, config: ValidatedConfig) -> None:
    if scene.noise_sigma < 0:
        raise InvalidScene(f"noise_sigma must be >= 0, got {scene.noise_sigma}")
    for i, t in enumerate(scene.targets):
        if not (0.0 <= t.range < config.max_range):
            raise InvalidScene(
                f"target {i}: range {t.range} outside [0, {config.max_range})")
        if not (abs(t.velocity) < config.d_max / 2.0):
            raise InvalidScene(
                f"target {i}: |velocity| {abs(t.velocity)} >= d_max/2 "
                f"= {config.d_max / 2.0}")
        if not (abs(t.azimuth) <= config.azimuth_fov / 2.0):
            raise InvalidScene(
                f"target {i}: azimuth {t.azimuth} outside "
                f"+-{config.azimuth_fov / 2.0}")
        if not (t.amplitude >= 0.0):
            raise InvalidScene(f"target {i}: amplitude {t.amplitude} < 0")
        if not np.isfinite([t.range, t.velocity, t.azimuth,
                            t.elevation, t.amplitude]).all():
            raise InvalidScene(f"target {i}: non-finite field")


def steering_vector(config: ValidatedConfig, azimuth_deg: float,
                    elevation_deg: float) -> np.ndarray:
    """Unit-modulus steering for the virtual array, shape (n_tx * n_rx,)."""
    u = np.arange(config.virtual_array_size)
    w = (np.arange(config.n_tx) % 2).repeat(config.n_rx)
    sin_a = np.sin(np.deg2rad(azimuth_deg))
    sin_e = np.sin(np.deg2rad(elevation_deg))
    return np.exp(1j * np.pi * (u * sin_a + w * sin_e))


def calibration_matrix(config: ValidatedConfig) -> np.ndarray:
    """Steering vectors at every (azimuth, elevation) bin center.

    Returns a complex array of shape (b_a, b_e, n_tx * n_rx); every entry
    has modulus 1.
    """
    az = np.deg2rad(config.azimuth_bin_centers())
    el = np.deg2rad(config.elevation_bin_centers())
    u = np.arange(config.virtual_array_size)
    w = (np.arange(config.n_tx) % 2).repeat(config.n_rx)
    phase = (np.sin(az)[:, None, None] * u[None, None, :]
             + np.sin(el)[None, :, None] * w[None, None, :])
    return np.exp(1j * np.pi * phase)


def synthesize_adc(scene: Scene, config: ValidatedConfig) -> AdcFrame:
    """Render a scene into one raw ADC frame (complex128)."""
    check_scene(scene, config)
    n_rx, b_d, b_r = config.n_rx, config.b_d, config.b_r
    samples = np.zeros((n_rx, b_d, b_r), dtype=np.complex128)

    s = np.arange(b_r)
    c = np.arange(b_d)
    tx = np.arange(1, config.n_tx + 1)
    for target in scene.targets:
        range_bin = target.range / config.range_res
        doppler_bin = target.velocity / config.doppler_res
        fast = np.exp(1j * TWO_PI * range_bin * s / b_r)
        chirp = np.exp(1j * TWO_PI
                       * (doppler_bin + tx[:, None] * config.dilation)
                       * c[None, :] / b_d)
        steer = steering_vector(config, target.azimuth, target.elevation)
        steer = steer.reshape(config.n_tx, n_rx)
        samples += target.amplitude * np.einsum(
            "tr,tc,s->rcs", steer, chirp, fast, optimize=True)

    if scene.noise_sigma > 0.0:
        rng = np.random.default_rng(scene.seed)
        noise = rng.standard_normal((n_rx, b_d, b_r)) \
            + 1j * rng.standard_normal((n_rx, b_d, b_r))
        samples += scene.noise_sigma / np.sqrt(2.0) * noise

    return AdcFrame(samples=samples, config=config)


def replica_doppler_bins(base_bin: int, config: ValidatedConfig) -> List[int]:
    """Doppler bins (base_bin + k * dilation) mod b_d for k = 1..n_tx."""
    return [(base_bin + k * config.dilation) % config.b_d
            for k in range(1, config.n_tx + 1)]


def expected_rd_positions(target: PointTarget,
                          config: ValidatedConfig) -> List[Tuple[int, int]]:
    """Predicted (range_bin, doppler_bin) peak cells on the processed tensor.

    The Doppler axis of the RD tensor is centered, so the base bin for
    velocity v is b_d/2 + round(v / doppler_res); the n_tx replicas sit
    k * dilation bins above it (mod b_d) for k = 1..n_tx.
    """
    range_bin = round(target.range / config.range_res)
    base = config.b_d // 2 + round(target.velocity / config.doppler_res)
    return [(range_bin, d) for d in replica_doppler_bins(base, config)]


def scene_to_json(scene: Scene) -> str:
    data = {
        "noise_sigma": scene.noise_sigma,
        "seed": scene.seed,
        "targets": [
            {"range": t.range, "velocity": t.velocity, "azimuth": t.azimuth,
             "elevation": t.elevation, "amplitude": t.amplitude}
            for t in scene.targets
        ],
    }
    return json.dumps(data, indent=2) + "\n"


def scene_from_json(text: str) -> Scene:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidScene(f"scene JSON is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidScene("scene JSON must be an object")
    try:
        targets = tuple(
            PointTarget(
                range=float(t["range"]),
                velocity=float(t["velocity"]),
                azimuth=float(t["azimuth"]),
                elevation=float(t.get("elevation", 0.0)),
                amplitude=float(t.get("amplitude", 1.0)),
            )
            for t in data.get("targets", [])
        )
        return Scene(
            targets=targets,
            noise_sigma=float(data.get("noise_sigma", 0.0)),
            seed=int(data.get("seed", 0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScene(f"malformed scene JSON: {exc}") from None


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return scene_from_json(fh.read())
