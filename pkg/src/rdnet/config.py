"""Radar parameterization: physical constants, bin counts, and presets.

All downstream stages (simulator, DSP, pre-encoder, network, profiler) take a
ValidatedConfig, obtained from a RadarConfig through validate().  Validation
derives the two quantities everything else leans on:

* the Doppler dilation ``delta = doppler_shift * b_d / d_max``, which must be
  a strictly positive integer for the Tx replicas to sit on exact bins, and
* the virtual array size ``n_tx * n_rx``.

Configs are immutable after validation and safe to share.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .errors import InvalidConfig, NonIntegerDilation, ReplicaOverflow

_INT_TOL = 1e-6


@dataclass(frozen=True)
class RadarConfig:
    """Raw (unchecked) radar description.

    Attributes
    ----------
    n_tx, n_rx : int
        Transmit / receive antenna counts.  The MIMO virtual array has
        n_tx * n_rx elements.
    b_r, b_d, b_a, b_e : int
        Range, Doppler, azimuth and elevation bin counts.
    range_res : float
        Meters per range bin; max_range = b_r * range_res.
    doppler_res : float
        Meters-per-second per Doppler bin; d_max = b_d * doppler_res.
    max_range : float
        Maximum unambiguous range in meters.
    d_max : float
        Maximum unambiguous Doppler span in m/s.  Velocities live in
        [-d_max/2, d_max/2) after the Doppler axis is centered.
    doppler_shift : float
        Doppler offset (m/s) applied between consecutive transmitters so
        their echoes can share one Doppler spectrum.
    azimuth_fov, elevation_fov : float
        Field of view in degrees, symmetric about boresight.
    """

    n_tx: int
    n_rx: int
    b_r: int
    b_d: int
    b_a: int
    b_e: int
    range_res: float
    doppler_res: float
    max_range: float
    d_max: float
    doppler_shift: float
    azimuth_fov: float
    elevation_fov: float


@dataclass(frozen=True)
class ValidatedConfig:
    """RadarConfig plus the derived quantities; only validate() builds these."""

    n_tx: int
    n_rx: int
    b_r: int
    b_d: int
    b_a: int
    b_e: int
    range_res: float
    doppler_res: float
    max_range: float
    d_max: float
    doppler_shift: float
    azimuth_fov: float
    elevation_fov: float
    dilation: int
    """Doppler bins between consecutive Tx replicas (delta)."""
    virtual_array_size: int
    """n_tx * n_rx virtual antennas."""

    @property
    def delta_phi(self) -> float:
        """Per-chirp phase increment between consecutive transmitters (rad)."""
        import math

        return 2.0 * math.pi * self.doppler_shift / self.d_max

    def azimuth_bin_centers(self):
        """Azimuth bin centers in degrees, length b_a, spanning the FoV."""
        import numpy as np

        step = self.azimuth_fov / self.b_a
        return -self.azimuth_fov / 2.0 + (np.arange(self.b_a) + 0.5) * step

    def elevation_bin_centers(self):
        """Elevation bin centers in degrees, length b_e."""
        import numpy as np

        step = self.elevation_fov / self.b_e
        return -self.elevation_fov / 2.0 + (np.arange(self.b_e) + 0.5) * step


def validate(config: RadarConfig) -> ValidatedConfig:
    """Check mutual consistency and derive dilation / virtual array size.

    Raises
    ------
    NonIntegerDilation
        If doppler_shift * b_d / d_max is not a positive integer.
    ReplicaOverflow
        If n_tx * dilation > b_d, i.e. the replica comb does not fit in a
        single Doppler period.
    InvalidConfig
        For non-positive counts or resolutions and range/Doppler spans that
        disagree with their bin counts.
    """
    for name in ("n_tx", "n_rx", "b_r", "b_d", "b_a", "b_e"):
        value = getattr(config, name)
        if not isinstance(value, int) or value < 1:
            raise InvalidConfig(f"{name} must be a positive integer, got {value!r}")
    for name in ("range_res", "doppler_res", "max_range", "d_max",
                 "doppler_shift", "azimuth_fov", "elevation_fov"):
        value = getattr(config, name)
        if not value > 0:
            raise InvalidConfig(f"{name} must be positive, got {value!r}")

    if abs(config.max_range - config.b_r * config.range_res) > _INT_TOL:
        raise InvalidConfig(
            f"max_range {config.max_range} != b_r * range_res "
            f"{config.b_r * config.range_res}")
    if abs(config.d_max - config.b_d * config.doppler_res) > _INT_TOL:
        raise InvalidConfig(
            f"d_max {config.d_max} != b_d * doppler_res "
            f"{config.b_d * config.doppler_res}")

    dilation_f = config.doppler_shift * config.b_d / config.d_max
    dilation = round(dilation_f)
    if dilation < 1 or abs(dilation_f - dilation) > _INT_TOL:
        raise NonIntegerDilation(
            f"doppler_shift * b_d / d_max = {dilation_f} is not a strictly "
            "positive integer")
    if config.n_tx * dilation > config.b_d:
        raise ReplicaOverflow(
            f"n_tx * dilation = {config.n_tx * dilation} exceeds b_d = {config.b_d}")

    return ValidatedConfig(
        **dataclasses.asdict(config),
        dilation=dilation,
        virtual_array_size=config.n_tx * config.n_rx,
    )


def paper_preset() -> RadarConfig:
    """Full-scale HD radar: 12 Tx, 16 Rx, 512x256 RD bins.

    doppler_shift is set to d_max/16 so the dilation is 16 and all twelve
    replicas (12 * 16 = 192 bins) fit inside the 256-bin Doppler period:
    the smallest power-of-two dilation accommodating 12 transmitters.  b_a
    defaults to 896 (the native range-azimuth map width); analytic FLOP
    accounting may override b_a/b_e per call.
    """
    return RadarConfig(
        n_tx=12, n_rx=16,
        b_r=512, b_d=256, b_a=896, b_e=11,
        range_res=0.2, doppler_res=0.1,
        max_range=102.4, d_max=25.6,
        doppler_shift=1.6,
        azimuth_fov=180.0, elevation_fov=12.0,
    )


def toy_preset() -> RadarConfig:
    """Desk-scale setup: 4 Tx, 2 Rx, 128x64 RD bins, dilation 16.

    Note that n_tx * dilation = 64 = b_d here, so the replica comb occupies
    every 16th-bin offset: Doppler is only unambiguous within
    |v| < d_max / (2 * n_tx) = 0.8 m/s (see dsp.extract_point_cloud).
    """
    return RadarConfig(
        n_tx=4, n_rx=2,
        b_r=128, b_d=64, b_a=128, b_e=4,
        range_res=0.2, doppler_res=0.1,
        max_range=25.6, d_max=6.4,
        doppler_shift=1.6,
        azimuth_fov=180.0, elevation_fov=12.0,
    )


_PRESETS = {"paper": paper_preset, "toy": toy_preset}


def preset(name: str) -> RadarConfig:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise InvalidConfig(
            f"unknown preset {name!r}, expected one of {sorted(_PRESETS)}") from None


_FIELD_NAMES = [f.name for f in dataclasses.fields(RadarConfig)]


def config_to_json(config) -> str:
    """Serialize a RadarConfig or ValidatedConfig to the flat JSON format."""
    data = {name: getattr(config, name) for name in _FIELD_NAMES}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def config_from_json(text: str) -> RadarConfig:
    """Parse the flat JSON config format.  Unknown or missing keys fail."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config JSON is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidConfig("config JSON must be an object")
    missing = sorted(set(_FIELD_NAMES) - set(data))
    unknown = sorted(set(data) - set(_FIELD_NAMES))
    if missing:
        raise InvalidConfig(f"config JSON missing keys: {missing}")
    if unknown:
        raise InvalidConfig(f"config JSON has unknown keys: {unknown}")
    int_fields = {"n_tx", "n_rx", "b_r", "b_d", "b_a", "b_e"}
    kwargs = {}
    for name in _FIELD_NAMES:
        value = data[name]
        if name in int_fields:
            if not isinstance(value, int) or isinstance(value, bool):
                raise InvalidConfig(f"config key {name} must be an integer")
            kwargs[name] = value
        else:
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise InvalidConfig(f"config key {name} must be a number")
            kwargs[name] = float(value)
    return RadarConfig(**kwargs)


def load_config(path) -> RadarConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_json(fh.read())
