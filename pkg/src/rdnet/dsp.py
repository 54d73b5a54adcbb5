"""Classical signal chain: ADC -> RD tensor -> AoA / CFAR / point cloud / RA map.

FFTs are unitary (norm="ortho") on both axes so Parseval holds without
bookkeeping.  Only the Doppler axis is centered; range bins stay in natural
FFT order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .config import ValidatedConfig
from .errors import (CellOutOfRange, InvalidConfig, ShapeMismatch,
                     WindowTooLarge)
from .simulate import AdcFrame

WINDOWS = ("rect", "hann")


@dataclass
class RdTensor:
    """Complex range-Doppler tensor, shape (b_r, b_d, n_rx)."""

    data: np.ndarray
    config: ValidatedConfig


@dataclass(frozen=True)
class RadarPoint:
    range_m: float
    doppler_mps: float
    azimuth_deg: float
    elevation_deg: float
    power: float


def _window(kind: str, n: int) -> np.ndarray:
    if kind == "rect":
        return np.ones(n)
    if kind == "hann":
        return np.hanning(n)
    raise InvalidConfig(f"unknown window {kind!r}, expected one of {WINDOWS}")


def range_doppler_transform(frame: AdcFrame, window: str = "rect") -> RdTensor:
    """Windowed range-FFT then Doppler-FFT per receiver.

    The Doppler axis is FFT-shifted so bin 0 is the most negative velocity.
    Output shape is (b_r, b_d, n_rx).
    """
    cfg = frame.config
    expected = (cfg.n_rx, cfg.b_d, cfg.b_r)
    if frame.samples.shape != expected:
        raise ShapeMismatch(
            f"frame shape {frame.samples.shape} != {expected} for config")
    w_fast = _window(window, cfg.b_r)
    w_chirp = _window(window, cfg.b_d)
    x = frame.samples * w_chirp[None, :, None] * w_fast[None, None, :]
    x = np.fft.fft(x, axis=2, norm="ortho")          # range
    x = np.fft.fft(x, axis=1, norm="ortho")          # Doppler
    x = np.fft.fftshift(x, axes=1)
    return RdTensor(data=np.transpose(x, (2, 1, 0)), config=cfg)


def rd_power(rd: RdTensor) -> np.ndarray:
    """Non-coherent power map, |.|^2 summed over receivers; shape (b_r, b_d)."""
    return np.sum(np.abs(rd.data) ** 2, axis=2)


def _gather_virtual(rd: RdTensor, r: int, d: int) -> np.ndarray:
    """Virtual-array measurement for base cell (r, d): length n_tx * n_rx.

    Entry (t-1)*n_rx + rho is rd[r, (d + t*delta) mod b_d, rho], i.e. the
    k = t replica of a reflector whose base Doppler bin is d.
    """
    cfg = rd.config
    cols = [(d + t * cfg.dilation) % cfg.b_d for t in range(1, cfg.n_tx + 1)]
    return rd.data[r, cols, :].reshape(cfg.virtual_array_size)


def aoa_correlate(rd: RdTensor, calib: np.ndarray,
                  cells: Sequence[Tuple[int, int]]) -> np.ndarray:
    """Angle power maps for the given base (range, Doppler) cells.

    power(a, e) = |<steering(a, e), measurement>|^2 with the measurement
    gathered from the n_tx replica columns.  Returns (len(cells), b_a, b_e).
    """
    cfg = rd.config
    if calib.shape != (cfg.b_a, cfg.b_e, cfg.virtual_array_size):
        raise ShapeMismatch(
            f"calibration matrix shape {calib.shape} != "
            f"{(cfg.b_a, cfg.b_e, cfg.virtual_array_size)}")
    out = np.empty((len(cells), cfg.b_a, cfg.b_e))
    for i, (r, d) in enumerate(cells):
        if not (0 <= r < cfg.b_r and 0 <= d < cfg.b_d):
            raise CellOutOfRange(f"cell {(r, d)} outside ({cfg.b_r}, {cfg.b_d})")
        m = _gather_virtual(rd, r, d)
        out[i] = np.abs(np.tensordot(np.conj(calib), m, axes=([2], [0]))) ** 2
    return out


def aoa_estimate(power_map: np.ndarray,
                 config: ValidatedConfig) -> Tuple[float, float]:
    """Argmax of one (b_a, b_e) power map as (azimuth_deg, elevation_deg)."""
    a, e = np.unravel_index(int(np.argmax(power_map)), power_map.shape)
    return (float(config.azimuth_bin_centers()[a]),
            float(config.elevation_bin_centers()[e]))


def cfar_detect(power: np.ndarray, guard: int = 2, train: int = 6,
                scale: float = 4.0) -> List[Tuple[int, int]]:
    """Cell-averaging CFAR with local-maximum suppression.

    A cell is kept iff its power exceeds scale times the mean over the
    training ring (the (2(guard+train)+1)^2 window minus the guard block)
    and it is the maximum of its guard window.  The Doppler axis wraps; the
    range axis clamps at the edges.
    """
    if power.ndim != 2:
        raise ShapeMismatch(f"power map must be 2-D, got shape {power.shape}")
    if not guard < train:
        raise InvalidConfig(f"guard ({guard}) must be < train ({train})")
    if not scale > 1.0:
        raise InvalidConfig(f"scale must be > 1, got {scale}")
    outer = 2 * (guard + train) + 1
    inner = 2 * guard + 1
    if outer > power.shape[0] or outer > power.shape[1]:
        raise WindowTooLarge(
            f"CFAR window {outer} exceeds map shape {power.shape}")

    mode = ("nearest", "wrap")
    sum_outer = ndimage.uniform_filter(power, size=outer, mode=mode) * outer ** 2
    sum_inner = ndimage.uniform_filter(power, size=inner, mode=mode) * inner ** 2
    ring_mean = (sum_outer - sum_inner) / (outer ** 2 - inner ** 2)
    local_max = power >= ndimage.maximum_filter(power, size=inner, mode=mode)
    # exactly-on-grid noiseless scenes leave a floor of numerical dust many
    # orders below the peaks; a relative threshold alone would fire on it
    floor = 1e-12 * power.max()
    keep = (power > scale * ring_mean) & local_max & (power > floor)
    return [(int(r), int(d)) for r, d in zip(*np.nonzero(keep))]


def _signed_doppler(base_bin: int, config: ValidatedConfig) -> float:
    return (base_bin - config.b_d // 2) * config.doppler_res


def group_replicas(cells: Sequence[Tuple[int, int]],
                   config: ValidatedConfig) -> List[Tuple[int, int]]:
    """Collapse CFAR cells into (range_bin, base_doppler_bin) reflectors.

    Cells in one range bin whose Doppler indices form a circular run with
    stride delta are the replicas of a single reflector; the base bin sits
    one delta below the first run element.  When n_tx * delta == b_d the run
    closes on itself and the base is ambiguous modulo delta; the candidate
    with the smallest |velocity| is chosen, which is exact for targets inside
    the unambiguous window |v| < d_max / (2 * n_tx).
    """
    delta, b_d = config.dilation, config.b_d
    by_range: dict = {}
    for r, d in cells:
        by_range.setdefault(r, set()).add(d)

    groups = []
    for r, dset in sorted(by_range.items()):
        remaining = set(dset)
        starts = sorted(d for d in remaining if (d - delta) % b_d not in remaining)
        for start in starts:
            if start not in remaining:
                continue
            d = start
            while d in remaining:
                remaining.discard(d)
                d = (d + delta) % b_d
            groups.append((r, (start - delta) % b_d))
        while remaining:
            # Closed ring: every member is a valid run start.  Fold to the
            # smallest |velocity| interpretation.
            candidates = sorted(remaining)
            best = min(candidates,
                       key=lambda d: abs(_signed_doppler((d - delta) % b_d,
                                                         config)))
            d = best
            while d in remaining:
                remaining.discard(d)
                d = (d + delta) % b_d
            groups.append((r, (best - delta) % b_d))
    return groups


def extract_point_cloud(rd: RdTensor, calib: np.ndarray, guard: int = 2,
                        train: int = 6, scale: float = 4.0) -> List[RadarPoint]:
    """CFAR peaks -> replica grouping -> AoA -> physical units."""
    cfg = rd.config
    power = rd_power(rd)
    cells = cfar_detect(power, guard=guard, train=train, scale=scale)
    groups = group_replicas(cells, cfg)
    if not groups:
        return []
    maps = aoa_correlate(rd, calib, groups)
    points = []
    for (r, base), pmap in zip(groups, maps):
        az, el = aoa_estimate(pmap, cfg)
        points.append(RadarPoint(
            range_m=r * cfg.range_res,
            doppler_mps=_signed_doppler(base, cfg),
            azimuth_deg=az,
            elevation_deg=el,
            power=float(np.max(pmap)),
        ))
    return points


def build_ra_map(rd: RdTensor, calib: np.ndarray,
                 elevation_index: int | None = None) -> np.ndarray:
    """Range-azimuth power map (b_r, b_a) float32, max-aggregated over Doppler.

    One elevation slice of the calibration matrix is used (the middle one by
    default).  Each Doppler column is treated as a base cell and its replica
    vector correlated against every azimuth steering vector.
    """
    cfg = rd.config
    if elevation_index is None:
        elevation_index = cfg.b_e // 2
    if not (0 <= elevation_index < cfg.b_e):
        raise CellOutOfRange(f"elevation index {elevation_index} outside b_e")
    a_slice = np.conj(calib[:, elevation_index, :])      # (b_a, n_v)

    # Index maps for gathering all replica vectors of one range row at once:
    # column d, virtual antenna (t-1)*n_rx + rho  <-  rd[r, (d+t*delta)%b_d, rho]
    t = np.arange(1, cfg.n_tx + 1)
    d = np.arange(cfg.b_d)
    col_idx = (d[None, :] + t[:, None] * cfg.dilation) % cfg.b_d   # (n_tx, b_d)
    out = np.empty((cfg.b_r, cfg.b_a), dtype=np.float32)
    for r in range(cfg.b_r):
        m = rd.data[r][col_idx]                 # (n_tx, b_d, n_rx)
        m = m.transpose(0, 2, 1).reshape(cfg.virtual_array_size, cfg.b_d)
        power = np.abs(a_slice @ m) ** 2        # (b_a, b_d)
        out[r] = power.max(axis=1)
    return out


def point_cloud_to_csv(points: Sequence[RadarPoint]) -> str:
    lines = ["range_m,doppler_mps,azimuth_deg,elevation_deg,power"]
    for p in points:
        lines.append(f"{p.range_m:.6g},{p.doppler_mps:.6g},{p.azimuth_deg:.6g},"
                     f"{p.elevation_deg:.6g},{p.power:.6g}")
    return "\n".join(lines) + "\n"
