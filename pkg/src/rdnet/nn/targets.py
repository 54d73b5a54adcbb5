"""Ground-truth encoding on the coarse detection and segmentation grids.

Detection grid: (b_r/4, b_a/8) cells of size (4 * range_res) meters by
(8 * azimuth_fov / b_a) degrees covering the full FoV.  A target sets its
containing cell to 1 and stores (range, azimuth) offsets from the cell
center, normalized by the cell size, in the two regression maps.

Segmentation grid: (b_r/2, b_a/4) cells covering the central half of the
FoV at half resolution on both axes.  Free space is synthetic: a disk of
radius 0.8 * max_range minus one footprint per target, the footprint being
the same 4.0 m x 1.8 m vehicle box the evaluation uses (2.0 m in range,
atan(0.9 / range) in azimuth).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import ValidatedConfig
from ..errors import OutOfFieldOfView
from ..simulate import Scene

FREE_SPACE_RADIUS_FRACTION = 0.8
FOOTPRINT_HALF_RANGE_M = 2.0
FOOTPRINT_HALF_WIDTH_M = 0.9


@dataclass
class GroundTruth:
    clas: np.ndarray
    """Binary (b_r/4, b_a/8) map."""
    reg: np.ndarray
    """(2, b_r/4, b_a/8): normalized (range, azimuth) offsets at positives."""
    seg: np.ndarray
    """Binary (b_r/2, b_a/4) free-space map."""


def detection_grid(config: ValidatedConfig):
    """(rows, cols, range cell m, azimuth cell deg) of the detection grid."""
    return (config.b_r // 4, config.b_a // 8,
            4.0 * config.range_res, 8.0 * config.azimuth_fov / config.b_a)


def encode_ground_truth(scene: Scene, config: ValidatedConfig,
                        azimuth_neighbors: float = 0.0) -> GroundTruth:
    """One-hot cells plus offsets; optionally supervise azimuth neighbors.

    With azimuth_neighbors > 0 the two cells flanking each positive along
    the azimuth axis get that soft classification label and regression
    offsets that still point at the physical target (the azimuth offset
    shifted by one cell, so |offset| may exceed 0.5 there).  A label above
    0.5 keeps the flanks inside the regression mask of the detection loss,
    which is the point: an off-by-one azimuth cell still decodes to the
    right position instead of turning into a miss plus a confident false
    alarm.  A cell claimed by the flanks of two different targets is zeroed
    entirely, since its supervision would be ambiguous.
    """
    rows, cols, cell_r, cell_a = detection_grid(config)
    clas = np.zeros((rows, cols), dtype=np.float32)
    reg = np.zeros((2, rows, cols), dtype=np.float32)

    half_fov = config.azimuth_fov / 2.0
    cells = []
    for t in scene.targets:
        if not (0.0 <= t.range < config.max_range):
            raise OutOfFieldOfView(f"range {t.range} outside [0, {config.max_range})")
        if abs(t.azimuth) > half_fov:
            raise OutOfFieldOfView(f"azimuth {t.azimuth} outside +-{half_fov}")
        ri = min(int(t.range // cell_r), rows - 1)
        ai = min(int((t.azimuth + half_fov) // cell_a), cols - 1)
        clas[ri, ai] = 1.0
        reg[0, ri, ai] = (t.range - (ri + 0.5) * cell_r) / cell_r
        reg[1, ri, ai] = (t.azimuth - (-half_fov + (ai + 0.5) * cell_a)) / cell_a
        cells.append((ri, ai))

    if azimuth_neighbors > 0.0:
        claimed = set()
        for ri, ai in cells:
            for da in (-1, 1):
                aj = ai + da
                if not (0 <= aj < cols) or clas[ri, aj] == 1.0:
                    continue
                if (ri, aj) in claimed:
                    clas[ri, aj] = 0.0
                    reg[:, ri, aj] = 0.0
                    continue
                claimed.add((ri, aj))
                clas[ri, aj] = azimuth_neighbors
                reg[0, ri, aj] = reg[0, ri, ai]
                reg[1, ri, aj] = reg[1, ri, ai] - da

    seg = free_space_mask(scene, config)
    return GroundTruth(clas=clas, reg=reg, seg=seg)


def seg_grid_centers(config: ValidatedConfig):
    """Cell-center (ranges m, azimuths deg) of the (b_r/2, b_a/4) seg grid."""
    rows, cols = config.b_r // 2, config.b_a // 4
    cell_r = config.max_range / rows
    quarter_fov = config.azimuth_fov / 4.0
    cell_a = (config.azimuth_fov / 2.0) / cols
    ranges = (np.arange(rows) + 0.5) * cell_r
    azimuths = -quarter_fov + (np.arange(cols) + 0.5) * cell_a
    return ranges, azimuths


def free_space_mask(scene: Scene, config: ValidatedConfig) -> np.ndarray:
    ranges, azimuths = seg_grid_centers(config)
    mask = (ranges < FREE_SPACE_RADIUS_FRACTION * config.max_range)[:, None] \
        & np.ones(azimuths.size, dtype=bool)[None, :]
    mask = mask.copy()
    for t in scene.targets:
        half_az = np.degrees(np.arctan2(FOOTPRINT_HALF_WIDTH_M,
                                        max(t.range, 1e-6)))
        blocked = (np.abs(ranges - t.range)[:, None] < FOOTPRINT_HALF_RANGE_M) \
            & (np.abs(azimuths - t.azimuth)[None, :] < half_az)
        mask &= ~blocked
    return mask.astype(np.float32)
