"""Decoding of head outputs and the evaluation metrics.

IoU is computed between fixed-size 4.0 m x 1.8 m axis-aligned boxes in
Cartesian (x = lateral, y = downrange) coordinates, centered at each
detection / truth point; a vehicle-sized box makes the 50% IoU threshold
meaningful for point detections.  AP uses exact step integration of the
precision-recall curve over the distinct detection scores (no
interpolation).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .config import ValidatedConfig
from .errors import BothZero, ProbabilityOutOfRange, ShapeMismatch
from .nn.targets import detection_grid

BOX_LENGTH_M = 4.0      # downrange extent
BOX_WIDTH_M = 1.8       # lateral extent


@dataclass(frozen=True)
class Detection:
    range_m: float
    azimuth_deg: float
    score: float


@dataclass(frozen=True)
class EvalReport:
    ap: float
    ar: float
    f1: float
    range_mae: float
    angle_mae: float
    miou: float

    def to_json(self) -> str:
        return json.dumps({
            "ap": self.ap, "ar": self.ar, "f1": self.f1,
            "range_mae": self.range_mae, "angle_mae": self.angle_mae,
            "miou": self.miou,
        }, indent=2) + "\n"


def to_xy(range_m: float, azimuth_deg: float) -> Tuple[float, float]:
    a = math.radians(azimuth_deg)
    return range_m * math.sin(a), range_m * math.cos(a)


def box_iou(p1: Tuple[float, float], p2: Tuple[float, float]) -> float:
    """IoU of the fixed-size boxes centered at Cartesian points p1, p2."""
    dx = BOX_WIDTH_M - abs(p1[0] - p2[0])
    dy = BOX_LENGTH_M - abs(p1[1] - p2[1])
    if dx <= 0.0 or dy <= 0.0:
        return 0.0
    inter = dx * dy
    area = BOX_LENGTH_M * BOX_WIDTH_M
    return inter / (2.0 * area - inter)


def decode(clas: np.ndarray, reg: np.ndarray, config: ValidatedConfig,
           threshold: float = 0.5, nms_cells: int = 1,
           merge_cells: float = 0.75,
           dedup_cells: float = 1.0) -> List[Detection]:
    """Cells above threshold -> detections at cell center + offsets.

    Four stages:

    1. threshold the score map;
    2. grid suppression: a cell within nms_cells (Chebyshev, grid indices)
       of a higher-scoring kept cell is dropped.  A target near a cell
       border lights up both cells, and the spurious twin is always
       grid-adjacent, whatever the range;
    3. cluster vote: each kept cell's position becomes the score-weighted
       mean over its grid neighbourhood (radius nms_cells) of the decoded
       positions that land within merge_cells cell-widths of its own.
       Cells around one target all regress toward the same physical point,
       so averaging cancels per-cell regression noise, while the distance
       gate keeps a neighbour that points at a different target out of
       the vote;
    4. decoded-space dedup: a detection within dedup_cells cell-widths of
       a higher-scoring kept one, on both axes, is dropped.  Grid
       suppression cannot catch these: a cell two cells out can regress
       onto an already-claimed target.

    merge_cells=0 or dedup_cells=0 turns the respective stage off.
    """
    rows, cols, cell_r, cell_a = detection_grid(config)
    if clas.shape != (rows, cols):
        raise ShapeMismatch(f"clas shape {clas.shape} != {(rows, cols)}")
    if reg.shape != (2, rows, cols):
        raise ShapeMismatch(f"reg shape {reg.shape} != {(2, rows, cols)}")
    if not np.isfinite(clas).all() or clas.min() < 0 or clas.max() > 1:
        raise ProbabilityOutOfRange("clas map must lie in [0, 1]")

    half_fov = config.azimuth_fov / 2.0
    raw = []
    for ri, ai in zip(*np.nonzero(clas > threshold)):
        rng_m = (ri + 0.5) * cell_r + reg[0, ri, ai] * cell_r
        az = -half_fov + (ai + 0.5) * cell_a + reg[1, ri, ai] * cell_a
        det = Detection(range_m=float(rng_m), azimuth_deg=float(az),
                        score=float(clas[ri, ai]))
        raw.append((int(ri), int(ai), det))

    raw.sort(key=lambda item: -item[2].score)
    seeds: List[Tuple[int, int, Detection]] = []
    for ri, ai, det in raw:
        if all(max(abs(ri - r0), abs(ai - a0)) > nms_cells
               for r0, a0, _ in seeds):
            seeds.append((ri, ai, det))

    merged: List[Detection] = []
    for ri, ai, det in seeds:
        if merge_cells > 0.0:
            num_r = num_a = den = 0.0
            for rj, aj, other in raw:
                if max(abs(ri - rj), abs(ai - aj)) > nms_cells:
                    continue
                if max(abs(other.range_m - det.range_m) / cell_r,
                       abs(other.azimuth_deg - det.azimuth_deg) / cell_a
                       ) > merge_cells:
                    continue
                num_r += other.score * other.range_m
                num_a += other.score * other.azimuth_deg
                den += other.score
            det = Detection(range_m=num_r / den, azimuth_deg=num_a / den,
                            score=det.score)
        merged.append(det)

    if dedup_cells <= 0.0:
        return merged
    kept: List[Detection] = []
    for det in merged:                  # already score-descending
        if all(max(abs(det.range_m - k.range_m) / cell_r,
                   abs(det.azimuth_deg - k.azimuth_deg) / cell_a)
               > dedup_cells for k in kept):
            kept.append(det)
    return kept


def _greedy_match(dets: Sequence[Tuple[int, Detection]],
                  truths: Dict[int, List[Tuple[float, float]]],
                  iou_threshold: float):
    """Match score-sorted (frame, det) pairs greedily; yields per-det TP flag
    and, for TPs, the matched truth index and IoU."""
    used = {f: [False] * len(t) for f, t in truths.items()}
    results = []
    for frame, det in dets:
        best_iou, best_j = 0.0, -1
        pt = to_xy(det.range_m, det.azimuth_deg)
        for j, truth_pt in enumerate(truths.get(frame, [])):
            if used.get(frame, [])[j]:
                continue
            iou = box_iou(pt, to_xy(*truth_pt))
            if iou > best_iou:
                best_iou, best_j = iou, j
        if best_j >= 0 and best_iou >= iou_threshold:
            used[frame][best_j] = True
            results.append((frame, det, best_j))
        else:
            results.append((frame, det, -1))
    return results


def match_and_score(detections: Sequence[Sequence[Detection]],
                    truths: Sequence[Sequence[Tuple[float, float]]],
                    iou_threshold: float = 0.5) -> dict:
    """AP / AR / MAEs over a frame set.

    detections[i] and truths[i] belong to frame i; truths are (range_m,
    azimuth_deg) pairs.  AP integrates the precision-recall steps at every
    distinct score; AR and the MAEs are taken with all supplied detections
    (the operating threshold is whatever decode used).
    """
    n_truth = sum(len(t) for t in truths)
    flat = [(i, d) for i, frame in enumerate(detections) for d in frame]
    flat.sort(key=lambda fd: -fd[1].score)
    truth_map = {i: list(t) for i, t in enumerate(truths)}
    matched = _greedy_match(flat, truth_map, iou_threshold)

    range_errs, angle_errs = [], []
    for frame, det, j in matched:
        if j >= 0:
            t_range, t_az = truth_map[frame][j]
            range_errs.append(abs(det.range_m - t_range))
            angle_errs.append(abs(det.azimuth_deg - t_az))

    # precision-recall points at distinct score cuts, descending
    ap = 0.0
    tp = fp = 0
    prev_recall = 0.0
    k = 0
    while k < len(matched):
        score = matched[k][1].score
        while k < len(matched) and matched[k][1].score == score:
            if matched[k][2] >= 0:
                tp += 1
            else:
                fp += 1
            k += 1
        if n_truth > 0:
            precision = tp / (tp + fp)
            recall = tp / n_truth
            ap += (recall - prev_recall) * precision
            prev_recall = recall

    ar = (tp / n_truth) if n_truth > 0 else 0.0
    return {
        "ap": 100.0 * ap,
        "ar": 100.0 * ar,
        "range_mae": float(np.mean(range_errs)) if range_errs else 0.0,
        "angle_mae": float(np.mean(angle_errs)) if angle_errs else 0.0,
    }


def miou(pred: np.ndarray, true: np.ndarray, config: ValidatedConfig,
         range_limit: float = 50.0) -> float:
    """Mean IoU over {free, occupied}, rows beyond range_limit excluded.

    Masks are binary on the (b_r/2, b_a/4) grid (any leading axes are
    treated as extra frames).  An empty class on both sides counts as IoU 1.
    """
    rows, cols = config.b_r // 2, config.b_a // 4
    if pred.shape != true.shape or pred.shape[-2:] != (rows, cols):
        raise ShapeMismatch(
            f"seg masks {pred.shape} / {true.shape} do not match "
            f"(.., {rows}, {cols})")
    cell_r = config.max_range / rows
    centers = (np.arange(rows) + 0.5) * cell_r
    keep = centers < range_limit
    p = pred[..., keep, :].astype(bool)
    t = true[..., keep, :].astype(bool)

    ious = []
    for cls_p, cls_t in ((p, t), (~p, ~t)):
        inter = np.logical_and(cls_p, cls_t).sum()
        union = np.logical_or(cls_p, cls_t).sum()
        ious.append(1.0 if union == 0 else inter / union)
    return 100.0 * float(np.mean(ious))


def f1(ap: float, ar: float) -> float:
    """AP * AR / (AP + AR), half the harmonic mean."""
    if ap < 0 or ar < 0:
        raise BothZero("ap and ar must be non-negative")
    if ap + ar == 0:
        raise BothZero("f1 undefined for ap = ar = 0")
    return ap * ar / (ap + ar)


def detections_to_csv(per_frame: Sequence[Sequence[Detection]]) -> str:
    lines = ["frame_id,range_m,azimuth_deg,score"]
    for i, dets in enumerate(per_frame):
        for d in dets:
            lines.append(f"{i},{d.range_m:.6g},{d.azimuth_deg:.6g},{d.score:.6g}")
    return "\n".join(lines) + "\n"
