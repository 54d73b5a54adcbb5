"""Model evaluation: forward pass, decode, match, segment, report."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import numpy as np

from .config import ValidatedConfig
from .errors import BothZero
from .metrics import Detection, EvalReport, decode, f1, match_and_score, miou
from .nn.model import FftRadNet


def evaluate_model(model: FftRadNet, x: np.ndarray, clas_gt: np.ndarray,
                   reg_gt: np.ndarray, seg_gt: np.ndarray,
                   scenes_truths: Sequence[Sequence[Tuple[float, float]]],
                   threshold: float = 0.5, nms_cells: int = 1,
                   merge_cells: float = 0.75, dedup_cells: float = 1.0,
                   batch_size: int = 16):
    """Run the model over a frame set and score it.

    scenes_truths[i] lists (range_m, azimuth_deg) of frame i's targets.
    Returns (EvalReport, per-frame detections).
    """
    cfg = model.config
    n = x.shape[0]
    detections: List[List[Detection]] = []
    seg_preds = np.empty((n, cfg.b_r // 2, cfg.b_a // 4), dtype=np.float32)
    for start in range(0, n, batch_size):
        xb = x[start:start + batch_size]
        clas, reg, seg = model.forward(xb, train=False)
        seg_preds[start:start + batch_size] = seg[:, 0]
        for i in range(xb.shape[0]):
            detections.append(decode(clas[i, 0], reg[i], cfg,
                                     threshold=threshold,
                                     nms_cells=nms_cells,
                                     merge_cells=merge_cells,
                                     dedup_cells=dedup_cells))

    scores = match_and_score(detections, scenes_truths)
    seg_miou = miou(seg_preds > 0.5, seg_gt > 0.5, cfg)
    try:
        f1_value = f1(scores["ap"], scores["ar"])
    except BothZero:
        f1_value = 0.0
    report = EvalReport(ap=scores["ap"], ar=scores["ar"], f1=f1_value,
                        range_mae=scores["range_mae"],
                        angle_mae=scores["angle_mae"], miou=seg_miou)
    return report, detections
