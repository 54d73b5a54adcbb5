"""Scratch: classify FP/miss structure of the ep22 checkpoint at th=0.05."""
import numpy as np

from rdnet.checkpoint import load_checkpoint
from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.evaluate import evaluate_model
from rdnet.metrics import box_iou, to_xy
from rdnet.nn.targets import detection_grid

BAND = (3.0, 10.0)
cfg = validate(toy_preset())
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999, range_band=BAND)
xt, cte, rte, ste = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]
model = load_checkpoint("_ckpt7")

rep, dets = evaluate_model(model, xt, cte, rte, ste, truths, threshold=0.05)
print("th=0.05 AP=%.1f AR=%.1f" % (rep.ap, rep.ar), flush=True)

_, _, cell_r, cell_a = detection_grid(cfg)
flat = [(i, d) for i, frame in enumerate(dets) for d in frame]
flat.sort(key=lambda fd: -fd[1].score)
used = {i: [False] * len(t) for i, t in enumerate(truths)}
dup = mod = far = tp = 0
fp_rows = []
for fi, det in flat:
    best_j, best_iou = -1, 0.5
    for j, (tr, ta) in enumerate(truths[fi]):
        if used[fi][j]:
            continue
        iou = box_iou(to_xy(det.range_m, det.azimuth_deg), to_xy(tr, ta))
        if iou >= best_iou:
            best_iou, best_j = iou, j
    if best_j >= 0:
        used[fi][best_j] = True
        tp += 1
        continue
    # FP: distance in cells to the nearest truth of the frame
    dists = [(abs(det.range_m - tr) / cell_r, abs(det.azimuth_deg - ta) / cell_a)
             for tr, ta in truths[fi]]
    cheb = min(max(dr, da) for dr, da in dists) if dists else 99.0
    if cheb < 1.5:
        dup += 1
    elif cheb < 3.0:
        mod += 1
    else:
        far += 1
    fp_rows.append((det.score, cheb, fi))
misses = sum(1 for f in used.values() for u in f if not u)
print("tp=%d dup(<1.5c)=%d moderate(<3c)=%d far=%d misses=%d" % (tp, dup, mod, far, misses))
print("top FP scores:", ["%.2f/%.1fc" % (s, c) for s, c, _ in sorted(fp_rows, reverse=True)[:15]])
