"""Scratch: where do match failures sit in range?"""
import numpy as np

from rdnet.checkpoint import load_checkpoint
from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.evaluate import evaluate_model
from rdnet.metrics import box_iou, to_xy

BAND = (3.0, 10.0)
cfg = validate(toy_preset())
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999, range_band=BAND)
xt, cte, rte, ste = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]
model = load_checkpoint("_ckpt7")
rep, dets = evaluate_model(model, xt, cte, rte, ste, truths, threshold=0.05)

flat = [(i, d) for i, frame in enumerate(dets) for d in frame]
flat.sort(key=lambda fd: -fd[1].score)
used = {i: [False] * len(t) for i, t in enumerate(truths)}
for fi, det in flat:
    best_j, best_iou = -1, 0.5
    for j, (tr, ta) in enumerate(truths[fi]):
        if not used[fi][j]:
            iou = box_iou(to_xy(det.range_m, det.azimuth_deg), to_xy(tr, ta))
            if iou >= best_iou:
                best_iou, best_j = iou, j
    if best_j >= 0:
        used[fi][best_j] = True

# every truth: matched or not, and its range; plus the nearest det's az error
miss_r, hit_r = [], []
for fi, t in enumerate(truths):
    for j, (tr, ta) in enumerate(t):
        (hit_r if used[fi][j] else miss_r).append(tr)
hist = np.histogram(miss_r, bins=[3, 5, 7, 8, 9, 10])[0]
print("misses by range band [3-5,5-7,7-8,8-9,9-10]:", hist, "of", len(miss_r))
hist2 = np.histogram(hit_r, bins=[3, 5, 7, 8, 9, 10])[0]
print("hits   by range band:", hist2)

# dup FPs: how many on targets above 8.5 m
dup_r = []
for fi, det in flat:
    ok = any(box_iou(to_xy(det.range_m, det.azimuth_deg), to_xy(tr, ta)) >= 0.5
             for tr, ta in truths[fi])
    if not ok:
        near = min(truths[fi], key=lambda t: abs(det.range_m - t[0]) + abs(det.azimuth_deg - t[1]) * 0.1,
                   default=None)
        if near and abs(det.range_m - near[0]) < 1.2 and det.score > 0.2:
            dup_r.append(near[0])
print("high-score near FPs by range:", np.histogram(dup_r, bins=[3, 5, 7, 8, 9, 10])[0], "of", len(dup_r))
