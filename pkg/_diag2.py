"""Scratch: where do the FPs come from in the ep30 checkpoint?"""
import numpy as np
from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.checkpoint import load_checkpoint
from rdnet.evaluate import evaluate_model
from rdnet.metrics import decode
from rdnet.nn.targets import detection_grid

cfg = validate(toy_preset())
model = load_checkpoint("_ckpt6")
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999)
xt, ct, rt, st = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]
rep, dets = evaluate_model(model, xt, ct, rt, st, truths, threshold=0.15)
print("AP=%.1f AR=%.1f rMAE=%.2f aMAE=%.2f" % (rep.ap, rep.ar, rep.range_mae, rep.angle_mae))

rows, cols, cell_r, cell_a = detection_grid(cfg)
# classify every detection: match to nearest truth in cell units
far, dup, offgrid = 0, 0, 0
n_det = 0
err_r, err_a, rngs = [], [], []
for ds, ts in zip(dets, truths):
    used = set()
    for d in sorted(ds, key=lambda d: -d.score):
        n_det += 1
        if not ts:
            offgrid += 1
            continue
        dists = [max(abs(d.range_m - r) / cell_r, abs(d.azimuth_deg - a) / cell_a)
                 for r, a in ts]
        j = int(np.argmin(dists))
        if dists[j] <= 1.0:
            if j in used:
                dup += 1
            else:
                used.add(j)
                err_r.append(abs(d.range_m - ts[j][0]))
                err_a.append(abs(d.azimuth_deg - ts[j][1]))
                rngs.append(ts[j][0])
        elif dists[j] <= 3.0:
            dup += 1
        else:
            far += 1
print("dets=%d nearest<=1cell(first)=%d dup/near=%d far=%d" % (n_det, len(err_r), dup, far))
err_r, err_a, rngs = map(np.array, (err_r, err_a, rngs))
for lo, hi in ((3, 6), (6, 9), (9, 12), (12, 14)):
    m = (rngs >= lo) & (rngs < hi)
    if m.sum():
        need = np.degrees(np.arctan2(0.9, rngs[m])).mean()
        print("r %2d-%2d m: n=%3d aMAE=%.2f deg (need<%.2f) rMAE=%.2f m frac_az_ok=%.2f"
              % (lo, hi, m.sum(), err_a[m].mean(), need, err_r[m].mean(),
                 float((err_a[m] < np.degrees(np.arctan2(0.9, rngs[m]))).mean())))
