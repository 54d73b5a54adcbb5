"""Scratch: threshold sweep on the saved ep22 checkpoint + soften equivalence."""
import time

import numpy as np

from rdnet.checkpoint import load_checkpoint
from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.evaluate import evaluate_model

BAND = (3.0, 10.0)
cfg = validate(toy_preset())

# 1) promoted azimuth_neighbors path must reproduce the scratch soften()
train_scenes = random_scenes(500, cfg, max_targets=2, seed=100, range_band=BAND)
xr, ct, rt, st = training_arrays(train_scenes, cfg)
xr2, ct2, rt2, st2 = training_arrays(train_scenes, cfg, azimuth_neighbors=0.6)


def soften(ct, rt):
    ct_s, rt_s = ct.copy(), rt.copy()
    claimed = {}
    pos = np.argwhere(ct == 1.0)
    for f, r, a in pos:
        for da in (-1, 1):
            a2 = a + da
            if not (0 <= a2 < ct.shape[2]) or ct[f, r, a2] == 1.0:
                continue
            key = (f, r, a2)
            if key in claimed:
                ct_s[f, r, a2] = 0.0
                rt_s[f, :, r, a2] = 0.0
                continue
            claimed[key] = True
            ct_s[f, r, a2] = 0.6
            rt_s[f, 0, r, a2] = rt[f, 0, r, a]
            rt_s[f, 1, r, a2] = rt[f, 1, r, a] - da
    return ct_s, rt_s


ct_ref, rt_ref = soften(ct, rt)
print("soften equivalence: clas %s reg %s" % (
    np.array_equal(ct2, ct_ref), np.array_equal(rt2, rt_ref)), flush=True)

# 2) threshold sweep on the ep22 checkpoint
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999, range_band=BAND)
xt, cte, rte, ste = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]

model = load_checkpoint("_ckpt7")
t0 = time.time()
for th in (0.02, 0.05, 0.08, 0.10, 0.12, 0.15):
    rep, _ = evaluate_model(model, xt, cte, rte, ste, truths, threshold=th)
    print("th=%.2f AP=%.1f AR=%.1f rMAE=%.2f aMAE=%.2f mIoU=%.1f" % (
        th, rep.ap, rep.ar, rep.range_mae, rep.angle_mae, rep.miou), flush=True)
print("sweep %.0fs" % (time.time() - t0))
