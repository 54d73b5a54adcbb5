"""Scratch: cluster decode (weighted centroid) + decoded-space dedup."""
import numpy as np

from rdnet.checkpoint import load_checkpoint
from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.metrics import Detection, match_and_score, miou
from rdnet.nn.targets import detection_grid

BAND = (3.0, 10.0)
cfg = validate(toy_preset())
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999, range_band=BAND)
xt, cte, rte, ste = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]
model = load_checkpoint("_ckpt7")

rows, cols, cell_r, cell_a = detection_grid(cfg)
half_fov = cfg.azimuth_fov / 2.0

# raw maps for all frames
clas_all = np.empty((xt.shape[0], rows, cols), np.float32)
reg_all = np.empty((xt.shape[0], 2, rows, cols), np.float32)
for s in range(0, xt.shape[0], 16):
    c, r, _ = model.forward(xt[s:s + 16], train=False)
    clas_all[s:s + 16] = c[:, 0]
    reg_all[s:s + 16] = r


def decode_cluster(clas, reg, threshold, nms_cells=1, member_cells=0.75,
                   dedup_cells=1.0):
    raw = []
    for ri, ai in zip(*np.nonzero(clas > threshold)):
        rng_m = (ri + 0.5) * cell_r + reg[0, ri, ai] * cell_r
        az = -half_fov + (ai + 0.5) * cell_a + reg[1, ri, ai] * cell_a
        raw.append((int(ri), int(ai), float(rng_m), float(az), float(clas[ri, ai])))
    raw.sort(key=lambda t: -t[4])
    seeds = []
    for ri, ai, rng_m, az, sc in raw:
        if all(max(abs(ri - r0), abs(ai - a0)) > nms_cells for r0, a0, *_ in seeds):
            seeds.append((ri, ai, rng_m, az, sc))
    dets = []
    for ri, ai, rng_m, az, sc in seeds:
        num_r = num_a = den = 0.0
        for rj, aj, rm, azm, s2 in raw:
            if max(abs(ri - rj), abs(ai - aj)) <= nms_cells and \
               max(abs(rm - rng_m) / cell_r, abs(azm - az) / cell_a) <= member_cells:
                num_r += s2 * rm
                num_a += s2 * azm
                den += s2
        dets.append(Detection(range_m=num_r / den, azimuth_deg=num_a / den, score=sc))
    kept = []
    for d in sorted(dets, key=lambda d: -d.score):
        if all(max(abs(d.range_m - k.range_m) / cell_r,
                   abs(d.azimuth_deg - k.azimuth_deg) / cell_a) > dedup_cells
               for k in kept):
            kept.append(d)
    return kept


for th in (0.05, 0.1, 0.15):
    for mem, dd in ((0.75, 1.0), (0.75, 0.0), (1.0, 1.0), (0.5, 1.0), (0.75, 1.3)):
        dets = [decode_cluster(clas_all[i], reg_all[i], th, member_cells=mem,
                               dedup_cells=dd) for i in range(xt.shape[0])]
        s = match_and_score(dets, truths)
        print("th=%.2f mem=%.2f dedup=%.1f  AP=%.1f AR=%.1f rMAE=%.2f aMAE=%.2f" % (
            th, mem, dd, s["ap"], s["ar"], s["range_mae"], s["angle_mae"]), flush=True)
