"""Scratch: decode-space dedup effect on AP, several radii."""
import numpy as np

from rdnet.checkpoint import load_checkpoint
from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.evaluate import evaluate_model
from rdnet.metrics import match_and_score
from rdnet.nn.targets import detection_grid

BAND = (3.0, 10.0)
cfg = validate(toy_preset())
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999, range_band=BAND)
xt, cte, rte, ste = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]
model = load_checkpoint("_ckpt7")
_, _, cell_r, cell_a = detection_grid(cfg)


def dedup(frame_dets, radius):
    kept = []
    for d in sorted(frame_dets, key=lambda d: -d.score):
        if all(max(abs(d.range_m - k.range_m) / cell_r,
                   abs(d.azimuth_deg - k.azimuth_deg) / cell_a) > radius
               for k in kept):
            kept.append(d)
    return kept


for th in (0.05, 0.1, 0.15):
    rep, dets = evaluate_model(model, xt, cte, rte, ste, truths, threshold=th)
    print("th=%.2f base AP=%.1f AR=%.1f" % (th, rep.ap, rep.ar), flush=True)
    for radius in (0.8, 1.0, 1.2, 1.5):
        dd = [dedup(f, radius) for f in dets]
        s = match_and_score(dd, truths)
        print("   dedup r=%.1f  AP=%.1f AR=%.1f" % (radius, s["ap"], s["ar"]))
