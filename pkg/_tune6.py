"""Scratch: full-scale criterion-6 run with threshold sweep."""
import time

import numpy as np

from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.evaluate import evaluate_model
from rdnet.nn.model import ModelSpec, build_fftradnet
from rdnet.nn.train import TrainConfig, fit

cfg = validate(toy_preset())
train_scenes = random_scenes(500, cfg, max_targets=2, seed=100)
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999)
train_set = training_arrays(train_scenes, cfg)
xt, ct, rt, st = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]

tc = TrainConfig(lam=1.0, beta=10.0, gamma=2.0, alpha=0.9, lr=1e-3,
                 decay=0.9, decay_every=10, epochs=30, batch_size=8, seed=0)
model = build_fftradnet(ModelSpec.toy(), cfg, rng=np.random.default_rng(0))
t0 = time.time()


def report(epoch, summary):
    if epoch % 3 != 2 and epoch != tc.epochs - 1:
        return
    clas, _, _ = model.forward(xt[:32], train=False)
    cg = ct[:32]
    pos = clas[:, 0][cg > 0.5]
    neg = clas[:, 0][cg < 0.5]
    line = "ep%02d %.0fs l_det=%.1f pos[%.2f/%.2f/%.2f] negmax=%.2f" % (
        epoch, time.time() - t0, summary["l_det"],
        np.quantile(pos, 0.1), np.median(pos), np.quantile(pos, 0.9), neg.max())
    for th in (0.15, 0.2, 0.3):
        rep, _ = evaluate_model(model, xt, ct, rt, st, truths, threshold=th)
        line += " | th=%.2f AP=%.1f AR=%.1f mIoU=%.1f" % (th, rep.ap, rep.ar, rep.miou)
    print(line, flush=True)


fit(model, train_set, tc, progress=report)
from rdnet.checkpoint import save_checkpoint
save_checkpoint("_ckpt6", model)
print("total %.0fs" % (time.time() - t0), flush=True)
