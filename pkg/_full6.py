"""Scratch: full-scale criterion-6 candidate run."""
import sys
import time

import numpy as np

from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.evaluate import evaluate_model
from rdnet.nn.model import ModelSpec, build_fftradnet
from rdnet.nn.optim import Adam
from rdnet.nn.train import TrainConfig, train_epoch

BAND = (3.0, 10.0)
cfg = validate(toy_preset())
t0 = time.time()
train_set = training_arrays(
    random_scenes(500, cfg, max_targets=2, seed=100, range_band=BAND), cfg)
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999, range_band=BAND)
xt, ct, rt, st = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]
print("datasets %.0fs" % (time.time() - t0), flush=True)

WIDE = ModelSpec(
    pre_encoder_out_channels=32,
    fpn_depths=(2, 2, 2, 2),
    fpn_widths=(24, 48, 64, 80),
    decoder_deconv_channels=(24, 24, 24),
    decoder_latent_channels=32,
    det_head_widths=(48, 48, 48, 48),
    seg_head_widths=(24, 16),
)

tc = TrainConfig(lam=1.0, beta=10.0, gamma=2.0, alpha=0.9, lr=1e-3,
                 decay=0.9, decay_every=10, epochs=30, batch_size=8, seed=0)
model = build_fftradnet(WIDE, cfg, rng=np.random.default_rng(0))
optimizer = Adam(model.parameters(), lr=tc.lr)
rng = np.random.default_rng(tc.seed)

for epoch in range(tc.epochs):
    s = train_epoch(model, train_set, tc, optimizer, epoch, rng)
    if epoch >= 7 and epoch % 2 == 1 or epoch == tc.epochs - 1:
        line = "ep%02d %4.0fs l_det=%.1f" % (epoch + 1, time.time() - t0, s["l_det"])
        for th in (0.15, 0.2):
            rep, _ = evaluate_model(model, xt, ct, rt, st, truths, threshold=th)
            line += " | th=%.2f AP=%.1f AR=%.1f rMAE=%.2f aMAE=%.2f mIoU=%.1f" % (
                th, rep.ap, rep.ar, rep.range_mae, rep.angle_mae, rep.miou)
        print(line, flush=True)
        if rep.ap >= 92 and rep.ar >= 87:
            break
print("total %.0fs" % (time.time() - t0), flush=True)
