"""Scratch: architecture/hyper probes at 150 frames x 12 epochs."""
import sys
import time

import numpy as np

from rdnet.config import toy_preset, validate
from rdnet.data import random_scenes, training_arrays
from rdnet.evaluate import evaluate_model
from rdnet.nn.model import ModelSpec, build_fftradnet
from rdnet.nn.train import TrainConfig, fit

cfg = validate(toy_preset())

_cache = {}

def datasets(band):
    if band not in _cache:
        tr = training_arrays(
            random_scenes(150, cfg, max_targets=2, seed=100, range_band=band), cfg)
        te = random_scenes(100, cfg, max_targets=2, seed=999, range_band=band)
        arrays = training_arrays(te, cfg)
        truths = [[(t.range, t.azimuth) for t in s.targets] for s in te]
        _cache[band] = (tr, arrays, truths)
    return _cache[band]

WIDE = ModelSpec(
    pre_encoder_out_channels=32,
    fpn_depths=(2, 2, 2, 2),
    fpn_widths=(24, 48, 64, 80),
    decoder_deconv_channels=(24, 24, 24),
    decoder_latent_channels=32,
    det_head_widths=(48, 48, 48, 48),
    seg_head_widths=(24, 16),
)

BASE_TC = dict(lam=1.0, beta=10.0, gamma=2.0, alpha=0.9, lr=1e-3,
               epochs=12, batch_size=8, seed=0)

variants = {
    "base_hann": (ModelSpec.toy(), {}, (3.0, 14.0)),
    "wide_hann": (WIDE, {}, (3.0, 14.0)),
    "wide_b10": (WIDE, {}, (3.0, 10.0)),
    "wide_lr2": (WIDE, dict(lr=2e-3, decay=0.8, decay_every=5), (3.0, 14.0)),
}

for name in sys.argv[1:] or variants:
    spec, overrides, band = variants[name]
    tc = TrainConfig(**{**BASE_TC, **overrides})
    train_set, (xt, ct, rt, st), truths = datasets(band)
    model = build_fftradnet(spec, cfg, rng=np.random.default_rng(0))
    t0 = time.time()
    fit(model, train_set, tc)
    dt = time.time() - t0
    line = "%-9s %4.0fs" % (name, dt)
    for th in (0.15, 0.3):
        rep, _ = evaluate_model(model, xt, ct, rt, st, truths, threshold=th)
        line += " | th=%.2f AP=%.1f AR=%.1f rMAE=%.2f aMAE=%.2f mIoU=%.1f" % (
            th, rep.ap, rep.ar, rep.range_mae, rep.angle_mae, rep.miou)
    print(line, flush=True)
