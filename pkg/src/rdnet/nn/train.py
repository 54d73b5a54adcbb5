"""Training loop: minibatch Adam over the multi-task loss, CSV logging."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..errors import InvalidConfig, NumericalFailure
from .losses import mtl_loss
from .optim import Adam, scheduled_lr


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 100.0
    """Task balance between detection and free-space losses."""
    beta: float = 100.0
    """Regression weight inside the detection loss."""
    gamma: float = 2.0
    alpha: float = 0.25
    lr: float = 1e-4
    decay: float = 0.9
    decay_every: int = 10
    epochs: int = 100
    batch_size: int = 8
    seed: int = 0

    def check(self):
        for name in ("lam", "beta", "gamma", "alpha", "lr", "decay",
                     "decay_every", "epochs", "batch_size"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(f"TrainConfig.{name} must be positive")


_TC_FIELDS = [f.name for f in dataclasses.fields(TrainConfig)]
_TC_JSON_KEYS = {"lam": "lambda"}       # "lambda" in files, lam in code


def train_config_to_json(tc: TrainConfig) -> str:
    data = {_TC_JSON_KEYS.get(name, name): getattr(tc, name)
            for name in _TC_FIELDS}
    return json.dumps(data, indent=2) + "\n"


def train_config_from_json(text: str) -> TrainConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"train config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise InvalidConfig("train config JSON must be an object")
    json_to_field = {_TC_JSON_KEYS.get(name, name): name for name in _TC_FIELDS}
    unknown = sorted(set(data) - set(json_to_field))
    if unknown:
        raise InvalidConfig(f"train config has unknown keys: {unknown}")
    kwargs = {json_to_field[k]: v for k, v in data.items()}
    tc = TrainConfig(**kwargs)
    tc.check()
    return tc


def load_train_config(path) -> TrainConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return train_config_from_json(fh.read())


def _batch_losses(model, x, gt_clas, gt_reg, gt_seg, tc: TrainConfig,
                  train: bool):
    clas, reg, seg = model.forward(x, train=train)
    loss, d_clas, d_reg, d_seg = mtl_loss(
        gt_clas, clas, gt_reg, reg, gt_seg, seg,
        lam=tc.lam, beta=tc.beta, gamma=tc.gamma, alpha=tc.alpha)
    return loss, (d_clas, d_reg, d_seg), (clas, reg, seg)


def train_epoch(model, dataset, tc: TrainConfig, optimizer: Adam, epoch: int,
                rng, log_rows: Optional[list] = None) -> dict:
    """One pass over the dataset; returns mean losses.

    dataset is (x, clas, reg, seg) arrays with a leading frame axis.
    """
    from .losses import detection_loss, seg_loss

    x_all, clas_all, reg_all, seg_all = dataset
    n = x_all.shape[0]
    order = rng.permutation(n)
    optimizer.lr = scheduled_lr(tc.lr, epoch, tc.decay, tc.decay_every)

    sums = {"l_det": 0.0, "l_free": 0.0, "l_mtl": 0.0}
    steps = 0
    for start in range(0, n, tc.batch_size):
        idx = order[start:start + tc.batch_size]
        x = x_all[idx]
        gt_clas = clas_all[idx][:, None]
        gt_reg = reg_all[idx]
        gt_seg = seg_all[idx][:, None]

        optimizer.zero_grad()
        clas, reg, seg = model.forward(x, train=True)
        l_det, d_clas, d_reg = detection_loss(
            gt_clas, clas, gt_reg, reg,
            beta=tc.beta, gamma=tc.gamma, alpha=tc.alpha)
        l_free, d_seg = seg_loss(gt_seg, seg)
        l_mtl = l_det + tc.lam * l_free
        if not np.isfinite(l_mtl):
            raise NumericalFailure(
                f"non-finite loss at epoch {epoch} step {steps}")
        model.backward(d_clas, d_reg, tc.lam * d_seg)
        optimizer.step()

        batch = len(idx)
        sums["l_det"] += l_det * batch
        sums["l_free"] += l_free * batch
        sums["l_mtl"] += l_mtl * batch
        if log_rows is not None:
            log_rows.append((epoch, steps, l_det / batch, l_free / batch,
                             l_mtl / batch, optimizer.lr))
        steps += 1

    return {k: v / n for k, v in sums.items()}


def fit(model, dataset, tc: TrainConfig, log_rows: Optional[list] = None,
        progress=None) -> List[dict]:
    """Train for tc.epochs epochs; returns the per-epoch loss summaries."""
    tc.check()
    optimizer = Adam(model.parameters(), lr=tc.lr)
    rng = np.random.default_rng(tc.seed)
    history = []
    for epoch in range(tc.epochs):
        summary = train_epoch(model, dataset, tc, optimizer, epoch, rng,
                              log_rows=log_rows)
        history.append(summary)
        if progress is not None:
            progress(epoch, summary)
    return history


def log_to_csv(log_rows: Sequence[Tuple]) -> str:
    lines = ["epoch,step,l_det,l_free,l_mtl,lr"]
    for epoch, step, l_det, l_free, l_mtl, lr in log_rows:
        lines.append(f"{epoch},{step},{l_det:.6g},{l_free:.6g},"
                     f"{l_mtl:.6g},{lr:.6g}")
    return "\n".join(lines) + "\n"
