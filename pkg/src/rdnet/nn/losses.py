"""Multi-task losses: focal + smooth-L1 detection loss, BCE free-space loss.

All losses use sum reduction and return (scalar, gradient w.r.t. the
prediction).  Classification inputs must lie in [0, 1]; values are nudged
away from exact 0/1 by a dtype-sized epsilon before taking logs.
"""

from __future__ import annotations

import numpy as np

from ..errors import ProbabilityOutOfRange, ShapeMismatch


def _check_probs(y, p):
    if y.shape != p.shape:
        raise ShapeMismatch(f"target shape {y.shape} != prediction {p.shape}")
    if not np.isfinite(p).all() or p.min() < 0.0 or p.max() > 1.0:
        raise ProbabilityOutOfRange(
            "classification predictions must lie in [0, 1]")


def _clip(p):
    eps = 1e-7 if p.dtype == np.float32 else 1e-12
    return np.clip(p, eps, 1.0 - eps)


def bce(y, p):
    """Binary cross-entropy, summed."""
    _check_probs(y, p)
    pc = _clip(p)
    loss = -(y * np.log(pc) + (1.0 - y) * np.log1p(-pc)).sum()
    grad = (pc - y) / (pc * (1.0 - pc))
    return float(loss), grad


def focal(y, p, gamma=2.0, alpha=0.25):
    """Focal loss, summed; alpha weights the positive terms only.

    sum over cells of
        y     * alpha * (1-p)^gamma * (-log p)
      + (1-y) *         p^gamma     * (-log(1-p))

    With gamma = 0, alpha = 1 this reduces exactly to bce.
    """
    _check_probs(y, p)
    pc = _clip(p)
    log_p = np.log(pc)
    log_1p = np.log1p(-pc)
    pos = y * alpha * (1.0 - pc) ** gamma * (-log_p)
    neg = (1.0 - y) * pc ** gamma * (-log_1p)
    loss = (pos + neg).sum()
    # d/dp of each term
    dpos = alpha * (gamma * (1.0 - pc) ** (gamma - 1.0) * log_p
                    - (1.0 - pc) ** gamma / pc)
    dneg = gamma * pc ** (gamma - 1.0) * (-log_1p) + pc ** gamma / (1.0 - pc)
    grad = y * dpos + (1.0 - y) * dneg
    return float(loss), grad


def smooth_l1(delta):
    """Elementwise smooth-L1: 0.5 x^2 for |x| < 1, |x| - 0.5 beyond."""
    delta = np.asarray(delta)
    small = np.abs(delta) < 1.0
    value = np.where(small, 0.5 * delta ** 2, np.abs(delta) - 0.5)
    grad = np.where(small, delta, np.sign(delta))
    return value, grad


def detection_loss(y_clas, p_clas, y_reg, p_reg, beta=100.0, gamma=2.0,
                   alpha=0.25):
    """Detection loss: focal(clas) + beta * smooth-L1 on positive cells.

    Regression terms are summed over cells where y_clas > 0.5, which takes
    in both the one-hot positives and any soft flanking labels above that
    line (see targets.encode_ground_truth).  Returns (scalar, grad_clas,
    grad_reg).
    """
    if y_reg.shape != p_reg.shape:
        raise ShapeMismatch(f"reg target {y_reg.shape} != prediction {p_reg.shape}")
    l_focal, d_clas = focal(y_clas, p_clas, gamma=gamma, alpha=alpha)
    mask = (y_clas > 0.5)
    if mask.ndim == p_reg.ndim - 1:
        mask = np.expand_dims(mask, axis=-3)     # broadcast over the 2 reg maps
    value, grad = smooth_l1(p_reg - y_reg)
    masked = np.broadcast_to(mask, p_reg.shape)
    l_reg = float(value[masked].sum())
    d_reg = np.where(masked, grad, 0.0)
    return l_focal + beta * l_reg, d_clas, beta * d_reg


def seg_loss(y_seg, p_seg):
    """Free-space loss: BCE summed over the segmentation domain."""
    return bce(y_seg, p_seg)


def mtl_loss(y_clas, p_clas, y_reg, p_reg, y_seg, p_seg, lam=100.0,
             beta=100.0, gamma=2.0, alpha=0.25):
    """L = L_det + lam * L_free.  Returns (scalar, grads per prediction)."""
    l_det, d_clas, d_reg = detection_loss(y_clas, p_clas, y_reg, p_reg,
                                          beta=beta, gamma=gamma, alpha=alpha)
    l_free, d_seg = seg_loss(y_seg, p_seg)
    return l_det + lam * l_free, d_clas, d_reg, lam * d_seg
