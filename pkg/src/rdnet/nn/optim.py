"""Adam with bias correction and the stepped learning-rate schedule."""

from __future__ import annotations

import numpy as np


def adam_step(param, grad, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One in-place Adam update.

    state is a dict holding "m", "v" (arrays like param) and "t" (int);
    initialize m, v to zeros and t to 0.
    """
    state["t"] += 1
    t = state["t"]
    state["m"] = beta1 * state["m"] + (1.0 - beta1) * grad
    state["v"] = beta2 * state["v"] + (1.0 - beta2) * grad * grad
    m_hat = state["m"] / (1.0 - beta1 ** t)
    v_hat = state["v"] / (1.0 - beta2 ** t)
    param -= lr * m_hat / (np.sqrt(v_hat) + eps)


def scheduled_lr(base_lr, epoch, decay=0.9, every=10):
    """base_lr * decay^(epoch // every); epoch is 0-based."""
    return base_lr * decay ** (epoch // every)


class Adam:
    def __init__(self, params, lr=1e-4, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.state = [
            {"m": np.zeros_like(p.value), "v": np.zeros_like(p.value), "t": 0}
            for p in self.params
        ]

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        for p, s in zip(self.params, self.state):
            adam_step(p.value, p.grad, s, self.lr,
                      beta1=self.beta1, beta2=self.beta2, eps=self.eps)
