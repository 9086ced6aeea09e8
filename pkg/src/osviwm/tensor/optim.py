"""AdamW with decoupled weight decay and the one-cycle LR schedule."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class LRSchedule:
    total_steps: int
    peak_lr: float = 2e-4
    final_lr: float = 2e-7
    warmup_fraction: float = 0.1
    div_factor: float = 25.0


def one_cycle_lr(step, schedule):
    """Cosine ramp peak/div_factor -> peak, then cosine anneal to final_lr."""
    t, total = float(step), float(schedule.total_steps)
    if not 0 <= t <= total:
        raise ValueError(f"step {step} outside [0, {schedule.total_steps}]")
    warm = schedule.warmup_fraction * total
    init = schedule.peak_lr / schedule.div_factor
    if t <= warm:
        return init + (schedule.peak_lr - init) * 0.5 * (1.0 - np.cos(np.pi * t / warm))
    frac = (t - warm) / (total - warm)
    return schedule.final_lr + (schedule.peak_lr - schedule.final_lr) * 0.5 * (1.0 + np.cos(np.pi * frac))


class AdamW:
    """Decoupled weight decay: decay is applied to the parameter, not the gradient."""

    def __init__(self, params, lr=2e-4, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.01):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self):
        for p in self.params:
            p.grad = None

    def step(self):
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1 ** t
        bc2 = 1.0 - self.beta2 ** t
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                g = np.zeros_like(p.data)
            if g.shape != p.data.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.data.shape}")
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * (g * g)
            mhat = self.m[i] / bc1
            vhat = self.v[i] / bc2
            update = mhat / (np.sqrt(vhat) + self.eps) + self.weight_decay * p.data
            p.data = p.data - self.lr * update
