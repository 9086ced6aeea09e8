"""Training objectives: soft dynamic time warping over waypoint sets, the
L1 world-model loss behind a stop-gradient, and the loss-balancing
schedule.

Soft-DTW replaces the hard minimum of the DTW recurrence with
softmin_gamma(a,b,c) = -gamma*log(exp(-a/g)+exp(-b/g)+exp(-c/g)); the
value equals -gamma*log sum_paths exp(-cost(path)/gamma), and the
gradient comes from the standard reverse DP over alignment weights.
The DP runs in float64 with max-subtraction inside the log-sum-exp.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, as_tensor, no_grad, record, stop_gradient, tabs


@dataclass
class SoftDTWConfig:
    gamma: float = 0.1

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")


@dataclass
class LossWeights:
    total_steps: int
    alpha_start: float = 1.0
    alpha_end: float = 0.05


def alpha(step, weights):
    """Exponential interpolation alpha_start -> alpha_end over training."""
    if not 0 <= step <= weights.total_steps:
        raise ValueError(f"step {step} outside [0, {weights.total_steps}]")
    if weights.alpha_start == weights.alpha_end:
        return float(weights.alpha_start)
    frac = step / weights.total_steps
    return float(weights.alpha_start * (weights.alpha_end / weights.alpha_start) ** frac)


def _softmin3(a, b, c, gamma):
    """Elementwise soft minimum of three arrays, max-subtraction stabilized."""
    stackd = np.stack([a, b, c])
    m = np.min(stackd, axis=0)
    # where all inputs are +inf the result stays +inf
    with np.errstate(invalid="ignore"):
        z = np.exp(-(stackd - m) / gamma)
        z[~np.isfinite(stackd)] = 0.0
    s = z.sum(axis=0)
    out = np.where(np.isfinite(m), m - gamma * np.log(np.maximum(s, 1e-300)), m)
    return out


def _sdtw_dp(cost, gamma):
    """Forward DP. cost: (B, n, m) float64 -> R: (B, n+2, m+2)."""
    b, n, m = cost.shape
    R = np.full((b, n + 2, m + 2), np.inf, dtype=np.float64)
    R[:, 0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            R[:, i, j] = cost[:, i - 1, j - 1] + _softmin3(
                R[:, i - 1, j], R[:, i, j - 1], R[:, i - 1, j - 1], gamma)
    return R


def _sdtw_alignment(cost, R, gamma):
    """Reverse DP: expected alignment weights E (B, n, m)."""
    b, n, m = cost.shape
    D = np.zeros((b, n + 2, m + 2), dtype=np.float64)
    D[:, 1:n + 1, 1:m + 1] = cost
    Rb = R.copy()
    Rb[:, :, m + 1] = -np.inf
    Rb[:, n + 1, :] = -np.inf
    Rb[:, n + 1, m + 1] = Rb[:, n, m]
    E = np.zeros((b, n + 2, m + 2), dtype=np.float64)
    E[:, n + 1, m + 1] = 1.0
    for i in range(n, 0, -1):
        for j in range(m, 0, -1):
            a = np.exp((Rb[:, i + 1, j] - Rb[:, i, j] - D[:, i + 1, j]) / gamma)
            bb = np.exp((Rb[:, i, j + 1] - Rb[:, i, j] - D[:, i, j + 1]) / gamma)
            c = np.exp((Rb[:, i + 1, j + 1] - Rb[:, i, j] - D[:, i + 1, j + 1]) / gamma)
            E[:, i, j] = a * E[:, i + 1, j] + bb * E[:, i, j + 1] + c * E[:, i + 1, j + 1]
    return E[:, 1:n + 1, 1:m + 1]


def soft_dtw_batch(pred, target, gamma):
    """Batched soft-DTW: (B,n,D) vs (B,m,D) -> per-item values (B,).

    Squared-Euclidean cost; differentiable w.r.t. both arguments.
    """
    pred = as_tensor(pred)
    target = as_tensor(target)
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if pred.ndim != 3 or target.ndim != 3:
        raise ValueError("expected (B, len, dim) sequences")
    if pred.shape[1] < 1 or target.shape[1] < 1:
        raise ValueError("sequences must be nonempty")
    if pred.shape[2] != target.shape[2] or pred.shape[0] != target.shape[0]:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    p = pred.data.astype(np.float64)
    t = target.data.astype(np.float64)
    diff = p[:, :, None, :] - t[:, None, :, :]
    cost = np.einsum("bnmd,bnmd->bnm", diff, diff)
    R = _sdtw_dp(cost, gamma)
    n, m = cost.shape[1], cost.shape[2]
    out = Tensor(R[:, n, m].astype(pred.dtype))

    def vjp(g):
        E = _sdtw_alignment(cost, R, gamma)
        gp = 2.0 * np.einsum("bnm,bnmd->bnd", E, diff)
        gt = -2.0 * np.einsum("bnm,bnmd->bmd", E, diff)
        gb = g.reshape(-1, 1, 1).astype(np.float64)
        return ((gb * gp).astype(pred.dtype), (gb * gt).astype(target.dtype))

    return record(out, (pred, target), vjp)


def soft_dtw(pred, target, gamma):
    """Soft-DTW between one (n,D) prediction and one (m,D) target -> scalar."""
    pred = as_tensor(pred)
    target = as_tensor(target)
    if pred.ndim != 2 or target.ndim != 2:
        raise ValueError("expected (len, dim) sequences")
    b = soft_dtw_batch(pred.reshape((1,) + tuple(pred.shape)),
                       target.reshape((1,) + tuple(target.shape)), gamma)
    return b.reshape(())


def hard_dtw(x, y):
    """Classic min-cost DTW with squared-Euclidean cost (oracle, no grad)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, m = len(x), len(y)
    cost = ((x[:, None, :] - y[None, :, :]) ** 2).sum(-1)
    R = np.full((n + 1, m + 1), np.inf)
    R[0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            R[i, j] = cost[i - 1, j - 1] + min(R[i - 1, j], R[i, j - 1], R[i - 1, j - 1])
    return float(R[n, m])


def densify_trajectory(states, factor):
    """Piecewise-linear upsampling of an agent state sequence.

    Positions interpolate linearly; the gripper bit is carried as a step
    function from each segment's start. (T,D) -> ((T-1)*factor+1, D).
    """
    states = np.asarray(states, dtype=np.float64)
    if len(states) < 2:
        raise ValueError("need at least 2 states")
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return states.copy()
    t, d = states.shape
    out = np.empty(((t - 1) * factor + 1, d), dtype=np.float64)
    for i in range(t - 1):
        fr = np.arange(factor, dtype=np.float64)[:, None] / factor
        seg = states[i] * (1 - fr) + states[i + 1] * fr
        seg[:, -1] = states[i, -1]  # gripper is a step function
        out[i * factor:(i + 1) * factor] = seg
    out[-1] = states[-1]
    return out


def wm_loss(pred_pooled, target_pooled):
    """Mean over timesteps of the L1 vector norm between pooled states.

    Targets must already be wrapped in stop_gradient by the caller when
    training; gradient flows only into predictions.
    """
    pred_pooled = as_tensor(pred_pooled)
    target_pooled = as_tensor(target_pooled)
    if pred_pooled.shape != target_pooled.shape:
        raise ValueError(f"shape mismatch {pred_pooled.shape} vs {target_pooled.shape}")
    diff = tabs(pred_pooled - target_pooled)
    per_step = diff.sum(axis=-1)     # L1 over the 2F vector
    return per_step.mean()           # mean over timesteps (and batch)


def total_loss(waypoint_sets, dense_target, pred_pooled, target_pooled,
               alpha_value, gamma, use_stopgrad=True, wm_in_graph=True):
    """L_sdtw summed over the waypoint sets plus alpha * L_wm.

    Returns (total, sdtw_value, wm_value); wm_in_graph=False keeps the
    world-model branch out of the computation graph (its value is still
    logged) for the no-wm-loss ablation.
    """
    dense_target = as_tensor(dense_target)
    sdtw_total = None
    for s in waypoint_sets:
        val = soft_dtw_batch(s, dense_target, gamma).mean()
        sdtw_total = val if sdtw_total is None else sdtw_total + val
    total = sdtw_total
    if wm_in_graph and target_pooled is not None:
        tgt = stop_gradient(target_pooled) if use_stopgrad else target_pooled
        wm = wm_loss(pred_pooled, tgt)
        total = total + alpha_value * wm
        wm_value = float(wm.data)
    elif target_pooled is not None:
        with no_grad():
            wm_value = float(wm_loss(Tensor(pred_pooled.data), Tensor(target_pooled.data)).data)
    else:
        wm_value = 0.0
    return total, float(sdtw_total.data), wm_value
