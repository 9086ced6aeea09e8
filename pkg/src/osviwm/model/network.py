"""The imitation network: shared encoder, recursive action/world models,
spatial and temporal pooling, and the attributed waypoint head.

Data flow (full variant): demo frames and the agent's first observation
are encoded to flat latent states; an action model and a world model
alternate to roll the agent's latent state M-1 steps into the future;
each predicted state is spatially pooled to per-channel expected
coordinates; attention pooling over time summarizes the trajectory; a
two-layer MLP emits waypoint sets of sizes 1..5.
"""
from __future__ import annotations

import numpy as np

from ..tensor import (Tensor, concat, gelu, matmul, relu, reshape, sigmoid,
                      softmax, stack, transpose)
from ..tensor.nn import (AttentionPool, Linear, Module, TransformerBlock,
                         sinusoidal_positional_embedding)
from ..tensor.tensor import conv2d_nhwc
from ..util import seed_from
from .config import ModelConfig

IMG = 64


class ConvEncoder(Module):
    """4 stride-2 conv stages: (64,64,3) -> (4,4,F), flattened channel-first.

    Works in NHWC because rendered frames arrive that way; the flattened
    latent is ordered (F, H, W) so spatial pooling can reshape it back.
    """

    def __init__(self, f_channels, rng):
        chans = [3, 16, 32, 32, f_channels]
        self.weights = []
        self.biases = []
        for cin, cout in zip(chans[:-1], chans[1:]):
            a = np.sqrt(2.0 / (cin * 9))
            self.weights.append(Tensor(rng.normal(0.0, a, size=(3, 3, cin, cout)),
                                       requires_grad=True))
            self.biases.append(Tensor(np.zeros(cout), requires_grad=True))

    def named_parameters(self, prefix=""):
        out = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            out.append((f"{prefix}conv{i}.w", w))
            out.append((f"{prefix}conv{i}.b", b))
        return out

    def __call__(self, images):
        """images: (B, 64, 64, 3) floats in [0,1] -> (B, F*4*4)."""
        if images.shape[-3:-1] != (IMG, IMG) or images.shape[-1] != 3:
            raise ValueError(f"expected (B,{IMG},{IMG},3) images, got {images.shape}")
        x = images
        for w, b in zip(self.weights, self.biases):
            x = relu(conv2d_nhwc(x, w, b, stride=2, padding=1))
        b_, h, w_, c = x.shape
        return reshape(transpose(x, (0, 3, 1, 2)), (b_, c * h * w_))


class WorldModelPolicy(Module):
    """Full network; ``config.variant`` selects the ablation wiring."""

    def __init__(self, config: ModelConfig, seed=0):
        rng = np.random.default_rng(seed_from("model-init", seed))
        c = self.config = config
        d, L = c.d_model, c.trajectory_dim
        self.encoder = ConvEncoder(c.f_channels, rng)
        self.action_in = Linear(L, d, rng)
        self.action_trunk = [TransformerBlock(d, c.heads, rng) for _ in range(c.action_blocks)]
        self.action_out = Linear(d, L, rng)
        self.wm_in = Linear(2 * L, d, rng)
        self.wm_trunk = [TransformerBlock(d, c.heads, rng) for _ in range(c.wm_blocks)]
        self.wm_out = Linear(d, L, rng)
        self.pool = AttentionPool(c.pooled_dim, rng)
        self.head_fc1 = Linear(c.pooled_dim, c.head_hidden, rng)
        self.head_fc2 = Linear(c.head_hidden, c.total_waypoint_values, rng, scale=0.02)
        gx, gy = np.meshgrid(np.linspace(-1.0, 1.0, c.fmap_w),
                             np.linspace(-1.0, 1.0, c.fmap_h))
        self._grid = np.stack([gx.ravel(), gy.ravel()], axis=1).astype(np.float32)  # (H*W, 2)

    # -- stages ---------------------------------------------------------

    def encode(self, images):
        return self.encoder(images)

    def predict_action(self, expert_latents, agent_latents):
        """(B,N,L) demo latents + (B,i,L) agent history -> latent action (B,L)."""
        b, n, L = expert_latents.shape
        i = agent_latents.shape[1]
        if i < 1:
            raise ValueError("agent history must be nonempty")
        tokens = concat([expert_latents, agent_latents], axis=1)  # (B, N+i, L)
        h = self.action_in(tokens)
        h = h + sinusoidal_positional_embedding(n + i, self.config.d_model, dtype=h.dtype)
        for blk in self.action_trunk:
            h = blk(h)
        return self.action_out(h[:, n + i - 1])

    def predict_next_state(self, agent_latents, actions):
        """(B,i,L) states + (B,i,L) actions -> next latent state (B,L)."""
        if agent_latents.shape[1] != actions.shape[1]:
            raise ValueError("state/action histories must have equal length")
        i = agent_latents.shape[1]
        tokens = concat([agent_latents, actions], axis=2)  # (B, i, 2L)
        h = self.wm_in(tokens)
        h = h + sinusoidal_positional_embedding(i, self.config.d_model, dtype=h.dtype)
        for blk in self.wm_trunk:
            h = blk(h)
        return self.wm_out(h[:, i - 1])

    def generate_latent_trajectory(self, expert_latents, r1, m=None):
        """Alternate action/world models to predict states r_2..r_M.

        Returns (states, actions): M-1 predicted states and the actions
        that produced them.
        """
        m = self.config.m_agent if m is None else m
        if m < 2:
            raise ValueError("m must be >= 2")
        agent = [r1]
        actions = []
        states = []
        for _ in range(m - 1):
            hist = stack(agent, axis=1)                    # (B, i, L)
            a_i = self.predict_action(expert_latents, hist)
            actions.append(a_i)
            acts = stack(actions, axis=1)                  # (B, i, L)
            r_next = self.predict_next_state(hist, acts)
            states.append(r_next)
            agent.append(r_next)
        return states, actions

    def spatial_softmax(self, latent):
        """(B, F*H*W) -> (B, 2F) per-channel expected (x, y) on a [-1,1] grid."""
        c = self.config
        b = latent.shape[0]
        maps = reshape(latent, (b, c.f_channels, c.fmap_h * c.fmap_w))
        p = softmax(maps, axis=-1)
        coords = matmul(p, Tensor(self._grid.astype(p.dtype.type)))  # (B, F, 2)
        return reshape(coords, (b, c.pooled_dim))

    def attention_pool(self, pooled_seq):
        return self.pool(pooled_seq)

    def predict_waypoints(self, pooled):
        """(B, 2F) -> list of waypoint sets, sizes 1..5, each (B, k, D).

        Positions are raw coordinates in normalized view units; the
        gripper channel is a sigmoid (binarized only at execution).
        """
        c = self.config
        out = self.head_fc2(gelu(self.head_fc1(pooled)))  # (B, 15*D)
        b = out.shape[0]
        sets = []
        off = 0
        for k in range(1, c.max_waypoint_sets + 1):
            chunk = reshape(out[:, off:off + k * c.waypoint_dim], (b, k, c.waypoint_dim))
            pos = chunk[:, :, :c.waypoint_dim - 1]
            grip = sigmoid(chunk[:, :, c.waypoint_dim - 1:])
            sets.append(concat([pos, grip], axis=2))
            off += k * c.waypoint_dim
        return sets

    # -- composition ------------------------------------------------------

    def _encode_batch_seq(self, frames):
        """(B, T, 3, 64, 64) -> (B, T, latent) through the shared encoder."""
        b, t = frames.shape[0], frames.shape[1]
        flat = reshape(frames, (b * t,) + tuple(frames.shape[2:]))
        lat = self.encode(flat)
        return reshape(lat, (b, t, lat.shape[-1]))

    def forward(self, expert_frames, agent_frame):
        """(B,N,3,64,64) demo + (B,3,64,64) first observation.

        Returns (waypoint_sets, pooled_pred) where pooled_pred is the
        (B, T, 2F) sequence of spatially pooled predicted states used by
        the world-model loss and for decoding.
        """
        c = self.config
        if expert_frames.shape[1] != c.n_expert:
            raise ValueError(f"expected {c.n_expert} demo frames, got {expert_frames.shape[1]}")
        b = expert_frames.shape[0]
        e_lat = self._encode_batch_seq(expert_frames)
        r1 = self.encode(agent_frame)
        if c.variant == "pool-before-wm":
            e_lat = stack([self.spatial_softmax(e_lat[:, t]) for t in range(c.n_expert)], axis=1)
            r1 = self.spatial_softmax(r1)

        if c.variant == "no-wm":
            a1 = self.predict_action(e_lat, reshape(r1, (b, 1, r1.shape[-1])))
            pooled_seq = [self.spatial_softmax(a1)]
        elif c.variant == "single-step":
            hist = reshape(r1, (b, 1, r1.shape[-1]))
            a1 = self.predict_action(e_lat, hist)
            r2 = self.predict_next_state(hist, reshape(a1, (b, 1, a1.shape[-1])))
            pooled_seq = [self.spatial_softmax(r2)] * (c.m_agent - 1)
        else:
            states, _ = self.generate_latent_trajectory(e_lat, r1, c.m_agent)
            if c.variant == "pool-before-wm":
                pooled_seq = states
            else:
                pooled_seq = [self.spatial_softmax(s) for s in states]

        pooled_pred = stack(pooled_seq, axis=1)  # (B, T, 2F)
        summary = self.attention_pool(pooled_pred)
        sets = self.predict_waypoints(summary)
        return sets, pooled_pred

    def pooled_targets(self, agent_future_frames):
        """Encode ground-truth frames R_2..R_M and spatially pool them."""
        b, t = agent_future_frames.shape[0], agent_future_frames.shape[1]
        lat = self._encode_batch_seq(agent_future_frames)
        return stack([self.spatial_softmax(lat[:, i]) for i in range(t)], axis=1)
