"""Model hyperparameters and the ablation variant switch."""
from __future__ import annotations

from dataclasses import asdict, dataclass

VARIANTS = ("full", "no-wm", "no-wm-loss", "no-stopgrad", "single-step",
            "pool-before-wm", "no-replan")


@dataclass
class ModelConfig:
    f_channels: int = 32
    fmap_h: int = 4
    fmap_w: int = 4
    n_expert: int = 10
    m_agent: int = 6
    d_model: int = 128
    heads: int = 4
    action_blocks: int = 2
    wm_blocks: int = 1
    waypoint_dim: int = 3
    max_waypoint_sets: int = 5
    head_hidden: int = 256
    variant: str = "full"

    def __post_init__(self):
        if self.n_expert < 1 or self.m_agent < 2:
            raise ValueError("need n_expert >= 1 and m_agent >= 2")
        if self.d_model % self.heads != 0:
            raise ValueError("d_model must be divisible by heads")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def latent_dim(self):
        return self.f_channels * self.fmap_h * self.fmap_w

    @property
    def pooled_dim(self):
        return 2 * self.f_channels

    @property
    def trajectory_dim(self):
        """Width of the vectors the action/world models operate on."""
        return self.pooled_dim if self.variant == "pool-before-wm" else self.latent_dim

    @property
    def total_waypoint_values(self):
        k = self.max_waypoint_sets
        return k * (k + 1) // 2 * self.waypoint_dim

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)
