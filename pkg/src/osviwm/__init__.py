"""One-shot visual imitation on a planar tabletop, driven by a learned world model."""

__version__ = "0.1.0"
