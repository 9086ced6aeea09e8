from .config import VARIANTS, ModelConfig
from .checkpoint import (CheckpointError, load_checkpoint, read_checkpoint,
                         save_checkpoint)
from .network import ConvEncoder, WorldModelPolicy
