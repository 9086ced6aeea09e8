from .tensor import (DEFAULT_DTYPE, Tape, Tensor, add, as_tensor, backward,
                     concat, conv2d, conv2d_transpose, div, gelu, getitem,
                     grad_enabled, matmul, mul, neg, no_grad, power, record,
                     relu, reshape, sigmoid, softmax, stack, stop_gradient,
                     sub, tabs, tanh, texp, tlog, tmean, transpose, tsqrt,
                     tsum)
from .nn import (AttentionPool, CausalSelfAttention, LayerNorm, Linear,
                 Module, TransformerBlock, causal_mask,
                 sinusoidal_positional_embedding)
from .optim import AdamW, LRSchedule, one_cycle_lr
