"""Neural building blocks on top of the tensor engine."""
from __future__ import annotations

import numpy as np

from .tensor import (DEFAULT_DTYPE, Tensor, concat, gelu, matmul, record,
                     reshape, softmax, tsqrt, transpose)


class Module:
    """Bare-bones parameter container; names follow attribute paths."""

    def named_parameters(self, prefix=""):
        out = []
        for k, v in vars(self).items():
            if isinstance(v, Tensor) and v.requires_grad:
                out.append((prefix + k, v))
            elif isinstance(v, Module):
                out.extend(v.named_parameters(prefix + k + "."))
            elif isinstance(v, (list, tuple)):
                for i, item in enumerate(v):
                    if isinstance(item, Module):
                        out.extend(item.named_parameters(f"{prefix}{k}.{i}."))
        return out

    def parameters(self):
        return [t for _, t in self.named_parameters()]


class Linear(Module):
    def __init__(self, d_in, d_out, rng, bias=True, scale=None, dtype=DEFAULT_DTYPE):
        a = scale if scale is not None else np.sqrt(6.0 / (d_in + d_out))
        self.d_in = d_in
        self.d_out = d_out
        self.w = Tensor(rng.uniform(-a, a, size=(d_in, d_out)), requires_grad=True, dtype=dtype)
        self.b = Tensor(np.zeros(d_out), requires_grad=True, dtype=dtype) if bias else None

    def __call__(self, x):
        # flatten leading dims so BLAS sees one big GEMM
        lead = x.shape[:-1]
        if len(lead) != 1:
            x = reshape(x, (-1, self.d_in))
        y = matmul(x, self.w)
        if self.b is not None:
            y = y + self.b
        if len(lead) != 1:
            y = reshape(y, lead + (self.d_out,))
        return y


class LayerNorm(Module):
    def __init__(self, dim, eps=1e-5, dtype=DEFAULT_DTYPE):
        self.gamma = Tensor(np.ones(dim), requires_grad=True, dtype=dtype)
        self.beta = Tensor(np.zeros(dim), requires_grad=True, dtype=dtype)
        self.eps = eps

    def __call__(self, x):
        mu = x.mean(axis=-1, keepdims=True)
        xc = x - mu
        var = (xc * xc).mean(axis=-1, keepdims=True)
        y = xc / tsqrt(var + self.eps)
        return y * self.gamma + self.beta


def causal_mask(t, dtype=DEFAULT_DTYPE):
    """Additive mask: 0 on/below the diagonal, -inf above."""
    m = np.zeros((t, t), dtype=dtype)
    m[np.triu_indices(t, k=1)] = -np.inf
    return m


class CausalSelfAttention(Module):
    def __init__(self, d_model, heads, rng, dtype=DEFAULT_DTYPE):
        if d_model % heads != 0:
            raise ValueError(f"d_model {d_model} not divisible by heads {heads}")
        self.heads = heads
        self.d_head = d_model // heads
        self.wq = Linear(d_model, d_model, rng, dtype=dtype)
        self.wk = Linear(d_model, d_model, rng, dtype=dtype)
        self.wv = Linear(d_model, d_model, rng, dtype=dtype)
        self.wo = Linear(d_model, d_model, rng, dtype=dtype)

    def __call__(self, x):
        b, t, d = x.shape
        h, dh = self.heads, self.d_head

        def split(z):  # (B,T,d) -> (B,h,T,dh)
            return transpose(reshape(z, (b, t, h, dh)), (0, 2, 1, 3))

        q, k, v = split(self.wq(x)), split(self.wk(x)), split(self.wv(x))
        scores = matmul(q, transpose(k, (0, 1, 3, 2))) * (1.0 / np.sqrt(dh))
        scores = scores + causal_mask(t, dtype=x.dtype)
        attn = softmax(scores, axis=-1)
        out = matmul(attn, v)  # (B,h,T,dh)
        out = reshape(transpose(out, (0, 2, 1, 3)), (b, t, d))
        return self.wo(out)


class TransformerBlock(Module):
    """Pre-norm causal block: attention sublayer then GELU MLP, both residual."""

    def __init__(self, d_model, heads, rng, mlp_ratio=4, dtype=DEFAULT_DTYPE):
        self.ln1 = LayerNorm(d_model, dtype=dtype)
        self.attn = CausalSelfAttention(d_model, heads, rng, dtype=dtype)
        self.ln2 = LayerNorm(d_model, dtype=dtype)
        self.fc1 = Linear(d_model, mlp_ratio * d_model, rng, dtype=dtype)
        self.fc2 = Linear(mlp_ratio * d_model, d_model, rng, dtype=dtype)

    def __call__(self, x):
        x = x + self.attn(self.ln1(x))
        x = x + self.fc2(gelu(self.fc1(self.ln2(x))))
        return x


def sinusoidal_positional_embedding(t, d, dtype=DEFAULT_DTYPE):
    """Interleaved sin/cos embedding, geometric frequency ladder base 10000."""
    if d % 2 != 0:
        raise ValueError(f"embedding dim must be even, got {d}")
    pos = np.arange(t, dtype=np.float64)[:, None]
    idx = np.arange(d // 2, dtype=np.float64)[None, :]
    angles = pos / np.power(10000.0, 2.0 * idx / d)
    pe = np.zeros((t, d), dtype=dtype)
    pe[:, 0::2] = np.sin(angles)
    pe[:, 1::2] = np.cos(angles)
    return pe


class AttentionPool(Module):
    """Single learned query over a (posembedded) sequence of vectors."""

    def __init__(self, dim, rng, dtype=DEFAULT_DTYPE):
        a = np.sqrt(3.0 / dim)
        self.query = Tensor(rng.uniform(-a, a, size=(dim,)), requires_grad=True, dtype=dtype)
        self.wk = Linear(dim, dim, rng, dtype=dtype)
        self.wv = Linear(dim, dim, rng, dtype=dtype)
        self.dim = dim

    def __call__(self, seq):
        """seq: (B, T, dim) with T >= 1 -> (B, dim)."""
        b, t, d = seq.shape
        if t < 1:
            raise ValueError("attention_pool needs a nonempty sequence")
        seq = seq + sinusoidal_positional_embedding(t, d, dtype=seq.dtype)
        keys = self.wk(seq)
        vals = self.wv(seq)
        logits = matmul(keys, reshape(self.query, (d, 1))) * (1.0 / np.sqrt(d))  # (B,T,1)
        attn = softmax(reshape(logits, (b, t)), axis=-1)
        return (reshape(attn, (b, t, 1)) * vals).sum(axis=1)
