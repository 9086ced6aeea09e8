"""Dense float tensors with reverse-mode autodiff on an explicit tape.

Everything is numpy underneath. Ops record onto the currently active
:class:`Tape` only when gradients are enabled and some input requires
them, so inference code pays nothing. 32-bit floats are the working
precision; the gradcheck harness re-runs ops in float64.
"""
from __future__ import annotations

import numpy as np

DEFAULT_DTYPE = np.float32

_tape_stack: list["Tape"] = []
_grad_enabled: bool = True


class Tensor:
    """N-d float array plus optional gradient buffer."""

    __slots__ = ("data", "requires_grad", "grad", "_tape")

    def __init__(self, data, requires_grad=False, dtype=None):
        arr = np.asarray(data)
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        elif arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(DEFAULT_DTYPE)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._tape = None  # tape that produced this tensor, None for leaves

    # -- introspection -------------------------------------------------
    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self):
        return float(self.data)

    def numpy(self):
        return self.data

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"

    # -- operators ------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, key):
        return getitem(self, key)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def transpose(self, axes):
        return transpose(self, axes)


class Tape:
    """Ordered record of executed ops; reversing it drives backprop.

    Ops append in execution order, so inputs always precede their
    consumers (topological by construction). Use as a context manager::

        with Tape() as tape:
            loss = f(params)
        backward(loss)
    """

    def __init__(self):
        self.nodes = []  # (out, parents, vjp) in execution order

    def __enter__(self):
        _tape_stack.append(self)
        return self

    def __exit__(self, *exc):
        popped = _tape_stack.pop()
        assert popped is self
        return False

    def __len__(self):
        return len(self.nodes)


class no_grad:
    """Context manager that disables op recording."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def grad_enabled():
    return _grad_enabled and bool(_tape_stack)


def record(out, parents, vjp):
    """Attach a backward rule for ``out`` to the active tape.

    ``vjp(grad_out)`` must return one gradient array (or None) per
    parent. Public so modules can define custom primitives.
    """
    if not _grad_enabled or not _tape_stack:
        return out
    if not any(p.requires_grad for p in parents):
        return out
    tape = _tape_stack[-1]
    out.requires_grad = True
    out._tape = tape
    tape.nodes.append((out, tuple(parents), vjp))
    return out


def backward(loss):
    """Accumulate d(loss)/d(leaf) into every reachable requires_grad leaf.

    Leaves already holding a grad accumulate (+=). Intermediate grads are
    discarded once consumed; leaves not reachable from the loss keep
    grad=None.
    """
    if loss.size != 1:
        raise ValueError(f"backward() needs a scalar loss, got shape {loss.shape}")
    tape = loss._tape
    if tape is None:
        raise ValueError("backward() on a detached graph: loss was not recorded on any tape")
    grads = {id(loss): np.ones_like(loss.data)}
    holders = {id(loss): loss}
    for out, parents, vjp in reversed(tape.nodes):
        g = grads.pop(id(out), None)
        holders.pop(id(out), None)
        if g is None:
            continue
        pgrads = vjp(g)
        for p, pg in zip(parents, pgrads):
            if pg is None or not p.requires_grad:
                continue
            k = id(p)
            if k in grads:
                grads[k] = grads[k] + pg
            else:
                grads[k] = pg
                holders[k] = p
    for k, t in holders.items():
        if t._tape is None and t.requires_grad:
            g = grads[k].astype(t.data.dtype, copy=False)
            t.grad = g if t.grad is None else t.grad + g


def stop_gradient(x):
    """Identity forward; contributes zero gradient backward."""
    x = as_tensor(x)
    return Tensor(x.data, requires_grad=False)


def as_tensor(x, dtype=None):
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype)


def _result_dtype(*tensors):
    return np.result_type(*[t.data.dtype for t in tensors])


def _unbroadcast(g, shape):
    """Sum ``g`` down to ``shape`` (reverse of numpy broadcasting)."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gd, sd) in enumerate(zip(g.shape, shape)) if sd == 1 and gd != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# -- arithmetic ---------------------------------------------------------

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data + b.data)
    return record(out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data - b.data)
    return record(out, (a, b), lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data * b.data)
    return record(out, (a, b), lambda g: (_unbroadcast(g * b.data, a.shape),
                                          _unbroadcast(g * a.data, b.shape)))


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data / b.data)
    return record(out, (a, b), lambda g: (_unbroadcast(g / b.data, a.shape),
                                          _unbroadcast(-g * a.data / (b.data * b.data), b.shape)))


def neg(a):
    a = as_tensor(a)
    out = Tensor(-a.data)
    return record(out, (a,), lambda g: (-g,))


def power(a, p):
    a = as_tensor(a)
    p = float(p)
    out = Tensor(a.data ** p)
    return record(out, (a,), lambda g: (g * p * a.data ** (p - 1),))


def texp(a):
    a = as_tensor(a)
    y = np.exp(a.data)
    out = Tensor(y)
    return record(out, (a,), lambda g: (g * y,))


def tlog(a):
    a = as_tensor(a)
    out = Tensor(np.log(a.data))
    return record(out, (a,), lambda g: (g / a.data,))


def tsqrt(a):
    a = as_tensor(a)
    y = np.sqrt(a.data)
    out = Tensor(y)
    return record(out, (a,), lambda g: (g * 0.5 / y,))


def tabs(a):
    a = as_tensor(a)
    out = Tensor(np.abs(a.data))
    return record(out, (a,), lambda g: (g * np.sign(a.data),))


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ValueError("matmul expects tensors with ndim >= 2")
    out = Tensor(a.data @ b.data)

    def vjp(g):
        ga = gb = None
        if a.requires_grad:
            ga = _unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.shape)
        if b.requires_grad:
            if a.ndim == 2 and b.ndim == 2:
                gb = a.data.T @ g
            else:
                gb = _unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape)
        return ga, gb

    return record(out, (a, b), vjp)


# -- reductions ---------------------------------------------------------

def tsum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims))

    def vjp(g):
        if axis is None:
            return (np.broadcast_to(g, a.shape).astype(a.dtype, copy=False),)
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).astype(a.dtype, copy=False),)

    return record(out, (a,), vjp)


def tmean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = Tensor(a.data.mean(axis=axis, keepdims=keepdims))
    if axis is None:
        count = a.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([a.shape[ax] for ax in axes]))

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).astype(a.dtype, copy=False) / count,)

    return record(out, (a,), vjp)


# -- shape ops ----------------------------------------------------------

def reshape(a, shape):
    a = as_tensor(a)
    out = Tensor(a.data.reshape(shape))
    return record(out, (a,), lambda g: (g.reshape(a.shape),))


def transpose(a, axes):
    a = as_tensor(a)
    out = Tensor(np.transpose(a.data, axes))
    inv = np.argsort(axes)
    return record(out, (a,), lambda g: (np.transpose(g, inv),))


def getitem(a, key):
    a = as_tensor(a)
    out = Tensor(a.data[key])

    def vjp(g):
        ga = np.zeros_like(a.data)
        np.add.at(ga, key, g)
        return (ga,)

    return record(out, (a,), vjp)


def concat(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))

    return record(out, tuple(tensors), vjp)


def stack(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    out = Tensor(np.stack([t.data for t in tensors], axis=axis))

    def vjp(g):
        return tuple(np.moveaxis(g, axis, 0))

    return record(out, tuple(tensors), vjp)


# -- nonlinearities -----------------------------------------------------

def relu(a):
    a = as_tensor(a)
    out = Tensor(np.maximum(a.data, 0))
    return record(out, (a,), lambda g: (g * (a.data > 0),))


_GELU_C = 0.7978845608028654  # sqrt(2/pi)


def gelu(a):
    """tanh-approximation GELU; the derivative matches the approximation."""
    a = as_tensor(a)
    x = a.data
    x2 = x * x
    inner = x2 * (0.044715 * _GELU_C)
    inner += _GELU_C
    inner *= x
    t = np.tanh(inner)
    out = Tensor(0.5 * x * (1.0 + t))

    def vjp(g):
        dinner = x2 * (3 * 0.044715 * _GELU_C)
        dinner += _GELU_C
        d = 1.0 - t * t
        d *= dinner
        d *= x
        d += 1.0 + t
        d *= 0.5
        d *= g
        return (d,)

    return record(out, (a,), vjp)


def sigmoid(a):
    a = as_tensor(a)
    y = 1.0 / (1.0 + np.exp(-a.data))
    out = Tensor(y)
    return record(out, (a,), lambda g: (g * y * (1.0 - y),))


def tanh(a):
    a = as_tensor(a)
    y = np.tanh(a.data)
    out = Tensor(y)
    return record(out, (a,), lambda g: (g * (1.0 - y * y),))


def softmax(a, axis=-1):
    """Numerically-stable softmax. -inf entries get exactly zero weight."""
    a = as_tensor(a)
    m = np.max(a.data, axis=axis, keepdims=True)
    e = np.exp(a.data - m)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(y)

    def vjp(g):
        dot = (g * y).sum(axis=axis, keepdims=True)
        return ((g - dot) * y,)

    return record(out, (a,), vjp)


# -- convolution --------------------------------------------------------

def _pad_nhwc(x, p):
    if p == 0:
        return x
    bsz, h, w, c = x.shape
    xp = np.zeros((bsz, h + 2 * p, w + 2 * p, c), dtype=x.dtype)
    xp[:, p:p + h, p:p + w, :] = x
    return xp


def _im2col_nhwc(xp, kh, kw, stride, oh, ow):
    """Row-major patch matrix (B*oh*ow, kh*kw*C) from padded NHWC input.

    Rows read nearly-contiguous memory, so the single gather copy is
    cheap and the convolution becomes one large GEMM.
    """
    bsz, hp, wp, c = xp.shape
    sb, sh, sw, sc = xp.strides
    view = np.lib.stride_tricks.as_strided(
        xp,
        shape=(bsz, oh, ow, kh, kw, c),
        strides=(sb, sh * stride, sw * stride, sh, sw, sc),
        writeable=False,
    )
    return np.ascontiguousarray(view).reshape(bsz * oh * ow, kh * kw * c)


def conv2d_nhwc(x, w, b=None, stride=1, padding=0):
    """Convolution in NHWC layout: x:(B,H,W,C) w:(kh,kw,C,O) -> (B,H',W',O)."""
    x, w = as_tensor(x), as_tensor(w)
    if b is not None:
        b = as_tensor(b)
    bsz, h, wdt, cin = x.shape
    kh, kw, cin_w, cout = w.shape
    if cin != cin_w:
        raise ValueError(f"conv channel mismatch: input {cin} vs kernel {cin_w}")
    if stride < 1:
        raise ValueError("conv stride must be >= 1")
    if kh > h + 2 * padding or kw > wdt + 2 * padding:
        raise ValueError("conv kernel larger than padded input")
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (wdt + 2 * padding - kw) // stride + 1
    xp = _pad_nhwc(x.data, padding)
    cols = _im2col_nhwc(xp, kh, kw, stride, oh, ow)      # (B*L, KKC)
    wf = w.data.reshape(kh * kw * cin, cout)
    y = cols @ wf
    if b is not None:
        y = y + b.data
    out = Tensor(y.reshape(bsz, oh, ow, cout))

    def vjp(g):
        gf = g.reshape(bsz * oh * ow, cout)
        gw = (cols.T @ gf).reshape(w.shape) if w.requires_grad else None
        gx = None
        if x.requires_grad:
            gcols = (gf @ wf.T).reshape(bsz, oh, ow, kh, kw, cin)
            gxp = np.zeros_like(xp)
            for ki in range(kh):
                for kj in range(kw):
                    gxp[:, ki:ki + stride * oh:stride, kj:kj + stride * ow:stride, :] += gcols[:, :, :, ki, kj, :]
            gx = gxp[:, padding:padding + h, padding:padding + wdt, :] if padding else gxp
        gb = gf.sum(axis=0) if b is not None and b.requires_grad else None
        if b is not None:
            return gx, gw, gb
        return gx, gw

    parents = (x, w) if b is None else (x, w, b)
    return record(out, parents, vjp)


def conv2d(x, w, b=None, stride=1, padding=0):
    """2-D convolution, x:(B,C,H,W) w:(O,C,kh,kw) -> (B,O,H',W').

    Thin wrapper over the NHWC kernel, preserving the channel-first
    contract for callers and oracle tests.
    """
    x, w = as_tensor(x), as_tensor(w)
    xt = transpose(x, (0, 2, 3, 1))
    wt = transpose(w, (2, 3, 1, 0))
    y = conv2d_nhwc(xt, wt, b=b, stride=stride, padding=padding)
    return transpose(y, (0, 3, 1, 2))


def conv2d_transpose(x, w, b=None, stride=1, padding=0):
    """Transpose convolution, x:(B,C,H,W) w:(C,O,kh,kw).

    Output size H' = (H-1)*stride - 2*padding + kh (inverse of the
    conv2d shape rule). Used by the latent image decoder; kept in
    channel-first layout since its tensors are small.
    """
    x, w = as_tensor(x), as_tensor(w)
    if b is not None:
        b = as_tensor(b)
    bsz, cin, h, wdt = x.shape
    cin_w, cout, kh, kw = w.shape
    if cin != cin_w:
        raise ValueError(f"conv2d_transpose channel mismatch: input {cin} vs kernel {cin_w}")
    oh = (h - 1) * stride - 2 * padding + kh
    ow = (wdt - 1) * stride - 2 * padding + kw
    full_h = (h - 1) * stride + kh
    full_w = (wdt - 1) * stride + kw
    yp = np.zeros((bsz, cout, full_h, full_w), dtype=x.dtype)
    for ki in range(kh):
        for kj in range(kw):
            yp[:, :, ki:ki + stride * h:stride, kj:kj + stride * wdt:stride] += np.einsum(
                "bchw,co->bohw", x.data, w.data[:, :, ki, kj], optimize=True)
    y = yp[:, :, padding:padding + oh, padding:padding + ow]
    if b is not None:
        y = y + b.data.reshape(1, cout, 1, 1)
    out = Tensor(np.ascontiguousarray(y))

    def vjp(g):
        gp = np.zeros((bsz, cout, full_h, full_w), dtype=g.dtype)
        gp[:, :, padding:padding + oh, padding:padding + ow] = g
        gx = np.zeros_like(x.data)
        gw = np.zeros_like(w.data)
        for ki in range(kh):
            for kj in range(kw):
                patch = gp[:, :, ki:ki + stride * h:stride, kj:kj + stride * wdt:stride]
                gx += np.einsum("bohw,co->bchw", patch, w.data[:, :, ki, kj], optimize=True)
                gw[:, :, ki, kj] = np.einsum("bchw,bohw->co", x.data, patch, optimize=True)
        gb = g.sum(axis=(0, 2, 3)) if b is not None else None
        if b is not None:
            return gx, gw, gb
        return gx, gw

    parents = (x, w) if b is None else (x, w, b)
    return record(out, parents, vjp)
