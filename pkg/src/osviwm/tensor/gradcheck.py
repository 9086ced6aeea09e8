"""Finite-difference gradient checking with a float64 shadow path."""
from __future__ import annotations

import numpy as np

from .tensor import Tape, Tensor, backward


def numeric_grads(f, arrays, h=1e-3):
    """Central finite differences of scalar f(*arrays) w.r.t. each array (float64)."""
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]

    def value(args):
        out = f(*[Tensor(a, dtype=np.float64) for a in args])
        return float(out.data)

    grads = []
    for ai, a in enumerate(arrays):
        g = np.zeros_like(a)
        flat = a.reshape(-1)
        gflat = g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + h
            fp = value(arrays)
            flat[j] = orig - h
            fm = value(arrays)
            flat[j] = orig
            gflat[j] = (fp - fm) / (2.0 * h)
        grads.append(g)
    return grads


def analytic_grads(f, arrays):
    """Tape gradients of scalar f(*arrays) in float64."""
    tensors = [Tensor(np.asarray(a, dtype=np.float64), requires_grad=True) for a in arrays]
    with Tape():
        loss = f(*tensors)
        backward(loss)
    return [t.grad if t.grad is not None else np.zeros_like(t.data) for t in tensors]


def max_relative_error(analytic, numeric):
    err = 0.0
    for a, n in zip(analytic, numeric):
        scale = max(np.max(np.abs(n)) if n.size else 0.0, 1e-8)
        err = max(err, float(np.max(np.abs(a - n))) / scale)
    return err


def gradcheck(f, arrays, h=1e-3, rtol=1e-3):
    """True iff analytic gradients match central differences within rtol."""
    ana = analytic_grads(f, arrays)
    num = numeric_grads(f, arrays, h=h)
    return max_relative_error(ana, num) <= rtol
