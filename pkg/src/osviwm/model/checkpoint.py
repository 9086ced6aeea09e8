"""Checkpoint container: magic "OWMC", JSON header, named float32 tensors.

Per-tensor record: u16 name length + UTF-8 name, u8 ndim, u32 dims,
then raw little-endian float32 data. Round trips are bit-exact.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .config import ModelConfig
from .network import WorldModelPolicy

MAGIC = b"OWMC"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(path, model, train_config=None, extra=None):
    path = Path(path)
    header = {
        "model_config": model.config.to_dict(),
        "train_config": train_config,
        "extra": extra or {},
    }
    hjson = json.dumps(header, sort_keys=True).encode()
    named = model.named_parameters()
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HI", FORMAT_VERSION, len(hjson)))
        f.write(hjson)
        f.write(struct.pack("<I", len(named)))
        for name, tensor in named:
            nb = name.encode()
            arr = np.ascontiguousarray(tensor.data, dtype="<f4")
            f.write(struct.pack("<H", len(nb)))
            f.write(nb)
            f.write(struct.pack("<B", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.tobytes())
    tmp.replace(path)  # atomic on POSIX: partial writes never clobber


def read_checkpoint(path):
    """-> (header dict, {name: float32 array})."""
    raw = Path(path).read_bytes()
    if len(raw) < 10 or raw[:4] != MAGIC:
        raise CheckpointError(f"corrupt checkpoint {path}: bad magic")
    version, hlen = struct.unpack("<HI", raw[4:10])
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    off = 10
    try:
        header = json.loads(raw[off:off + hlen].decode())
        off += hlen
        (count,) = struct.unpack("<I", raw[off:off + 4])
        off += 4
        tensors = {}
        for _ in range(count):
            (nlen,) = struct.unpack("<H", raw[off:off + 2])
            off += 2
            name = raw[off:off + nlen].decode()
            off += nlen
            (ndim,) = struct.unpack("<B", raw[off:off + 1])
            off += 1
            shape = struct.unpack(f"<{ndim}I", raw[off:off + 4 * ndim])
            off += 4 * ndim
            n = int(np.prod(shape)) if ndim else 1
            arr = np.frombuffer(raw, dtype="<f4", count=n, offset=off).reshape(shape)
            off += 4 * n
            tensors[name] = arr.copy()
        if off != len(raw):
            raise CheckpointError(f"corrupt checkpoint {path}: trailing bytes")
    except (struct.error, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"corrupt checkpoint {path}: {e}") from e
    return header, tensors


def load_checkpoint(path, expect_config=None):
    """-> (model, train_config dict or None).

    ``expect_config`` guards against silently loading a checkpoint whose
    architecture differs from the caller's.
    """
    header, tensors = read_checkpoint(path)
    config = ModelConfig.from_dict(header["model_config"])
    if expect_config is not None and expect_config.to_dict() != config.to_dict():
        raise CheckpointError(
            "checkpoint config mismatch:\n"
            f"  checkpoint: {config.to_dict()}\n"
            f"  expected:   {expect_config.to_dict()}")
    model = WorldModelPolicy(config, seed=0)
    named = dict(model.named_parameters())
    if set(named) != set(tensors):
        missing = set(named) - set(tensors)
        extra = set(tensors) - set(named)
        raise CheckpointError(f"checkpoint parameter mismatch: missing={missing} extra={extra}")
    for name, arr in tensors.items():
        if named[name].data.shape != arr.shape:
            raise CheckpointError(f"shape mismatch for {name}: {named[name].data.shape} vs {arr.shape}")
        named[name].data = arr.astype(np.float32)
    return model, header.get("train_config")
