"""Checkpoint container with a documented binary layout.

File layout, all integers little-endian:

    magic          4 bytes, b"AWCK"
    version        u16 length + UTF-8 string
    config JSON    u32 length + UTF-8 (NetConfig)
    meta JSON      u32 length + UTF-8 (step, seed, wall_time)
    tensor count   u32
    per tensor:    u16 name length + name UTF-8
                   u8 dtype tag (0 = float32, 1 = float64, 2 = int64)
                   u8 ndim, then ndim * u64 dims
                   raw little-endian array bytes

Optimizer state travels under an ``opt.`` name prefix so resumed training
continues with the same Adam moments.
"""

import json
import os
import struct
import time
from dataclasses import dataclass, field

import numpy as np
import torch

from .errors import (
    CheckpointCorruptError,
    CheckpointMissingTensorError,
    CheckpointVersionError,
    ConfigMismatchError,
)
from .network import NetConfig, build_model

MAGIC = b"AWCK"
FORMAT_VERSION = "1"

_DTYPE_TAGS = {np.dtype("<f4"): 0, np.dtype("<f8"): 1, np.dtype("<i8"): 2}
_TAG_DTYPES = {tag: dt for dt, tag in _DTYPE_TAGS.items()}
_OPT_PREFIX = "opt."
_ADAM_KEYS = ("step", "exp_avg", "exp_avg_sq")


@dataclass
class Checkpoint:
    version: str
    config: NetConfig
    step: int
    seed: int
    wall_time: float
    tensors: dict = field(default_factory=dict)


def _write_block(out, payload, fmt):
    out.write(struct.pack(fmt, len(payload)))
    out.write(payload)


def _tensor_bytes(name, tensor):
    array = tensor.detach().cpu().numpy()
    if array.ndim:  # ascontiguousarray would promote 0-dim arrays to 1-dim
        array = np.ascontiguousarray(array)
    dtype = array.dtype.newbyteorder("<")
    if dtype not in _DTYPE_TAGS:
        raise ValueError(f"tensor {name!r} has unsupported dtype {array.dtype}")
    name_bytes = name.encode("utf-8")
    head = struct.pack("<H", len(name_bytes)) + name_bytes
    head += struct.pack("<BB", _DTYPE_TAGS[dtype], array.ndim)
    head += struct.pack(f"<{array.ndim}Q", *array.shape)
    return head + array.astype(dtype, copy=False).tobytes()


def _optimizer_tensors(model, optimizer):
    named = {id(p): n for n, p in model.named_parameters()}
    out = {}
    for param, state in optimizer.state.items():
        name = named.get(id(param))
        if name is None:
            continue
        for key in _ADAM_KEYS:
            if key in state:
                value = state[key]
                if not torch.is_tensor(value):
                    value = torch.tensor(float(value))
                out[f"{_OPT_PREFIX}{name}.{key}"] = value
    return out


def save_checkpoint(path, model, *, step=0, seed=0, optimizer=None):
    """Write model (and optionally Adam) tensors plus config and metadata."""
    tensors = dict(model.state_dict())
    if optimizer is not None:
        tensors.update(_optimizer_tensors(model, optimizer))
    meta = {"step": int(step), "seed": int(seed), "wall_time": time.time()}

    tmp = f"{path}.tmp"
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(tmp, "wb") as out:
        out.write(MAGIC)
        _write_block(out, FORMAT_VERSION.encode("utf-8"), "<H")
        _write_block(out, model.config.to_json().encode("utf-8"), "<I")
        _write_block(out, json.dumps(meta, sort_keys=True).encode("utf-8"), "<I")
        out.write(struct.pack("<I", len(tensors)))
        for name, tensor in tensors.items():
            out.write(_tensor_bytes(name, tensor))
    os.replace(tmp, path)
    return path


class _Reader:
    def __init__(self, handle):
        self.handle = handle

    def exactly(self, n):
        data = self.handle.read(n)
        if len(data) != n:
            raise CheckpointCorruptError(
                f"checkpoint truncated: wanted {n} bytes, got {len(data)}"
            )
        return data

    def unpack(self, fmt):
        return struct.unpack(fmt, self.exactly(struct.calcsize(fmt)))

    def block(self, fmt):
        (length,) = self.unpack(fmt)
        return self.exactly(length)


def load_checkpoint(path):
    """Read a checkpoint file back into a :class:`Checkpoint`."""
    if not os.path.exists(path):
        raise CheckpointCorruptError(f"checkpoint not found: {path}")
    with open(path, "rb") as handle:
        reader = _Reader(handle)
        if reader.exactly(4) != MAGIC:
            raise CheckpointCorruptError(f"not a checkpoint file: {path}")
        version = reader.block("<H").decode("utf-8")
        if version != FORMAT_VERSION:
            raise CheckpointVersionError(
                f"unsupported checkpoint version {version!r} (expected {FORMAT_VERSION!r})"
            )
        try:
            config = NetConfig.from_json(reader.block("<I").decode("utf-8"))
            meta = json.loads(reader.block("<I").decode("utf-8"))
        except CheckpointCorruptError:
            raise
        except Exception as exc:
            raise CheckpointCorruptError(f"bad checkpoint header: {exc}") from exc
        (count,) = reader.unpack("<I")
        tensors = {}
        for _ in range(count):
            (name_len,) = reader.unpack("<H")
            name = reader.exactly(name_len).decode("utf-8")
            tag, ndim = reader.unpack("<BB")
            if tag not in _TAG_DTYPES:
                raise CheckpointCorruptError(f"unknown dtype tag {tag} for {name!r}")
            shape = reader.unpack(f"<{ndim}Q") if ndim else ()
            dtype = _TAG_DTYPES[tag]
            n_bytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize if shape else dtype.itemsize
            raw = reader.exactly(n_bytes)
            array = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
            tensors[name] = torch.from_numpy(array)
        if handle.read(1):
            raise CheckpointCorruptError("trailing bytes after tensor payload")
    return Checkpoint(
        version=version,
        config=config,
        step=int(meta["step"]),
        seed=int(meta["seed"]),
        wall_time=float(meta["wall_time"]),
        tensors=tensors,
    )


def model_tensors(checkpoint):
    return {k: v for k, v in checkpoint.tensors.items() if not k.startswith(_OPT_PREFIX)}


def load_model(path):
    """Build the stored architecture and load its weights.

    Returns ``(model, checkpoint)``. Raises CheckpointMissingTensorError if
    the payload lacks tensors the architecture requires.
    """
    ckpt = load_checkpoint(path)
    model = build_model(ckpt.config)
    load_into(model, ckpt)
    return model, ckpt


def load_into(model, checkpoint):
    """Load checkpoint weights into an existing model of the same config."""
    if model.config != checkpoint.config:
        raise ConfigMismatchError(
            "checkpoint config does not match the model: "
            f"{checkpoint.config.to_json()} vs {model.config.to_json()}"
        )
    weights = model_tensors(checkpoint)
    missing = sorted(set(model.state_dict()) - set(weights))
    if missing:
        raise CheckpointMissingTensorError(f"checkpoint lacks tensors: {missing}")
    model.load_state_dict(weights)


def restore_optimizer(optimizer, model, checkpoint):
    """Rebuild Adam per-parameter state from the ``opt.`` tensors, if present."""
    params = dict(model.named_parameters())
    for name, param in params.items():
        state = {}
        for key in _ADAM_KEYS:
            tensor = checkpoint.tensors.get(f"{_OPT_PREFIX}{name}.{key}")
            if tensor is not None:
                state[key] = tensor.clone()
        if state:
            optimizer.state[param] = state
