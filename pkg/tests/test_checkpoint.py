import struct

import pytest
import torch

from allclear.checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    load_checkpoint,
    load_into,
    load_model,
    model_tensors,
    restore_optimizer,
    save_checkpoint,
)
from allclear.errors import (
    CheckpointCorruptError,
    CheckpointMissingTensorError,
    CheckpointVersionError,
    ConfigMismatchError,
)
from allclear.network import NetConfig, build_model


@pytest.fixture
def toy_model():
    torch.manual_seed(0)
    return build_model(NetConfig(base_channels=4))


def test_save_load_round_trip_bit_exact(toy_model, tmp_path):
    path = str(tmp_path / "toy.ckpt")
    save_checkpoint(path, toy_model, step=17, seed=99)
    ckpt = load_checkpoint(path)
    assert ckpt.version == FORMAT_VERSION
    assert ckpt.step == 17 and ckpt.seed == 99
    assert ckpt.config == toy_model.config
    state = toy_model.state_dict()
    assert set(ckpt.tensors) == set(state)
    for name, tensor in state.items():
        assert torch.equal(ckpt.tensors[name], tensor), name


def test_load_then_save_reproduces_tensor_payload(toy_model, tmp_path):
    first = str(tmp_path / "a.ckpt")
    save_checkpoint(first, toy_model, step=1, seed=2)
    model, ckpt = load_model(first)
    second = str(tmp_path / "b.ckpt")
    save_checkpoint(second, model, step=1, seed=2)

    def tensor_payload(path):
        with open(path, "rb") as f:
            data = f.read()
        offset = len(MAGIC)
        (n,) = struct.unpack_from("<H", data, offset)
        offset += 2 + n
        for fmt in ("<I", "<I"):  # config json, meta json (meta holds wall-time)
            (n,) = struct.unpack_from(fmt, data, offset)
            offset += 4 + n
        return data[offset:]

    assert tensor_payload(first) == tensor_payload(second)


def test_truncated_file_is_corrupt(toy_model, tmp_path):
    path = str(tmp_path / "toy.ckpt")
    save_checkpoint(path, toy_model)
    with open(path, "rb") as f:
        data = f.read()
    with open(path, "wb") as f:
        f.write(data[: len(data) // 2])
    with pytest.raises(CheckpointCorruptError, match="truncated"):
        load_checkpoint(path)


def test_wrong_magic_is_corrupt(tmp_path):
    path = str(tmp_path / "bogus.ckpt")
    with open(path, "wb") as f:
        f.write(b"NOPE" + b"\x00" * 64)
    with pytest.raises(CheckpointCorruptError, match="not a checkpoint"):
        load_checkpoint(path)


def test_trailing_bytes_are_corrupt(toy_model, tmp_path):
    path = str(tmp_path / "toy.ckpt")
    save_checkpoint(path, toy_model)
    with open(path, "ab") as f:
        f.write(b"\x00")
    with pytest.raises(CheckpointCorruptError, match="trailing"):
        load_checkpoint(path)


def test_missing_file_is_corrupt(tmp_path):
    with pytest.raises(CheckpointCorruptError, match="not found"):
        load_checkpoint(str(tmp_path / "absent.ckpt"))


def test_version_mismatch_is_distinct(toy_model, tmp_path):
    path = str(tmp_path / "toy.ckpt")
    save_checkpoint(path, toy_model)
    with open(path, "rb") as f:
        data = bytearray(f.read())
    # version string sits right after the magic: u16 length + bytes
    (n,) = struct.unpack_from("<H", data, 4)
    assert data[6:6 + n].decode() == FORMAT_VERSION
    data[6:6 + n] = b"9" * n
    with open(path, "wb") as f:
        f.write(bytes(data))
    with pytest.raises(CheckpointVersionError):
        load_checkpoint(path)


def test_config_mismatch_raises(toy_model, tmp_path):
    path = str(tmp_path / "toy.ckpt")
    save_checkpoint(path, toy_model)
    other = build_model(NetConfig(base_channels=8))
    with pytest.raises(ConfigMismatchError):
        load_into(other, load_checkpoint(path))


def test_missing_tensor_raises(toy_model, tmp_path):
    path = str(tmp_path / "toy.ckpt")
    save_checkpoint(path, toy_model)
    ckpt = load_checkpoint(path)
    dropped = next(iter(ckpt.tensors))
    del ckpt.tensors[dropped]
    fresh = build_model(toy_model.config)
    with pytest.raises(CheckpointMissingTensorError, match="lacks"):
        load_into(fresh, ckpt)


def test_optimizer_state_round_trips(toy_model, tmp_path):
    opt = torch.optim.Adam(toy_model.parameters(), lr=1e-3)
    img = torch.rand(1, 3, 16, 16)
    loss = (toy_model(img) - img).abs().mean()
    opt.zero_grad()
    loss.backward()
    opt.step()

    path = str(tmp_path / "opt.ckpt")
    save_checkpoint(path, toy_model, step=1, optimizer=opt)
    ckpt = load_checkpoint(path)
    assert any(k.startswith("opt.") for k in ckpt.tensors)

    model2 = build_model(toy_model.config)
    load_into(model2, ckpt)
    opt2 = torch.optim.Adam(model2.parameters(), lr=1e-3)
    restore_optimizer(opt2, model2, ckpt)
    old_state = {n: opt.state[p] for n, p in toy_model.named_parameters()}
    new_state = {n: opt2.state[p] for n, p in model2.named_parameters()}
    assert set(old_state) == set(new_state)
    for name in old_state:
        for key in ("step", "exp_avg", "exp_avg_sq"):
            assert torch.equal(
                torch.as_tensor(old_state[name][key]), torch.as_tensor(new_state[name][key])
            ), (name, key)


def test_model_tensors_excludes_optimizer_entries(toy_model, tmp_path):
    opt = torch.optim.Adam(toy_model.parameters())
    img = torch.rand(1, 3, 16, 16)
    (toy_model(img).mean()).backward()
    opt.step()
    path = str(tmp_path / "both.ckpt")
    save_checkpoint(path, toy_model, optimizer=opt)
    ckpt = load_checkpoint(path)
    assert set(model_tensors(ckpt)) == set(toy_model.state_dict())
