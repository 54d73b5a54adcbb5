import json
import os

import numpy as np
import pytest

from rdnet.checkpoint import load_checkpoint, save_checkpoint
from rdnet.errors import FormatError
from rdnet.nn.model import build_fftradnet

from conftest import make_config
from test_nn_model import MICRO, random_input


def test_checkpoint_roundtrip_is_forward_exact(tmp_path):
    cfg = make_config()
    model = build_fftradnet(MICRO, cfg, rng=np.random.default_rng(4))
    # move the normalization stats off their init values first
    x = random_input(cfg, n=3)
    model.forward(x, train=True)

    save_checkpoint(tmp_path / "ckpt", model)
    loaded = load_checkpoint(tmp_path / "ckpt")

    a = model.forward(x, train=False)
    b = loaded.forward(x, train=False)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


def test_checkpoint_preserves_values_bitwise(tmp_path):
    cfg = make_config()
    model = build_fftradnet(MICRO, cfg, rng=np.random.default_rng(4))
    save_checkpoint(tmp_path / "ckpt", model)
    loaded = load_checkpoint(tmp_path / "ckpt")
    src, dst = model.state(), loaded.state()
    assert set(src) == set(dst)
    for name in src:
        assert np.array_equal(src[name], dst[name]), name


def test_checkpoint_layout(tmp_path):
    cfg = make_config()
    model = build_fftradnet(MICRO, cfg, rng=np.random.default_rng(0))
    save_checkpoint(tmp_path / "ckpt", model)
    files = sorted(os.listdir(tmp_path / "ckpt"))
    assert files == ["config.json", "manifest.json", "spec.json",
                     "weights.rdt"]
    manifest = json.loads((tmp_path / "ckpt" / "manifest.json").read_text())
    assert set(manifest) == set(model.state())
    for entry in manifest.values():
        assert set(entry) == {"shape", "dtype", "offset"}


def test_corrupt_manifest_offset_raises(tmp_path):
    cfg = make_config()
    model = build_fftradnet(MICRO, cfg, rng=np.random.default_rng(0))
    save_checkpoint(tmp_path / "ckpt", model)
    path = tmp_path / "ckpt" / "manifest.json"
    manifest = json.loads(path.read_text())
    first = next(iter(manifest))
    manifest[first]["offset"] = 10 ** 9
    path.write_text(json.dumps(manifest))
    with pytest.raises(FormatError):
        load_checkpoint(tmp_path / "ckpt")


def test_misaligned_offset_raises(tmp_path):
    cfg = make_config()
    model = build_fftradnet(MICRO, cfg, rng=np.random.default_rng(0))
    save_checkpoint(tmp_path / "ckpt", model)
    path = tmp_path / "ckpt" / "manifest.json"
    manifest = json.loads(path.read_text())
    first = next(iter(manifest))
    manifest[first]["offset"] += 1      # no longer on a record boundary
    path.write_text(json.dumps(manifest))
    with pytest.raises(FormatError):
        load_checkpoint(tmp_path / "ckpt")
