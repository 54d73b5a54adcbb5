import numpy as np
import pytest

from rdnet.data import (load_dataset, nn_input, random_scenes,
                        training_arrays, write_dataset)
from rdnet.errors import FormatError
from rdnet.simulate import synthesize_adc

from conftest import make_config


def test_random_scenes_respect_bands():
    cfg = make_config(b_r=128, b_a=64)
    scenes = random_scenes(40, cfg, seed=3, max_targets=2,
                           range_band=(3.0, 14.0), azimuth_band=55.0)
    assert len(scenes) == 40
    counts = set()
    for s in scenes:
        counts.add(len(s.targets))
        for t in s.targets:
            assert 3.0 <= t.range <= 14.0
            assert abs(t.azimuth) <= 55.0
            assert abs(t.velocity) < cfg.d_max / (2 * cfg.n_tx)
    assert counts == {1, 2}


def test_random_scenes_are_reproducible():
    cfg = make_config()
    a = random_scenes(10, cfg, seed=9)
    b = random_scenes(10, cfg, seed=9)
    assert a == b
    assert a != random_scenes(10, cfg, seed=10)


def test_nn_input_shape_and_scale():
    cfg = make_config()
    scenes = random_scenes(1, cfg, seed=0, max_targets=1,
                           range_band=(1.0, 5.0))
    frame = synthesize_adc(scenes[0], cfg)
    x = nn_input(frame)
    assert x.shape == (2 * cfg.n_rx, cfg.b_r, cfg.b_d)
    assert x.dtype == np.float32
    # unitary transforms + 1/sqrt(b_r*b_d) keep peaks order-one
    assert 0.05 < np.abs(x).max() < 50.0


def test_training_arrays_shapes():
    cfg = make_config()
    scenes = random_scenes(3, cfg, seed=1, max_targets=2,
                           range_band=(1.0, 5.0))
    x, clas, reg, seg = training_arrays(scenes, cfg)
    assert x.shape == (3, 2 * cfg.n_rx, cfg.b_r, cfg.b_d)
    assert clas.shape == (3, cfg.b_r // 4, cfg.b_a // 8)
    assert reg.shape == (3, 2, cfg.b_r // 4, cfg.b_a // 8)
    assert seg.shape == (3, cfg.b_r // 2, cfg.b_a // 4)
    for arr in (x, clas, reg, seg):
        assert arr.dtype == np.float32


def test_dataset_directory_roundtrip(tmp_path):
    cfg = make_config()
    scenes = random_scenes(4, cfg, seed=2, max_targets=2,
                           range_band=(1.0, 5.0))
    write_dataset(tmp_path / "ds", scenes, cfg)
    loaded_cfg, pairs = load_dataset(tmp_path / "ds")
    assert loaded_cfg == cfg
    assert len(pairs) == 4
    for (frame, scene), src in zip(pairs, scenes):
        want = synthesize_adc(src, cfg).samples.astype(np.complex64)
        assert np.array_equal(frame.samples, want.astype(np.complex128))
        assert scene == src


def test_load_dataset_rejects_empty_directory(tmp_path):
    from rdnet.config import config_to_json
    cfg = make_config()
    (tmp_path / "ds").mkdir()
    (tmp_path / "ds" / "config.json").write_text(config_to_json(cfg))
    with pytest.raises(FormatError):
        load_dataset(tmp_path / "ds")


def test_load_dataset_rejects_wrong_shape(tmp_path):
    from rdnet.config import config_to_json
    from rdnet.tensorfile import write_tensor
    cfg = make_config()
    d = tmp_path / "ds"
    d.mkdir()
    (d / "config.json").write_text(config_to_json(cfg))
    write_tensor(d / "00000.rdt", np.zeros((2, 3), dtype=np.complex64))
    with pytest.raises(FormatError):
        load_dataset(d)
