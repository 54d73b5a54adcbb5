import numpy as np
import pytest

from rdnet.data import random_scenes, training_arrays
from rdnet.errors import InvalidConfig, NumericalFailure
from rdnet.nn.layers import Parameter
from rdnet.nn.model import ModelSpec, build_fftradnet
from rdnet.nn.optim import Adam, scheduled_lr
from rdnet.nn.train import (TrainConfig, fit, log_to_csv, train_config_from_json,
                            train_config_to_json, train_epoch)

from conftest import make_config
from test_nn_model import MICRO


def micro_setup(n_frames=4, seed=5):
    cfg = make_config(b_r=16, b_d=16, b_a=16)
    scenes = random_scenes(n_frames, cfg, seed=seed, max_targets=1,
                           range_band=(0.5, 2.8), azimuth_band=50.0)
    dataset = training_arrays(scenes, cfg)
    model = build_fftradnet(MICRO, cfg, rng=np.random.default_rng(0))
    return cfg, model, dataset


# -- optimizer ----------------------------------------------------------------

def test_adam_two_steps_hand_computed():
    p = Parameter("p", np.array([1.0]))
    opt = Adam([p], lr=0.1)
    for want in (0.9, 0.8):
        p.grad[...] = 0.5
        opt.step()
        # bias correction makes mhat/sqrt(vhat) = g/|g| for constant g
        assert p.value[0] == pytest.approx(want, abs=1e-7)


def test_adam_zero_grad_clears_all():
    p = Parameter("p", np.ones(3))
    p.grad[...] = 2.0
    opt = Adam([p], lr=0.1)
    opt.zero_grad()
    assert np.all(p.grad == 0.0)


def test_scheduled_lr_steps_down():
    assert scheduled_lr(1e-3, 0) == 1e-3
    assert scheduled_lr(1e-3, 9) == 1e-3
    assert scheduled_lr(1e-3, 10) == pytest.approx(9e-4)
    assert scheduled_lr(1e-3, 25, decay=0.5, every=10) == pytest.approx(2.5e-4)


# -- config serialization -----------------------------------------------------

def test_train_config_json_roundtrip():
    tc = TrainConfig(lam=2.0, beta=50.0, gamma=1.5, alpha=0.9, lr=3e-4,
                     decay=0.8, decay_every=5, epochs=12, batch_size=4, seed=7)
    assert train_config_from_json(train_config_to_json(tc)) == tc


def test_train_config_json_uses_lambda_key():
    text = train_config_to_json(TrainConfig())
    assert '"lambda"' in text and '"lam"' not in text


def test_train_config_rejects_bad_json():
    with pytest.raises(InvalidConfig):
        train_config_from_json("[]")
    with pytest.raises(InvalidConfig):
        train_config_from_json('{"nonsense": 1}')
    with pytest.raises(InvalidConfig):
        train_config_from_json('{"epochs": 0}')


# -- training loop ------------------------------------------------------------

def test_single_batch_overfit_drives_loss_down():
    cfg, model, dataset = micro_setup(n_frames=2)
    tc = TrainConfig(lam=1.0, beta=10.0, gamma=2.0, alpha=0.9, lr=1e-2,
                     epochs=160, batch_size=2, seed=0)
    pre_w0 = model.pre_atrous.w.value.copy()
    history = fit(model, dataset, tc)
    assert len(history) == 160
    assert history[-1]["l_mtl"] < 0.15 * history[0]["l_mtl"]
    # the de-interleaving front end is trained, not frozen
    assert not np.array_equal(pre_w0, model.pre_atrous.w.value)


def test_training_is_deterministic():
    def run():
        _, model, dataset = micro_setup()
        tc = TrainConfig(lam=1.0, beta=10.0, gamma=2.0, alpha=0.9,
                         lr=1e-3, epochs=2, batch_size=2, seed=3)
        return fit(model, dataset, tc)

    h1, h2 = run(), run()
    assert h1 == h2


def test_train_epoch_logs_one_row_per_step():
    cfg, model, dataset = micro_setup(n_frames=5)
    tc = TrainConfig(epochs=1, batch_size=2, seed=0)
    rows = []
    opt = Adam(model.parameters(), lr=tc.lr)
    summary = train_epoch(model, dataset, tc, opt, 0, np.random.default_rng(0),
                          log_rows=rows)
    assert len(rows) == 3          # ceil(5 / 2)
    assert set(summary) == {"l_det", "l_free", "l_mtl"}
    csv = log_to_csv(rows)
    assert csv.startswith("epoch,step,l_det,l_free,l_mtl,lr")
    assert len(csv.strip().split("\n")) == 4


def test_non_finite_loss_raises_numerical_failure():
    cfg, model, dataset = micro_setup()
    model.det_reg.w.value[...] = np.nan
    tc = TrainConfig(epochs=1, batch_size=4, seed=0)
    opt = Adam(model.parameters(), lr=tc.lr)
    with pytest.raises(NumericalFailure):
        train_epoch(model, dataset, tc, opt, 0, np.random.default_rng(0))


def test_fit_invokes_progress_each_epoch():
    cfg, model, dataset = micro_setup(n_frames=2)
    tc = TrainConfig(epochs=3, batch_size=2, seed=0)
    seen = []
    fit(model, dataset, tc, progress=lambda e, s: seen.append(e))
    assert seen == [0, 1, 2]


def test_train_config_check_rejects_nonpositive():
    with pytest.raises(InvalidConfig):
        TrainConfig(lr=0.0).check()
    with pytest.raises(InvalidConfig):
        TrainConfig(batch_size=-1).check()
