import numpy as np
import pytest

from rdnet.config import RadarConfig, toy_preset, paper_preset, validate


def make_config(n_tx=2, n_rx=1, b_r=32, b_d=16, b_a=16, b_e=2, delta=4,
                range_res=0.2, doppler_res=0.1, azimuth_fov=180.0,
                elevation_fov=12.0):
    """Small valid config for unit tests; delta picks the Tx Doppler shift."""
    d_max = b_d * doppler_res
    return validate(RadarConfig(
        n_tx=n_tx, n_rx=n_rx, b_r=b_r, b_d=b_d, b_a=b_a, b_e=b_e,
        range_res=range_res, doppler_res=doppler_res,
        max_range=b_r * range_res, d_max=d_max,
        doppler_shift=delta * d_max / b_d,
        azimuth_fov=azimuth_fov, elevation_fov=elevation_fov,
    ))


@pytest.fixture(scope="session")
def toy_cfg():
    return validate(toy_preset())


@pytest.fixture(scope="session")
def paper_cfg():
    return validate(paper_preset())


@pytest.fixture
def rng():
    return np.random.default_rng(0)
