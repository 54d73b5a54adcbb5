import numpy as np
import pytest

from rdnet.dsp import (RdTensor, aoa_correlate, aoa_estimate, build_ra_map,
                       cfar_detect, extract_point_cloud, group_replicas,
                       point_cloud_to_csv, range_doppler_transform, rd_power)
from rdnet.errors import (CellOutOfRange, InvalidConfig, ShapeMismatch,
                          WindowTooLarge)
from rdnet.simulate import (AdcFrame, PointTarget, Scene, calibration_matrix,
                            expected_rd_positions, synthesize_adc)

from conftest import make_config


def _frame(cfg, rng, sigma=0.0):
    data = rng.normal(size=(cfg.n_rx, cfg.b_d, cfg.b_r)) \
        + 1j * rng.normal(size=(cfg.n_rx, cfg.b_d, cfg.b_r))
    return AdcFrame(samples=data, config=cfg)


def test_output_shape_and_order(toy_cfg, rng):
    rd = range_doppler_transform(_frame(toy_cfg, rng))
    assert rd.data.shape == (toy_cfg.b_r, toy_cfg.b_d, toy_cfg.n_rx)


def test_parseval_rect(toy_cfg, rng):
    frame = _frame(toy_cfg, rng)
    rd = range_doppler_transform(frame, window="rect")
    e_in = np.sum(np.abs(frame.samples) ** 2)
    e_out = np.sum(np.abs(rd.data) ** 2)
    assert abs(e_out - e_in) < 1e-6 * e_in


def test_linearity(toy_cfg, rng):
    fa = _frame(toy_cfg, rng)
    fb = _frame(toy_cfg, rng)
    fsum = AdcFrame(samples=fa.samples + 2.0 * fb.samples, config=toy_cfg)
    ra = range_doppler_transform(fa).data
    rb = range_doppler_transform(fb).data
    rsum = range_doppler_transform(fsum).data
    assert np.allclose(rsum, ra + 2.0 * rb, rtol=1e-12, atol=1e-9)


def test_hann_window_applied(toy_cfg, rng):
    frame = _frame(toy_cfg, rng)
    rect = range_doppler_transform(frame, window="rect").data
    hann = range_doppler_transform(frame, window="hann").data
    assert not np.allclose(rect, hann)
    # hann removes energy (it is <= 1 everywhere)
    assert np.sum(np.abs(hann) ** 2) < np.sum(np.abs(rect) ** 2)


def test_unknown_window_rejected(toy_cfg, rng):
    with pytest.raises(InvalidConfig):
        range_doppler_transform(_frame(toy_cfg, rng), window="kaiser")


def test_wrong_shape_rejected(toy_cfg):
    bad = AdcFrame(samples=np.zeros((1, 4, 4), np.complex128), config=toy_cfg)
    with pytest.raises(ShapeMismatch):
        range_doppler_transform(bad)


def test_doppler_axis_centered(toy_cfg):
    # a stationary target must land in the shifted center column (plus comb)
    target = PointTarget(range=4.0, velocity=0.0, azimuth=0.0)
    rd = range_doppler_transform(synthesize_adc(Scene(targets=(target,)),
                                                toy_cfg))
    power = rd_power(rd)
    d_bins = {d for _, d in expected_rd_positions(target, toy_cfg)}
    hot = set(np.nonzero(power.sum(axis=0) > 1e-6 * power.max())[0])
    assert hot == d_bins


def test_rd_oracle_sweep(toy_cfg):
    """100 seeded single-target scenes: peaks land within one bin of the
    prediction (acceptance gate runs the same sweep)."""
    rng = np.random.default_rng(7)
    hits = 0
    for _ in range(100):
        target = PointTarget(
            range=float(rng.uniform(2.0, 0.9 * toy_cfg.max_range)),
            velocity=float(rng.uniform(-0.45, 0.45) * toy_cfg.d_max),
            azimuth=float(rng.uniform(-80.0, 80.0)))
        rd = range_doppler_transform(
            synthesize_adc(Scene(targets=(target,)), toy_cfg))
        power = rd_power(rd)
        r_pk, d_pk = np.unravel_index(int(np.argmax(power)), power.shape)
        cells = expected_rd_positions(target, toy_cfg)
        ok = any(abs(r_pk - r) <= 1
                 and min((d_pk - d) % toy_cfg.b_d,
                         (d - d_pk) % toy_cfg.b_d) <= 1
                 for r, d in cells)
        hits += ok
    assert hits >= 99


def test_aoa_estimate_recovers_angles(toy_cfg):
    target = PointTarget(range=8.0, velocity=0.2, azimuth=34.0, elevation=3.0)
    rd = range_doppler_transform(synthesize_adc(Scene(targets=(target,)),
                                                toy_cfg))
    calib = calibration_matrix(toy_cfg)
    base = expected_rd_positions(target, toy_cfg)[0]
    base_cell = (base[0], (base[1] - toy_cfg.dilation) % toy_cfg.b_d)
    pmap = aoa_correlate(rd, calib, [base_cell])[0]
    az, el = aoa_estimate(pmap, toy_cfg)
    assert abs(az - 34.0) <= toy_cfg.azimuth_fov / toy_cfg.b_a
    assert abs(el - 3.0) <= toy_cfg.elevation_fov / toy_cfg.b_e


def test_aoa_correlate_validates(toy_cfg, rng):
    rd = range_doppler_transform(_frame(toy_cfg, rng))
    calib = calibration_matrix(toy_cfg)
    with pytest.raises(CellOutOfRange):
        aoa_correlate(rd, calib, [(toy_cfg.b_r, 0)])
    with pytest.raises(CellOutOfRange):
        aoa_correlate(rd, calib, [(0, -1)])
    with pytest.raises(ShapeMismatch):
        aoa_correlate(rd, calib[:, :, :4], [(0, 0)])


def test_cfar_flags_isolated_peak():
    power = np.full((32, 32), 1.0)
    power[10, 12] = 100.0
    cells = cfar_detect(power, guard=1, train=3, scale=4.0)
    assert (10, 12) in cells


def test_cfar_constant_map_has_no_detections():
    power = np.full((32, 32), 5.0)
    assert cfar_detect(power, guard=1, train=3, scale=1.5) == []


def test_cfar_false_alarm_rate_tracks_noise_level(rng):
    # CFAR normalizes by the local mean, so scaling the map leaves the
    # detection set unchanged
    power = rng.exponential(size=(64, 64))
    a = cfar_detect(power, scale=6.0)
    b = cfar_detect(1000.0 * power, scale=6.0)
    assert a == b


def test_cfar_validation():
    power = np.ones((8, 8))
    with pytest.raises(WindowTooLarge):
        cfar_detect(power, guard=2, train=6)
    with pytest.raises(InvalidConfig):
        cfar_detect(np.ones((64, 64)), guard=6, train=2)
    with pytest.raises(InvalidConfig):
        cfar_detect(np.ones((64, 64)), scale=0.5)
    with pytest.raises(ShapeMismatch):
        cfar_detect(np.ones(64))


def test_cfar_doppler_wraps_but_range_does_not():
    # peak at the Doppler edge: its replicated neighborhood wraps, so a
    # second peak half a map away in Doppler must not suppress it
    power = np.full((32, 32), 1.0)
    power[5, 0] = 50.0
    power[5, 31] = 40.0   # inside the wrapped guard window of (5, 0)
    cells = cfar_detect(power, guard=1, train=3, scale=4.0)
    assert (5, 0) in cells and (5, 31) not in cells


def test_group_replicas_open_comb():
    cfg = make_config(n_tx=2, b_d=16, delta=4)
    # base bin 3 -> replicas at 7 and 11
    assert group_replicas([(5, 7), (5, 11)], cfg) == [(5, 3)]


def test_group_replicas_multiple_ranges():
    cfg = make_config(n_tx=2, b_d=16, delta=4)
    got = group_replicas([(5, 7), (5, 11), (9, 2), (9, 14)], cfg)
    assert sorted(got) == [(5, 3), (9, 10)]


def test_group_replicas_closed_ring_folds_to_smallest_velocity(toy_cfg):
    # toy preset: 4 Tx * dilation 16 == 64 == b_d, every bin is a run start.
    # velocity 0.3 -> base 35, replicas {51, 3, 19, 35}; the +-d_max/8
    # window makes 35 the unique smallest-|v| base.
    target = PointTarget(range=8.0, velocity=0.3, azimuth=0.0)
    cells = expected_rd_positions(target, toy_cfg)
    got = group_replicas(cells, toy_cfg)
    assert got == [(40, 35)]


def test_point_cloud_end_to_end(toy_cfg):
    targets = (PointTarget(range=8.0, velocity=0.3, azimuth=10.0, elevation=2.0),
               PointTarget(range=14.2, velocity=-0.5, azimuth=-25.0))
    rd = range_doppler_transform(synthesize_adc(Scene(targets=targets),
                                                toy_cfg))
    pts = extract_point_cloud(rd, calibration_matrix(toy_cfg), scale=30.0)
    assert len(pts) == 2
    pts = sorted(pts, key=lambda p: p.range_m)
    assert abs(pts[0].range_m - 8.0) <= toy_cfg.range_res
    assert abs(pts[0].doppler_mps - 0.3) <= toy_cfg.doppler_res
    assert abs(pts[0].azimuth_deg - 10.0) <= toy_cfg.azimuth_fov / toy_cfg.b_a
    assert abs(pts[1].range_m - 14.2) <= toy_cfg.range_res
    assert abs(pts[1].doppler_mps + 0.5) <= toy_cfg.doppler_res
    assert abs(pts[1].azimuth_deg + 25.0) <= toy_cfg.azimuth_fov / toy_cfg.b_a


def test_point_cloud_empty_scene(toy_cfg):
    rd = range_doppler_transform(synthesize_adc(Scene(), toy_cfg))
    assert extract_point_cloud(rd, calibration_matrix(toy_cfg)) == []


def test_pointcloud_oracle_sweep(toy_cfg):
    """Acceptance sweep shape: 100 noiseless single-target scenes, the
    extracted cloud contains the target within one bin on each axis."""
    rng = np.random.default_rng(11)
    calib = calibration_matrix(toy_cfg)
    v_half = toy_cfg.d_max / (2.0 * toy_cfg.n_tx)   # unambiguous window
    hits = 0
    for _ in range(100):
        target = PointTarget(
            range=float(rng.uniform(2.0, 0.9 * toy_cfg.max_range)),
            velocity=float(rng.uniform(-0.9, 0.9) * v_half),
            azimuth=float(rng.uniform(-80.0, 80.0)))
        rd = range_doppler_transform(
            synthesize_adc(Scene(targets=(target,)), toy_cfg))
        pts = extract_point_cloud(rd, calib, scale=8.0)
        az_bin = toy_cfg.azimuth_fov / toy_cfg.b_a
        ok = any(abs(p.range_m - target.range) <= toy_cfg.range_res
                 and abs(p.doppler_mps - target.velocity) <= toy_cfg.doppler_res
                 and abs(p.azimuth_deg - target.azimuth) <= az_bin
                 for p in pts)
        hits += ok
    assert hits >= 99


def test_ra_map_peaks_at_target(toy_cfg):
    target = PointTarget(range=10.0, velocity=0.0, azimuth=40.0)
    rd = range_doppler_transform(synthesize_adc(Scene(targets=(target,)),
                                                toy_cfg))
    ra = build_ra_map(rd, calibration_matrix(toy_cfg))
    assert ra.shape == (toy_cfg.b_r, toy_cfg.b_a)
    assert ra.dtype == np.float32
    r_pk, a_pk = np.unravel_index(int(np.argmax(ra)), ra.shape)
    assert r_pk == round(10.0 / toy_cfg.range_res)
    assert abs(toy_cfg.azimuth_bin_centers()[a_pk] - 40.0) \
        <= toy_cfg.azimuth_fov / toy_cfg.b_a


def test_ra_map_elevation_index_checked(toy_cfg, rng):
    rd = range_doppler_transform(_frame(toy_cfg, rng))
    with pytest.raises(CellOutOfRange):
        build_ra_map(rd, calibration_matrix(toy_cfg), elevation_index=99)


def test_point_cloud_csv(toy_cfg):
    from rdnet.dsp import RadarPoint
    pts = [RadarPoint(range_m=8.0, doppler_mps=0.3, azimuth_deg=10.5,
                      elevation_deg=-1.5, power=42.0)]
    text = point_cloud_to_csv(pts)
    lines = text.strip().split("\n")
    assert lines[0] == "range_m,doppler_mps,azimuth_deg,elevation_deg,power"
    assert lines[1] == "8,0.3,10.5,-1.5,42"
