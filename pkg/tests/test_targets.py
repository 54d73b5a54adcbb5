import numpy as np
import pytest

from rdnet.errors import OutOfFieldOfView
from rdnet.nn.targets import (FREE_SPACE_RADIUS_FRACTION, detection_grid,
                              encode_ground_truth, free_space_mask,
                              seg_grid_centers)
from rdnet.simulate import PointTarget, Scene

from conftest import make_config


def one_target_scene(range_m, azimuth_deg, velocity=0.0):
    return Scene(targets=(PointTarget(range=range_m, velocity=velocity,
                                      azimuth=azimuth_deg),))


def test_detection_grid_toy(toy_cfg):
    rows, cols, cell_r, cell_a = detection_grid(toy_cfg)
    assert (rows, cols) == (32, 16)
    assert cell_r == pytest.approx(4 * toy_cfg.range_res)
    assert cell_a == pytest.approx(8 * toy_cfg.azimuth_fov / toy_cfg.b_a)


def test_encode_shapes_and_single_positive():
    cfg = make_config(b_a=64)
    gt = encode_ground_truth(one_target_scene(3.0, 10.0), cfg)
    rows, cols, _, _ = detection_grid(cfg)
    assert gt.clas.shape == (rows, cols)
    assert gt.reg.shape == (2, rows, cols)
    assert gt.seg.shape == (cfg.b_r // 2, cfg.b_a // 4)
    assert gt.clas.sum() == 1.0


def test_encode_cell_and_offsets_hand_computed():
    cfg = make_config(b_a=64)        # cell_r = 0.8 m, cell_a = 22.5 deg
    rows, cols, cell_r, cell_a = detection_grid(cfg)
    t_range, t_az = 2.1, 40.0
    gt = encode_ground_truth(one_target_scene(t_range, t_az), cfg)
    ri, ai = np.argwhere(gt.clas == 1.0)[0]
    assert ri == int(t_range // cell_r)
    assert ai == int((t_az + cfg.azimuth_fov / 2) // cell_a)
    want_r_off = (t_range - (ri + 0.5) * cell_r) / cell_r
    want_a_off = (t_az - (-cfg.azimuth_fov / 2 + (ai + 0.5) * cell_a)) / cell_a
    assert gt.reg[0, ri, ai] == pytest.approx(want_r_off)
    assert gt.reg[1, ri, ai] == pytest.approx(want_a_off)
    assert abs(want_r_off) <= 0.5 and abs(want_a_off) <= 0.5


def test_encode_roundtrips_through_decode():
    from rdnet.metrics import decode
    cfg = make_config(b_a=64)
    scene = Scene(targets=(
        PointTarget(range=2.3, velocity=0.0, azimuth=-31.0),
        PointTarget(range=5.1, velocity=0.0, azimuth=55.0),
    ))
    gt = encode_ground_truth(scene, cfg)
    dets = decode(gt.clas, gt.reg, cfg, threshold=0.5)
    got = sorted((d.range_m, d.azimuth_deg) for d in dets)
    want = sorted((t.range, t.azimuth) for t in scene.targets)
    for (gr, ga), (wr, wa) in zip(got, want):
        assert gr == pytest.approx(wr, abs=1e-5)
        assert ga == pytest.approx(wa, abs=1e-4)


def test_encode_clips_fov_edges():
    cfg = make_config(b_a=64)
    rows, cols, _, _ = detection_grid(cfg)
    gt = encode_ground_truth(one_target_scene(6.3, cfg.azimuth_fov / 2), cfg)
    ri, ai = np.argwhere(gt.clas == 1.0)[0]
    assert (ri, ai) == (rows - 1, cols - 1)


def test_encode_rejects_out_of_field():
    cfg = make_config()
    with pytest.raises(OutOfFieldOfView):
        encode_ground_truth(one_target_scene(cfg.max_range + 1.0, 0.0), cfg)
    with pytest.raises(OutOfFieldOfView):
        encode_ground_truth(one_target_scene(3.0, cfg.azimuth_fov), cfg)


def test_free_space_empty_scene_is_a_disk():
    cfg = make_config()
    mask = free_space_mask(Scene(), cfg)
    ranges, _ = seg_grid_centers(cfg)
    cutoff = FREE_SPACE_RADIUS_FRACTION * cfg.max_range
    want = (ranges < cutoff).astype(np.float32)[:, None]
    assert np.array_equal(mask, np.broadcast_to(want, mask.shape))


def test_free_space_target_blocks_its_footprint():
    cfg = make_config(b_a=64)
    t_range, t_az = 3.0, 0.0
    mask = free_space_mask(one_target_scene(t_range, t_az), cfg)
    ranges, azimuths = seg_grid_centers(cfg)
    half_az = np.degrees(np.arctan2(0.9, t_range))
    blocked = (np.abs(ranges - t_range)[:, None] < 2.0) \
        & (np.abs(azimuths - t_az)[None, :] < half_az)
    assert not mask[blocked].any()
    empty = free_space_mask(Scene(), cfg)
    assert np.array_equal(mask[~blocked], empty[~blocked])


def test_free_space_footprint_narrows_with_range():
    cfg = make_config(b_r=128, b_a=128)    # 25.6 m deep, 64x32 seg grid
    near = free_space_mask(one_target_scene(4.0, 0.0), cfg)
    far = free_space_mask(one_target_scene(16.0, 0.0), cfg)
    empty = free_space_mask(Scene(), cfg)
    assert (empty - near).sum() > (empty - far).sum()


def test_seg_grid_centers_cover_central_half_fov():
    cfg = make_config(b_a=64)
    ranges, azimuths = seg_grid_centers(cfg)
    assert ranges.shape == (cfg.b_r // 2,)
    assert azimuths.shape == (cfg.b_a // 4,)
    quarter = cfg.azimuth_fov / 4
    assert azimuths[0] == pytest.approx(-quarter + (quarter * 2) / azimuths.size / 2)
    assert azimuths[-1] < quarter
    assert np.all(np.diff(azimuths) > 0)
    assert ranges[-1] == pytest.approx(cfg.max_range - (ranges[1] - ranges[0]) / 2)


def test_encode_azimuth_neighbors_labels_and_offsets():
    cfg = make_config(b_a=64)        # cell_r = 0.8 m, cell_a = 22.5 deg
    gt = encode_ground_truth(one_target_scene(2.1, 40.0), cfg,
                             azimuth_neighbors=0.6)
    ri, ai = map(int, np.argwhere(gt.clas == 1.0)[0])
    assert gt.clas[ri, ai - 1] == np.float32(0.6)
    assert gt.clas[ri, ai + 1] == np.float32(0.6)
    assert gt.clas.sum() == pytest.approx(1.0 + 2 * 0.6)
    # range offset copies, azimuth offset shifts by exactly one cell
    assert gt.reg[0, ri, ai - 1] == gt.reg[0, ri, ai]
    assert gt.reg[0, ri, ai + 1] == gt.reg[0, ri, ai]
    assert gt.reg[1, ri, ai - 1] == pytest.approx(gt.reg[1, ri, ai] + 1.0)
    assert gt.reg[1, ri, ai + 1] == pytest.approx(gt.reg[1, ri, ai] - 1.0)
    # a decoded flank lands on the true azimuth
    _, _, _, cell_a = detection_grid(cfg)
    center = -cfg.azimuth_fov / 2.0 + (ai + 1 + 0.5) * cell_a
    assert center + gt.reg[1, ri, ai + 1] * cell_a == pytest.approx(40.0)


def test_encode_azimuth_neighbors_default_off():
    cfg = make_config(b_a=64)
    gt = encode_ground_truth(one_target_scene(2.1, 40.0), cfg)
    assert gt.clas.sum() == 1.0
    assert np.count_nonzero(gt.reg) <= 2


def test_encode_azimuth_neighbor_collision_is_wiped():
    cfg = make_config(b_a=64)        # 2 azimuth cells of 22.5 deg
    rows, cols, cell_r, cell_a = detection_grid(cfg)
    # two targets two azimuth cells apart: the middle cell is claimed twice
    az0 = -cfg.azimuth_fov / 2.0
    t1 = PointTarget(range=2.1, velocity=0.0, azimuth=az0 + 0.5 * cell_a)
    t2 = PointTarget(range=2.1, velocity=0.0, azimuth=az0 + 2.5 * cell_a)
    gt = encode_ground_truth(Scene(targets=(t1, t2)), cfg,
                             azimuth_neighbors=0.6)
    ri = int(2.1 // cell_r)
    assert gt.clas[ri, 0] == 1.0 and gt.clas[ri, 2] == 1.0
    assert gt.clas[ri, 1] == 0.0                     # wiped, not 0.6
    assert np.all(gt.reg[:, ri, 1] == 0.0)


def test_encode_azimuth_neighbors_never_overwrite_positives():
    cfg = make_config(b_a=64)
    az0 = -cfg.azimuth_fov / 2.0
    _, _, cell_r, cell_a = detection_grid(cfg)
    t1 = PointTarget(range=2.1, velocity=0.0, azimuth=az0 + 0.5 * cell_a)
    t2 = PointTarget(range=2.1, velocity=0.0, azimuth=az0 + 1.5 * cell_a)
    gt = encode_ground_truth(Scene(targets=(t1, t2)), cfg,
                             azimuth_neighbors=0.6)
    ri = int(2.1 // cell_r)
    assert gt.clas[ri, 0] == 1.0 and gt.clas[ri, 1] == 1.0
