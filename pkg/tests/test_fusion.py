import numpy as np
import pytest

from conftest import resample_3d
from cathtrack.corpus import sample_state
from cathtrack.fusion import fuse, fuse_frame, fuse_stream, track_records
from cathtrack.simulator import CatheterState, forward_kinematics
from cathtrack.synth import project_mm, render_frame
from cathtrack.vision import MM, Path2D


def mm_path(points):
    return Path2D(points=np.asarray(points, dtype=float), space=MM)


def test_planar_xy_curve_fuses_to_top_path(geom, calib):
    curve = forward_kinematics(
        CatheterState(insertion_mm=90.0, knob1_deg=50.0, knob2_deg=20.0), geom)
    assert np.abs(curve.points[:, 2]).max() < 1e-9
    top = project_mm(curve, calib.top)
    front = project_mm(curve, calib.front)
    track = fuse(top, front, k=10, refine_iters=15)
    truth = resample_3d(curve.points, 10)
    assert np.abs(track.points[:, 2]).max() < 1e-9
    assert np.abs(track.points[:, :2] - truth[:, :2]).max() < 0.05
    assert track.consistency_mm < 0.05


def test_identical_x_profiles_zero_consistency():
    s = np.linspace(0, 50, 60)
    top = mm_path(np.column_stack([s, np.sin(s / 8.0)]))
    front = mm_path(np.column_stack([s, np.sin(s / 8.0)]))  # same shape in z
    track = fuse(top, front, k=8, refine_iters=15)
    assert track.consistency_mm == pytest.approx(0.0, abs=1e-12)


def test_fused_points_on_random_curves(calib, geom, rng):
    bound = 1.5 * calib.top.mm_per_px
    for _ in range(10):
        curve = forward_kinematics(sample_state(rng, calib, geom), geom)
        track = fuse(project_mm(curve, calib.top), project_mm(curve, calib.front),
                     k=12, refine_iters=15)
        truth = resample_3d(curve.points, 12)
        assert np.linalg.norm(track.points - truth, axis=1).max() < bound


def test_empty_inputs_signal_no_catheter():
    empty = mm_path(np.zeros((0, 2)))
    line = mm_path([[0, 0], [10, 0]])
    assert fuse(empty, line, k=5) is None
    assert fuse(line, empty, k=5) is None


def test_consistency_gate_sets_warning():
    top = mm_path([[0, 0], [50, 0]])
    front = mm_path([[0, 0], [30, 0]])   # x profiles disagree by up to 20 mm
    track = fuse(top, front, k=6, refine_iters=0, consistency_gate_mm=5.0)
    assert track is not None              # delivered, not dropped
    assert track.correspondence_warning
    assert track.consistency_mm > 5.0


def test_translation_equivariance(rng):
    s = np.linspace(0, 60, 80)
    top = np.column_stack([s, 4 * np.sin(s / 9)])
    front = np.column_stack([s, 3 * np.cos(s / 7) - 3])
    base = fuse(mm_path(top), mm_path(front), k=9, refine_iters=15)
    moved = fuse(mm_path(top + [2.5, -1.0]), mm_path(front + [1.5, 3.0]),
                 k=9, refine_iters=15)
    shift = np.array([(2.5 + 1.5) / 2.0, -1.0, 3.0])
    assert np.abs(moved.points - (base.points + shift)).max() < 1e-9


def test_output_k_and_tip(geom, calib):
    curve = forward_kinematics(CatheterState(insertion_mm=75.0, knob1_deg=30.0), geom)
    top = project_mm(curve, calib.top)
    front = project_mm(curve, calib.front)
    for k in (2, 5, 12, 40):
        track = fuse(top, front, k=k, refine_iters=15)
        assert track.points.shape == (k, 3)
        assert np.allclose(track.points[0, 1], top.points[0, 1])
        assert np.allclose(track.points[0, 2], front.points[0, 1])
    # entry stays on the inlet axis
    assert np.abs(track.points[-1, 1:]).max() < 0.05


def test_fuse_stream_matches_per_frame(calib, pipe_cfg, geom, rng):
    frames = [render_frame(forward_kinematics(sample_state(rng, calib, geom), geom),
                           calib, timestamp_ms=i) for i in range(3)]
    stream = fuse_stream(frames, calib, pipe_cfg)
    single = [fuse_frame(f, calib, pipe_cfg) for f in frames]
    for a, b in zip(stream, single):
        assert np.array_equal(a.points, b.points)
        assert a.timestamp_ms == b.timestamp_ms


def test_fuse_stream_isolates_blank_frame(calib, pipe_cfg, geom, rng):
    good = render_frame(forward_kinematics(sample_state(rng, calib, geom), geom),
                        calib, timestamp_ms=0)
    blank_img = np.full((480, 640), 230, dtype=np.uint8)
    from cathtrack.synth import BiplaneFrame
    blank = BiplaneFrame(top=blank_img, front=blank_img, timestamp_ms=1)
    tracks = fuse_stream([good, blank, good], calib, pipe_cfg)
    assert tracks[0] is not None
    assert tracks[1] is None
    assert tracks[2] is not None
    assert np.array_equal(tracks[0].points, tracks[2].points)
    records = track_records(tracks)
    assert records[1]["tracking"] == "none"
    assert records[0]["tracking"] == "ok"


def test_fuse_stream_sequence_accuracy(calib, pipe_cfg, geom):
    # a smooth noiseless control trajectory tracks at sub-millimeter tips
    from conftest import resample_3d
    from cathtrack.corpus import walk_states
    rng = np.random.default_rng(21)
    states = walk_states(25, rng, calib, geom)
    frames = [render_frame(forward_kinematics(s, geom), calib, timestamp_ms=i)
              for i, s in enumerate(states)]
    tracks = fuse_stream(frames, calib, pipe_cfg)
    assert all(t is not None for t in tracks)
    tips = []
    for state, track in zip(states, tracks):
        truth = resample_3d(forward_kinematics(state, geom).points,
                            pipe_cfg.k_points)
        tips.append(np.linalg.norm(track.points[0] - truth[0]))
    assert float(np.mean(tips)) < 1.0


def test_parallel_views_match_sequential(calib, pipe_cfg, geom, rng):
    frame = render_frame(forward_kinematics(sample_state(rng, calib, geom), geom),
                         calib)
    a = fuse_frame(frame, calib, pipe_cfg, parallel=True)
    b = fuse_frame(frame, calib, pipe_cfg, parallel=False)
    assert np.array_equal(a.points, b.points)
