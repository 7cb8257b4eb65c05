"""Operator command line: simulate | track | serve | bench | calibrate."""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path as FsPath

import click
import numpy as np

from . import config as cfgio
from . import corpus, report
from .encoder import write_replay
from .errors import CathtrackError
from .fusion import fuse_frame, fuse_stream, track_records
from .registration import fit_affine, load_correspondences
from .scene import ensure_scene_assets, load_scene
from .simulator import CatheterState, forward_kinematics
from .synth import (NoiseSpec, load_ground_truth, load_sequence,
                    record_sequence, render_frame)
from .vision import (PipelineConfig, adaptive_threshold, clean, preprocess,
                     rectify, refine_tip, skeletonize, trace_path)


@click.group()
def main():
    """Biplane catheter tracking testbed."""


def _fail(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _load_calib(path):
    if path is None:
        return cfgio.default_calibration()
    try:
        return cfgio.load_calibration(path)
    except (OSError, CathtrackError, ValueError) as exc:
        _fail(f"cannot load calibration {path}: {exc}")


def _load_pipeline(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    try:
        return cfgio.load_pipeline_config(path)
    except (OSError, CathtrackError, ValueError) as exc:
        _fail(f"cannot load pipeline config {path}: {exc}")


def _noise_from_flags(sigma, gradient, speckles, seed) -> NoiseSpec:
    return NoiseSpec(sigma=sigma, gradient=gradient, speckle_count=speckles,
                     seed=seed)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

@main.command()
@click.option("--out", required=True, type=click.Path(), help="output sequence directory")
@click.option("--frames", default=30, show_default=True, help="number of frames")
@click.option("--seed", default=0, show_default=True)
@click.option("--profile", type=click.Path(exists=True),
              help="JSON list of explicit catheter states (overrides the random walk)")
@click.option("--calib", type=click.Path(exists=True), help="calibration file")
@click.option("--geometry", type=click.Path(exists=True), help="catheter geometry file")
@click.option("--noise-sigma", default=0.0, show_default=True)
@click.option("--noise-gradient", default=0.0, show_default=True)
@click.option("--speckles", default=0, show_default=True)
@click.option("--fps", default=30.0, show_default=True)
@click.option("--emit-serial", type=click.Path(), help="write a roll encoder replay file")
def simulate(out, frames, seed, profile, calib, geometry, noise_sigma,
             noise_gradient, speckles, fps, emit_serial):
    """Record a synthetic biplane sequence with ground truth."""
    if frames < 0:
        _fail("--frames must be >= 0")
    calibration = _load_calib(calib)
    geom = cfgio.load_geometry(geometry) if geometry else None
    if profile:
        with open(profile) as f:
            raw_states = json.load(f)
        states = [CatheterState(**entry) for entry in raw_states]
    else:
        rng = np.random.default_rng(seed)
        states = corpus.walk_states(frames, rng, calibration, geom, dt=1.0 / fps)
    noise = _noise_from_flags(noise_sigma, noise_gradient, speckles, seed)
    count = record_sequence(states, calibration, out, geometry=geom,
                            noise=noise, fps=fps)
    cfgio.save_calibration(FsPath(out) / "calibration.ini", calibration)
    if emit_serial:
        from .encoder import RollCalibration, RollTracker
        tracker = RollTracker(RollCalibration())
        records = []
        unwrapped = states[0].roll_deg if states else 0.0
        prev = unwrapped
        for i, st in enumerate(states):
            delta = (st.roll_deg - prev + 180.0) % 360.0 - 180.0
            unwrapped += delta
            prev = st.roll_deg
            t_ms = int(round(i * 1000.0 / fps))
            tracker.advance(t_ms, unwrapped)
            records.append((t_ms, tracker.count))
        write_replay(emit_serial, records)
    click.echo(f"wrote {count} frames to {out}")


# ---------------------------------------------------------------------------
# track
# ---------------------------------------------------------------------------

@main.command()
@click.option("--seq", required=True, type=click.Path(exists=True),
              help="recorded sequence directory")
@click.option("--calib", type=click.Path(exists=True),
              help="calibration file (defaults to the one in --seq)")
@click.option("--config", "config_path", type=click.Path(exists=True),
              help="pipeline config file")
@click.option("--out", type=click.Path(), help="report directory (tracks + csv + figures)")
@click.option("--figures/--no-figures", default=True, show_default=True)
def track(seq, calib, config_path, out, figures):
    """Track a recorded sequence and report errors against ground truth."""
    seq_calib = FsPath(seq) / "calibration.ini"
    if calib is None and seq_calib.exists():
        calib = str(seq_calib)
    calibration = _load_calib(calib)
    cfg = _load_pipeline(config_path)
    try:
        frames = list(load_sequence(seq))
    except (OSError, KeyError, ValueError) as exc:
        _fail(f"cannot read sequence {seq}: {exc}")
    tracks = fuse_stream(frames, calibration, cfg)
    records = track_records(tracks)

    summary = {"frames": len(frames), "tracked": sum(t is not None for t in tracks)}
    rows = None
    try:
        truth = load_ground_truth(seq)
    except OSError:
        truth = None
    if truth:
        rows = report.evaluate_tracks(tracks, truth)
        summary = report.summarize(rows)

    if out:
        out_dir = FsPath(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "tracks.jsonl", "w") as f:
            for rec in records:
                f.write(json.dumps(rec) + "\n")
        if rows is not None:
            report.write_error_csv(out_dir / "errors.csv", rows)
            if figures:
                report.render_track_figures(out_dir, rows, tracks, truth)
        with open(out_dir / "summary.json", "w") as f:
            json.dump(summary, f, indent=1)
    for key, value in summary.items():
        click.echo(f"{key}: {value}")


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

@main.command()
@click.option("--bind", default="127.0.0.1:8765", show_default=True,
              help="IP:port to listen on")
@click.option("--rate", default=30.0, show_default=True, help="frames per second")
@click.option("--scene", "scene_path", type=click.Path(exists=True))
@click.option("--calib", type=click.Path(exists=True))
@click.option("--pipeline-config", type=click.Path(exists=True))
@click.option("--registration", "registration_path", type=click.Path(exists=True),
              help="correspondence file mapping tracking to model space")
@click.option("--log", "log_path", type=click.Path(), help="session log (JSON lines)")
@click.option("--ui", "ui_dir", type=click.Path(exists=True), help="static client directory")
@click.option("--assets", "asset_dir", type=click.Path(),
              help="scene asset directory (created with defaults if missing)")
@click.option("--noise-sigma", default=0.0, show_default=True)
@click.option("--noise-gradient", default=0.0, show_default=True)
@click.option("--speckles", default=0, show_default=True)
def serve(bind, rate, scene_path, calib, pipeline_config, registration_path,
          log_path, ui_dir, asset_dir, noise_sigma, noise_gradient, speckles):
    """Run the live tracking and task server."""
    from .registration import AffineTransform
    from .scene import default_scene
    from .server import RigConfig, TrackerRig
    from .server import serve as run_server

    try:
        host, port_text = bind.rsplit(":", 1)
        port = int(port_text)
    except ValueError:
        _fail(f"--bind must be IP:PORT, got {bind!r}")
    if rate <= 0:
        _fail("--rate must be positive")

    asset_dir = asset_dir or str(FsPath(log_path).parent if log_path else ".") + "/cathtrack-assets"
    ensure_scene_assets(asset_dir)
    scene = load_scene(scene_path) if scene_path else default_scene()
    transform = AffineTransform.identity()
    if registration_path:
        src, dst = load_correspondences(registration_path)
        transform = fit_affine(src, dst)
        click.echo(f"registration rms residual: {transform.rms_residual:.6f} mm")

    rig = TrackerRig(RigConfig(
        calib=_load_calib(calib),
        pipeline=_load_pipeline(pipeline_config),
        scene=scene,
        transform=transform,
        noise=_noise_from_flags(noise_sigma, noise_gradient, speckles, seed=0),
    ), log_path=log_path)
    click.echo(f"serving ws://{host}:{port}/ws at {rate} fps")
    run_server(host, port, rig, rate_hz=rate, asset_dir=asset_dir, ui_dir=ui_dir)


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

@main.command()
@click.option("--frames", default=60, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--noise-sigma", default=0.0, show_default=True)
@click.option("--full-frame", is_flag=True,
              help="disable the ROI accelerator (worst-case numbers)")
@click.option("--out", type=click.Path(), help="write bench.csv and a stage figure")
def bench(frames, seed, noise_sigma, full_frame, out):
    """Per-stage latency of the tracking pipeline at 640x480."""
    if frames <= 0:
        _fail("--frames must be >= 1")
    calib = cfgio.default_calibration()
    cfg = PipelineConfig(roi_accelerate=not full_frame)
    rng = np.random.default_rng(seed)
    states = corpus.sample_states(frames, rng, calib)
    noise = NoiseSpec(sigma=noise_sigma, seed=seed)
    pairs = [render_frame(forward_kinematics(s), calib, noise) for s in states]

    from .fusion import fuse
    from .vision import _rectify_box, detect_roi

    stages = {name: [] for name in
              ("detect_roi", "rectify", "preprocess", "threshold", "clean",
               "skeletonize", "trace", "fuse")}

    def run_stages(raw, camera):
        t0 = time.perf_counter()
        if cfg.roi_accelerate:
            box = detect_roi(raw, camera, cfg)
            t1 = time.perf_counter()
            img = _rectify_box(raw, camera, box, cfg.background) if box else None
        else:
            box = None
            t1 = time.perf_counter()
            img = rectify(raw, camera, cfg.background)
        t2 = time.perf_counter()
        if img is None:
            return (t1 - t0, t2 - t1, 0, 0, 0, 0, 0)
        img = preprocess(img, cfg.gauss_sigma, cfg.stretch_lo_pct,
                         cfg.stretch_hi_pct, cfg.stretch_min_range)
        t3 = time.perf_counter()
        mask = adaptive_threshold(img, cfg.threshold_window,
                                  cfg.threshold_offset, cfg.polarity)
        t4 = time.perf_counter()
        mask = clean(mask, cfg.close_radius, cfg.min_area)
        t5 = time.perf_counter()
        skel = skeletonize(mask)
        t6 = time.perf_counter()
        inlet = camera.inlet_px if box is None else (camera.inlet_px[0] - box[0],
                                                     camera.inlet_px[1] - box[1])
        path = trace_path(skel, inlet, cfg.inlet_radius_px)
        if not path.empty:
            refine_tip(path, mask)
        t7 = time.perf_counter()
        return (t1 - t0, t2 - t1, t3 - t2, t4 - t3, t5 - t4, t6 - t5, t7 - t6)

    from .vision import track_view

    for frame in pairs:
        per_pair = np.zeros(7)
        for camera, raw in ((calib.top, frame.top), (calib.front, frame.front)):
            per_pair += np.asarray(run_stages(raw, camera))
        top = track_view(frame.top, calib.top, cfg)
        front = track_view(frame.front, calib.front, cfg)
        tf0 = time.perf_counter()
        fuse(top, front, cfg.k_points, refine_iters=cfg.fusion_refine_iters)
        tf1 = time.perf_counter()
        for name, val in zip(("detect_roi", "rectify", "preprocess", "threshold",
                              "clean", "skeletonize", "trace"), per_pair):
            stages[name].append(val * 1000.0)
        stages["fuse"].append((tf1 - tf0) * 1000.0)

    # deployment figure: the composed per-frame path as the server runs it
    fuse_frame(pairs[0], calib, cfg)  # warm caches
    t0 = time.perf_counter()
    for frame in pairs:
        fuse_frame(frame, calib, cfg)
    dt = time.perf_counter() - t0
    fps = frames / dt

    total = sum(np.mean(v) for v in stages.values())
    click.echo(f"{'stage':<12} {'mean_ms':>9} {'p95_ms':>9} {'share':>7}")
    for name, vals in stages.items():
        vals = np.asarray(vals)
        click.echo(f"{name:<12} {vals.mean():>9.3f} {np.percentile(vals, 95):>9.3f} "
                   f"{100 * vals.mean() / total:>6.1f}%")
    click.echo(f"{'total':<12} {total:>9.3f}")
    click.echo(f"frames_per_second: {fps:.2f}")

    if out:
        out_dir = FsPath(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        report.write_bench_csv(out_dir / "bench.csv", stages)
        report.render_bench_figure(out_dir, stages)
        with open(out_dir / "bench.json", "w") as f:
            json.dump({"frames": frames, "frames_per_second": round(fps, 2)}, f)


# ---------------------------------------------------------------------------
# calibrate
# ---------------------------------------------------------------------------

@main.command()
@click.option("--fiducials", required=True, type=click.Path(exists=True),
              help="fiducial measurement file (same sections as a calibration file)")
@click.option("--out", required=True, type=click.Path())
def calibrate(fiducials, out):
    """Fit rectification homographies and write a calibration file."""
    try:
        calib = cfgio.load_calibration(fiducials)
    except (CathtrackError, ValueError, KeyError, OSError) as exc:
        _fail(f"cannot calibrate from {fiducials}: {exc}")
    cfgio.save_calibration(out, calib)
    for plane, cam in (("top", calib.top), ("front", calib.front)):
        from .vision import apply_homography
        fitted = apply_homography(cam.homography, cam.fiducials_px)
        target = cam.rect_px_of_mm(cam.fiducials_mm)
        err = float(np.abs(fitted - target).max())
        click.echo(f"{plane}: fiducial fit residual {err:.2e} px")
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    main()
