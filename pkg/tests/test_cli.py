import json

import numpy as np
import pytest
from click.testing import CliRunner

from cathtrack.cli import main


@pytest.fixture(scope="module")
def recorded(tmp_path_factory):
    """One small noiseless recording shared by the CLI tests."""
    out = tmp_path_factory.mktemp("seq")
    runner = CliRunner()
    result = runner.invoke(main, ["simulate", "--out", str(out),
                                  "--frames", "6", "--seed", "3"])
    assert result.exit_code == 0, result.output
    return out


def test_simulate_outputs(recorded):
    assert (recorded / "manifest.json").exists()
    assert (recorded / "ground_truth.jsonl").exists()
    assert (recorded / "calibration.ini").exists()
    manifest = json.loads((recorded / "manifest.json").read_text())
    assert manifest["count"] == 6
    for entry in manifest["frames"]:
        assert (recorded / entry["top"]).exists()
        assert (recorded / entry["front"]).exists()


def test_simulate_deterministic(tmp_path):
    runner = CliRunner()
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        result = runner.invoke(main, ["simulate", "--out", str(out),
                                      "--frames", "3", "--seed", "11"])
        assert result.exit_code == 0
    for name in ("frame_00001_top.pgm", "frame_00002_front.pgm"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_simulate_profile_and_serial(tmp_path):
    profile = tmp_path / "profile.json"
    profile.write_text(json.dumps([
        {"insertion_mm": 60.0, "roll_deg": 0.0},
        {"insertion_mm": 62.0, "roll_deg": 10.0},
        {"insertion_mm": 64.0, "roll_deg": 20.0},
    ]))
    out = tmp_path / "seq"
    serial = tmp_path / "roll.log"
    runner = CliRunner()
    result = runner.invoke(main, ["simulate", "--out", str(out), "--profile",
                                  str(profile), "--emit-serial", str(serial)])
    assert result.exit_code == 0, result.output
    assert json.loads((out / "manifest.json").read_text())["count"] == 3
    lines = serial.read_text().strip().splitlines()
    assert len(lines) == 3
    assert all(line.startswith("T:") and " C:" in line for line in lines)


def test_track_reports_errors(recorded, tmp_path):
    report_dir = tmp_path / "report"
    runner = CliRunner()
    result = runner.invoke(main, ["track", "--seq", str(recorded),
                                  "--out", str(report_dir)])
    assert result.exit_code == 0, result.output
    assert "mean_tip_error_mm" in result.output
    summary = json.loads((report_dir / "summary.json").read_text())
    assert summary["tracked"] == 6
    assert summary["mean_tip_error_mm"] < 1.0
    assert (report_dir / "tracks.jsonl").exists()
    assert (report_dir / "errors.csv").exists()
    assert (report_dir / "error_timeline.png").exists()
    assert (report_dir / "tip_error_hist.png").exists()
    assert (report_dir / "worst_frame_overlay.png").exists()
    lines = (report_dir / "errors.csv").read_text().strip().splitlines()
    assert lines[0].startswith("index,tracked,tip_error_mm")
    assert len(lines) == 7


def test_track_missing_sequence_fails():
    runner = CliRunner()
    result = runner.invoke(main, ["track", "--seq", "/nonexistent/seq"])
    assert result.exit_code != 0


def test_track_missing_calibration_fails(recorded, tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["track", "--seq", str(recorded),
                                  "--calib", str(tmp_path / "nope.ini")])
    assert result.exit_code != 0


def test_track_empty_sequence(tmp_path):
    out = tmp_path / "empty"
    runner = CliRunner()
    assert runner.invoke(main, ["simulate", "--out", str(out),
                                "--frames", "0"]).exit_code == 0
    result = runner.invoke(main, ["track", "--seq", str(out)])
    assert result.exit_code == 0
    assert "frames: 0" in result.output


def test_bench_zero_frames_errors():
    runner = CliRunner()
    result = runner.invoke(main, ["bench", "--frames", "0"])
    assert result.exit_code != 0
    assert "error" in result.output


def test_bench_output_parseable(tmp_path):
    runner = CliRunner()
    result = runner.invoke(main, ["bench", "--frames", "4",
                                  "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    fps_lines = [l for l in result.output.splitlines()
                 if l.startswith("frames_per_second:")]
    assert len(fps_lines) == 1
    assert float(fps_lines[0].split(":")[1]) > 0
    assert (tmp_path / "bench.csv").exists()
    assert (tmp_path / "bench_stages.png").exists()
    header = (tmp_path / "bench.csv").read_text().splitlines()[0]
    assert header == "stage,mean_ms,p95_ms,share_pct"


def test_calibrate_round_trip(tmp_path):
    from cathtrack import config as cfgio
    fid = tmp_path / "fiducials.ini"
    calib = cfgio.default_calibration()
    cfgio.save_calibration(fid, calib)
    # strip the homography lines: calibrate must fit them
    text = "\n".join(l for l in fid.read_text().splitlines()
                     if not l.startswith("homography"))
    fid.write_text(text)
    out = tmp_path / "calib.ini"
    runner = CliRunner()
    result = runner.invoke(main, ["calibrate", "--fiducials", str(fid),
                                  "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "residual" in result.output
    fitted = cfgio.load_calibration(out)
    assert np.abs(fitted.top.homography - calib.top.homography).max() < 1e-6


def test_calibrate_degenerate_fiducials(tmp_path):
    fid = tmp_path / "bad.ini"
    fid.write_text("""[camera.top]
raw_size = 640 480
rect_size = 640 480
mm_per_px = 0.25
inlet_px = 20 240
fiducials_px = 0 0, 10 10, 20 20, 30 30
fiducials_mm = 0 -55, 140 -55, 140 55, 0 55

[camera.front]
raw_size = 640 480
rect_size = 640 480
mm_per_px = 0.25
inlet_px = 20 240
fiducials_px = 24 18, 580 28, 572 462, 14 452
fiducials_mm = 0 -55, 140 -55, 140 55, 0 55
""")
    runner = CliRunner()
    result = runner.invoke(main, ["calibrate", "--fiducials", str(fid),
                                  "--out", str(tmp_path / "c.ini")])
    assert result.exit_code != 0
    assert "error" in result.output


def test_serve_rejects_bad_bind():
    runner = CliRunner()
    result = runner.invoke(main, ["serve", "--bind", "localhost"])
    assert result.exit_code != 0
    assert "error" in result.output
