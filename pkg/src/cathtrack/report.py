"""Offline report rendering: delimited tables plus matplotlib figures."""

from __future__ import annotations

import csv
from pathlib import Path as FsPath

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def _resample3(points: np.ndarray, k: int) -> np.ndarray:
    seg = np.linalg.norm(np.diff(points, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(np.maximum(seg, 1e-12))])
    cum /= cum[-1]
    u = np.linspace(0.0, 1.0, k)
    return np.column_stack([np.interp(u, cum, points[:, i]) for i in range(3)])


def evaluate_tracks(tracks, ground_truth) -> list[dict]:
    """Per-frame error rows for tracked frames against the recorded truth."""
    rows = []
    for i, track in enumerate(tracks):
        row = {"index": i, "tracked": int(track is not None)}
        if track is not None and i < len(ground_truth):
            gt_points = np.asarray(ground_truth[i]["points_mm"], dtype=np.float64)
            k = len(track.points)
            gt = _resample3(gt_points, k)
            err = np.linalg.norm(track.points - gt, axis=1)
            row.update({
                "tip_error_mm": round(float(err[0]), 4),
                "rms_error_mm": round(float(np.sqrt(np.mean(err ** 2))), 4),
                "max_error_mm": round(float(err.max()), 4),
                "consistency_mm": round(float(track.consistency_mm), 4),
            })
        rows.append(row)
    return rows


FIELDS = ("index", "tracked", "tip_error_mm", "rms_error_mm",
          "max_error_mm", "consistency_mm")


def write_error_csv(path, rows) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row.get(k, "") for k in FIELDS})


def summarize(rows) -> dict:
    tracked = [r for r in rows if r["tracked"] and "tip_error_mm" in r]
    if not tracked:
        return {"frames": len(rows), "tracked": 0}
    tips = np.array([r["tip_error_mm"] for r in tracked])
    rms = np.array([r["rms_error_mm"] for r in tracked])
    return {
        "frames": len(rows),
        "tracked": len(tracked),
        "mean_tip_error_mm": round(float(tips.mean()), 4),
        "max_tip_error_mm": round(float(tips.max()), 4),
        "mean_rms_error_mm": round(float(rms.mean()), 4),
    }


def render_track_figures(out_dir, rows, tracks, ground_truth) -> list[str]:
    """Error timeline, error histogram and a 3D overlay of the worst frame."""
    out = FsPath(out_dir)
    written = []
    tracked = [r for r in rows if r["tracked"] and "tip_error_mm" in r]
    if not tracked:
        return written

    idx = [r["index"] for r in tracked]
    tips = [r["tip_error_mm"] for r in tracked]
    rms = [r["rms_error_mm"] for r in tracked]

    fig, ax = plt.subplots(figsize=(8, 4))
    ax.plot(idx, tips, label="tip error", lw=1.2)
    ax.plot(idx, rms, label="track RMS", lw=1.2)
    ax.set_xlabel("frame")
    ax.set_ylabel("error (mm)")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    path = out / "error_timeline.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(str(path))

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.hist(tips, bins=24, color="#356fa8")
    ax.set_xlabel("tip error (mm)")
    ax.set_ylabel("frames")
    fig.tight_layout()
    path = out / "tip_error_hist.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(str(path))

    worst = max(tracked, key=lambda r: r["rms_error_mm"])
    i = worst["index"]
    track = tracks[i]
    gt = np.asarray(ground_truth[i]["points_mm"], dtype=np.float64)
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    ax.plot(*gt.T, label="ground truth", lw=2)
    ax.plot(*track.points.T, "o-", label="fused track", ms=4, lw=1)
    ax.set_title(f"frame {i} (RMS {worst['rms_error_mm']:.2f} mm)")
    ax.set_xlabel("x (mm)"); ax.set_ylabel("y (mm)"); ax.set_zlabel("z (mm)")
    ax.legend()
    fig.tight_layout()
    path = out / "worst_frame_overlay.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(str(path))
    return written


def write_bench_csv(path, stage_stats: dict) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["stage", "mean_ms", "p95_ms", "share_pct"])
        total = sum(np.mean(v) for v in stage_stats.values())
        for stage, vals in stage_stats.items():
            vals = np.asarray(vals)
            writer.writerow([stage, round(float(vals.mean()), 3),
                             round(float(np.percentile(vals, 95)), 3),
                             round(float(100 * vals.mean() / total), 1)])


def render_bench_figure(out_dir, stage_stats: dict) -> str:
    out = FsPath(out_dir)
    stages = list(stage_stats)
    means = [float(np.mean(stage_stats[s])) for s in stages]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.barh(stages[::-1], means[::-1], color="#356fa8")
    ax.set_xlabel("mean time per biplane pair (ms)")
    fig.tight_layout()
    path = out / "bench_stages.png"
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return str(path)
