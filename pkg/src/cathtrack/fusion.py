"""Biplane fusion: merge the two per-view mm paths into one 3D track.

The TOP view supplies Y, the FRONT view supplies Z, and X is the mean of
the two views' estimates. Points are put in correspondence by normalized
arclength; because each view only sees its own plane, a view foreshortens
sections that move out of that plane, so plain 2D arclength drifts between
the views on bent curves. A short fixed-point iteration reparameterizes
each path by its estimated 3D arclength (its own in-plane increments
combined with the transverse increments estimated from the other view),
which restores a consistent correspondence. The residual X disagreement is
surfaced as ``consistency_mm`` rather than hidden.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import TrackingLostError
from .vision import Path2D, PipelineConfig, track_view

_DENSE = 256

_POOL = None


def _view_pool() -> ThreadPoolExecutor:
    global _POOL
    if _POOL is None:
        _POOL = ThreadPoolExecutor(max_workers=2, thread_name_prefix="view")
    return _POOL


@dataclass(frozen=True)
class Track3D:
    """K ordered 3D millimeter points, tip first, plus the roll angle."""

    points: np.ndarray  # (K, 3) float64
    roll_deg: float = 0.0
    timestamp_ms: int = 0
    consistency_mm: float = 0.0
    correspondence_warning: bool = False

    def __post_init__(self):
        object.__setattr__(self, "points",
                           np.asarray(self.points, dtype=np.float64).reshape(-1, 3))

    @property
    def tip(self) -> np.ndarray:
        return self.points[0]


def _resample(pts: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sample a polyline at normalized arclength positions ``u``."""
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(np.maximum(seg, 1e-12))])
    cum /= cum[-1]
    out = np.column_stack([np.interp(u, cum, pts[:, i]) for i in range(pts.shape[1])])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def _reparam(pts: np.ndarray, transverse: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Resample ``pts`` so ``u`` tracks estimated 3D arclength.

    ``transverse`` holds the out-of-plane coordinate estimated from the
    other view at the current parameterization.
    """
    d_in = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    d_tr = np.diff(transverse)
    ds3 = np.sqrt(d_in * d_in + d_tr * d_tr)
    v = np.concatenate([[0.0], np.cumsum(np.maximum(ds3, 1e-12))])
    v /= v[-1]
    out = np.column_stack([np.interp(u, v, pts[:, i]) for i in range(pts.shape[1])])
    out[0] = pts[0]
    out[-1] = pts[-1]
    return out


def fuse(top: Path2D, front: Path2D, k: int, *,
         roll_deg: float = 0.0, timestamp_ms: int = 0,
         refine_iters: int = 3, consistency_gate_mm: float = 5.0) -> Track3D | None:
    """Fuse one pair of mm-space paths into a K-point 3D track.

    Returns None (the no-catheter signal) when either path is empty or too
    short to orient. A mean X disagreement above ``consistency_gate_mm``
    sets the correspondence warning on the delivered track.
    """
    if top.empty or front.empty or len(top) < 2 or len(front) < 2:
        return None
    u = np.linspace(0.0, 1.0, _DENSE)
    t = _resample(top.points, u)
    f = _resample(front.points, u)
    for _ in range(max(0, refine_iters)):
        t_new = _reparam(t, f[:, 1], u)
        f_new = _reparam(f, t[:, 1], u)
        t, f = t_new, f_new

    uk = np.linspace(0.0, 1.0, k)
    tk = np.column_stack([np.interp(uk, u, t[:, i]) for i in range(2)])
    fk = np.column_stack([np.interp(uk, u, f[:, i]) for i in range(2)])
    tk[0], tk[-1] = t[0], t[-1]
    fk[0], fk[-1] = f[0], f[-1]

    consistency = float(np.mean(np.abs(tk[:, 0] - fk[:, 0])))
    pts = np.column_stack([(tk[:, 0] + fk[:, 0]) / 2.0, tk[:, 1], fk[:, 1]])
    return Track3D(points=pts, roll_deg=roll_deg, timestamp_ms=timestamp_ms,
                   consistency_mm=consistency,
                   correspondence_warning=consistency > consistency_gate_mm)


def fuse_frame(frame, calib, cfg: PipelineConfig | None = None,
               roll_deg: float = 0.0, parallel: bool = False) -> Track3D | None:
    """Run both per-view pipelines on one biplane frame and fuse the result.

    Tracking anomalies (no catheter, lost from inlet) yield None so live
    streams survive a full withdrawal.
    """
    cfg = cfg or PipelineConfig()
    try:
        if parallel:
            pool = _view_pool()
            ft = pool.submit(track_view, frame.top, calib.top, cfg)
            ff = pool.submit(track_view, frame.front, calib.front, cfg)
            top, front = ft.result(), ff.result()
        else:
            top = track_view(frame.top, calib.top, cfg)
            front = track_view(frame.front, calib.front, cfg)
    except TrackingLostError:
        return None
    return fuse(top, front, cfg.k_points, roll_deg=roll_deg,
                timestamp_ms=frame.timestamp_ms,
                refine_iters=cfg.fusion_refine_iters,
                consistency_gate_mm=cfg.consistency_gate_mm)


def fuse_stream(frames, calib, cfg: PipelineConfig | None = None,
                parallel: bool = False) -> list[Track3D | None]:
    """Track every frame of a sequence; order and timestamps are preserved."""
    cfg = cfg or PipelineConfig()
    return [fuse_frame(fr, calib, cfg, parallel=parallel) for fr in frames]


def track_records(tracks: list[Track3D | None]) -> list[dict]:
    """Offline track output: one JSON-ready record per frame."""
    records = []
    for i, tr in enumerate(tracks):
        if tr is None:
            records.append({"index": i, "tracking": "none"})
        else:
            records.append({
                "index": i,
                "tracking": "ok",
                "timestamp_ms": tr.timestamp_ms,
                "points_mm": np.round(tr.points, 6).tolist(),
                "roll_deg": tr.roll_deg,
                "consistency_mm": round(tr.consistency_mm, 6),
                "correspondence_warning": tr.correspondence_warning,
            })
    return records
