"""Ultrasound beam geometry, spherical targets, and navigation-task metrics.

The imaging fan is a planar trapezoid anchored at the catheter tip,
pointing along the tip tangent, with its width direction set by the roll
angle (roll 0 points the width toward world +Y projected orthogonal to the
axis, the rig's zero-roll reference side).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError
from .fusion import Track3D


@dataclass(frozen=True)
class BeamSpec:
    length_mm: float = 40.0
    near_width_mm: float = 4.0
    far_width_mm: float = 24.0

    def __post_init__(self):
        if self.length_mm <= 0:
            raise ValueError(f"beam length must be positive, got {self.length_mm}")
        if not 0 <= self.near_width_mm <= self.far_width_mm:
            raise ValueError("widths must satisfy 0 <= near <= far")


@dataclass(frozen=True)
class BeamPose:
    apex: np.ndarray    # tip, mm
    axis: np.ndarray    # unit tangent at the tip
    normal: np.ndarray  # unit normal of the fan plane

    def __post_init__(self):
        for name in ("apex", "axis", "normal"):
            object.__setattr__(self, name,
                               np.asarray(getattr(self, name), dtype=np.float64).reshape(3))


@dataclass(frozen=True)
class BeamGeometry:
    pose: BeamPose
    vertices: np.ndarray  # (4, 3): near-left, near-right, far-right, far-left
    end: np.ndarray       # apex + length * axis

    def __post_init__(self):
        object.__setattr__(self, "vertices",
                           np.asarray(self.vertices, dtype=np.float64).reshape(4, 3))
        object.__setattr__(self, "end",
                           np.asarray(self.end, dtype=np.float64).reshape(3))


@dataclass(frozen=True)
class TargetSpec:
    id: str
    center: np.ndarray
    radius_mm: float

    def __post_init__(self):
        object.__setattr__(self, "center",
                           np.asarray(self.center, dtype=np.float64).reshape(3))
        if self.radius_mm <= 0:
            raise ValueError(f"target radius must be positive, got {self.radius_mm}")


def _rotate_about(v: np.ndarray, axis: np.ndarray, angle_deg: float) -> np.ndarray:
    """Rodrigues rotation of ``v`` about unit ``axis``."""
    th = math.radians(angle_deg)
    return (v * math.cos(th) + np.cross(axis, v) * math.sin(th)
            + axis * np.dot(axis, v) * (1.0 - math.cos(th)))


def beam_geometry(track: Track3D, spec: BeamSpec | None = None,
                  roll_deg: float | None = None) -> BeamGeometry:
    """Fan trapezoid for a track; tip tangent from the first two points."""
    spec = spec or BeamSpec()
    if len(track.points) < 2:
        raise GeometryError("track needs >= 2 points to orient the beam")
    apex = track.points[0]
    tangent = apex - track.points[1]
    norm = np.linalg.norm(tangent)
    if norm < 1e-9:
        raise GeometryError("coincident leading track points; tangent undefined")
    axis = tangent / norm

    ref = np.array([0.0, 1.0, 0.0])
    w0 = ref - np.dot(ref, axis) * axis
    if np.linalg.norm(w0) < 1e-9:
        # axis is parallel to +Y; fall back to the +Z reference
        ref = np.array([0.0, 0.0, 1.0])
        w0 = ref - np.dot(ref, axis) * axis
    w0 /= np.linalg.norm(w0)
    roll = track.roll_deg if roll_deg is None else roll_deg
    width_dir = _rotate_about(w0, axis, roll)
    normal = np.cross(axis, width_dir)

    end = apex + spec.length_mm * axis
    near = 0.5 * spec.near_width_mm
    far = 0.5 * spec.far_width_mm
    vertices = np.array([apex - near * width_dir,
                         apex + near * width_dir,
                         end + far * width_dir,
                         end - far * width_dir])
    return BeamGeometry(pose=BeamPose(apex=apex, axis=axis, normal=normal),
                        vertices=vertices, end=end)


def target_feedback(beam: BeamGeometry, target: TargetSpec) -> tuple[float, float]:
    """(distance beam_end -> target center in mm, axis-to-target angle in deg).

    The angle of a target sitting exactly at the apex is defined as 0.
    """
    distance = float(np.linalg.norm(beam.end - target.center))
    vec = target.center - beam.pose.apex
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        return distance, 0.0
    cosang = float(np.clip(np.dot(beam.pose.axis, vec / norm), -1.0, 1.0))
    return distance, math.degrees(math.acos(cosang))


# ---------------------------------------------------------------------------
# Six-target navigation session
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SessionMetrics:
    """t: completion time; nT: targets reached; tT: time per target."""

    t_s: float
    n_reached: int
    t_per_target_s: float | None
    reach_times_ms: tuple = ()

    def as_dict(self) -> dict:
        return {"t_s": self.t_s, "n_reached": self.n_reached,
                "t_per_target_s": self.t_per_target_s}


class TaskSession:
    """Timed navigation through a fixed target order.

    A target counts as reached after the beam end stays inside its radius
    for ``dwell_ms`` continuously. Time runs from :meth:`start` and freezes
    at the last reach once every target is done.
    """

    def __init__(self, targets, dwell_ms: int = 500, log_path=None):
        self.targets = list(targets)
        self.dwell_ms = int(dwell_ms)
        self.log_path = log_path
        self.started = False
        self.completed = False
        self._start_ms = 0
        self._idx = 0
        self._inside_since = None
        self.reach_times_ms: list[int] = []

    # -- lifecycle

    def start(self, now_ms: int) -> None:
        self.started = True
        self.completed = False
        self._start_ms = int(now_ms)
        self._idx = 0
        self._inside_since = None
        self.reach_times_ms = []
        self._log({"event": "session_start", "t_ms": int(now_ms),
                   "targets": [t.id for t in self.targets],
                   "dwell_ms": self.dwell_ms})

    def reset(self, now_ms: int) -> None:
        self.started = False
        self.completed = False
        self._idx = 0
        self._inside_since = None
        self.reach_times_ms = []
        self._log({"event": "session_reset", "t_ms": int(now_ms)})

    def log_mode(self, view: str, now_ms: int) -> None:
        self._log({"event": "mode", "view": view, "t_ms": int(now_ms)})

    # -- per-frame update

    @property
    def current_target(self) -> TargetSpec | None:
        if not self.started or self.completed or self._idx >= len(self.targets):
            return None
        return self.targets[self._idx]

    def update(self, beam_end, now_ms: int) -> None:
        target = self.current_target
        if target is None:
            return
        now_ms = int(now_ms)
        if beam_end is None:
            self._inside_since = None
            return
        inside = np.linalg.norm(np.asarray(beam_end) - target.center) <= target.radius_mm
        if not inside:
            self._inside_since = None
            return
        if self._inside_since is None:
            self._inside_since = now_ms
        if now_ms - self._inside_since >= self.dwell_ms:
            self.reach_times_ms.append(now_ms)
            self._log({"event": "target_reached", "target_id": target.id,
                       "index": self._idx, "t_ms": now_ms})
            self._idx += 1
            self._inside_since = None
            if self._idx >= len(self.targets):
                self.completed = True
                final = self.metrics(now_ms)
                self._log({"event": "session_complete", "t_ms": now_ms,
                           "metrics": final.as_dict()})

    # -- metrics

    def metrics(self, now_ms: int) -> SessionMetrics:
        if not self.started:
            return SessionMetrics(t_s=0.0, n_reached=0, t_per_target_s=None)
        end_ms = self.reach_times_ms[-1] if self.completed else int(now_ms)
        t_s = (end_ms - self._start_ms) / 1000.0
        n = len(self.reach_times_ms)
        t_last = (self.reach_times_ms[-1] - self._start_ms) / 1000.0 if n else 0.0
        return SessionMetrics(
            t_s=t_s,
            n_reached=n,
            t_per_target_s=(t_last / n) if n > 0 else None,
            reach_times_ms=tuple(self.reach_times_ms),
        )

    def _log(self, event: dict) -> None:
        if self.log_path is None:
            return
        with open(self.log_path, "a") as f:
            f.write(json.dumps(event, sort_keys=True) + "\n")


def read_session_log(path) -> list[dict]:
    events = []
    with open(path) as f:
        for line in f:
            if line.strip():
                events.append(json.loads(line))
    return events


def replay_session_log(path) -> SessionMetrics:
    """Recompute session metrics from a log; equals the live metrics."""
    start_ms = None
    reaches: list[int] = []
    for ev in read_session_log(path):
        kind = ev.get("event")
        if kind == "session_start":
            start_ms = ev["t_ms"]
            reaches = []
        elif kind == "session_reset":
            start_ms = None
            reaches = []
        elif kind == "target_reached":
            reaches.append(ev["t_ms"])
    if start_ms is None:
        return SessionMetrics(t_s=0.0, n_reached=0, t_per_target_s=None)
    n = len(reaches)
    t_last = (reaches[-1] - start_ms) / 1000.0 if n else 0.0
    return SessionMetrics(
        t_s=t_last if n else 0.0,
        n_reached=n,
        t_per_target_s=(t_last / n) if n else None,
        reach_times_ms=tuple(reaches),
    )
