"""State sampling for benchmarks and fixtures.

Biplane silhouette tracking is well-posed only when the catheter stays in
both cameras' fields of view and neither projection folds back onto
itself within the tube's visual width (a self-occluded projection has no
recoverable per-view ordering). The samplers here draw from that
observable regime; the validity predicates are exposed for reuse.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .simulator import CatheterGeometry, CatheterState, forward_kinematics
from .synth import CalibrationSet, CameraModel, project


def in_raw_view(curve, camera: CameraModel, margin_px: float = 8.0) -> bool:
    """The whole projected curve lies inside the raw frame with margin."""
    raw = project(curve, camera).points
    w, h = camera.raw_size
    return bool(raw[:, 0].min() >= margin_px and raw[:, 0].max() <= w - 1 - margin_px
                and raw[:, 1].min() >= margin_px and raw[:, 1].max() <= h - 1 - margin_px)


def projection_separated(curve, camera: CameraModel, min_gap_px: float = 8.0,
                         min_arc_mm: float = 3.0) -> bool:
    """No two sections of the projected path approach within the tube width.

    Points closer than ``min_arc_mm`` along the curve are neighbors and
    exempt; anything else within ``min_gap_px`` means the projection
    overlaps itself and the view cannot order the centerline.
    """
    pts = camera.rect_px_of_mm(camera.plane_coords(curve.points[::2]))
    arc = np.arange(len(pts), dtype=np.float64)  # ~1 mm spacing
    d = cdist(pts, pts)
    d[np.abs(arc[:, None] - arc[None, :]) < min_arc_mm] = np.inf
    return bool(d.min() >= min_gap_px)


def observable(curve, calib: CalibrationSet) -> bool:
    return all(in_raw_view(curve, cam) and projection_separated(curve, cam)
               for cam in (calib.top, calib.front))


DEFAULT_RANGES = {
    "insertion_mm": (40.0, 110.0),
    "knob1_deg": (-120.0, 120.0),
    "knob2_deg": (-90.0, 90.0),
    "roll_deg": (-180.0, 180.0),
}


def sample_state(rng: np.random.Generator, calib: CalibrationSet,
                 geom: CatheterGeometry | None = None,
                 ranges: dict | None = None,
                 max_tries: int = 200) -> CatheterState:
    """One uniformly random observable state (rejection sampling)."""
    geom = geom or CatheterGeometry()
    r = {**DEFAULT_RANGES, **(ranges or {})}
    for _ in range(max_tries):
        state = CatheterState(
            insertion_mm=rng.uniform(*r["insertion_mm"]),
            knob1_deg=rng.uniform(*r["knob1_deg"]),
            knob2_deg=rng.uniform(*r["knob2_deg"]),
            roll_deg=rng.uniform(*r["roll_deg"]),
        )
        if observable(forward_kinematics(state, geom), calib):
            return state
    raise RuntimeError(f"no observable state found in {max_tries} draws")


def sample_states(n: int, rng: np.random.Generator, calib: CalibrationSet,
                  geom: CatheterGeometry | None = None,
                  ranges: dict | None = None) -> list[CatheterState]:
    return [sample_state(rng, calib, geom, ranges) for _ in range(n)]


def walk_states(n: int, rng: np.random.Generator, calib: CalibrationSet,
                geom: CatheterGeometry | None = None,
                dt: float = 1.0 / 30.0,
                start: CatheterState | None = None) -> list[CatheterState]:
    """Smooth control trajectory staying inside the observable regime.

    Rates follow a bounded random walk; a step that would leave the
    observable regime is dropped (the operator 'backs off').
    """
    geom = geom or CatheterGeometry()
    state = start or CatheterState(insertion_mm=60.0)
    rates = np.zeros(4)
    limits = np.array([25.0, 60.0, 45.0, 90.0])  # mm/s, deg/s x3
    states = []
    for _ in range(n):
        rates = np.clip(rates + rng.normal(0.0, 0.35, 4) * limits * dt * 4.0,
                        -limits, limits)
        candidate = CatheterState(
            insertion_mm=min(max(state.insertion_mm + rates[0] * dt, 40.0), 110.0),
            knob1_deg=min(max(state.knob1_deg + rates[1] * dt, -115.0), 115.0),
            knob2_deg=min(max(state.knob2_deg + rates[2] * dt, -85.0), 85.0),
            roll_deg=state.roll_deg + rates[3] * dt,
        ).wrapped()
        if observable(forward_kinematics(candidate, geom), calib):
            state = candidate
        else:
            rates *= -0.5
        states.append(state)
    return states
