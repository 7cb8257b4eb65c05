"""Parametric catheter model.

Generates ground-truth 3D centerlines from control inputs using a
piecewise-constant-curvature chain: a straight run from the inlet along +X,
a proximal arc driven by knob 2, then a distal arc driven by knob 1 whose
bend plane is rotated about the local tangent by the roll angle.

The curve is produced as a polyline of chord steps (spacing <= the
configured sample spacing) whose summed chord length equals the insertion
depth exactly; the chord directions follow the midpoint tangents of the
underlying smooth arcs, so the polyline converges to the analytic
constant-curvature arc at O(spacing^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InvalidStateError


def wrap_deg(angle: float) -> float:
    """Wrap an angle in degrees to [-180, 180)."""
    return (angle + 180.0) % 360.0 - 180.0


@dataclass(frozen=True)
class CatheterGeometry:
    """Mechanical description of the simulated catheter."""

    distal_length_mm: float = 35.0
    proximal_length_mm: float = 45.0
    max_insertion_mm: float = 140.0
    knob_limit_deg: float = 180.0
    sample_spacing_mm: float = 0.5


@dataclass(frozen=True)
class CatheterState:
    """Control inputs: insertion depth, two knob bends, roll about the axis."""

    insertion_mm: float = 0.0
    knob1_deg: float = 0.0
    knob2_deg: float = 0.0
    roll_deg: float = 0.0

    def wrapped(self) -> "CatheterState":
        return replace(self, roll_deg=wrap_deg(self.roll_deg))


@dataclass(frozen=True)
class ControlRates:
    """Signed rates applied by :func:`step` (per second)."""

    insertion_mm_s: float = 0.0
    knob1_deg_s: float = 0.0
    knob2_deg_s: float = 0.0
    roll_deg_s: float = 0.0


@dataclass(frozen=True)
class CatheterCurve:
    """Ordered 3D centerline in mm, tip first, entry (inlet) last."""

    points: np.ndarray  # (N, 3) float64
    length_mm: float = field(default=0.0)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        object.__setattr__(self, "length_mm", float(seg.sum()))

    @property
    def tip(self) -> np.ndarray:
        return self.points[0]

    @property
    def entry(self) -> np.ndarray:
        return self.points[-1]


def _validate_state(state: CatheterState, geom: CatheterGeometry) -> None:
    if not math.isfinite(state.insertion_mm) or state.insertion_mm < 0.0:
        raise InvalidStateError(f"insertion {state.insertion_mm} mm is negative")
    if state.insertion_mm > geom.max_insertion_mm:
        raise InvalidStateError(
            f"insertion {state.insertion_mm} mm exceeds max {geom.max_insertion_mm} mm"
        )
    lim = geom.knob_limit_deg
    for name, angle in (("knob1", state.knob1_deg), ("knob2", state.knob2_deg)):
        if not math.isfinite(angle) or abs(angle) > lim + 1e-9:
            raise InvalidStateError(f"{name} angle {angle} deg outside +/-{lim} deg")


def _step_sizes(length: float, spacing: float) -> list[float]:
    """Chord step sizes summing to ``length`` exactly, each <= spacing."""
    if length <= 0.0:
        return []
    n = int(length / spacing)
    rem = length - n * spacing
    steps = [spacing] * n
    if rem > 1e-12:
        steps.append(rem)
    elif not steps:
        steps.append(length)
    return steps


def forward_kinematics(state: CatheterState, geom: CatheterGeometry | None = None) -> CatheterCurve:
    """Ground-truth centerline for a control state.

    Marches entry -> tip through the straight / proximal-arc / distal-arc
    sections, then reverses so the returned curve is tip-first. The exposed
    part of each articulating segment bends with that segment's full-knob
    curvature (knob angle spread over the full segment length).
    """
    geom = geom or CatheterGeometry()
    _validate_state(state, geom)

    s = state.insertion_mm
    if s == 0.0:
        pts = np.zeros((2, 3))
        return CatheterCurve(points=pts)

    l1, l2 = geom.distal_length_mm, geom.proximal_length_mm
    d1 = min(s, l1)                      # exposed distal length
    d2 = min(max(s - l1, 0.0), l2)       # exposed proximal length
    d0 = max(s - l1 - l2, 0.0)           # straight run at the entry
    k1 = math.radians(state.knob1_deg) / l1
    k2 = math.radians(state.knob2_deg) / l2
    roll = math.radians(state.roll_deg)

    p = np.zeros(3)
    t = np.array([1.0, 0.0, 0.0])  # local tangent
    n = np.array([0.0, 1.0, 0.0])  # bend direction (knob+ bends toward n)
    pts = [p.copy()]

    def bend(theta: float):
        # rotate the (t, n) pair in their own plane by theta
        nonlocal t, n
        c, si = math.cos(theta), math.sin(theta)
        t, n = t * c + n * si, -t * si + n * c

    def march(length: float, kappa: float):
        nonlocal p
        for h in _step_sizes(length, geom.sample_spacing_mm):
            bend(kappa * h / 2.0)   # midpoint tangent for this chord
            p = p + t * h
            bend(kappa * h / 2.0)
            pts.append(p.copy())

    march(d0, 0.0)
    march(d2, k2)
    if d1 > 0.0:
        # roll re-orients the distal bend plane about the local tangent
        b = np.cross(t, n)
        n = n * math.cos(roll) + b * math.sin(roll)
        march(d1, k1)

    return CatheterCurve(points=np.asarray(pts[::-1]))


def step(
    state: CatheterState,
    rates: ControlRates,
    dt: float,
    geom: CatheterGeometry | None = None,
) -> CatheterState:
    """Advance a state by rate * dt, clamping to limits; roll wraps."""
    if dt <= 0.0:
        raise InvalidStateError(f"dt must be positive, got {dt}")
    geom = geom or CatheterGeometry()
    lim = geom.knob_limit_deg
    return CatheterState(
        insertion_mm=min(max(state.insertion_mm + rates.insertion_mm_s * dt, 0.0),
                         geom.max_insertion_mm),
        knob1_deg=min(max(state.knob1_deg + rates.knob1_deg_s * dt, -lim), lim),
        knob2_deg=min(max(state.knob2_deg + rates.knob2_deg_s * dt, -lim), lim),
        roll_deg=wrap_deg(state.roll_deg + rates.roll_deg_s * dt),
    )
