"""Navigation scene: heart mesh, targets, beam spec.

The scene file is JSON; the mesh is a plain ASCII triangle mesh (OBJ
subset: ``v x y z`` and ``f i j k`` lines, 1-based indices). The stock
scene derives its six targets from canonical catheter poses, so every
target is reachable by construction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np

from .beam import BeamSpec, TargetSpec, beam_geometry
from .fusion import Track3D
from .simulator import CatheterGeometry, CatheterState, forward_kinematics


@dataclass(frozen=True)
class Scene:
    targets: tuple
    beam: BeamSpec = field(default_factory=BeamSpec)
    dwell_ms: int = 500
    mesh: str | None = "heart.obj"


def save_scene(path, scene: Scene) -> None:
    payload = {
        "mesh": scene.mesh,
        "dwell_ms": scene.dwell_ms,
        "beam": {"length_mm": scene.beam.length_mm,
                 "near_width_mm": scene.beam.near_width_mm,
                 "far_width_mm": scene.beam.far_width_mm},
        "targets": [{"id": t.id, "center": np.round(t.center, 6).tolist(),
                     "radius_mm": t.radius_mm} for t in scene.targets],
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=1)


def load_scene(path) -> Scene:
    with open(path) as f:
        payload = json.load(f)
    beam = BeamSpec(**payload.get("beam", {}))
    targets = tuple(TargetSpec(id=t["id"], center=t["center"], radius_mm=t["radius_mm"])
                    for t in payload["targets"])
    return Scene(targets=targets, beam=beam,
                 dwell_ms=int(payload.get("dwell_ms", 500)),
                 mesh=payload.get("mesh"))


# Canonical poses whose beam ends define the stock six-target course.
_COURSE_STATES = (
    CatheterState(insertion_mm=70.0, knob1_deg=15.0, knob2_deg=10.0, roll_deg=0.0),
    CatheterState(insertion_mm=85.0, knob1_deg=-30.0, knob2_deg=20.0, roll_deg=45.0),
    CatheterState(insertion_mm=95.0, knob1_deg=40.0, knob2_deg=-15.0, roll_deg=-60.0),
    CatheterState(insertion_mm=75.0, knob1_deg=-20.0, knob2_deg=-30.0, roll_deg=120.0),
    CatheterState(insertion_mm=100.0, knob1_deg=55.0, knob2_deg=25.0, roll_deg=-135.0),
    CatheterState(insertion_mm=60.0, knob1_deg=-45.0, knob2_deg=5.0, roll_deg=90.0),
)


def default_scene(geom: CatheterGeometry | None = None,
                  beam: BeamSpec | None = None,
                  radius_mm: float = 5.0, dwell_ms: int = 500) -> Scene:
    geom = geom or CatheterGeometry()
    beam = beam or BeamSpec()
    targets = []
    for i, state in enumerate(_COURSE_STATES, 1):
        curve = forward_kinematics(state, geom)
        track = Track3D(points=curve.points, roll_deg=state.roll_deg)
        geo = beam_geometry(track, beam)
        targets.append(TargetSpec(id=f"T{i}", center=geo.end, radius_mm=radius_mm))
    return Scene(targets=tuple(targets), beam=beam, dwell_ms=dwell_ms)


def course_states() -> tuple:
    """Poses that aim the beam at the stock targets, in course order."""
    return _COURSE_STATES


# ---------------------------------------------------------------------------
# Procedural heart-ish mesh (deterministic)
# ---------------------------------------------------------------------------

def heart_mesh(subdivisions: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """(vertices, faces) of a heart-sized blob around the working volume.

    An icosphere is anisotropically scaled to ~110 x 95 x 90 mm, offset so
    the catheter working area sits inside, and given a gentle apex taper.
    Purely a visual stand-in for a segmented patient mesh.
    """
    verts, faces = _icosphere(subdivisions)
    v = verts.copy()
    v[:, 0] *= 55.0
    v[:, 1] *= 47.0
    v[:, 2] *= 45.0
    # taper toward +x (apex) and swell the base a little
    tx = (v[:, 0] / 55.0 + 1.0) / 2.0
    squeeze = 1.0 - 0.35 * tx ** 2
    v[:, 1] *= squeeze
    v[:, 2] *= squeeze
    v[:, 0] += 70.0
    return v, faces


def _icosphere(subdivisions: int) -> tuple[np.ndarray, np.ndarray]:
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    raw = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
           (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
           (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    verts = [np.asarray(p, dtype=np.float64) / np.linalg.norm(p) for p in raw]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    cache: dict[tuple[int, int], int] = {}

    def midpoint(i: int, j: int) -> int:
        key = (min(i, j), max(i, j))
        if key not in cache:
            m = verts[i] + verts[j]
            verts.append(m / np.linalg.norm(m))
            cache[key] = len(verts) - 1
        return cache[key]

    for _ in range(subdivisions):
        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces
    return np.asarray(verts), np.asarray(faces, dtype=np.int64)


def write_obj(path, verts: np.ndarray, faces: np.ndarray) -> None:
    with open(path, "w") as f:
        for x, y, z in verts:
            f.write(f"v {x:.4f} {y:.4f} {z:.4f}\n")
        for a, b, c in faces:
            f.write(f"f {a + 1} {b + 1} {c + 1}\n")


def read_obj(path) -> tuple[np.ndarray, np.ndarray]:
    verts, faces = [], []
    with open(path) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(v) for v in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(v.split("/")[0]) - 1 for v in parts[1:4]])
    return np.asarray(verts), np.asarray(faces, dtype=np.int64)


def ensure_scene_assets(directory) -> FsPath:
    """Write the stock scene + mesh into ``directory`` if missing."""
    directory = FsPath(directory)
    directory.mkdir(parents=True, exist_ok=True)
    scene_path = directory / "scene.json"
    if not scene_path.exists():
        save_scene(scene_path, default_scene())
    mesh_path = directory / "heart.obj"
    if not mesh_path.exists():
        write_obj(mesh_path, *heart_mesh())
    return scene_path
