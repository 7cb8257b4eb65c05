"""Synthetic biplane rig.

Renders ground-truth catheter curves into raw grayscale frame pairs the way
the physical vision box sees them: a dark tube over a bright backlit
background, viewed by a TOP camera (world X,Y) and a FRONT camera (world
X,Z) through a mild perspective that the tracking pipeline must undo.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path as FsPath

import numpy as np

from .errors import ParameterError
from .simulator import CatheterCurve
from .vision import MM, RAW_PX, Path2D, apply_homography, fit_homography

TOP = "top"
FRONT = "front"


@dataclass(frozen=True, eq=False)
class CameraModel:
    """One camera of the biplane rig.

    ``homography`` maps raw pixels into the rectified metric ROI frame in
    which ``inlet_px`` marks the world origin and one pixel spans
    ``mm_per_px`` millimeters. TOP images the world (X, Y) plane, FRONT the
    (X, Z) plane; the first plane axis maps to image u, the second to v.
    """

    plane: str
    raw_size: tuple[int, int] = (640, 480)
    rect_size: tuple[int, int] = (640, 480)
    mm_per_px: float = 0.25
    inlet_px: tuple[float, float] = (20.0, 240.0)
    fiducials_px: np.ndarray = None
    fiducials_mm: np.ndarray = None
    homography: np.ndarray = None

    def __post_init__(self):
        if self.plane not in (TOP, FRONT):
            raise ParameterError(f"plane must be 'top' or 'front', got {self.plane!r}")
        if self.mm_per_px <= 0:
            raise ParameterError(f"mm_per_px must be positive, got {self.mm_per_px}")

    def rect_px_of_mm(self, pts_mm: np.ndarray) -> np.ndarray:
        pts_mm = np.asarray(pts_mm, dtype=np.float64).reshape(-1, 2)
        return pts_mm / self.mm_per_px + np.asarray(self.inlet_px)

    def plane_coords(self, pts_3d: np.ndarray) -> np.ndarray:
        """Orthogonal projection of world points onto this camera's plane."""
        pts_3d = np.asarray(pts_3d, dtype=np.float64).reshape(-1, 3)
        if self.plane == TOP:
            return pts_3d[:, (0, 1)]
        return pts_3d[:, (0, 2)]


def make_camera(plane: str,
                fiducials_px,
                fiducials_mm,
                raw_size=(640, 480),
                rect_size=(640, 480),
                mm_per_px: float = 0.25,
                inlet_px=(20.0, 240.0),
                homography: np.ndarray | None = None) -> CameraModel:
    """Build a camera, fitting the rectification homography from fiducials
    when one is not supplied."""
    fid_px = np.asarray(fiducials_px, dtype=np.float64).reshape(-1, 2)
    fid_mm = np.asarray(fiducials_mm, dtype=np.float64).reshape(-1, 2)
    cam = CameraModel(plane=plane, raw_size=tuple(raw_size), rect_size=tuple(rect_size),
                      mm_per_px=float(mm_per_px), inlet_px=tuple(inlet_px),
                      fiducials_px=fid_px, fiducials_mm=fid_mm,
                      homography=np.eye(3))
    if homography is None:
        homography = fit_homography(fid_px, cam.rect_px_of_mm(fid_mm))
    object.__setattr__(cam, "homography", np.asarray(homography, dtype=np.float64))
    return cam


@dataclass(frozen=True)
class CalibrationSet:
    top: CameraModel
    front: CameraModel

    def camera(self, plane: str) -> CameraModel:
        return self.top if plane == TOP else self.front


@dataclass(frozen=True)
class BiplaneFrame:
    """One synchronized pair of raw grayscale images."""

    top: np.ndarray
    front: np.ndarray
    timestamp_ms: int = 0


@dataclass(frozen=True)
class NoiseSpec:
    """Imaging defects injected by :func:`rasterize`.

    ``gradient`` is the peak-to-peak illumination drop across the frame;
    speckle discs are dark blobs sized to exercise artifact removal.
    """

    sigma: float = 0.0
    gradient: float = 0.0
    speckle_count: int = 0
    speckle_radius: tuple[float, float] = (1.0, 3.0)
    speckle_intensity: float = 90.0
    seed: int = 0


CLEAN = NoiseSpec()


def project(curve: CatheterCurve, camera: CameraModel) -> Path2D:
    """Project a 3D curve into raw pixel coordinates of one camera.

    Points may land outside the frame; clipping happens at rasterization.
    """
    plane_mm = camera.plane_coords(curve.points)
    rect = camera.rect_px_of_mm(plane_mm)
    raw = apply_homography(np.linalg.inv(camera.homography), rect)
    return Path2D(points=raw, space=RAW_PX)


def project_mm(curve: CatheterCurve, camera: CameraModel) -> Path2D:
    """Noise-free plane path in millimeters (fusion ground-truth helper)."""
    return Path2D(points=camera.plane_coords(curve.points), space=MM)


def rasterize(path: Path2D, camera: CameraModel, noise: NoiseSpec | None = None,
              tube_width_px: float = 6.0, background: float = 230.0,
              tube_intensity: float = 90.0) -> np.ndarray:
    """Draw a catheter path as a dark anti-aliased tube on a bright field.

    Deterministic for a given ``noise.seed``. An empty path produces a
    background-only frame (the no-catheter case).
    """
    noise = noise or CLEAN
    w, h = camera.raw_size
    rng = np.random.default_rng(noise.seed)

    img = np.full((h, w), float(background), dtype=np.float32)
    if noise.gradient != 0.0:
        theta = rng.uniform(0.0, 2.0 * np.pi)
        u, v = np.meshgrid(np.arange(w, dtype=np.float32), np.arange(h, dtype=np.float32))
        ramp = ((u - w / 2) * np.cos(theta) + (v - h / 2) * np.sin(theta)) / max(w, h)
        img += noise.gradient * ramp

    cov = _path_coverage(path.points, (h, w), tube_width_px / 2.0)
    img = img * (1.0 - cov) + tube_intensity * cov

    for _ in range(noise.speckle_count):
        cx = rng.uniform(0, w - 1)
        cy = rng.uniform(0, h - 1)
        r = rng.uniform(*noise.speckle_radius)
        scov = _disc_coverage((h, w), cx, cy, r)
        img = img * (1.0 - scov) + noise.speckle_intensity * scov

    if noise.sigma > 0.0:
        img = img + rng.normal(0.0, noise.sigma, size=img.shape)

    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def _path_coverage(pts: np.ndarray, shape: tuple[int, int], radius: float) -> np.ndarray:
    h, w = shape
    cov = np.zeros((h, w), dtype=np.float32)
    if len(pts) == 0:
        return cov
    if len(pts) == 1:
        return np.maximum(cov, _disc_coverage(shape, pts[0, 0], pts[0, 1], radius))
    pad = radius + 1.5
    for a, b in zip(pts[:-1], pts[1:]):
        x0 = int(np.floor(min(a[0], b[0]) - pad)); x1 = int(np.ceil(max(a[0], b[0]) + pad)) + 1
        y0 = int(np.floor(min(a[1], b[1]) - pad)); y1 = int(np.ceil(max(a[1], b[1]) + pad)) + 1
        x0, x1 = max(x0, 0), min(x1, w)
        y0, y1 = max(y0, 0), min(y1, h)
        if x0 >= x1 or y0 >= y1:
            continue
        gx, gy = np.meshgrid(np.arange(x0, x1, dtype=np.float32),
                             np.arange(y0, y1, dtype=np.float32))
        dist = _segment_distance(gx, gy, a, b)
        np.maximum(cov[y0:y1, x0:x1],
                   np.clip(radius + 0.5 - dist, 0.0, 1.0),
                   out=cov[y0:y1, x0:x1])
    return cov


def _segment_distance(gx, gy, a, b):
    ab = b - a
    denom = float(ab[0] * ab[0] + ab[1] * ab[1])
    if denom < 1e-12:
        return np.hypot(gx - a[0], gy - a[1])
    t = ((gx - a[0]) * ab[0] + (gy - a[1]) * ab[1]) / denom
    t = np.clip(t, 0.0, 1.0)
    return np.hypot(gx - (a[0] + t * ab[0]), gy - (a[1] + t * ab[1]))


def _disc_coverage(shape, cx, cy, radius):
    h, w = shape
    cov = np.zeros((h, w), dtype=np.float32)
    pad = radius + 1.5
    x0, x1 = max(int(cx - pad), 0), min(int(cx + pad) + 2, w)
    y0, y1 = max(int(cy - pad), 0), min(int(cy + pad) + 2, h)
    if x0 >= x1 or y0 >= y1:
        return cov
    gx, gy = np.meshgrid(np.arange(x0, x1, dtype=np.float32),
                         np.arange(y0, y1, dtype=np.float32))
    dist = np.hypot(gx - cx, gy - cy)
    cov[y0:y1, x0:x1] = np.clip(radius + 0.5 - dist, 0.0, 1.0)
    return cov


def render_frame(curve: CatheterCurve, calib: CalibrationSet,
                 noise: NoiseSpec | None = None, timestamp_ms: int = 0,
                 **raster_kw) -> BiplaneFrame:
    """Render both views of one curve into a BiplaneFrame."""
    noise = noise or CLEAN
    # decorrelate the two views' noise without needing two seeds
    front_noise = noise if noise == CLEAN else replace(noise, seed=noise.seed + 0x5F3759DF)
    return BiplaneFrame(
        top=rasterize(project(curve, calib.top), calib.top, noise, **raster_kw),
        front=rasterize(project(curve, calib.front), calib.front, front_noise, **raster_kw),
        timestamp_ms=timestamp_ms,
    )


# ---------------------------------------------------------------------------
# PGM + sequence files
# ---------------------------------------------------------------------------

def write_pgm(path, img: np.ndarray) -> None:
    """Binary PGM (P5), maxval 255."""
    h, w = img.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(img, dtype=np.uint8).tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    tokens = []
    i = 0
    while len(tokens) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        if data[i : i + 1] == b"#":
            while i < len(data) and data[i] != 0x0A:
                i += 1
            continue
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        tokens.append(data[i:j])
        i = j
    if tokens[0] != b"P5":
        raise ParameterError(f"not a binary PGM: magic {tokens[0]!r}")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ParameterError(f"unsupported PGM maxval {maxval}")
    i += 1  # single whitespace after maxval
    return np.frombuffer(data[i : i + w * h], dtype=np.uint8).reshape(h, w).copy()


MANIFEST_NAME = "manifest.json"
GROUND_TRUTH_NAME = "ground_truth.jsonl"


def record_sequence(states, calib: CalibrationSet, out_dir,
                    geometry=None, noise: NoiseSpec | None = None,
                    fps: float = 30.0, **raster_kw) -> int:
    """Render a state sequence to disk: PGM pairs + manifest + ground truth.

    Returns the number of frames written.
    """
    from .simulator import CatheterGeometry, forward_kinematics

    out = FsPath(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    geometry = geometry or CatheterGeometry()
    noise = noise or CLEAN

    entries = []
    with open(out / GROUND_TRUTH_NAME, "w") as gt:
        for i, state in enumerate(states):
            t_ms = int(round(i * 1000.0 / fps))
            curve = forward_kinematics(state, geometry)
            per_frame = noise if noise == CLEAN else replace(noise, seed=noise.seed + 2 * i)
            frame = render_frame(curve, calib, per_frame, timestamp_ms=t_ms, **raster_kw)
            top_name = f"frame_{i:05d}_top.pgm"
            front_name = f"frame_{i:05d}_front.pgm"
            write_pgm(out / top_name, frame.top)
            write_pgm(out / front_name, frame.front)
            entries.append({"index": i, "timestamp_ms": t_ms,
                            "top": top_name, "front": front_name})
            gt.write(json.dumps({
                "index": i,
                "timestamp_ms": t_ms,
                "state": {"insertion_mm": state.insertion_mm,
                          "knob1_deg": state.knob1_deg,
                          "knob2_deg": state.knob2_deg,
                          "roll_deg": state.roll_deg},
                "points_mm": np.round(curve.points, 6).tolist(),
            }) + "\n")

    manifest = {"version": 1, "fps": fps, "count": len(entries), "frames": entries}
    with open(out / MANIFEST_NAME, "w") as f:
        json.dump(manifest, f, indent=1)
    return len(entries)


def load_sequence(seq_dir):
    """Yield BiplaneFrames recorded by :func:`record_sequence`, in order."""
    seq = FsPath(seq_dir)
    with open(seq / MANIFEST_NAME) as f:
        manifest = json.load(f)
    for entry in manifest["frames"]:
        yield BiplaneFrame(top=read_pgm(seq / entry["top"]),
                           front=read_pgm(seq / entry["front"]),
                           timestamp_ms=entry["timestamp_ms"])


def load_ground_truth(seq_dir) -> list[dict]:
    records = []
    with open(FsPath(seq_dir) / GROUND_TRUTH_NAME) as f:
        for line in f:
            if line.strip():
                records.append(json.loads(line))
    return records
