"""Affine registration of tracking-space tracks into heart-model space."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import RankDeficiencyError
from .fusion import Track3D


@dataclass(frozen=True)
class AffineTransform:
    """x -> linear @ x + translation, in millimeters."""

    linear: np.ndarray       # (3, 3)
    translation: np.ndarray  # (3,)
    rms_residual: float = field(default=0.0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "linear",
                           np.asarray(self.linear, dtype=np.float64).reshape(3, 3))
        object.__setattr__(self, "translation",
                           np.asarray(self.translation, dtype=np.float64).reshape(3))

    @classmethod
    def identity(cls) -> "AffineTransform":
        return cls(linear=np.eye(3), translation=np.zeros(3))


def transform_points(t: AffineTransform, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 3)
    return pts @ t.linear.T + t.translation


def compose(a: AffineTransform, b: AffineTransform) -> AffineTransform:
    """Transform equal to applying ``b`` first, then ``a``."""
    return AffineTransform(linear=a.linear @ b.linear,
                           translation=a.linear @ b.translation + a.translation)


def fit_affine(src_pts, dst_pts) -> AffineTransform:
    """Least-squares affine map sending ``src_pts`` onto ``dst_pts``.

    Exact (residual ~ machine epsilon) when the correspondences are
    generated by an affine map. Requires >= 4 pairs that are not all
    coplanar; a coplanar set raises RankDeficiencyError carrying the
    unconstrained direction (the common plane's normal).
    """
    src = np.asarray(src_pts, dtype=np.float64).reshape(-1, 3)
    dst = np.asarray(dst_pts, dtype=np.float64).reshape(-1, 3)
    if len(src) != len(dst):
        raise ValueError(f"point counts differ: {len(src)} vs {len(dst)}")
    if len(src) < 4:
        raise RankDeficiencyError(f"need >= 4 pairs, got {len(src)}")

    centered = src - src.mean(axis=0)
    _, sing, vh = np.linalg.svd(centered, full_matrices=False)
    scale = max(sing[0], 1.0)
    if sing[-1] < 1e-8 * scale:
        normal = vh[-1]
        raise RankDeficiencyError(
            "source points are coplanar; direction "
            f"({normal[0]:+.3f}, {normal[1]:+.3f}, {normal[2]:+.3f}) "
            "is unconstrained",
            direction=normal,
        )

    design = np.hstack([src, np.ones((len(src), 1))])
    coef, _, _, _ = np.linalg.lstsq(design, dst, rcond=None)
    linear = coef[:3].T
    translation = coef[3]
    residual = design @ coef - dst
    rms = float(np.sqrt(np.mean(np.sum(residual ** 2, axis=1))))
    return AffineTransform(linear=linear, translation=translation, rms_residual=rms)


def apply_transform(t: AffineTransform, track: Track3D) -> Track3D:
    """Map a track's points; roll, timestamp and K are unchanged."""
    return replace(track, points=transform_points(t, track.points))


def load_correspondences(path):
    """Read "sx sy sz dx dy dz" lines (mm); '#' starts a comment."""
    src, dst = [], []
    with open(path) as f:
        for ln, line in enumerate(f, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            vals = text.split()
            if len(vals) != 6:
                raise ValueError(f"{path}:{ln}: expected 6 numbers, got {len(vals)}")
            nums = [float(v) for v in vals]
            src.append(nums[:3])
            dst.append(nums[3:])
    return np.asarray(src), np.asarray(dst)


def save_correspondences(path, src_pts, dst_pts) -> None:
    src = np.asarray(src_pts, dtype=np.float64).reshape(-1, 3)
    dst = np.asarray(dst_pts, dtype=np.float64).reshape(-1, 3)
    with open(path, "w") as f:
        f.write("# sx sy sz dx dy dz (mm)\n")
        for s, d in zip(src, dst):
            f.write(" ".join(f"{v:.6g}" for v in (*s, *d)) + "\n")
