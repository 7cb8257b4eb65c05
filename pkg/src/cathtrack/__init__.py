"""Biplane catheter tracking testbed.

A software rig that mirrors a camera-based catheter tracker: a parametric
catheter simulator feeds a synthetic biplane camera pair, a per-view vision
pipeline reconstructs the centerline, the two views fuse into a 3D K-point
track with roll from a quadrature encoder, and the result streams over
WebSocket to drive a six-target navigation task.
"""

__version__ = "0.1.0"

from .simulator import (CatheterCurve, CatheterGeometry, CatheterState,
                        ControlRates, forward_kinematics, step, wrap_deg)
from .synth import (BiplaneFrame, CalibrationSet, CameraModel, NoiseSpec,
                    make_camera, project, rasterize, record_sequence)
from .vision import Path2D, PipelineConfig
from .fusion import Track3D, fuse, fuse_frame, fuse_stream

__all__ = [
    "BiplaneFrame", "CalibrationSet", "CameraModel", "CatheterCurve",
    "CatheterGeometry", "CatheterState", "ControlRates", "NoiseSpec",
    "Path2D", "PipelineConfig", "Track3D", "forward_kinematics", "fuse",
    "fuse_frame", "fuse_stream", "make_camera", "project", "rasterize",
    "record_sequence", "step", "wrap_deg",
]
