"""Config file I/O.

All operator-facing configuration is INI-style key-value text:

* catheter geometry  — section ``[catheter]``
* pipeline tuning    — section ``[pipeline]``
* camera calibration — sections ``[camera.top]`` and ``[camera.front]``

Point lists are written as comma-separated ``x y`` pairs.
"""

from __future__ import annotations

import configparser
from dataclasses import asdict, fields

import numpy as np

from .errors import ParameterError
from .simulator import CatheterGeometry
from .synth import CalibrationSet, CameraModel, make_camera
from .vision import PipelineConfig


def _parser() -> configparser.ConfigParser:
    return configparser.ConfigParser(inline_comment_prefixes=("#", ";"))


def _load_section(parser, section, cls):
    if section not in parser:
        raise ParameterError(f"missing [{section}] section")
    kwargs = {}
    sec = parser[section]
    for f in fields(cls):
        if f.name not in sec:
            continue
        raw = sec[f.name]
        if f.type in ("int", int):
            kwargs[f.name] = int(raw)
        elif f.type in ("float", float):
            kwargs[f.name] = float(raw)
        elif f.type in ("bool", bool):
            lowered = raw.strip().lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ParameterError(f"{section}.{f.name}: not a boolean: {raw!r}")
            kwargs[f.name] = lowered in ("true", "1", "yes")
        else:
            kwargs[f.name] = raw
    return cls(**kwargs)


def _write_section(parser, section, obj):
    parser[section] = {k: str(v) for k, v in asdict(obj).items()}


# ---------------------------------------------------------------------------
# Catheter geometry
# ---------------------------------------------------------------------------

def load_geometry(path) -> CatheterGeometry:
    parser = _parser()
    with open(path) as f:
        parser.read_file(f)
    return _load_section(parser, "catheter", CatheterGeometry)


def save_geometry(path, geom: CatheterGeometry) -> None:
    parser = _parser()
    _write_section(parser, "catheter", geom)
    with open(path, "w") as f:
        parser.write(f)


# ---------------------------------------------------------------------------
# Pipeline config
# ---------------------------------------------------------------------------

def load_pipeline_config(path) -> PipelineConfig:
    parser = _parser()
    with open(path) as f:
        parser.read_file(f)
    return _load_section(parser, "pipeline", PipelineConfig)


def save_pipeline_config(path, cfg: PipelineConfig) -> None:
    parser = _parser()
    _write_section(parser, "pipeline", cfg)
    with open(path, "w") as f:
        parser.write(f)


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

def _fmt_points(pts) -> str:
    return ", ".join(f"{x:.6g} {y:.6g}" for x, y in np.asarray(pts).reshape(-1, 2))


def _parse_points(text: str) -> np.ndarray:
    pts = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        x, y = chunk.split()
        pts.append((float(x), float(y)))
    return np.asarray(pts, dtype=np.float64)


def _camera_to_section(cam: CameraModel) -> dict:
    return {
        "raw_size": f"{cam.raw_size[0]} {cam.raw_size[1]}",
        "rect_size": f"{cam.rect_size[0]} {cam.rect_size[1]}",
        "mm_per_px": f"{cam.mm_per_px:.9g}",
        "inlet_px": f"{cam.inlet_px[0]:.6g} {cam.inlet_px[1]:.6g}",
        "fiducials_px": _fmt_points(cam.fiducials_px),
        "fiducials_mm": _fmt_points(cam.fiducials_mm),
        "homography": " ".join(f"{v:.17g}" for v in cam.homography.ravel()),
    }


def _camera_from_section(plane: str, sec) -> CameraModel:
    def pair(key, cast=float):
        a, b = sec[key].split()
        return (cast(a), cast(b))

    homography = None
    if "homography" in sec:
        vals = [float(v) for v in sec["homography"].split()]
        if len(vals) != 9:
            raise ParameterError("homography must have 9 values")
        homography = np.asarray(vals).reshape(3, 3)
    return make_camera(
        plane,
        fiducials_px=_parse_points(sec["fiducials_px"]),
        fiducials_mm=_parse_points(sec["fiducials_mm"]),
        raw_size=pair("raw_size", int),
        rect_size=pair("rect_size", int),
        mm_per_px=float(sec["mm_per_px"]),
        inlet_px=pair("inlet_px"),
        homography=homography,
    )


def load_calibration(path) -> CalibrationSet:
    parser = _parser()
    with open(path) as f:
        parser.read_file(f)
    for section in ("camera.top", "camera.front"):
        if section not in parser:
            raise ParameterError(f"missing [{section}] section in {path}")
    return CalibrationSet(
        top=_camera_from_section("top", parser["camera.top"]),
        front=_camera_from_section("front", parser["camera.front"]),
    )


def save_calibration(path, calib: CalibrationSet) -> None:
    parser = _parser()
    parser["camera.top"] = _camera_to_section(calib.top)
    parser["camera.front"] = _camera_to_section(calib.front)
    with open(path, "w") as f:
        parser.write(f)


def default_calibration() -> CalibrationSet:
    """The stock synthetic rig: 640x480, 0.25 mm/px, mild keystone views.

    Fiducials sit at the corners of the 140 x 110 mm working area of each
    plane; the inlet (world origin) is 20 px inside the left image edge.
    """
    fid_mm = [(0.0, -55.0), (140.0, -55.0), (140.0, 55.0), (0.0, 55.0)]
    top = make_camera(
        "top",
        fiducials_px=[(26.0, 27.0), (573.0, 15.0), (585.0, 451.0), (17.0, 466.0)],
        fiducials_mm=fid_mm,
    )
    front = make_camera(
        "front",
        fiducials_px=[(24.0, 18.0), (580.0, 28.0), (572.0, 462.0), (14.0, 452.0)],
        fiducials_mm=fid_mm,
    )
    return CalibrationSet(top=top, front=front)


def load_fiducials_file(path) -> dict:
    """Raw fiducial measurements for ``cathtrack calibrate``.

    Same sections/keys as the calibration file minus the homography.
    """
    parser = _parser()
    with open(path) as f:
        parser.read_file(f)
    out = {}
    for plane in ("top", "front"):
        section = f"camera.{plane}"
        if section not in parser:
            raise ParameterError(f"missing [{section}] section in {path}")
        out[plane] = parser[section]
    return out
