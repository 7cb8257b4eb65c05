"""WebSocket wire protocol.

Messages are JSON text frames. Encoding is canonical (sorted keys, no
whitespace) so a frame encodes to exactly one byte sequence; decoding
ignores unknown fields for forward compatibility and rejects non-finite
numbers.

Server -> client: ``frame`` messages (state snapshots, never deltas).
Client -> server: ``control`` (actuation rates), ``session`` (start/reset),
``mode`` (2D/3D view, recorded to the session log).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

from .errors import ProtocolError, SchemaError

RATE_KEYS = ("insertion_mm_s", "knob1_deg_s", "knob2_deg_s", "roll_deg_s")
VIEW_MODES = ("2D", "3D")
SESSION_ACTIONS = ("start", "reset")


@dataclass(frozen=True)
class FrameMessage:
    """One state snapshot broadcast to every client."""

    seq: int
    timestamp_ms: int
    points: tuple            # K rows of (x, y, z) mm in model space; () if lost
    roll_deg: float
    consistency_mm: float
    beam: dict | None        # {"vertices": 4x[x,y,z], "end": [x,y,z]}
    target: dict | None      # {"id", "center", "radius_mm"}
    feedback: dict | None    # {"distance_mm", "angle_deg"}
    metrics: dict            # {"t_s", "n_reached", "t_per_target_s" | None}

    def __post_init__(self):
        object.__setattr__(self, "points",
                           tuple(tuple(float(v) for v in p) for p in self.points))


@dataclass(frozen=True)
class ControlMessage:
    """Client input: exactly one of the three message kinds."""

    type: str
    rates: dict | None = None    # type == "control"
    action: str | None = None    # type == "session"
    view: str | None = None      # type == "mode"


def _reject_constant(name: str):
    raise SchemaError(f"non-finite number {name} is not allowed", field="*")


def _loads(data: bytes) -> dict:
    if isinstance(data, bytes):
        text = data.decode("utf-8", errors="strict")
    else:
        text = data
    try:
        payload = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON at byte {exc.pos}: {exc.msg}",
                            offset=exc.pos) from None
    if not isinstance(payload, dict):
        raise SchemaError("payload must be a JSON object", field="*")
    return payload


def _dumps(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")


# ---------------------------------------------------------------------------
# Frame messages
# ---------------------------------------------------------------------------

def encode_frame(msg: FrameMessage) -> bytes:
    payload = {
        "type": "frame",
        "seq": msg.seq,
        "timestamp_ms": msg.timestamp_ms,
        "points": [list(p) for p in msg.points],
        "roll_deg": msg.roll_deg,
        "consistency_mm": msg.consistency_mm,
        "beam": msg.beam,
        "target": msg.target,
        "feedback": msg.feedback,
        "metrics": msg.metrics,
    }
    return _dumps(payload)


def _require(payload: dict, key: str, kinds, where: str = "frame"):
    if key not in payload:
        raise SchemaError(f"{where} message missing field '{key}'", field=key)
    value = payload[key]
    if kinds is not None and not isinstance(value, kinds):
        raise SchemaError(f"field '{key}' has type {type(value).__name__}", field=key)
    return value


def _check_finite(key: str, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"field '{key}' must be a number", field=key)
    if not math.isfinite(value):
        raise SchemaError(f"field '{key}' must be finite", field=key)
    return float(value)


def decode_frame(data: bytes) -> FrameMessage:
    payload = _loads(data)
    if payload.get("type") != "frame":
        raise SchemaError(f"expected type 'frame', got {payload.get('type')!r}",
                          field="type")
    points = _require(payload, "points", list)
    rows = []
    for i, row in enumerate(points):
        if not isinstance(row, list) or len(row) != 3:
            raise SchemaError(f"points[{i}] must be [x, y, z]", field="points")
        rows.append(tuple(_check_finite(f"points[{i}]", v) for v in row))
    metrics = _require(payload, "metrics", dict)
    return FrameMessage(
        seq=int(_require(payload, "seq", int)),
        timestamp_ms=int(_require(payload, "timestamp_ms", int)),
        points=tuple(rows),
        roll_deg=_check_finite("roll_deg", _require(payload, "roll_deg", (int, float))),
        consistency_mm=_check_finite("consistency_mm",
                                     _require(payload, "consistency_mm", (int, float))),
        beam=_require(payload, "beam", (dict, type(None))),
        target=_require(payload, "target", (dict, type(None))),
        feedback=_require(payload, "feedback", (dict, type(None))),
        metrics=metrics,
    )


# ---------------------------------------------------------------------------
# Control messages
# ---------------------------------------------------------------------------

def encode_control(msg: ControlMessage) -> bytes:
    payload: dict = {"type": msg.type}
    if msg.type == "control":
        payload["rates"] = msg.rates
    elif msg.type == "session":
        payload["action"] = msg.action
    elif msg.type == "mode":
        payload["view"] = msg.view
    return _dumps(payload)


def decode_control(data: bytes) -> ControlMessage:
    payload = _loads(data)
    kind = payload.get("type")
    if kind == "control":
        rates_in = _require(payload, "rates", dict, where="control")
        # unknown rate keys are ignored for forward compatibility
        rates = {}
        for key in RATE_KEYS:
            if key in rates_in:
                rates[key] = _check_finite(f"rates.{key}", rates_in[key])
        return ControlMessage(type="control", rates=rates)
    if kind == "session":
        action = _require(payload, "action", str, where="session")
        if action not in SESSION_ACTIONS:
            raise SchemaError(f"unknown session action {action!r}", field="action")
        return ControlMessage(type="session", action=action)
    if kind == "mode":
        view = _require(payload, "view", str, where="mode")
        if view not in VIEW_MODES:
            raise SchemaError(f"view must be one of {VIEW_MODES}, got {view!r}",
                              field="view")
        return ControlMessage(type="mode", view=view)
    raise ProtocolError(f"unknown message type {kind!r}")


def error_payload(exc: Exception) -> bytes:
    """Wire form of a per-client protocol error."""
    info: dict = {"type": "error", "message": str(exc)}
    offset = getattr(exc, "offset", None)
    if offset is not None:
        info["offset"] = offset
    fld = getattr(exc, "field", None)
    if fld is not None:
        info["field"] = fld
    return _dumps(info)
