import json
from pathlib import Path

import pytest

from cathtrack.errors import ProtocolError, SchemaError
from cathtrack.protocol import (ControlMessage, FrameMessage, decode_control,
                                decode_frame, encode_control, encode_frame,
                                error_payload)

GOLDEN = Path(__file__).parent / "data" / "frame_golden.bin"


def minimal_frame():
    return FrameMessage(
        seq=7,
        timestamp_ms=1234,
        points=((10.0, 0.5, -0.25), (0.0, 0.0, 0.0)),
        roll_deg=12.45,
        consistency_mm=0.125,
        beam={"vertices": [[10.0, -2.0, 0.0], [10.0, 2.0, 0.0],
                           [50.0, 12.0, 0.0], [50.0, -12.0, 0.0]],
              "end": [50.0, 0.0, 0.0]},
        target={"id": "T1", "center": [48.0, 1.0, 0.0], "radius_mm": 5.0},
        feedback={"distance_mm": 2.24, "angle_deg": 1.43},
        metrics={"t_s": 3.25, "n_reached": 0, "t_per_target_s": None},
    )


def random_frame(rng, seq):
    k = int(rng.integers(2, 16))
    pts = tuple(tuple(float(v) for v in row)
                for row in rng.uniform(-80, 80, (k, 3)))
    return FrameMessage(
        seq=seq,
        timestamp_ms=int(rng.integers(0, 10 ** 9)),
        points=pts,
        roll_deg=float(rng.uniform(-180, 180)),
        consistency_mm=float(rng.uniform(0, 9)),
        beam={"vertices": rng.uniform(-50, 50, (4, 3)).tolist(),
              "end": rng.uniform(-50, 50, 3).tolist()} if rng.random() > 0.2 else None,
        target={"id": f"T{seq % 6}", "center": rng.uniform(-50, 50, 3).tolist(),
                "radius_mm": 5.0} if rng.random() > 0.2 else None,
        feedback={"distance_mm": float(rng.uniform(0, 90)),
                  "angle_deg": float(rng.uniform(0, 180))} if rng.random() > 0.2 else None,
        metrics={"t_s": float(rng.uniform(0, 300)),
                 "n_reached": int(rng.integers(0, 7)),
                 "t_per_target_s": None},
    )


def test_golden_frame_bytes():
    encoded = encode_frame(minimal_frame())
    assert encoded == GOLDEN.read_bytes()


def test_round_trip_thousand_random_frames(rng):
    for seq in range(1000):
        msg = random_frame(rng, seq)
        assert decode_frame(encode_frame(msg)) == msg


def test_decode_ignores_unknown_fields():
    payload = json.loads(encode_frame(minimal_frame()))
    payload["zoom_level"] = 4
    payload["metrics"]["extra"] = "x"
    out = decode_frame(json.dumps(payload).encode())
    assert out.seq == 7
    assert out.metrics["extra"] == "x"  # dict payload passes through


def test_frame_schema_errors():
    good = json.loads(encode_frame(minimal_frame()))
    bad = dict(good)
    del bad["points"]
    with pytest.raises(SchemaError) as err:
        decode_frame(json.dumps(bad).encode())
    assert err.value.field == "points"

    bad = json.loads(encode_frame(minimal_frame()))
    bad["points"] = [[1.0, 2.0]]
    with pytest.raises(SchemaError):
        decode_frame(json.dumps(bad).encode())

    bad = json.loads(encode_frame(minimal_frame()))
    bad["type"] = "frames"
    with pytest.raises(SchemaError):
        decode_frame(json.dumps(bad).encode())


def test_malformed_json_reports_offset():
    with pytest.raises(ProtocolError) as err:
        decode_frame(b'{"type": "frame", ')
    assert err.value.offset is not None
    assert "byte" in str(err.value)


def test_nan_rejected():
    with pytest.raises(SchemaError):
        decode_control(b'{"type":"control","rates":{"roll_deg_s":NaN}}')


def test_control_round_trips():
    for msg in (ControlMessage(type="control",
                               rates={"insertion_mm_s": 5.0, "roll_deg_s": -36.0}),
                ControlMessage(type="session", action="start"),
                ControlMessage(type="session", action="reset"),
                ControlMessage(type="mode", view="2D"),
                ControlMessage(type="mode", view="3D")):
        assert decode_control(encode_control(msg)) == msg


def test_unknown_control_type_rejected():
    with pytest.raises(ProtocolError):
        decode_control(b'{"type":"zoom","factor":2}')


def test_control_field_errors():
    with pytest.raises(SchemaError) as err:
        decode_control(b'{"type":"control"}')
    assert err.value.field == "rates"
    with pytest.raises(SchemaError):
        decode_control(b'{"type":"control","rates":{"roll_deg_s":"fast"}}')
    with pytest.raises(SchemaError) as err:
        decode_control(b'{"type":"session","action":"pause"}')
    assert err.value.field == "action"
    with pytest.raises(SchemaError):
        decode_control(b'{"type":"mode","view":"4D"}')


def test_unknown_rate_keys_ignored():
    msg = decode_control(b'{"type":"control","rates":{"roll_deg_s":1.0,"warp":9}}')
    assert msg.rates == {"roll_deg_s": 1.0}


def test_error_payload_contents():
    try:
        decode_control(b'not json')
    except ProtocolError as exc:
        payload = json.loads(error_payload(exc))
    assert payload["type"] == "error"
    assert "offset" in payload
