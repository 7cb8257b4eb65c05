import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cathtrack.encoder import (QuadratureDecoder, QuadratureSample,
                               RollCalibration, RollTracker, angle_to_count,
                               counts_to_angle, decode, parse_serial_line,
                               read_replay, simulate_rotation, write_replay)
from cathtrack.errors import GlitchError, ProtocolError

CAL = RollCalibration()  # ppr 600, ratio 1 -> quantum 0.15 deg


def samples(levels):
    return [QuadratureSample(t_ms=i, a=a, b=b) for i, (a, b) in enumerate(levels)]


def test_forward_cycle_counts_plus_four():
    assert decode(samples([(0, 0), (0, 1), (1, 1), (1, 0), (0, 0)])) == 4


def test_reverse_cycle_counts_minus_four():
    assert decode(samples([(0, 0), (1, 0), (1, 1), (0, 1), (0, 0)])) == -4


def test_exhaustive_transition_table():
    phases = [(0, 0), (0, 1), (1, 1), (1, 0)]  # forward order
    for i, old in enumerate(phases):
        for j, new in enumerate(phases):
            dec = QuadratureDecoder()
            dec.feed(QuadratureSample(0, *old))
            delta = (j - i) % 4
            if delta == 2:  # both channels change
                with pytest.raises(GlitchError) as err:
                    dec.feed(QuadratureSample(1, *new))
                assert err.value.index == 1
            else:
                dec.feed(QuadratureSample(1, *new))
                assert dec.count == {0: 0, 1: 1, 3: -1}[delta]


def test_hold_profile_is_silent():
    assert simulate_rotation([(0, 0.0), (1000, 0.0)], CAL) == []


def test_quarter_turn_emits_ppr_counts():
    stream = simulate_rotation([(0, 0.0), (1000, 90.0)], CAL)
    assert decode(stream) == CAL.ppr
    times = [s.t_ms for s in stream]
    assert times == sorted(times)


def test_wraparound_round_trip():
    stream = simulate_rotation([(0, 0.0), (2000, 370.0)], CAL)
    angle = counts_to_angle(decode(stream), CAL)
    assert abs(angle - 10.0) <= CAL.quantum_deg


def test_counts_to_angle_examples():
    assert counts_to_angle(0, CAL) == 0.0
    assert counts_to_angle(4 * 600, CAL) == 0.0                    # full turn
    assert counts_to_angle(4 * 600 // 2, CAL) == -180.0            # wrap edge
    half = RollCalibration(ppr=600, gear_ratio=2.0)
    assert counts_to_angle(600, half) == pytest.approx(
        counts_to_angle(600, CAL) / 2.0)


def test_counts_to_angle_linear_before_wrap():
    for count in range(-1100, 1100, 97):
        expected = count * CAL.quantum_deg
        if -180.0 <= expected < 180.0:
            assert counts_to_angle(count, CAL) == pytest.approx(expected)


def test_zero_offset_applies():
    cal = RollCalibration(zero_offset_deg=30.0)
    assert counts_to_angle(angle_to_count(45.0, cal), cal) == pytest.approx(
        45.0, abs=cal.quantum_deg)


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(min_value=-400, max_value=400, allow_nan=False),
                min_size=2, max_size=10))
def test_random_profile_round_trip(angles):
    profile = [(1000.0 * i, a) for i, a in enumerate(angles)]
    stream = simulate_rotation(profile, CAL)
    recovered = counts_to_angle(angle_to_count(angles[0], CAL) + decode(stream), CAL)
    expected = counts_to_angle(angle_to_count(angles[-1], CAL), CAL)
    diff = abs(recovered - expected)
    assert min(diff, 360.0 - diff) <= CAL.quantum_deg + 1e-9


def test_glitch_iff_double_transition():
    # skipping a phase (two counts in one sample) must raise
    with pytest.raises(GlitchError):
        decode(samples([(0, 0), (1, 1)]))
    with pytest.raises(GlitchError):
        decode(samples([(0, 1), (1, 0)]))


def test_parse_serial_lines():
    assert parse_serial_line(b"C:1234\n") == 1234
    assert parse_serial_line(b"C:-7\n") == -7
    assert parse_serial_line(b"T:250 C:42\n") == (250, 42)
    with pytest.raises(ProtocolError):
        parse_serial_line(b"X:12\n")
    with pytest.raises(ProtocolError):
        parse_serial_line(b"C:twelve\n")
    with pytest.raises(ProtocolError):
        parse_serial_line(b"C:99999999999999\n")
    with pytest.raises(ProtocolError):
        parse_serial_line(b"\n")


def test_replay_file_round_trip(tmp_path):
    records = [(0, 0), (33, 5), (66, 11), (99, 7)]
    path = tmp_path / "roll.log"
    write_replay(path, records)
    assert read_replay(path) == records


def test_roll_tracker_quantizes_to_encoder_grid():
    tracker = RollTracker(CAL)
    rng = np.random.default_rng(5)
    angle = 0.0
    for t in range(1, 300):
        angle += rng.normal(0.0, 2.0)
        reported = tracker.advance(float(t), angle)
        wrapped = (angle + 180.0) % 360.0 - 180.0
        diff = abs(reported - wrapped)
        assert min(diff, 360.0 - diff) <= CAL.quantum_deg + 1e-9


def test_roll_tracker_wraps_through_180():
    tracker = RollTracker(CAL)
    tracker.advance(1.0, 170.0)
    reported = tracker.advance(2.0, 190.0)   # unwrapped input crosses +180
    assert reported == pytest.approx(-170.0, abs=CAL.quantum_deg)
