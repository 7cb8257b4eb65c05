"""Quadrature roll encoder: decoding, calibration, simulation, serial framing.

The catheter's roll turns a gear pair whose output shaft drives an
incremental quadrature encoder. Decoding is x4 (every edge counts), so one
count is 360 / (4 * ppr * gear_ratio) degrees of catheter roll.

``gear_ratio`` is the number of encoder-gear revolutions per catheter
revolution: a ratio of 2 halves the angle recovered from a given count.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import GlitchError, ProtocolError
from .simulator import wrap_deg

# x4 phase sequence for forward (+) rotation: (a, b) per count mod 4
_PHASES = ((0, 0), (0, 1), (1, 1), (1, 0))
_PHASE_INDEX = {p: i for i, p in enumerate(_PHASES)}


@dataclass(frozen=True)
class QuadratureSample:
    t_ms: float
    a: int
    b: int


@dataclass(frozen=True)
class RollCalibration:
    ppr: int = 600
    gear_ratio: float = 1.0
    zero_offset_deg: float = 0.0

    def __post_init__(self):
        if self.ppr < 1:
            raise ValueError(f"ppr must be >= 1, got {self.ppr}")
        if self.gear_ratio <= 0:
            raise ValueError(f"gear_ratio must be positive, got {self.gear_ratio}")

    @property
    def counts_per_rev(self) -> float:
        """Encoder counts per full catheter revolution."""
        return 4.0 * self.ppr * self.gear_ratio

    @property
    def quantum_deg(self) -> float:
        return 360.0 / self.counts_per_rev


class QuadratureDecoder:
    """Sequential x4 decoder; the first sample fixes the initial phase.

    Feed samples in time order; ``count`` accumulates +/-1 per single
    channel edge. A sample in which both channels changed raises
    GlitchError (the stream was sampled too slowly to order the edges).
    """

    def __init__(self):
        self._phase: int | None = None
        self.count = 0
        self.samples_seen = 0

    def feed(self, sample: QuadratureSample) -> int:
        phase = _PHASE_INDEX.get((sample.a, sample.b))
        if phase is None:
            raise ProtocolError(f"invalid levels a={sample.a} b={sample.b}")
        index = self.samples_seen
        self.samples_seen += 1
        if self._phase is None:
            self._phase = phase
            return 0
        delta = (phase - self._phase) % 4
        self._phase = phase
        if delta == 0:
            return 0
        if delta == 1:
            self.count += 1
            return 1
        if delta == 3:
            self.count -= 1
            return -1
        raise GlitchError(
            f"both channels changed at sample {index} (sampling too slow)",
            index=index,
        )


def decode(stream) -> int:
    """Net signed count of a quadrature sample stream."""
    dec = QuadratureDecoder()
    for sample in stream:
        dec.feed(sample)
    return dec.count


def counts_to_angle(count: int, calib: RollCalibration) -> float:
    """Catheter roll in [-180, 180) for an absolute encoder count."""
    return wrap_deg(count * 360.0 / (4.0 * calib.ppr) / calib.gear_ratio
                    - calib.zero_offset_deg)


def angle_to_count(angle_deg: float, calib: RollCalibration) -> int:
    """Nearest absolute count for an (unwrapped) catheter angle."""
    return int(round((angle_deg + calib.zero_offset_deg)
                     * calib.counts_per_rev / 360.0))


def simulate_rotation(profile, calib: RollCalibration):
    """Quadrature stream a perfect encoder would emit for a roll profile.

    ``profile`` is a sequence of (t_ms, roll_deg) knots with increasing
    times and unwrapped angles; motion is linear between knots. The stream
    opens with one phase-defining sample when any motion occurs; a
    motionless profile yields no samples.
    """
    knots = [(float(t), float(a)) for t, a in profile]
    for (t0, _), (t1, _) in zip(knots, knots[1:]):
        if t1 < t0:
            raise ValueError("profile times must be non-decreasing")
    if not knots:
        return []

    samples: list[QuadratureSample] = []
    count = angle_to_count(knots[0][1], calib)

    def emit(t_ms: float, c: int):
        a, b = _PHASES[c % 4]
        samples.append(QuadratureSample(t_ms=t_ms, a=a, b=b))

    k = calib.counts_per_rev / 360.0
    for (t0, a0), (t1, a1) in zip(knots, knots[1:]):
        target = int(round((a1 + calib.zero_offset_deg) * k))
        if target == count:
            continue
        step = 1 if target > count else -1
        x0 = (a0 + calib.zero_offset_deg) * k
        x1 = (a1 + calib.zero_offset_deg) * k
        for c in range(count + step, target + step, step):
            # the nearest-integer count flips halfway between c-step and c
            boundary = c - 0.5 * step
            if abs(x1 - x0) < 1e-12:
                t = t1
            else:
                f = (boundary - x0) / (x1 - x0)
                t = t0 + min(max(f, 0.0), 1.0) * (t1 - t0)
            if not samples:
                emit(t, count)  # phase-defining sample
            emit(t, c)
        count = target
    return samples


# ---------------------------------------------------------------------------
# Serial framing: ASCII lines "C:<signed int>" with optional "T:<ms>" prefix
# ---------------------------------------------------------------------------

_COUNT_LIMIT = 2 ** 31


def parse_serial_line(line: bytes):
    """Parse one replay line into ``count`` or ``(t_ms, count)``.

    Accepted forms: ``C:<signed int>\\n`` and ``T:<ms> C:<signed int>\\n``.
    """
    if isinstance(line, str):
        line = line.encode("ascii", errors="replace")
    text = line.strip()
    if not text:
        raise ProtocolError(f"empty serial line {line!r}")
    parts = text.split()
    t_ms = None
    if parts[0].startswith(b"T:"):
        t_ms = _parse_int(parts[0][2:], line)
        parts = parts[1:]
    if len(parts) != 1 or not parts[0].startswith(b"C:"):
        raise ProtocolError(f"malformed serial line {line!r}")
    count = _parse_int(parts[0][2:], line)
    if t_ms is None:
        return count
    return (t_ms, count)


def _parse_int(payload: bytes, line: bytes) -> int:
    try:
        value = int(payload)
    except ValueError:
        raise ProtocolError(f"non-numeric payload in serial line {line!r}") from None
    if not -_COUNT_LIMIT <= value < _COUNT_LIMIT:
        raise ProtocolError(f"count overflow in serial line {line!r}")
    return value


def write_replay(path, records) -> None:
    """Write (t_ms, count) records as serial replay lines."""
    with open(path, "w") as f:
        for t_ms, count in records:
            f.write(f"T:{int(round(t_ms))} C:{int(count)}\n")


def read_replay(path) -> list[tuple[int, int]]:
    records = []
    with open(path, "rb") as f:
        for line in f:
            if not line.strip():
                continue
            parsed = parse_serial_line(line)
            if isinstance(parsed, tuple):
                records.append(parsed)
            else:
                records.append((len(records), parsed))
    return records


class RollTracker:
    """Joins a live roll source to the decode path the serial link feeds.

    The server pushes the true (unwrapped) catheter angle each tick; the
    tracker synthesizes the encoder's quadrature stream for the motion and
    decodes it, so the reported roll carries the encoder's quantization
    exactly as a hardware source would.
    """

    def __init__(self, calib: RollCalibration, t0_ms: float = 0.0,
                 angle0_deg: float = 0.0):
        self.calib = calib
        self._decoder = QuadratureDecoder()
        self._last = (t0_ms, angle0_deg)
        self._base_count = angle_to_count(angle0_deg, calib)

    def advance(self, t_ms: float, angle_deg: float) -> float:
        for s in simulate_rotation([self._last, (t_ms, angle_deg)], self.calib):
            self._decoder.feed(s)
        self._last = (t_ms, angle_deg)
        return self.roll_deg

    @property
    def count(self) -> int:
        return self._base_count + self._decoder.count if self._decoder.samples_seen \
            else self._base_count

    @property
    def roll_deg(self) -> float:
        return counts_to_angle(self.count, self.calib)
