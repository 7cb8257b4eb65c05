"""Real-time WebSocket service.

One asyncio tick loop owns the simulator and tracking pipeline; per-client
reader/writer tasks talk to it only through queues. Every tick renders the
biplane pair, tracks it, registers the track, updates the navigation
session and broadcasts one ``frame`` snapshot to all clients. A client
whose outbound queue overflows (a stalled reader) is disconnected rather
than allowed to stall the others.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import FileResponse
from fastapi.staticfiles import StaticFiles

from .beam import TaskSession, beam_geometry, target_feedback
from .encoder import RollCalibration, RollTracker
from .errors import ProtocolError
from .fusion import fuse_frame
from .protocol import (ControlMessage, FrameMessage, decode_control,
                       encode_frame, error_payload)
from .registration import AffineTransform, apply_transform
from .scene import Scene, default_scene
from .simulator import (CatheterGeometry, CatheterState, ControlRates,
                        forward_kinematics, step)
from .synth import CalibrationSet, NoiseSpec, render_frame
from .vision import PipelineConfig

log = logging.getLogger(__name__)


class Hub:
    """Fan-out of encoded frames to per-client bounded queues."""

    def __init__(self, max_queue: int = 32):
        self.max_queue = max_queue
        self._clients: dict[int, asyncio.Queue] = {}
        self._next_id = 0

    def attach(self) -> tuple[int, asyncio.Queue]:
        cid = self._next_id
        self._next_id += 1
        queue: asyncio.Queue = asyncio.Queue(maxsize=self.max_queue)
        self._clients[cid] = queue
        return cid, queue

    def detach(self, cid: int) -> None:
        self._clients.pop(cid, None)

    @property
    def client_count(self) -> int:
        return len(self._clients)

    def broadcast(self, data: bytes) -> list[int]:
        """Queue ``data`` for every client; return ids that overflowed."""
        kicked = []
        for cid, queue in list(self._clients.items()):
            try:
                queue.put_nowait(data)
            except asyncio.QueueFull:
                kicked.append(cid)
        for cid in kicked:
            self.detach(cid)
        return kicked


@dataclass
class RigConfig:
    """Everything the tick loop needs to run the full stack."""

    calib: CalibrationSet
    geometry: CatheterGeometry = field(default_factory=CatheterGeometry)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    scene: Scene = field(default_factory=default_scene)
    roll_calib: RollCalibration = field(default_factory=RollCalibration)
    transform: AffineTransform = field(default_factory=AffineTransform.identity)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    initial_state: CatheterState = field(
        default_factory=lambda: CatheterState(insertion_mm=60.0))


class TrackerRig:
    """Authoritative session state: simulator -> cameras -> tracker -> task."""

    def __init__(self, config: RigConfig, log_path=None):
        self.cfg = config
        self.state = config.initial_state
        self.rates = ControlRates()
        self.session = TaskSession(config.scene.targets,
                                   dwell_ms=config.scene.dwell_ms,
                                   log_path=log_path)
        self._unwrapped_roll = config.initial_state.roll_deg
        self._roll = RollTracker(config.roll_calib, t0_ms=0.0,
                                 angle0_deg=self._unwrapped_roll)
        self.seq = 0
        self.frame_index = 0

    def apply_control(self, msg: ControlMessage, now_ms: int) -> None:
        if msg.type == "control":
            current = {
                "insertion_mm_s": self.rates.insertion_mm_s,
                "knob1_deg_s": self.rates.knob1_deg_s,
                "knob2_deg_s": self.rates.knob2_deg_s,
                "roll_deg_s": self.rates.roll_deg_s,
            }
            current.update(msg.rates or {})
            self.rates = ControlRates(**current)
        elif msg.type == "session":
            if msg.action == "start":
                self.session.start(now_ms)
            else:
                self.session.reset(now_ms)
        elif msg.type == "mode":
            self.session.log_mode(msg.view, now_ms)

    def tick(self, dt: float, now_ms: int) -> FrameMessage:
        self.state = step(self.state, self.rates, dt, self.cfg.geometry)
        self._unwrapped_roll += self.rates.roll_deg_s * dt
        roll_deg = self._roll.advance(now_ms, self._unwrapped_roll)

        curve = forward_kinematics(self.state, self.cfg.geometry)
        noise = self.cfg.noise
        if noise.sigma > 0 or noise.speckle_count > 0 or noise.gradient != 0:
            noise = NoiseSpec(**{**noise.__dict__, "seed": noise.seed + 2 * self.frame_index})
        frame = render_frame(curve, self.cfg.calib, noise, timestamp_ms=now_ms)
        self.frame_index += 1

        track = fuse_frame(frame, self.cfg.calib, self.cfg.pipeline, roll_deg=roll_deg)

        beam_info = None
        feedback = None
        points: tuple = ()
        consistency = 0.0
        if track is not None:
            track = apply_transform(self.cfg.transform, track)
            points = tuple(map(tuple, np.round(track.points, 4).tolist()))
            consistency = round(track.consistency_mm, 4)
            geo = beam_geometry(track, self.cfg.scene.beam)
            beam_info = {
                "vertices": np.round(geo.vertices, 4).tolist(),
                "end": np.round(geo.end, 4).tolist(),
            }
            self.session.update(geo.end, now_ms)
            target = self.session.current_target
            if target is not None:
                dist, ang = target_feedback(geo, target)
                feedback = {"distance_mm": round(dist, 4),
                            "angle_deg": round(ang, 4)}
        else:
            self.session.update(None, now_ms)
            target = self.session.current_target

        target_info = None
        if target is not None:
            target_info = {"id": target.id,
                           "center": np.round(target.center, 4).tolist(),
                           "radius_mm": target.radius_mm}

        metrics = self.session.metrics(now_ms).as_dict()
        msg = FrameMessage(
            seq=self.seq,
            timestamp_ms=now_ms,
            points=points,
            roll_deg=round(roll_deg, 6),
            consistency_mm=consistency,
            beam=beam_info,
            target=target_info,
            feedback=feedback,
            metrics=metrics,
        )
        self.seq += 1
        return msg


def build_app(rig: TrackerRig, rate_hz: float = 30.0, asset_dir=None,
              ui_dir=None, max_queue: int = 32) -> FastAPI:
    hub = Hub(max_queue=max_queue)
    control_q: asyncio.Queue = asyncio.Queue()
    sockets: dict[int, tuple] = {}  # cid -> (websocket, writer task)

    @contextlib.asynccontextmanager
    async def lifespan(app_: FastAPI):
        app_.state.ticker = asyncio.create_task(tick_loop())
        try:
            yield
        finally:
            app_.state.ticker.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await app_.state.ticker

    app = FastAPI(title="cathtrack", lifespan=lifespan)
    app.state.hub = hub
    app.state.rig = rig
    app.state.rate_hz = rate_hz
    app.state.started = time.monotonic()

    def now_ms() -> int:
        return int((time.monotonic() - app.state.started) * 1000)

    app.state.now_ms = now_ms

    async def tick_loop():
        period = 1.0 / rate_hz
        next_t = time.monotonic()
        while True:
            now = time.monotonic()
            if now < next_t:
                await asyncio.sleep(next_t - now)
            elif now - next_t > 5 * period:
                next_t = now  # fell behind; resynchronize
            while not control_q.empty():
                rig.apply_control(control_q.get_nowait(), now_ms())
            msg = await asyncio.to_thread(rig.tick, period, now_ms())
            kicked = hub.broadcast(encode_frame(msg))
            for cid in kicked:
                log.warning("client %d disconnected: outbound queue overflow", cid)
                entry = sockets.pop(cid, None)
                if entry is not None:
                    ws_, task_ = entry
                    task_.cancel()
                    asyncio.ensure_future(_close_quietly(ws_))
            next_t += period

    async def _close_quietly(ws_):
        with contextlib.suppress(Exception):
            await ws_.close()

    @app.get("/healthz")
    async def healthz():
        return {"ok": True, "clients": hub.client_count, "seq": rig.seq}

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        cid, queue = hub.attach()

        async def writer():
            while True:
                data = await queue.get()
                await ws.send_text(data.decode("utf-8"))

        writer_task = asyncio.create_task(writer())
        sockets[cid] = (ws, writer_task)
        try:
            while True:
                text = await ws.receive_text()
                try:
                    control_q.put_nowait(decode_control(text))
                except ProtocolError as exc:
                    # a malformed client is told why, then dropped; others
                    # are unaffected
                    await ws.send_text(error_payload(exc).decode("utf-8"))
                    break
        except WebSocketDisconnect:
            pass
        finally:
            hub.detach(cid)
            sockets.pop(cid, None)
            writer_task.cancel()
            with contextlib.suppress(Exception):
                await ws.close()

    if asset_dir is not None:
        app.mount("/assets", StaticFiles(directory=str(asset_dir)), name="assets")

        @app.get("/scene.json")
        async def scene_json():
            return FileResponse(str(asset_dir) + "/scene.json")

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(host: str, port: int, rig: TrackerRig, rate_hz: float = 30.0,
          asset_dir=None, ui_dir=None) -> None:
    """Run the service until interrupted (CLI entry)."""
    import uvicorn

    app = build_app(rig, rate_hz=rate_hz, asset_dir=asset_dir, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
