"""Live session server: one steerable episode per WebSocket connection.

Protocol (one JSON object per text frame):
  client -> server
    {"type": "hello", "controller": "explicit", "scenario": {...}?, "seed": 0?,
     "start_paused": false?}
    {"type": "set_ped_speed", "vy": 1.6}
    {"type": "set_intention", "intention": 0.3}
    {"type": "pause"} | {"type": "resume"}
    {"type": "reset", "seed": 1?}
  server -> client
    {"type": "tick", "t", "step", "vehicle": {x, v}, "pedestrian": {x, y, vy,
     "intention"}, "u", "ttc", "zone", "score_so_far"}
    {"type": "ended", "reason", "metrics": {ttc_min, t_total, a_max, collided,
     timed_out, score}}
    {"type": "error", "code", "text"}

Inbound messages are drained before every simulation step, so a client
that paces itself on Ticks (or brackets overrides in pause/resume) gets a
fully reproducible episode for a given seed.
"""
from __future__ import annotations

import asyncio
import json
import logging
import math
from dataclasses import replace
from typing import Optional

from websockets.asyncio.server import serve as ws_serve

from ssmpc import engine
from ssmpc.controllers import apply_intention_lowering, make_controller
from ssmpc.ped_models import ttc
from ssmpc.types import ControllerConfig, Rng, ScenarioSpec, sample_scenario, zone_of

log = logging.getLogger("ssmpc.live")

DEFAULT_BIND = "127.0.0.1:8787"


def _error(code: str, text: str) -> str:
    return json.dumps({"type": "error", "code": code, "text": text})


class Session:
    """State-owning loop for one connection; inbound frames are queued and
    applied between steps, Ticks fan out from here only."""

    def __init__(self, conn, speed: float):
        self.conn = conn
        self.speed = speed
        self.queue: asyncio.Queue = asyncio.Queue()
        self.paused = False
        self.reset_seed: Optional[int] = None
        self.closed = False

    async def _reader(self):
        try:
            async for raw in self.conn:
                try:
                    msg = json.loads(raw)
                    if not isinstance(msg, dict) or "type" not in msg:
                        raise ValueError("frame is not a tagged object")
                except (ValueError, json.JSONDecodeError):
                    await self.conn.send(_error("bad_frame", "unparseable frame"))
                    continue
                await self.queue.put(msg)
        except Exception:
            pass
        finally:
            self.closed = True
            await self.queue.put({"type": "_eof"})

    def _apply(self, msg: dict, ped_model: engine.ManualPedestrian,
               spec: ScenarioSpec) -> None:
        kind = msg.get("type")
        if kind == "set_ped_speed":
            vy = float(msg.get("vy", 0.0))
            ped_model.vy = min(max(vy, 0.0), 2.0 * spec.v_ped_ref)
        elif kind == "set_intention":
            i = float(msg.get("intention", 0.5))
            ped_model.intention = min(max(i, 0.0), 1.0)
        elif kind == "pause":
            self.paused = True
        elif kind == "resume":
            self.paused = False
        elif kind == "reset":
            self.reset_seed = int(msg.get("seed", 0))
        elif kind == "_eof":
            pass
        else:
            # malformed or unknown: report and carry on
            asyncio.ensure_future(self.conn.send(
                _error("bad_frame", f"unknown message type {kind!r}")))

    async def _drain(self, ped_model, spec, block: bool) -> None:
        if block:
            msg = await self.queue.get()
            self._apply(msg, ped_model, spec)
        while not self.queue.empty():
            self._apply(self.queue.get_nowait(), ped_model, spec)

    async def run(self) -> None:
        reader = asyncio.ensure_future(self._reader())
        try:
            await self._run_protocol()
        finally:
            reader.cancel()

    async def _run_protocol(self) -> None:
        hello = await self.queue.get()
        if hello.get("type") != "hello":
            await self.conn.send(_error("protocol", "first message must be hello"))
            await self.conn.close()
            return
        name = hello.get("controller", "explicit")
        scenario = hello.get("scenario") or {}
        scenario.setdefault("intention_mode", "manual")
        try:
            spec = ScenarioSpec.from_dict(scenario)
            cfg_fields = hello.get("config") or {}
            cfg = ControllerConfig.from_dict(cfg_fields) if cfg_fields else ControllerConfig()
            make_controller(name, cfg, spec)
        except ValueError as e:
            await self.conn.send(_error("protocol", str(e)))
            await self.conn.close()
            return

        # starting paused lets a client apply overrides before step 0,
        # which makes episodes replayable without racing the loop
        self.paused = bool(hello.get("start_paused", False))
        seed = int(hello.get("seed", spec.seed))
        while not self.closed:
            again = await self._episode(name, cfg, spec, seed)
            if not again:
                break
            seed = self.reset_seed if self.reset_seed is not None else seed
            self.reset_seed = None

    async def _episode(self, name: str, cfg: ControllerConfig,
                       spec: ScenarioSpec, seed: int) -> bool:
        """Run one paced episode; returns True when a reset was requested."""
        controller = make_controller(name, cfg, spec)
        rng = Rng(seed)
        world, intention = sample_scenario(rng, spec)
        ped_model = engine.ManualPedestrian(vy=world.pedestrian.vy,
                                            intention=world.pedestrian.intention)
        ttc_min, a_max = math.inf, 0.0
        terminal = None
        dt = spec.dt

        while True:
            await self._drain(ped_model, spec, block=False)
            while self.paused and not self.closed and self.reset_seed is None:
                await self._drain(ped_model, spec, block=True)
            if self.closed:
                return False
            if self.reset_seed is not None:
                return True

            ped = replace(world.pedestrian, vy=ped_model.vy,
                          intention=ped_model.intention)
            world = replace(world, pedestrian=ped)

            if engine._distance(world) < cfg.collision_radius:
                terminal = "collision"
            elif world.vehicle.x > world.pedestrian.x_cross + engine.PASS_CLEARANCE:
                terminal = "passed"
            elif world.t >= spec.max_time - 1e-9:
                terminal = "timeout"
            if terminal:
                break

            zone = zone_of(world.pedestrian, spec)
            lowered = apply_intention_lowering(cfg, ped.intention, zone)
            decision = controller.decide(world, lowered)
            ttc_now = ttc(world, spec.v_ped_ref, spec.lane_y)
            ttc_min = min(ttc_min, ttc_now)
            a_max = max(a_max, abs(decision.u0))

            await self.conn.send(json.dumps({
                "type": "tick",
                "t": round(world.t, 9),
                "step": world.step_index,
                "vehicle": {"x": world.vehicle.x, "v": world.vehicle.v},
                "pedestrian": {"x": world.pedestrian.x_cross,
                               "y": world.pedestrian.y,
                               "vy": world.pedestrian.vy,
                               "intention": world.pedestrian.intention},
                "u": decision.u0,
                "ttc": ttc_now,
                "zone": zone.value,
                "score_so_far": (ttc_min if math.isfinite(ttc_min) else 0.0)
                                - world.t - a_max,
            }))
            world = engine.step(world, decision.u0, dt, ped_model)
            # always yield so the reader task can enqueue overrides even
            # when the loop runs unpaced (speed <= 0)
            await asyncio.sleep(dt / self.speed if self.speed > 0 else 0)

        j = (ttc_min if math.isfinite(ttc_min) else 0.0) - world.t - a_max
        if terminal == "collision":
            j -= engine.ScoreWeights().collision_penalty
        await self.conn.send(json.dumps({
            "type": "ended",
            "reason": terminal,
            "metrics": {
                "ttc_min": ttc_min if math.isfinite(ttc_min) else None,
                "t_total": round(world.t, 9),
                "a_max": a_max,
                "collided": terminal == "collision",
                "timed_out": terminal == "timeout",
                "score": j,
            },
        }))
        # wait for reset or disconnect
        ped_sink = engine.ManualPedestrian(0.0, 0.0)
        while not self.closed and self.reset_seed is None:
            await self._drain(ped_sink, spec, block=True)
        return self.reset_seed is not None


async def serve(bind: str = DEFAULT_BIND, speed: float = 1.0):
    """Start the session server; each connection gets an isolated session."""
    host, _, port = bind.rpartition(":")
    try:
        server = await ws_serve(lambda conn: Session(conn, speed).run(),
                                host, int(port))
    except OSError as e:
        raise OSError(f"cannot bind live server to {bind}: {e}") from e
    return server


def run_forever(bind: str = DEFAULT_BIND, speed: float = 1.0) -> None:
    async def _main():
        server = await serve(bind, speed)
        log.info("live server on %s (speed x%g)", bind, speed)
        await server.serve_forever()

    asyncio.run(_main())
