"""Fixed-step closed-loop simulation, termination, metrics, and batches.

One episode = one sequential loop (the MPC warm start is stateful).
Batches derive per-run random streams by seed-splitting, so serial and
parallel execution produce identical results.
"""
from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from ssmpc.controllers import (
    ControlDecision,
    apply_intention_lowering,
    make_controller,
    vehicle_step,
)
from ssmpc.ped_models import (
    SfmParams,
    mixed_model_sample,
    sfm_step,
    ttc,
)
from ssmpc.types import (
    ControllerConfig,
    PedestrianState,
    Rng,
    RunMetrics,
    ScenarioSpec,
    VehicleState,
    WorldState,
    Zone,
    sample_scenario,
    zone_of,
)

PASS_CLEARANCE = 5.0  # vehicle is "past the interaction" this far beyond the crossing line [m]


class SfmPedestrian:
    """Simulation-side social force pedestrian."""

    def __init__(self, params: SfmParams):
        self.params = params

    def step(self, ped: PedestrianState, vehicle: VehicleState, dt: float) -> PedestrianState:
        return sfm_step(ped, vehicle, self.params, dt)


class ConstantSpeedPedestrian:
    def step(self, ped: PedestrianState, vehicle: VehicleState, dt: float) -> PedestrianState:
        return replace(ped, y=ped.y + dt * ped.vy)


class SigmoidPedestrian:
    """Pedestrian advancing by the same coupled sigmoid/TTC model the
    explicit MPC uses; exists so engine stepping can be cross-checked
    against the controller's internal rollout."""

    def __init__(self, c: float, v_ped_ref: float, lane_y: float):
        self.c = c
        self.v_ped_ref = v_ped_ref
        self.lane_y = lane_y

    def step(self, ped: PedestrianState, vehicle: VehicleState, dt: float) -> PedestrianState:
        from ssmpc.ped_models import V_EPS, sigmoid_speed
        t_veh = (ped.x_cross - vehicle.x) / max(vehicle.v, V_EPS)
        ttc_now = t_veh - (self.lane_y - ped.y) / self.v_ped_ref
        return replace(ped, y=ped.y + dt * ped.vy,
                       vy=sigmoid_speed(ttc_now, self.c, self.v_ped_ref))


class ManualPedestrian:
    """Pedestrian driven by live operator overrides (speed and intention)."""

    def __init__(self, vy: float, intention: float):
        self.vy = vy
        self.intention = intention

    def step(self, ped: PedestrianState, vehicle: VehicleState, dt: float) -> PedestrianState:
        return replace(ped, y=ped.y + dt * self.vy, vy=self.vy,
                       intention=self.intention)


def make_ped_model(spec: ScenarioSpec, rng: Rng):
    """Instantiate the scenario's pedestrian model; 'mixed' draws once per
    episode from an rng substream so the choice is reproducible."""
    kind = spec.ped_model
    if kind == "mixed":
        kind = mixed_model_sample(rng.spawn(101))
    if kind == "sfm":
        return SfmPedestrian(SfmParams(desired_speed=spec.v_ped_ref,
                                       goal_y=spec.lane_y + 4.0))
    return ConstantSpeedPedestrian()


def step(world: WorldState, u: float, dt: float, ped_model) -> WorldState:
    """Advance the plant one step: linear vehicle (speed clamped at zero,
    no reversing) and the scenario's pedestrian model."""
    veh = world.vehicle
    x, v = vehicle_step(veh.x, veh.v, u, dt, 0.0, float("inf"))
    new_veh = VehicleState(x=float(x), v=float(v), y_lane=veh.y_lane)
    new_ped = ped_model.step(world.pedestrian, veh, dt)
    idx = world.step_index + 1
    return WorldState(vehicle=new_veh, pedestrian=new_ped,
                      t=idx * dt, step_index=idx)


@dataclass(frozen=True)
class StepRecord:
    world: WorldState
    decision: ControlDecision
    zone: Zone
    intention: float
    ttc: float


@dataclass
class EpisodeRecord:
    steps: list[StepRecord]
    metrics: RunMetrics
    terminal_reason: str  # passed | collision | timeout
    intention: float
    ped_model: str
    seed: Optional[int] = None

    def to_jsonl(self) -> str:
        """Line-delimited structured log: one line per step plus a summary."""
        lines = []
        for s in self.steps:
            lines.append(json.dumps({
                "t": round(s.world.t, 9),
                "x_veh": s.world.vehicle.x, "v_veh": s.world.vehicle.v,
                "y_ped": s.world.pedestrian.y, "vy_ped": s.world.pedestrian.vy,
                "intention": s.intention, "zone": s.zone.value,
                "u": s.decision.u0, "ttc": s.ttc,
            }))
        m = self.metrics
        lines.append(json.dumps({
            "terminal": self.terminal_reason, "ttc_min": m.ttc_min,
            "t_total": m.t_total, "a_max": m.a_max_abs,
            "collided": m.collided, "timed_out": m.timed_out,
        }))
        return "\n".join(lines) + "\n"


def _distance(world: WorldState) -> float:
    return math.hypot(world.vehicle.x - world.pedestrian.x_cross,
                      world.vehicle.y_lane - world.pedestrian.y)


def run_episode(spec: ScenarioSpec, controller, rng: Rng | int,
                cfg: Optional[ControllerConfig] = None,
                intention_lowering: bool = True) -> EpisodeRecord:
    """Closed loop: zone -> intention lowering -> timed control -> plant step,
    until the vehicle passes, a collision occurs, or time runs out."""
    if isinstance(rng, int):
        rng = Rng(rng)
    cfg = cfg if cfg is not None else controller.cfg
    world, intention = sample_scenario(rng, spec)
    ped_model = make_ped_model(spec, rng)
    model_name = type(ped_model).__name__

    steps: list[StepRecord] = []
    ttc_min = math.inf
    a_max = 0.0
    compute_times: list[float] = []
    terminal = None

    while True:
        if _distance(world) < cfg.collision_radius:
            terminal = "collision"
            break
        if world.vehicle.x > world.pedestrian.x_cross + PASS_CLEARANCE:
            terminal = "passed"
            break
        if world.t >= spec.max_time - 1e-9:
            terminal = "timeout"
            break
        zone = zone_of(world.pedestrian, spec)
        lowered = apply_intention_lowering(cfg, world.pedestrian.intention, zone) \
            if intention_lowering else cfg
        t0 = time.perf_counter()
        try:
            decision = controller.decide(world, lowered)
        except Exception:
            # controller failure: brake hard and keep the loop alive
            decision = ControlDecision(u0=cfg.a_min, u_seq=np.array([cfg.a_min]),
                                       predicted_cost=float("inf"),
                                       solve_time=0.0, fallback=True)
        compute_times.append(time.perf_counter() - t0)
        ttc_now = ttc(world, spec.v_ped_ref, spec.lane_y)
        ttc_min = min(ttc_min, ttc_now)
        a_max = max(a_max, abs(decision.u0))
        steps.append(StepRecord(world=world, decision=decision, zone=zone,
                                intention=world.pedestrian.intention, ttc=ttc_now))
        world = step(world, decision.u0, spec.dt, ped_model)

    metrics = RunMetrics(
        ttc_min=ttc_min if steps else ttc(world, spec.v_ped_ref, spec.lane_y),
        t_total=world.t,
        a_max_abs=a_max,
        collided=terminal == "collision",
        timed_out=terminal == "timeout",
        compute_times=compute_times,
    )
    return EpisodeRecord(steps=steps, metrics=metrics, terminal_reason=terminal,
                         intention=intention, ped_model=model_name)


@dataclass(frozen=True)
class ScoreWeights:
    k1: float = 1.0
    k2: float = 1.0
    k3: float = 1.0
    collision_penalty: float = 100.0

    def __post_init__(self):
        if min(self.k1, self.k2, self.k3, self.collision_penalty) < 0:
            raise ValueError("score weights must be non-negative")


def score(metrics: RunMetrics, k: ScoreWeights = ScoreWeights()) -> float:
    """Episode score: larger is better; collisions are penalized on top."""
    j = k.k1 * metrics.ttc_min - k.k2 * metrics.t_total - k.k3 * metrics.a_max_abs
    if metrics.collided:
        j -= k.collision_penalty
    return j


@dataclass
class BatchResult:
    scores: list[float]
    records: list[EpisodeRecord]
    mean_score: float
    mean_compute_time: float
    collisions: int

    @property
    def std_score(self) -> float:
        return float(np.std(self.scores))


def _run_one(args) -> EpisodeRecord:
    spec, name, cfg, seed, run_idx, lowering = args
    rng = Rng(seed).spawn(run_idx)
    controller = make_controller(name, cfg, spec)
    try:
        rec = run_episode(spec, controller, rng, cfg, intention_lowering=lowering)
    except Exception:
        # scored as a collision-grade failure; the batch continues
        rec = EpisodeRecord(steps=[], metrics=RunMetrics(
            ttc_min=0.0, t_total=spec.max_time, a_max_abs=0.0,
            collided=True, timed_out=False), terminal_reason="collision",
            intention=0.0, ped_model="error")
    rec.seed = run_idx
    return rec


def run_batch(spec: ScenarioSpec, controller_name: str, cfg: ControllerConfig,
              n_runs: int, seed: int, intention_lowering: bool = True,
              weights: ScoreWeights = ScoreWeights(),
              workers: Optional[int] = None) -> BatchResult:
    """Monte-Carlo batch over independently perturbed initial states.

    Per-run streams are Rng(seed).spawn(i); controllers never consume the
    stream, so different controllers on the same seed face identical
    scenario sequences (paired comparison).
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    if workers is None:
        workers = int(os.environ.get("SSMPC_THREADS", "1"))
    jobs = [(spec, controller_name, cfg, seed, i, intention_lowering)
            for i in range(n_runs)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, jobs, chunksize=4))
    else:
        records = [_run_one(j) for j in jobs]

    scores = [score(r.metrics, weights) for r in records]
    all_times = [t for r in records for t in r.metrics.compute_times]
    return BatchResult(
        scores=scores,
        records=records,
        mean_score=float(np.mean(scores)),
        mean_compute_time=float(np.mean(all_times)) if all_times else 0.0,
        collisions=sum(r.metrics.collided for r in records),
    )
