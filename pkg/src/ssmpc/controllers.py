"""Decision-makers for the vehicle: explicit-model MPC, implicit
trace-prediction MPC, and a rule-based baseline, plus intention lowering.

The explicit MPC couples the pedestrian's predicted speed to the vehicle's
candidate trajectory through the sigmoid/TTC model, so the optimizer sees
how its own motion changes the pedestrian's. The implicit MPC optimizes
vehicle-only dynamics against one or more frozen prediction traces.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ssmpc import solver
from ssmpc.ped_models import (
    V_EPS,
    PredictionTrace,
    SfmParams,
    constant_speed_predict,
    sfm_predict,
    ttc,
)
from ssmpc.types import ControllerConfig, ScenarioSpec, WorldState, Zone

DIST_SQ_FLOOR = 1e-6


@dataclass
class ControlDecision:
    u0: float
    u_seq: np.ndarray
    predicted_cost: float
    solve_time: float
    fallback: bool = False


def vehicle_step(x, v, u, dt: float, v_lo: float, v_hi: float):
    """Linear longitudinal vehicle update with speed clamped after the step;
    residual acceleration is discarded. Works on scalars and arrays."""
    x_new = x + v * dt + 0.5 * u * dt * dt
    v_new = np.clip(v + dt * u, v_lo, v_hi)
    return x_new, v_new


def _rollout_explicit_batch(world: WorldState, U: np.ndarray,
                            cfg: ControllerConfig, spec: ScenarioSpec):
    """Coupled vehicle/pedestrian rollout for a batch of input sequences.

    Returns state arrays of shape (batch, n+1): x, v, y, vy.
    """
    m, n = U.shape
    dt, vref, lane = spec.dt, spec.v_ped_ref, spec.lane_y
    x = np.empty((m, n + 1))
    v = np.empty((m, n + 1))
    y = np.empty((m, n + 1))
    vy = np.empty((m, n + 1))
    x[:, 0] = world.vehicle.x
    v[:, 0] = world.vehicle.v
    y[:, 0] = world.pedestrian.y
    vy[:, 0] = world.pedestrian.vy
    x_ped = world.pedestrian.x_cross
    for i in range(n):
        ttc_i = (x_ped - x[:, i]) / np.maximum(v[:, i], V_EPS) - (lane - y[:, i]) / vref
        x[:, i + 1], v[:, i + 1] = vehicle_step(
            x[:, i], v[:, i], U[:, i], dt, cfg.v_min, cfg.v_max)
        y[:, i + 1] = y[:, i] + dt * vy[:, i]
        z = np.clip(-ttc_i + cfg.c, -500.0, 500.0)
        vy[:, i + 1] = vref / (1.0 + np.exp(z))
    return x, v, y, vy


def _rollout_vehicle_batch(world: WorldState, U: np.ndarray,
                           cfg: ControllerConfig, dt: float):
    m, n = U.shape
    x = np.empty((m, n + 1))
    v = np.empty((m, n + 1))
    x[:, 0] = world.vehicle.x
    v[:, 0] = world.vehicle.v
    for i in range(n):
        x[:, i + 1], v[:, i + 1] = vehicle_step(
            x[:, i], v[:, i], U[:, i], dt, cfg.v_min, cfg.v_max)
    return x, v


def rollout_explicit(world: WorldState, u_seq: Sequence[float],
                     cfg: ControllerConfig, spec: ScenarioSpec) -> list[tuple]:
    """Single coupled rollout; returns (x, v, y, vy) rows for steps 0..n."""
    U = np.asarray(u_seq, dtype=float)[None, :]
    x, v, y, vy = _rollout_explicit_batch(world, U, cfg, spec)
    return list(zip(x[0], v[0], y[0], vy[0]))


def mpc_cost(states: Sequence[tuple], u_seq: Sequence[float],
             cfg: ControllerConfig, spec: ScenarioSpec, x_ped: float):
    """Cost terms over a rollout: returns (J_total, J_acc, J_speed, J_dis).

    Effort sums over the inputs; speed tracking and inverse-square distance
    sum over the successor states 1..n. x_ped is the crossing-line abscissa.
    """
    u = np.asarray(u_seq, dtype=float)
    arr = np.asarray(states, dtype=float)
    x, v, y = arr[1:, 0], arr[1:, 1], arr[1:, 2]
    j_acc = cfg.w1 * float(np.sum(u * u))
    j_speed = cfg.w2 * float(np.sum((v - spec.v_veh_ref) ** 2))
    d2 = (x - x_ped) ** 2 + (spec.lane_y - y) ** 2
    j_dis = cfg.w3 * float(np.sum(1.0 / np.maximum(d2, DIST_SQ_FLOOR) ** 2))
    return j_acc + j_speed + j_dis, j_acc, j_speed, j_dis


class _ExplicitProblem:
    """Batched objective/violation for the explicit MPC (duck-typed for solver)."""

    def __init__(self, world: WorldState, cfg: ControllerConfig,
                 spec: ScenarioSpec, extra_traces: Sequence[PredictionTrace] = ()):
        self.world, self.cfg, self.spec = world, cfg, spec
        self.extra_traces = list(extra_traces)
        self.n = cfg.n
        self.a_min, self.a_max = cfg.a_min, cfg.a_max

    def _dist_sq(self, x, y):
        """Min squared vehicle-pedestrian distance across the model rollout
        and any extra frozen traces, per horizon step."""
        spec = self.spec
        x_ped = self.world.pedestrian.x_cross
        d2 = (x - x_ped) ** 2 + (spec.lane_y - y) ** 2
        for tr in self.extra_traces:
            d2t = (x - x_ped) ** 2 + (spec.lane_y - tr.y[None, :]) ** 2
            d2 = np.minimum(d2, d2t)
        return d2

    def _evaluate(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        cfg, spec = self.cfg, self.spec
        x, v, y, _ = _rollout_explicit_batch(self.world, U, cfg, spec)
        d2 = self._dist_sq(x, y)[:, 1:]
        j = cfg.w1 * np.sum(U * U, axis=1)
        j += cfg.w2 * np.sum((v[:, 1:] - spec.v_veh_ref) ** 2, axis=1)
        j += cfg.w3 * np.sum(1.0 / np.maximum(d2, DIST_SQ_FLOOR) ** 2, axis=1)
        gap = np.maximum(cfg.d_min - np.sqrt(d2), 0.0)
        return j, gap

    def objective_batch(self, U):
        j, gap = self._evaluate(U)
        return j + solver.PENALTY_WEIGHT * np.sum(gap, axis=1)

    def violation_batch(self, U):
        _, gap = self._evaluate(U)
        return np.max(gap, axis=1)

    def cost_batch(self, U):
        j, _ = self._evaluate(U)
        return j


class _ImplicitProblem(_ExplicitProblem):
    """Vehicle-only dynamics; pedestrian positions come from frozen traces."""

    def __init__(self, world, cfg, spec, traces: Sequence[PredictionTrace]):
        if not traces:
            raise ValueError("implicit MPC needs at least one prediction trace")
        for tr in traces:
            if len(tr) != cfg.n + 1:
                raise ValueError("trace length must be n+1")
        super().__init__(world, cfg, spec, extra_traces=traces[1:])
        self.trace = traces[0]

    def _evaluate(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        cfg, spec = self.cfg, self.spec
        x, v = _rollout_vehicle_batch(self.world, U, cfg, spec.dt)
        y = np.broadcast_to(self.trace.y[None, :], x.shape)
        d2 = self._dist_sq(x, y)[:, 1:]
        j = cfg.w1 * np.sum(U * U, axis=1)
        j += cfg.w2 * np.sum((v[:, 1:] - spec.v_veh_ref) ** 2, axis=1)
        j += cfg.w3 * np.sum(1.0 / np.maximum(d2, DIST_SQ_FLOOR) ** 2, axis=1)
        gap = np.maximum(cfg.d_min - np.sqrt(d2), 0.0)
        return j, gap


def apply_intention_lowering(cfg: ControllerConfig, intention: float,
                             zone: Zone) -> ControllerConfig:
    """Shrink the distance weight and safe distance by the pedestrian's
    intention while they hesitate in the near zone; identity elsewhere."""
    if not 0.0 <= intention <= 1.0:
        raise ValueError("intention must be in [0,1]")
    if zone is not Zone.NEAR:
        return cfg
    return replace(cfg, w3=cfg.w3 * intention, d_min=cfg.d_min * intention)


def _fallback_decision(cfg: ControllerConfig, elapsed: float) -> ControlDecision:
    u_seq = np.full(cfg.n, cfg.a_min)
    return ControlDecision(u0=cfg.a_min, u_seq=u_seq, predicted_cost=float("inf"),
                           solve_time=elapsed, fallback=True)


class _MpcBase:
    def __init__(self, cfg: ControllerConfig, spec: ScenarioSpec):
        self.cfg = cfg
        self.spec = spec
        self._warm: Optional[np.ndarray] = None

    def _shifted_warm_start(self, n: int) -> Optional[np.ndarray]:
        if self._warm is None or len(self._warm) != n:
            return None
        return np.concatenate([self._warm[1:], self._warm[-1:]])

    def _decide(self, problem) -> ControlDecision:
        t0 = time.perf_counter()
        report = solver.solve(problem, self._shifted_warm_start(problem.n))
        elapsed = time.perf_counter() - t0
        if not report.feasible:
            # applied input is full braking, so warm-start the next step there
            self._warm = np.full(problem.n, problem.cfg.a_min)
            return _fallback_decision(problem.cfg, elapsed)
        self._warm = report.u_seq
        return ControlDecision(u0=float(report.u_seq[0]), u_seq=report.u_seq,
                               predicted_cost=report.objective, solve_time=elapsed)


class ExplicitMpc(_MpcBase):
    """MPC with the coupled sigmoid/TTC pedestrian inside its dynamics.

    In mixed-pedestrian scenarios an additional constant-speed trace guards
    the distance cost and constraint (worst case of the two predictions).
    """
    name = "explicit"

    def decide(self, world: WorldState, cfg: Optional[ControllerConfig] = None) -> ControlDecision:
        cfg = cfg if cfg is not None else self.cfg
        extra = ()
        if self.spec.ped_model == "mixed":
            extra = (constant_speed_predict(world.pedestrian, cfg.n, self.spec.dt),)
        return self._decide(_ExplicitProblem(world, cfg, self.spec, extra))


class ImplicitMpc(_MpcBase):
    """MPC over vehicle-only dynamics with a frozen SFM prediction trace."""
    name = "implicit"

    def __init__(self, cfg: ControllerConfig, spec: ScenarioSpec,
                 sfm_params: Optional[SfmParams] = None):
        super().__init__(cfg, spec)
        self.sfm_params = sfm_params or SfmParams(
            desired_speed=spec.v_ped_ref, goal_y=spec.lane_y + 4.0)

    def decide(self, world: WorldState, cfg: Optional[ControllerConfig] = None) -> ControlDecision:
        cfg = cfg if cfg is not None else self.cfg
        traces = [sfm_predict(world, self.sfm_params, cfg.n, self.spec.dt,
                              assumed_vehicle_speed=world.vehicle.v)]
        if self.spec.ped_model == "mixed":
            traces.append(constant_speed_predict(world.pedestrian, cfg.n, self.spec.dt))
        return self._decide(_ImplicitProblem(world, cfg, self.spec, traces))


class RuleBased:
    """Distance/TTC threshold baseline: brake hard when the pedestrian is
    committed and close in time, otherwise track the reference speed."""
    name = "rule"

    def __init__(self, cfg: ControllerConfig, spec: ScenarioSpec):
        self.cfg = cfg
        self.spec = spec

    def decide(self, world: WorldState, cfg: Optional[ControllerConfig] = None) -> ControlDecision:
        cfg = cfg if cfg is not None else self.cfg
        from ssmpc.types import zone_of
        zone = zone_of(world.pedestrian, self.spec)
        ttc_now = ttc(world, self.spec.v_ped_ref, self.spec.lane_y)
        v = world.vehicle.v
        if zone in (Zone.NEAR, Zone.ON_LANE) and ttc_now < cfg.t_brake:
            u = cfg.a_min
        elif v < self.spec.v_veh_ref:
            u = min(cfg.a_max, cfg.k_p * (self.spec.v_veh_ref - v))
        else:
            u = 0.0
        u = float(np.clip(u, cfg.a_min, cfg.a_max))
        return ControlDecision(u0=u, u_seq=np.array([u]), predicted_cost=0.0,
                               solve_time=0.0)


CONTROLLER_NAMES = ("explicit", "implicit", "rule")


def make_controller(name: str, cfg: ControllerConfig, spec: ScenarioSpec):
    if name == "explicit":
        return ExplicitMpc(cfg, spec)
    if name == "implicit":
        return ImplicitMpc(cfg, spec)
    if name == "rule":
        return RuleBased(cfg, spec)
    raise ValueError(f"unknown controller {name!r}; valid: {', '.join(CONTROLLER_NAMES)}")
