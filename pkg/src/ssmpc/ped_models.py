"""Pedestrian motion and prediction models.

Four flavors: the sigmoid/TTC coupled velocity model used inside the
explicit MPC, a social force model (simulation ground truth and implicit
prediction), a constant-speed model, and the per-episode mixed choice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ssmpc.types import PedestrianState, Rng, VehicleState, WorldState

V_EPS = 0.1  # speed floor in the TTC denominator [m/s]


@dataclass(frozen=True)
class SfmParams:
    tau: float = 0.5            # relaxation time [s]
    A: float = 2.0              # repulsion magnitude [m/s^2]
    B: float = 1.0              # repulsion range [m]
    r: float = 1.0              # combined body radius [m]
    goal_y: float = 4.0         # goal position past the lane [m]
    desired_speed: float = 1.4  # [m/s]

    def __post_init__(self):
        if self.tau <= 0 or self.B <= 0 or self.A < 0:
            raise ValueError("need tau > 0, B > 0, A >= 0")

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "SfmParams":
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})


@dataclass(frozen=True)
class PredictionTrace:
    """Horizon-indexed predicted pedestrian trajectory, entries 0..n."""
    y: np.ndarray
    vy: np.ndarray

    def __len__(self) -> int:
        return len(self.y)


def ttc(world: WorldState, v_ped_ref: float, lane_y: float) -> float:
    """Difference of the vehicle's and pedestrian's arrival times at the
    conflict point; negative means the pedestrian arrives first."""
    veh, ped = world.vehicle, world.pedestrian
    t_veh = (ped.x_cross - veh.x) / max(veh.v, V_EPS)
    t_ped = (lane_y - ped.y) / v_ped_ref
    return t_veh - t_ped


def sigmoid_speed(ttc_val: float, c: float, v_ped_ref: float) -> float:
    """Crossing-probability-scaled pedestrian speed, strictly in (0, v_ref)."""
    z = min(max(-ttc_val + c, -500.0), 500.0)
    return v_ped_ref / (1.0 + math.exp(z))


def _repulsion_y(ped_x: float, ped_y: float, veh: VehicleState, p: SfmParams) -> float:
    dx = ped_x - veh.x
    dy = ped_y - veh.y_lane
    d = math.hypot(dx, dy)
    mag = p.A * math.exp((p.r - d) / p.B)
    if d < 1e-9:
        return -mag  # degenerate overlap: push away from the lane
    return mag * dy / d


def sfm_step(ped: PedestrianState, vehicle: VehicleState, p: SfmParams,
             dt: float) -> PedestrianState:
    """One semi-implicit Euler step of the social force model.

    Motion is restricted to the crossing line, so only the y-component of
    the forces acts; vy is kept non-negative (the pedestrian waits rather
    than retreats).
    """
    e_goal = 1.0 if p.goal_y >= ped.y else -1.0
    a = (p.desired_speed * e_goal - ped.vy) / p.tau
    a += _repulsion_y(ped.x_cross, ped.y, vehicle, p)
    vy = max(ped.vy + dt * a, 0.0)
    return PedestrianState(
        x_cross=ped.x_cross, y=ped.y + dt * vy, vy=vy, intention=ped.intention)


def sfm_predict(world: WorldState, p: SfmParams, n: int, dt: float,
                assumed_vehicle_speed: float) -> PredictionTrace:
    """Roll the SFM forward with the vehicle extrapolated at constant speed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ped = world.pedestrian
    veh_x = world.vehicle.x
    y = np.empty(n + 1)
    vy = np.empty(n + 1)
    y[0], vy[0] = ped.y, ped.vy
    for i in range(n):
        veh = VehicleState(x=veh_x + i * dt * assumed_vehicle_speed,
                           v=assumed_vehicle_speed,
                           y_lane=world.vehicle.y_lane)
        ped = sfm_step(ped, veh, p, dt)
        y[i + 1], vy[i + 1] = ped.y, ped.vy
    return PredictionTrace(y=y, vy=vy)


def constant_speed_predict(ped: PedestrianState, n: int, dt: float) -> PredictionTrace:
    if n < 1:
        raise ValueError("n must be >= 1")
    idx = np.arange(n + 1)
    return PredictionTrace(y=ped.y + idx * dt * ped.vy,
                           vy=np.full(n + 1, ped.vy))


def mixed_model_sample(rng: Rng, p_sfm: float = 0.5) -> str:
    """Per-episode Bernoulli choice between 'sfm' and 'constant'."""
    if not 0.0 <= p_sfm <= 1.0:
        raise ValueError("p_sfm must be in [0,1]")
    return "sfm" if rng.bernoulli(p_sfm) else "constant"
