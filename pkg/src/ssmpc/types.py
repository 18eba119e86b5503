"""Shared domain types, scenario geometry, and deterministic sampling.

Coordinate convention: the vehicle drives in +x along the lane centerline
at y = lane_y (0 by default); the pedestrian walks in +y on a fixed
crossing line x = x_cross and starts on the negative-y side of the lane.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np


class Zone(Enum):
    SAFE = "safe"
    NEAR = "near"
    ON_LANE = "on_lane"
    CROSSED = "crossed"


@dataclass(frozen=True)
class VehicleState:
    x: float          # longitudinal position along the lane [m]
    v: float          # longitudinal speed [m/s]
    y_lane: float = 0.0  # fixed lateral coordinate of the vehicle path [m]


@dataclass(frozen=True)
class PedestrianState:
    x_cross: float    # fixed crossing-line abscissa [m]
    y: float          # lateral position [m]
    vy: float         # lateral speed, >= 0 [m/s]
    intention: float  # willingness to cross, in [0, 1]

    def __post_init__(self):
        if not 0.0 <= self.intention <= 1.0:
            raise ValueError(f"intention must be in [0,1], got {self.intention}")


@dataclass(frozen=True)
class WorldState:
    vehicle: VehicleState
    pedestrian: PedestrianState
    t: float = 0.0
    step_index: int = 0


@dataclass(frozen=True)
class ControllerConfig:
    """Weights, horizon, bounds, and safety parameters for the controllers.

    Defaults are a general-purpose balance: the speed-tracking weight is
    high enough that intention lowering lets the vehicle commit past a
    hesitant, standing pedestrian instead of yielding forever.  The
    benchmark evaluations use the tuner-optimized fragments shipped in
    ``configs/`` instead (see ``ssmpc tune``); thresholds t_brake/k_p
    belong to the rule-based baseline.
    """
    w1: float = 0.0224469745250941    # acceleration effort weight
    w2: float = 0.30                  # speed tracking weight
    w3: float = 50.94011902587739     # inverse-square distance weight
    n: int = 20               # horizon steps
    c: float = 2.0            # sigmoid correction factor [s]; the crossing
                              # probability is 0.5 at a 2 s TTC margin —
                              # a hesitant-pedestrian character. Committed-
                              # crosser evaluations override this per
                              # scenario (see configs/).
    d_min: float = 3.0        # minimal safe distance [m]
    v_min: float = 0.0
    v_max: float = 8.3
    a_min: float = -3.0
    a_max: float = 2.0
    collision_radius: float = 1.0
    t_brake: float = 1.1290864915744585  # rule-based: brake when TTC below this [s]
    k_p: float = 0.5206842059007256      # rule-based: proportional speed-recovery gain [1/s]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("horizon n must be >= 1")
        if self.v_min > self.v_max:
            raise ValueError("v_min > v_max")
        if not (self.a_min < 0.0 < self.a_max):
            raise ValueError("need a_min < 0 < a_max")
        # d_min may drop below collision_radius transiently via intention
        # lowering; the engine's collision check is the hard floor.
        if self.d_min < 0.0 or self.collision_radius <= 0.0:
            raise ValueError("need d_min >= 0 and collision_radius > 0")
        if min(self.w1, self.w2, self.w3) < 0:
            raise ValueError("weights must be non-negative")

    def with_(self, **kw) -> "ControllerConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    @classmethod
    def from_dict(cls, d: dict) -> "ControllerConfig":
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        cfg = cls(**known)
        if not cfg.d_min > cfg.collision_radius:
            raise ValueError("configured d_min must exceed collision_radius")
        return cfg


@dataclass
class RunMetrics:
    ttc_min: float
    t_total: float
    a_max_abs: float
    collided: bool
    timed_out: bool
    compute_times: list[float] = field(default_factory=list)


_DEFAULT_INIT_DISTRIBUTIONS = {
    "x_ped": {"kind": "normal", "mean": 0.0, "std": 1.0},
    # lateral start offset from the lane, clamped below at floor
    "y_offset": {"kind": "normal", "mean": 3.5, "std": 0.5, "floor": 2.0},
    "vy_ped": {"kind": "normal", "mean": 1.4, "std": 0.1},
    "v_veh": {"kind": "normal", "mean": 6.0, "std": 0.5},
    "x_veh": {"kind": "const", "value": -12.5},
}


@dataclass(frozen=True)
class ScenarioSpec:
    dt: float = 0.1
    max_time: float = 30.0
    lane_y: float = 0.0
    zone_near: tuple[float, float] = (-2.0, -0.5)   # near-zone band in y
    zone_safe_boundary: float = -2.0                # safe zone ends here
    init_distributions: dict = field(default_factory=lambda: dict(_DEFAULT_INIT_DISTRIBUTIONS))
    v_ped_ref: float = 1.4
    v_veh_ref: float = 6.0
    intention_mode: str = "crossing"   # crossing | yielding | manual
    ped_model: str = "sfm"             # sfm | constant | mixed
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        lo, hi = self.zone_near
        if not (lo < hi <= self.lane_y):
            raise ValueError("near-zone band must lie below the lane line")
        if self.intention_mode not in ("crossing", "yielding", "manual"):
            raise ValueError(f"unknown intention_mode {self.intention_mode!r}")
        if self.ped_model not in ("sfm", "constant", "mixed"):
            raise ValueError(f"unknown ped_model {self.ped_model!r}")

    @property
    def lane_half_width(self) -> float:
        # on-lane band is symmetric about lane_y, bounded below by the
        # near-zone's upper edge
        return self.lane_y - self.zone_near[1]

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "max_time": self.max_time,
            "lane_y": self.lane_y,
            "zone_near": list(self.zone_near),
            "zone_safe_boundary": self.zone_safe_boundary,
            "init_distributions": self.init_distributions,
            "v_ped_ref": self.v_ped_ref,
            "v_veh_ref": self.v_veh_ref,
            "intention_mode": self.intention_mode,
            "ped_model": self.ped_model,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        d = dict(d)
        for key in d:
            if key not in ("dt", "max_time", "lane_y", "zone_near",
                           "zone_safe_boundary", "init_distributions",
                           "v_ped_ref", "v_veh_ref", "intention_mode",
                           "ped_model", "seed"):
                raise ValueError(f"unknown scenario field {key!r}")
        if "zone_near" in d:
            d["zone_near"] = tuple(d["zone_near"])
        if "init_distributions" in d:
            dists = dict(_DEFAULT_INIT_DISTRIBUTIONS)
            dists.update(d["init_distributions"])
            d["init_distributions"] = dists
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "ScenarioSpec":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "ScenarioSpec":
        with open(path) as f:
            return cls.from_dict(json.load(f))


class Rng:
    """Seeded, portable random stream.

    Uniform doubles come from PCG64; normals are produced by an explicit
    Box-Muller transform over those uniforms, so the sample sequence is
    identical across platforms for a given seed.
    """

    def __init__(self, seed: int, _spawn_key: tuple = ()):
        self.seed = seed
        self._spawn_key = _spawn_key
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(seed, spawn_key=_spawn_key)))
        self._normal_cache: Optional[float] = None

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return float(self._gen.random() * (hi - lo) + lo)

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        if self._normal_cache is not None:
            z = self._normal_cache
            self._normal_cache = None
        else:
            u1 = self._gen.random()
            u2 = self._gen.random()
            while u1 <= 1e-300:
                u1 = self._gen.random()
            r = math.sqrt(-2.0 * math.log(u1))
            z = r * math.cos(2.0 * math.pi * u2)
            self._normal_cache = r * math.sin(2.0 * math.pi * u2)
        return mean + std * z

    def bernoulli(self, p: float) -> bool:
        return self._gen.random() < p

    def spawn(self, key: int) -> "Rng":
        """Independent child stream; (seed, key) fully determines it."""
        return Rng(self.seed, self._spawn_key + (key,))


def zone_of(ped: PedestrianState, spec: ScenarioSpec) -> Zone:
    """Classify the pedestrian's lateral position against the zone bands.

    Boundary values go to the zone closer to the lane.
    """
    near_lo, near_hi = spec.zone_near
    far_edge = spec.lane_y + spec.lane_half_width
    if ped.y > far_edge:
        return Zone.CROSSED
    if ped.y >= near_hi:
        return Zone.ON_LANE
    if ped.y >= near_lo:
        return Zone.NEAR
    return Zone.SAFE


def _draw(rng: Rng, desc: dict) -> float:
    kind = desc.get("kind", "normal")
    if kind == "const":
        return float(desc["value"])
    if kind == "normal":
        val = rng.normal(desc.get("mean", 0.0), desc.get("std", 1.0))
    elif kind == "uniform":
        val = rng.uniform(desc["lo"], desc["hi"])
    else:
        raise ValueError(f"unknown distribution kind {kind!r}")
    if "floor" in desc:
        val = max(val, desc["floor"])
    return val


def sample_scenario(rng: Rng, spec: ScenarioSpec) -> tuple[WorldState, float]:
    """Draw a perturbed initial state and pedestrian intention.

    Non-positive pedestrian/vehicle speed draws are rejected and redrawn.
    """
    dists = spec.init_distributions
    x_ped = _draw(rng, dists["x_ped"])
    y_offset = _draw(rng, dists["y_offset"])
    vy = _draw(rng, dists["vy_ped"])
    while vy <= 0.0 and dists["vy_ped"].get("kind") != "const":
        vy = _draw(rng, dists["vy_ped"])
    v_veh = _draw(rng, dists["v_veh"])
    while v_veh <= 0.0 and dists["v_veh"].get("kind") != "const":
        v_veh = _draw(rng, dists["v_veh"])
    x_veh = _draw(rng, dists["x_veh"])

    if spec.intention_mode == "crossing":
        intention = rng.uniform(0.5, 1.0)
    elif spec.intention_mode == "yielding":
        intention = rng.uniform(0.0, 0.5)
    else:  # manual: fixed value from the distributions table, overridden live
        intention = _draw(rng, dists.get("intention", {"kind": "const", "value": 0.5}))

    world = WorldState(
        vehicle=VehicleState(x=x_veh, v=v_veh, y_lane=spec.lane_y),
        pedestrian=PedestrianState(
            x_cross=x_ped,
            y=spec.lane_y - y_offset,
            vy=max(vy, 0.0),
            intention=min(max(intention, 0.0), 1.0),
        ),
    )
    return world, world.pedestrian.intention
