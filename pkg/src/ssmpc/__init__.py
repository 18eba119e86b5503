"""Shared-space vehicle-pedestrian negotiation toolkit.

Simulator, MPC/rule-based controllers, Monte-Carlo benchmark harness,
weight tuner, and a live human-in-the-loop session server.
"""

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

__all__ = [
    "ControllerConfig",
    "PedestrianState",
    "Rng",
    "RunMetrics",
    "ScenarioSpec",
    "VehicleState",
    "WorldState",
    "Zone",
    "sample_scenario",
    "zone_of",
]

__version__ = "0.1.0"
