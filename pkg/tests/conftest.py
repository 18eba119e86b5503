import numpy as np
import pytest
from hypothesis import settings

from ssmpc.types import (
    ControllerConfig,
    PedestrianState,
    ScenarioSpec,
    VehicleState,
    WorldState,
)

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


@pytest.fixture
def spec():
    return ScenarioSpec()


@pytest.fixture
def cfg():
    return ControllerConfig()


def make_world(x_veh=-12.5, v_veh=6.0, x_ped=0.0, y_ped=-3.5, vy=1.4,
               intention=0.8, lane_y=0.0, t=0.0, step_index=0) -> WorldState:
    return WorldState(
        vehicle=VehicleState(x=x_veh, v=v_veh, y_lane=lane_y),
        pedestrian=PedestrianState(x_cross=x_ped, y=y_ped, vy=vy,
                                   intention=intention),
        t=t, step_index=step_index)


@pytest.fixture
def world():
    return make_world()
