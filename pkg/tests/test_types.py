import json

import pytest
from hypothesis import given, strategies as st

from ssmpc.types import (
    ControllerConfig,
    PedestrianState,
    Rng,
    ScenarioSpec,
    Zone,
    sample_scenario,
    zone_of,
)


def ped(y, intention=0.8):
    return PedestrianState(x_cross=0.0, y=y, vy=1.0, intention=intention)


class TestZoneOf:
    # default geometry: near [-2.0, -0.5), on-lane [-0.5, +0.5], lane at 0

    def test_far_side_is_safe(self, spec):
        assert zone_of(ped(-6.0), spec) is Zone.SAFE

    def test_inside_band_is_near(self, spec):
        assert zone_of(ped(-1.0), spec) is Zone.NEAR

    def test_past_lane_half_width_is_crossed(self, spec):
        assert zone_of(ped(2.5), spec) is Zone.CROSSED

    def test_boundaries_go_to_zone_closer_to_lane(self, spec):
        assert zone_of(ped(-2.0), spec) is Zone.NEAR
        assert zone_of(ped(-0.5), spec) is Zone.ON_LANE
        assert zone_of(ped(0.5), spec) is Zone.ON_LANE

    @given(ys=st.lists(st.floats(-50, 50), min_size=2, max_size=20))
    def test_monotone_in_y(self, ys):
        spec = ScenarioSpec()
        order = [Zone.SAFE, Zone.NEAR, Zone.ON_LANE, Zone.CROSSED]
        ranks = [order.index(zone_of(ped(y), spec)) for y in sorted(ys)]
        assert ranks == sorted(ranks)


class _ZeroNoiseRng(Rng):
    """Stub: every normal draw returns its mean."""

    def normal(self, mean=0.0, std=1.0):
        return mean


class _BiasedRng(Rng):
    """Stub: every normal draw is mean + std * z for a fixed z."""

    def __init__(self, seed, z):
        super().__init__(seed)
        self.z = z

    def normal(self, mean=0.0, std=1.0):
        return mean + std * self.z


class TestSampleScenario:
    def test_zero_noise_reproduces_nominal_values(self, spec):
        world, intention = sample_scenario(_ZeroNoiseRng(0), spec)
        assert world.pedestrian.x_cross == 0.0
        assert world.pedestrian.y == -3.5
        assert world.pedestrian.vy == 1.4
        assert world.vehicle.v == 6.0
        assert world.vehicle.x == -12.5

    def test_y_offset_clamped_at_two_meters(self, spec):
        # offset draw 3.5 - 2.0 = 1.5 clamps up to 2.0
        world, _ = sample_scenario(_BiasedRng(0, z=-4.0), spec)
        assert world.pedestrian.y == -2.0

    def test_same_seed_same_states(self, spec):
        w1, i1 = sample_scenario(Rng(123), spec)
        w2, i2 = sample_scenario(Rng(123), spec)
        assert w1 == w2 and i1 == i2

    def test_rejects_nonpositive_speed_draws(self, spec):
        for seed in range(200):
            world, _ = sample_scenario(Rng(seed), spec)
            assert world.pedestrian.vy > 0
            assert world.vehicle.v > 0

    @pytest.mark.parametrize("mode,lo,hi", [("crossing", 0.5, 1.0),
                                            ("yielding", 0.0, 0.5)])
    def test_intention_mode_ranges(self, mode, lo, hi):
        spec = ScenarioSpec(intention_mode=mode)
        for seed in range(100):
            _, intention = sample_scenario(Rng(seed), spec)
            assert lo <= intention <= (hi if mode == "crossing" else hi - 1e-12)


class TestRng:
    def test_reproducible_sequences(self):
        a, b = Rng(7), Rng(7)
        seq_a = [a.normal(), a.uniform(0, 1), a.normal(2, 3), a.uniform(-1, 1)]
        seq_b = [b.normal(), b.uniform(0, 1), b.normal(2, 3), b.uniform(-1, 1)]
        assert seq_a == seq_b

    def test_spawned_streams_deterministic_and_independent(self):
        a = Rng(7).spawn(3)
        b = Rng(7).spawn(3)
        c = Rng(7).spawn(4)
        assert a.normal() == b.normal()
        assert a.uniform() == b.uniform()
        assert Rng(7).spawn(3).normal() != c.normal()


class TestScenarioSpecSchema:
    def test_json_round_trip(self, spec):
        again = ScenarioSpec.from_json(spec.to_json())
        assert again == spec

    def test_unknown_field_rejected(self):
        bad = dict(json.loads(ScenarioSpec().to_json()), bogus=1)
        with pytest.raises(ValueError, match="bogus"):
            ScenarioSpec.from_dict(bad)

    def test_zone_band_must_sit_below_lane(self):
        with pytest.raises(ValueError):
            ScenarioSpec(zone_near=(0.5, 1.0))

    def test_bad_dt_rejected(self):
        with pytest.raises(ValueError):
            ScenarioSpec(dt=0.0)


class TestControllerConfig:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            ControllerConfig(n=0)
        with pytest.raises(ValueError):
            ControllerConfig(a_min=1.0)
        with pytest.raises(ValueError):
            ControllerConfig(w1=-0.1)

    def test_from_dict_requires_safe_distance_above_radius(self):
        with pytest.raises(ValueError, match="collision_radius"):
            ControllerConfig.from_dict({"d_min": 0.5, "collision_radius": 1.0})

    def test_round_trip(self):
        cfg = ControllerConfig(w1=0.5, n=7)
        assert ControllerConfig.from_dict(cfg.to_dict()) == cfg
