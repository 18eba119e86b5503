import math

import numpy as np
import pytest

from ssmpc import engine
from ssmpc.controllers import ControlDecision, make_controller, rollout_explicit
from ssmpc.engine import (
    ConstantSpeedPedestrian,
    ScoreWeights,
    SigmoidPedestrian,
    run_batch,
    run_episode,
    score,
    step,
)
from ssmpc.ped_models import ttc
from ssmpc.types import ControllerConfig, Rng, RunMetrics, ScenarioSpec

from conftest import make_world


class BrakeController:
    """Test stub: always commands maximal braking."""

    def __init__(self, cfg):
        self.cfg = cfg

    def decide(self, world, cfg=None):
        return ControlDecision(u0=self.cfg.a_min, u_seq=np.array([self.cfg.a_min]),
                               predicted_cost=0.0, solve_time=0.0)


class TestStep:
    def test_uniform_motion_far_pedestrian(self):
        w = make_world(x_ped=1e6, v_veh=6.0)
        out = step(w, 0.0, 0.1, ConstantSpeedPedestrian())
        assert out.vehicle.x == pytest.approx(w.vehicle.x + 0.6)
        assert out.vehicle.v == 6.0

    def test_speed_clamps_at_zero(self):
        w = make_world(v_veh=0.1)
        out = step(w, -3.0, 0.1, ConstantSpeedPedestrian())
        assert out.vehicle.v == 0.0

    def test_clock_is_exact_multiple_of_dt(self):
        w = make_world()
        for _ in range(7):
            w = step(w, 0.0, 0.1, ConstantSpeedPedestrian())
        assert w.t == 7 * 0.1
        assert w.step_index == 7

    def test_single_step_matches_explicit_rollout(self, cfg, spec):
        # engine stepping under the sigmoid pedestrian equals the
        # controller-internal rollout, state for state
        w = make_world()
        model = SigmoidPedestrian(cfg.c, spec.v_ped_ref, spec.lane_y)
        u = 1.3
        out = step(w, u, spec.dt, model)
        (_, _, _, _), (x1, v1, y1, vy1) = rollout_explicit(w, [u], cfg, spec)
        assert abs(out.vehicle.x - x1) < 1e-9
        assert abs(out.vehicle.v - v1) < 1e-9
        assert abs(out.pedestrian.y - y1) < 1e-9
        assert abs(out.pedestrian.vy - vy1) < 1e-9


def const_scenario(**overrides) -> ScenarioSpec:
    dists = {
        "x_ped": {"kind": "const", "value": 0.0},
        "y_offset": {"kind": "const", "value": 3.5},
        "vy_ped": {"kind": "const", "value": 1.4},
        "v_veh": {"kind": "const", "value": 6.0},
        "x_veh": {"kind": "const", "value": -12.5},
    }
    dists.update(overrides.pop("dists", {}))
    return ScenarioSpec(init_distributions=dists, **overrides)


class TestRunEpisode:
    def test_no_interaction_passes_at_kinematic_time(self, cfg):
        # pedestrian already crossed at t=0: vehicle holds the reference
        spec = const_scenario(dists={"y_offset": {"kind": "const", "value": -3.0}})
        rec = run_episode(spec, make_controller("rule", cfg, spec), Rng(1), cfg)
        assert rec.terminal_reason == "passed"
        expected = (0.0 + engine.PASS_CLEARANCE - (-12.5)) / 6.0
        assert rec.metrics.t_total == pytest.approx(expected, abs=2 * spec.dt)

    def test_overlap_at_start_is_collision_at_step_zero(self, cfg):
        spec = const_scenario(dists={
            "x_ped": {"kind": "const", "value": -12.5},
            "y_offset": {"kind": "const", "value": 0.0}})
        rec = run_episode(spec, make_controller("rule", cfg, spec), Rng(1), cfg)
        assert rec.terminal_reason == "collision"
        assert rec.metrics.collided and len(rec.steps) == 0

    def test_pinned_vehicle_times_out_at_max_time(self, cfg):
        spec = const_scenario(dists={"v_veh": {"kind": "const", "value": 0.0}})
        rec = run_episode(spec, BrakeController(cfg), Rng(1), cfg)
        assert rec.terminal_reason == "timeout"
        assert rec.metrics.timed_out
        assert rec.metrics.t_total == pytest.approx(spec.max_time, abs=spec.dt)
        assert rec.metrics.t_total <= spec.max_time

    def test_metrics_consistent_with_trace(self, cfg, spec):
        rec = run_episode(spec, make_controller("rule", cfg, spec), Rng(5), cfg)
        recomputed_ttc = min(ttc(s.world, spec.v_ped_ref, spec.lane_y)
                             for s in rec.steps)
        assert rec.metrics.ttc_min == pytest.approx(recomputed_ttc)
        assert rec.metrics.a_max_abs == max(abs(s.decision.u0) for s in rec.steps)
        assert rec.metrics.t_total == len(rec.steps) * spec.dt

    def test_no_collision_implies_distance_above_radius(self, cfg, spec):
        rec = run_episode(spec, make_controller("rule", cfg, spec), Rng(9), cfg)
        if not rec.metrics.collided:
            dmin = min(engine._distance(s.world) for s in rec.steps)
            assert dmin >= cfg.collision_radius

    def test_controller_exception_becomes_braking(self, cfg, spec):
        class Exploding:
            cfg = ControllerConfig()

            def decide(self, world, cfg=None):
                raise RuntimeError("boom")

        rec = run_episode(spec, Exploding(), Rng(2), cfg)
        assert rec.terminal_reason in ("passed", "timeout", "collision")
        assert all(s.decision.u0 == cfg.a_min for s in rec.steps)

    def test_jsonl_trace_roundtrips(self, cfg, spec):
        import json
        rec = run_episode(spec, make_controller("rule", cfg, spec), Rng(5), cfg)
        lines = rec.to_jsonl().strip().split("\n")
        assert len(lines) == len(rec.steps) + 1
        assert json.loads(lines[-1])["terminal"] == rec.terminal_reason


class TestScore:
    def test_arithmetic(self):
        m = RunMetrics(ttc_min=2, t_total=5, a_max_abs=1, collided=False,
                       timed_out=False)
        assert score(m) == pytest.approx(-4.0)

    def test_collision_penalty(self):
        m = RunMetrics(ttc_min=2, t_total=5, a_max_abs=1, collided=True,
                       timed_out=False)
        assert score(m, ScoreWeights(collision_penalty=100.0)) == pytest.approx(-104.0)

    def test_weight_zeroing(self):
        m = RunMetrics(ttc_min=2, t_total=5, a_max_abs=1, collided=False,
                       timed_out=False)
        assert score(m, ScoreWeights(k2=0, k3=0)) == pytest.approx(2.0)

    def test_negative_weights_rejected(self):
        with pytest.raises(ValueError):
            ScoreWeights(k1=-1)


class TestRunBatch:
    def test_single_run_mean_is_that_run(self, cfg, spec):
        r = run_batch(spec, "rule", cfg, 1, seed=11)
        assert r.mean_score == r.scores[0]

    def test_same_seed_identical_means(self, cfg, spec):
        a = run_batch(spec, "rule", cfg, 5, seed=11)
        b = run_batch(spec, "rule", cfg, 5, seed=11)
        assert a.scores == b.scores
        assert a.mean_score == b.mean_score

    def test_paired_scenarios_across_controllers(self, cfg, spec):
        # controllers never consume the stream: same seed, same initial states
        a = run_batch(spec, "rule", cfg, 4, seed=3)
        b = run_batch(spec, "implicit", cfg, 4, seed=3)
        for ra, rb in zip(a.records, b.records):
            assert ra.steps[0].world == rb.steps[0].world

    def test_parallel_equals_serial(self, cfg, spec):
        serial = run_batch(spec, "rule", cfg, 4, seed=3, workers=1)
        parallel = run_batch(spec, "rule", cfg, 4, seed=3, workers=2)
        assert serial.scores == parallel.scores

    def test_mixed_model_uses_both_kinds(self, cfg):
        spec = ScenarioSpec(ped_model="mixed")
        r = run_batch(spec, "rule", cfg, 30, seed=1)
        kinds = {rec.ped_model for rec in r.records}
        assert kinds == {"SfmPedestrian", "ConstantSpeedPedestrian"}
