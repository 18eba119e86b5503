"""Command-line entry point: compare, tune, trace, serve.

CSV artifacts are reproducible by design: wall-clock timings go to
timing.json (and the human-readable table), never into the CSVs unless
--timing-in-csv is passed.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from ssmpc import engine, live, tuner
from ssmpc.controllers import CONTROLLER_NAMES, make_controller
from ssmpc.types import ControllerConfig, Rng, ScenarioSpec

RUNS_CSV_HEADER = ["run", "seed", "ttc_min", "t_total", "a_max",
                   "collided", "score", "mean_solve_ms"]


def _load_scenario(path: str) -> ScenarioSpec:
    try:
        return ScenarioSpec.load(path)
    except (ValueError, TypeError, KeyError) as e:
        sys.exit(f"scenario file {path!r} is invalid: {e}")
    except OSError as e:
        sys.exit(f"cannot read scenario file: {e}")


def _load_configs(path: str | None) -> dict[str, ControllerConfig]:
    """Per-controller config fragments: {"explicit": {...}, ...} or a single
    fragment applied to every controller."""
    if path is None:
        return {}
    with open(path) as f:
        data = json.load(f)
    if not isinstance(data, dict):
        sys.exit("config file must be a JSON object")
    if any(k in CONTROLLER_NAMES for k in data):
        return {k: ControllerConfig.from_dict(v) for k, v in data.items()}
    cfg = ControllerConfig.from_dict(data)
    return {name: cfg for name in CONTROLLER_NAMES}


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def cmd_compare(args) -> int:
    spec = _load_scenario(args.scenario)
    controllers = [c.strip() for c in args.controllers.split(",") if c.strip()]
    for name in controllers:
        if name not in CONTROLLER_NAMES:
            sys.exit(f"unknown controller {name!r}; valid names: "
                     + ", ".join(CONTROLLER_NAMES))
    configs = _load_configs(args.configs)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    timing = {}
    safety_collided = False
    for name in controllers:
        cfg = configs.get(name, ControllerConfig())
        result = engine.run_batch(spec, name, cfg, args.runs, args.seed,
                                  intention_lowering=not args.no_lowering)
        rows.append({"name": name, "mean_score": result.mean_score,
                     "std_score": result.std_score,
                     "collisions": result.collisions,
                     "mean_compute_s": result.mean_compute_time})
        timing[name] = {"mean_compute_s": result.mean_compute_time}
        if name == args.safety_critical and result.collisions > 0:
            safety_collided = True

        with open(out / f"runs_{name}.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(RUNS_CSV_HEADER)
            for i, rec in enumerate(result.records):
                m = rec.metrics
                mean_ms = ""
                if args.timing_in_csv and m.compute_times:
                    mean_ms = _fmt(1000.0 * sum(m.compute_times) / len(m.compute_times))
                w.writerow([i, rec.seed, _fmt(m.ttc_min), _fmt(m.t_total),
                            _fmt(m.a_max_abs), int(m.collided),
                            _fmt(result.scores[i]), mean_ms])
        if args.episodes:
            with open(out / f"episodes_{name}.jsonl", "w") as f:
                for rec in result.records:
                    f.write(rec.to_jsonl())

    with open(out / "table.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["controller", "mean_score", "std_score", "collisions"])
        for r in rows:
            w.writerow([r["name"], _fmt(r["mean_score"]), _fmt(r["std_score"]),
                        r["collisions"]])

    lines = [f"scenario={args.scenario} runs={args.runs} seed={args.seed}",
             f"{'controller':<10} {'mean J':>10} {'std':>8} {'collisions':>10} {'comp [s]':>10}"]
    for r in rows:
        lines.append(f"{r['name']:<10} {r['mean_score']:>10.3f} {r['std_score']:>8.3f} "
                     f"{r['collisions']:>10d} {r['mean_compute_s']:>10.4f}")
    table = "\n".join(lines)
    (out / "table.txt").write_text(table + "\n")
    (out / "timing.json").write_text(json.dumps(timing, indent=2) + "\n")
    print(table)
    return 1 if safety_collided else 0


def cmd_tune(args) -> int:
    spec = _load_scenario(args.scenario)
    if args.controller not in CONTROLLER_NAMES:
        sys.exit(f"unknown controller {args.controller!r}; valid names: "
                 + ", ".join(CONTROLLER_NAMES))
    if args.controller == "rule":
        params = {"t_brake": tuner.ParamRange(0.5, 5.0),
                  "k_p": tuner.ParamRange(0.2, 3.0)}
    else:
        params = {"w1": tuner.ParamRange(1e-3, 1.0, log=True),
                  "w2": tuner.ParamRange(1e-2, 10.0, log=True),
                  "w3": tuner.ParamRange(1e-2, 100.0, log=True)}
    space = tuner.SearchSpace(params=params, budget=args.budget, seed=args.seed,
                              screen_runs=args.screen_runs, full_runs=args.runs)

    def evaluate(p: dict, n_runs: int) -> float:
        cfg = ControllerConfig().with_(**p)
        return engine.run_batch(spec, args.controller, cfg, n_runs,
                                args.seed).mean_score

    best, best_score, trials = tuner.tune(space, evaluate)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    frag = out / f"best_{args.controller}.json"
    frag.write_text(json.dumps(
        {args.controller: ControllerConfig().with_(**best).to_dict()}, indent=2) + "\n")
    tuner.write_trial_log(trials, out / f"trials_{args.controller}.csv")
    print(f"best {args.controller} params: {best} (mean J = {best_score:.3f})")
    print(f"wrote {frag}")
    return 0


def cmd_trace(args) -> int:
    spec = _load_scenario(args.scenario)
    if args.controller not in CONTROLLER_NAMES:
        sys.exit(f"unknown controller {args.controller!r}; valid names: "
                 + ", ".join(CONTROLLER_NAMES))
    configs = _load_configs(args.configs)
    cfg = configs.get(args.controller, ControllerConfig())
    controller = make_controller(args.controller, cfg, spec)
    rec = engine.run_episode(spec, controller, Rng(args.seed), cfg,
                             intention_lowering=not args.no_lowering)
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["t", "x_veh", "v_veh", "y_ped", "vy_ped", "intention", "u", "ttc"])
        for s in rec.steps:
            w.writerow([_fmt(s.world.t), _fmt(s.world.vehicle.x),
                        _fmt(s.world.vehicle.v), _fmt(s.world.pedestrian.y),
                        _fmt(s.world.pedestrian.vy), _fmt(s.intention),
                        _fmt(s.decision.u0), _fmt(s.ttc)])
    print(f"{rec.terminal_reason} after {rec.metrics.t_total:.1f} s; wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    live.run_forever(args.bind, args.speed)
    return 0


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="ssmpc",
                                description="Shared-space vehicle-pedestrian "
                                            "negotiation benchmark")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compare", help="run the Monte-Carlo controller comparison")
    c.add_argument("--scenario", required=True)
    c.add_argument("--controllers", default="explicit,implicit,rule")
    c.add_argument("--runs", type=int, default=100)
    c.add_argument("--seed", type=int, default=42)
    c.add_argument("--out", required=True)
    c.add_argument("--configs", help="JSON config fragment(s) from `ssmpc tune`")
    c.add_argument("--no-lowering", action="store_true")
    c.add_argument("--episodes", action="store_true", help="also dump per-step JSONL logs")
    c.add_argument("--safety-critical", help="exit nonzero if this controller collides")
    c.add_argument("--timing-in-csv", action="store_true",
                   help="put wall-clock means into runs CSVs (breaks reproducibility)")
    c.set_defaults(func=cmd_compare)

    t = sub.add_parser("tune", help="random-search weight tuning")
    t.add_argument("--scenario", required=True)
    t.add_argument("--controller", default="explicit")
    t.add_argument("--budget", type=int, default=40)
    t.add_argument("--seed", type=int, default=42)
    t.add_argument("--runs", type=int, default=100)
    t.add_argument("--screen-runs", type=int, default=20)
    t.add_argument("--out", default="tuning")
    t.set_defaults(func=cmd_tune)

    tr = sub.add_parser("trace", help="single-episode per-step CSV trace")
    tr.add_argument("--scenario", required=True)
    tr.add_argument("--controller", default="explicit")
    tr.add_argument("--seed", type=int, default=42)
    tr.add_argument("--out", default="trace.csv")
    tr.add_argument("--configs")
    tr.add_argument("--no-lowering", action="store_true")
    tr.set_defaults(func=cmd_trace)

    s = sub.add_parser("serve", help="start the live human-in-the-loop server")
    s.add_argument("--bind", default=live.DEFAULT_BIND)
    s.add_argument("--speed", type=float, default=1.0)
    s.set_defaults(func=cmd_serve)

    args = p.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
