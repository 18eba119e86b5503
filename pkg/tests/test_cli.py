import csv
import json

import pytest

from ssmpc.cli import main
from ssmpc.types import ControllerConfig


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({"seed": 3, "intention_mode": "crossing",
                                "ped_model": "sfm"}))
    return str(path)


def run_compare(tmp_path, scenario_file, name, *extra):
    out = tmp_path / name
    code = main(["compare", "--scenario", scenario_file, "--controllers", "rule",
                 "--runs", "3", "--seed", "5", "--out", str(out), *extra])
    return code, out


class TestCompare:
    def test_writes_expected_artifacts(self, tmp_path, scenario_file, capsys):
        code, out = run_compare(tmp_path, scenario_file, "a")
        assert code == 0
        for fname in ("runs_rule.csv", "table.csv", "table.txt", "timing.json"):
            assert (out / fname).exists()
        assert "rule" in capsys.readouterr().out

    def test_reruns_are_byte_identical(self, tmp_path, scenario_file, capsys):
        _, out1 = run_compare(tmp_path, scenario_file, "a")
        _, out2 = run_compare(tmp_path, scenario_file, "b")
        for fname in ("runs_rule.csv", "table.csv"):
            assert (out1 / fname).read_bytes() == (out2 / fname).read_bytes()

    def test_runs_csv_contract(self, tmp_path, scenario_file, capsys):
        _, out = run_compare(tmp_path, scenario_file, "a")
        with open(out / "runs_rule.csv") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 3
        assert [r["run"] for r in rows] == ["0", "1", "2"]
        # wall-clock timing stays out of the CSV unless explicitly requested
        assert all(r["mean_solve_ms"] == "" for r in rows)
        float(rows[0]["score"])

    def test_timing_in_csv_flag(self, tmp_path, scenario_file, capsys):
        _, out = run_compare(tmp_path, scenario_file, "a", "--timing-in-csv")
        with open(out / "runs_rule.csv") as f:
            rows = list(csv.DictReader(f))
        assert all(float(r["mean_solve_ms"]) >= 0 for r in rows)

    def test_episodes_flag_writes_jsonl(self, tmp_path, scenario_file, capsys):
        _, out = run_compare(tmp_path, scenario_file, "a", "--episodes")
        lines = (out / "episodes_rule.jsonl").read_text().strip().split("\n")
        assert all(json.loads(line) for line in lines)

    def test_unknown_controller_lists_valid_names(self, tmp_path, scenario_file, capsys):
        with pytest.raises(SystemExit) as e:
            main(["compare", "--scenario", scenario_file, "--controllers", "bogus",
                  "--runs", "1", "--out", str(tmp_path / "x")])
        assert "explicit" in str(e.value) and "rule" in str(e.value)

    def test_invalid_scenario_names_problem(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"dt": -1.0}))
        with pytest.raises(SystemExit) as e:
            main(["compare", "--scenario", str(bad), "--runs", "1",
                  "--out", str(tmp_path / "x")])
        assert "dt" in str(e.value)

    def test_unknown_scenario_field_rejected(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"lane": 0.0}))
        with pytest.raises(SystemExit) as e:
            main(["compare", "--scenario", str(bad), "--runs", "1",
                  "--out", str(tmp_path / "x")])
        assert "lane" in str(e.value)


class TestSafetyCritical:
    def test_collision_sets_exit_code(self, tmp_path, capsys):
        # pedestrian starts on top of the vehicle: guaranteed collision
        crash = tmp_path / "crash.json"
        crash.write_text(json.dumps({"init_distributions": {
            "x_ped": {"kind": "const", "value": -12.5},
            "y_offset": {"kind": "const", "value": 0.0}}}))
        code = main(["compare", "--scenario", str(crash), "--controllers", "rule",
                     "--runs", "1", "--seed", "5", "--out", str(tmp_path / "o"),
                     "--safety-critical", "rule"])
        assert code == 1

    def test_no_collision_exits_zero(self, tmp_path, capsys):
        # pedestrian has already crossed: clean pass for any controller
        clear = tmp_path / "clear.json"
        clear.write_text(json.dumps({"init_distributions": {
            "y_offset": {"kind": "const", "value": -3.0}}}))
        code = main(["compare", "--scenario", str(clear), "--controllers", "rule",
                     "--runs", "2", "--seed", "5", "--out", str(tmp_path / "o"),
                     "--safety-critical", "rule"])
        assert code == 0


class TestTuneRoundTrip:
    def test_budget_one_fragment_feeds_compare(self, tmp_path, scenario_file, capsys):
        out = tmp_path / "tuning"
        code = main(["tune", "--scenario", scenario_file, "--controller", "rule",
                     "--budget", "1", "--runs", "2", "--screen-runs", "1",
                     "--seed", "5", "--out", str(out)])
        assert code == 0
        frag_path = out / "best_rule.json"
        frag = json.loads(frag_path.read_text())
        cfg = ControllerConfig.from_dict(frag["rule"])
        assert 0.5 <= cfg.t_brake <= 5.0
        assert (out / "trials_rule.csv").exists()

        code, cmp_out = run_compare(tmp_path, scenario_file, "with-frag",
                                    "--configs", str(frag_path))
        assert code == 0
        assert (cmp_out / "table.csv").exists()


class TestTrace:
    def test_column_contract(self, tmp_path, scenario_file, capsys):
        out = tmp_path / "trace.csv"
        code = main(["trace", "--scenario", scenario_file, "--controller", "rule",
                     "--seed", "5", "--out", str(out)])
        assert code == 0
        with open(out) as f:
            rows = list(csv.DictReader(f))
        assert rows
        assert set(rows[0]) == {"t", "x_veh", "v_veh", "y_ped", "vy_ped",
                                "intention", "u", "ttc"}
        assert float(rows[0]["t"]) == 0.0
        times = [float(r["t"]) for r in rows]
        assert times == sorted(times)
