"""Command-line interface tests (in-process, per-command exit codes)."""

import json

import pytest

from agrosim.cli import EXIT_OK, EXIT_SIMULATION, EXIT_VALIDATION, main

SHORT_RUN = {"name": "short", "encoder": {"dist_amplitude": 0.0},
             "sync": {"duration": 2.0}}


def write(tmp_path, data, name="in.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


class TestRun:
    def test_writes_artifacts_and_prints_summary(self, tmp_path, capsys):
        scenario = write(tmp_path, SHORT_RUN)
        code = main(["run", str(scenario), "--out", str(tmp_path / "out")])
        assert code == EXIT_OK
        summary = json.loads(capsys.readouterr().out)
        assert 0.0 <= summary["rms_speed_error"] < 1.0
        run_dir = tmp_path / "out" / "short"
        for artifact in ("trace.csv", "summary.json", "scenario.resolved.json"):
            assert (run_dir / artifact).exists()

    def test_parse_error_exits_2(self, tmp_path, capsys):
        scenario = write(tmp_path, '{\n  "name": broken\n}')
        code = main(["run", str(scenario), "--out", str(tmp_path / "out")])
        assert code == EXIT_VALIDATION
        assert "parse error: line 2" in capsys.readouterr().err

    def test_invalid_config_exits_2(self, tmp_path, capsys):
        scenario = write(tmp_path, {"vehicle": {"kind": "hover"}})
        code = main(["run", str(scenario), "--out", str(tmp_path / "out")])
        assert code == EXIT_VALIDATION
        assert "invalid config: vehicle.kind" in capsys.readouterr().err

    def test_missing_file_exits_2(self, tmp_path, capsys):
        code = main(["run", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path / "out")])
        assert code == EXIT_VALIDATION
        assert "invalid input" in capsys.readouterr().err

    def test_diverging_simulation_exits_3(self, tmp_path, capsys):
        # a microsecond lag is far stiffer than the fixed CT step can handle
        scenario = write(tmp_path, {"name": "stiff",
                                    "vehicle": {"actuator_tau": 1e-9},
                                    "sync": {"duration": 1.0}})
        code = main(["run", str(scenario), "--out", str(tmp_path / "out")])
        assert code == EXIT_SIMULATION
        assert "simulation failed" in capsys.readouterr().err
        trace = (tmp_path / "out" / "stiff" / "trace.csv").read_text()
        assert trace.rstrip().endswith("non-finite during integration")


class TestCompare:
    def test_prints_rows_and_writes_table(self, tmp_path, capsys):
        scenario = write(tmp_path, SHORT_RUN)
        code = main(["compare", str(scenario), "--variants", "raw,butter",
                     "--out", str(tmp_path / "out")])
        assert code == EXIT_OK
        rows = json.loads(capsys.readouterr().out)
        assert {r["variant"] for r in rows} == {"raw", "butter"}
        assert all(r["status"] == "ok" for r in rows)
        assert (tmp_path / "out" / "short" / "comparison.csv").exists()

    def test_unknown_variant_exits_2(self, tmp_path, capsys):
        scenario = write(tmp_path, SHORT_RUN)
        code = main(["compare", str(scenario), "--variants", "raw,median",
                     "--out", str(tmp_path / "out")])
        assert code == EXIT_VALIDATION
        assert "median" in capsys.readouterr().err


class TestPlan:
    RECT = [[0, 0], [20, 0], [20, 10], [0, 10]]

    @pytest.mark.parametrize("payload", [RECT, {"vertices": RECT}])
    def test_prints_plan(self, tmp_path, capsys, payload):
        polygon = write(tmp_path, payload)
        code = main(["plan", str(polygon), "--width", "2.0"])
        assert code == EXIT_OK
        plan = json.loads(capsys.readouterr().out)
        assert len(plan["swaths"]) == 5
        assert plan["route_length"] == pytest.approx(108.0)

    def test_degenerate_polygon_exits_2(self, tmp_path, capsys):
        polygon = write(tmp_path, [[0, 0], [1, 0], [2, 0]])
        code = main(["plan", str(polygon), "--width", "2.0"])
        assert code == EXIT_VALIDATION
        assert "invalid input" in capsys.readouterr().err

    def test_bad_width_exits_2(self, tmp_path, capsys):
        polygon = write(tmp_path, self.RECT)
        code = main(["plan", str(polygon), "--width", "-1.0"])
        assert code == EXIT_VALIDATION
        assert "width" in capsys.readouterr().err

    def test_missing_vertices_key_exits_2(self, tmp_path, capsys):
        polygon = write(tmp_path, {"points": self.RECT})
        code = main(["plan", str(polygon), "--width", "2.0"])
        assert code == EXIT_VALIDATION
