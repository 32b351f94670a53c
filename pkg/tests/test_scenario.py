"""Scenario loading, run artifacts, metrics, and variant comparison tests."""

import json

import pytest

from agrosim.scenario import (
    ParseError,
    ValidationError,
    assemble,
    compare_controllers,
    compute_summary,
    load_scenario,
    profile_setpoint,
    read_trace_csv,
    run_scenario,
    scenario_from_dict,
)

QUIET_ENCODER = {"dist_amplitude": 0.0}


def write_json(tmp_path, data, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return path


class TestConfigLoading:
    def test_empty_document_gets_all_defaults(self):
        cfg = scenario_from_dict({})
        assert cfg.name == "scenario"
        assert cfg.vehicle.kind == "diff_drive"
        assert cfg.controller.variant == "raw"
        assert cfg.sync.duration == 10.0
        assert cfg.mission.speed_profile == [(0.0, 1.0)]
        assert cfg.mission.coverage is None

    def test_resolved_dump_is_closed_under_reload(self):
        cfg = scenario_from_dict({"controller": {"variant": "butter"}})
        resolved = cfg.resolved_json()
        again = scenario_from_dict(json.loads(resolved))
        assert again == cfg
        assert again.resolved_json() == resolved

    def test_non_monotonic_profile_rejected(self):
        with pytest.raises(ValidationError) as exc:
            scenario_from_dict(
                {"mission": {"speed_profile": [[0, 1], [5, 2], [3, 1]]}})
        assert exc.value.field == "mission.speed_profile"
        assert "non-monotonic" in exc.value.reason

    def test_unknown_key_cited(self):
        with pytest.raises(ValidationError) as exc:
            scenario_from_dict({"vehcle": {"kind": "diff_drive"}})
        assert "vehcle" in str(exc.value)

    def test_profile_and_coverage_are_exclusive(self):
        coverage = {"polygon": [[0, 0], [4, 0], [4, 4]], "width": 2.0}
        with pytest.raises(ValidationError):
            scenario_from_dict({"mission": {"speed_profile": [[0, 1]],
                                            "coverage": coverage}})
        with pytest.raises(ValidationError):
            scenario_from_dict({"mission": {}})

    def test_coverage_requires_diff_drive(self):
        with pytest.raises(ValidationError) as exc:
            scenario_from_dict({
                "vehicle": {"kind": "front_steer"},
                "mission": {"coverage": {"polygon": [[0, 0], [8, 0], [8, 4], [0, 4]],
                                         "width": 2.0}}})
        assert "diff_drive" in str(exc.value)

    def test_bad_timing_ratio_rejected(self):
        with pytest.raises(ValidationError) as exc:
            scenario_from_dict({"sync": {"de_period": 0.02, "ct_step": 0.003}})
        assert exc.value.field.startswith("sync")

    def test_parse_error_carries_line_number(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n  "name": "x",\n  oops\n}\n')
        with pytest.raises(ParseError) as exc:
            load_scenario(path)
        assert exc.value.line == 3

    def test_non_object_document_rejected(self, tmp_path):
        path = write_json(tmp_path, [1, 2, 3])
        with pytest.raises(ValidationError) as exc:
            load_scenario(path)
        assert exc.value.field == "<root>"

    def test_degenerate_polygon_reported_as_validation(self):
        cfg = scenario_from_dict(
            {"mission": {"coverage": {"polygon": [[0, 0], [1, 0], [2, 0]],
                                      "width": 1.0}}})
        with pytest.raises(ValidationError) as exc:
            assemble(cfg)
        assert exc.value.field == "mission.coverage.polygon"


class TestProfileSetpoint:
    def test_holds_last_entry(self):
        profile = [(0.0, 1.0), (10.0, 2.0)]
        assert profile_setpoint(profile, 9.99) == 1.0
        assert profile_setpoint(profile, 10.0) == 2.0
        assert profile_setpoint(profile, 50.0) == 2.0

    def test_zero_before_first_entry(self):
        assert profile_setpoint([(5.0, 1.5)], 0.0) == 0.0


class TestRunArtifacts:
    def test_trace_shape_and_timestamps(self, tmp_path):
        cfg = scenario_from_dict({"encoder": QUIET_ENCODER})
        run_scenario(cfg, tmp_path)
        header, rows = read_trace_csv(tmp_path / "trace.csv")
        assert header == ["t", "x", "y", "theta", "v_left", "v_right", "s",
                          "enc_speed", "enc_ticks", "u_left", "u_right"]
        assert len(rows) == 500
        assert rows[0][0] == 0.0
        assert rows[-1][0] == pytest.approx(9.98)

    def test_steered_vehicle_columns(self):
        asm = assemble(scenario_from_dict({"vehicle": {"kind": "front_steer"}}))
        assert asm.columns == ["t", "x", "y", "theta", "v", "delta", "s",
                               "enc_speed", "enc_ticks", "u_speed", "u_steer"]

    def test_zero_duration_writes_empty_trace(self, tmp_path):
        cfg = scenario_from_dict({"sync": {"duration": 0.0}})
        summary = run_scenario(cfg, tmp_path)
        header, rows = read_trace_csv(tmp_path / "trace.csv")
        assert rows == []
        assert header[0] == "t"
        assert summary.rms_speed_error == 0.0
        assert summary.max_abs_speed_error == 0.0
        assert summary.settling_time == 0.0

    def test_reruns_are_byte_identical(self, tmp_path):
        cfg = scenario_from_dict({"name": "twice",
                                  "controller": {"variant": "lffc"}})
        run_scenario(cfg, tmp_path / "a")
        run_scenario(cfg, tmp_path / "b")
        for artifact in ("trace.csv", "summary.json", "scenario.resolved.json"):
            assert (tmp_path / "a" / artifact).read_bytes() == \
                (tmp_path / "b" / artifact).read_bytes()

    def test_resolved_config_reproduces_the_run(self, tmp_path):
        cfg = scenario_from_dict({"controller": {"variant": "avg"},
                                  "sync": {"duration": 4.0}})
        run_scenario(cfg, tmp_path / "first")
        reloaded = load_scenario(tmp_path / "first" / "scenario.resolved.json")
        run_scenario(reloaded, tmp_path / "second")
        assert (tmp_path / "first" / "trace.csv").read_bytes() == \
            (tmp_path / "second" / "trace.csv").read_bytes()

    def test_summary_recomputable_from_trace(self, tmp_path):
        cfg = scenario_from_dict({"sync": {"duration": 6.0}})
        summary = run_scenario(cfg, tmp_path)
        header, rows = read_trace_csv(tmp_path / "trace.csv")
        again = compute_summary(cfg, header, rows)
        assert again.rms_speed_error == pytest.approx(
            summary.rms_speed_error, rel=1e-6)
        assert again.max_abs_speed_error == pytest.approx(
            summary.max_abs_speed_error, rel=1e-6)
        assert again.settling_time == pytest.approx(
            summary.settling_time, abs=1e-9)
        written = json.loads((tmp_path / "summary.json").read_text())
        assert written["rms_speed_error"] == pytest.approx(
            summary.rms_speed_error)


class TestTrackingQuality:
    def test_clean_encoder_tracks_within_two_percent(self, tmp_path):
        cfg = scenario_from_dict({"encoder": QUIET_ENCODER})
        summary = run_scenario(cfg, tmp_path)
        assert summary.rms_speed_error < 0.02
        assert summary.settling_time < cfg.sync.duration

    def test_coverage_mission_summary(self, tmp_path):
        cfg = scenario_from_dict({
            "mission": {"coverage": {"polygon": [[0, 0], [6, 0], [6, 4], [0, 4]],
                                     "width": 2.0}},
            "vehicle": {"actuator_tau": 0.05},
            "sync": {"duration": 40.0}})
        summary = run_scenario(cfg, tmp_path)
        assert summary.coverage is not None and summary.coverage >= 0.9
        assert summary.cross_track_rms is not None
        assert summary.cross_track_rms < 0.1
        header, rows = read_trace_csv(tmp_path / "trace.csv")
        assert rows[-1][0] < 40.0 - 0.02  # route finished before the budget


class TestComparison:
    BASE = {"encoder": QUIET_ENCODER,
            "mission": {"speed_profile": [[0.0, 0.6], [10.0, 1.2], [20.0, 0.9]]},
            "sync": {"duration": 30.0}}

    def test_quiet_encoder_filtering_changes_little(self, tmp_path):
        results = compare_controllers(scenario_from_dict(self.BASE),
                                      ["raw", "butter"], tmp_path)
        by_name = {r["variant"]: r for r in results}
        raw = by_name["raw"]["rms_speed_error"]
        butter = by_name["butter"]["rms_speed_error"]
        assert butter < raw
        # without encoder distortion, prefiltering buys under 20 percent
        assert (raw - butter) / raw < 0.20

    def test_rows_sorted_by_rms(self, tmp_path):
        results = compare_controllers(scenario_from_dict(self.BASE),
                                      ["raw", "butter"], tmp_path)
        scores = [r["rms_speed_error"] for r in results]
        assert scores == sorted(scores)
        lines = (tmp_path / "comparison.csv").read_text().splitlines()
        assert lines[0].startswith("variant,status,rms_speed_error")
        assert lines[1].startswith(results[0]["variant"] + ",ok")

    def test_failed_variant_reported_in_table(self, tmp_path):
        base = scenario_from_dict({
            "encoder": QUIET_ENCODER,
            "controller": {"f_cut": 30.0},  # above Nyquist for a 50 Hz loop
            "sync": {"duration": 5.0}})
        results = compare_controllers(base, ["butter", "raw"], tmp_path)
        assert [r["status"] for r in results] == ["ok", "error"]
        assert results[0]["variant"] == "raw"
        assert "detail" in results[1]
        lines = (tmp_path / "comparison.csv").read_text().splitlines()
        assert len(lines) == 3
        assert lines[2].startswith("butter,error")

    def test_unknown_variant_rejected(self, tmp_path):
        with pytest.raises(ValidationError) as exc:
            compare_controllers(scenario_from_dict(self.BASE),
                                ["raw", "median"], tmp_path)
        assert "median" in str(exc.value)

    def test_coverage_mission_not_comparable(self, tmp_path):
        cfg = scenario_from_dict({
            "mission": {"coverage": {"polygon": [[0, 0], [8, 0], [8, 4], [0, 4]],
                                     "width": 2.0}}})
        with pytest.raises(ValidationError):
            compare_controllers(cfg, ["raw"], tmp_path)
