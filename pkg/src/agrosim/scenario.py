"""Scenario configuration, assembly, batch runs, and metrics.

A scenario is a JSON document naming a vehicle, a controller variant, an
encoder, synchronization timing, and a mission (a speed profile or a
coverage task). Loading applies every default explicitly; running writes a
trace CSV, a summary, and the fully-resolved config so any run can be
reproduced byte for byte.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic import ValidationError as _PydanticValidationError

from .controllers import (
    BSplineNetwork, PIConfig, PurePursuitConfig, RouteExhausted,
    SpeedController, SpeedVariant, pure_pursuit_step,
)
from .cosim import CoSimContract, CoSimEngine, Ports, SyncConfig, TraceRecord
from .planner import CoveragePlan, DegeneratePolygon, FieldPolygon, coverage_ratio, plan_coverage
from .vehicles import (
    DiffDriveModel, DiffDriveParams, EncoderConfig, NonFiniteState,
    SteeredModel, SteeredParams, VehicleState, encoder_sample,
)

__all__ = [
    "ParseError", "ValidationError", "ScenarioConfig", "RunSummary",
    "load_scenario", "scenario_from_dict", "assemble", "Assembly",
    "run_scenario", "compare_controllers", "compute_summary",
    "profile_setpoint", "read_trace_csv", "VARIANT_NAMES",
]

VARIANT_NAMES = tuple(v.value for v in SpeedVariant)

_SENSOR_PORTS = ("pose_x", "pose_y", "pose_theta", "enc_speed", "enc_ticks")


class ParseError(ValueError):
    """The scenario file is not parseable JSON."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ValidationError(ValueError):
    """The scenario content violates the schema or a value constraint."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


# ---------------------------------------------------------------------------
# Config schema. Unknown keys are rejected everywhere (typo safety), and
# every default is materialized on load so the resolved dump is complete.
# ---------------------------------------------------------------------------

class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class VehicleSection(_Section):
    kind: Literal["diff_drive", "front_steer", "rear_steer"] = "diff_drive"
    track_width: float = Field(default=1.0, gt=0)
    wheelbase: float = Field(default=1.5, gt=0)
    steer_limit: float = Field(default=0.6, gt=0, lt=math.pi / 2)
    steer_rate_limit: float = Field(default=1.0, gt=0)
    actuator_tau: float = Field(default=0.25, ge=0)
    v_max: float = Field(default=2.0, gt=0)


class ControllerSection(_Section):
    variant: Literal["raw", "avg", "butter", "lffc"] = "raw"
    kp: float = Field(default=1.0, ge=0)
    ki: float = Field(default=2.0, ge=0)
    u_min: float = -2.0
    u_max: float = 2.0
    avg_window: int = Field(default=25, ge=1)
    f_cut: float = Field(default=2.0, gt=0)
    num_knots: int = Field(default=16, ge=4)
    learn_rate: float = Field(default=0.2, gt=0)
    adapt_min_setpoint: float = Field(default=0.1, ge=0)

    @model_validator(mode="after")
    def _check_limits(self):
        if self.u_min >= self.u_max:
            raise ValueError("u_min must be < u_max")
        return self


class EncoderSection(_Section):
    ticks_per_meter: float = Field(default=1000.0, gt=0)
    dist_amplitude: float = Field(default=0.15, ge=0, lt=1)
    dist_wavelength: float = Field(default=0.7, gt=0)
    dist_phase: float = 0.0


class SyncSection(_Section):
    de_period: float = Field(default=0.02, gt=0)
    ct_step: float = Field(default=0.001, gt=0)
    duration: float = Field(default=10.0, ge=0)

    @model_validator(mode="after")
    def _check_ratio(self):
        SyncConfig(self.de_period, self.ct_step, self.duration)
        return self


class CoverageMission(_Section):
    polygon: list[tuple[float, float]] = Field(min_length=3)
    width: float = Field(gt=0)
    direction: float = 0.0
    lookahead: float = Field(default=1.2, gt=0)
    cruise_speed: float = Field(default=1.0, gt=0)


class MissionSection(_Section):
    speed_profile: Optional[list[tuple[float, float]]] = None
    coverage: Optional[CoverageMission] = None

    @field_validator("speed_profile")
    @classmethod
    def _check_profile(cls, profile):
        if profile is None:
            return profile
        if not profile:
            raise ValueError("must not be empty")
        times = [t for t, _ in profile]
        if times[0] < 0:
            raise ValueError("times must be >= 0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("non-monotonic")
        if not all(math.isfinite(t) and math.isfinite(sp) for t, sp in profile):
            raise ValueError("non-finite entry")
        return profile

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.speed_profile is None) == (self.coverage is None):
            raise ValueError("set exactly one of speed_profile or coverage")
        return self


def _default_mission() -> MissionSection:
    return MissionSection(speed_profile=[(0.0, 1.0)])


class ScenarioConfig(_Section):
    name: str = "scenario"
    vehicle: VehicleSection = Field(default_factory=VehicleSection)
    controller: ControllerSection = Field(default_factory=ControllerSection)
    encoder: EncoderSection = Field(default_factory=EncoderSection)
    sync: SyncSection = Field(default_factory=SyncSection)
    mission: MissionSection = Field(default_factory=_default_mission)
    seed: int = 0  # reserved; current models are deterministic

    @model_validator(mode="after")
    def _check_mission_vehicle(self):
        if self.mission.coverage is not None and self.vehicle.kind != "diff_drive":
            raise ValueError("coverage missions require a diff_drive vehicle")
        return self

    def resolved_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2,
                          sort_keys=True) + "\n"


def scenario_from_dict(data: dict) -> ScenarioConfig:
    try:
        return ScenarioConfig.model_validate(data)
    except _PydanticValidationError as exc:
        err = exc.errors()[0]
        field = ".".join(str(part) for part in err["loc"]) or "<root>"
        raise ValidationError(field, err["msg"]) from exc


def load_scenario(path) -> ScenarioConfig:
    """Parse and validate a scenario file, applying all defaults."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from exc
    if not isinstance(data, dict):
        raise ValidationError("<root>", "scenario must be a JSON object")
    return scenario_from_dict(data)


def profile_setpoint(profile, t: float) -> float:
    """Step-function setpoint: the last profile entry at or before t."""
    times = [entry[0] for entry in profile]
    i = bisect_right(times, t) - 1
    return float(profile[i][1]) if i >= 0 else 0.0


# ---------------------------------------------------------------------------
# Plant / controller adapters binding the libraries to engine ports
# ---------------------------------------------------------------------------

class VehiclePlant:
    """CT side: a vehicle model plus its encoder, sampled once per DE round."""

    def __init__(self, model, encoder: EncoderConfig, initial: VehicleState,
                 command_names: tuple[str, ...]):
        self.model = model
        self.encoder = encoder
        self.state = initial
        self.command_names = command_names
        self._s_prev = initial.s

    @property
    def ports(self) -> Ports:
        return Ports(produces=_SENSOR_PORTS, consumes=self.command_names)

    def truth(self) -> dict[str, float]:
        return self.model.truth(self.state)

    def sample(self, window: float) -> dict[str, float]:
        st = self.state
        ticks, v_meas = encoder_sample(self._s_prev, st.s,
                                       self.model.ground_speed(st),
                                       self.encoder, window)
        self._s_prev = st.s
        return {"pose_x": st.x, "pose_y": st.y, "pose_theta": st.theta,
                "enc_speed": v_meas, "enc_ticks": float(ticks)}

    def integrate(self, commands: dict[str, float], substeps: int, h: float) -> None:
        cmd = tuple(commands[name] for name in self.command_names)
        st = self.state
        for _ in range(substeps):
            st = self.model.step(st, cmd, h)
        self.state = st


class SpeedProfileController:
    """DE side for speed missions: profile setpoint into a speed controller.

    The disturbance phase fed to the LFFC variant is reconstructed the way
    the real controller would do it: integrating encoder ticks into a
    distance estimate and wrapping by the disturbance wavelength.
    """

    def __init__(self, speed: SpeedController, profile,
                 encoder: EncoderConfig, command_names: tuple[str, ...]):
        self.speed = speed
        self.profile = [(float(t), float(sp)) for t, sp in profile]
        self.encoder = encoder
        self.command_names = command_names
        self._steps = 0
        self._ticks = 0

    @property
    def ports(self) -> Ports:
        return Ports(produces=self.command_names, consumes=("enc_speed", "enc_ticks"))

    def initial_outputs(self) -> dict[str, float]:
        return {name: 0.0 for name in self.command_names}

    def step(self, monitored: dict[str, float], dt: float) -> dict[str, float]:
        t = self._steps * dt
        self._steps += 1
        self._ticks += int(monitored["enc_ticks"])
        s_est = self._ticks / self.encoder.ticks_per_meter
        phase = (s_est / self.encoder.dist_wavelength) % 1.0
        sp = profile_setpoint(self.profile, t)
        u = self.speed.step(sp, monitored["enc_speed"], phase, dt)
        if len(self.command_names) == 2 and self.command_names[0] == "u_left":
            return {"u_left": u, "u_right": u}
        return {"u_speed": u, "u_steer": 0.0}


class RouteFollowController:
    """DE side for coverage missions: pure pursuit over the planned route."""

    def __init__(self, route, pursuit: PurePursuitConfig, drive: DiffDriveParams):
        self.route = [(float(x), float(y)) for x, y in route]
        self.pursuit = pursuit
        self.drive = drive
        self.progress = 0.0
        self.done = False

    @property
    def ports(self) -> Ports:
        return Ports(produces=("u_left", "u_right"), consumes=_SENSOR_PORTS)

    def initial_outputs(self) -> dict[str, float]:
        return {"u_left": 0.0, "u_right": 0.0}

    def step(self, monitored: dict[str, float], dt: float) -> dict[str, float]:
        if self.done:
            return {"u_left": 0.0, "u_right": 0.0}
        pose = VehicleState(x=monitored["pose_x"], y=monitored["pose_y"],
                            theta=monitored["pose_theta"])
        try:
            u_left, u_right, self.progress = pure_pursuit_step(
                pose, self.route, self.pursuit, self.drive, self.progress)
        except RouteExhausted:
            self.done = True
            return {"u_left": 0.0, "u_right": 0.0}
        return {"u_left": u_left, "u_right": u_right}


# ---------------------------------------------------------------------------
# Assembly and runs
# ---------------------------------------------------------------------------

@dataclass
class Assembly:
    """Everything a run needs, built from one resolved config."""

    cfg: ScenarioConfig
    engine: CoSimEngine
    plant: VehiclePlant
    controller: object
    columns: list[str]
    polygon: FieldPolygon | None = None
    plan: CoveragePlan | None = None

    def record_to_row(self, rec: TraceRecord) -> list[float]:
        row = [rec.t]
        row.extend(rec.plant_truth[f] for f in self.plant.model.truth_fields)
        row.extend(rec.monitored_values[n] for n in self.engine.contract.monitored)
        row.extend(rec.controlled_values[n] for n in self.engine.contract.controlled)
        return row


def _build_speed_controller(cfg: ScenarioConfig) -> SpeedController:
    c = cfg.controller
    pi = PIConfig(kp=c.kp, ki=c.ki, u_min=c.u_min, u_max=c.u_max)
    lffc = None
    if c.variant == "lffc":
        lffc = BSplineNetwork(num_knots=c.num_knots, learn_rate=c.learn_rate)
    return SpeedController(c.variant, pi,
                           avg_window=c.avg_window,
                           f_cut=c.f_cut,
                           f_sample=1.0 / cfg.sync.de_period,
                           lffc=lffc,
                           adapt_min_setpoint=c.adapt_min_setpoint)


def assemble(cfg: ScenarioConfig, *, initial_state: VehicleState | None = None,
             coverage_plan: CoveragePlan | None = None) -> Assembly:
    """Instantiate plant, controller, contract, and engine from a config.

    ``initial_state`` overrides the mission's default start pose and
    ``coverage_plan`` substitutes a pre-linked route; both serve mid-mission
    replanning, where the vehicle resumes from wherever it already is.
    """
    sync = SyncConfig(cfg.sync.de_period, cfg.sync.ct_step, cfg.sync.duration)
    enc = EncoderConfig(ticks_per_meter=cfg.encoder.ticks_per_meter,
                        dist_amplitude=cfg.encoder.dist_amplitude,
                        dist_wavelength=cfg.encoder.dist_wavelength,
                        dist_phase=cfg.encoder.dist_phase)
    v = cfg.vehicle
    if v.kind == "diff_drive":
        params = DiffDriveParams(track_width=v.track_width,
                                 actuator_tau=v.actuator_tau, v_max=v.v_max)
        model = DiffDriveModel(params)
        commands = ("u_left", "u_right")
        design = {"track_width": v.track_width}
    else:
        params = SteeredParams(wheelbase=v.wheelbase, steer_limit=v.steer_limit,
                               steer_rate_limit=v.steer_rate_limit,
                               steered_axle="front" if v.kind == "front_steer" else "rear",
                               actuator_tau=v.actuator_tau, v_max=v.v_max)
        model = SteeredModel(params)
        commands = ("u_speed", "u_steer")
        design = {"wheelbase": v.wheelbase}
    design["ticks_per_meter"] = cfg.encoder.ticks_per_meter
    design["dist_wavelength"] = cfg.encoder.dist_wavelength

    polygon = plan = None
    initial = VehicleState()
    if cfg.mission.coverage is not None:
        mission = cfg.mission.coverage
        try:
            polygon = FieldPolygon.from_vertices(mission.polygon)
            plan = coverage_plan if coverage_plan is not None else \
                plan_coverage(polygon, mission.width, mission.direction)
        except DegeneratePolygon as exc:
            raise ValidationError("mission.coverage.polygon", str(exc)) from exc
        wp = plan.waypoints
        heading = math.atan2(wp[1][1] - wp[0][1], wp[1][0] - wp[0][0])
        initial = VehicleState(x=wp[0][0], y=wp[0][1], theta=heading)
        controller = RouteFollowController(
            wp, PurePursuitConfig(lookahead=mission.lookahead,
                                  cruise_speed=mission.cruise_speed), params)
        monitored = _SENSOR_PORTS
        design["implement_width"] = mission.width
    else:
        controller = SpeedProfileController(_build_speed_controller(cfg),
                                            cfg.mission.speed_profile, enc, commands)
        monitored = ("enc_speed", "enc_ticks")

    if initial_state is not None:
        initial = initial_state
    plant = VehiclePlant(model, enc, initial, commands)
    contract = CoSimContract(monitored=monitored, controlled=commands,
                             design_params=design)
    engine = CoSimEngine(plant, controller, contract, sync)
    columns = ["t", *model.truth_fields, *monitored, *commands]
    return Assembly(cfg=cfg, engine=engine, plant=plant, controller=controller,
                    columns=columns, polygon=polygon, plan=plan)


@dataclass(frozen=True)
class RunSummary:
    """Post-warm-up tracking metrics, plus coverage figures when relevant."""

    rms_speed_error: float
    max_abs_speed_error: float
    settling_time: float
    coverage: float | None = None
    cross_track_rms: float | None = None

    def to_dict(self) -> dict:
        out = {"rms_speed_error": self.rms_speed_error,
               "max_abs_speed_error": self.max_abs_speed_error,
               "settling_time": self.settling_time}
        if self.coverage is not None:
            out["coverage"] = self.coverage
        if self.cross_track_rms is not None:
            out["cross_track_rms"] = self.cross_track_rms
        return out


def _speed_errors(cfg: ScenarioConfig, cols: dict[str, np.ndarray]
                  ) -> tuple[np.ndarray, np.ndarray]:
    """(setpoint, error) series; coverage missions use the commanded speed."""
    if cfg.mission.speed_profile is not None:
        sp = np.array([profile_setpoint(cfg.mission.speed_profile, t)
                       for t in cols["t"]])
    else:
        sp = 0.5 * (cols["u_left"] + cols["u_right"])
    return sp, sp - cols["enc_speed"]


def compute_summary(cfg: ScenarioConfig, columns: list[str],
                    rows: list[list[float]],
                    plan: CoveragePlan | None = None,
                    polygon: FieldPolygon | None = None) -> RunSummary:
    """Metrics over the post-warm-up window (first 20% of duration excluded).

    Coverage is the exception: it tallies the whole driven path, because
    area swept during warm-up is still covered area.
    """
    if not rows:
        return RunSummary(0.0, 0.0, 0.0)
    data = np.asarray(rows, dtype=float)
    cols = {name: data[:, i] for i, name in enumerate(columns)}
    duration = cfg.sync.duration
    warm = 0.2 * duration
    mask = cols["t"] >= warm - 1e-12
    sp, err = _speed_errors(cfg, cols)
    e = err[mask]
    rms = float(np.sqrt(np.mean(e * e))) if e.size else 0.0
    max_abs = float(np.max(np.abs(e))) if e.size else 0.0

    settling = duration
    if e.size:
        sp_w = sp[mask]
        ref = float(np.max(np.abs(sp))) or 1.0
        band = 0.05 * np.where(np.abs(sp_w) > 0, np.abs(sp_w), ref)
        ok = np.abs(e) <= band
        # first index whose entire suffix stays in band
        bad = np.nonzero(~ok)[0]
        first = bad[-1] + 1 if bad.size else 0
        if first < ok.size:
            settling = float(cols["t"][mask][first])

    coverage = cross = None
    if cfg.mission.coverage is not None:
        mission = cfg.mission.coverage
        if polygon is None:
            polygon = FieldPolygon.from_vertices(mission.polygon)
        if plan is None:
            plan = plan_coverage(polygon, mission.width, mission.direction)
        path = list(zip(cols["x"], cols["y"]))
        coverage = coverage_ratio(path, polygon, mission.width)
        cross = _cross_track_rms(cols["x"][mask], cols["y"][mask], plan,
                                 margin=mission.lookahead)
    return RunSummary(rms_speed_error=rms, max_abs_speed_error=max_abs,
                      settling_time=settling, coverage=coverage,
                      cross_track_rms=cross)


def _cross_track_rms(xs: np.ndarray, ys: np.ndarray, plan: CoveragePlan,
                     margin: float) -> float:
    """RMS lateral offset from the nearest swath centerline.

    Only poses projecting onto a swath's straight interior (at least
    ``margin`` from either end) count, so headland turns are excluded.
    """
    if not xs.size:
        return 0.0
    lateral = np.full(xs.shape, np.inf)
    for (ax, ay), (bx, by) in plan.swaths:
        dx, dy = bx - ax, by - ay
        length = math.hypot(dx, dy)
        if length <= 2 * margin:
            continue
        t = ((xs - ax) * dx + (ys - ay) * dy) / (length * length)
        px = ax + t * dx - xs
        py = ay + t * dy - ys
        d = np.hypot(px, py)
        valid = (t * length >= margin) & (t * length <= length - margin)
        lateral[valid] = np.minimum(lateral[valid], d[valid])
    on_swath = lateral <= plan.implement_width
    if not np.any(on_swath):
        return 0.0
    sel = lateral[on_swath]
    return float(np.sqrt(np.mean(sel * sel)))


def _write_trace_csv(path: Path, columns: list[str], rows: list[list[float]],
                     error: Exception | None = None) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(f"{v:.9g}" for v in row))
    if error is not None:
        t = getattr(error, "t", None)
        stamp = f" at t={t:.9g}" if t is not None else ""
        lines.append(f"# error: {type(error).__name__}{stamp}: {error}")
    path.write_text("\n".join(lines) + "\n", newline="\n")


def read_trace_csv(path) -> tuple[list[str], list[list[float]]]:
    """Read a trace written by run_scenario; error marker rows are skipped."""
    lines = Path(path).read_text().splitlines()
    header = lines[0].split(",") if lines else []
    rows = [[float(v) for v in line.split(",")]
            for line in lines[1:] if line and not line.startswith("#")]
    return header, rows


def run_scenario(cfg: ScenarioConfig, out_dir) -> RunSummary:
    """Run one scenario, writing trace.csv, summary.json, scenario.resolved.json.

    On an engine failure the partial trace is flushed with an error marker
    row and the error is re-raised.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "scenario.resolved.json").write_text(cfg.resolved_json(), newline="\n")
    asm = assemble(cfg)
    rows: list[list[float]] = []
    failure: Exception | None = None
    try:
        while asm.engine.can_step():
            rec = asm.engine.step()
            rows.append(asm.record_to_row(rec))
            if getattr(asm.controller, "done", False):
                break
    except NonFiniteState as exc:
        failure = exc
    _write_trace_csv(out / "trace.csv", asm.columns, rows, error=failure)
    if failure is not None:
        raise failure
    summary = compute_summary(cfg, asm.columns, rows, plan=asm.plan,
                              polygon=asm.polygon)
    (out / "summary.json").write_text(
        json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n",
        newline="\n")
    return summary


def compare_controllers(base_cfg: ScenarioConfig, variants, out_dir) -> list[dict]:
    """Run the same speed scenario once per controller variant.

    Writes per-variant traces under ``out_dir/<variant>/`` and a
    comparison.csv ordered by rms_speed_error ascending; a failed variant
    gets a row with its error instead of aborting the comparison.
    """
    if base_cfg.mission.speed_profile is None:
        raise ValidationError("mission", "compare needs a speed_profile mission")
    variants = list(variants)
    for name in variants:
        if name not in VARIANT_NAMES:
            raise ValidationError("variants",
                                  f"unknown variant {name!r} (choose from {', '.join(VARIANT_NAMES)})")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = []
    for name in variants:
        cfg = base_cfg.model_copy(deep=True)
        cfg.controller.variant = name
        try:
            summary = run_scenario(cfg, out / name)
            results.append({"variant": name, "status": "ok",
                            **summary.to_dict()})
        except Exception as exc:
            results.append({"variant": name, "status": "error",
                            "detail": str(exc)})
    results.sort(key=lambda r: (r["status"] != "ok",
                                r.get("rms_speed_error", math.inf)))
    fields = ["variant", "status", "rms_speed_error", "max_abs_speed_error",
              "settling_time", "detail"]
    lines = [",".join(fields)]
    for r in results:
        cells = []
        for f in fields:
            v = r.get(f, "")
            cells.append(f"{v:.9g}" if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    (out / "comparison.csv").write_text("\n".join(lines) + "\n", newline="\n")
    return results
