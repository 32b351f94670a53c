"""Session-oriented HTTP/WebSocket service for interactive coverage missions.

The stepping logic lives in a synchronous SessionCore so the state machine
and pause/resume semantics are testable without a network stack; the FastAPI
layer adds transport, pacing, and fan-out to WebSocket subscribers.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import math
import secrets
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

from fastapi import Body, FastAPI, Request, WebSocket, WebSocketDisconnect
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .planner import CoverageGrid, CoveragePlan, DegeneratePolygon, FieldPolygon, plan_coverage
from .scenario import (
    Assembly,
    ScenarioConfig,
    ValidationError,
    assemble,
    scenario_from_dict,
)
from .vehicles import NonFiniteState, VehicleState

UPDATE_PERIOD = 0.1  # simulated seconds between state updates
IDLE_EXPIRY = 1800.0  # seconds before an untouched session is dropped
_QUEUE_LIMIT = 64  # per-subscriber buffered updates before disconnect


class WrongState(RuntimeError):
    """Operation not legal in the session's current state."""


class UnknownSession(KeyError):
    """No session with the requested id."""

    def __str__(self) -> str:  # KeyError quotes its payload
        return self.args[0] if self.args else ""


class SessionState(str, Enum):
    IDLE = "Idle"
    PLANNED = "Planned"
    RUNNING = "Running"
    PAUSED = "Paused"
    FINISHED = "Finished"
    FAILED = "Failed"


class SessionCore:
    """State machine and stepping core for one session.

    Engine stepping happens only inside step_block(), in whole DE steps, so
    any pause/resume interleaving reproduces the uninterrupted trajectory.
    """

    def __init__(self, session_id: str, base_cfg: ScenarioConfig,
                 time_scale: float = 1.0):
        if not (math.isfinite(time_scale) and time_scale >= 0.0):
            raise ValidationError("time_scale",
                                  "must be a finite value >= 0")
        self.id = session_id
        self.base_cfg = base_cfg
        self.time_scale = float(time_scale)
        self.state = SessionState.IDLE
        self._steps_per_update = max(
            1, round(UPDATE_PERIOD / base_cfg.sync.de_period))
        self._clear_mission()

    def _clear_mission(self) -> None:
        self.cfg: ScenarioConfig | None = None
        self.asm: Assembly | None = None
        self.plan: CoveragePlan | None = None
        self.polygon: FieldPolygon | None = None
        self.grid: CoverageGrid | None = None
        self.path: list[tuple[float, float]] = []
        self.trace_rows: list[list[float]] = []
        self._last_pos = (0.0, 0.0)
        self._last_setpoint = 0.0
        self._last_measured = 0.0
        self._time_offset = 0.0

    # -- commands ----------------------------------------------------------

    def submit_polygon(self, vertices, width: float,
                       direction: float = 0.0) -> CoveragePlan:
        """Plan coverage of a polygon; from Paused this replans in place."""
        if self.state not in (SessionState.IDLE, SessionState.PLANNED,
                              SessionState.PAUSED):
            raise WrongState(f"cannot plan while {self.state.value}")
        base = self.base_cfg.model_dump(mode="json")
        prior = self.base_cfg.mission.coverage
        base["mission"] = {"coverage": {
            "polygon": [list(v) for v in vertices],
            "width": width,
            "direction": direction,
            "lookahead": prior.lookahead if prior else 1.2,
            "cruise_speed": prior.cruise_speed if prior else 1.0,
        }}
        cfg = scenario_from_dict(base)
        polygon = FieldPolygon.from_vertices(vertices)
        replanning = self.state is SessionState.PAUSED and self.asm is not None
        initial = None
        start_hint = None
        if replanning:
            initial = self.asm.plant.state
            start_hint = (initial.x, initial.y)
            self._time_offset += self.asm.engine.clock
        plan = plan_coverage(polygon, width, direction, start_hint=start_hint)
        explicit_duration = ("sync" in self.base_cfg.model_fields_set and
                             "duration" in self.base_cfg.sync.model_fields_set)
        if not explicit_duration:
            # Budget generously for turns and tapers; completion ends the
            # run early anyway, the cap only guards runaway sessions.
            cruise = base["mission"]["coverage"]["cruise_speed"]
            budget = 3.0 * plan.route_length / max(cruise, 0.1) + 30.0
            base["sync"]["duration"] = max(cfg.sync.duration, budget)
            cfg = scenario_from_dict(base)
        asm = assemble(cfg, initial_state=initial, coverage_plan=plan)

        grid = CoverageGrid(polygon, width)
        if replanning:
            for p0, p1 in zip(self.path, self.path[1:]):
                grid.stamp_segment(p0, p1)
        else:
            self.path = []
        self.cfg, self.asm, self.plan, self.polygon = cfg, asm, plan, polygon
        self.grid = grid
        self.trace_rows = []
        st = asm.plant.state
        self._last_pos = (st.x, st.y)
        self.state = SessionState.PLANNED
        return plan

    def start(self) -> SessionState:
        if self.state not in (SessionState.PLANNED, SessionState.PAUSED):
            raise WrongState(f"cannot start while {self.state.value}")
        self.state = SessionState.RUNNING
        return self.state

    def pause(self) -> SessionState:
        if self.state is not SessionState.RUNNING:
            raise WrongState(f"cannot pause while {self.state.value}")
        self.state = SessionState.PAUSED
        return self.state

    def reset(self) -> SessionState:
        self.state = SessionState.IDLE
        self._clear_mission()
        return self.state

    # -- stepping ----------------------------------------------------------

    def step_block(self) -> dict[str, Any]:
        """Advance up to one update interval; the only engine mutation point."""
        if self.state is not SessionState.RUNNING:
            raise WrongState(f"cannot step while {self.state.value}")
        asm = self.asm
        engine = asm.engine
        try:
            for _ in range(self._steps_per_update):
                if asm.controller.done or not engine.can_step():
                    break
                record = engine.step()
                self.trace_rows.append(asm.record_to_row(record))
                st = asm.plant.state
                self.grid.stamp_segment(self._last_pos, (st.x, st.y))
                self.path.append((st.x, st.y))
                self._last_pos = (st.x, st.y)
                self._last_measured = record.monitored_values["enc_speed"]
                commands = record.controlled_values.values()
                self._last_setpoint = sum(commands) / len(commands)
        except NonFiniteState:
            self.state = SessionState.FAILED
            return self.update_dict()
        if asm.controller.done or not engine.can_step():
            self.state = SessionState.FINISHED
        return self.update_dict()

    def run_to_completion(self) -> dict[str, Any]:
        """Step until the session leaves Running (time_scale 0 semantics)."""
        update = self.update_dict()
        while self.state is SessionState.RUNNING:
            update = self.step_block()
        return update

    # -- views -------------------------------------------------------------

    def update_dict(self) -> dict[str, Any]:
        st = self.asm.plant.state if self.asm else VehicleState()
        t = self._time_offset + (self.asm.engine.clock if self.asm else 0.0)
        progress = getattr(self.asm.controller, "progress", 0.0) \
            if self.asm else 0.0
        coverage = self.grid.ratio() if self.grid is not None else 0.0
        return {
            "t": t,
            "pose": [st.x, st.y, st.theta],
            "speed_setpoint": self._last_setpoint,
            "speed_measured": self._last_measured,
            "route_progress": progress,
            "coverage": coverage,
            "session_state": self.state.value,
        }

    def snapshot(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "state": self.state.value,
            "time_scale": self.time_scale,
            "plan": self.plan.to_dict() if self.plan else None,
            "polygon": self.polygon.to_dict() if self.polygon else None,
            "config": json.loads(self.cfg.resolved_json()) if self.cfg else None,
            "update": self.update_dict(),
        }


class CreateSessionBody(BaseModel):
    config: dict | None = None
    time_scale: float = 1.0


class PolygonBody(BaseModel):
    vertices: list[tuple[float, float]]
    width: float
    direction: float = 0.0


@dataclass
class _Entry:
    core: SessionCore
    last_touch: float
    subscribers: dict[Any, Any] = field(default_factory=dict)  # queue -> task
    runner: Any = None


class SessionManager:
    """In-memory session registry with idle expiry."""

    def __init__(self, *, now: Callable[[], float] = time.monotonic,
                 idle_expiry: float = IDLE_EXPIRY):
        self._now = now
        self._idle_expiry = idle_expiry
        self._sessions: dict[str, _Entry] = {}

    def create(self, config: dict | None = None,
               time_scale: float = 1.0) -> SessionCore:
        self.sweep()
        cfg = scenario_from_dict(config or {})
        core = SessionCore(secrets.token_hex(8), cfg, time_scale)
        self._sessions[core.id] = _Entry(core, self._now())
        return core

    def get(self, session_id: str) -> _Entry:
        self.sweep()
        entry = self._sessions.get(session_id)
        if entry is None:
            raise UnknownSession(session_id)
        entry.last_touch = self._now()
        return entry

    def drop(self, session_id: str) -> None:
        entry = self._sessions.pop(session_id, None)
        if entry is not None:
            _cancel_entry_tasks(entry)

    def sweep(self) -> None:
        cutoff = self._now() - self._idle_expiry
        for sid, entry in list(self._sessions.items()):
            if entry.last_touch < cutoff:
                self.drop(sid)

    def __len__(self) -> int:
        return len(self._sessions)


def _cancel_entry_tasks(entry: _Entry) -> None:
    if entry.runner is not None:
        entry.runner.cancel()
        entry.runner = None
    for task in list(entry.subscribers.values()):
        task.cancel()
    entry.subscribers.clear()


def _broadcast(entry: _Entry, update: dict[str, Any]) -> None:
    for queue, task in list(entry.subscribers.items()):
        try:
            queue.put_nowait(update)
        except asyncio.QueueFull:
            # A stalled reader must not hold up the run: drop it.
            entry.subscribers.pop(queue, None)
            task.cancel()


async def _run_session(entry: _Entry, now: Callable[[], float]) -> None:
    core = entry.core
    deadline = now()
    while core.state is SessionState.RUNNING:
        update = core.step_block()
        entry.last_touch = now()
        _broadcast(entry, update)
        if core.time_scale > 0:
            deadline += UPDATE_PERIOD / core.time_scale
            delay = deadline - now()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                deadline = now()  # fell behind; do not compound the debt
        else:
            await asyncio.sleep(0)


def create_app(manager: SessionManager | None = None) -> FastAPI:
    """Build the FastAPI app; the manager is injectable for tests."""
    mgr = manager if manager is not None else SessionManager()

    @contextlib.asynccontextmanager
    async def lifespan(app):
        async def sweeper():
            while True:
                await asyncio.sleep(60.0)
                mgr.sweep()

        task = asyncio.create_task(sweeper())
        try:
            yield
        finally:
            task.cancel()

    app = FastAPI(title="agrosim service", lifespan=lifespan)
    # The browser client is served as static files from some other origin.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.manager = mgr

    def error_response(status: int, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=status,
                            content={"error": type(exc).__name__,
                                     "detail": str(exc)})

    @app.exception_handler(ValidationError)
    async def _validation(_req: Request, exc: ValidationError):
        return error_response(400, exc)

    @app.exception_handler(DegeneratePolygon)
    async def _degenerate(_req: Request, exc: DegeneratePolygon):
        return error_response(400, exc)

    @app.exception_handler(RequestValidationError)
    async def _body(_req: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "ValidationError",
                                     "detail": str(exc.errors())})

    @app.exception_handler(UnknownSession)
    async def _unknown(_req: Request, exc: UnknownSession):
        return error_response(404, exc)

    @app.exception_handler(WrongState)
    async def _wrong(_req: Request, exc: WrongState):
        return error_response(409, exc)

    @app.post("/sessions")
    async def create_session(
            body: CreateSessionBody | None = Body(default=None)):
        body = body or CreateSessionBody()
        core = mgr.create(body.config, body.time_scale)
        return {"id": core.id}

    @app.post("/sessions/{sid}/polygon")
    async def submit_polygon(sid: str, body: PolygonBody):
        entry = mgr.get(sid)
        plan = entry.core.submit_polygon(body.vertices, body.width,
                                         body.direction)
        _broadcast(entry, entry.core.update_dict())
        return plan.to_dict()

    @app.post("/sessions/{sid}/start")
    async def start(sid: str):
        entry = mgr.get(sid)
        state = entry.core.start()
        if entry.runner is not None:
            entry.runner.cancel()
        entry.runner = asyncio.create_task(
            _run_session(entry, time.monotonic))
        return {"state": state.value}

    @app.post("/sessions/{sid}/pause")
    async def pause(sid: str):
        entry = mgr.get(sid)
        state = entry.core.pause()
        if entry.runner is not None:
            entry.runner.cancel()
            entry.runner = None
        _broadcast(entry, entry.core.update_dict())
        return {"state": state.value}

    @app.post("/sessions/{sid}/reset")
    async def reset(sid: str):
        entry = mgr.get(sid)
        if entry.runner is not None:
            entry.runner.cancel()
            entry.runner = None
        state = entry.core.reset()
        _broadcast(entry, entry.core.update_dict())
        return {"state": state.value}

    @app.get("/sessions/{sid}")
    async def get_session(sid: str):
        return mgr.get(sid).core.snapshot()

    @app.websocket("/sessions/{sid}/stream")
    async def stream(ws: WebSocket, sid: str):
        await ws.accept()
        try:
            entry = mgr.get(sid)
        except UnknownSession:
            await ws.close(code=4404, reason="unknown session")
            return
        queue: asyncio.Queue = asyncio.Queue(maxsize=_QUEUE_LIMIT)
        entry.subscribers[queue] = asyncio.current_task()
        try:
            await ws.send_json(entry.core.update_dict())
            while True:
                await ws.send_json(await queue.get())
        except (WebSocketDisconnect, asyncio.CancelledError):
            pass
        finally:
            entry.subscribers.pop(queue, None)
            with contextlib.suppress(RuntimeError):
                await ws.close()

    return app
