"""Fixed-step DE/CT co-simulation engine.

A sampled digital controller (DE side) and a continuous plant (CT side)
exchange variables through a declared contract at a fixed synchronization
period. Actuator commands are held constant (zero-order hold) while the
plant is integrated in fine substeps between controller invocations.

Time is kept as an integer count of DE periods; seconds are derived, so the
clock never accumulates floating-point drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Protocol

from .vehicles import NonFiniteState

__all__ = [
    "SyncConfig", "CoSimContract", "TraceRecord", "CoSimEngine", "Ports",
    "validate_contract", "ContractError", "UnboundVariable", "DuplicateName",
    "DirectionConflict", "NonFiniteState",
]


class ContractError(ValueError):
    """Base class for contract validation failures."""

    def __init__(self, name: str, message: str):
        super().__init__(message)
        self.name = name


class UnboundVariable(ContractError):
    def __init__(self, name: str, detail: str = ""):
        super().__init__(name, f"unbound variable {name!r}" + (f": {detail}" if detail else ""))


class DuplicateName(ContractError):
    def __init__(self, name: str):
        super().__init__(name, f"name {name!r} declared more than once in the contract")


class DirectionConflict(ContractError):
    def __init__(self, name: str):
        super().__init__(name, f"name {name!r} is both monitored and controlled")


@dataclass(frozen=True)
class SyncConfig:
    """Synchronization timing: DE sampling period, CT step, total duration."""

    de_period: float = 0.02
    ct_step: float = 0.001
    duration: float = 10.0

    def __post_init__(self):
        if self.de_period <= 0:
            raise ValueError("de_period must be > 0")
        if self.ct_step <= 0:
            raise ValueError("ct_step must be > 0")
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        ratio = self.de_period / self.ct_step
        if abs(ratio - round(ratio)) > 1e-12 * ratio or round(ratio) < 1:
            raise ValueError(
                f"de_period ({self.de_period}) must be an integer multiple "
                f"of ct_step ({self.ct_step})")

    @property
    def substeps(self) -> int:
        """CT integrator substeps per DE period."""
        return int(round(self.de_period / self.ct_step))

    @property
    def n_de_steps(self) -> int:
        """Number of whole DE periods that fit in the duration."""
        return int(math.floor(self.duration / self.de_period + 1e-9))


@dataclass(frozen=True)
class CoSimContract:
    """Variable binding between the DE controller and the CT plant.

    ``monitored`` flows CT -> DE (sensor values), ``controlled`` flows
    DE -> CT (actuator commands); ``design_params`` are shared constants.
    """

    monitored: tuple[str, ...]
    controlled: tuple[str, ...]
    design_params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "monitored", tuple(self.monitored))
        object.__setattr__(self, "controlled", tuple(self.controlled))
        seen: set[str] = set()
        for name in (*self.monitored, *self.controlled, *self.design_params):
            if name in seen:
                if name in self.monitored and name in self.controlled:
                    raise DirectionConflict(name)
                raise DuplicateName(name)
            seen.add(name)
        for name, value in self.design_params.items():
            if not math.isfinite(value):
                raise ValueError(f"design_params[{name!r}] is not finite")


class Ports(NamedTuple):
    """The variable names one side produces and consumes."""

    produces: tuple[str, ...]
    consumes: tuple[str, ...]


@dataclass(frozen=True)
class TraceRecord:
    """One synchronized sample at the start of a DE round."""

    t: float
    plant_truth: dict[str, float]
    monitored_values: dict[str, float]
    controlled_values: dict[str, float]


class Plant(Protocol):
    """CT side: exposes ports, samples sensors, integrates under held commands."""

    @property
    def ports(self) -> Ports: ...

    def truth(self) -> dict[str, float]: ...

    def sample(self, window: float) -> dict[str, float]: ...

    def integrate(self, commands: dict[str, float], substeps: int, h: float) -> None: ...


class Controller(Protocol):
    """DE side: consumes monitored values, produces controlled values."""

    @property
    def ports(self) -> Ports: ...

    def initial_outputs(self) -> dict[str, float]: ...

    def step(self, monitored: dict[str, float], dt: float) -> dict[str, float]: ...


def validate_contract(plant_ports: Ports, controller_ports: Ports,
                      contract: CoSimContract) -> CoSimContract:
    """Check that every contract entry binds matching plant/controller ports.

    Every monitored name must be produced by the plant and consumed by the
    controller, every controlled name produced by the controller and
    consumed by the plant, and every input either side consumes must be
    bound by the contract. Uniqueness and direction checks are enforced by
    the contract itself on construction.
    """
    plant_out = set(plant_ports.produces)
    plant_in = set(plant_ports.consumes)
    ctrl_out = set(controller_ports.produces)
    ctrl_in = set(controller_ports.consumes)
    for name in contract.monitored:
        if name not in plant_out:
            raise UnboundVariable(name, "monitored but not produced by the plant")
        if name not in ctrl_in:
            raise UnboundVariable(name, "monitored but not consumed by the controller")
    for name in contract.controlled:
        if name not in ctrl_out:
            raise UnboundVariable(name, "controlled but not produced by the controller")
        if name not in plant_in:
            raise UnboundVariable(name, "controlled but not consumed by the plant")
    for name in ctrl_in - set(contract.monitored):
        raise UnboundVariable(name, "controller input not bound by the contract")
    for name in plant_in - set(contract.controlled):
        raise UnboundVariable(name, "plant input not bound by the contract")
    return contract


class CoSimEngine:
    """Steps a validated plant/controller pair through synchronization rounds.

    One round: sample monitored variables, run the controller once, record,
    then integrate the plant ``substeps`` fine steps under the held commands.
    Records are taken at the start of each round, so a run over duration D
    yields timestamps 0, T, 2T, ... < D.
    """

    def __init__(self, plant: Plant, controller: Controller,
                 contract: CoSimContract, sync: SyncConfig):
        validate_contract(plant.ports, controller.ports, contract)
        self.plant = plant
        self.controller = controller
        self.contract = contract
        self.sync = sync
        self._step_count = 0
        self.held_commands = self._select(controller.initial_outputs(),
                                          contract.controlled, "initial output")

    @property
    def clock(self) -> float:
        """Current simulated time, derived from the integer step count."""
        return self._step_count * self.sync.de_period

    def can_step(self) -> bool:
        return self._step_count < self.sync.n_de_steps

    @staticmethod
    def _select(values: dict[str, float], names: tuple[str, ...],
                kind: str) -> dict[str, float]:
        out = {}
        for name in names:
            if name not in values:
                raise UnboundVariable(name, f"{kind} missing")
            out[name] = values[name]
        return out

    def step(self) -> TraceRecord:
        if not self.can_step():
            raise RuntimeError("stepping past the configured duration")
        t = self.clock
        monitored = self._select(self.plant.sample(self.sync.de_period),
                                 self.contract.monitored, "monitored value")
        controlled = self._select(self.controller.step(dict(monitored),
                                                       self.sync.de_period),
                                  self.contract.controlled, "controlled value")
        for name, value in controlled.items():
            if not math.isfinite(value):
                raise NonFiniteState(f"command {name!r} is not finite", t=t)
        record = TraceRecord(t=t, plant_truth=self.plant.truth(),
                             monitored_values=monitored,
                             controlled_values=controlled)
        self.held_commands = controlled
        try:
            self.plant.integrate(controlled, self.sync.substeps, self.sync.ct_step)
        except NonFiniteState as exc:
            raise NonFiniteState(str(exc), t=t) from exc
        self._step_count += 1
        return record

    def run(self) -> list[TraceRecord]:
        """Step until the clock reaches the duration; deterministic."""
        trace: list[TraceRecord] = []
        while self.can_step():
            trace.append(self.step())
        return trace
