"""Engine tests: contract validation, timing, zero-order hold, determinism."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from agrosim.cosim import (
    CoSimContract,
    CoSimEngine,
    DirectionConflict,
    DuplicateName,
    NonFiniteState,
    Ports,
    SyncConfig,
    UnboundVariable,
    validate_contract,
)


class StubPlant:
    """First-order lag driven by one command; logs every substep input."""

    def __init__(self, value=0.0):
        self.value = value
        self.substep_log = []

    @property
    def ports(self):
        return Ports(produces=("y",), consumes=("u",))

    def truth(self):
        return {"y": self.value}

    def sample(self, window):
        return {"y": self.value}

    def integrate(self, commands, substeps, h):
        for _ in range(substeps):
            self.substep_log.append((commands["u"], h))
            self.value += (commands["u"] - self.value) * h


class StubController:
    """Proportional tracker toward a fixed target."""

    def __init__(self, target=1.0, gain=0.3):
        self.target = target
        self.gain = gain

    @property
    def ports(self):
        return Ports(produces=("u",), consumes=("y",))

    def initial_outputs(self):
        return {"u": 0.0}

    def step(self, monitored, dt):
        return {"u": self.gain * (self.target - monitored["y"])}


def make_engine(duration=1.0, controller=None):
    return CoSimEngine(StubPlant(), controller or StubController(),
                       CoSimContract(monitored=("y",), controlled=("u",)),
                       SyncConfig(duration=duration))


class TestContract:
    def test_matching_ports_validate(self):
        contract = CoSimContract(monitored=("y",), controlled=("u",),
                                 design_params={"k": 2.0})
        assert validate_contract(Ports(("y",), ("u",)), Ports(("u",), ("y",)),
                                 contract) is contract

    def test_unbound_monitored_variable(self):
        contract = CoSimContract(monitored=("y", "gps_x"), controlled=("u",))
        with pytest.raises(UnboundVariable) as exc:
            validate_contract(Ports(("y",), ("u",)), Ports(("u",), ("y", "gps_x")),
                              contract)
        assert exc.value.name == "gps_x"

    def test_unbound_controller_input(self):
        contract = CoSimContract(monitored=("y",), controlled=("u",))
        with pytest.raises(UnboundVariable) as exc:
            validate_contract(Ports(("y",), ("u",)),
                              Ports(("u",), ("y", "extra")), contract)
        assert exc.value.name == "extra"

    def test_direction_conflict(self):
        with pytest.raises(DirectionConflict) as exc:
            CoSimContract(monitored=("y", "u_l"), controlled=("u_l",))
        assert exc.value.name == "u_l"

    def test_duplicate_name(self):
        with pytest.raises(DuplicateName):
            CoSimContract(monitored=("v", "v"), controlled=("u",))

    def test_non_finite_design_param(self):
        with pytest.raises(ValueError):
            CoSimContract(monitored=("y",), controlled=("u",),
                          design_params={"k": float("inf")})


class TestSyncConfig:
    def test_substep_count(self):
        assert SyncConfig(de_period=0.02, ct_step=0.001).substeps == 20

    def test_non_integer_ratio_rejected(self):
        with pytest.raises(ValueError):
            SyncConfig(de_period=0.02, ct_step=0.003)

    @pytest.mark.parametrize("kwargs", [
        {"de_period": 0.0}, {"ct_step": -0.001}, {"duration": -1.0},
        {"de_period": 0.001, "ct_step": 0.02},
    ])
    def test_invalid_timing_rejected(self, kwargs):
        with pytest.raises(ValueError):
            SyncConfig(**kwargs)

    @given(st.integers(0, 5000))
    def test_whole_periods_in_duration(self, n):
        sync = SyncConfig(duration=n * 0.02)
        assert sync.n_de_steps == n


class TestEngineTiming:
    def test_record_count_and_timestamps(self):
        trace = make_engine(duration=1.0).run()
        assert len(trace) == 50
        assert trace[0].t == 0.0
        assert trace[-1].t == pytest.approx(0.98, abs=1e-12)

    def test_zero_duration_runs_empty(self):
        engine = make_engine(duration=0.0)
        assert not engine.can_step()
        assert engine.run() == []
        with pytest.raises(RuntimeError):
            engine.step()

    def test_ten_second_run(self):
        trace = make_engine(duration=10.0).run()
        assert len(trace) == 500
        assert trace[-1].t == pytest.approx(9.98, abs=1e-12)

    def test_clock_has_no_accumulation_drift(self):
        engine = make_engine(duration=200.0)
        for k in range(1, 10_001):
            engine.step()
            assert abs(engine.clock - k * 0.02) <= k * 1e-15

    def test_stepping_past_end_raises(self):
        engine = make_engine(duration=0.1)
        engine.run()
        with pytest.raises(RuntimeError):
            engine.step()


class TestZeroOrderHold:
    def test_commands_held_across_substeps(self):
        plant = StubPlant()
        engine = CoSimEngine(plant, StubController(),
                             CoSimContract(monitored=("y",), controlled=("u",)),
                             SyncConfig(duration=0.06))
        trace = engine.run()
        assert len(plant.substep_log) == 3 * 20
        for i, record in enumerate(trace):
            round_inputs = plant.substep_log[i * 20:(i + 1) * 20]
            assert all(u == record.controlled_values["u"] for u, _ in round_inputs)
            assert all(h == 0.001 for _, h in round_inputs)

    def test_held_commands_match_last_record(self):
        engine = make_engine(duration=0.1)
        record = engine.step()
        assert engine.held_commands == record.controlled_values


class TestEngineBehavior:
    def test_deterministic_reruns(self):
        t1 = make_engine(duration=2.0).run()
        t2 = make_engine(duration=2.0).run()
        assert t1 == t2

    def test_record_carries_truth_and_both_directions(self):
        record = make_engine().step()
        assert set(record.monitored_values) == {"y"}
        assert set(record.controlled_values) == {"u"}
        assert set(record.plant_truth) == {"y"}

    def test_non_finite_command_raises_with_time(self):
        class BlowUp(StubController):
            def step(self, monitored, dt):
                return {"u": float("inf")}

        engine = make_engine(controller=BlowUp())
        engine._step_count = 3  # fail on the fourth round
        with pytest.raises(NonFiniteState) as exc:
            engine.step()
        assert exc.value.t == pytest.approx(0.06)

    def test_plant_failure_carries_time(self):
        class FailingPlant(StubPlant):
            def integrate(self, commands, substeps, h):
                raise NonFiniteState("state went non-finite")

        engine = CoSimEngine(FailingPlant(), StubController(),
                             CoSimContract(monitored=("y",), controlled=("u",)),
                             SyncConfig(duration=1.0))
        with pytest.raises(NonFiniteState) as exc:
            engine.step()
        assert exc.value.t == 0.0

    def test_controller_missing_output_detected(self):
        class Quiet(StubController):
            def step(self, monitored, dt):
                return {}

        engine = make_engine(controller=Quiet())
        with pytest.raises(UnboundVariable) as exc:
            engine.step()
        assert exc.value.name == "u"

    def test_missing_initial_output_detected(self):
        class NoInit(StubController):
            def initial_outputs(self):
                return {}

        with pytest.raises(UnboundVariable):
            make_engine(controller=NoInit())
