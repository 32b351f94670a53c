"""Continuous-time vehicle plant templates.

Kinematic models for the two field-vehicle families (differential drive /
caterpillar track, and front- or rear-steered), a first-order actuator lag,
a classic RK4 integrator, and the rotary-encoder model with its
distance-periodic measurement distortion.

All derivative functions are pure; integration state lives in a
:class:`VehicleState` value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

TWO_PI = 2.0 * math.pi

# Steering servo smoothing constant. Only the slew rate is a vehicle
# parameter; this keeps the servo well-posed near its target instead of
# chattering at the rate limit.
_STEER_SERVO_TAU = 0.05


class NonFiniteState(RuntimeError):
    """A state or command went NaN/inf (integrator blow-up or bad gain)."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


@dataclass(frozen=True)
class DiffDriveParams:
    """Differential-drive (caterpillar track) vehicle parameters."""

    track_width: float = 1.0     # m, distance between track centerlines
    actuator_tau: float = 0.25   # s, first-order speed-lag time constant
    v_max: float = 2.0           # m/s, track speed saturation

    def __post_init__(self):
        if self.track_width <= 0:
            raise ValueError("track_width must be > 0")
        if self.actuator_tau < 0:
            raise ValueError("actuator_tau must be >= 0")
        if self.v_max <= 0:
            raise ValueError("v_max must be > 0")


@dataclass(frozen=True)
class SteeredParams:
    """Single-axle-steered vehicle parameters (kinematic bicycle)."""

    wheelbase: float = 1.5
    steer_limit: float = 0.6        # rad
    steer_rate_limit: float = 1.0   # rad/s
    steered_axle: str = "front"     # "front" | "rear"
    actuator_tau: float = 0.25
    v_max: float = 2.0

    def __post_init__(self):
        if self.wheelbase <= 0:
            raise ValueError("wheelbase must be > 0")
        if not 0 < self.steer_limit < math.pi / 2:
            raise ValueError("steer_limit must be in (0, pi/2)")
        if self.steer_rate_limit <= 0:
            raise ValueError("steer_rate_limit must be > 0")
        if self.steered_axle not in ("front", "rear"):
            raise ValueError("steered_axle must be 'front' or 'rear'")


@dataclass(frozen=True)
class VehicleState:
    """Pose and actuator state of a simulated vehicle.

    ``v_left``/``v_right`` are used by the differential-drive model,
    ``v``/``delta`` by the steered models; the unused pair stays zero.
    ``theta`` is an unnormalized heading accumulator and ``s`` the cumulative
    distance traveled (the encoder's spatial phase variable).
    """

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0
    v_left: float = 0.0
    v_right: float = 0.0
    v: float = 0.0
    delta: float = 0.0
    s: float = 0.0

    def is_finite(self) -> bool:
        return all(
            math.isfinite(f)
            for f in (self.x, self.y, self.theta, self.v_left,
                      self.v_right, self.v, self.delta, self.s)
        )


def _sat(u: float, v_max: float) -> float:
    return min(max(u, -v_max), v_max)


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


def diff_drive_derivative(state: VehicleState, cmd: tuple[float, float],
                          p: DiffDriveParams) -> VehicleState:
    """Unicycle kinematics with first-order track-speed lag.

    ``cmd`` is (u_left, u_right) in m/s. With ``actuator_tau == 0`` the track
    speeds are algebraic (snapped by the model before integration), so their
    derivative is zero here.
    """
    u_left, u_right = cmd
    v = 0.5 * (state.v_left + state.v_right)
    omega = (state.v_right - state.v_left) / p.track_width
    if p.actuator_tau > 0:
        dvl = (_sat(u_left, p.v_max) - state.v_left) / p.actuator_tau
        dvr = (_sat(u_right, p.v_max) - state.v_right) / p.actuator_tau
    else:
        dvl = dvr = 0.0
    return VehicleState(
        x=v * math.cos(state.theta),
        y=v * math.sin(state.theta),
        theta=omega,
        v_left=dvl,
        v_right=dvr,
        s=abs(v),
    )


def steered_derivative(state: VehicleState, cmd: tuple[float, float],
                       p: SteeredParams) -> VehicleState:
    """Kinematic bicycle with steering clamp, slew limit and speed lag.

    ``cmd`` is (u_v, u_delta). A rear-steered axle flips the sign of the
    heading rate.
    """
    u_v, u_delta = cmd
    target = _clamp(u_delta, -p.steer_limit, p.steer_limit)
    ddelta = _clamp((target - state.delta) / _STEER_SERVO_TAU,
                    -p.steer_rate_limit, p.steer_rate_limit)
    dv = (_sat(u_v, p.v_max) - state.v) / p.actuator_tau if p.actuator_tau > 0 else 0.0
    dtheta = state.v * math.tan(state.delta) / p.wheelbase
    if p.steered_axle == "rear":
        dtheta = -dtheta
    return VehicleState(
        x=state.v * math.cos(state.theta),
        y=state.v * math.sin(state.theta),
        theta=dtheta,
        v=dv,
        delta=ddelta,
        s=abs(state.v),
    )


def _axpy(st: VehicleState, d: VehicleState, a: float) -> VehicleState:
    # st + a*d, field-wise; hot path, kept as explicit scalar arithmetic
    return VehicleState(
        st.x + a * d.x,
        st.y + a * d.y,
        st.theta + a * d.theta,
        st.v_left + a * d.v_left,
        st.v_right + a * d.v_right,
        st.v + a * d.v,
        st.delta + a * d.delta,
        st.s + a * d.s,
    )


def rk4_step(model, state: VehicleState, cmd, h: float) -> VehicleState:
    """One classic 4th-order Runge-Kutta step, command held constant.

    Raises :class:`NonFiniteState` if the result is not finite.
    """
    if h <= 0:
        raise ValueError("step size must be > 0")
    k1 = model.derivative(state, cmd)
    k2 = model.derivative(_axpy(state, k1, 0.5 * h), cmd)
    k3 = model.derivative(_axpy(state, k2, 0.5 * h), cmd)
    k4 = model.derivative(_axpy(state, k3, h), cmd)
    out = VehicleState(
        state.x + h / 6.0 * (k1.x + 2.0 * (k2.x + k3.x) + k4.x),
        state.y + h / 6.0 * (k1.y + 2.0 * (k2.y + k3.y) + k4.y),
        state.theta + h / 6.0 * (k1.theta + 2.0 * (k2.theta + k3.theta) + k4.theta),
        state.v_left + h / 6.0 * (k1.v_left + 2.0 * (k2.v_left + k3.v_left) + k4.v_left),
        state.v_right + h / 6.0 * (k1.v_right + 2.0 * (k2.v_right + k3.v_right) + k4.v_right),
        state.v + h / 6.0 * (k1.v + 2.0 * (k2.v + k3.v) + k4.v),
        state.delta + h / 6.0 * (k1.delta + 2.0 * (k2.delta + k3.delta) + k4.delta),
        state.s + h / 6.0 * (k1.s + 2.0 * (k2.s + k3.s) + k4.s),
    )
    if not out.is_finite():
        raise NonFiniteState("vehicle state became non-finite during integration")
    return out


class DiffDriveModel:
    """Differential-drive CT model: derivative + integration step."""

    truth_fields = ("x", "y", "theta", "v_left", "v_right", "s")

    def __init__(self, params: DiffDriveParams):
        self.params = params

    def derivative(self, state: VehicleState, cmd) -> VehicleState:
        return diff_drive_derivative(state, cmd, self.params)

    def step(self, state: VehicleState, cmd, h: float) -> VehicleState:
        if self.params.actuator_tau == 0:
            # zero lag: track speeds follow the (saturated) command directly
            state = replace(state,
                            v_left=_sat(cmd[0], self.params.v_max),
                            v_right=_sat(cmd[1], self.params.v_max))
        return rk4_step(self, state, cmd, h)

    def truth(self, state: VehicleState) -> dict[str, float]:
        return {"x": state.x, "y": state.y, "theta": state.theta,
                "v_left": state.v_left, "v_right": state.v_right, "s": state.s}

    def ground_speed(self, state: VehicleState) -> float:
        return 0.5 * (state.v_left + state.v_right)


class SteeredModel:
    """Front- or rear-steered CT model (kinematic bicycle)."""

    truth_fields = ("x", "y", "theta", "v", "delta", "s")

    def __init__(self, params: SteeredParams):
        self.params = params

    def derivative(self, state: VehicleState, cmd) -> VehicleState:
        return steered_derivative(state, cmd, self.params)

    def step(self, state: VehicleState, cmd, h: float) -> VehicleState:
        if self.params.actuator_tau == 0:
            state = replace(state, v=_sat(cmd[0], self.params.v_max))
        return rk4_step(self, state, cmd, h)

    def truth(self, state: VehicleState) -> dict[str, float]:
        return {"x": state.x, "y": state.y, "theta": state.theta,
                "v": state.v, "delta": state.delta, "s": state.s}

    def ground_speed(self, state: VehicleState) -> float:
        return state.v


@dataclass(frozen=True)
class EncoderConfig:
    """Rotary-encoder model parameters.

    The machine's drive-train nonlinearity is modeled as a multiplicative,
    distance-periodic error on the measured motion: the encoder integrates
    ``(1 + dist_amplitude * sin(2*pi*s/dist_wavelength + dist_phase)) ds``
    instead of the true distance, then quantizes to whole ticks.
    """

    ticks_per_meter: float = 1000.0
    dist_amplitude: float = 0.15
    dist_wavelength: float = 0.7    # m, e.g. sprocket pitch
    dist_phase: float = 0.0

    def __post_init__(self):
        if self.ticks_per_meter <= 0:
            raise ValueError("ticks_per_meter must be > 0")
        if not 0 <= self.dist_amplitude < 1:
            raise ValueError("dist_amplitude must be in [0, 1)")
        if self.dist_wavelength <= 0:
            raise ValueError("dist_wavelength must be > 0")


def distorted_distance(s: float, cfg: EncoderConfig) -> float:
    """Cumulative distance as seen by the encoder, in closed form.

    Integral of the distortion density from 0 to ``s``; strictly increasing
    because ``dist_amplitude < 1``.
    """
    if cfg.dist_amplitude == 0.0:
        return s
    k = TWO_PI / cfg.dist_wavelength
    return s - (cfg.dist_amplitude / k) * (
        math.cos(k * s + cfg.dist_phase) - math.cos(cfg.dist_phase)
    )


def encoder_sample(s_begin: float, s_end: float, v_true: float,
                   cfg: EncoderConfig, window: float) -> tuple[int, float]:
    """Ticks and speed estimate for one sampling window.

    Tick count is the difference of the quantized cumulative distorted
    distance at the window edges, so ticks telescope exactly over
    consecutive windows. The speed estimate carries the sign of ``v_true``
    (a quadrature encoder knows direction; the tick count does not).
    """
    if s_end < s_begin:
        raise ValueError("s_end must be >= s_begin")
    if window <= 0:
        raise ValueError("window must be > 0")
    d0 = distorted_distance(s_begin, cfg)
    d1 = distorted_distance(s_end, cfg)
    ticks = math.floor(cfg.ticks_per_meter * d1) - math.floor(cfg.ticks_per_meter * d0)
    v_measured = ticks / (cfg.ticks_per_meter * window)
    if v_true < 0:
        v_measured = -v_measured
    return ticks, v_measured
