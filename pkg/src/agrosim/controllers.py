"""Sampled (DE-side) controller library.

The four speed-controller iterations from the encoder-feedback case study
(raw PI, running-average + PI, Butterworth + PI, PI + adaptive B-spline
learning feedforward) and a pure-pursuit steering law for route following.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .vehicles import DiffDriveParams, VehicleState

TWO_PI = 2.0 * math.pi


class InvalidCutoff(ValueError):
    """Butterworth cutoff outside (0, f_sample/2)."""


class RouteExhausted(Exception):
    """Progress passed the final waypoint; the mission is complete."""


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(max(x, lo), hi)


# ---------------------------------------------------------------------------
# Filters
# ---------------------------------------------------------------------------

class RunningAverage:
    """Sliding mean over the last N samples, zero-prefilled.

    The buffer starts filled with zeros, so the first outputs ramp in
    (N=3 fed 1,1,1 yields 1/3, 2/3, 1).
    """

    def __init__(self, window_length: int):
        if window_length < 1:
            raise ValueError("window_length must be >= 1")
        self.window_length = int(window_length)
        self._buf = [0.0] * self.window_length
        self._head = 0

    def step(self, x: float) -> float:
        self._buf[self._head] = x
        self._head = (self._head + 1) % self.window_length
        # fsum keeps the output exactly the mean of the buffer contents
        return math.fsum(self._buf) / self.window_length

    def reset(self):
        self._buf = [0.0] * self.window_length
        self._head = 0


@dataclass
class BiquadFilter:
    """Second-order section, direct form II transposed, a0 normalized to 1."""

    b0: float
    b1: float
    b2: float
    a1: float
    a2: float
    s1: float = 0.0
    s2: float = 0.0

    def step(self, x: float) -> float:
        y = self.b0 * x + self.s1
        self.s1 = self.b1 * x - self.a1 * y + self.s2
        self.s2 = self.b2 * x - self.a2 * y
        return y

    def reset(self):
        self.s1 = 0.0
        self.s2 = 0.0

    @property
    def dc_gain(self) -> float:
        return (self.b0 + self.b1 + self.b2) / (1.0 + self.a1 + self.a2)

    def is_stable(self) -> bool:
        roots = np.roots([1.0, self.a1, self.a2])
        return bool(np.all(np.abs(roots) < 1.0))


def biquad_step(f: BiquadFilter, x: float) -> float:
    """Functional alias for :meth:`BiquadFilter.step`."""
    return f.step(x)


def butterworth_design(f_cut: float, f_sample: float) -> BiquadFilter:
    """2nd-order low-pass Butterworth via bilinear transform with prewarping.

    With K = tan(pi*f_cut/f_sample) and D = K^2 + sqrt(2)*K + 1:
    b0 = b2 = K^2/D, b1 = 2K^2/D, a1 = 2(K^2-1)/D, a2 = (K^2 - sqrt(2)K + 1)/D.
    DC gain is exactly 1.
    """
    if not 0 < f_cut < f_sample / 2:
        raise InvalidCutoff(
            f"f_cut must be in (0, f_sample/2), got {f_cut} at f_sample={f_sample}")
    k = math.tan(math.pi * f_cut / f_sample)
    sq2 = math.sqrt(2.0)
    d = k * k + sq2 * k + 1.0
    return BiquadFilter(
        b0=k * k / d,
        b1=2.0 * k * k / d,
        b2=k * k / d,
        a1=2.0 * (k * k - 1.0) / d,
        a2=(k * k - sq2 * k + 1.0) / d,
    )


# ---------------------------------------------------------------------------
# PI feedback
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PIConfig:
    kp: float = 1.0      # command units per (m/s) error
    ki: float = 2.0      # per second
    u_min: float = -2.0
    u_max: float = 2.0

    def __post_init__(self):
        if self.u_min >= self.u_max:
            raise ValueError("u_min must be < u_max")


@dataclass
class PIState:
    integrator: float = 0.0


def pi_step(cfg: PIConfig, st: PIState, setpoint: float, measured: float,
            dt: float) -> float:
    """One PI update with conditional-integration anti-windup.

    The integrator accumulates only when the raw output is not pushing
    further into saturation, and is itself clamped to the output range.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    e = setpoint - measured
    inc = cfg.ki * e * dt
    u_raw = cfg.kp * e + st.integrator + inc
    u = _clamp(u_raw, cfg.u_min, cfg.u_max)
    pushing = (u_raw > cfg.u_max and e > 0) or (u_raw < cfg.u_min and e < 0)
    if not pushing:
        st.integrator = _clamp(st.integrator + inc, cfg.u_min, cfg.u_max)
    return u


# ---------------------------------------------------------------------------
# B-spline learning feedforward
# ---------------------------------------------------------------------------

@dataclass
class BSplineNetwork:
    """Quadratic uniform cyclic B-spline network over the unit phase interval.

    The degree is fixed at 2, so exactly three basis functions are active at
    any phase and they form a partition of unity. Weights adapt by LMS:
    w_i += learn_rate * e * B_i(phi).
    """

    num_knots: int = 16
    learn_rate: float = 0.2
    weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    degree = 2

    def __post_init__(self):
        if self.num_knots < 3:
            raise ValueError("num_knots must be >= 3")
        if self.weights is None:
            self.weights = np.zeros(self.num_knots)
        else:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != (self.num_knots,):
                raise ValueError("weights length must equal num_knots")

    def evaluate(self, phi: float) -> float:
        idx, vals = bspline_basis(phi, self.num_knots)
        w = self.weights
        return w[idx[0]] * vals[0] + w[idx[1]] * vals[1] + w[idx[2]] * vals[2]


def bspline_basis(phi: float, num_knots: int) -> tuple[tuple[int, int, int],
                                                        tuple[float, float, float]]:
    """Active indices and values of the cyclic quadratic B-spline basis.

    With g = phi*K, j = floor(g) and t = g - j, the nonzero basis values are
    ((1-t)^2/2, (-2t^2+2t+1)/2, t^2/2) at weight indices (j-1, j, j+1) mod K.
    """
    if not 0.0 <= phi < 1.0:
        phi = phi % 1.0
    g = phi * num_knots
    j = int(g)
    if j == num_knots:   # phi just below 1.0 rounding up
        j -= 1
    t = g - j
    vals = (0.5 * (1.0 - t) * (1.0 - t),
            0.5 * (-2.0 * t * t + 2.0 * t + 1.0),
            0.5 * t * t)
    idx = ((j - 1) % num_knots, j % num_knots, (j + 1) % num_knots)
    return idx, vals


def lffc_step(net: BSplineNetwork, phi: float, e: float, adapt: bool) -> float:
    """Feedforward output at phase ``phi``; optional LMS weight update.

    The output is computed from the pre-update weights.
    """
    idx, vals = bspline_basis(phi, net.num_knots)
    w = net.weights
    u_ff = w[idx[0]] * vals[0] + w[idx[1]] * vals[1] + w[idx[2]] * vals[2]
    if adapt:
        g = net.learn_rate * e
        w[idx[0]] += g * vals[0]
        w[idx[1]] += g * vals[1]
        w[idx[2]] += g * vals[2]
    return u_ff


# ---------------------------------------------------------------------------
# Speed controller variants
# ---------------------------------------------------------------------------

class SpeedVariant(str, Enum):
    RAW = "raw"
    RUNNING_AVG = "avg"
    BUTTERWORTH = "butter"
    LFFC = "lffc"


class SpeedController:
    """One of the four speed-controller iterations, with its internal state.

    Raw feeds the PI the raw encoder speed; the filter variants prefilter it;
    the LFFC variant adds an adaptive B-spline feedforward on top of the
    Butterworth + PI combination. Adaptation pauses near standstill, where
    the spatial phase carries no information.
    """

    def __init__(self, variant: SpeedVariant | str, pi_cfg: PIConfig, *,
                 avg_window: int = 25,
                 f_cut: float = 2.0,
                 f_sample: float = 50.0,
                 lffc: BSplineNetwork | None = None,
                 adapt_min_setpoint: float = 0.1):
        self.variant = SpeedVariant(variant)
        self.pi_cfg = pi_cfg
        self.pi_state = PIState()
        self.adapt_min_setpoint = adapt_min_setpoint
        self.avg: RunningAverage | None = None
        self.biquad: BiquadFilter | None = None
        self.lffc: BSplineNetwork | None = None
        if self.variant is SpeedVariant.RUNNING_AVG:
            self.avg = RunningAverage(avg_window)
        elif self.variant in (SpeedVariant.BUTTERWORTH, SpeedVariant.LFFC):
            self.biquad = butterworth_design(f_cut, f_sample)
        if self.variant is SpeedVariant.LFFC:
            self.lffc = lffc if lffc is not None else BSplineNetwork()

    def step(self, setpoint: float, v_measured: float, phase: float,
             dt: float) -> float:
        if self.avg is not None:
            v_est = self.avg.step(v_measured)
        elif self.biquad is not None:
            v_est = self.biquad.step(v_measured)
        else:
            v_est = v_measured
        u = pi_step(self.pi_cfg, self.pi_state, setpoint, v_est, dt)
        if self.lffc is not None:
            e = setpoint - v_est
            adapt = abs(setpoint) > self.adapt_min_setpoint
            u = u + lffc_step(self.lffc, phase, e, adapt)
        return _clamp(u, self.pi_cfg.u_min, self.pi_cfg.u_max)


def speed_controller_step(ctrl: SpeedController, setpoint: float,
                          v_measured: float, phase: float, dt: float) -> float:
    """Functional alias for :meth:`SpeedController.step`."""
    return ctrl.step(setpoint, v_measured, phase, dt)


# ---------------------------------------------------------------------------
# Pure pursuit steering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PurePursuitConfig:
    lookahead: float = 1.2      # m
    cruise_speed: float = 1.0   # m/s

    def __post_init__(self):
        if self.lookahead <= 0:
            raise ValueError("lookahead must be > 0")
        if self.cruise_speed <= 0:
            raise ValueError("cruise_speed must be > 0")

# Fraction of cruise speed kept through the end-of-route taper so the final
# waypoint is actually reached, and the slack (m) past the last waypoint at
# which the route counts as exhausted.
_TAPER_FLOOR = 0.2
_END_TOL = 0.01


def route_lengths(route: list[tuple[float, float]]) -> np.ndarray:
    """Cumulative arc length at each waypoint (starts at 0)."""
    if not route:
        raise ValueError("route must be non-empty")
    pts = np.asarray(route, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("route must be a list of (x, y) pairs")
    seg = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    return np.concatenate(([0.0], np.cumsum(seg)))


def pursuit_curvature(y_lateral: float, lookahead: float) -> float:
    """Curvature of the arc through the origin and the lookahead target."""
    return 2.0 * y_lateral / (lookahead * lookahead)


def advance_progress(route: list[tuple[float, float]], x: float, y: float,
                     progress: float, window: float) -> float:
    """Monotone projection of (x, y) onto the route polyline.

    Searches from the current progress up to ``progress + window`` and
    returns the arc length of the closest point; never moves backwards.
    """
    cum = route_lengths(route)
    total = float(cum[-1])
    best_s = progress
    best_d2 = math.inf
    for i in range(len(route) - 1):
        s0, s1 = float(cum[i]), float(cum[i + 1])
        if s1 < progress or s0 > progress + window:
            continue
        ax, ay = route[i]
        bx, by = route[i + 1]
        dx, dy = bx - ax, by - ay
        seg_len2 = dx * dx + dy * dy
        if seg_len2 == 0.0:
            u = 0.0
        else:
            u = _clamp(((x - ax) * dx + (y - ay) * dy) / seg_len2, 0.0, 1.0)
        s_here = _clamp(s0 + u * (s1 - s0), progress, progress + window)
        px, py = ax + u * dx, ay + u * dy
        d2 = (x - px) ** 2 + (y - py) ** 2
        if d2 < best_d2:
            best_d2 = d2
            best_s = s_here
    return min(max(best_s, progress), total)


def pure_pursuit_step(pose: VehicleState, route: list[tuple[float, float]],
                      cfg: PurePursuitConfig, p: DiffDriveParams,
                      progress: float = 0.0) -> tuple[float, float, float]:
    """Track speed commands chasing the lookahead point on the route.

    Returns (u_left, u_right, new_progress). Progress is advanced by
    monotone projection of the pose onto the route; the commanded speed
    tapers linearly over the last lookahead-length of the route. Raises
    :class:`RouteExhausted` once progress reaches the final waypoint.
    """
    if not route:
        raise ValueError("route must be non-empty")
    cum = route_lengths(route)
    total = float(cum[-1])
    progress = advance_progress(route, pose.x, pose.y, progress,
                                window=2.0 * cfg.lookahead)
    if progress >= total - _END_TOL:
        raise RouteExhausted
    tx, ty = lookahead_target(route, progress, cfg.lookahead)
    # target in vehicle frame
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    dx, dy = tx - pose.x, ty - pose.y
    y_v = -s * dx + c * dy
    kappa = pursuit_curvature(y_v, cfg.lookahead)
    remaining = total - progress
    v_c = cfg.cruise_speed * _clamp(remaining / cfg.lookahead, _TAPER_FLOOR, 1.0)
    half = 0.5 * kappa * p.track_width
    return v_c * (1.0 - half), v_c * (1.0 + half), progress


def lookahead_target(route: list[tuple[float, float]], progress: float,
                     lookahead: float) -> tuple[float, float]:
    """Point at arc length ``progress + lookahead``, clamped to the route end."""
    cum = route_lengths(route)
    target_s = min(progress + lookahead, float(cum[-1]))
    return _interpolate_at(route, cum, target_s)


def _interpolate_at(route, cum, s: float) -> tuple[float, float]:
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = min(max(i, 0), len(route) - 2) if len(route) > 1 else 0
    if len(route) == 1:
        return route[0]
    s0, s1 = float(cum[i]), float(cum[i + 1])
    if s1 == s0:
        return route[i + 1]
    u = (s - s0) / (s1 - s0)
    ax, ay = route[i]
    bx, by = route[i + 1]
    return ax + u * (bx - ax), ay + u * (by - ay)
