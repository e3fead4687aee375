"""Kinematic execution of a stance plan.

The body follows a clipped PID velocity command toward each stance and
switches to single-step control near it: explicit footsteps (with cubic
swing profiles) land the body on the stance. Walking drift is modeled as
isotropic Gaussian noise on the body position once per gait step.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DegenerateInput, NonConvergence, OutOfRange
from .geometry import CircleRegion, Point2
from .planner.problem import PlanResult, StanceCandidate


class Mode(str, enum.Enum):
    VELOCITY = "VelocityTracking"
    SINGLE_STEP = "SingleStep"


class Foot(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"

    @property
    def other(self) -> "Foot":
        return Foot.RIGHT if self is Foot.LEFT else Foot.LEFT


@dataclass(frozen=True)
class GaitParams:
    v_max: tuple[float, float] = (0.4, 0.2)
    pid: tuple[float, float, float] = (100.0, 0.0, 0.0)
    dt: float = 0.01
    step_duration: float = 0.4
    max_step: float = 0.3
    apex_height: float = 0.06
    switch_distance: float = 0.3
    switch_angle: float = 0.2
    drift_sigma: float = 0.02
    half_stance: float = 0.1
    yaw_rate: float = 1.0
    correction_factor: float = 0.1
    settle_distance: float = 0.005
    gait_efficiency: float = 0.8
    max_corrections: int = 5

    def __post_init__(self):
        positive = {
            "dt": self.dt,
            "step_duration": self.step_duration,
            "max_step": self.max_step,
            "apex_height": self.apex_height,
            "switch_distance": self.switch_distance,
            "switch_angle": self.switch_angle,
            "yaw_rate": self.yaw_rate,
            "settle_distance": self.settle_distance,
            "gait_efficiency": self.gait_efficiency,
        }
        for name, value in positive.items():
            if not value > 0:
                raise DegenerateInput(f"gait parameter {name} must be positive, got {value}")
        if min(self.v_max) <= 0:
            raise DegenerateInput("v_max components must be positive")
        if min(self.pid) < 0 or self.drift_sigma < 0 or self.correction_factor < 0 or self.half_stance < 0:
            raise DegenerateInput("gains, drift and offsets must be non-negative")

    @property
    def v_max_scalar(self) -> float:
        # largest per-axis limit; bounds the length of the direction error
        return max(self.v_max)

    @property
    def v_nominal(self) -> float:
        return self.v_max_scalar * self.gait_efficiency


@dataclass(frozen=True)
class RobotState:
    position: Point2
    heading: float = 0.0
    mode: Mode = Mode.VELOCITY
    left_foot: Point2 | None = None
    right_foot: Point2 | None = None
    stance_foot: Foot = Foot.LEFT

    @classmethod
    def standing(cls, position, heading: float, params: GaitParams) -> "RobotState":
        p = np.asarray(position, dtype=float)
        left, right = _foot_spots(p, heading, params.half_stance)
        return cls(Point2(*map(float, p)), heading, Mode.VELOCITY, left, right, Foot.LEFT)


@dataclass
class PidMemory:
    integral: np.ndarray = field(default_factory=lambda: np.zeros(2))
    prev_error: np.ndarray | None = None

    def reset(self) -> None:
        self.integral = np.zeros(2)
        self.prev_error = None


@dataclass(frozen=True)
class FootStep:
    swing_foot: Foot
    start: Point2
    target: Point2
    duration: float
    # the other foot closes up in the same stride (step-to gait)
    trail_start: Point2
    trail_target: Point2


@dataclass(frozen=True)
class FootstepPlan:
    steps: tuple[FootStep, ...]
    terminal_body_pose: tuple[Point2, float]


@dataclass(frozen=True)
class Arrival:
    stance_index: int
    t: float
    terminal_error: float
    position: Point2


@dataclass
class SimTrace:
    samples: list[tuple[float, RobotState]]
    stance_arrivals: list[Arrival]

    @property
    def total_time(self) -> float:
        return self.samples[-1][0] if self.samples else 0.0

    @property
    def terminal_errors(self) -> list[float]:
        return [a.terminal_error for a in self.stance_arrivals]


def wrap_angle(a: float) -> float:
    return (a + math.pi) % (2 * math.pi) - math.pi


def _foot_spots(p, heading: float, half: float) -> tuple[Point2, Point2]:
    lat = np.array([-math.sin(heading), math.cos(heading)]) * half
    p = np.asarray(p, dtype=float)
    return Point2(*map(float, p + lat)), Point2(*map(float, p - lat))


def velocity_command(state: RobotState, target, params: GaitParams, memory: PidMemory) -> np.ndarray:
    """Clipped PID body velocity toward ``target`` (world frame).

    The error is the direction to the target, limited in length to one
    tick of travel at full speed; the PID output is clipped per axis to
    ``v_max``. ``memory`` carries the integral and previous error.
    """
    d = np.asarray(target, dtype=float) - np.asarray(state.position, dtype=float)
    dist = math.hypot(d[0], d[1])
    if dist == 0.0:
        memory.reset()
        return np.zeros(2)
    kp, ki, kd = params.pid
    e = d / dist * min(dist, params.v_max_scalar * params.dt)
    memory.integral = memory.integral + e * params.dt
    de = np.zeros(2) if memory.prev_error is None else (e - memory.prev_error) / params.dt
    memory.prev_error = e
    raw = kp * e + ki * memory.integral + kd * de
    vmax = np.asarray(params.v_max, dtype=float)
    return np.clip(raw, -vmax, vmax)


def _smoothstep(tau: float) -> float:
    return tau * tau * (3.0 - 2.0 * tau)


def swing_trajectory(start, target, apex_height: float, duration: float, t: float) -> tuple[float, float, float]:
    """Swing-foot position at time ``t``: cubic in x,y; two cubic halves in z peaking mid-swing."""
    if not 0.0 <= t <= duration:
        raise OutOfRange(f"t={t} outside [0, {duration}]")
    tau = t / duration
    s = _smoothstep(tau)
    x = start[0] + s * (target[0] - start[0])
    y = start[1] + s * (target[1] - start[1])
    u = 2.0 * tau if tau <= 0.5 else 2.0 * (1.0 - tau)
    z = apex_height * _smoothstep(u)
    return x, y, z


def plan_single_step(state: RobotState, stance_target, desired_yaw: float, params: GaitParams) -> FootstepPlan:
    """Strides that put both feet symmetrically about ``stance_target`` at ``desired_yaw``.

    Each stride is step-to: the lead foot swings to its new spot and the
    other foot closes up beside it, alternating the lead. The body advance
    is split evenly over as few strides as keep every foot move within
    ``max_step``.
    """
    p0 = np.asarray(state.position, dtype=float)
    p1 = np.asarray(stance_target, dtype=float)
    dist = float(np.hypot(*(p1 - p0)))
    yaw_err = wrap_angle(desired_yaw - state.heading)
    if dist > params.switch_distance + 1e-12 or abs(yaw_err) > params.switch_angle + 1e-12:
        raise OutOfRange(
            f"single step needs distance <= {params.switch_distance} and yaw error <= {params.switch_angle}, "
            f"got {dist:.4f} m / {yaw_err:.4f} rad"
        )
    terminal = (Point2(float(p1[0]), float(p1[1])), desired_yaw)
    if dist <= 1e-12 and abs(yaw_err) <= 1e-12:
        return FootstepPlan((), terminal)

    # footholds are taken under the current body pose; the feet recorded while
    # walking only decorate the trace
    left, right = _foot_spots(p0, state.heading, params.half_stance)
    lead0 = state.stance_foot.other

    for k in range(max(1, math.ceil(dist / params.max_step - 1e-12)), 11):
        duration = _stride_duration((p1 - p0) / k, params)
        feet = {Foot.LEFT: left, Foot.RIGHT: right}
        steps = []
        lead = lead0
        for j in range(1, k + 1):
            pj = p0 + (p1 - p0) * (j / k)
            yj = state.heading + yaw_err * (j / k)
            spots = dict(zip((Foot.LEFT, Foot.RIGHT), _foot_spots(pj, yj, params.half_stance)))
            trail = lead.other
            steps.append(FootStep(lead, feet[lead], spots[lead], duration, feet[trail], spots[trail]))
            feet = spots
            lead = trail
        worst = max(
            max(math.dist(s.start, s.target), math.dist(s.trail_start, s.trail_target)) for s in steps
        )
        if worst <= params.max_step + 1e-12:
            return FootstepPlan(tuple(steps), terminal)
    raise OutOfRange("could not split the correction into steps within max_step")


def _stride_duration(advance: np.ndarray, params: GaitParams) -> float:
    """Nominal step time, stretched so the mean body speed stays inside the velocity box."""
    ax, ay = abs(float(advance[0])), abs(float(advance[1]))
    need = max(ax / params.v_max[0], ay / params.v_max[1])
    return max(params.step_duration, need)


def _slew(heading: float, goal: float, max_delta: float) -> float:
    err = wrap_angle(goal - heading)
    return wrap_angle(heading + max(-max_delta, min(max_delta, err)))


class _Sim:
    def __init__(self, params: GaitParams, rng: np.random.Generator, start_state: RobotState, t0: float = 0.0):
        self.p = params
        self.rng = rng
        self.state = start_state
        self.t = t0
        self.samples: list[tuple[float, RobotState]] = [(t0, start_state)]

    def record(self) -> None:
        self.samples.append((self.t, self.state))

    def drift(self, scale: float = 1.0) -> np.ndarray:
        if self.p.drift_sigma == 0 or scale == 0:
            return np.zeros(2)
        return self.rng.normal(0.0, self.p.drift_sigma * scale, 2)

    def walk_to(self, target: np.ndarray, desired_yaw: float, stop_when, timeout: float) -> None:
        """Velocity tracking until ``stop_when(dist, yaw_err)`` holds."""
        p = self.p
        memory = PidMemory()
        step_clock = 0.0
        t_end = self.t + timeout
        while True:
            s = self.state
            pos = np.asarray(s.position, dtype=float)
            dist = float(np.hypot(*(target - pos)))
            if stop_when(dist, wrap_angle(desired_yaw - s.heading)):
                return
            if self.t >= t_end:
                raise NonConvergence(f"stance at {tuple(target)} not reached within {timeout:.1f} s")
            v = velocity_command(s, target, p, memory)
            pos = pos + v * p.dt
            speed = float(np.hypot(*v))
            goal_yaw = desired_yaw if dist <= p.switch_distance or speed == 0 else math.atan2(v[1], v[0])
            heading = _slew(s.heading, goal_yaw, p.yaw_rate * p.dt)
            left, right, stance = s.left_foot, s.right_foot, s.stance_foot
            if speed > 0:
                step_clock += p.dt
                if step_clock >= p.step_duration - 1e-12:
                    step_clock -= p.step_duration
                    pos = pos + self.drift()
                    swing = stance.other
                    # the swing foot lands under where the body will be mid-way through the next step
                    ahead = pos + v * (0.5 * p.step_duration)
                    spots = dict(zip((Foot.LEFT, Foot.RIGHT), _foot_spots(ahead, heading, p.half_stance)))
                    if swing is Foot.LEFT:
                        left = spots[Foot.LEFT]
                    else:
                        right = spots[Foot.RIGHT]
                    stance = swing
            self.t += p.dt
            self.state = RobotState(Point2(float(pos[0]), float(pos[1])), heading, Mode.VELOCITY, left, right, stance)
            self.record()

    def settle_step(self) -> None:
        """Final stopping step of velocity mode: one uncorrected drift sample."""
        p = self.p
        s = self.state
        pos = np.asarray(s.position, dtype=float) + self.drift()
        left, right = _foot_spots(pos, s.heading, p.half_stance)
        self.t += p.step_duration
        self.state = replace(s, position=Point2(float(pos[0]), float(pos[1])), left_foot=left, right_foot=right)
        self.record()

    def execute(self, plan: FootstepPlan) -> None:
        p = self.p
        s0 = replace(self.state, mode=Mode.SINGLE_STEP)
        self.state = s0
        if not plan.steps:
            return
        pos0 = np.asarray(s0.position, dtype=float)
        target, yaw1 = plan.terminal_body_pose
        yaw0 = s0.heading
        k = len(plan.steps)
        body_prev = pos0
        for j, step in enumerate(plan.steps, start=1):
            n_ticks = max(1, int(round(step.duration / p.dt)))
            body_next = pos0 + (np.asarray(target) - pos0) * (j / k)
            yaw_prev = yaw0 + wrap_angle(yaw1 - yaw0) * ((j - 1) / k)
            yaw_next = yaw0 + wrap_angle(yaw1 - yaw0) * (j / k)
            for tick in range(1, n_ticks + 1):
                s = _smoothstep(tick / n_ticks)
                body = body_prev + s * (body_next - body_prev)
                self.t += step.duration / n_ticks
                if tick == n_ticks:
                    # residual drift of a corrected step
                    noise = self.drift(p.correction_factor)
                    body = body_next + noise
                    lead = Point2(*map(float, np.asarray(step.target) + noise))
                    trail = Point2(*map(float, np.asarray(step.trail_target) + noise))
                    left, right = (lead, trail) if step.swing_foot is Foot.LEFT else (trail, lead)
                    stance = step.swing_foot.other
                    body_prev = body
                else:
                    left, right, stance = self.state.left_foot, self.state.right_foot, self.state.stance_foot
                heading = wrap_angle(yaw_prev + s * (yaw_next - yaw_prev))
                self.state = RobotState(
                    Point2(float(body[0]), float(body[1])), heading, Mode.SINGLE_STEP, left, right, stance
                )
                self.record()


def _leg_timeout(dist: float, params: GaitParams) -> float:
    return 5.0 * dist / min(params.v_max) + 20.0


def _approach(sim: _Sim, index: int, center: np.ndarray, radius: float, single_step: bool) -> Arrival:
    p = sim.p
    pos = np.asarray(sim.state.position, dtype=float)
    leg = center - pos
    dist0 = float(np.hypot(*leg))
    desired_yaw = math.atan2(leg[1], leg[0]) if dist0 > p.switch_distance else sim.state.heading
    timeout = _leg_timeout(dist0, p)
    if single_step:
        sim.walk_to(
            center,
            desired_yaw,
            lambda d, e: d <= p.switch_distance and abs(e) <= p.switch_angle,
            timeout,
        )
        for _ in range(p.max_corrections):
            fs = plan_single_step(sim.state, center, desired_yaw, p)
            sim.execute(fs)
            err = float(np.hypot(*(center - np.asarray(sim.state.position))))
            if err <= radius:
                break
            if err > p.switch_distance:
                raise NonConvergence(f"stance {index}: correction drifted {err:.3f} m away")
        else:
            raise NonConvergence(f"stance {index}: error {err:.4f} m above tolerance {radius} after corrections")
    else:
        sim.walk_to(center, desired_yaw, lambda d, e: d <= p.settle_distance, timeout)
        sim.settle_step()
    err = float(np.hypot(*(center - np.asarray(sim.state.position))))
    return Arrival(index, sim.t, err, sim.state.position)


def simulate(
    plan: PlanResult,
    params: GaitParams,
    seed: int = 0,
    single_step_enabled: bool = True,
    start: Sequence[float] | None = None,
    start_heading: float = 0.0,
    end: Sequence[float] | None = None,
) -> SimTrace:
    """Walk the plan's stances in order (then to the end point, if any)."""
    origin = start if start is not None else plan.meta.get("start")
    if origin is None:
        raise DegenerateInput("simulation needs a start position")
    finish = end if end is not None else plan.meta.get("end")
    rng = np.random.default_rng(seed)
    sim = _Sim(params, rng, RobotState.standing(origin, start_heading, params))
    arrivals = []
    for stance in plan.ordered_stances:
        center = np.asarray(stance.center, dtype=float)
        arrivals.append(_approach(sim, stance.index, center, stance.circle.radius, single_step_enabled))
        sim.state = replace(sim.state, mode=Mode.VELOCITY)
    if finish is not None:
        target = np.asarray(finish, dtype=float)
        pos = np.asarray(sim.state.position, dtype=float)
        dist = float(np.hypot(*(target - pos)))
        if dist > params.settle_distance:
            yaw = math.atan2(target[1] - pos[1], target[0] - pos[0])
            sim.walk_to(target, yaw, lambda d, e: d <= params.settle_distance, _leg_timeout(dist, params))
    return SimTrace(sim.samples, arrivals)


def estimate_plan_time(
    plan: PlanResult, params: GaitParams, t_stop: float, t_scan: float, n_targets: int | None = None
) -> float:
    """Walking time at the nominal speed plus stop and scan overheads."""
    n = len(plan.assignment) if n_targets is None else n_targets
    return plan.travel_distance / params.v_nominal + plan.stop_count * t_stop + n * t_scan


def goal_reaching_trials(
    n_trials: int,
    params: GaitParams,
    single_step_enabled: bool,
    seed: int = 0,
    target: tuple[float, float] = (1.0, 0.0),
    tolerance: float = 0.05,
    start_radius: float = 0.2,
) -> list[Arrival]:
    """Repeated single-stance runs from randomized starts toward a fixed target."""
    ss = np.random.SeedSequence(seed)
    out = []
    stance = StanceCandidate(1, CircleRegion(Point2(*target), tolerance), frozenset({0}))
    for child in ss.spawn(n_trials):
        rng = np.random.default_rng(child)
        r = start_radius * math.sqrt(rng.uniform())
        th = rng.uniform(0, 2 * math.pi)
        start = (r * math.cos(th), r * math.sin(th))
        heading = float(rng.uniform(-math.pi / 6, math.pi / 6))
        plan = PlanResult((stance,), {0: 1}, 0.0, 0.0, 1)
        sim_seed = int(rng.integers(2**63))
        trace = simulate(plan, params, sim_seed, single_step_enabled, start=start, start_heading=heading)
        out.append(trace.stance_arrivals[0])
    return out


# ----------------------------------------------------------------- trace files


def write_trace(trace: SimTrace, path: str | Path) -> Path:
    path = Path(path)
    lines = ["# t x y heading mode"]
    for t, s in trace.samples:
        lines.append(f"{t:.6f} {s.position.x:.9f} {s.position.y:.9f} {s.heading:.9f} {s.mode.value}")
    lines.append("# summary")
    lines.append(f"# total_time {trace.total_time:.6f}")
    for a in trace.stance_arrivals:
        lines.append(
            f"# arrival {a.stance_index} {a.t:.6f} {a.terminal_error:.9f} {a.position.x:.9f} {a.position.y:.9f}"
        )
    path.write_text("\n".join(lines) + "\n")
    return path


def read_trace(path: str | Path) -> SimTrace:
    samples = []
    arrivals = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts and parts[0] == "arrival":
                idx, t, err, x, y = parts[1:]
                arrivals.append(Arrival(int(idx), float(t), float(err), Point2(float(x), float(y))))
            continue
        t, x, y, heading, mode = line.split()
        samples.append((float(t), RobotState(Point2(float(x), float(y)), float(heading), Mode(mode))))
    return SimTrace(samples, arrivals)
