"""Closed-loop simulation: scenarios, animal motion, sequence schedule, metrics."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .camera import DEPTH_EPSILON, PixelPoint, SensorSpec, visibility, relative_position_in_frame
from .core import (
    CameraInput,
    CameraState,
    DroneInput,
    DroneState,
    EulerAngles,
    TargetState,
    distance,
    relative_rotation,
    value_eq,
    vec3,
    yaw_of,
)
from .costs import (
    DRONE_SENSOR,
    E1_WEIGHTS,
    E2_WEIGHTS,
    CostWeights,
    EthicsParams,
    ShotObjective,
    eye_pixel,
    framing_error,
    j_prox,
    stage_cost,
    subject_pixels,
)
from .plant import (
    Limits,
    SimConfig,
    clamp_camera_input,
    clamp_camera_state,
    clamp_drone_input,
    clamp_drone_state,
    forecast_target,
    step_camera,
    step_drone,
)
from .planner import InvalidConfig, SolverConfig, plan

log = logging.getLogger(__name__)


class EmptyRun(ValueError):
    pass


@dataclass(frozen=True)
class Waypoint:
    __eq__ = value_eq

    p: np.ndarray
    speed: float

    def __post_init__(self):
        object.__setattr__(self, "p", vec3(self.p))
        if not self.speed >= 0:
            raise ValueError("waypoint speed must be >= 0")


@dataclass(frozen=True)
class AnimalModel:
    kind: str
    initial: TargetState
    waypoints: tuple[Waypoint, ...] = ()

    def __post_init__(self):
        if self.kind not in ("stationary", "constant_velocity", "waypoints"):
            raise ValueError(f"unknown animal model kind {self.kind!r}")
        object.__setattr__(self, "waypoints", tuple(self.waypoints))
        if self.kind == "waypoints" and not self.waypoints:
            raise ValueError("waypoints model needs at least one waypoint")

    def state_at(self, t: float) -> TargetState:
        s0 = self.initial
        if self.kind == "stationary":
            return TargetState(s0.p_t, vec3(0, 0, 0), s0.heading)
        if self.kind == "constant_velocity":
            return TargetState(s0.p_t + t * s0.v_t, s0.v_t, s0.heading)
        return self._along_waypoints(t)

    def _along_waypoints(self, t: float) -> TargetState:
        p = np.array(self.initial.p_t)
        heading = self.initial.heading
        remaining = t
        for wp in self.waypoints:
            leg = wp.p - p
            length = float(np.linalg.norm(leg))
            if length == 0.0 or wp.speed == 0.0:
                p = np.array(wp.p)
                continue
            direction = leg / length
            heading = EulerAngles(0.0, 0.0, math.atan2(direction[1], direction[0]))
            duration = length / wp.speed
            if remaining <= duration:
                return TargetState(vec3(p + remaining * wp.speed * direction),
                                   vec3(wp.speed * direction), heading)
            remaining -= duration
            p = np.array(wp.p)
        return TargetState(vec3(p), vec3(0, 0, 0), heading)


@dataclass(frozen=True)
class Sequence:
    duration: float
    objective: ShotObjective
    weights: CostWeights
    ethics_overrides: dict | None = None
    label: str = ""

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("sequence duration must be positive")


@dataclass(frozen=True)
class Scenario:
    name: str
    sim: SimConfig
    limits: Limits
    ethics: EthicsParams
    animal: AnimalModel
    sequences: tuple[Sequence, ...]
    initial_drone: DroneState
    initial_camera: CameraState
    mode: str = "cinewild"
    solver: SolverConfig = field(default_factory=SolverConfig)
    sensor: SensorSpec = DRONE_SENSOR
    perception_noise: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))
        if not self.sequences:
            raise ValueError("scenario needs at least one sequence")
        if self.mode not in ("cinewild", "baseline"):
            raise ValueError(f"mode must be cinewild or baseline, got {self.mode!r}")
        if not self.limits.f_min <= self.initial_camera.f <= self.limits.f_max:
            raise ValueError("initial focal length outside limits")
        if self.perception_noise < 0:
            raise ValueError("perception_noise must be >= 0")

    def steps_per_sequence(self) -> list[int]:
        return [int(round(s.duration / self.sim.dt)) for s in self.sequences]

    def ethics_for(self, seq: Sequence) -> EthicsParams:
        if not seq.ethics_overrides:
            return self.ethics
        return replace(self.ethics, **seq.ethics_overrides)


def baseline_mode(scenario: Scenario) -> Scenario:
    """Same scenario with the wildlife terms (proximity, visibility, smoothness) switched off."""
    seqs = tuple(
        replace(s, weights=replace(s.weights, w_prox=0.0, w_fov=0.0, w_soft=0.0))
        for s in scenario.sequences
    )
    return replace(scenario, sequences=seqs, mode="baseline")


# --- records -----------------------------------------------------------------

@dataclass(frozen=True)
class StepRecord:
    k: int
    t: float
    seq: int
    p_d_x: float
    p_d_y: float
    p_d_z: float
    v_d_x: float
    v_d_y: float
    v_d_z: float
    gimbal_roll: float
    gimbal_pitch: float
    gimbal_yaw: float
    f: float
    p_t_x: float
    p_t_y: float
    p_t_z: float
    heading_roll: float
    heading_pitch: float
    heading_yaw: float
    d_dt: float
    within_d_vis: bool
    im_t_u: float
    im_t_v: float
    im_d_x: float
    im_d_y: float
    im_d_x_cent: float
    inside_fov: bool
    e_im_x: float
    e_im_y: float
    e_yaw: float
    a_norm: float
    v_norm: float
    j_prox: float
    j_fov: float
    j_soft: float
    j_im: float
    j_p: float
    total: float
    prox_unweighted: float


CSV_COLUMNS = tuple(f.name for f in fields(StepRecord))


def make_record(k, t, seq, drone: DroneState, camera: CameraState, target: TargetState,
                u_d: DroneInput, obj: ShotObjective, weights: CostWeights,
                ethics: EthicsParams, sensor: SensorSpec) -> StepRecord:
    d = distance(drone.p_d, target.p_t)
    eye = ethics.eye
    px = eye_pixel(drone, target, eye)
    diag = math.hypot(eye.sensor.W_px, eye.sensor.H_px)
    if px is None:
        im_dx = im_dy = math.nan
        cent = diag
    else:
        im_dx, im_dy = px.u, px.v
        cent = min(abs(px.u - eye.c_u), diag)
    p_td = relative_position_in_frame(target.rotation, target.p_t, drone.p_d)
    inside = visibility(eye, p_td, d, ethics.d_vis)

    pix = subject_pixels(drone, camera, target, obj, sensor)
    if pix is None:
        im_u = im_v = e_x = e_y = math.nan
    else:
        e_x, e_y, _ = framing_error(pix, obj)
        im_u, im_v = e_x + obj.im_star.u, e_y + obj.im_star.v

    R_dt = relative_rotation(drone.rotation, target.rotation)
    e_yaw = yaw_of(obj.R_star.T @ R_dt.T)
    b = stage_cost(drone, camera, target, u_d, obj, weights, ethics, sensor)
    g, h = drone.gimbal, target.heading
    return StepRecord(
        k=k, t=t, seq=seq,
        p_d_x=float(drone.p_d[0]), p_d_y=float(drone.p_d[1]), p_d_z=float(drone.p_d[2]),
        v_d_x=float(drone.v_d[0]), v_d_y=float(drone.v_d[1]), v_d_z=float(drone.v_d[2]),
        gimbal_roll=g.roll, gimbal_pitch=g.pitch, gimbal_yaw=g.yaw,
        f=camera.f,
        p_t_x=float(target.p_t[0]), p_t_y=float(target.p_t[1]), p_t_z=float(target.p_t[2]),
        heading_roll=h.roll, heading_pitch=h.pitch, heading_yaw=h.yaw,
        d_dt=d, within_d_vis=d < ethics.d_vis,
        im_t_u=im_u, im_t_v=im_v,
        im_d_x=im_dx, im_d_y=im_dy, im_d_x_cent=cent,
        inside_fov=inside,
        e_im_x=e_x, e_im_y=e_y, e_yaw=e_yaw,
        a_norm=float(np.linalg.norm(u_d.a_d)),
        v_norm=float(np.linalg.norm(drone.v_d)),
        j_prox=b.j_prox, j_fov=b.j_fov, j_soft=b.j_soft, j_im=b.j_im, j_p=b.j_p, total=b.total,
        prox_unweighted=j_prox(d, ethics, 1.0),
    )


# --- summary -----------------------------------------------------------------

@dataclass(frozen=True)
class SummaryStats:
    n_steps: int
    d_dt: float
    f: float
    e_im_x: float
    e_im_y: float
    a_norm: float
    v_norm: float
    j_prox: float
    prox_unweighted: float
    n_within_d_vis: int
    pct_inside_fov: float | None
    e_yaw: float | None
    abs_e_yaw: float | None
    im_d_x: float | None
    im_d_x_cent: float | None


@dataclass(frozen=True)
class RunSummary:
    overall: SummaryStats
    per_sequence: tuple[SummaryStats, ...]

    def as_dict(self) -> dict:
        from dataclasses import asdict

        return {"overall": asdict(self.overall), "per_sequence": [asdict(s) for s in self.per_sequence]}


def _mean(xs) -> float:
    a = np.asarray(xs, dtype=float)
    a = a[np.isfinite(a)]
    return float(a.mean()) if a.size else math.nan


def _stats(records) -> SummaryStats:
    near = [r for r in records if r.within_d_vis]
    n_near = len(near)
    return SummaryStats(
        n_steps=len(records),
        d_dt=_mean([r.d_dt for r in records]),
        f=_mean([r.f for r in records]),
        e_im_x=_mean([abs(r.e_im_x) for r in records]),
        e_im_y=_mean([abs(r.e_im_y) for r in records]),
        a_norm=_mean([r.a_norm for r in records]),
        v_norm=_mean([r.v_norm for r in records]),
        j_prox=_mean([r.j_prox for r in records]),
        prox_unweighted=_mean([r.prox_unweighted for r in records]),
        n_within_d_vis=n_near,
        pct_inside_fov=100.0 * sum(r.inside_fov for r in near) / n_near if n_near else None,
        e_yaw=_mean([r.e_yaw for r in near]) if n_near else None,
        abs_e_yaw=_mean([abs(r.e_yaw) for r in near]) if n_near else None,
        im_d_x=_mean([r.im_d_x for r in near]) if n_near else None,
        im_d_x_cent=_mean([r.im_d_x_cent for r in near]) if n_near else None,
    )


def summarize(records) -> RunSummary:
    """Means over the run and per sequence.

    Visibility metrics (inside-FoV share, yaw error, eye-image position) only
    use steps closer than the visibility distance.
    """
    records = list(records)
    if not records:
        raise EmptyRun("no records to summarise")
    seqs = sorted({r.seq for r in records})
    return RunSummary(
        overall=_stats(records),
        per_sequence=tuple(_stats([r for r in records if r.seq == s]) for s in seqs),
    )


# --- closed loop ---------------------------------------------------------------

def run(scenario: Scenario, seed: int = 0, progress=None) -> tuple[list[StepRecord], RunSummary]:
    """Simulate the scenario in closed loop, replanning every step."""
    if scenario.mode == "baseline":
        scenario = baseline_mode(scenario)
    sim = scenario.sim
    if sim.horizon < 1 or not sim.dt > 0:
        raise InvalidConfig("degenerate simulation config")
    counts = scenario.steps_per_sequence()
    if sum(counts) < 1:
        raise InvalidConfig("scenario has zero duration")
    solver = replace(scenario.solver, seed=int(seed))
    noise_rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, 0x5EED])

    x_d = clamp_drone_state(scenario.initial_drone, scenario.limits)
    x_c = clamp_camera_state(scenario.initial_camera, scenario.limits)
    records: list[StepRecord] = []
    prev = None
    k = 0
    for si, (seq, n_steps) in enumerate(zip(scenario.sequences, counts)):
        ethics = scenario.ethics_for(seq)
        for _ in range(n_steps):
            t = k * sim.dt
            truth = scenario.animal.state_at(t)
            observed = truth
            if scenario.perception_noise > 0:
                observed = replace(truth, p_t=vec3(truth.p_t + noise_rng.normal(0, scenario.perception_noise, 3)))
            forecast = forecast_target(observed, sim.dt, sim.horizon)
            p = plan(x_d, x_c, observed, seq.objective, seq.weights, ethics, scenario.limits,
                     sim, solver, prev, forecast=forecast, step_index=k, sensor=scenario.sensor)
            u_d = clamp_drone_input(p.drone_inputs[0], scenario.limits)
            u_c = clamp_camera_input(p.camera_inputs[0], scenario.limits)
            x_d = clamp_drone_state(step_drone(x_d, u_d, sim.dt), scenario.limits)
            x_c = clamp_camera_state(step_camera(x_c, u_c, sim.dt), scenario.limits)
            after = scenario.animal.state_at(t + sim.dt)
            records.append(make_record(k, (k + 1) * sim.dt, si, x_d, x_c, after, u_d,
                                       seq.objective, seq.weights, ethics, scenario.sensor))
            prev = p
            k += 1
            if progress is not None:
                progress(k)
    return records, summarize(records)
