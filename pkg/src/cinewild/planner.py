"""Receding-horizon planner.

The horizon cost is minimised by cross-entropy sampling over the flattened
input sequence, followed by a bounded quasi-Newton (L-BFGS-B) polish on
finite-difference gradients. Batches go through :mod:`cinewild.kernels`; the per-step Python
path in :func:`rollout_cost` is the readable reference and is what the
returned ``Plan.predicted_cost`` comes from.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import kernels
from ._layout import IDX, N_CHANNELS, N_STATE, pack_params
from .costs import DRONE_SENSOR, CostBreakdown, CostWeights, EthicsParams, ShotObjective, stage_cost
from .core import CameraInput, CameraState, DroneInput, DroneState, TargetState, vec3
from .camera import SensorSpec
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


class InvalidConfig(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    n_samples: int = 256
    n_elites: int = 32
    n_iterations: int = 8
    # a_x, a_y, a_z [m/s^2], roll/pitch/yaw rates [rad/s], zoom rate [mm/s]
    init_stddev: tuple[float, ...] = (1.0, 1.0, 1.0, 0.2, 0.2, 0.2, 10.0)
    refine_steps: int = 20
    seed: int = 0
    fd_step: float = 1e-5
    min_stddev_fraction: float = 0.02
    # Rounds off the orientation norm during refinement only (see _refine).
    refine_R_smooth: float = 0.02

    def __post_init__(self):
        object.__setattr__(self, "init_stddev", tuple(float(s) for s in self.init_stddev))

    def validate(self) -> None:
        for name in ("n_samples", "n_elites", "n_iterations"):
            if int(getattr(self, name)) < 1:
                raise InvalidConfig(f"{name} must be >= 1")
        if self.n_elites > self.n_samples:
            raise InvalidConfig("n_elites must not exceed n_samples")
        if self.refine_steps < 0:
            raise InvalidConfig("refine_steps must be >= 0")
        if len(self.init_stddev) != N_CHANNELS or any(not s > 0 for s in self.init_stddev):
            raise InvalidConfig(f"init_stddev needs {N_CHANNELS} positive entries")
        if not self.fd_step > 0:
            raise InvalidConfig("fd_step must be positive")
        if not self.refine_R_smooth >= 0:
            raise InvalidConfig("refine_R_smooth must be >= 0")


@dataclass(frozen=True)
class Plan:
    drone_inputs: tuple[DroneInput, ...]
    camera_inputs: tuple[CameraInput, ...]
    predicted_cost: float
    breakdowns: tuple[CostBreakdown, ...]
    trace: dict = field(default_factory=dict, compare=False)

    def as_array(self) -> np.ndarray:
        return inputs_to_array(self.drone_inputs, self.camera_inputs)

    def shifted(self) -> np.ndarray:
        """Warm start for the next cycle: drop the first step, repeat the last."""
        U = self.as_array()
        return np.concatenate([U[1:], U[-1:]], axis=0)


def inputs_to_array(inputs_d, inputs_c) -> np.ndarray:
    U = np.empty((len(inputs_d), N_CHANNELS))
    for k, (ud, uc) in enumerate(zip(inputs_d, inputs_c)):
        U[k, 0:3] = ud.a_d
        U[k, 3:6] = ud.omega
        U[k, 6] = uc.v_f
    return U


def array_to_inputs(U) -> tuple[tuple[DroneInput, ...], tuple[CameraInput, ...]]:
    d = tuple(DroneInput(vec3(row[0:3]), vec3(row[3:6])) for row in U)
    c = tuple(CameraInput(float(row[6])) for row in U)
    return d, c


def project_inputs(U: np.ndarray, lim: Limits) -> np.ndarray:
    """Project any (..., 7) input array onto the input limits."""
    U = np.array(U, dtype=float, copy=True)
    a = U[..., 0:3]
    n = np.sqrt(np.sum(a * a, axis=-1, keepdims=True))
    scale = np.where(n > lim.a_max, lim.a_max / np.where(n > 0, n, 1.0), 1.0)
    U[..., 0:3] = a * scale
    U[..., 3:6] = np.clip(U[..., 3:6], -lim.omega_max, lim.omega_max)
    U[..., 6] = np.clip(U[..., 6], -lim.v_f_max, lim.v_f_max)
    return U


def rollout_cost(
    x_d: DroneState,
    x_c: CameraState,
    forecast,
    inputs_d,
    inputs_c,
    obj: ShotObjective,
    weights: CostWeights,
    ethics: EthicsParams,
    lim: Limits,
    dt: float,
    sensor: SensorSpec = DRONE_SENSOR,
) -> tuple[float, list[CostBreakdown]]:
    """Simulate the horizon with projection onto the limits and sum the stage costs.

    Stage ``k`` scores the state reached after applying input ``k`` against
    ``forecast[k]``, plus the smoothness term on that input.
    """
    if len(inputs_d) != len(inputs_c) or len(inputs_d) < 1:
        raise ValueError("input sequences must have equal length >= 1")
    if len(forecast) < len(inputs_d):
        raise ValueError("forecast shorter than the input sequence")
    xd = clamp_drone_state(x_d, lim)
    xc = clamp_camera_state(x_c, lim)
    total = 0.0
    out = []
    for k, (ud, uc) in enumerate(zip(inputs_d, inputs_c)):
        ud = clamp_drone_input(ud, lim)
        uc = clamp_camera_input(uc, lim)
        xd = clamp_drone_state(step_drone(xd, ud, dt), lim)
        xc = clamp_camera_state(step_camera(xc, uc, dt), lim)
        b = stage_cost(xd, xc, forecast[k], ud, obj, weights, ethics, sensor)
        out.append(b)
        total += b.total
    return total, out


class RolloutProblem:
    """One planning instance packed into the flat arrays the kernels consume."""

    def __init__(self, x_d, x_c, forecast, obj, weights, ethics, lim, dt,
                 sensor: SensorSpec = DRONE_SENSOR, backend: str | None = None,
                 R_smooth: float = 0.0):
        self.x_d, self.x_c, self.forecast = x_d, x_c, list(forecast)
        self.obj, self.weights, self.ethics, self.lim, self.dt = obj, weights, ethics, lim, dt
        self.sensor = sensor
        self.backend = backend
        xd = clamp_drone_state(x_d, lim)
        xc = clamp_camera_state(x_c, lim)
        x0 = np.empty(N_STATE)
        x0[0:3] = xd.p_d
        x0[3:6] = xd.v_d
        x0[6:9] = xd.gimbal.as_array()
        x0[9] = xc.f
        self.x0 = x0
        self.tgt_p = np.array([t.p_t for t in self.forecast])
        self.tgt_R = np.array([t.rotation for t in self.forecast])
        self.kp = obj.keypoint_offsets()
        self.params = pack_params(dt, weights, ethics, obj, lim, sensor, R_smooth)
        self.horizon = len(self.forecast)

    def smoothed(self, R_smooth: float) -> RolloutProblem:
        """Copy whose orientation term is rounded off by ``R_smooth``."""
        other = copy.copy(self)
        other.params = self.params.copy()
        other.params[IDX["R_smooth"]] = R_smooth
        return other

    def costs(self, U: np.ndarray) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        single = U.ndim == 2
        if single:
            U = U[None]
        c = kernels.batch_rollout(U, self.x0, self.tgt_p, self.tgt_R, self.kp, self.params,
                                  backend=self.backend)
        c = np.where(np.isfinite(c), c, np.inf)
        return c[0] if single else c

    def stages(self, U: np.ndarray) -> np.ndarray:
        _, st = kernels.batch_rollout(np.asarray(U, dtype=float)[None], self.x0, self.tgt_p,
                                      self.tgt_R, self.kp, self.params, want_stages=True,
                                      backend=self.backend)
        return st[0]

    def reference(self, U: np.ndarray) -> tuple[float, list[CostBreakdown]]:
        d, c = array_to_inputs(U)
        return rollout_cost(self.x_d, self.x_c, self.forecast, d, c, self.obj, self.weights,
                            self.ethics, self.lim, self.dt, self.sensor)


def finite_difference_gradient(problem: RolloutProblem, U: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of the horizon cost w.r.t. every input entry.

    Returns an array shaped like ``U``. All 2*N*7 perturbed rollouts go
    through one kernel batch.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    U = np.asarray(U, dtype=float)
    n = U.size
    flat = U.reshape(-1)
    batch = np.tile(flat, (2 * n, 1))
    idx = np.arange(n)
    batch[idx, idx] += h
    batch[n + idx, idx] -= h
    c = problem.costs(batch.reshape((2 * n,) + U.shape))
    return ((c[:n] - c[n:]) / (2.0 * h)).reshape(U.shape)


def _validate(sim: SimConfig, solver: SolverConfig):
    if int(sim.horizon) != sim.horizon or sim.horizon < 1:
        raise InvalidConfig("horizon must be an integer >= 1")
    if not sim.dt > 0:
        raise InvalidConfig("dt must be positive")
    solver.validate()


def _refine(problem: RolloutProblem, U: np.ndarray, cost: float, solver: SolverConfig,
            scale: np.ndarray, trace: list) -> tuple[np.ndarray, float]:
    """Bounded quasi-Newton polish in stddev-scaled coordinates.

    Gradients are central differences from one kernel batch. Acceleration is
    boxed per component here and projected back onto its ball afterwards.
    The orientation norm has a cone-shaped kink at the desired orientation,
    which stalls the line search exactly where a well-aimed camera sits, so
    the search runs on a copy with that kink rounded off. The candidate is
    then judged by the exact cost.
    """
    lim = problem.lim
    shape = U.shape
    hi = np.broadcast_to(
        np.array([lim.a_max] * 3 + [lim.omega_max] * 3 + [lim.v_f_max]), shape
    )
    bounds = list(zip((-hi / scale).ravel(), (hi / scale).ravel()))
    h = solver.fd_step
    smooth = problem.smoothed(solver.refine_R_smooth) if solver.refine_R_smooth > 0 else problem

    def fun(z):
        Uz = z.reshape(shape) * scale
        c = float(smooth.costs(Uz))
        g = finite_difference_gradient(smooth, Uz, h) * scale
        return c, g.ravel()

    z0 = np.clip((U / scale).ravel(), [b[0] for b in bounds], [b[1] for b in bounds])
    res = optimize.minimize(
        fun, z0, jac=True, method="L-BFGS-B", bounds=bounds,
        options={"maxiter": int(solver.refine_steps), "maxcor": 20},
    )
    cand = project_inputs(res.x.reshape(shape) * scale, lim)
    c = float(problem.costs(cand))
    trace.append(c)
    if c < cost:
        return cand, c
    return U, cost


def plan(
    x_d: DroneState,
    x_c: CameraState,
    target_now: TargetState,
    obj: ShotObjective,
    weights: CostWeights,
    ethics: EthicsParams,
    lim: Limits,
    sim: SimConfig,
    solver: SolverConfig,
    warm_start: Plan | np.ndarray | None = None,
    *,
    forecast=None,
    step_index: int = 0,
    sensor: SensorSpec = DRONE_SENSOR,
    backend: str | None = None,
) -> Plan:
    """Optimise drone and camera inputs over the horizon.

    Random draws come from ``(solver.seed, step_index, iteration)`` and are
    generated before any batch is evaluated, so the result does not depend
    on how many threads evaluate it.
    """
    _validate(sim, solver)
    N = int(sim.horizon)
    if forecast is None:
        forecast = forecast_target(target_now, sim.dt, N)
    problem = RolloutProblem(x_d, x_c, forecast[:N], obj, weights, ethics, lim, sim.dt, sensor, backend)

    scale = np.broadcast_to(np.array(solver.init_stddev), (N, N_CHANNELS)).copy()
    zero = np.zeros((N, N_CHANNELS))
    if warm_start is None:
        mean = zero.copy()
    else:
        ws = warm_start.shifted() if isinstance(warm_start, Plan) else np.asarray(warm_start, float)
        if ws.shape != (N, N_CHANNELS):
            raise InvalidConfig(f"warm start has shape {ws.shape}, expected {(N, N_CHANNELS)}")
        mean = project_inputs(ws, lim)
    std = scale.copy()
    std_floor = solver.min_stddev_fraction * scale

    best_U, best_cost = zero, float(problem.costs(zero))
    cem_trace = []
    S = int(solver.n_samples)
    for it in range(int(solver.n_iterations)):
        rng = np.random.default_rng([int(solver.seed) & 0xFFFFFFFFFFFFFFFF, int(step_index), it])
        eps = rng.standard_normal((S, N, N_CHANNELS))
        samples = project_inputs(mean[None] + std[None] * eps, lim)
        samples[0] = best_U
        if S > 1:
            samples[1] = mean
        costs = problem.costs(samples)
        order = np.argsort(costs, kind="stable")
        if costs[order[0]] < best_cost:
            best_cost = float(costs[order[0]])
            best_U = samples[order[0]].copy()
        cem_trace.append(best_cost)
        elites = samples[order[: int(solver.n_elites)]]
        mean = elites.mean(axis=0)
        std = np.maximum(elites.std(axis=0), std_floor)

    refine_trace = [best_cost]
    sampled_cost = best_cost
    if solver.refine_steps > 0:
        best_U, best_cost = _refine(problem, best_U, best_cost, solver, scale, refine_trace)

    best_U = project_inputs(best_U, lim)
    total, breakdowns = problem.reference(best_U)
    zero_total, zero_bd = problem.reference(zero)
    if zero_total <= total:
        best_U, total, breakdowns = zero, zero_total, zero_bd
    d, c = array_to_inputs(best_U)
    return Plan(
        drone_inputs=d,
        camera_inputs=c,
        predicted_cost=total,
        breakdowns=tuple(breakdowns),
        trace={
            "cem_best": cem_trace,
            "sampled_cost": sampled_cost,
            "refine": refine_trace,
            "zero_cost": zero_total,
            "backend": kernels.backend_name() if backend is None else backend,
        },
    )
