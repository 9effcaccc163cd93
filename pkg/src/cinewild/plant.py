"""Discrete-time kinematics for drone, gimbal, zoom lens and animal."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    CameraInput,
    CameraState,
    DroneInput,
    DroneState,
    EulerAngles,
    TargetState,
    vec3,
)


@dataclass(frozen=True)
class Limits:
    v_max: float = 10.0
    a_max: float = 5.0
    omega_max: float = 1.5
    # Positive pitch looks down (see core): up to 90 deg down, 30 deg up.
    gimbal_pitch_range: tuple[float, float] = (-math.pi / 6, math.pi / 2)
    f_min: float = 15.0
    f_max: float = 300.0
    v_f_max: float = 60.0
    world_z_min: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "gimbal_pitch_range", tuple(float(x) for x in self.gimbal_pitch_range))
        for name in ("v_max", "a_max", "omega_max", "f_min", "v_f_max"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.f_min < self.f_max:
            raise ValueError("need f_min < f_max")
        lo, hi = self.gimbal_pitch_range
        if not lo < hi:
            raise ValueError("empty gimbal pitch range")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.2
    horizon: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ValueError("horizon must be an integer >= 1")


def step_drone(x: DroneState, u: DroneInput, dt: float) -> DroneState:
    """Explicit Euler: position advances with the pre-update velocity."""
    g = x.gimbal.as_array() + dt * np.asarray(u.omega)
    return DroneState(
        p_d=x.p_d + dt * x.v_d,
        v_d=x.v_d + dt * u.a_d,
        gimbal=EulerAngles.from_array(g),
    )


def step_camera(x: CameraState, u: CameraInput, dt: float) -> CameraState:
    return CameraState(x.f + dt * u.v_f)


def _cap_norm(v: np.ndarray, cap: float) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n > cap:
        return v * (cap / n)
    return v


def clamp_drone_input(u: DroneInput, lim: Limits) -> DroneInput:
    return DroneInput(
        a_d=vec3(_cap_norm(np.asarray(u.a_d, dtype=float), lim.a_max)),
        omega=vec3(np.clip(u.omega, -lim.omega_max, lim.omega_max)),
    )


def clamp_camera_input(u: CameraInput, lim: Limits) -> CameraInput:
    return CameraInput(min(max(u.v_f, -lim.v_f_max), lim.v_f_max))


def clamp_drone_state(x: DroneState, lim: Limits) -> DroneState:
    p = np.array(x.p_d, dtype=float)
    p[2] = max(p[2], lim.world_z_min)
    lo, hi = lim.gimbal_pitch_range
    g = x.gimbal
    return DroneState(
        p_d=vec3(p),
        v_d=vec3(_cap_norm(np.asarray(x.v_d, dtype=float), lim.v_max)),
        gimbal=EulerAngles(g.roll, min(max(g.pitch, lo), hi), g.yaw),
    )


def clamp_camera_state(x: CameraState, lim: Limits) -> CameraState:
    return CameraState(min(max(x.f, lim.f_min), lim.f_max))


def clamp_to_limits(
    x_d: DroneState, x_c: CameraState, u_d: DroneInput, u_c: CameraInput, lim: Limits
) -> tuple[DroneState, CameraState, DroneInput, CameraInput]:
    """Project states and inputs onto the feasible boxes/balls."""
    return (
        clamp_drone_state(x_d, lim),
        clamp_camera_state(x_c, lim),
        clamp_drone_input(u_d, lim),
        clamp_camera_input(u_c, lim),
    )


def forecast_target(t0: TargetState, dt: float, n: int) -> list[TargetState]:
    """Constant-velocity prediction of the next ``n`` animal states (excludes ``t0``)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [
        TargetState(p_t=t0.p_t + (j * dt) * t0.v_t, v_t=t0.v_t, heading=t0.heading)
        for j in range(1, n + 1)
    ]
