"""Domain types and small 3-D geometry helpers.

Conventions
-----------
World frame is right-handed with Z up. Drone, gimbal and animal body frames
use X forward, Y left, Z up. Orientation angles compose as
``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``, so a positive pitch tilts the
forward axis downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np
from numpy.typing import NDArray

Vec3 = NDArray[np.float64]
Rotation = NDArray[np.float64]


def vec3(x, y=None, z=None) -> Vec3:
    """Build a read-only float vector of length 3 and check it is finite."""
    if y is None and z is None:
        arr = np.array(x, dtype=float).reshape(3)
    else:
        arr = np.array([x, y, z], dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"non-finite vector: {arr}")
    arr.flags.writeable = False
    return arr


def wrap_angle(a: float) -> float:
    """Map an angle into (-pi, pi]."""
    w = math.remainder(a, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class EulerAngles:
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        for name in ("roll", "pitch", "yaw"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, wrap_angle(v))

    def as_array(self) -> NDArray[np.float64]:
        return np.array([self.roll, self.pitch, self.yaw])

    @classmethod
    def from_array(cls, a) -> EulerAngles:
        return cls(float(a[0]), float(a[1]), float(a[2]))


def value_eq(a, b) -> bool:
    """Field-wise equality for frozen dataclasses that hold numpy arrays."""
    if a is b:
        return True
    if type(a) is not type(b):
        return NotImplemented
    for f in fields(a):
        if not f.compare:
            continue
        x, y = getattr(a, f.name), getattr(b, f.name)
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            if not np.array_equal(x, y):
                return False
        elif x != y:
            return False
    return True


def _frozen(v) -> Vec3:
    return v if isinstance(v, np.ndarray) and not v.flags.writeable else vec3(v)


@dataclass(frozen=True)
class DroneState:
    """Drone position/velocity and gimbal orientation (camera extrinsics)."""

    __eq__ = value_eq

    p_d: Vec3
    v_d: Vec3 = field(default_factory=lambda: vec3(0, 0, 0))
    gimbal: EulerAngles = field(default_factory=EulerAngles)

    def __post_init__(self):
        object.__setattr__(self, "p_d", _frozen(self.p_d))
        object.__setattr__(self, "v_d", _frozen(self.v_d))

    @property
    def rotation(self) -> Rotation:
        return euler_to_rotation(self.gimbal)


@dataclass(frozen=True)
class CameraState:
    f: float  # mm

    def __post_init__(self):
        if not math.isfinite(self.f):
            raise ValueError("focal length must be finite")


@dataclass(frozen=True)
class TargetState:
    __eq__ = value_eq

    p_t: Vec3
    v_t: Vec3 = field(default_factory=lambda: vec3(0, 0, 0))
    heading: EulerAngles = field(default_factory=EulerAngles)

    def __post_init__(self):
        object.__setattr__(self, "p_t", _frozen(self.p_t))
        object.__setattr__(self, "v_t", _frozen(self.v_t))

    @property
    def rotation(self) -> Rotation:
        return euler_to_rotation(self.heading)


@dataclass(frozen=True)
class DroneInput:
    __eq__ = value_eq

    a_d: Vec3 = field(default_factory=lambda: vec3(0, 0, 0))
    omega: Vec3 = field(default_factory=lambda: vec3(0, 0, 0))  # roll/pitch/yaw rates

    def __post_init__(self):
        object.__setattr__(self, "a_d", _frozen(self.a_d))
        object.__setattr__(self, "omega", _frozen(self.omega))


@dataclass(frozen=True)
class CameraInput:
    v_f: float = 0.0  # mm/s


def rot_x(a: float) -> Rotation:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(a: float) -> Rotation:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(a: float) -> Rotation:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def euler_to_rotation(e: EulerAngles) -> Rotation:
    """Rotation matrix ``Rz(yaw) Ry(pitch) Rx(roll)`` written out in closed form."""
    cr, sr = math.cos(e.roll), math.sin(e.roll)
    cp, sp = math.cos(e.pitch), math.sin(e.pitch)
    cy, sy = math.cos(e.yaw), math.sin(e.yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def rotation_to_euler(R: Rotation) -> EulerAngles:
    """Inverse of :func:`euler_to_rotation` away from pitch = +-pi/2."""
    pitch = math.asin(max(-1.0, min(1.0, -R[2, 0])))
    roll = math.atan2(R[2, 1], R[2, 2])
    yaw = math.atan2(R[1, 0], R[0, 0])
    return EulerAngles(roll, pitch, yaw)


def relative_rotation(R_d: Rotation, R_t: Rotation) -> Rotation:
    """Orientation of the target expressed in the drone camera frame, ``R_d^T R_t``."""
    return R_d.T @ R_t


def distance(p_d: Vec3, p_t: Vec3) -> float:
    return float(np.linalg.norm(np.asarray(p_d, dtype=float) - np.asarray(p_t, dtype=float)))


def yaw_of(R: Rotation) -> float:
    return math.atan2(R[1, 0], R[0, 0])
