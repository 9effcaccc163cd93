"""Pinhole projection shared by the drone camera and the animal eye model.

Body frames are X forward, Y left, Z up. The optical frame used for
projection is Z forward, X right, Y down::

    optical = (-body_y, -body_z, body_x)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Rotation, Vec3

DEPTH_EPSILON = 1e-6


class NonPositiveDepth(ValueError):
    """Raised when a point lies at or behind the image plane."""


@dataclass(frozen=True)
class SensorSpec:
    W_px: float
    H_px: float
    W_mm: float
    H_mm: float

    def __post_init__(self):
        for name in ("W_px", "H_px", "W_mm", "H_mm"):
            object.__setattr__(self, name, float(getattr(self, name)))
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def beta_x(self) -> float:
        return self.W_px / self.W_mm

    @property
    def beta_y(self) -> float:
        return self.H_px / self.H_mm

    def swapped_mm(self) -> SensorSpec:
        """Same pixel grid with the millimetre dimensions exchanged."""
        return SensorSpec(self.W_px, self.H_px, self.H_mm, self.W_mm)


@dataclass(frozen=True)
class Intrinsics:
    f: float
    sensor: SensorSpec
    c_u: float | None = None
    c_v: float | None = None
    s: float = 0.0

    def __post_init__(self):
        if not self.f > 0:
            raise ValueError("focal length must be positive")
        if self.c_u is None:
            object.__setattr__(self, "c_u", self.sensor.W_px / 2.0)
        if self.c_v is None:
            object.__setattr__(self, "c_v", self.sensor.H_px / 2.0)

    @property
    def fx(self) -> float:
        return self.sensor.beta_x * self.f

    @property
    def fy(self) -> float:
        return self.sensor.beta_y * self.f

    def matrix(self) -> np.ndarray:
        """3x3 calibration matrix."""
        return np.array(
            [[self.fx, self.s, self.c_u], [0.0, self.fy, self.c_v], [0.0, 0.0, 1.0]]
        )

    def with_focal(self, f: float) -> Intrinsics:
        return replace(self, f=f)


@dataclass(frozen=True)
class PixelPoint:
    u: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v])


# Body axes -> optical axes.
BODY_TO_OPTICAL = np.array([[0.0, -1.0, 0.0], [0.0, 0.0, -1.0], [1.0, 0.0, 0.0]])


def relative_position_in_frame(R_frame: Rotation, p_origin: Vec3, p_point: Vec3) -> Vec3:
    """Coordinates of ``p_point`` in the body frame located at ``p_origin``."""
    return R_frame.T @ (np.asarray(p_point, dtype=float) - np.asarray(p_origin, dtype=float))


def project(intr: Intrinsics, p_body: Vec3) -> PixelPoint:
    x, y, z = (float(c) for c in p_body)
    if x <= DEPTH_EPSILON:
        raise NonPositiveDepth(f"forward depth {x} <= {DEPTH_EPSILON}")
    xo, yo = -y / x, -z / x
    return PixelPoint(intr.fx * xo + intr.s * yo + intr.c_u, intr.fy * yo + intr.c_v)


def back_project(intr: Intrinsics, px: PixelPoint, depth: float = 1.0) -> Vec3:
    """Body-frame point at forward ``depth`` that projects onto ``px``."""
    yo = (px.v - intr.c_v) / intr.fy
    xo = (px.u - intr.c_u - intr.s * yo) / intr.fx
    return np.array([depth, -xo * depth, -yo * depth])


def fov_degrees(intr: Intrinsics) -> tuple[float, float]:
    """Horizontal and vertical field of view. Despite the name, values are radians."""
    fov_x = 2.0 * math.atan(intr.sensor.W_mm / (2.0 * intr.f))
    fov_y = 2.0 * math.atan(intr.sensor.H_mm / (2.0 * intr.f))
    return fov_x, fov_y


def in_image(intr: Intrinsics, px: PixelPoint) -> bool:
    return 0.0 <= px.u <= intr.sensor.W_px and 0.0 <= px.v <= intr.sensor.H_px


def visibility(intr: Intrinsics, p_td: Vec3, d_dt: float, d_vis: float) -> bool:
    """True when the point is in front, inside the image, and closer than ``d_vis``."""
    if not d_dt < d_vis:
        return False
    if p_td[0] <= DEPTH_EPSILON:
        return False
    return in_image(intr, project(intr, p_td))


# Eye models as (sensor, focal length) pairs. Only the tiger eye uses
# measured values; the other presets are illustrative defaults.
@dataclass(frozen=True)
class SpeciesPreset:
    name: str
    sensor: SensorSpec
    f: float
    notes: str = field(default="", compare=False)

    def intrinsics(self) -> Intrinsics:
        return Intrinsics(self.f, self.sensor)


SPECIES_PRESETS = {
    "tiger": SpeciesPreset("tiger", SensorSpec(960, 540, 13.365, 23.76), 35.0, "experiment 2 eye"),
    "forward_facing": SpeciesPreset(
        "forward_facing", SensorSpec(960, 540, 36.0, 20.25), 18.0, "default, ~90 deg horizontal"
    ),
    "lateral": SpeciesPreset(
        "lateral", SensorSpec(960, 540, 36.0, 20.25), 5.0, "default, ~149 deg horizontal"
    ),
    "stereoscopic": SpeciesPreset(
        "stereoscopic", SensorSpec(960, 540, 36.0, 20.25), 35.0, "default, ~54 deg horizontal"
    ),
}
