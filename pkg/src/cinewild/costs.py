"""Stage cost terms: proximity, animal visibility, smoothness, framing, perspective."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .camera import (
    DEPTH_EPSILON,
    Intrinsics,
    PixelPoint,
    SPECIES_PRESETS,
    SensorSpec,
    in_image,
    project,
    relative_position_in_frame,
)
from .core import (
    CameraState,
    DroneState,
    EulerAngles,
    Rotation,
    TargetState,
    Vec3,
    distance,
    euler_to_rotation,
    relative_rotation,
    rotation_to_euler,
    value_eq,
)

# Filming camera sensor: 16:9, 960x540 px on a 23.5 mm wide chip.
DRONE_SENSOR = SensorSpec(960, 540, 23.5, 13.21875)

BEHIND_CAMERA_FACTOR = 1e6


@dataclass(frozen=True)
class EthicsParams:
    d_ac: float = 20.0
    d_sf: float = 5.0
    d_vis: float = 12.0
    w_ac: float = 0.1
    w_sf: float = 1.0
    eye: Intrinsics = field(default_factory=lambda: SPECIES_PRESETS["tiger"].intrinsics())

    def __post_init__(self):
        if not 0 < self.d_sf < self.d_ac:
            raise ValueError("need 0 < d_sf < d_ac")
        if not self.d_vis > 0:
            raise ValueError("d_vis must be positive")
        if self.w_ac < 0 or self.w_sf < 0:
            raise ValueError("w_ac and w_sf must be nonnegative")

    @property
    def c_m(self) -> float:
        # Value of the caution branch at d_sf; keeps the cost continuous there.
        return self.w_ac * (self.d_sf - self.d_ac) ** 2 + 1.0


@dataclass(frozen=True)
class CostWeights:
    w_prox: float = 0.0
    w_fov: float = 0.0
    w_soft: float = 0.0
    w_im: float = 0.0
    w_d: float = 0.0
    w_R: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = float(getattr(self, f.name))
            object.__setattr__(self, f.name, v)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{f.name} must be finite and nonnegative")


E1_WEIGHTS = CostWeights(w_prox=15, w_fov=0, w_soft=10, w_im=1, w_d=0, w_R=250)
E2_WEIGHTS = CostWeights(w_prox=0, w_fov=1, w_soft=0, w_im=0.5, w_d=10, w_R=100)


@dataclass(frozen=True)
class ShotObjective:
    """Desired framing and viewpoint for one sequence.

    ``R_star`` is the wanted orientation of the filming camera expressed in
    the animal's body frame, i.e. the value ``R_dt^T`` should take. Identity
    films the animal from behind, a yaw of pi films it head-on.

    With ``extent_star`` set, the subject is modelled by two keypoints
    ``span`` metres apart along the animal's body Z (``extent_axis="v"``) or
    body Y (``"u"``) axis; framing then also asks for their projected
    separation to equal ``extent_star`` pixels.
    """

    __eq__ = value_eq

    im_star: PixelPoint
    d_star: float = 0.0
    R_star: Rotation = field(default_factory=lambda: np.eye(3))
    use_d: bool = False
    use_R: bool = True
    extent_star: float | None = None
    span: float = 1.0
    extent_axis: str = "v"
    # Angles R_star was built from, kept so configs can store them verbatim.
    R_star_angles: EulerAngles | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        R = np.array(self.R_star, dtype=float).reshape(3, 3)
        R.flags.writeable = False
        object.__setattr__(self, "R_star", R)
        if self.extent_axis not in ("u", "v"):
            raise ValueError("extent_axis must be 'u' or 'v'")

    @classmethod
    def from_angles(cls, im_star: PixelPoint, rel: EulerAngles, **kw) -> ShotObjective:
        return cls(im_star=im_star, R_star=euler_to_rotation(rel), R_star_angles=rel, **kw)

    @property
    def angles(self) -> EulerAngles:
        """``R_star`` as Euler angles."""
        if self.R_star_angles is not None:
            return self.R_star_angles
        return rotation_to_euler(self.R_star)

    def keypoint_offsets(self) -> np.ndarray:
        """Subject keypoints in the animal body frame, shape (K, 3)."""
        if self.extent_star is None:
            return np.zeros((1, 3))
        h = self.span / 2.0
        if self.extent_axis == "v":
            return np.array([[0.0, 0.0, h], [0.0, 0.0, -h]])
        return np.array([[0.0, h, 0.0], [0.0, -h, 0.0]])


@dataclass(frozen=True)
class CostBreakdown:
    j_prox: float = 0.0
    j_fov: float = 0.0
    j_soft: float = 0.0
    j_im: float = 0.0
    j_p: float = 0.0

    @property
    def total(self) -> float:
        return self.j_prox + self.j_fov + self.j_soft + self.j_im + self.j_p

    def as_dict(self) -> dict:
        return {
            "j_prox": self.j_prox,
            "j_fov": self.j_fov,
            "j_soft": self.j_soft,
            "j_im": self.j_im,
            "j_p": self.j_p,
            "total": self.total,
        }


def j_prox(d_dt: float, e: EthicsParams, w_prox: float) -> float:
    """Three-zone proximity cost (respectful / caution / no-fly)."""
    if d_dt >= e.d_ac:
        return w_prox * math.exp(-0.5 * (d_dt - e.d_ac))
    if d_dt >= e.d_sf:
        return w_prox * (e.w_ac * (d_dt - e.d_ac) ** 2 + 1.0)
    return w_prox * (e.w_sf * (d_dt - e.d_sf) ** 2 + e.c_m)


def eye_pixel(drone: DroneState, target: TargetState, eye: Intrinsics) -> PixelPoint | None:
    """Where the drone appears in the animal's eye image, or None when behind it."""
    p_td = relative_position_in_frame(target.rotation, target.p_t, drone.p_d)
    if p_td[0] <= DEPTH_EPSILON:
        return None
    return project(eye, p_td)


def v_in(px: PixelPoint, eye: Intrinsics) -> float:
    d_max = math.hypot(eye.c_u, eye.c_v)
    d_hat = math.hypot(px.u - eye.c_u, px.v - eye.c_v) / d_max
    return math.exp(-d_hat * d_hat)


def v_out(px: PixelPoint, eye: Intrinsics) -> float:
    W, H = eye.sensor.W_px, eye.sensor.H_px
    return (
        max(0.0, px.u - W) ** 2
        + max(0.0, -px.u) ** 2
        + max(0.0, px.v - H) ** 2
        + max(0.0, -px.v) ** 2
    )


def j_fov(drone: DroneState, target: TargetState, e: EthicsParams, w_fov: float) -> float:
    d = distance(drone.p_d, target.p_t)
    if d >= e.d_vis:
        return 0.0
    px = eye_pixel(drone, target, e.eye)
    if px is None:
        # Behind the animal's head: maximally unseen.
        return 0.0
    if in_image(e.eye, px):
        return w_fov * v_in(px, e.eye)
    return w_fov * v_out(px, e.eye)


def j_soft(a_d: Vec3, w_soft: float) -> float:
    a = np.asarray(a_d, dtype=float)
    return w_soft * float(a @ a)


def j_im(im_t: PixelPoint, obj: ShotObjective, w_im: float) -> float:
    du = im_t.u - obj.im_star.u
    dv = im_t.v - obj.im_star.v
    return w_im * (du * du + dv * dv)


def j_p(d_dt: float, R_dt: Rotation, obj: ShotObjective, w_d: float, w_R: float) -> float:
    cost = 0.0
    if obj.use_d:
        cost += w_d * (d_dt - obj.d_star) ** 2
    if obj.use_R:
        cost += w_R * float(np.linalg.norm(R_dt.T - obj.R_star, "fro"))
    return cost


def subject_pixels(
    drone: DroneState, camera: CameraState, target: TargetState, obj: ShotObjective,
    sensor: SensorSpec = DRONE_SENSOR,
) -> list[PixelPoint] | None:
    """Projections of the subject keypoints in the filming camera; None if any is behind."""
    intr = Intrinsics(camera.f, sensor)
    R_d = drone.rotation
    R_t = target.rotation
    out = []
    for off in obj.keypoint_offsets():
        p_world = target.p_t + R_t @ off
        p_body = relative_position_in_frame(R_d, drone.p_d, p_world)
        if p_body[0] <= DEPTH_EPSILON:
            return None
        out.append(project(intr, p_body))
    return out


def framing_error(pixels: list[PixelPoint], obj: ShotObjective) -> tuple[float, float, float]:
    """(e_u, e_v, e_extent): centroid offset from ``im_star`` and span error in pixels."""
    pts = np.array([p.as_array() for p in pixels])
    c = pts.mean(axis=0)
    e_ext = 0.0
    if obj.extent_star is not None and len(pts) == 2:
        e_ext = float(np.linalg.norm(pts[0] - pts[1])) - obj.extent_star
    return float(c[0] - obj.im_star.u), float(c[1] - obj.im_star.v), e_ext


def j_im_subject(
    drone: DroneState, camera: CameraState, target: TargetState, obj: ShotObjective,
    w_im: float, sensor: SensorSpec = DRONE_SENSOR,
) -> float:
    if w_im == 0.0:
        return 0.0
    pixels = subject_pixels(drone, camera, target, obj, sensor)
    if pixels is None:
        return BEHIND_CAMERA_FACTOR * w_im
    eu, ev, eext = framing_error(pixels, obj)
    return w_im * (eu * eu + ev * ev + eext * eext)


def stage_cost(
    drone: DroneState,
    camera: CameraState,
    target: TargetState,
    input_d,
    obj: ShotObjective,
    weights: CostWeights,
    ethics: EthicsParams,
    sensor: SensorSpec = DRONE_SENSOR,
) -> CostBreakdown:
    d = distance(drone.p_d, target.p_t)
    R_dt = relative_rotation(drone.rotation, target.rotation)
    return CostBreakdown(
        j_prox=j_prox(d, ethics, weights.w_prox),
        j_fov=j_fov(drone, target, ethics, weights.w_fov),
        j_soft=j_soft(input_d.a_d, weights.w_soft),
        j_im=j_im_subject(drone, camera, target, obj, weights.w_im, sensor),
        j_p=j_p(d, R_dt, obj, weights.w_d, weights.w_R),
    )
