"""The two desk-scale experiments: a walking giraffe and a stationary tiger.

Thresholds, eye parameters and cost weights are the fixed experimental values.
Everything else (animal speed and size, start poses, sequence lengths,
framing targets) is an invented default and is marked as such below.
"""

from __future__ import annotations

import math

import numpy as np

from .camera import SPECIES_PRESETS, PixelPoint
from .core import CameraState, DroneState, EulerAngles, TargetState, vec3
from .costs import DRONE_SENSOR, E1_WEIGHTS, E2_WEIGHTS, EthicsParams, ShotObjective
from .harness import AnimalModel, Scenario, Sequence, Waypoint
from .plant import Limits, SimConfig
from .planner import SolverConfig

W, H = DRONE_SENSOR.W_px, DRONE_SENSOR.H_px
LEFT_THIRD = PixelPoint(W / 3.0, H / 2.0)
RIGHT_THIRD = PixelPoint(2.0 * W / 3.0, H / 2.0)
CENTER = PixelPoint(W / 2.0, H / 2.0)

# Camera orientation in the animal frame for the classic viewpoints.
BEHIND = EulerAngles(0.0, 0.0, 0.0)
RIGHT_SIDE = EulerAngles(0.0, 0.0, math.pi / 2)  # camera looks along the animal's +Y
FRONTAL = EulerAngles(0.0, 0.0, math.pi)

SEQUENCE_SECONDS = 20.0  # invented default


def _lateral_offset(u_star: float, f: float, d: float) -> float:
    """Sideways camera offset that puts the subject at column ``u_star`` with a level, aligned camera."""
    return (W / 2.0 - u_star) * d / (DRONE_SENSOR.beta_x * f)


def experiment1_preset() -> Scenario:
    ethics = EthicsParams(d_ac=20.0, d_sf=5.0)
    giraffe_span = 2.4  # m between the two subject keypoints (invented)
    extent = 350.0  # px (invented)
    close_up = 375.0  # px (invented)
    shot = dict(extent_star=extent, span=giraffe_span, extent_axis="v")
    sequences = (
        Sequence(SEQUENCE_SECONDS,
                 ShotObjective.from_angles(LEFT_THIRD, BEHIND, **shot),
                 E1_WEIGHTS, label="behind, rule of thirds"),
        Sequence(SEQUENCE_SECONDS,
                 ShotObjective.from_angles(RIGHT_THIRD, FRONTAL, **shot),
                 E1_WEIGHTS, label="frontal, rule of thirds"),
        Sequence(SEQUENCE_SECONDS,
                 ShotObjective.from_angles(CENTER, FRONTAL, extent_star=close_up,
                                           span=giraffe_span, extent_axis="v"),
                 E1_WEIGHTS, label="close-up by zoom"),
    )
    # Giraffe walks along +X at 0.8 m/s (invented); the drone starts 10 m
    # behind it, inside the acoustic perimeter, already framing the shot.
    z = 3.0
    speed = 0.8
    # At the end of the first sequence it turns round on the spot (a tight
    # half circle centred on the sequence boundary) to face the drone and
    # stands grazing for the rest of the run.
    radius = 0.25
    turn_x = speed * SEQUENCE_SECONDS - 0.5 * math.pi * radius
    arc = tuple(
        Waypoint((turn_x + radius * math.sin(th), -radius * (1.0 - math.cos(th)), z), speed)
        for th in np.linspace(0.0, math.pi, 9)
    )
    giraffe = AnimalModel(
        "waypoints",
        TargetState(vec3(0, 0, z), vec3(speed, 0, 0), EulerAngles()),
        arc,
    )
    d0 = 10.0
    f0 = extent * d0 / (DRONE_SENSOR.beta_x * giraffe_span)
    drone = DroneState(vec3(-d0, -_lateral_offset(LEFT_THIRD.u, f0, d0), z), vec3(speed, 0, 0), EulerAngles())
    return Scenario(
        name="e1",
        sim=SimConfig(dt=0.4, horizon=10),
        limits=Limits(f_max=90.0, v_max=4.0),  # a 15-90 mm zoom (invented)
        ethics=ethics,
        animal=giraffe,
        sequences=sequences,
        initial_drone=drone,
        initial_camera=CameraState(round(f0, 3)),
        solver=SolverConfig(refine_steps=60),
        perception_noise=0.05,
    )


def experiment2_preset() -> Scenario:
    eye = SPECIES_PRESETS["tiger"].intrinsics()
    ethics = EthicsParams(d_ac=20.0, d_sf=5.0, d_vis=12.0, eye=eye)
    tiger_width = 1.0  # m between shoulder keypoints (invented)
    # Near sequences leave the zoom free, so the framing can be held from
    # anywhere on a line of (offset, focal length) pairs; only some of them
    # lie outside the tiger's view. The last one asks for a fixed on-screen
    # width from beyond the visibility distance.
    high_frontal = EulerAngles(0.0, 0.25, math.pi)  # camera pitched 14 deg down (invented)
    sequences = (
        Sequence(SEQUENCE_SECONDS,
                 ShotObjective.from_angles(LEFT_THIRD, FRONTAL, d_star=10.0, use_d=True),
                 E2_WEIGHTS, label="frontal, rule of thirds"),
        Sequence(SEQUENCE_SECONDS,
                 ShotObjective.from_angles(LEFT_THIRD, high_frontal, d_star=10.0, use_d=True),
                 E2_WEIGHTS, label="high frontal"),
        Sequence(SEQUENCE_SECONDS,
                 ShotObjective.from_angles(LEFT_THIRD, FRONTAL, d_star=15.0, use_d=True,
                                           extent_star=160.0, span=tiger_width, extent_axis="u"),
                 E2_WEIGHTS, label="distant frontal"),
    )
    z = 0.8
    tiger = AnimalModel("stationary", TargetState(vec3(0, 0, z), vec3(0, 0, 0), EulerAngles()))
    # Start framed, facing the tiger (camera yaw pi, so its right is world +Y),
    # 1.6 m off the tiger's line of sight: inside its view, near the edge.
    d0, f0 = 10.0, 24.5  # invented
    drone = DroneState(vec3(d0, _lateral_offset(LEFT_THIRD.u, f0, d0), z), vec3(0, 0, 0),
                       EulerAngles(0.0, 0.0, math.pi))
    return Scenario(
        name="e2",
        sim=SimConfig(dt=0.2, horizon=10),
        limits=Limits(),
        ethics=ethics,
        animal=tiger,
        sequences=sequences,
        initial_drone=drone,
        initial_camera=CameraState(f0),
        solver=SolverConfig(),
    )


PRESETS = {"e1": experiment1_preset, "e2": experiment2_preset}
