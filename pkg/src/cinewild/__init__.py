"""Wildlife-disturbance-aware model predictive control for drone cinematography."""

from .camera import Intrinsics, PixelPoint, SensorSpec, SPECIES_PRESETS, fov_degrees, project, visibility
from .core import (
    CameraInput,
    CameraState,
    DroneInput,
    DroneState,
    EulerAngles,
    TargetState,
    distance,
    euler_to_rotation,
    relative_rotation,
)
from .costs import CostBreakdown, CostWeights, EthicsParams, ShotObjective, stage_cost
from .harness import AnimalModel, RunSummary, Scenario, Sequence, StepRecord, Waypoint, baseline_mode, run
from .plant import Limits, SimConfig
from .planner import Plan, SolverConfig, plan, rollout_cost
from .presets import PRESETS

__version__ = "0.1.0"

__all__ = [
    "AnimalModel", "CameraInput", "CameraState", "CostBreakdown", "CostWeights", "DroneInput",
    "DroneState", "EthicsParams", "EulerAngles", "Intrinsics", "Limits", "PRESETS", "PixelPoint",
    "Plan", "RunSummary", "SPECIES_PRESETS", "Scenario", "SensorSpec", "Sequence", "ShotObjective",
    "SimConfig", "SolverConfig", "StepRecord", "TargetState", "Waypoint", "baseline_mode",
    "distance", "euler_to_rotation", "fov_degrees", "plan", "project", "relative_rotation",
    "rollout_cost", "run", "stage_cost", "visibility",
]
