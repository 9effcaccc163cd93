"""JSON scenario files.

A saved file lists every field, defaults included, so it describes the run
on its own. Loading is strict: unknown keys and wrongly typed values are
reported with the dotted path of the offending field (and the line and
column for JSON syntax errors).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any, Callable

from .camera import Intrinsics, PixelPoint, SensorSpec
from .core import CameraState, DroneState, EulerAngles, TargetState
from .costs import CostWeights, EthicsParams, ShotObjective
from .harness import AnimalModel, Scenario, Sequence, Waypoint
from .plant import Limits, SimConfig
from .planner import SolverConfig

FORMAT_VERSION = 1


class ConfigError(ValueError):
    """Invalid scenario document. ``path`` names the offending field."""

    def __init__(self, path: str, message: str, line: int | None = None, column: int | None = None):
        self.path, self.message, self.line, self.column = path, message, line, column
        where = path or "<document>"
        if line is not None:
            where = f"line {line}, column {column}"
        super().__init__(f"{where}: {message}")


# --- reading helpers -----------------------------------------------------------

def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def _mapping(data, path: str, allowed) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(_join(path, unknown[0]), "unknown field")
    return data


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(path, f"expected a number, got {type(v).__name__}")
    if not math.isfinite(v):
        raise ConfigError(path, "expected a finite number")
    return float(v)


def _integer(v, path: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {type(v).__name__}")
    return int(v)


def _boolean(v, path: str) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(path, f"expected true or false, got {type(v).__name__}")
    return v


def _string(v, path: str) -> str:
    if not isinstance(v, str):
        raise ConfigError(path, f"expected a string, got {type(v).__name__}")
    return v


def _numbers(n: int | None) -> Callable:
    def conv(v, path):
        if not isinstance(v, list):
            raise ConfigError(path, f"expected a list of numbers, got {type(v).__name__}")
        if n is not None and len(v) != n:
            raise ConfigError(path, f"expected {n} numbers, got {len(v)}")
        return tuple(_number(x, _join(path, i)) for i, x in enumerate(v))
    return conv


def _optional(conv: Callable) -> Callable:
    return lambda v, path: None if v is None else conv(v, path)


def _construct(cls, kwargs: dict, path: str):
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


def _record(cls, data, path: str, conv: dict[str, Callable] | None = None,
            skip: tuple[str, ...] = ()):
    """Build dataclass ``cls`` from ``data``; absent fields take their defaults.

    Fields without an entry in ``conv`` are plain numbers.
    """
    conv = conv or {}
    names = [f.name for f in fields(cls) if f.name not in skip]
    _mapping(data, path, names)
    kwargs = {}
    for name in names:
        if name in data:
            kwargs[name] = conv.get(name, _number)(data[name], _join(path, name))
    return _construct(cls, kwargs, path)


def _required(data: dict, key: str, path: str):
    if key not in data:
        raise ConfigError(_join(path, key), "missing required field")
    return data[key]


# --- per-type readers ------------------------------------------------------------

def _euler(v, path):
    return _record(EulerAngles, v, path)


def _pixel(v, path):
    _mapping(v, path, ("u", "v"))
    return PixelPoint(_number(_required(v, "u", path), _join(path, "u")),
                      _number(_required(v, "v", path), _join(path, "v")))


def _sensor(v, path):
    _mapping(v, path, ("W_px", "H_px", "W_mm", "H_mm"))
    kw = {k: _number(_required(v, k, path), _join(path, k)) for k in ("W_px", "H_px", "W_mm", "H_mm")}
    return _construct(SensorSpec, kw, path)


def _intrinsics(v, path):
    _mapping(v, path, ("f", "sensor", "c_u", "c_v", "s"))
    kw = {"f": _number(_required(v, "f", path), _join(path, "f")),
          "sensor": _sensor(_required(v, "sensor", path), _join(path, "sensor"))}
    for k in ("c_u", "c_v", "s"):
        if k in v:
            kw[k] = _optional(_number)(v[k], _join(path, k))
    return _construct(Intrinsics, kw, path)


def _ethics(v, path):
    return _record(EthicsParams, v, path, {"eye": _intrinsics})


def _weights(v, path):
    return _record(CostWeights, v, path)


def _objective(v, path):
    names = ("im_star", "d_star", "R_star", "use_d", "use_R", "extent_star", "span", "extent_axis")
    _mapping(v, path, names)
    im = _pixel(_required(v, "im_star", path), _join(path, "im_star"))
    angles = _euler(v.get("R_star", {}), _join(path, "R_star"))
    conv = {"d_star": _number, "use_d": _boolean, "use_R": _boolean,
            "extent_star": _optional(_number), "span": _number, "extent_axis": _string}
    kw = {k: conv[k](v[k], _join(path, k)) for k in conv if k in v}
    try:
        return ShotObjective.from_angles(im, angles, **kw)
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from None


def _ethics_overrides(v, path):
    if v is None:
        return None
    scalar = [f.name for f in fields(EthicsParams) if f.name != "eye"]
    _mapping(v, path, scalar)
    return {k: _number(x, _join(path, k)) for k, x in v.items()}


def _sequence(v, path):
    _mapping(v, path, ("duration", "objective", "weights", "ethics_overrides", "label"))
    kw = {
        "duration": _number(_required(v, "duration", path), _join(path, "duration")),
        "objective": _objective(_required(v, "objective", path), _join(path, "objective")),
        "weights": _weights(_required(v, "weights", path), _join(path, "weights")),
    }
    if "ethics_overrides" in v:
        kw["ethics_overrides"] = _ethics_overrides(v["ethics_overrides"], _join(path, "ethics_overrides"))
    if "label" in v:
        kw["label"] = _string(v["label"], _join(path, "label"))
    return _construct(Sequence, kw, path)


def _vec(v, path):
    return _numbers(3)(v, path)


def _target(v, path):
    return _record(TargetState, v, path, {"p_t": _vec, "v_t": _vec, "heading": _euler})


def _waypoint(v, path):
    return _record(Waypoint, v, path, {"p": _vec})


def _list(conv):
    def read(v, path):
        if not isinstance(v, list):
            raise ConfigError(path, f"expected a list, got {type(v).__name__}")
        return tuple(conv(x, _join(path, i)) for i, x in enumerate(v))
    return read


def _animal(v, path):
    return _record(AnimalModel, v, path,
                   {"kind": _string, "initial": _target, "waypoints": _list(_waypoint)})


def _drone(v, path):
    return _record(DroneState, v, path, {"p_d": _vec, "v_d": _vec, "gimbal": _euler})


def _camera(v, path):
    return _record(CameraState, v, path)


def _sim(v, path):
    return _record(SimConfig, v, path, {"horizon": _integer})


def _limits(v, path):
    return _record(Limits, v, path, {"gimbal_pitch_range": _numbers(2)})


def _solver(v, path):
    ints = {k: _integer for k in ("n_samples", "n_elites", "n_iterations", "refine_steps", "seed")}
    return _record(SolverConfig, v, path, {**ints, "init_stddev": _numbers(None)})


_SCENARIO_READERS: dict[str, Callable] = {
    "name": _string,
    "sim": _sim,
    "limits": _limits,
    "ethics": _ethics,
    "animal": _animal,
    "sequences": _list(_sequence),
    "initial_drone": _drone,
    "initial_camera": _camera,
    "mode": _string,
    "solver": _solver,
    "sensor": _sensor,
    "perception_noise": _number,
}
_REQUIRED = ("name", "animal", "sequences", "initial_drone", "initial_camera")


def scenario_from_dict(data: Any) -> Scenario:
    """Validate a parsed document and build the scenario it describes."""
    _mapping(data, "", ("format_version",) + tuple(_SCENARIO_READERS))
    version = data.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ConfigError("format_version", f"unsupported version {version!r}")
    kw = {k: read(data[k], k) for k, read in _SCENARIO_READERS.items() if k in data}
    for key in _REQUIRED:
        _required(data, key, "")
    kw.setdefault("sim", SimConfig())
    kw.setdefault("limits", Limits())
    kw.setdefault("ethics", EthicsParams())
    if "solver" in kw:
        try:
            kw["solver"].validate()
        except ValueError as exc:
            raise ConfigError("solver", str(exc)) from None
    return _construct(Scenario, kw, "")


# --- writing -------------------------------------------------------------------

def _plain(x):
    """Convert numpy scalars and arrays inside ``x`` to JSON types."""
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if hasattr(x, "tolist"):
        return x.tolist()
    return x


def _objective_dict(o: ShotObjective) -> dict:
    return {
        "im_star": {"u": o.im_star.u, "v": o.im_star.v},
        "d_star": o.d_star,
        "R_star": asdict(o.angles),
        "use_d": o.use_d,
        "use_R": o.use_R,
        "extent_star": o.extent_star,
        "span": o.span,
        "extent_axis": o.extent_axis,
    }


def scenario_to_dict(sc: Scenario) -> dict:
    """Every field of the scenario, defaults included, as JSON-ready data."""
    seqs = [
        {
            "duration": s.duration,
            "objective": _objective_dict(s.objective),
            "weights": asdict(s.weights),
            "ethics_overrides": dict(s.ethics_overrides) if s.ethics_overrides else None,
            "label": s.label,
        }
        for s in sc.sequences
    ]
    return _plain({
        "format_version": FORMAT_VERSION,
        "name": sc.name,
        "mode": sc.mode,
        "sim": asdict(sc.sim),
        "limits": asdict(sc.limits),
        "ethics": asdict(sc.ethics),
        "sensor": asdict(sc.sensor),
        "animal": {
            "kind": sc.animal.kind,
            "initial": asdict(sc.animal.initial),
            "waypoints": [asdict(w) for w in sc.animal.waypoints],
        },
        "sequences": seqs,
        "initial_drone": asdict(sc.initial_drone),
        "initial_camera": asdict(sc.initial_camera),
        "solver": asdict(sc.solver),
        "perception_noise": sc.perception_noise,
    })


def dumps(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2) + "\n"


def loads(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", exc.msg, exc.lineno, exc.colno) from None
    return scenario_from_dict(data)


def load_scenario(path: str | os.PathLike) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def save_scenario(sc: Scenario, path: str | os.PathLike) -> None:
    atomic_write_text(path, dumps(sc))
