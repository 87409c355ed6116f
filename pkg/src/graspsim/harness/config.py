"""Scenario configuration: JSON schema, defaults, and validation.

A scenario is one JSON document. All quantities are SI unless the optional
"units" field says "per_cm3", in which case the volume gains g1/g2 are given
per cubic centimeter of overlap and are scaled by 1e6 to per-m^3 at load
time. Validation is collecting: `load_config` reports every violation it can
find in one ConfigError instead of stopping at the first.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..contact import ContactParams, FrictionParams
from ..dynamics import BodyKind

_KINDS = {
    "static": BodyKind.STATIC,
    "dynamic": BodyKind.DYNAMIC,
    "prismatic": BodyKind.PRISMATIC,
    "kinematic": BodyKind.KINEMATIC,
}
_DIRECTION_MODES = ("face_normal", "centroid")
_UNITS = ("si", "per_cm3")

_TOP_KEYS = {
    "name",
    "units",
    "gravity",
    "duration",
    "output_step",
    "h_max",
    "rel_tol",
    "abs_tol",
    "seed",
    "direction_mode",
    "freeze_geometry",
    "contact",
    "friction",
    "bodies",
    "energy_reference",
    "sweep",
}
_BODY_KEYS = {
    "name",
    "shape",
    "mass",
    "position",
    "quaternion",
    "lin_vel",
    "ang_vel",
    "kind",
    "axis",
    "applied_force",
    "trajectory",
}
_TRAJ_KEYS = {"origin", "axis", "amplitude", "frequency", "phase"}


class ConfigError(ValueError):
    """Carries the complete list of schema violations."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("\n".join(self.errors))


@dataclass
class TrajectorySpec:
    axis: np.ndarray
    amplitude: float
    frequency: float
    phase: float = 0.0
    origin: np.ndarray | None = None  # None: derived from the body position


@dataclass
class BodySpec:
    name: str
    shape: dict
    mass: float
    position: np.ndarray
    quaternion: np.ndarray
    lin_vel: np.ndarray
    ang_vel: np.ndarray
    kind: BodyKind
    axis: np.ndarray | None = None
    applied_force: np.ndarray | None = None
    trajectory: TrajectorySpec | None = None


@dataclass
class ScenarioConfig:
    name: str
    bodies: list
    contact: ContactParams = field(default_factory=ContactParams)
    friction: FrictionParams = field(default_factory=FrictionParams)
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    duration: float = 1.0
    output_step: float = 1e-3
    h_max: float = 1e-3
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    seed: int = 0
    direction_mode: str = "face_normal"
    freeze_geometry: bool = False
    energy_reference: tuple | None = None  # (body name, kinematic body name)
    sweep: dict = field(default_factory=dict)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _num(raw, key, errors, default=None, minimum=None, exclusive=False):
    if key not in raw:
        return default
    x = raw[key]
    if not _is_num(x) or not math.isfinite(x):
        errors.append(f"{key} must be a finite number")
        return default
    if minimum is not None and (x <= minimum if exclusive else x < minimum):
        op = ">" if exclusive else ">="
        errors.append(f"{key} must be {op} {minimum}")
        return default
    return float(x)


def _vec3(raw, key, errors, ctx="", default=None):
    if key not in raw:
        return default
    x = raw[key]
    label = f"{ctx}{key}"
    if (
        not isinstance(x, (list, tuple))
        or len(x) != 3
        or not all(_is_num(c) and math.isfinite(c) for c in x)
    ):
        errors.append(f"{label} must be a list of 3 finite numbers")
        return default
    return np.array(x, dtype=float)


def _parse_shape(raw, ctx, base_dir, errors):
    if not isinstance(raw, dict):
        errors.append(f"{ctx}.shape must be an object")
        return None
    kind = raw.get("type")
    if kind == "cuboid":
        extra = set(raw) - {"type", "extents"}
        if extra:
            errors.append(f"{ctx}.shape: unknown key '{sorted(extra)[0]}'")
        ext = _vec3(raw, "extents", errors, ctx=f"{ctx}.shape.")
        if ext is None:
            if "extents" not in raw:
                errors.append(f"{ctx}.shape.extents is required for cuboid")
            return None
        if np.any(ext <= 0.0):
            errors.append(f"{ctx}.shape.extents must be > 0")
            return None
        return {"type": "cuboid", "extents": ext}
    if kind == "icosphere":
        extra = set(raw) - {"type", "radius", "subdivisions"}
        if extra:
            errors.append(f"{ctx}.shape: unknown key '{sorted(extra)[0]}'")
        r = _num(raw, "radius", errors, minimum=0.0, exclusive=True)
        if r is None:
            errors.append(f"{ctx}.shape.radius must be a number > 0")
            return None
        sub = raw.get("subdivisions", 2)
        if not isinstance(sub, int) or isinstance(sub, bool) or not 0 <= sub <= 5:
            errors.append(f"{ctx}.shape.subdivisions must be an integer in [0, 5]")
            return None
        return {"type": "icosphere", "radius": r, "subdivisions": sub}
    if kind == "obj":
        extra = set(raw) - {"type", "path"}
        if extra:
            errors.append(f"{ctx}.shape: unknown key '{sorted(extra)[0]}'")
        path = raw.get("path")
        if not isinstance(path, str):
            errors.append(f"{ctx}.shape.path must be a string")
            return None
        resolved = path if os.path.isabs(path) else os.path.join(base_dir, path)
        if not os.path.isfile(resolved):
            errors.append(f"{ctx}.shape.path: mesh file not found: {path}")
            return None
        return {"type": "obj", "path": resolved}
    errors.append(f"{ctx}.shape.type must be one of cuboid/icosphere/obj")
    return None


def _parse_trajectory(raw, ctx, errors):
    if not isinstance(raw, dict):
        errors.append(f"{ctx}.trajectory must be an object")
        return None
    for k in raw:
        if k not in _TRAJ_KEYS:
            errors.append(f"{ctx}.trajectory: unknown key '{k}'")
    axis = _vec3(raw, "axis", errors, ctx=f"{ctx}.trajectory.")
    if axis is None or np.linalg.norm(axis) < 1e-12:
        errors.append(f"{ctx}.trajectory.axis must be a nonzero 3-vector")
        return None
    amp = _num(raw, "amplitude", errors, minimum=0.0)
    freq = _num(raw, "frequency", errors, minimum=0.0)
    if amp is None or freq is None:
        errors.append(f"{ctx}.trajectory requires amplitude and frequency")
        return None
    phase = _num(raw, "phase", errors, default=0.0)
    origin = _vec3(raw, "origin", errors, ctx=f"{ctx}.trajectory.")
    return TrajectorySpec(axis=axis, amplitude=amp, frequency=freq, phase=phase, origin=origin)


def _parse_body(raw, idx, base_dir, errors):
    ctx = f"bodies[{idx}]"
    if not isinstance(raw, dict):
        errors.append(f"{ctx} must be an object")
        return None
    for k in raw:
        if k not in _BODY_KEYS:
            errors.append(f"{ctx}: unknown key '{k}'")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        errors.append(f"{ctx}.name must be a non-empty string")
        name = f"body{idx}"
    ctx = f"bodies[{idx}]({name})"
    shape = None
    if "shape" not in raw:
        errors.append(f"{ctx}.shape is required")
    else:
        shape = _parse_shape(raw["shape"], ctx, base_dir, errors)
    # every failure mode (missing, wrong type, non-positive) collapses into
    # the one contextual message below, so _num's own report is discarded
    mass = _num(raw, "mass", [], minimum=0.0, exclusive=True)
    if mass is None:
        errors.append(f"{ctx}.mass must be a number > 0")
    position = _vec3(raw, "position", errors, ctx=f"{ctx}.")
    if position is None:
        errors.append(f"{ctx}.position is required")
    q_raw = raw.get("quaternion", [1.0, 0.0, 0.0, 0.0])
    if (
        not isinstance(q_raw, (list, tuple))
        or len(q_raw) != 4
        or not all(_is_num(c) and math.isfinite(c) for c in q_raw)
    ):
        errors.append(f"{ctx}.quaternion must be a list of 4 finite numbers")
        quaternion = np.array([1.0, 0.0, 0.0, 0.0])
    else:
        quaternion = np.array(q_raw, dtype=float)
        n = np.linalg.norm(quaternion)
        if n < 1e-12:
            errors.append(f"{ctx}.quaternion must be nonzero")
            quaternion = np.array([1.0, 0.0, 0.0, 0.0])
        else:
            quaternion = quaternion / n
    lin_vel = _vec3(raw, "lin_vel", errors, ctx=f"{ctx}.", default=np.zeros(3))
    ang_vel = _vec3(raw, "ang_vel", errors, ctx=f"{ctx}.", default=np.zeros(3))
    kind_raw = raw.get("kind", "dynamic")
    kind = _KINDS.get(kind_raw)
    if kind is None:
        errors.append(f"{ctx}.kind must be one of {sorted(_KINDS)}")
        kind = BodyKind.DYNAMIC
    axis = _vec3(raw, "axis", errors, ctx=f"{ctx}.")
    if kind is BodyKind.PRISMATIC:
        if axis is None or np.linalg.norm(axis) < 1e-12:
            errors.append(f"{ctx}.axis (nonzero 3-vector) is required for prismatic bodies")
    elif "axis" in raw:
        errors.append(f"{ctx}.axis is only valid for prismatic bodies")
    trajectory = None
    if kind is BodyKind.KINEMATIC:
        if "trajectory" not in raw:
            errors.append(f"{ctx}.trajectory is required for kinematic bodies")
        else:
            trajectory = _parse_trajectory(raw["trajectory"], ctx, errors)
    elif "trajectory" in raw:
        errors.append(f"{ctx}.trajectory is only valid for kinematic bodies")
    applied = _vec3(raw, "applied_force", errors, ctx=f"{ctx}.")
    if applied is not None and kind not in (BodyKind.DYNAMIC, BodyKind.PRISMATIC):
        errors.append(f"{ctx}.applied_force is only valid for dynamic or prismatic bodies")
        applied = None
    if shape is None or mass is None or position is None:
        return None
    return BodySpec(
        name=name,
        shape=shape,
        mass=mass,
        position=position,
        quaternion=quaternion,
        lin_vel=lin_vel if lin_vel is not None else np.zeros(3),
        ang_vel=ang_vel if ang_vel is not None else np.zeros(3),
        kind=kind,
        axis=axis if kind is BodyKind.PRISMATIC else None,
        applied_force=applied,
        trajectory=trajectory,
    )


def _parse_params(raw, cls, label, errors):
    defaults = cls()
    if raw is None:
        return defaults
    if not isinstance(raw, dict):
        errors.append(f"{label} must be an object")
        return defaults
    fields = {f.name for f in dataclasses.fields(cls)}
    kwargs = {}
    for k, x in raw.items():
        if k not in fields:
            errors.append(f"{label}: unknown key '{k}'")
        elif not _is_num(x) or not math.isfinite(x):
            errors.append(f"{label}.{k} must be a finite number")
        else:
            kwargs[k] = float(x)
    try:
        return dataclasses.replace(defaults, **kwargs)
    except ValueError as e:
        errors.append(f"{label}: {e}")
        return defaults


def _sweep_target(cfg: ScenarioConfig, path: str):
    """(params dataclass, field name) for a dotted sweep path, or None."""
    parts = path.split(".")
    if len(parts) != 2:
        return None
    group, name = parts
    params = {"contact": cfg.contact, "friction": cfg.friction}.get(group)
    if params is None:
        return None
    if name not in {f.name for f in dataclasses.fields(params)}:
        return None
    return group, name


def parse_config(data, base_dir: str = ".") -> ScenarioConfig:
    """Validate a decoded JSON document into a ScenarioConfig.

    Raises ConfigError carrying every violation found.
    """
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["top level must be a JSON object"])
    for k in data:
        if k not in _TOP_KEYS:
            errors.append(f"unknown key '{k}'")
    name = data.get("name")
    if not isinstance(name, str) or not name:
        errors.append("name must be a non-empty string")
        name = "scenario"
    units = data.get("units", "si")
    if units not in _UNITS:
        errors.append(f"units must be one of {list(_UNITS)}")
        units = "si"
    gravity = _vec3(data, "gravity", errors, default=np.array([0.0, 0.0, -9.81]))
    duration = _num(data, "duration", errors, default=1.0, minimum=0.0)
    output_step = _num(data, "output_step", errors, default=1e-3, minimum=0.0, exclusive=True)
    h_max = _num(data, "h_max", errors, default=1e-3, minimum=0.0, exclusive=True)
    rel_tol = _num(data, "rel_tol", errors, default=1e-6, minimum=0.0, exclusive=True)
    abs_tol = _num(data, "abs_tol", errors, default=1e-9, minimum=0.0, exclusive=True)
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errors.append("seed must be a non-negative integer")
        seed = 0
    direction_mode = data.get("direction_mode", "face_normal")
    if direction_mode not in _DIRECTION_MODES:
        errors.append(f"direction_mode must be one of {list(_DIRECTION_MODES)}")
        direction_mode = "face_normal"
    freeze = data.get("freeze_geometry", False)
    if not isinstance(freeze, bool):
        errors.append("freeze_geometry must be a boolean")
        freeze = False
    contact = _parse_params(data.get("contact"), ContactParams, "contact", errors)
    if units == "per_cm3":
        # Volume gains quoted per cm^3 of overlap: 1 N/cm^3 = 1e6 N/m^3.
        try:
            contact = dataclasses.replace(contact, g1=contact.g1 * 1e6, g2=contact.g2 * 1e6)
        except ValueError as e:
            errors.append(f"contact: {e}")
    friction = _parse_params(data.get("friction"), FrictionParams, "friction", errors)
    bodies_raw = data.get("bodies")
    bodies = []
    if not isinstance(bodies_raw, list) or not bodies_raw:
        errors.append("bodies must be a non-empty list")
    else:
        for i, b in enumerate(bodies_raw):
            spec = _parse_body(b, i, base_dir, errors)
            if spec is not None:
                bodies.append(spec)
        names = [b.name for b in bodies]
        for dup in sorted({n for n in names if names.count(n) > 1}):
            errors.append(f"duplicate body name '{dup}'")

    cfg = ScenarioConfig(
        name=name,
        bodies=bodies,
        contact=contact,
        friction=friction,
        gravity=gravity,
        duration=duration if duration is not None else 1.0,
        output_step=output_step if output_step is not None else 1e-3,
        h_max=h_max if h_max is not None else 1e-3,
        rel_tol=rel_tol if rel_tol is not None else 1e-6,
        abs_tol=abs_tol if abs_tol is not None else 1e-9,
        seed=seed,
        direction_mode=direction_mode,
        freeze_geometry=freeze,
    )

    ref_raw = data.get("energy_reference")
    if ref_raw is not None:
        if not isinstance(ref_raw, dict) or set(ref_raw) != {"body", "trajectory"}:
            errors.append("energy_reference must be an object with keys 'body' and 'trajectory'")
        else:
            by_name = {b.name: b for b in bodies}
            tgt, src = ref_raw["body"], ref_raw["trajectory"]
            if tgt not in by_name:
                errors.append(f"energy_reference.body: no body named '{tgt}'")
            if src not in by_name:
                errors.append(f"energy_reference.trajectory: no body named '{src}'")
            elif by_name[src].kind is not BodyKind.KINEMATIC:
                errors.append(f"energy_reference.trajectory: body '{src}' is not kinematic")
            if tgt in by_name and src in by_name and by_name[src].kind is BodyKind.KINEMATIC:
                cfg.energy_reference = (tgt, src)

    sweep_raw = data.get("sweep", {})
    if not isinstance(sweep_raw, dict):
        errors.append("sweep must be an object mapping parameter paths to value lists")
    else:
        for path, values in sweep_raw.items():
            if _sweep_target(cfg, path) is None:
                errors.append(
                    f"sweep: unknown parameter path '{path}' (use contact.<field> or friction.<field>)"
                )
                continue
            if (
                not isinstance(values, list)
                or not values
                or not all(_is_num(x) and math.isfinite(x) for x in values)
            ):
                errors.append(f"sweep.{path} must be a non-empty list of finite numbers")
                continue
            cfg.sweep[path] = [float(x) for x in values]

    if errors:
        raise ConfigError(errors)
    return cfg


def load_config(path) -> ScenarioConfig:
    """Read and validate one scenario JSON file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as e:
        raise ConfigError([f"cannot read config: {e}"]) from e
    except json.JSONDecodeError as e:
        raise ConfigError([f"config is not valid JSON: {e}"]) from e
    return parse_config(data, base_dir=os.path.dirname(os.path.abspath(path)))
