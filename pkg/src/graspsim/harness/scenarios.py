"""Scenario construction: config -> World, sweep enumeration, oracles."""

from __future__ import annotations

import dataclasses
import itertools
from math import sin

import numpy as np

from ..dynamics import BodyKind, RigidBody
from ..geometry import cuboid, icosphere, load_obj, mesh_inertia
from ..scene import EnergyReference, SimOptions, SinusoidalTrajectory, World
from .config import ConfigError, ScenarioConfig, _sweep_target


def _build_shape(spec: dict):
    if spec["type"] == "cuboid":
        return cuboid(tuple(spec["extents"]))
    if spec["type"] == "icosphere":
        return icosphere(spec["radius"], spec["subdivisions"])
    return load_obj(spec["path"])


def _build_trajectory(body) -> SinusoidalTrajectory:
    t = body.trajectory
    axis = t.axis / np.linalg.norm(t.axis)
    if t.origin is not None:
        origin = t.origin
    else:
        # Anchor the sinusoid so it passes through the configured start pose.
        origin = body.position - t.amplitude * sin(t.phase) * axis
    return SinusoidalTrajectory(
        origin=origin,
        axis=axis,
        amplitude=t.amplitude,
        frequency=t.frequency,
        phase=t.phase,
    )


def build_scenario(config: ScenarioConfig) -> World:
    """Construct the world a validated config describes."""
    options = SimOptions(
        rel_tol=config.rel_tol,
        abs_tol=config.abs_tol,
        h_max=config.h_max,
        output_step=config.output_step,
        direction_mode=config.direction_mode,
        freeze_geometry=config.freeze_geometry,
    )
    world = World(
        contact_params=config.contact,
        friction_params=config.friction,
        gravity=config.gravity.copy(),
        options=options,
    )
    ids = {}
    for spec in config.bodies:
        shape = _build_shape(spec.shape)
        body = RigidBody(
            name=spec.name,
            shape=shape,
            mass=spec.mass,
            inertia=mesh_inertia(shape, spec.mass),
            position=spec.position.copy(),
            quaternion=spec.quaternion.copy(),
            lin_vel=spec.lin_vel.copy(),
            ang_vel_body=spec.ang_vel.copy(),
            kind=spec.kind,
            axis=None if spec.axis is None else spec.axis / np.linalg.norm(spec.axis),
            trajectory=None if spec.trajectory is None else _build_trajectory(spec),
        )
        ids[spec.name] = world.add_body(body)
        if spec.applied_force is not None:
            world.applied_forces[ids[spec.name]] = spec.applied_force.copy()
    if config.energy_reference is not None:
        target, source = config.energy_reference
        world.energy_reference = EnergyReference(
            body_id=ids[target],
            trajectory=world.bodies[ids[source]].trajectory,
        )
    return world


def enumerate_sweep(config: ScenarioConfig):
    """All sweep cells as (coords, cell config) in grid (row-major) order.

    coords maps each swept parameter path to its value for that cell; the
    first path varies slowest. Raises ConfigError when the config carries no
    sweep grid or a value is rejected by parameter validation.
    """
    if not config.sweep:
        raise ConfigError(["no sweep parameters"])
    paths = list(config.sweep)
    cells = []
    errors = []
    for values in itertools.product(*(config.sweep[p] for p in paths)):
        coords = dict(zip(paths, values))
        contact, friction = config.contact, config.friction
        for path, value in coords.items():
            group, name = _sweep_target(config, path)
            try:
                if group == "contact":
                    contact = dataclasses.replace(contact, **{name: value})
                else:
                    friction = dataclasses.replace(friction, **{name: value})
            except ValueError as e:
                errors.append(f"sweep cell {coords}: {e}")
        cell = dataclasses.replace(config, contact=contact, friction=friction, sweep={})
        cells.append((coords, cell))
    if errors:
        raise ConfigError(errors)
    return cells


def analytic_wall_trajectory(x0: float, v0: float, wall_position: float, t: float) -> float:
    """Ideal stiff-reflection position for 1D motion toward a wall.

    The reference trajectory is piecewise linear: uniform motion until the
    tracked coordinate reaches wall_position, then the mirror image (unit
    restitution, instantaneous turnaround).
    """
    if v0 <= 0.0:
        raise ValueError("v0 must be > 0 (moving toward the wall)")
    t_hit = (wall_position - x0) / v0
    if t <= t_hit:
        return x0 + v0 * t
    return wall_position - v0 * (t - t_hit)
