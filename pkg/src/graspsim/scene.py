"""World assembly and the simulation loop.

The loop advances in fixed segments no longer than h_max: at each segment
boundary pairs are (re)detected and episodes opened or retired, then the
augmented state (body states plus per-episode filter states) is integrated
across the segment with overlap geometry re-evaluated at every RK stage.
Contact latency is therefore bounded by one segment.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import cos, pi, sin

import numpy as np

from .contact import (
    ContactEpisode,
    ContactParams,
    FilterState,
    FrictionParams,
    Wrench,
    filter_rhs,
    friction_force,
    reaction_wrench,
    transient_gain,
    update_episodes,
)
from .dynamics import (
    INTEGRATED_KINDS,
    BodyKind,
    IntegrationError,
    RigidBody,
    kinetic_energy,
    quaternion_rate,
    renormalize,
    rk45_integrate,
)
from .geometry import DIRECTION_EPS, Pose, compute_aabb, aabb_overlap, quantities_raw
from .geometry.pose import quat_rotate, quat_to_matrix

log = logging.getLogger(__name__)


@dataclass
class SimOptions:
    rel_tol: float = 1e-6
    abs_tol: float = 1e-9
    h_max: float = 1e-3  # s; also bounds contact on/off detection latency
    output_step: float = 1e-3  # s
    # Face-normal weighting keeps flat resting contacts neutrally stable; the
    # centroid weighting tilts the force with the overlap wedge, which pumps
    # the rocking mode of face-on-face contacts (measured e-folding ~13/s).
    direction_mode: str = "face_normal"
    freeze_geometry: bool = False  # profiling mode: per-segment frozen overlap


@dataclass
class SinusoidalTrajectory:
    """Prescribed translation along a fixed axis; orientation is constant."""

    origin: np.ndarray
    axis: np.ndarray
    amplitude: float
    frequency: float  # Hz
    phase: float = 0.0

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=float).reshape(3)
        self.axis = np.asarray(self.axis, dtype=float).reshape(3)
        n = float(np.linalg.norm(self.axis))
        if n == 0.0:
            raise ValueError("trajectory axis must be nonzero")
        self.axis = self.axis / n

    def position(self, t: float) -> np.ndarray:
        w = 2.0 * pi * self.frequency
        return self.origin + self.axis * (self.amplitude * sin(w * t + self.phase))

    def velocity(self, t: float) -> np.ndarray:
        w = 2.0 * pi * self.frequency
        return self.axis * (self.amplitude * w * cos(w * t + self.phase))


@dataclass
class EnergyReference:
    """Which body's kinetic energy is compared against which prescribed motion."""

    body_id: int
    trajectory: SinusoidalTrajectory


@dataclass
class PairMetrics:
    force: float  # reaction (normal) force magnitude, N
    volume: float
    v_f_dot: float
    delta_eff: float


@dataclass
class BodyMetrics:
    position: np.ndarray
    quaternion: np.ndarray
    lin_vel: np.ndarray
    ang_vel_body: np.ndarray
    kinetic_energy: float


@dataclass
class MetricsSample:
    t: float
    pairs: dict
    bodies: list
    ke_measured: float | None = None
    ke_expected: float | None = None
    ke_ratio: float | None = None


@dataclass
class World:
    contact_params: ContactParams = field(default_factory=ContactParams)
    friction_params: FrictionParams = field(default_factory=FrictionParams)
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    options: SimOptions = field(default_factory=SimOptions)
    bodies: list = field(default_factory=list)
    applied_forces: dict = field(default_factory=dict)  # body_id -> world force
    episodes: dict = field(default_factory=dict)  # ordered pair -> ContactEpisode
    energy_reference: EnergyReference | None = None
    time: float = 0.0
    warnings: int = 0  # indeterminate-direction skips
    stats: dict = field(default_factory=lambda: {"accepted": 0, "rejected": 0, "rhs_evals": 0})

    def __post_init__(self):
        self.gravity = np.asarray(self.gravity, dtype=float).reshape(3)

    def add_body(self, body: RigidBody) -> int:
        body.body_id = len(self.bodies)
        self.bodies.append(body)
        return body.body_id

    def body_named(self, name: str) -> RigidBody:
        for body in self.bodies:
            if body.name == name:
                return body
        raise KeyError(f"no body named {name!r}")


def eligible_pairs(world: World) -> list[tuple[int, int]]:
    """All ordered body-id pairs that could ever produce contact forces."""
    out = []
    for i in range(len(world.bodies)):
        for j in range(i + 1, len(world.bodies)):
            if (
                world.bodies[i].kind is BodyKind.STATIC
                and world.bodies[j].kind is BodyKind.STATIC
            ):
                continue
            out.append((i, j))
    return out


def detect_pairs(world: World) -> list[tuple[int, int]]:
    """Broad phase: AABB-overlapping pairs (touching counts), Static-Static
    excluded, ascending order."""
    boxes = [compute_aabb(b.shape, b.pose()) for b in world.bodies]
    return [
        (i, j) for i, j in eligible_pairs(world) if aabb_overlap(boxes[i], boxes[j])
    ]


# --- state vector layout -----------------------------------------------------

_BODY_SLOTS = 13  # position 3, quaternion 4, lin_vel 3, ang_vel 3


@dataclass
class StateLayout:
    """Deterministic packing: bodies by ascending id, episodes by pair."""

    dyn_ids: list
    pairs: list

    @classmethod
    def of(cls, world: World) -> "StateLayout":
        dyn = [b.body_id for b in world.bodies if b.kind in INTEGRATED_KINDS]
        return cls(dyn_ids=dyn, pairs=sorted(world.episodes))

    @property
    def size(self) -> int:
        return _BODY_SLOTS * len(self.dyn_ids) + 2 * len(self.pairs)

    def body_offset(self, k: int) -> int:
        return _BODY_SLOTS * k

    def episode_offset(self, j: int) -> int:
        return _BODY_SLOTS * len(self.dyn_ids) + 2 * j


def pack_state(world: World, layout: StateLayout) -> np.ndarray:
    y = np.empty(layout.size)
    for k, bid in enumerate(layout.dyn_ids):
        body = world.bodies[bid]
        o = layout.body_offset(k)
        y[o : o + 3] = body.position
        y[o + 3 : o + 7] = body.quaternion
        y[o + 7 : o + 10] = body.lin_vel
        y[o + 10 : o + 13] = body.ang_vel_body
    for j, pair in enumerate(layout.pairs):
        filt = world.episodes[pair].filter
        o = layout.episode_offset(j)
        y[o] = filt.v_f
        y[o + 1] = filt.v_f_dot
    return y


def apply_state(world: World, layout: StateLayout, y: np.ndarray) -> None:
    for k, bid in enumerate(layout.dyn_ids):
        body = world.bodies[bid]
        o = layout.body_offset(k)
        body.position = y[o : o + 3].copy()
        body.quaternion = renormalize(y[o + 3 : o + 7])
        body.lin_vel = y[o + 7 : o + 10].copy()
        body.ang_vel_body = y[o + 10 : o + 13].copy()
    for j, pair in enumerate(layout.pairs):
        o = layout.episode_offset(j)
        world.episodes[pair].filter = FilterState(v_f=y[o], v_f_dot=y[o + 1])


# --- effort assembly ----------------------------------------------------------


class _BodyState:
    """Kinematic snapshot of one body at one evaluation instant."""

    __slots__ = ("position", "quaternion", "lin_vel", "ang_vel_body", "_rotation")

    def __init__(self, position, quaternion, lin_vel, ang_vel_body):
        self.position = position
        self.quaternion = quaternion
        self.lin_vel = lin_vel
        self.ang_vel_body = ang_vel_body
        self._rotation = None

    @property
    def rotation(self) -> np.ndarray:
        if self._rotation is None:
            self._rotation = quat_to_matrix(self.quaternion)
        return self._rotation

    def velocity_at(self, point: np.ndarray) -> np.ndarray:
        if self.ang_vel_body[0] == 0.0 and self.ang_vel_body[1] == 0.0 and self.ang_vel_body[2] == 0.0:
            return self.lin_vel
        omega_w = self.rotation @ self.ang_vel_body
        return self.lin_vel + np.cross(omega_w, point - self.position)


def _body_states_from_world(world: World, t: float) -> list:
    states = []
    for body in world.bodies:
        if body.kind is BodyKind.KINEMATIC:
            states.append(
                _BodyState(
                    body.trajectory.position(t),
                    body.quaternion,
                    body.trajectory.velocity(t),
                    np.zeros(3),
                )
            )
        else:
            states.append(
                _BodyState(body.position, body.quaternion, body.lin_vel, body.ang_vel_body)
            )
    return states


def _body_states_from_packed(world: World, layout: StateLayout, y: np.ndarray, t: float):
    states = _body_states_from_world(world, t)
    for k, bid in enumerate(layout.dyn_ids):
        o = layout.body_offset(k)
        states[bid] = _BodyState(
            y[o : o + 3],
            renormalize(y[o + 3 : o + 7]),
            y[o + 7 : o + 10],
            y[o + 10 : o + 13],
        )
    return states


def _assemble(
    world: World,
    t: float,
    states: list,
    episode_filters: dict,
    geoms: dict | None = None,
):
    """Shared effort assembly for RK stages and boundary metrics.

    Returns (forces, torques, filter_inputs, pair_metrics); forces/torques
    are world-frame per body (gravity and applied forces included for
    integrated bodies), filter_inputs maps episode pairs to the volume signal
    feeding Eq. lowpass at this instant. geoms, when given, supplies
    precomputed (v, c, s_d) per pair instead of recomputing overlap geometry.
    """
    n = len(world.bodies)
    forces = [np.zeros(3) for _ in range(n)]
    torques = [np.zeros(3) for _ in range(n)]
    for body in world.bodies:
        if body.kind in INTEGRATED_KINDS:
            forces[body.body_id] = body.mass * world.gravity + world.applied_forces.get(
                body.body_id, np.zeros(3)
            )
    filter_inputs = {}
    pair_metrics = {}
    params = world.contact_params
    for pair in sorted(episode_filters):
        episode = world.episodes[pair]
        ia, ib = pair
        body_a, body_b = world.bodies[ia], world.bodies[ib]
        if geoms is not None:
            geom = geoms.get(pair)
        else:
            geom = quantities_raw(
                body_a.shape,
                Pose(states[ia].position, states[ia].quaternion),
                body_b.shape,
                Pose(states[ib].position, states[ib].quaternion),
                world.options.direction_mode,
            )
        filt = episode_filters[pair]
        delta = transient_gain(t, episode, params, body_a.mass, body_b.mass)
        if geom is None:
            filter_inputs[pair] = 0.0
            pair_metrics[pair] = PairMetrics(0.0, 0.0, filt.v_f_dot, delta)
            continue
        v, c, s_d = geom
        filter_inputs[pair] = v
        norm = float(np.linalg.norm(s_d))
        if norm < DIRECTION_EPS:
            world.warnings += 1
            log.warning("indeterminate contact direction for pair %s at t=%.6f", pair, t)
            pair_metrics[pair] = PairMetrics(0.0, v, filt.v_f_dot, delta)
            continue
        overlap = _Geom(v, c, s_d / norm)
        wrench = reaction_wrench(overlap, filt, delta, params, states[ia].position)
        forces[ia] += wrench.force
        torques[ia] += wrench.torque
        forces[ib] -= wrench.force
        torques[ib] += np.cross(c - states[ib].position, -wrench.force)
        v_rel = states[ib].velocity_at(c) - states[ia].velocity_at(c)
        fric = friction_force(wrench.force, v_rel, world.friction_params)
        forces[ib] += fric
        torques[ib] += np.cross(c - states[ib].position, fric)
        forces[ia] -= fric
        torques[ia] += np.cross(c - states[ia].position, -fric)
        pair_metrics[pair] = PairMetrics(
            float(np.linalg.norm(wrench.force)), v, filt.v_f_dot, delta
        )
    return forces, torques, filter_inputs, pair_metrics


class _Geom:
    __slots__ = ("v", "c", "s_n")

    def __init__(self, v, c, s_n):
        self.v = v
        self.c = c
        self.s_n = s_n


def assemble_efforts(world: World, state: np.ndarray, t: float):
    """Per-body wrenches and per-episode filter inputs at a packed state."""
    layout = StateLayout.of(world)
    states = _body_states_from_packed(world, layout, state, t)
    filters = {
        pair: FilterState(state[layout.episode_offset(j)], state[layout.episode_offset(j) + 1])
        for j, pair in enumerate(layout.pairs)
    }
    forces, torques, filter_inputs, _ = _assemble(world, t, states, filters)
    wrenches = [Wrench(force=f, torque=tq) for f, tq in zip(forces, torques)]
    return wrenches, filter_inputs


def _make_rhs(world: World, layout: StateLayout, frozen_geoms: dict | None):
    bodies = world.bodies
    zeta = world.contact_params.zeta
    omega_n = world.contact_params.omega_n

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        states = _body_states_from_packed(world, layout, y, t)
        filters = {}
        for j, pair in enumerate(layout.pairs):
            o = layout.episode_offset(j)
            filters[pair] = FilterState(y[o], y[o + 1])
        forces, torques, filter_inputs, _ = _assemble(
            world, t, states, filters, geoms=frozen_geoms
        )
        ydot = np.zeros_like(y)
        for k, bid in enumerate(layout.dyn_ids):
            body = bodies[bid]
            st = states[bid]
            o = layout.body_offset(k)
            ydot[o : o + 3] = st.lin_vel
            if body.kind is BodyKind.DYNAMIC:
                ydot[o + 3 : o + 7] = quaternion_rate(y[o + 3 : o + 7], st.ang_vel_body)
                ydot[o + 7 : o + 10] = forces[bid] / body.mass
                torque_body = st.rotation.T @ torques[bid]
                gyro = np.cross(st.ang_vel_body, body.inertia @ st.ang_vel_body)
                ydot[o + 10 : o + 13] = body.inv_inertia @ (torque_body - gyro)
            else:  # prismatic: force projected on the axis, no rotation
                along = float(forces[bid] @ body.axis)
                ydot[o + 7 : o + 10] = (along / body.mass) * body.axis
        for j, pair in enumerate(layout.pairs):
            o = layout.episode_offset(j)
            dvf, dvfd = filter_rhs(filters[pair], filter_inputs[pair], zeta, omega_n)
            ydot[o] = dvf
            ydot[o + 1] = dvfd
        return ydot

    return rhs


def _renormalizer(layout: StateLayout):
    def post_accept(t, y):
        for k in range(len(layout.dyn_ids)):
            o = layout.body_offset(k)
            y[o + 3 : o + 7] = renormalize(y[o + 3 : o + 7])

    return post_accept


def kinetic_energy_ratio(measured: float, expected: float) -> float:
    """measured/expected with the degenerate conventions pinned.

    Both at numerical zero means the object is at rest exactly when it should
    be: a perfect grasp, ratio 1. Energy where none is expected has no finite
    ratio: +inf sentinel.
    """
    if expected < 1e-12:
        return 1.0 if measured < 1e-12 else float("inf")
    return measured / expected


def expected_energy(trajectory, mass: float, t: float) -> float:
    """Kinetic energy of a body rigidly following the prescribed trajectory."""
    vel = trajectory.velocity(t)
    return 0.5 * mass * float(vel @ vel)


def _sync_kinematic(world: World, t: float) -> None:
    for body in world.bodies:
        if body.kind is BodyKind.KINEMATIC:
            body.position = body.trajectory.position(t)
            body.lin_vel = body.trajectory.velocity(t)


def _boundary_geometries(world: World) -> dict:
    """Narrow-phase quantities for every broad-phase pair at the current state."""
    out = {}
    for pair in detect_pairs(world):
        a, b = world.bodies[pair[0]], world.bodies[pair[1]]
        out[pair] = quantities_raw(
            a.shape, a.pose(), b.shape, b.pose(), world.options.direction_mode
        )
    return out


def _sample(world: World, t: float, geoms: dict) -> MetricsSample:
    states = _body_states_from_world(world, t)
    filters = {pair: world.episodes[pair].filter for pair in sorted(world.episodes)}
    _, _, _, pair_metrics = _assemble(world, t, states, filters, geoms=geoms)
    body_metrics = [
        BodyMetrics(
            position=body.position.copy(),
            quaternion=body.quaternion.copy(),
            lin_vel=body.lin_vel.copy(),
            ang_vel_body=body.ang_vel_body.copy(),
            kinetic_energy=kinetic_energy(body),
        )
        for body in world.bodies
    ]
    sample = MetricsSample(t=t, pairs=pair_metrics, bodies=body_metrics)
    ref = world.energy_reference
    if ref is not None:
        sample.ke_measured = kinetic_energy(world.bodies[ref.body_id])
        sample.ke_expected = expected_energy(ref.trajectory, world.bodies[ref.body_id].mass, t)
        sample.ke_ratio = kinetic_energy_ratio(sample.ke_measured, sample.ke_expected)
    return sample


def step(world: World, t_end: float) -> list[MetricsSample]:
    """Advance the world to t_end, returning metric samples at output steps.

    Deterministic given identical inputs. Raises IntegrationError on step
    underflow, with world state left at the last completed boundary.
    """
    if t_end <= world.time:
        raise ValueError(f"t_end ({t_end}) must exceed world.time ({world.time})")
    opts = world.options
    boundary_dt = min(opts.h_max, opts.output_step)
    emit_every = max(1, round(opts.output_step / boundary_dt))
    t0 = world.time
    samples = []
    h_carry = None
    k = 0
    while True:
        t = world.time
        _sync_kinematic(world, t)
        geoms = _boundary_geometries(world)
        update_episodes(world.episodes, geoms, t, world.bodies)
        if k % emit_every == 0 or t >= t_end - 1e-12:
            samples.append(_sample(world, t, geoms))
        if t >= t_end - 1e-12:
            break
        t_next = min(t0 + (k + 1) * boundary_dt, t_end)
        layout = StateLayout.of(world)
        if layout.size:
            y = pack_state(world, layout)
            frozen = geoms if opts.freeze_geometry else None
            try:
                result = rk45_integrate(
                    _make_rhs(world, layout, frozen),
                    y,
                    t,
                    t_next,
                    rel_tol=opts.rel_tol,
                    abs_tol=opts.abs_tol,
                    h_max=opts.h_max,
                    h0=h_carry,
                    post_accept=_renormalizer(layout),
                )
            except IntegrationError as err:
                # Hand the boundary samples gathered so far to the caller so
                # a failed run can still emit its partial time series.
                err.samples = samples
                raise
            apply_state(world, layout, result.ys[-1])
            world.stats["accepted"] += result.accepted
            world.stats["rejected"] += result.rejected
            world.stats["rhs_evals"] += result.rhs_evals
            h_carry = result.h_last
        world.time = t_next
        k += 1
    return samples
