"""Rigid-body state, Newton-Euler equations, and the adaptive RK45 integrator.

Orientation is integrated as a quaternion with body-frame angular velocity
(constant body-frame inertia keeps the gyroscopic term exact); quaternions
are renormalized after every accepted step through the integrator's
post-accept hook rather than inside the ODE.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .geometry.pose import Pose, quat_mul, quat_normalize, quat_rotate, quat_to_matrix
from .geometry.trimesh import TriMesh


class BodyKind(enum.Enum):
    DYNAMIC = "dynamic"
    PRISMATIC = "prismatic"
    STATIC = "static"
    KINEMATIC = "kinematic"


# Kinds whose state is advanced by the integrator.
INTEGRATED_KINDS = (BodyKind.DYNAMIC, BodyKind.PRISMATIC)


@dataclass
class RigidBody:
    name: str
    shape: TriMesh
    mass: float
    inertia: np.ndarray  # body frame, about the center of mass
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    quaternion: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    lin_vel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    ang_vel_body: np.ndarray = field(default_factory=lambda: np.zeros(3))
    kind: BodyKind = BodyKind.DYNAMIC
    axis: np.ndarray | None = None  # prismatic joint axis, world frame
    trajectory: object | None = None  # kinematic prescribed motion
    body_id: int = -1

    def __post_init__(self):
        self.mass = float(self.mass)
        if not self.mass > 0.0:
            raise ValueError(f"body {self.name!r}: mass must be > 0, got {self.mass}")
        self.inertia = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        if not np.allclose(self.inertia, self.inertia.T, atol=1e-12):
            raise ValueError(f"body {self.name!r}: inertia must be symmetric")
        if np.any(np.linalg.eigvalsh(self.inertia) <= 0.0):
            raise ValueError(f"body {self.name!r}: inertia must be positive definite")
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.quaternion = np.asarray(self.quaternion, dtype=float).reshape(4)
        norm = float(np.linalg.norm(self.quaternion))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"body {self.name!r}: quaternion norm {norm} not within 1e-9 of 1")
        self.quaternion = self.quaternion / norm
        self.lin_vel = np.asarray(self.lin_vel, dtype=float).reshape(3)
        self.ang_vel_body = np.asarray(self.ang_vel_body, dtype=float).reshape(3)
        if self.kind is BodyKind.STATIC:
            if np.any(self.lin_vel != 0.0) or np.any(self.ang_vel_body != 0.0):
                raise ValueError(f"body {self.name!r}: static bodies must start at rest")
        if self.kind is BodyKind.PRISMATIC:
            if self.axis is None:
                raise ValueError(f"body {self.name!r}: prismatic bodies need an axis")
            self.axis = np.asarray(self.axis, dtype=float).reshape(3)
            n = float(np.linalg.norm(self.axis))
            if n == 0.0:
                raise ValueError(f"body {self.name!r}: prismatic axis must be nonzero")
            self.axis = self.axis / n
            off_axis = self.lin_vel - (self.lin_vel @ self.axis) * self.axis
            if np.any(off_axis != 0.0):
                raise ValueError(f"body {self.name!r}: initial velocity must lie on the axis")
            if np.any(self.ang_vel_body != 0.0):
                raise ValueError(f"body {self.name!r}: prismatic bodies do not rotate")
        if self.kind is BodyKind.KINEMATIC and self.trajectory is None:
            raise ValueError(f"body {self.name!r}: kinematic bodies need a trajectory")
        self._inv_inertia = np.linalg.inv(self.inertia)

    def pose(self) -> Pose:
        return Pose(position=self.position, quaternion=self.quaternion)

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)

    def angular_velocity_world(self) -> np.ndarray:
        return quat_rotate(self.quaternion, self.ang_vel_body)

    @property
    def inv_inertia(self) -> np.ndarray:
        return self._inv_inertia


def equations_of_motion(body: RigidBody, force_world: np.ndarray, torque_body: np.ndarray):
    """Accelerations (x_ddot world, omega_dot body) under the given wrench.

    Prismatic bodies admit only the force component along their axis and
    never rotate; static/kinematic bodies are not integrated and return
    zeros.
    """
    if body.kind is BodyKind.DYNAMIC:
        acc = np.asarray(force_world, dtype=float) / body.mass
        omega = body.ang_vel_body
        gyro = np.cross(omega, body.inertia @ omega)
        ang_acc = body.inv_inertia @ (np.asarray(torque_body, dtype=float) - gyro)
        return acc, ang_acc
    if body.kind is BodyKind.PRISMATIC:
        along = float(np.asarray(force_world, dtype=float) @ body.axis)
        return (along / body.mass) * body.axis, np.zeros(3)
    return np.zeros(3), np.zeros(3)


def quaternion_rate(q: np.ndarray, omega_body: np.ndarray) -> np.ndarray:
    """Kinematic relation q_dot = 1/2 q (x) (0, omega_body)."""
    ow = np.asarray(omega_body, dtype=float)
    return 0.5 * quat_mul(q, np.array([0.0, ow[0], ow[1], ow[2]]))


def kinetic_energy(body: RigidBody) -> float:
    """Translational plus rotational kinetic energy, body-frame inertia."""
    trans = 0.5 * body.mass * float(body.lin_vel @ body.lin_vel)
    rot = 0.5 * float(body.ang_vel_body @ (body.inertia @ body.ang_vel_body))
    return trans + rot


def renormalize(q: np.ndarray) -> np.ndarray:
    """Rescale an integrated quaternion to unit norm (zero norm is an error)."""
    return quat_normalize(q)


class IntegrationError(RuntimeError):
    """Step-size underflow: the problem became too stiff for the tolerances."""

    def __init__(self, t: float, message: str):
        super().__init__(message)
        self.t = t


@dataclass
class IntegrationResult:
    ts: list
    ys: list
    accepted: int
    rejected: int
    rhs_evals: int
    h_last: float


# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0)
_DP_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0),
    (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0),
)
# 5th-order solution weights (the last tableau row) and the embedded 4th-order
# error weights b5 - b4.
_DP_B = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0)
_DP_E = (
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

MIN_STEP = 1e-12  # s; below this the integration aborts as stiff


def rk45_integrate(
    rhs,
    y0: np.ndarray,
    t0: float,
    t1: float,
    rel_tol: float = 1e-6,
    abs_tol: float = 1e-9,
    h_max: float = 1e-3,
    h0: float | None = None,
    post_accept=None,
) -> IntegrationResult:
    """Adaptive Dormand-Prince RK45 from t0 to t1.

    The trajectory of accepted (t, y) pairs includes the initial condition.
    post_accept(t, y), when given, may adjust y in place after each accepted
    step (quaternion renormalization); it runs before the next step's stages,
    which also rules out first-same-as-last stage reuse.
    """
    if rel_tol <= 0.0 or abs_tol <= 0.0:
        raise ValueError("tolerances must be > 0")
    if h_max <= 0.0:
        raise ValueError("h_max must be > 0")
    t = float(t0)
    y = np.array(y0, dtype=float)
    ts = [t]
    ys = [y.copy()]
    accepted = rejected = evals = 0
    span = float(t1) - t
    if span < 0.0:
        raise ValueError("t1 must be >= t0")
    if span == 0.0:
        return IntegrationResult(ts, ys, 0, 0, 0, h_max)
    h = min(h_max, span) if h0 is None else min(h0, h_max, span)
    if h <= 0.0:
        h = min(h_max, span)
    k = [None] * 7
    while t < t1 - 1e-15 * max(1.0, abs(t1)):
        h = min(h, t1 - t)
        k[0] = rhs(t, y)
        evals += 1
        for stage in range(1, 7):
            yi = y.copy()
            a = _DP_A[stage]
            for j in range(stage):
                if a[j] != 0.0:
                    yi += (h * a[j]) * k[j]
            k[stage] = rhs(t + _DP_C[stage] * h, yi)
            evals += 1
        y1 = y.copy()
        for j in range(7):
            if _DP_B[j] != 0.0:
                y1 += (h * _DP_B[j]) * k[j]
        err = np.zeros_like(y)
        for j in range(7):
            if _DP_E[j] != 0.0:
                err += (h * _DP_E[j]) * k[j]
        scale = abs_tol + rel_tol * np.maximum(np.abs(y), np.abs(y1))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        if err_norm <= 1.0:
            t = t + h
            y = y1
            if post_accept is not None:
                post_accept(t, y)
            ts.append(t)
            ys.append(y.copy())
            accepted += 1
            factor = 5.0 if err_norm == 0.0 else min(5.0, max(0.2, 0.9 * err_norm**-0.2))
        else:
            rejected += 1
            factor = max(0.2, 0.9 * err_norm**-0.2)
        h = min(h * factor, h_max)
        if h < MIN_STEP and t < t1 - 1e-15 * max(1.0, abs(t1)):
            raise IntegrationError(
                t, f"stiffness/failure: step size underflow ({h:.3e} s) at t = {t:.9f} s"
            )
    return IntegrationResult(ts, ys, accepted, rejected, evals, h)
