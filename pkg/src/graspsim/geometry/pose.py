"""Rigid-body poses and quaternion algebra.

Quaternions are scalar-first ``(w, x, y, z)`` float64 arrays. All rotation
helpers assume (but do not enforce) unit quaternions; normalization policy
lives with the dynamics layer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def quat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b, scalar-first."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q (body -> world for body-fixed v)."""
    qv = np.asarray(q[1:4])
    t = 2.0 * np.cross(qv, v)
    return np.asarray(v) + q[0] * t + np.cross(qv, t)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    xx, yy, zz = x * x, y * y, z * z
    xy, xz, yz = x * y, x * z, y * z
    wx, wy, wz = w * x, w * y, w * z
    return np.array(
        [
            [1.0 - 2.0 * (yy + zz), 2.0 * (xy - wz), 2.0 * (xz + wy)],
            [2.0 * (xy + wz), 1.0 - 2.0 * (xx + zz), 2.0 * (yz - wx)],
            [2.0 * (xz - wy), 2.0 * (yz + wx), 1.0 - 2.0 * (xx + yy)],
        ]
    )


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("rotation axis must be nonzero")
    half = 0.5 * angle
    return np.concatenate([[np.cos(half)], np.sin(half) / n * axis])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Return q scaled to unit length; a zero quaternion is an error."""
    n = float(np.linalg.norm(q))
    if n < 1e-30:
        raise ValueError("cannot normalize a zero quaternion")
    return np.asarray(q, dtype=float) / n


@dataclass
class Pose:
    """Position plus orientation quaternion; maps body coordinates to world."""

    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    quaternion: np.ndarray = field(default_factory=lambda: IDENTITY_QUAT.copy())

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        self.quaternion = np.asarray(self.quaternion, dtype=float).reshape(4)

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)

    def transform_points(self, points: np.ndarray) -> np.ndarray:
        """Apply the pose to an (n, 3) array of body-frame points."""
        return points @ self.rotation().T + self.position

    def transform_point(self, point: np.ndarray) -> np.ndarray:
        return self.rotation() @ np.asarray(point, dtype=float) + self.position
