"""Per-pair contact laws: derivative filter, transient gain, reaction wrench,
regularized Coulomb friction, and contact-episode bookkeeping.

The overlap volume acts as the virtual deformation of a Kelvin-Voigt element:
stiffness reacts to the volume itself, damping to its low-pass-filtered rate
(finite differences across adaptive steps would be too noisy). A short
Gaussian gain boosts the impedance right after each first contact, shaped by
the impact speed frozen at detection time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import exp, pi, sqrt, tanh

import numpy as np

# Floor for the frozen approach speed; prevents the Gaussian width d_v = d_t/dv
# from diverging on grazing or resting first contacts.
EPS_APPROACH_SPEED = 1e-4  # m/s

# Relative speeds below this are treated as sticking (friction exactly zero).
EPS_SLIP_SPEED = 1e-9  # m/s


@dataclass
class FilterState:
    """Second-order low-pass state: filtered volume and its rate."""

    v_f: float
    v_f_dot: float


@dataclass
class ContactParams:
    """Gains of the volumetric contact law (SI units).

    g1/g2 are force per volume and per volume-rate; g_i/g_t shape the
    post-impact transient (dimensionless); d_t is the target depth scale.
    """

    g1: float = 7.4e5  # N/m^3
    g2: float = 1.5e4  # N*s/m^3
    g_i: float = 250.0
    g_t: float = 1.0
    d_t: float = 0.002  # m
    zeta: float = 1.0
    omega_n: float = 2.0 * pi * 500.0  # rad/s

    def __post_init__(self):
        for name in ("g1", "d_t", "zeta", "omega_n"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ValueError(f"contact parameter {name} must be > 0, got {value}")
        for name in ("g2", "g_i", "g_t"):
            value = getattr(self, name)
            if value < 0.0:
                raise ValueError(f"contact parameter {name} must be >= 0, got {value}")


@dataclass
class FrictionParams:
    mu: float = 0.2
    beta: float = 0.2  # N*s/m
    gamma: float = 1.0  # s/m

    def __post_init__(self):
        if self.mu < 0.0 or self.beta < 0.0:
            raise ValueError("friction coefficients mu and beta must be >= 0")
        if not self.gamma > 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


@dataclass
class ContactEpisode:
    """Lifetime bookkeeping of one pair's contact, from detection to separation."""

    pair: tuple[int, int]
    t_c: float
    dv_c0: float
    filter: FilterState
    active: bool = True

    def __post_init__(self):
        if self.pair[0] >= self.pair[1]:
            raise ValueError(f"episode pair must be ordered, got {self.pair}")
        if self.dv_c0 < EPS_APPROACH_SPEED:
            raise ValueError("dv_c0 must carry the clamped approach speed")


@dataclass
class Wrench:
    force: np.ndarray = field(default_factory=lambda: np.zeros(3))
    torque: np.ndarray = field(default_factory=lambda: np.zeros(3))


def filter_rhs(state: FilterState, v: float, zeta: float, omega_n: float):
    """Time derivatives (d v_f, d v_f_dot) of the second-order low-pass."""
    return (
        state.v_f_dot,
        -2.0 * zeta * omega_n * state.v_f_dot + omega_n * omega_n * (v - state.v_f),
    )


def init_filter(v0: float) -> FilterState:
    """Filter state at first contact: v_f matches the volume, rate starts at 0."""
    if v0 < 0.0:
        raise ValueError(f"initial overlap volume must be >= 0, got {v0}")
    return FilterState(v_f=v0, v_f_dot=0.0)


def relative_contact_speed(body_a, body_b, c: np.ndarray, s_n: np.ndarray) -> float:
    """Approach speed of B toward A at the contact centroid, along s_n.

    Positive when the bodies are closing (s_n pushes A away from B).
    """
    c = np.asarray(c, dtype=float)
    va = body_a.lin_vel + np.cross(body_a.angular_velocity_world(), c - body_a.position)
    vb = body_b.lin_vel + np.cross(body_b.angular_velocity_world(), c - body_b.position)
    return float((vb - va) @ np.asarray(s_n, dtype=float))


def transient_gain(
    t: float, episode: ContactEpisode, params: ContactParams, m_a: float, m_b: float
) -> float:
    """Gaussian impact gain delta_eff = 1 + delta_i(t).

    The pulse integrates to i_v = g_i (m_a + m_b) dv (an impulse scale), has
    width d_v = d_t/dv, and peaks g_t widths after first contact; dv is the
    approach speed frozen at t_c. The +1 floor keeps the steady Kelvin-Voigt
    term active after the transient dies out.
    """
    dv = max(episode.dv_c0, EPS_APPROACH_SPEED)
    i_v = params.g_i * (m_a + m_b) * dv
    d_v = params.d_t / dv
    arg = (t - (episode.t_c + params.g_t * d_v)) / d_v
    return 1.0 + i_v / (sqrt(pi) * d_v) * exp(-arg * arg)


def reaction_wrench(
    overlap, filter_state: FilterState, delta_eff: float, params: ContactParams, p_o
) -> Wrench:
    """Reaction wrench on the body whose center of mass is at p_o.

    Magnitude delta_eff*(g1*v + g2*v_f_dot) along s_n, clamped at zero when
    the damping term would make the contact adhesive; torque uses the lever
    arm from p_o to the overlap centroid. The caller applies the negation
    (with its own lever arm) to the other body.
    """
    magnitude = delta_eff * (params.g1 * overlap.v + params.g2 * filter_state.v_f_dot)
    if magnitude <= 0.0:
        return Wrench()
    force = magnitude * np.asarray(overlap.s_n, dtype=float)
    lever = np.asarray(overlap.c, dtype=float) - np.asarray(p_o, dtype=float)
    return Wrench(force=force, torque=np.cross(lever, force))


def friction_force(f_n: np.ndarray, v_r: np.ndarray, params: FrictionParams) -> np.ndarray:
    """Regularized Coulomb + viscous friction opposing the relative velocity.

    f = -(mu*|f_n|*tanh(gamma*|v_r|) + beta*|v_r|) * v_r/|v_r|; exactly zero
    below the sticking threshold so resting contacts generate no force noise.
    """
    v_r = np.asarray(v_r, dtype=float)
    speed = float(np.linalg.norm(v_r))
    if speed < EPS_SLIP_SPEED:
        return np.zeros(3)
    normal = float(np.linalg.norm(np.asarray(f_n, dtype=float)))
    magnitude = params.mu * normal * tanh(params.gamma * speed) + params.beta * speed
    return (-magnitude / speed) * v_r


def update_episodes(
    episodes: dict[tuple[int, int], ContactEpisode],
    overlaps: dict[tuple[int, int], tuple],
    t: float,
    bodies,
) -> dict[tuple[int, int], ContactEpisode]:
    """Reconcile the episode table with the overlaps seen at a step boundary.

    overlaps maps ordered pairs to raw (v, c, s_d) quantities, or None for a
    broad-phase pair with no reportable overlap (treated as absent). A new
    overlapping pair opens an episode (freezing the clamped approach speed
    and initializing the filter at the current volume); a separated pair's
    episode is dropped, so any later contact starts a fresh transient.
    """
    for pair, quantities in overlaps.items():
        if quantities is None:
            continue
        if pair in episodes:
            continue
        v, c, s_d = quantities
        norm = float(np.linalg.norm(s_d))
        if norm < 1e-12:  # direction-indeterminate first contact
            dv = EPS_APPROACH_SPEED
        else:
            dv = relative_contact_speed(bodies[pair[0]], bodies[pair[1]], c, s_d / norm)
        episodes[pair] = ContactEpisode(
            pair=pair,
            t_c=t,
            dv_c0=max(dv, EPS_APPROACH_SPEED),
            filter=init_filter(v),
        )
    for pair in [p for p in episodes if overlaps.get(p) is None]:
        episodes[pair].active = False
        del episodes[pair]
    return episodes
