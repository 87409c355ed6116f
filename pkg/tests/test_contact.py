"""Contact-law tests: derivative filter, transient gain, reaction wrench,
regularized friction, and episode bookkeeping."""

from math import exp, pi, sqrt, tanh
from types import SimpleNamespace

import numpy as np
import pytest

from graspsim.contact import (
    EPS_APPROACH_SPEED,
    ContactEpisode,
    ContactParams,
    FilterState,
    FrictionParams,
    friction_force,
    filter_rhs,
    init_filter,
    reaction_wrench,
    relative_contact_speed,
    transient_gain,
    update_episodes,
)
from graspsim.dynamics import rk45_integrate


def _episode(t_c=0.0, dv=0.1, v0=0.0):
    return ContactEpisode(pair=(0, 1), t_c=t_c, dv_c0=dv, filter=init_filter(v0))


def test_params_validation():
    with pytest.raises(ValueError):
        ContactParams(g1=0.0)
    with pytest.raises(ValueError):
        ContactParams(d_t=-1e-3)
    with pytest.raises(ValueError):
        ContactParams(g2=-1.0)
    # zero damping / zero transient are legitimate operating points
    ContactParams(g2=0.0, g_i=0.0, g_t=0.0)
    with pytest.raises(ValueError):
        FrictionParams(mu=-0.1)
    with pytest.raises(ValueError):
        FrictionParams(gamma=0.0)
    FrictionParams(mu=0.0, beta=0.0)


def test_filter_constant_input_is_fixed_point():
    state = FilterState(v_f=3.7e-4, v_f_dot=0.0)
    dvf, dvfd = filter_rhs(state, 3.7e-4, zeta=1.0, omega_n=2 * pi * 500.0)
    assert dvf == 0.0
    assert dvfd == 0.0


def test_filter_tracks_ramp_slope():
    """After the transient the rate state converges to the input slope."""
    zeta, omega_n = 1.0, 2 * pi * 500.0
    slope = 3.7e-4

    def rhs(t, y):
        return np.array(filter_rhs(FilterState(y[0], y[1]), slope * t, zeta, omega_n))

    res = rk45_integrate(rhs, np.zeros(2), 0.0, 0.01, rel_tol=1e-9, abs_tol=1e-15, h_max=1e-4)
    assert res.ys[-1][1] == pytest.approx(slope, rel=0.02)
    # critically damped: the filtered value lags the ramp by 2 zeta / omega_n
    lag = 2 * zeta / omega_n
    assert res.ys[-1][0] == pytest.approx(slope * (0.01 - lag), rel=1e-3)


def test_filter_step_response_no_overshoot():
    def rhs(t, y):
        return np.array(filter_rhs(FilterState(y[0], y[1]), 1.0, 1.0, 2 * pi * 500.0))

    res = rk45_integrate(rhs, np.zeros(2), 0.0, 0.01, h_max=1e-4)
    values = np.array([y[0] for y in res.ys])
    assert values.max() <= 1.0 + 1e-9
    assert np.all(np.diff(values) >= -1e-12)


def test_init_filter():
    state = init_filter(2.5e-6)
    assert state.v_f == 2.5e-6
    assert state.v_f_dot == 0.0
    with pytest.raises(ValueError):
        init_filter(-1e-9)


def test_transient_gain_peak_closed_form():
    """At t_peak the pulse height is exactly i_v / (sqrt(pi) d_v)."""
    params = ContactParams(g_i=250.0, d_t=0.002, g_t=1.0)
    episode = _episode(t_c=0.3, dv=0.1)
    m_a = m_b = 0.2
    i_v = params.g_i * (m_a + m_b) * episode.dv_c0
    d_v = params.d_t / episode.dv_c0
    t_peak = episode.t_c + params.g_t * d_v
    gain = transient_gain(t_peak, episode, params, m_a, m_b)
    assert gain - 1.0 == pytest.approx(i_v / (sqrt(pi) * d_v), rel=1e-12)
    assert gain == pytest.approx(283.0947917738781, rel=1e-12)


def test_transient_gain_shape():
    params = ContactParams(g_i=250.0, d_t=0.002, g_t=1.0)
    episode = _episode(t_c=0.3, dv=0.1)
    d_v = params.d_t / episode.dv_c0
    t_peak = episode.t_c + d_v
    left = transient_gain(t_peak - 0.5 * d_v, episode, params, 0.2, 0.2)
    right = transient_gain(t_peak + 0.5 * d_v, episode, params, 0.2, 0.2)
    assert left == pytest.approx(right, rel=1e-12)
    peak = transient_gain(t_peak, episode, params, 0.2, 0.2)
    assert left < peak
    # ten widths later the pulse is numerically dead
    assert transient_gain(t_peak + 10 * d_v, episode, params, 0.2, 0.2) == pytest.approx(
        1.0, abs=1e-12
    )


def test_transient_gain_slow_contact_is_nearly_unity():
    """A first contact at the clamped approach-speed floor carries almost no
    impact energy, so the pulse must be invisible next to the +1 baseline."""
    params = ContactParams(g_i=250.0, d_t=0.002, g_t=1.0)
    episode = _episode(t_c=0.0, dv=EPS_APPROACH_SPEED)
    d_v = params.d_t / EPS_APPROACH_SPEED
    peak = transient_gain(params.g_t * d_v, episode, params, 0.2, 0.2)
    expected = 1.0 + 250.0 * 0.4 * EPS_APPROACH_SPEED**2 / (sqrt(pi) * 0.002)
    assert peak == pytest.approx(expected, rel=1e-12)
    assert peak < 1.0 + 1e-3


def test_reaction_wrench_worked_example():
    params = ContactParams(g1=1.0e6, g2=0.0)
    overlap = SimpleNamespace(
        v=1.0e-4, c=np.array([0.0, 0.1, 0.0]), s_n=np.array([-1.0, 0.0, 0.0])
    )
    wrench = reaction_wrench(overlap, FilterState(1e-4, 0.0), 1.0, params, np.zeros(3))
    assert np.allclose(wrench.force, [-100.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(wrench.torque, [0.0, 0.0, 10.0], atol=1e-12)


def test_reaction_wrench_scales_with_gain_and_rate():
    params = ContactParams(g1=1.0e6, g2=1.0e4)
    overlap = SimpleNamespace(v=1.0e-4, c=np.zeros(3), s_n=np.array([0.0, 0.0, 1.0]))
    base = reaction_wrench(overlap, FilterState(1e-4, 1e-3), 1.0, params, np.zeros(3))
    assert base.force[2] == pytest.approx(1e6 * 1e-4 + 1e4 * 1e-3, rel=1e-12)
    boosted = reaction_wrench(overlap, FilterState(1e-4, 1e-3), 3.0, params, np.zeros(3))
    assert np.allclose(boosted.force, 3.0 * base.force, rtol=1e-12)


def test_reaction_wrench_never_pulls():
    # strong negative filtered rate would make the contact adhesive
    params = ContactParams(g1=1.0e6, g2=1.0e4)
    overlap = SimpleNamespace(v=1.0e-6, c=np.zeros(3), s_n=np.array([0.0, 0.0, 1.0]))
    wrench = reaction_wrench(overlap, FilterState(1e-6, -1.0), 1.0, params, np.zeros(3))
    assert np.all(wrench.force == 0.0)
    assert np.all(wrench.torque == 0.0)


def test_friction_worked_example():
    params = FrictionParams(mu=0.2, beta=0.2, gamma=1.0)
    f = friction_force(np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]), params)
    assert f[0] == pytest.approx(-(0.2 * tanh(1.0) + 0.2), rel=1e-14)
    assert f[1] == 0.0 and f[2] == 0.0


def test_friction_opposes_motion_and_saturates(rng):
    params = FrictionParams(mu=0.3, beta=0.0, gamma=100.0)
    f_n = np.array([0.0, 0.0, 10.0])
    for _ in range(20):
        v = rng.normal(size=3)
        f = friction_force(f_n, v, params)
        # exactly antiparallel
        assert np.allclose(np.cross(f, v), 0.0, atol=1e-12)
        assert f @ v < 0.0
        assert np.linalg.norm(f) <= 0.3 * 10.0 + 1e-12
    fast = friction_force(f_n, np.array([10.0, 0.0, 0.0]), params)
    assert np.linalg.norm(fast) == pytest.approx(3.0, rel=1e-6)


def test_friction_sticks_below_threshold():
    params = FrictionParams()
    f = friction_force(np.array([0.0, 0.0, 100.0]), np.array([1e-10, 0.0, 0.0]), params)
    assert np.all(f == 0.0)


def test_relative_contact_speed_sign_convention():
    a = SimpleNamespace(
        position=np.zeros(3),
        lin_vel=np.zeros(3),
        angular_velocity_world=lambda: np.zeros(3),
    )
    b = SimpleNamespace(
        position=np.array([1.0, 0.0, 0.0]),
        lin_vel=np.array([-1.0, 0.0, 0.0]),
        angular_velocity_world=lambda: np.zeros(3),
    )
    c = np.array([0.5, 0.0, 0.0])
    s_n = np.array([-1.0, 0.0, 0.0])  # pushing a away from b
    assert relative_contact_speed(a, b, c, s_n) == pytest.approx(1.0)
    # receding contact flips the sign
    b.lin_vel = np.array([1.0, 0.0, 0.0])
    assert relative_contact_speed(a, b, c, s_n) == pytest.approx(-1.0)


def test_relative_contact_speed_includes_rotation():
    a = SimpleNamespace(
        position=np.zeros(3),
        lin_vel=np.zeros(3),
        angular_velocity_world=lambda: np.array([0.0, 0.0, 2.0]),
    )
    b = SimpleNamespace(
        position=np.array([1.0, 0.0, 0.0]),
        lin_vel=np.zeros(3),
        angular_velocity_world=lambda: np.zeros(3),
    )
    # a's surface point at the contact moves +y with speed 2*0.5
    speed = relative_contact_speed(a, b, np.array([0.5, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    assert speed == pytest.approx(-1.0)


def test_episode_construction_rules():
    with pytest.raises(ValueError):
        ContactEpisode(pair=(1, 0), t_c=0.0, dv_c0=0.1, filter=init_filter(0.0))
    with pytest.raises(ValueError):
        ContactEpisode(pair=(0, 1), t_c=0.0, dv_c0=1e-6, filter=init_filter(0.0))


def test_update_episodes_lifecycle():
    body = SimpleNamespace(
        position=np.zeros(3),
        lin_vel=np.zeros(3),
        angular_velocity_world=lambda: np.zeros(3),
    )
    mover = SimpleNamespace(
        position=np.array([1.0, 0.0, 0.0]),
        lin_vel=np.array([-0.25, 0.0, 0.0]),
        angular_velocity_world=lambda: np.zeros(3),
    )
    bodies = [body, mover]
    quantities = (2e-6, np.array([0.5, 0.0, 0.0]), np.array([-1.0, 0.0, 0.0]))

    episodes = update_episodes({}, {(0, 1): quantities}, 0.125, bodies)
    assert (0, 1) in episodes
    first = episodes[(0, 1)]
    assert first.t_c == 0.125
    assert first.dv_c0 == pytest.approx(0.25)
    assert first.filter.v_f == 2e-6

    # still overlapping: the same episode object persists
    episodes = update_episodes(episodes, {(0, 1): quantities}, 0.25, bodies)
    assert episodes[(0, 1)] is first

    # separation drops the episode; re-contact opens a fresh one
    episodes = update_episodes(episodes, {(0, 1): None}, 0.375, bodies)
    assert (0, 1) not in episodes
    episodes = update_episodes(episodes, {(0, 1): quantities}, 0.5, bodies)
    assert episodes[(0, 1)].t_c == 0.5
    assert episodes[(0, 1)] is not first


def test_update_episodes_clamps_slow_approach():
    resting = SimpleNamespace(
        position=np.zeros(3),
        lin_vel=np.zeros(3),
        angular_velocity_world=lambda: np.zeros(3),
    )
    bodies = [resting, resting]
    quantities = (1e-7, np.zeros(3), np.array([0.0, 0.0, 1.0]))
    episodes = update_episodes({}, {(0, 1): quantities}, 0.0, bodies)
    assert episodes[(0, 1)].dv_c0 == EPS_APPROACH_SPEED
