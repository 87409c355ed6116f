"""World assembly and stepping tests: force pairing, invariants of a head-on
collision, joint constraints, and the energy-ratio bookkeeping."""

import numpy as np
import pytest

from graspsim.contact import ContactParams, FrictionParams, update_episodes
from graspsim.dynamics import BodyKind, IntegrationError, RigidBody
from graspsim.geometry import cuboid, mesh_inertia, quantities_raw
from graspsim.scene import (
    SimOptions,
    SinusoidalTrajectory,
    StateLayout,
    World,
    assemble_efforts,
    detect_pairs,
    eligible_pairs,
    expected_energy,
    kinetic_energy_ratio,
    pack_state,
    step,
)


def _cube_body(name, side=0.04, mass=0.2, **kw):
    mesh = cuboid((side, side, side))
    return RigidBody(name, mesh, mass, mesh_inertia(mesh, mass), **kw)


def _head_on_world():
    """Two 0.2 kg cubes closing at 0.1 m/s, frictionless, no gravity.

    The transient gain is off (g_i = 0) so every force the pair exchanges is
    dissipative; nothing in this world can create energy.
    """
    world = World(
        contact_params=ContactParams(g1=7.4e5, g2=2.5e3, g_i=0.0),
        friction_params=FrictionParams(mu=0.0, beta=0.0),
        gravity=np.zeros(3),
        options=SimOptions(),
    )
    world.add_body(_cube_body("a", position=[-0.021, 0, 0], lin_vel=[0.05, 0, 0]))
    world.add_body(_cube_body("b", position=[0.021, 0, 0], lin_vel=[-0.05, 0, 0]))
    return world


def test_eligible_pairs_skip_static_static():
    world = World()
    world.add_body(_cube_body("s1", kind=BodyKind.STATIC))
    world.add_body(_cube_body("s2", kind=BodyKind.STATIC, position=[0.01, 0, 0]))
    world.add_body(_cube_body("d", position=[0.0, 0.01, 0.0]))
    assert eligible_pairs(world) == [(0, 2), (1, 2)]
    # both static-dynamic pairs overlap here, so the broad phase keeps them
    assert detect_pairs(world) == [(0, 2), (1, 2)]


def test_newton_pairs_are_exactly_opposite():
    world = _head_on_world()
    world.bodies[0].position = np.array([-0.019, 0.0, 0.0])
    world.bodies[1].position = np.array([0.019, 0.001, 0.0005])
    a, b = world.bodies
    overlaps = {(0, 1): quantities_raw(a.shape, a.pose(), b.shape, b.pose(), mode="face_normal")}
    update_episodes(world.episodes, overlaps, 0.0, world.bodies)
    layout = StateLayout.of(world)
    state = pack_state(world, layout)
    wrenches, _ = assemble_efforts(world, state, 0.0)
    assert np.array_equal(wrenches[0].force, -wrenches[1].force)
    assert np.any(wrenches[0].force != 0.0)


def test_free_fall():
    world = World()
    world.add_body(_cube_body("drop", position=[0.0, 0.0, 1.0]))
    samples = step(world, 0.1)
    final = samples[-1].bodies[0]
    assert final.lin_vel[2] == pytest.approx(-0.981, abs=1e-9)
    assert final.position[2] == pytest.approx(1.0 - 0.5 * 9.81 * 0.01, abs=1e-9)
    assert np.allclose(final.quaternion, [1, 0, 0, 0])


def test_head_on_collision_invariants():
    world = _head_on_world()
    samples = step(world, 0.5)
    assert len(samples) == 501

    momentum = np.array(
        [0.2 * s.bodies[0].lin_vel + 0.2 * s.bodies[1].lin_vel for s in samples]
    )
    assert np.abs(momentum).max() < 1e-15

    ke = np.array([s.bodies[0].kinetic_energy + s.bodies[1].kinetic_energy for s in samples])
    assert ke[0] == pytest.approx(5.0e-4, rel=1e-12)
    assert ke.max() <= ke[0] * (1 + 1e-12)
    # frozen restitution of this parameter set (damping eats ~59% of the energy)
    assert ke[-1] / ke[0] == pytest.approx(0.4095352140653925, rel=1e-6)

    va = samples[-1].bodies[0].lin_vel
    vb = samples[-1].bodies[1].lin_vel
    assert np.allclose(va, -vb, atol=1e-15)
    assert va[0] == pytest.approx(-0.03177695610389443, rel=1e-6)

    # bodies separated and the episode table is empty again
    gap = samples[-1].bodies[1].position[0] - samples[-1].bodies[0].position[0] - 0.04
    assert gap > 0.01
    assert world.episodes == {}
    stats = world.stats
    assert stats["rhs_evals"] == 7 * (stats["accepted"] + stats["rejected"])


def test_stepping_is_deterministic():
    runs = []
    for _ in range(2):
        samples = step(_head_on_world(), 0.2)
        runs.append(
            np.array([np.concatenate([s.bodies[0].position, s.bodies[0].lin_vel]) for s in samples])
        )
    assert np.array_equal(runs[0], runs[1])


def test_prismatic_body_stays_on_axis():
    world = World(gravity=np.zeros(3))
    world.add_body(
        _cube_body(
            "slider",
            kind=BodyKind.PRISMATIC,
            axis=[0.0, 1.0, 0.0],
            position=[0.0, -0.1, 0.0],
        )
    )
    world.applied_forces[0] = np.array([2.0, 5.0, -1.0])  # off-axis parts must be ignored
    samples = step(world, 0.2)
    final = samples[-1].bodies[0]
    assert final.position[0] == 0.0
    assert final.position[2] == 0.0
    # y follows 0.5*(F_y/m)*t^2 for the projected component
    assert final.position[1] == pytest.approx(-0.1 + 0.5 * (5.0 / 0.2) * 0.04, rel=1e-9)
    assert np.allclose(final.quaternion, [1, 0, 0, 0])


def test_kinematic_body_follows_trajectory():
    traj = SinusoidalTrajectory(
        origin=np.array([0.0, -0.07, 0.0]), axis=[0, 1, 0], amplitude=0.005, frequency=2.0
    )
    world = World(gravity=np.zeros(3))
    world.add_body(_cube_body("finger", kind=BodyKind.KINEMATIC, trajectory=traj))
    samples = step(world, 0.3)
    for s in samples[:: len(samples) // 10]:
        assert np.allclose(s.bodies[0].position, traj.position(s.t), atol=1e-12)
        assert np.allclose(s.bodies[0].lin_vel, traj.velocity(s.t), atol=1e-12)


def test_trajectory_phase_and_axis_normalization():
    traj = SinusoidalTrajectory(
        origin=np.zeros(3), axis=[0, 0, 2], amplitude=0.01, frequency=1.0, phase=np.pi / 2
    )
    assert np.allclose(traj.axis, [0, 0, 1])
    assert traj.position(0.0)[2] == pytest.approx(0.01)
    assert traj.velocity(0.0)[2] == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        SinusoidalTrajectory(origin=np.zeros(3), axis=[0, 0, 0], amplitude=1.0, frequency=1.0)


def test_kinetic_energy_ratio_conventions():
    assert kinetic_energy_ratio(0.0, 0.0) == 1.0
    assert kinetic_energy_ratio(1e-30, 1e-30) == 1.0
    assert kinetic_energy_ratio(1e-3, 0.0) == float("inf")
    assert kinetic_energy_ratio(2.0, 1.0) == 2.0


def test_expected_energy_value():
    traj = SinusoidalTrajectory(origin=np.zeros(3), axis=[0, 1, 0], amplitude=0.05, frequency=1.0)
    # 0.5 * 0.2 * (0.05 * 2 pi)^2 at the speed peak
    assert expected_energy(traj, 0.2, 0.0) == pytest.approx(0.009869604401089358, rel=1e-12)
    assert expected_energy(traj, 0.2, 0.25) == pytest.approx(0.0, abs=1e-18)


def test_energy_reference_populates_samples():
    from graspsim.scene import EnergyReference

    traj = SinusoidalTrajectory(
        origin=np.array([0.0, -0.07, 0.0]), axis=[0, 1, 0], amplitude=0.005, frequency=2.0
    )
    world = World(gravity=np.zeros(3))
    obj = world.add_body(_cube_body("object"))
    world.add_body(_cube_body("finger", kind=BodyKind.KINEMATIC, trajectory=traj, position=[0, -0.07, 0]))
    world.energy_reference = EnergyReference(body_id=obj, trajectory=traj)
    samples = step(world, 0.05)
    for s in samples:
        assert s.ke_expected is not None
        assert s.ke_measured is not None
        assert s.ke_ratio is not None
    # the free object never moves, the reference does
    assert samples[10].ke_measured == 0.0
    assert samples[10].ke_expected > 0.0
    assert samples[10].ke_ratio == 0.0


def test_integration_failure_carries_partial_samples(monkeypatch):
    import graspsim.scene as scene_mod

    def explode(*args, **kwargs):
        raise IntegrationError(0.0125, "step size underflow (test)")

    monkeypatch.setattr(scene_mod, "rk45_integrate", explode)
    world = World()
    world.add_body(_cube_body("drop", position=[0, 0, 1.0]))
    with pytest.raises(IntegrationError) as info:
        step(world, 0.1)
    assert info.value.t == 0.0125
    # the initial boundary sample survives for post-mortem output
    assert len(info.value.samples) == 1
    assert info.value.samples[0].t == 0.0
