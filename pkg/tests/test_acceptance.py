"""End-to-end acceptance checks.

Each test measures one shipped behavior against an independent reference
(interval arithmetic, Monte-Carlo sampling, closed forms, or an analytic
trajectory), records a PASS/FAIL line for the terminal summary, and then
asserts with the stated tolerance. Scenario-level checks drive the real CLI
entry point and read back the CSV artifacts, exactly as a user would.
"""

import csv
import time
from math import exp, pi, sqrt

import numpy as np
import pytest

from conftest import read_csv_columns, record_criterion, scenario_path
from graspsim.contact import ContactParams, FilterState, filter_rhs, init_filter, transient_gain
from graspsim.contact import ContactEpisode
from graspsim.dynamics import renormalize, rk45_integrate, quaternion_rate
from graspsim.geometry import (
    Pose,
    cuboid,
    icosphere,
    overlap_quantities,
    quantities_raw,
    quat_rotate,
)
from graspsim.harness import (
    analytic_wall_trajectory,
    interval_box_volume,
    load_config,
    monte_carlo_overlap_volume,
)
from graspsim.harness.cli import main


def _run_cli(args):
    return main(args)


def test_geometry_against_interval_oracle(rng):
    """200 random axis-aligned cuboid pairs, 1e-9 relative, under 5 s."""
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        ea = rng.uniform(0.2, 1.0, 3)
        eb = rng.uniform(0.2, 1.0, 3)
        off = rng.uniform(-0.05, 0.05, 3)
        got = quantities_raw(cuboid(ea), Pose(), cuboid(eb), Pose(position=off))
        want = interval_box_volume(-ea / 2, ea / 2, off - eb / 2, off + eb / 2)
        worst = max(worst, abs(got[0] - want) / want)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and elapsed < 5.0
    record_criterion(
        1,
        "cuboid overlap vs interval oracle",
        ok,
        f"max rel err {worst:.2e} (tol 1e-9), {elapsed:.2f} s (budget 5 s)",
    )
    assert worst < 1e-9
    assert elapsed < 5.0


def test_sphere_in_cube_against_monte_carlo():
    """Volume within 2% of a 1e6-sample estimate; direction within 2 degrees
    of the penetrated cube face's normal."""
    sphere = icosphere(0.05, 2)
    cube = cuboid((0.1, 0.1, 0.1))
    pose_s = Pose(position=np.array([0.0, 0.0, 0.09]))  # 10 mm into the top face
    v, c, s_d, s_n = overlap_quantities(sphere, pose_s, cube, Pose(), mode="face_normal")
    mc = monte_carlo_overlap_volume(sphere, pose_s, cube, Pose(), n=1_000_000)
    rel = abs(v - mc) / mc
    angle = float(np.degrees(np.arccos(np.clip(s_n @ np.array([0.0, 0.0, 1.0]), -1.0, 1.0))))
    ok = rel < 0.02 and angle < 2.0
    record_criterion(
        2,
        "icosphere-in-cube overlap vs Monte-Carlo",
        ok,
        f"rel err {rel:.4f} (tol 0.02), direction off by {angle:.3f} deg (tol 2)",
    )
    assert rel < 0.02
    assert angle < 2.0


def test_volume_rate_filter():
    """Ramp input recovers its slope within 2%; constant input is an exact
    fixed point."""
    zeta, omega_n = 1.0, 2 * pi * 500.0
    slope = 3.7e-4

    def rhs(t, y):
        return np.array(filter_rhs(FilterState(y[0], y[1]), slope * t, zeta, omega_n))

    res = rk45_integrate(rhs, np.zeros(2), 0.0, 0.01, rel_tol=1e-9, abs_tol=1e-15, h_max=1e-4)
    slope_err = abs(res.ys[-1][1] - slope) / slope

    fixed = filter_rhs(FilterState(2.5e-6, 0.0), 2.5e-6, zeta, omega_n)
    ok = slope_err < 0.02 and fixed == (0.0, 0.0)
    record_criterion(
        3,
        "derivative filter",
        ok,
        f"ramp slope rel err {slope_err:.2e} (tol 0.02), constant fixed point exact: {fixed == (0.0, 0.0)}",
    )
    assert slope_err < 0.02
    assert fixed == (0.0, 0.0)


def test_transient_gain_peak():
    """Peak pulse height i_v / (sqrt(pi) d_v) to 1e-12 relative with the
    baseline parameters (g_i = 250, d_t = 2 mm, two 0.2 kg bodies)."""
    params = ContactParams()  # g_i = 250, d_t = 0.002, g_t = 1
    episode = ContactEpisode(pair=(0, 1), t_c=0.0, dv_c0=0.1, filter=init_filter(0.0))
    i_v = params.g_i * 0.4 * episode.dv_c0
    d_v = params.d_t / episode.dv_c0
    gain = transient_gain(params.g_t * d_v, episode, params, 0.2, 0.2)
    rel = abs((gain - 1.0) - i_v / (sqrt(pi) * d_v)) / (i_v / (sqrt(pi) * d_v))
    ok = rel < 1e-12
    record_criterion(
        4, "impact transient peak", ok, f"closed-form rel err {rel:.2e} (tol 1e-12)"
    )
    assert rel < 1e-12


def test_integrator_accuracy_and_conservation():
    """Scalar decay lands within 1e-7 of 1/e; a torque-free triaxial tumble
    keeps world angular momentum and rotational energy to 1e-6 over 10 s."""
    res = rk45_integrate(lambda t, y: -y, np.array([1.0]), 0.0, 1.0)
    decay_err = abs(res.ys[-1][0] - exp(-1.0))

    inertia = np.diag([1.0, 2.0, 3.0])
    inv = np.linalg.inv(inertia)

    def rhs(t, y):
        q, w = y[:4], y[4:]
        return np.concatenate([quaternion_rate(q, w), inv @ (-np.cross(w, inertia @ w))])

    def post(t, y):
        y[:4] = renormalize(y[:4])

    y0 = np.concatenate([[1.0, 0.0, 0.0, 0.0], [0.3, 1.0, 0.05]])
    tumble = rk45_integrate(
        rhs, y0, 0.0, 10.0, rel_tol=1e-9, abs_tol=1e-12, h_max=1e-2, post_accept=post
    )
    L0 = quat_rotate(y0[:4], inertia @ y0[4:])
    e0 = 0.5 * float(y0[4:] @ (inertia @ y0[4:]))
    dL = max(
        float(np.linalg.norm(quat_rotate(y[:4], inertia @ y[4:]) - L0))
        for y in tumble.ys[::25]
    ) / float(np.linalg.norm(L0))
    dE = max(abs(0.5 * float(y[4:] @ (inertia @ y[4:])) - e0) for y in tumble.ys[::25]) / e0

    ok = decay_err < 1e-7 and dL < 1e-6 and dE < 1e-6
    record_criterion(
        5,
        "integrator accuracy",
        ok,
        f"decay err {decay_err:.2e} (tol 1e-7), momentum drift {dL:.2e}, energy drift {dE:.2e} (tol 1e-6)",
    )
    assert decay_err < 1e-7
    assert dL < 1e-6
    assert dE < 1e-6


def test_wall_impact_against_reflection_oracle(tmp_path):
    """Simulated box vs ideal mirror reflection: position within 5 mm outside
    a 50 ms impact window, speed kept within 10%, penetration under 2 d_t,
    all inside a 30 s budget."""
    cfg = load_config(scenario_path("wall_impact"))
    box = next(b for b in cfg.bodies if b.name == "box")
    x0, v0 = float(box.position[0]), float(box.lin_vel[0])
    t0 = time.perf_counter()
    code = _run_cli(["run", "--config", scenario_path("wall_impact"), "--out", str(tmp_path)])
    elapsed = time.perf_counter() - t0
    assert code == 0
    cols = read_csv_columns(tmp_path / "wall_impact.csv")

    # box center at contact: wall face 1.05 minus the 0.05 half extent
    contact_x = 1.0
    t_hit = (contact_x - x0) / v0
    t = cols["t"]
    ref = np.array([analytic_wall_trajectory(x0, v0, contact_x, ti) for ti in t])
    outside = np.abs(t - t_hit) > 0.05
    pos_err = float(np.abs(cols["px_box"] - ref)[outside].max())

    speed_ratio = abs(cols["vx_box"][-1]) / v0
    penetration = float((cols["px_box"] + 0.05 - 1.05).max())

    ok = (
        pos_err < 0.005
        and abs(speed_ratio - 1.0) < 0.10
        and penetration <= 2 * cfg.contact.d_t
        and elapsed < 30.0
    )
    record_criterion(
        6,
        "wall impact vs reflection oracle",
        ok,
        f"pos err {pos_err * 1e3:.3f} mm (tol 5), speed ratio {speed_ratio:.4f} (tol 0.9..1.1), "
        f"penetration {penetration * 1e3:.3f} mm (tol {2e3 * cfg.contact.d_t:.0f}), {elapsed:.1f} s (budget 30 s)",
    )
    assert pos_err < 0.005
    assert abs(speed_ratio - 1.0) < 0.10
    assert penetration <= 2 * cfg.contact.d_t
    assert elapsed < 30.0


def test_resting_contact_force(tmp_path):
    """A 0.2 kg cube on a static floor carries its own weight: contact force
    within 2% of 1.962 N for the whole second half of the run."""
    code = _run_cli(["run", "--config", scenario_path("resting_cube"), "--out", str(tmp_path)])
    assert code == 0
    cols = read_csv_columns(tmp_path / "resting_cube.csv")
    steady = cols["f_floor_cube"][cols["t"] >= 1.0]
    worst = float(np.abs(steady - 1.962).max() / 1.962)
    ok = worst < 0.02
    record_criterion(
        7,
        "resting contact force",
        ok,
        f"force in [{steady.min():.6f}, {steady.max():.6f}] N vs 1.962 N, rel dev {worst:.2e} (tol 0.02)",
    )
    assert worst < 0.02


def test_grasp_stability(tmp_path):
    """Two prismatic fingers squeeze a cube for 10 s: the object must stay
    put relative to the gripper (under 5 mm), finger contact forces must
    settle within 5% of the 5 N drive, and the run must finish cleanly."""
    code = _run_cli(["run", "--config", scenario_path("grasp_cube"), "--out", str(tmp_path)])
    summary = list(csv.DictReader((tmp_path / "summary.csv").open()))
    cols = read_csv_columns(tmp_path / "grasp_cube.csv")

    gripper = np.stack(
        [
            0.5 * (cols[f"p{ax}_finger_l"] + cols[f"p{ax}_finger_r"])
            for ax in ("x", "y", "z")
        ],
        axis=1,
    )
    obj = np.stack([cols[f"p{ax}_object"] for ax in ("x", "y", "z")], axis=1)
    rel = obj - gripper
    settled = cols["t"] >= 1.0
    drift = rel[settled] - rel[settled][0]
    disp = float(np.linalg.norm(drift, axis=1).max())

    steady = cols["t"] >= 5.0
    f_l = cols["f_object_finger_l"][steady]
    f_r = cols["f_object_finger_r"][steady]
    force_dev = max(
        float(np.abs(f_l - 5.0).max()),
        float(np.abs(f_r - 5.0).max()),
    ) / 5.0

    ok = code == 0 and summary[0]["status"] == "ok" and disp < 0.005 and force_dev < 0.05
    record_criterion(
        8,
        "grasp stability",
        ok,
        f"object drift {disp * 1e3:.3f} mm (tol 5), finger force dev {force_dev:.2e} (tol 0.05), "
        f"status {summary[0]['status']}",
    )
    assert code == 0
    assert summary[0]["status"] == "ok"
    assert disp < 0.005
    assert force_dev < 0.05


def test_stiffness_sweep_energy_ratio(tmp_path):
    """On the 3x3 (g_i, g1) grid the baseline cell must track the prescribed
    motion (mean ratio in [0.8, 1.5]) while the stiffest cell pumps energy
    (its max ratio strictly exceeds the baseline's). Budget 10 min."""
    t0 = time.perf_counter()
    code = _run_cli(
        [
            "sweep",
            "--config",
            scenario_path("sweep_grasp"),
            "--out",
            str(tmp_path),
            "--jobs",
            "4",
        ]
    )
    elapsed = time.perf_counter() - t0
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert len(rows) == 9
    cells = {
        (float(r["contact.g_i"]), float(r["contact.g1"])): r for r in rows
    }
    base = cells[(250.0, 7.4e5)]
    stiff = cells[(25000.0, 7.4e7)]
    base_mean = float(base["mean_ke_ratio"])
    base_max = float(base["max_ke_ratio"])
    stiff_max = float(stiff["max_ke_ratio"])

    ok = (
        0.8 <= base_mean <= 1.5
        and stiff_max > base_max
        and base["failed"] == "false"
        and elapsed < 600.0
    )
    record_criterion(
        9,
        "stiffness sweep energy ratio",
        ok,
        f"baseline mean {base_mean:.3f} (tol 0.8..1.5), stiffest max {stiff_max:.3e} "
        f"> baseline max {base_max:.3f}, {elapsed:.0f} s (budget 600 s)",
    )
    assert 0.8 <= base_mean <= 1.5
    assert stiff_max > base_max
    assert base["failed"] == "false"
    assert elapsed < 600.0


def test_identical_runs_are_byte_identical(tmp_path):
    """Two invocations of the same scenario write identical CSV artifacts."""
    outputs = []
    for tag in ("first", "second"):
        out = tmp_path / tag
        code = _run_cli(["run", "--config", scenario_path("wall_impact"), "--out", str(out)])
        assert code == 0
        outputs.append(
            (
                (out / "wall_impact.csv").read_bytes(),
                (out / "summary.csv").read_bytes(),
            )
        )
    same = outputs[0] == outputs[1]
    record_criterion(
        10,
        "run determinism",
        same,
        f"timeseries and summary bytes equal: {same}",
    )
    assert same
