#!/usr/bin/env python3
"""Benchmark the overlap-quantity kernels: pure Python vs compiled.

Generates a fixed batch of random posed mesh pairs, runs both backends over
the identical batch, checks that they agree, and reports per-call time and
speedup. The overlap kernel dominates simulation cost (it runs inside every
integrator stage), so this is the number that decides whether the compiled
extension pays for itself.

Usage:
    python benchmarks/bench_overlap.py --pairs 300 --repeat 5 --shape both
"""

import argparse
import time

import numpy as np

from graspsim.geometry import CLIP_EPS, MIN_VOLUME, Pose, cuboid, icosphere
from graspsim.geometry import _overlap_py
from graspsim.geometry.overlap import _world_geometry
from graspsim.geometry.pose import quat_from_axis_angle

try:
    from graspsim.geometry import _overlap_cy
except ImportError:
    _overlap_cy = None


def make_batch(shape: str, pairs: int, rng) -> list:
    if shape == "cuboid":
        mesh_a = cuboid((0.3, 0.2, 0.4))
        mesh_b = cuboid((0.25, 0.35, 0.2))
    else:
        mesh_a = icosphere(0.05, 2)
        mesh_b = cuboid((0.1, 0.1, 0.1))
    scale = 0.05 if shape == "cuboid" else 0.02
    batch = []
    for _ in range(pairs):
        pa = Pose(
            position=rng.uniform(-scale, scale, 3),
            quaternion=quat_from_axis_angle(rng.normal(size=3), rng.uniform(-np.pi, np.pi)),
        )
        pb = Pose(
            position=rng.uniform(-scale, scale, 3),
            quaternion=quat_from_axis_angle(rng.normal(size=3), rng.uniform(-np.pi, np.pi)),
        )
        va, pna, pda = _world_geometry(mesh_a, pa)
        vb, pnb, pdb = _world_geometry(mesh_b, pb)
        batch.append(
            (va, mesh_a.triangles, pna, pda, vb, mesh_b.triangles, pnb, pdb, CLIP_EPS, MIN_VOLUME, 1)
        )
    return batch


def run_backend(fn, batch, repeat: int):
    best = float("inf")
    outputs = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        outputs = [fn(*args) for args in batch]
        best = min(best, time.perf_counter() - t0)
    return best, outputs


def check_agreement(py_out, cy_out) -> float:
    worst = 0.0
    for a, b in zip(py_out, cy_out):
        if a is None or b is None:
            assert a is None and b is None, "backends disagree on contact existence"
            continue
        a, b = np.array(a), np.array(b)
        scale = max(1e-300, float(np.abs(a).max()))
        worst = max(worst, float(np.abs(a - b).max()) / scale)
    return worst


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pairs", type=int, default=300, help="posed pairs per batch")
    parser.add_argument("--repeat", type=int, default=5, help="timed repetitions, best kept")
    parser.add_argument(
        "--shape", choices=("cuboid", "sphere", "both"), default="both", help="mesh kinds"
    )
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if _overlap_cy is None:
        print("note: compiled kernel not built, timing pure Python only")

    shapes = ("cuboid", "sphere") if args.shape == "both" else (args.shape,)
    rng = np.random.default_rng(args.seed)
    print(f"{'batch':<10} {'python':>12} {'cython':>12} {'speedup':>9}   (per call)")
    for shape in shapes:
        batch = make_batch(shape, args.pairs, rng)
        hits = sum(
            1 for a in [_overlap_py.overlap_quantities(*b) for b in batch] if a is not None
        )
        t_py, out_py = run_backend(_overlap_py.overlap_quantities, batch, args.repeat)
        per_py = 1e6 * t_py / len(batch)
        if _overlap_cy is not None:
            t_cy, out_cy = run_backend(_overlap_cy.overlap_quantities, batch, args.repeat)
            per_cy = 1e6 * t_cy / len(batch)
            worst = check_agreement(out_py, out_cy)
            print(
                f"{shape:<10} {per_py:>9.1f} us {per_cy:>9.1f} us {t_py / t_cy:>8.1f}x"
                f"   ({hits}/{len(batch)} in contact, max rel diff {worst:.1e})"
            )
        else:
            print(f"{shape:<10} {per_py:>9.1f} us {'-':>12} {'-':>9}   ({hits}/{len(batch)} in contact)")


if __name__ == "__main__":
    main()
