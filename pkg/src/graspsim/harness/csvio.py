"""CSV emission for runs and sweeps.

RFC-4180 style with '.' decimal separator and a header row. Floats are
written with repr (shortest round-trip form) so identical runs produce
byte-identical files.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from ..scene import MetricsSample, World, eligible_pairs

SUMMARY_COLUMNS = [
    "name",
    "status",
    "message",
    "t_final",
    "duration",
    "accepted",
    "rejected",
    "rhs_evals",
    "warnings",
    "seed",
]


def _fmt(x) -> str:
    return repr(float(x))


def timeseries_columns(world: World) -> list[str]:
    """Fixed column set for one world: time, pair metrics, body states."""
    names = [b.name for b in world.bodies]
    cols = ["t"]
    for a, b in eligible_pairs(world):
        tag = f"{names[a]}_{names[b]}"
        cols += [f"f_{tag}", f"v_{tag}", f"vf_dot_{tag}", f"delta_eff_{tag}"]
    for n in names:
        cols += [
            f"px_{n}", f"py_{n}", f"pz_{n}",
            f"qw_{n}", f"qx_{n}", f"qy_{n}", f"qz_{n}",
            f"vx_{n}", f"vy_{n}", f"vz_{n}",
            f"wx_{n}", f"wy_{n}", f"wz_{n}",
            f"ke_{n}",
        ]
    if world.energy_reference is not None:
        cols.append("ke_ratio")
    return cols


def write_timeseries(path, world: World, samples: list[MetricsSample]) -> None:
    """One row per metrics sample; pairs not in contact read 0 (gain 1)."""
    pairs = eligible_pairs(world)
    with_ratio = world.energy_reference is not None
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(timeseries_columns(world))
        for s in samples:
            row = [_fmt(s.t)]
            for pair in pairs:
                m = s.pairs.get(pair)
                if m is None:
                    row += ["0.0", "0.0", "0.0", "1.0"]
                else:
                    row += [_fmt(m.force), _fmt(m.volume), _fmt(m.v_f_dot), _fmt(m.delta_eff)]
            for b in s.bodies:
                row += [_fmt(x) for x in b.position]
                row += [_fmt(x) for x in b.quaternion]
                row += [_fmt(x) for x in b.lin_vel]
                row += [_fmt(x) for x in b.ang_vel_body]
                row.append(_fmt(b.kinetic_energy))
            if with_ratio:
                row.append(_fmt(s.ke_ratio))
            writer.writerow(row)


def write_summary(path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for r in rows:
            writer.writerow([str(r.get(c, "")) for c in SUMMARY_COLUMNS])


def write_sweep(path, param_names: list[str], rows: list[dict]) -> None:
    """One row per grid cell: coordinates, ratio aggregates, failure flag."""
    header = list(param_names) + ["mean_ke_ratio", "max_ke_ratio", "failed"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            row = [_fmt(r["coords"][p]) for p in param_names]
            row += [_fmt(r["mean"]), _fmt(r["max"]), "true" if r["failed"] else "false"]
            writer.writerow(row)


def aggregate_ratios(samples: list[MetricsSample]) -> tuple[float, float]:
    """(mean, max) kinetic-energy ratio over a run.

    The mean is energy-weighted (sum of measured over sum of expected), which
    stays finite across the zero crossings of the prescribed velocity. The
    max is taken where the expected energy is at least 5% of its peak, for
    the same reason.
    """
    if not samples or samples[0].ke_expected is None:
        return math.nan, math.nan
    expected = np.array([s.ke_expected for s in samples], dtype=float)
    measured = np.array([s.ke_measured for s in samples], dtype=float)
    total = expected.sum()
    if total <= 0.0:
        return math.nan, math.nan
    mask = expected >= 0.05 * expected.max()
    return measured.sum() / total, float((measured[mask] / expected[mask]).max())
