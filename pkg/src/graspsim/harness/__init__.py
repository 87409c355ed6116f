"""Scenario configuration, builders, oracles, and CSV output."""

from .config import BodySpec, ConfigError, ScenarioConfig, TrajectorySpec, load_config, parse_config
from .csvio import aggregate_ratios, timeseries_columns, write_summary, write_sweep, write_timeseries
from .oracles import interval_box_volume, monte_carlo_overlap_volume
from .scenarios import analytic_wall_trajectory, build_scenario, enumerate_sweep

__all__ = [
    "BodySpec",
    "ConfigError",
    "ScenarioConfig",
    "TrajectorySpec",
    "load_config",
    "parse_config",
    "aggregate_ratios",
    "timeseries_columns",
    "write_summary",
    "write_sweep",
    "write_timeseries",
    "interval_box_volume",
    "monte_carlo_overlap_volume",
    "analytic_wall_trajectory",
    "build_scenario",
    "enumerate_sweep",
]
