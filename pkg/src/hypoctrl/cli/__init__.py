from hypoctrl.cli._experiment_config import (
    ExperimentConfig,
    parse_mapping,
    parse_settings,
    read_config_file,
    resolve_config,
)
from hypoctrl.cli._io import read_observations, trajectory_frame, write_trajectory_csv

__all__ = [
    "ExperimentConfig",
    "parse_mapping",
    "parse_settings",
    "read_config_file",
    "read_observations",
    "resolve_config",
    "trajectory_frame",
    "write_trajectory_csv",
]
