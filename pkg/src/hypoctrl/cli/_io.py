"""File Input/Output Module.

Trajectory CSV files (header ``t,z1..zd,y1..ydo``, one row per grid point),
observation CSV validation and JSON reports.
"""

import json
from pathlib import Path

import numpy as np
import pandas as pd

from hypoctrl.exceptions import DimensionError
from hypoctrl.simulation import Trajectory

TIME_COLUMN = "t"
STEP_RTOL = 1e-6


def trajectory_frame(trajectory: Trajectory) -> pd.DataFrame:
    """Trajectory as a DataFrame with columns t, z1..zd, y1..ydo."""
    d = trajectory.states.shape[1]
    d_o = trajectory.observations.shape[1]
    data = np.column_stack([trajectory.times, trajectory.states, trajectory.observations])
    columns = [TIME_COLUMN]
    columns += [f"z{k}" for k in range(1, d + 1)]
    columns += [f"y{k}" for k in range(1, d_o + 1)]
    return pd.DataFrame(data, columns=columns)


def write_trajectory_csv(trajectory: Trajectory, path: str | Path) -> Path:
    """Write a trajectory CSV, creating parent folders as needed."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trajectory_frame(trajectory).to_csv(path, index=False, float_format="%.17g")
    return path


def write_json(data: dict, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return path


def sidecar_path(path: str | Path) -> Path:
    """JSON file stored next to a CSV output (``run.csv`` -> ``run.json``)."""
    return Path(path).with_suffix(".json")


def _select_columns(frame: pd.DataFrame, obs_cols) -> list[str]:
    data_columns = [c for c in frame.columns if c != TIME_COLUMN]
    if obs_cols:
        selected = []
        for col in obs_cols:
            if col in data_columns:
                selected.append(col)
            elif str(col).isdigit() and int(col) < len(data_columns):
                selected.append(data_columns[int(col)])
            else:
                raise ValueError(
                    f"Observation column {col!r} not found; available: {data_columns}"
                )
        return selected
    observed = [c for c in data_columns if str(c).startswith("y")]
    return observed or data_columns


def read_observations(
    path: str | Path, d_o: int, obs_cols=None
) -> tuple[np.ndarray, np.ndarray]:
    """Read and validate an observation CSV.

    The file needs a header. A ``t`` column, when present, must be uniformly
    spaced; otherwise the caller supplies the step. Without ``obs_cols`` the
    ``y*`` columns are used (all non-time columns if there are none).

    Args:
        path: CSV file.
        d_o: Expected number of observation columns.
        obs_cols: Column names or 0-based indices among the non-time columns.

    Returns:
        tuple: (times or None, (n+1, d_o) observations).

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: On ragged rows, non-numeric cells or non-uniform times,
            naming the offending line
        DimensionError: If the selected columns do not match d_o
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Observation file not found: {path}")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.ParserError as e:
        raise ValueError(f"Malformed CSV {path}: {e}")
    except pd.errors.EmptyDataError:
        raise ValueError(f"Empty CSV file {path}")

    # header is line 1, data row k is line k + 2
    for col in frame.columns:
        cells = frame[col].str.strip()
        missing = np.flatnonzero((cells.isna() | cells.eq("")).to_numpy())
        if missing.size:
            raise ValueError(f"{path}: line {missing[0] + 2} has too few fields")
        numeric = pd.to_numeric(cells, errors="coerce")
        bad = np.flatnonzero(numeric.isna().to_numpy())
        if bad.size:
            raise ValueError(
                f"{path}: line {bad[0] + 2} column {col!r} is not numeric: "
                f"{frame[col].iloc[bad[0]]!r}"
            )
        frame[col] = numeric
    if len(frame) < 2:
        raise ValueError(f"{path}: need at least 2 observation rows, got {len(frame)}")

    columns = _select_columns(frame, obs_cols)
    if len(columns) != d_o:
        raise DimensionError(
            f"{path}: {len(columns)} observation columns {columns}, model expects {d_o}"
        )
    Y = frame[columns].to_numpy(dtype=float)

    times = None
    if TIME_COLUMN in frame.columns:
        times = frame[TIME_COLUMN].to_numpy(dtype=float)
        steps = np.diff(times)
        if steps[0] <= 0 or not np.allclose(steps, steps[0], rtol=STEP_RTOL, atol=0.0):
            bad = int(np.argmax(~np.isclose(steps, steps[0], rtol=STEP_RTOL, atol=0.0)))
            raise ValueError(
                f"{path}: time column is not uniformly increasing (line {bad + 3})"
            )
    return times, Y
