"""Experiment Configuration Module.

Resolves the settings of one CLI command from three layers, highest priority
first: explicit command-line flags, the command section of an experiment file
(``[simulate]``, ``[estimate]``, ``[mc]``, ``[check-hypo]``) over its
``[common]`` section, and the benchmark presets of built-in models.

Experiment file example:
    [common]
    model = fhn
    params = epsilon=0.1,gamma=1.5,beta=0.8,sigma=0.3
    seed = 7

    [mc]
    trials = 100
    settings = 1:1000,10:1000
"""

import configparser
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from hypoctrl.control import IterationOptions
from hypoctrl.models import BENCHMARKS, ModelSpec, ParameterVector, get_model

COMMANDS = ("simulate", "estimate", "mc", "check-hypo")

CONFIG_KEYS = (
    "model",
    "params",
    "init",
    "T",
    "n",
    "seed",
    "trials",
    "w_grid",
    "z0",
    "profile_z0",
    "obs_cols",
    "out",
    "epsilon",
    "max_iter",
    "m_b",
    "k_direction",
    "settings",
)

DEFAULT_TRIALS = 10


def parse_mapping(text: str) -> dict[str, float]:
    """Parse ``"a=1,b=2.5"`` into ``{"a": 1.0, "b": 2.5}``.

    Raises:
        ValueError: On entries without '=' or non-numeric values
    """
    mapping = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ValueError(f"Expected name=value, got {item!r}")
        try:
            mapping[key.strip()] = float(value)
        except ValueError:
            raise ValueError(f"Value of {key.strip()!r} is not a number: {value!r}")
    return mapping


def parse_floats(text: str) -> tuple[float, ...]:
    """Parse ``"1e15,1e20"`` into a tuple of floats."""
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValueError(f"Expected comma-separated numbers, got {text!r}")


def parse_settings(text: str) -> tuple[tuple[float, int], ...]:
    """Parse ``"10:1000,100:1000"`` into ((10.0, 1000), (100.0, 1000))."""
    settings = []
    for item in filter(None, (part.strip() for part in text.split(","))):
        T, sep, n = item.partition(":")
        if not sep:
            raise ValueError(f"Expected T:n, got {item!r}")
        try:
            settings.append((float(T), int(n)))
        except ValueError:
            raise ValueError(f"Expected T:n with numeric T and integer n, got {item!r}")
    return tuple(settings)


def parse_bool(text) -> bool:
    if isinstance(text, bool):
        return text
    value = str(text).strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"Expected a boolean, got {text!r}")


def read_config_file(path: str | Path) -> dict[str, dict[str, str]]:
    """Read an experiment file into {section: {key: raw value}}.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: On syntax errors, unknown sections or unknown keys
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Experiment file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as e:
        raise ValueError(f"Malformed experiment file {path}: {e}")

    sections = {}
    for section in parser.sections():
        if section != "common" and section not in COMMANDS:
            raise ValueError(f"Unknown section [{section}] in {path}")
        values = dict(parser[section])
        unknown = set(values) - set(CONFIG_KEYS)
        if unknown:
            raise ValueError(f"Unknown keys {sorted(unknown)} in [{section}] of {path}")
        sections[section] = values
    return sections


def _coerce(key: str, value):
    if not isinstance(value, str):
        return value
    match key:
        case "params" | "init":
            return parse_mapping(value)
        case "w_grid" | "z0":
            return parse_floats(value)
        case "settings":
            return parse_settings(value)
        case "T" | "epsilon":
            return float(value)
        case "n" | "seed" | "trials" | "max_iter" | "m_b":
            return int(value)
        case "profile_z0":
            return parse_bool(value)
        case "obs_cols":
            return tuple(c.strip() for c in value.split(",") if c.strip())
        case _:
            return value


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved settings of one command run."""

    command: str
    model_id: str
    params: Mapping[str, float] = field(default_factory=dict)
    init: Mapping[str, float] | None = None
    T: float | None = None
    n: int | None = None
    seed: int = 0
    trials: int = DEFAULT_TRIALS
    w_grid: tuple[float, ...] = ()
    z0: tuple[float, ...] | None = None
    profile_z0: bool = False
    obs_cols: tuple[str, ...] | None = None
    out: str | None = None
    epsilon: float | None = None
    max_iter: int | None = None
    m_b: int | None = None
    k_direction: str = "max"
    settings: tuple[tuple[float, int], ...] = ()

    def build_model(self) -> ModelSpec:
        return get_model(self.model_id)

    def true_psi(self, model: ModelSpec) -> ParameterVector:
        """Parameters used to simulate; positive entries may be 0 here."""
        return model.param_layout.make(self.params, allow_boundary=True)

    def initial_psi(self, model: ModelSpec) -> ParameterVector:
        """Starting point of the estimation (``init``, else ``params``)."""
        values = self.init if self.init is not None else self.params
        if not values:
            raise ValueError("Estimation needs initial values: pass --init or --params")
        return model.param_layout.make(values)

    def iteration_options(self) -> IterationOptions:
        if self.max_iter is None:
            return IterationOptions(epsilon=self.epsilon)
        return IterationOptions(epsilon=self.epsilon, max_iter=self.max_iter)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "model": self.model_id,
            "params": dict(self.params),
            "init": dict(self.init) if self.init is not None else None,
            "T": self.T,
            "n": self.n,
            "seed": self.seed,
            "trials": self.trials,
            "w_grid": list(self.w_grid),
            "z0": list(self.z0) if self.z0 is not None else None,
            "profile_z0": self.profile_z0,
            "epsilon": self.epsilon,
            "max_iter": self.max_iter,
            "m_b": self.m_b,
            "k_direction": self.k_direction,
            "settings": [list(s) for s in self.settings],
        }


def _preset_values(model_id: str) -> dict:
    preset = BENCHMARKS.get(model_id)
    if preset is None:
        return {}
    T, n = preset.settings[0]
    return {
        "params": dict(preset.truth),
        "z0": preset.z0,
        "profile_z0": preset.profile_z0,
        "w_grid": preset.w_grid,
        "T": T,
        "n": n,
        "settings": preset.settings,
    }


def resolve_config(
    command: str,
    flags: Mapping[str, object],
    config_path: str | Path | None = None,
) -> ExperimentConfig:
    """Merge flags, experiment file and presets into an ExperimentConfig.

    Args:
        command: One of simulate, estimate, mc, check-hypo.
        flags: Command-line values keyed like the experiment file; None means unset.
        config_path: Optional experiment file.

    Returns:
        ExperimentConfig: Validated configuration.

    Raises:
        FileNotFoundError: If the experiment file is missing
        ValueError: On malformed or inconsistent values
        ModelError: If the model identifier is unknown
    """
    if command not in COMMANDS:
        raise ValueError(f"Unknown command {command!r}")
    sections = read_config_file(config_path) if config_path else {}
    from_file = {**sections.get("common", {}), **sections.get(command, {})}
    explicit = {k: v for k, v in flags.items() if v is not None}
    layered = {k: _coerce(k, v) for k, v in {**from_file, **explicit}.items()}

    model_id = layered.get("model")
    if not model_id:
        raise ValueError("No model given: use --model or set 'model' in the experiment file")
    get_model(model_id)

    values = _preset_values(model_id)
    if command == "estimate":
        # real data: starting values and the grid come from the user or the file
        for key in ("params", "T", "n", "settings"):
            values.pop(key, None)
    values.update(layered)
    # explicit T/n describe a single setting and replace the preset table
    if ("T" in layered or "n" in layered) and "settings" not in layered:
        values["settings"] = ((values.get("T"), values.get("n")),)

    config = ExperimentConfig(
        command=command,
        model_id=model_id,
        params=values.get("params", {}),
        init=values.get("init"),
        T=values.get("T"),
        n=values.get("n"),
        seed=values.get("seed", 0),
        trials=values.get("trials", DEFAULT_TRIALS),
        w_grid=tuple(values.get("w_grid", ())),
        z0=tuple(values["z0"]) if values.get("z0") is not None else None,
        profile_z0=values.get("profile_z0", False),
        obs_cols=values.get("obs_cols"),
        out=values.get("out"),
        epsilon=values.get("epsilon"),
        max_iter=values.get("max_iter"),
        m_b=values.get("m_b"),
        k_direction=values.get("k_direction", "max"),
        settings=tuple(values.get("settings", ())),
    )
    _validate(config)
    return config


def _validate(config: ExperimentConfig) -> None:
    if config.k_direction not in ("max", "min"):
        raise ValueError(f"k_direction must be 'max' or 'min', got {config.k_direction!r}")
    if config.m_b is not None and config.m_b < 0:
        raise ValueError(f"m_b must be >= 0, got {config.m_b}")
    if config.command in ("simulate", "check-hypo") and (config.T is None or config.n is None):
        raise ValueError("Both T and n are required (no preset for this model)")
    if config.command == "mc" and (
        not config.settings or any(T is None or n is None for T, n in config.settings)
    ):
        raise ValueError("Monte Carlo needs T and n or --settings (no preset for this model)")
    if config.command in ("simulate", "check-hypo", "mc"):
        if config.z0 is None:
            raise ValueError("Initial state z0 is required (no preset for this model)")
    for T, n in config.settings or ((config.T, config.n),):
        if T is not None and T <= 0:
            raise ValueError(f"T must be > 0, got {T}")
        if n is not None and n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
    if config.command in ("estimate", "mc") and not config.w_grid:
        raise ValueError("Weight grid W is empty: pass --w-grid")
    if config.command == "mc" and config.trials < 1:
        raise ValueError(f"trials must be >= 1, got {config.trials}")
