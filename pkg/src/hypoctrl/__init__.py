from hypoctrl import analysis, control, estimation, models, simulation, utils

__all__ = [
    "analysis",
    "control",
    "estimation",
    "models",
    "simulation",
    "utils",
]
