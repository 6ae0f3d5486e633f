from hypoctrl.models._benchmarks import (
    BENCHMARKS,
    SYNAPTIC_FIXED_DEFAULTS,
    BenchmarkPreset,
    available_models,
    get_model,
    make_cyclic_feedback,
    make_fhn,
    make_synaptic_conductance,
    register_model,
)
from hypoctrl.models._model_spec import ModelSpec, check_pseudo_linear
from hypoctrl.models._parameters import Parameter, ParameterLayout, ParameterVector

__all__ = [
    "BENCHMARKS",
    "SYNAPTIC_FIXED_DEFAULTS",
    "BenchmarkPreset",
    "ModelSpec",
    "Parameter",
    "ParameterLayout",
    "ParameterVector",
    "available_models",
    "check_pseudo_linear",
    "get_model",
    "make_cyclic_feedback",
    "make_fhn",
    "make_synaptic_conductance",
    "register_model",
]
