from .asymptotics import AsymptoticModel, compute_ase, compute_ase_star, compute_r0_r1, x_star
from .config import ExperimentConfig, ExperimentKind, build_config, load_config
from .output import write_result
from .reference import ReferenceQuantities, plugin_reference, reference_cdf
from .runner import ExperimentResult, run_experiment

__all__ = [
    "AsymptoticModel",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentResult",
    "ReferenceQuantities",
    "build_config",
    "compute_ase",
    "compute_ase_star",
    "compute_r0_r1",
    "load_config",
    "plugin_reference",
    "reference_cdf",
    "run_experiment",
    "write_result",
    "x_star",
]
