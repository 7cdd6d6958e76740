"""Paradifferential calculus and solvers for quasilinear symmetric hyperbolic systems on the torus."""
from .envelope import FrequencyEnvelope, sharp_envelope
from .harness import ExperimentResult, run_named
from .model import HyperbolicSystem, apply_N, apply_paradiff, get_system, perturbative_F
from .norms import control_params, l2_norm, sobolev_norm
from .paraproduct import ParaConfig, para_decompose, para_highhigh, para_lowhigh
from .solver import SolveConfig, Trajectory, euler_reg_step, iteration_solve, solve
from .spectral import BlowupDetected, Field, GridSpec

__all__ = [
    "BlowupDetected",
    "ExperimentResult",
    "Field",
    "FrequencyEnvelope",
    "GridSpec",
    "HyperbolicSystem",
    "ParaConfig",
    "SolveConfig",
    "Trajectory",
    "apply_N",
    "apply_paradiff",
    "control_params",
    "euler_reg_step",
    "get_system",
    "iteration_solve",
    "l2_norm",
    "para_decompose",
    "para_highhigh",
    "para_lowhigh",
    "perturbative_F",
    "run_named",
    "sharp_envelope",
    "sobolev_norm",
    "solve",
]
