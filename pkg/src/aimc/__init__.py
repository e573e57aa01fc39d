"""Adaptively-weighted integral-space multiview clustering (AIMC) and the NONMF baseline."""

from .io import SyntheticSpec, gen_synthetic, load_dataset
from .metrics import MetricReport, evaluate
from .model import ModelState, MultiviewDataset, SolveResult, SolverConfig, validate_dataset
from .nonmf import nonmf_solve
from .solver import solve

__all__ = [
    "MetricReport",
    "ModelState",
    "MultiviewDataset",
    "SolveResult",
    "SolverConfig",
    "SyntheticSpec",
    "evaluate",
    "gen_synthetic",
    "load_dataset",
    "nonmf_solve",
    "solve",
    "validate_dataset",
]

__version__ = "0.1.0"
