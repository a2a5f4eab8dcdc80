"""Numerical toolkit for weak locking over quantum wiretap channels."""

from __future__ import annotations

from ._kernels import BACKEND
from .channels import (
    CqChannelSpec,
    SymmetricChannelSpec,
    WiretapChannel,
    build_mub_example,
    build_qc_channel,
    build_schur_multiplier,
    build_symmetric_channel,
)
from .config import DEFAULT_BUDGET, DEFAULT_TOL, Budget, BudgetExceeded, Tolerances, ValidationError
from .entropy import Ensemble
from .extractor import ExtractorSpec, ToeplitzSeed, ZeroFiberError
from .optimize import OptimizationResult, OptimizerConfig
from .protocol import EveStrategy, LockingCode, SimulationReport
from .qlinalg import Povm

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Budget",
    "BudgetExceeded",
    "CqChannelSpec",
    "DEFAULT_BUDGET",
    "DEFAULT_TOL",
    "Ensemble",
    "EveStrategy",
    "ExtractorSpec",
    "LockingCode",
    "OptimizationResult",
    "OptimizerConfig",
    "Povm",
    "SimulationReport",
    "SymmetricChannelSpec",
    "Tolerances",
    "ToeplitzSeed",
    "ValidationError",
    "WiretapChannel",
    "ZeroFiberError",
    "build_mub_example",
    "build_qc_channel",
    "build_schur_multiplier",
    "build_symmetric_channel",
]
