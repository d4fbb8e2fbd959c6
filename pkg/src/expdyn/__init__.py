# -*- coding: utf-8 -*-
"""
expdyn: a numerical laboratory for the exponential family f(z) = lambda * exp(z)

Certifies attracting cycles, solves for preperiodic singular orbits and
measures how densely hyperbolic parameters surround them.

Core Modules:
- OrbitEngine: orbits of f with log-modulus derivative tracking.
- CycleCertifier: interval-style certificates for attracting cycles.
- MisiurewiczSolver: Newton solver for preperiodic singular values.
- TransferEngine: backward-orbit shadowing across nearby parameters.
- MeasureLab: first-entry statistics and the rightward square cascade.
- DensityEstimator: sampled density of hyperbolic parameters.
"""

from .config import get_config, validate_config, config_manager, load_config, ExpDynConfig
from .data_models import (
    ExpParameter, OrbitTrace, Disk, CycleCertificate, TrapBallCertificate, Classification, Verdict,
    MisiurewiczCertificate, EstimatedConstants, BackwardOrbit, TransferResult, CascadeTrace,
    EntryStatsReport, DeepLeftReport, DensityReport, RenderSpec,
)
from .orbit_engine import OrbitEngine
from .certifier import CycleCertifier
from .misiurewicz_solver import MisiurewiczSolver
from .transfer_engine import TransferEngine
from .measure_lab import MeasureLab
from .density_estimator import DensityEstimator, wilson_interval
from .renderer import ParameterPlaneRenderer
from .report_writer import write_report, read_report
from .cli import run_command

__version__ = "0.1.1"
__description__ = "Exponential family dynamics laboratory"

__all__ = [
    # Configuration
    "get_config",
    "validate_config",
    "config_manager",
    "load_config",
    "ExpDynConfig",

    # Engines
    "OrbitEngine",
    "CycleCertifier",
    "MisiurewiczSolver",
    "TransferEngine",
    "MeasureLab",
    "DensityEstimator",
    "ParameterPlaneRenderer",

    # I/O
    "write_report",
    "read_report",
    "run_command",
    "wilson_interval",

    # Data Models
    "ExpParameter",
    "OrbitTrace",
    "Disk",
    "CycleCertificate",
    "TrapBallCertificate",
    "Classification",
    "Verdict",
    "MisiurewiczCertificate",
    "EstimatedConstants",
    "BackwardOrbit",
    "TransferResult",
    "CascadeTrace",
    "EntryStatsReport",
    "DeepLeftReport",
    "DensityReport",
    "RenderSpec",
]
