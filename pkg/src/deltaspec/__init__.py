"""Spectral analysis of one-dimensional Schrodinger operators with delta and delta' point interactions."""

from deltaspec.criteria import Report, Verdict, aggregate, analyze
from deltaspec.model import (
    HamiltonianConfig,
    Kind,
    PiecewisePotential,
    Support,
    config_from_json,
    delta,
    delta_prime,
    load_config,
)

__version__ = "0.1.0"

__all__ = [
    "HamiltonianConfig",
    "Kind",
    "PiecewisePotential",
    "Report",
    "Support",
    "Verdict",
    "aggregate",
    "analyze",
    "config_from_json",
    "delta",
    "delta_prime",
    "load_config",
]
