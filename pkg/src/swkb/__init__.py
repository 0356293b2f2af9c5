"""Semiclassical WKB toolkit for -h^2 u'' + x^gamma W(x) u = E u on [0, b].

Modules: ``potential`` (V = x**gamma W and action quadratures), ``gte``
(truncated generalized-power-series arithmetic), ``wkb_exterior``
(oscillatory quasimodes away from the origin), ``interior`` (rescaled
Volterra solutions near the origin), ``matching`` (the 2x2 transfer
matrix gluing the two), ``spectral`` (Bohr-Sommerfeld and matched
eigenvalues), ``oracle`` (direct ODE integration as ground truth) and
``cli`` (batch runner).
"""

from . import (  # noqa: F401
    cli,
    errors,
    gte,
    interior,
    matching,
    oracle,
    potential,
    spectral,
    wkb_exterior,
)
from .interior import InteriorConfig, InteriorSolution, make_config, solve_basis
from .matching import MatchConfig, TransferMatrix, connect, fit_corrections
from .oracle import OracleConfig, propagate
from .potential import EnergyWindow, Potential, WModel, make_potential, validate
from .spectral import (
    SpectralResult,
    bs_leading,
    convergence_study,
    eigenvalues_matched,
    quantization_function,
)
from .wkb_exterior import CauchyDatum, Quasimode, build_quasimode, evaluate_quasimode

__version__ = "0.1.0"

__all__ = [
    "CauchyDatum",
    "EnergyWindow",
    "InteriorConfig",
    "InteriorSolution",
    "MatchConfig",
    "OracleConfig",
    "Potential",
    "Quasimode",
    "SpectralResult",
    "TransferMatrix",
    "WModel",
    "bs_leading",
    "build_quasimode",
    "connect",
    "convergence_study",
    "eigenvalues_matched",
    "evaluate_quasimode",
    "make_config",
    "make_potential",
    "propagate",
    "quantization_function",
    "solve_basis",
    "validate",
    "cli",
    "errors",
    "gte",
    "interior",
    "matching",
    "oracle",
    "potential",
    "spectral",
    "wkb_exterior",
]
