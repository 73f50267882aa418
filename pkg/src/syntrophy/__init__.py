"""Qualitative and numerical analysis of a two-species syntrophic chemostat.

Species 1 grows on substrate 1 and produces substrate 2, which inhibits it;
species 2 grows on substrate 2.  The package locates and classifies the
equilibria of the reduced planar system, sweeps the dilution rate for
bifurcations, integrates trajectories and maps basins of attraction.
"""
__version__ = "0.1.0"

from .errors import (AtBifurcationError, ConfigError, HypothesisError,  # noqa: E402
                     OutOfRegionError, ResidualError, SyntrophyError)
from .growth import (ChemostatConfig, GrowthFamily, GrowthModel, HypothesisReport,  # noqa: E402
                     check_hypotheses, eval_growth, eval_partials, register_family,
                     scale_parameters)
from .planar import PlanarState, graph_slope, graph_value, in_region, phi  # noqa: E402
from .equilibria import (EquilibriumRecord, RegimeReport, Thresholds,  # noqa: E402
                         classify_equilibrium, classify_regime, compute_thresholds,
                         find_boundary_F1, find_boundary_F2, find_positive_equilibria)
from .dynamics import (FullState, Trajectory, detect_attractor, integrate_full,  # noqa: E402
                       integrate_reduced, lift_to_full)
from .bifurcation import BranchDiagram, coalescence_witnesses, find_tangency, sweep  # noqa: E402
from .basins import BasinGrid, Separatrix, classify_basins, compute_separatrix  # noqa: E402
from ._core import BACKEND  # noqa: E402

__all__ = [
    "AtBifurcationError", "BACKEND", "BasinGrid", "BranchDiagram", "ChemostatConfig",
    "ConfigError", "EquilibriumRecord", "FullState", "GrowthFamily", "GrowthModel",
    "HypothesisError", "HypothesisReport", "OutOfRegionError", "PlanarState", "RegimeReport",
    "ResidualError", "Separatrix", "SyntrophyError", "Thresholds", "Trajectory",
    "check_hypotheses", "classify_basins", "classify_equilibrium", "classify_regime",
    "coalescence_witnesses", "compute_separatrix", "compute_thresholds", "detect_attractor",
    "eval_growth", "eval_partials", "find_boundary_F1", "find_boundary_F2",
    "find_positive_equilibria", "find_tangency", "graph_slope", "graph_value", "in_region",
    "integrate_full", "integrate_reduced", "lift_to_full", "phi", "register_family",
    "scale_parameters", "sweep",
]
