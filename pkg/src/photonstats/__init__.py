"""Photon statistics of a weakly driven two-level atom in a cavity, with and
without a quantized center-of-mass vibration.

Numerics (truncated Fock space, Lindblad steady state, quantum regression)
and the weak-drive closed forms live side by side so every output can be
cross-checked.
"""

from .errors import (
    ConvergenceError,
    DimensionError,
    NonHermitianError,
    NonUniqueSteadyStateError,
    ParameterError,
    PhotonStatsError,
    SingularPointError,
    UndefinedCorrelationError,
)
from .hilbert import SpaceSpec, annihilation, embed, mode_operators, sigma_minus
from .models import ModelParams
from .liouville import build_liouvillian, propagate, steadystate, system_liouvillian
from .correlations import g2_tau, g2_zero, mean_photon, schwarz_violation
from .analytic import com_analytic_g2, com_analytic_nbar, jc_analytic_g2, jc_analytic_nbar
from .sweep import Axis, SweepSpec, figure_preset, run

__version__ = "0.1.0"

__all__ = [
    "Axis", "ConvergenceError", "DimensionError", "ModelParams", "NonHermitianError",
    "NonUniqueSteadyStateError", "ParameterError", "PhotonStatsError", "SingularPointError",
    "SpaceSpec", "SweepSpec", "UndefinedCorrelationError", "annihilation", "build_liouvillian",
    "com_analytic_g2", "com_analytic_nbar", "embed", "figure_preset", "g2_tau", "g2_zero",
    "jc_analytic_g2", "jc_analytic_nbar", "mean_photon", "mode_operators", "propagate", "run",
    "schwarz_violation", "sigma_minus", "steadystate", "system_liouvillian",
]
