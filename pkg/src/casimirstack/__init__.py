"""Casimir energy of stacks of dielectric or plasma-sheet cavities.

The generating function of N equal cavities is assembled from single-cavity
interaction terms, checked against a boundary-condition determinant, and
integrated over Matsubara frequencies and transverse momentum.
"""
__version__ = "0.1.0"

from .constants import (CODATA, ROUNDED, Constants, SpectralPoint, StackKind, StackSpec,
                        constant_permittivity, matsubara_frequency, omega_from_carriers, vacuum)
from .coeffs import Polarization, cavity_series, rst
from .assembly import delta_dielectric, delta_plasma, expand_delta, format_expansion, parse_expansion
from .oracle import regularized_delta, series_delta, equivalence_suite
from .energy import (EnergyResult, NonConvergence, QuadratureConfig, casimir_energies, casimir_energy,
                     ratio_curve)
from .fitting import (FitResult, closed_form_energy, fit_power_law, fit_power_law_direct,
                      fit_ratio_asymptote, fit_ratio_asymptote_grid)
from .superconductor import SuperconductorModel, load_presets, preset, transition_energies
from .kernel import BACKEND

__all__ = [
    "__version__", "BACKEND",
    "CODATA", "ROUNDED", "Constants", "SpectralPoint", "StackKind", "StackSpec",
    "constant_permittivity", "matsubara_frequency", "omega_from_carriers", "vacuum",
    "Polarization", "cavity_series", "rst",
    "delta_dielectric", "delta_plasma", "expand_delta", "format_expansion", "parse_expansion",
    "regularized_delta", "series_delta", "equivalence_suite",
    "EnergyResult", "NonConvergence", "QuadratureConfig", "casimir_energies", "casimir_energy", "ratio_curve",
    "FitResult", "closed_form_energy", "fit_power_law", "fit_power_law_direct",
    "fit_ratio_asymptote", "fit_ratio_asymptote_grid",
    "SuperconductorModel", "load_presets", "preset", "transition_energies",
]
