"""Electromagnetic energy densities in uniform dispersive, absorbing dielectrics.

Natural units are used throughout the library: hbar = c = k_B = 1, and all
frequencies are angular frequencies in one arbitrary global scale.
"""

__version__ = "0.1.0"

from .constants import C, HBAR, K_B
from .errors import (
    AbsorptionError,
    AnomalousDispersionError,
    AnomalousDispersionWarning,
    ConvergenceWarning,
    DivergenceError,
    EvanescentWarning,
    FrequencyRangeError,
    QuadratureError,
    ResolutionWarning,
    ValidationError,
)
from .dispersion import (
    DispersionModel,
    OpticalResponse,
    eval_permittivity,
    eval_permeability,
    group_velocity,
    kramers_kronig_residual,
    optical_response,
    refractive_index,
)
from .qed_spectrum import ThermalState, spectral_density_model, total_density
from .absorbing_energy import (
    RegularizationConfig,
    energy_breakdown,
    final_expression_spectrum,
    thermal_total_energy,
    total_energy_spectrum,
)
from .oscillator import OscillatorParams
from .sed_sim import (
    oscillator_energy_analytic,
    reconstruct_field_spectrum,
    sample_noise_polarization,
    simulate_oscillator,
)

__all__ = [
    "__version__",
    "C",
    "HBAR",
    "K_B",
    "AbsorptionError",
    "AnomalousDispersionError",
    "AnomalousDispersionWarning",
    "ConvergenceWarning",
    "DivergenceError",
    "EvanescentWarning",
    "FrequencyRangeError",
    "QuadratureError",
    "ResolutionWarning",
    "ValidationError",
    "DispersionModel",
    "OpticalResponse",
    "eval_permittivity",
    "eval_permeability",
    "group_velocity",
    "kramers_kronig_residual",
    "optical_response",
    "refractive_index",
    "ThermalState",
    "spectral_density_model",
    "total_density",
    "RegularizationConfig",
    "energy_breakdown",
    "final_expression_spectrum",
    "thermal_total_energy",
    "total_energy_spectrum",
    "OscillatorParams",
    "oscillator_energy_analytic",
    "reconstruct_field_spectrum",
    "sample_noise_polarization",
    "simulate_oscillator",
]
